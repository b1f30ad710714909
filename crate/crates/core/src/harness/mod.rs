//! Experiment harness: data files, synthetic corpora, experiment runs and
//! CSV output.

mod experiment;
mod io;
mod synthetic;

pub use experiment::{
    baseline_config, baseline_path, ccf_stream, entropy_by_correctness, run_ccf, run_experiment,
    run_tagger, write_ccf_csv, write_tagger_csv, Backend, EntropyReport, EntropySplit,
    ExperimentReport, ExperimentSpec, TaggerData, CCF_COLUMNS, TAGGER_COLUMNS,
};
pub use io::{
    load_corpus, load_lexicon, read_corpus, read_lexicon, save_corpus, save_lexicon,
    shuffle_sentences, write_corpus, write_lexicon,
};
pub use synthetic::{
    generate_shaped_corpus, generate_synthetic_corpus, SyntheticCorpus, SyntheticLanguage,
    SyntheticShape, SyntheticSpec, MAX_SENTENCE, MIN_SENTENCE,
};

use crate::hmm::{HmmCounts, ModelSize};

/// Nonzero lexical and bigram count entries.
pub fn count_model_size(counts: &HmmCounts) -> ModelSize {
    counts.model_size()
}
