//! Experiment orchestration: streams, paired baseline runs and CSV output.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ccf::{CcfWorld, Outcome};
use crate::committee::{normalized_vote_entropy, segment_votes};
use crate::error::{Error, Result};
use crate::hmm::{
    segment_sentence, split_examples, tag_sentence, HmmCounts, HmmModel, Lexicon, TagId,
    TaggedCorpus, TaggerExample,
};
use crate::posterior::SamplingConfig;
use crate::selection::{
    run_active_learning, CcfLearner, CcfMetrics, CurveRecord, GoldOracle, Protocol, RunOutcome,
    Schedule, SelectionConfig, TaggerLearner, TaggerMetrics,
};

use super::io::{load_corpus, load_lexicon, shuffle_sentences};

pub const TAGGER_COLUMNS: [&str; 10] = [
    "examined",
    "selected",
    "labeled_ambiguous",
    "labeled_total",
    "acc_ambiguous",
    "acc_all",
    "lexical_nonzero",
    "bigram_nonzero",
    "sel_freq_window",
    "acc_ambiguous_undefined",
];

pub const CCF_COLUMNS: [&str; 5] = [
    "examined",
    "selected",
    "sel_freq_window",
    "expected_acc",
    "ptm_acc",
];

/// Training stream, test set and lexicon for a tagger experiment.
#[derive(Debug, Clone)]
pub struct TaggerData {
    pub lexicon: Arc<Lexicon>,
    pub train: TaggedCorpus,
    pub test: Arc<TaggedCorpus>,
}

impl TaggerData {
    pub fn new(lexicon: Arc<Lexicon>, train: TaggedCorpus, test: TaggedCorpus) -> Result<Self> {
        train.validate(&lexicon)?;
        test.validate(&lexicon)?;
        Ok(TaggerData {
            lexicon,
            train,
            test: Arc::new(test),
        })
    }

    /// Loads the files; training sentences are shuffled when a seed is given.
    pub fn load(lexicon: &Path, train: &Path, test: &Path, shuffle: Option<u64>) -> Result<Self> {
        let lexicon = Arc::new(load_lexicon(lexicon)?);
        let mut train = load_corpus(train, &lexicon)?;
        if let Some(seed) = shuffle {
            shuffle_sentences(&mut train, seed);
        }
        let test = load_corpus(test, &lexicon)?;
        Self::new(lexicon, train, test)
    }

    /// Examples in corpus order with their gold tags.
    pub fn stream(&self) -> (Vec<TaggerExample>, Vec<Vec<TagId>>) {
        let mut examples = Vec::new();
        let mut gold = Vec::new();
        for (i, s) in self.train.sentences.iter().enumerate() {
            for ex in split_examples(i, &s.words, &self.lexicon) {
                gold.push(s.tags[ex.offset..ex.offset + ex.len()].to_vec());
                examples.push(ex);
            }
        }
        (examples, gold)
    }
}

#[derive(Debug, Clone)]
pub enum Backend {
    Ccf { colors: usize, flips: usize },
    Tagger(TaggerData),
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub backend: Backend,
    pub selection: SelectionConfig,
    pub schedule: Schedule,
    /// Also run complete training over the same stream.
    pub baseline: bool,
}

/// The same configuration with every example labeled.
pub fn baseline_config(cfg: &SelectionConfig) -> SelectionConfig {
    SelectionConfig {
        protocol: Protocol::Complete,
        ..cfg.clone()
    }
}

/// A random world and a stream of flips drawn from it, both from `seed`.
pub fn ccf_stream(
    colors: usize,
    flips: usize,
    seed: u64,
) -> Result<(CcfWorld, Vec<usize>, Vec<Outcome>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let world = CcfWorld::random(colors, &mut rng)?;
    rng.set_stream(2);
    let (colors, outcomes) = (0..flips)
        .map(|_| {
            let f = world.draw_flip(&mut rng);
            (f.color, f.outcome)
        })
        .unzip();
    Ok((world, colors, outcomes))
}

pub fn run_ccf(
    colors: usize,
    flips: usize,
    cfg: &SelectionConfig,
    schedule: &Schedule,
) -> Result<RunOutcome<CcfLearner, CcfMetrics>> {
    let (world, stream, outcomes) = ccf_stream(colors, flips, cfg.seed)?;
    run_active_learning(
        CcfLearner::new(world),
        &stream,
        &mut GoldOracle::new(outcomes),
        cfg,
        schedule,
    )
}

pub fn run_tagger(
    data: &TaggerData,
    cfg: &SelectionConfig,
    schedule: &Schedule,
) -> Result<RunOutcome<TaggerLearner, TaggerMetrics>> {
    let (stream, gold) = data.stream();
    let learner = TaggerLearner::new(
        data.lexicon.clone(),
        data.test.clone(),
        cfg.sampling.smoothing(),
    )?;
    run_active_learning(learner, &stream, &mut GoldOracle::new(gold), cfg, schedule)
}

fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

pub fn write_ccf_csv<W: Write>(records: &[CurveRecord<CcfMetrics>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CCF_COLUMNS)?;
    for r in records {
        w.write_record([
            r.examined.to_string(),
            r.selected.to_string(),
            fixed(r.sel_freq_window),
            fixed(r.metrics.expected_accuracy),
            fixed(r.metrics.ptm_accuracy),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing csv", e))
}

pub fn write_tagger_csv<W: Write>(records: &[CurveRecord<TaggerMetrics>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TAGGER_COLUMNS)?;
    for r in records {
        let acc = &r.metrics.accuracy;
        w.write_record([
            r.examined.to_string(),
            r.selected.to_string(),
            r.labeled_ambiguous.to_string(),
            r.labeled_total.to_string(),
            fixed(acc.ambiguous),
            fixed(acc.all),
            r.metrics.size.lexical.to_string(),
            r.metrics.size.bigram.to_string(),
            fixed(r.sel_freq_window),
            u8::from(acc.ambiguous_undefined()).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing csv", e))
}

/// `run.csv` → `run.baseline.csv`.
pub fn baseline_path(out: &Path) -> PathBuf {
    match out.extension().and_then(|e| e.to_str()) {
        Some(ext) => out.with_extension(format!("baseline.{ext}")),
        None => out.with_extension("baseline.csv"),
    }
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(format!("cannot create {}", path.display()), e))
}

/// What an experiment produced besides its CSV files.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    pub files: Vec<PathBuf>,
    /// Tagger runs only: entropy of correctly and wrongly tagged test words
    /// under the final model.
    pub entropy: Option<EntropyReport>,
}

/// Runs the spec and writes `out`, plus the baseline curve next to it when
/// requested.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path) -> Result<ExperimentReport> {
    let mut configs = vec![(spec.selection.clone(), out.to_path_buf())];
    if spec.baseline {
        configs.push((baseline_config(&spec.selection), baseline_path(out)));
    }
    let mut report = ExperimentReport::default();
    for (i, (cfg, path)) in configs.iter().enumerate() {
        match &spec.backend {
            Backend::Ccf { colors, flips } => {
                let run = run_ccf(*colors, *flips, cfg, &spec.schedule)?;
                write_ccf_csv(&run.records, create(path)?)?;
            }
            Backend::Tagger(data) => {
                let run = run_tagger(data, cfg, &spec.schedule)?;
                write_tagger_csv(&run.records, create(path)?)?;
                if i == 0 && run.state.learner.counts().tag_counts().total() > 0 {
                    let sampling = SamplingConfig::new(
                        crate::selection::DIAGNOSTIC_TEMPERATURE,
                        cfg.sampling.smoothing(),
                    )?;
                    report.entropy = Some(entropy_by_correctness(
                        run.state.learner.counts(),
                        &data.test,
                        crate::selection::DIAGNOSTIC_COMMITTEE,
                        &sampling,
                        cfg.seed,
                    )?);
                }
            }
        }
        report.files.push(path.clone());
    }
    Ok(report)
}

/// Mean vote entropy of correctly and incorrectly tagged words.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropySplit {
    pub correct_mean: f64,
    pub incorrect_mean: f64,
    pub correct: usize,
    pub incorrect: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyReport {
    /// Over ambiguous test words.
    pub ambiguous: EntropySplit,
    /// Over all test words; unambiguous ones have zero entropy and are
    /// always right.
    pub all: EntropySplit,
}

#[derive(Default)]
struct Sums {
    amb: [(f64, usize); 2],
    all: [(f64, usize); 2],
}

impl Sums {
    fn add(&mut self, entropy: f64, correct: bool, ambiguous: bool) {
        let slot = usize::from(!correct);
        self.all[slot].0 += entropy;
        self.all[slot].1 += 1;
        if ambiguous {
            self.amb[slot].0 += entropy;
            self.amb[slot].1 += 1;
        }
    }

    fn merge(mut self, other: Sums) -> Sums {
        for i in 0..2 {
            self.amb[i].0 += other.amb[i].0;
            self.amb[i].1 += other.amb[i].1;
            self.all[i].0 += other.all[i].0;
            self.all[i].1 += other.all[i].1;
        }
        self
    }
}

fn split(s: [(f64, usize); 2]) -> EntropySplit {
    let mean = |(sum, n): (f64, usize)| if n == 0 { 0.0 } else { sum / n as f64 };
    EntropySplit {
        correct_mean: mean(s[0]),
        incorrect_mean: mean(s[1]),
        correct: s[0].1,
        incorrect: s[1].1,
    }
}

/// Tags the test set with the maximum-likelihood model of `counts` and
/// relates each word's committee vote entropy to whether it was tagged
/// correctly.
pub fn entropy_by_correctness(
    counts: &HmmCounts,
    test: &TaggedCorpus,
    k: usize,
    sampling: &SamplingConfig,
    seed: u64,
) -> Result<EntropyReport> {
    let model = HmmModel::mle(counts, sampling.smoothing())?;
    let lex = counts.lexicon();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4);
    let seeds: Vec<u64> = test.sentences.iter().map(|_| rng.next_u64()).collect();
    let sums = test
        .sentences
        .par_iter()
        .zip(seeds)
        .map(|(s, seed)| -> Result<Sums> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let predicted = tag_sentence(&model, &s.words)?;
            let mut entropy = vec![0.0; s.len()];
            for seg in segment_sentence(&s.words, lex) {
                let tallies = segment_votes(counts, &seg, k, sampling, &mut rng)?;
                for (i, t) in tallies.iter().enumerate() {
                    entropy[seg.start + i] = normalized_vote_entropy(t, t.class_count()).value();
                }
            }
            let mut sums = Sums::default();
            for i in 0..s.len() {
                sums.add(
                    entropy[i],
                    predicted[i] == s.tags[i],
                    lex.is_ambiguous(s.words[i]),
                );
            }
            Ok(sums)
        })
        .try_reduce(Sums::default, |a, b| Ok(a.merge(b)))?;
    Ok(EntropyReport {
        ambiguous: split(sums.amb),
        all: split(sums.all),
    })
}
