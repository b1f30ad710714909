//! Bigram HMM part-of-speech tagger with a closed lexicon.
//!
//! Decoding uses the Bayes-rewritten objective: each output term `P(w|t)` is
//! replaced by `P(t|w) / P(t)`, dropping the path-independent `P(w)`. The
//! parameters are therefore tag probabilities, tag transitions (including
//! from the sentence-start state) and lexical probabilities `P(t|w)`.

mod counts;
mod lexicon;
mod model;
mod segment;
mod viterbi;

pub use counts::{HmmCounts, ModelSize};
pub use lexicon::{Anchor, Lexicon, TagId, TagSet, TaggedCorpus, TaggedSentence, WordId};
pub use model::{HmmModel, SegmentModel, TagScorer};
pub use segment::{segment_sentence, segment_tokens, split_examples, Segment, TaggerExample};
pub use viterbi::{decode_lattice, tag_sentence, viterbi, Decoding};

use crate::error::Result;

/// Tagging accuracy over a test corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy {
    /// Fraction of ambiguous positions tagged correctly; 1.0 when there are
    /// none (see `ambiguous_positions`).
    pub ambiguous: f64,
    pub all: f64,
    pub ambiguous_positions: usize,
    pub all_positions: usize,
}

impl Accuracy {
    pub fn ambiguous_undefined(&self) -> bool {
        self.ambiguous_positions == 0
    }
}

/// Decodes every test sentence and compares against the gold tags.
pub fn evaluate_accuracy<S: TagScorer + ?Sized>(
    model: &S,
    test: &TaggedCorpus,
) -> Result<Accuracy> {
    let lex = model.lexicon();
    let (mut amb_ok, mut amb_n, mut all_ok, mut all_n) = (0usize, 0usize, 0usize, 0usize);
    for sentence in &test.sentences {
        let predicted = tag_sentence(model, &sentence.words)?;
        for ((&w, &gold), &guess) in sentence.words.iter().zip(&sentence.tags).zip(&predicted) {
            let hit = usize::from(gold == guess);
            all_n += 1;
            all_ok += hit;
            if lex.is_ambiguous(w) {
                amb_n += 1;
                amb_ok += hit;
            }
        }
    }
    let ratio = |ok: usize, n: usize| if n == 0 { 1.0 } else { ok as f64 / n as f64 };
    Ok(Accuracy {
        ambiguous: ratio(amb_ok, amb_n),
        all: ratio(all_ok, all_n),
        ambiguous_positions: amb_n,
        all_positions: all_n,
    })
}
