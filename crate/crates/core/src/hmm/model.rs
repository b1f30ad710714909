use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::posterior::{sample_multinomial, smoothed_estimate, ProbabilityVector, SamplingConfig};

use super::counts::HmmCounts;
use super::lexicon::{Anchor, Lexicon, TagId, WordId};
use super::segment::Segment;

/// Parameter access needed for decoding. Probabilities, not logs.
pub trait TagScorer {
    fn lexicon(&self) -> &Lexicon;

    /// `P(from → to)`.
    fn transition(&self, from: Anchor, to: TagId) -> f64;

    /// `P(tag | word)`; zero for tags outside the word's allowed set.
    fn lexical(&self, word: WordId, tag: TagId) -> f64;

    /// `P(tag)`.
    fn tag_prob(&self, tag: TagId) -> f64;

    /// Local log-score `log P(t|w) − log P(t)` of labeling `word` with `tag`.
    fn log_local(&self, word: WordId, tag: TagId) -> f64 {
        let p = self.lexical(word, tag);
        if p <= 0.0 {
            return f64::NEG_INFINITY;
        }
        p.ln() - self.tag_prob(tag).ln()
    }

    fn log_transition(&self, from: Anchor, to: TagId) -> f64 {
        self.transition(from, to).ln()
    }
}

/// A concrete bigram tagger parameterization.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmModel {
    lexicon: Arc<Lexicon>,
    tag_prob: ProbabilityVector,
    transitions: Vec<ProbabilityVector>,
    lexical: Vec<ProbabilityVector>,
    word_prob: ProbabilityVector,
}

impl HmmModel {
    /// Assembles a model from explicit parameter groups: one transition row
    /// per tag plus a final row for the start state, and one lexical group per
    /// word over its allowed tags.
    pub fn from_parts(
        lexicon: Arc<Lexicon>,
        tag_prob: ProbabilityVector,
        transitions: Vec<ProbabilityVector>,
        lexical: Vec<ProbabilityVector>,
        word_prob: ProbabilityVector,
    ) -> Result<Self> {
        let t = lexicon.tag_count();
        if tag_prob.len() != t {
            return Err(Error::invalid("tag probabilities do not match the tag set"));
        }
        if transitions.len() != t + 1 || transitions.iter().any(|row| row.len() != t) {
            return Err(Error::invalid("transition table must be (tags + 1) × tags"));
        }
        if lexical.len() != lexicon.word_count()
            || lexicon
                .words()
                .any(|w| lexical[w.index()].len() != lexicon.allowed(w).len())
        {
            return Err(Error::invalid(
                "lexical groups must cover each word's allowed tags",
            ));
        }
        if word_prob.len() != lexicon.word_count() {
            return Err(Error::invalid(
                "word probabilities do not match the vocabulary",
            ));
        }
        Ok(HmmModel {
            lexicon,
            tag_prob,
            transitions,
            lexical,
            word_prob,
        })
    }

    /// Every group uniform; the model of an empty training set.
    pub fn uniform(lexicon: Arc<Lexicon>) -> Self {
        let t = lexicon.tag_count();
        let lexical = lexicon
            .words()
            .map(|w| ProbabilityVector::uniform(lexicon.allowed(w).len()))
            .collect();
        HmmModel {
            tag_prob: ProbabilityVector::uniform(t),
            transitions: (0..=t).map(|_| ProbabilityVector::uniform(t)).collect(),
            lexical,
            word_prob: ProbabilityVector::uniform(lexicon.word_count().max(1)),
            lexicon,
        }
    }

    /// Smoothed point estimate: transition and lexical groups interpolated
    /// with the uniform distribution by `smoothing`; tag probabilities
    /// likewise (plain ratios at `smoothing = 0`).
    pub fn mle(counts: &HmmCounts, smoothing: f64) -> Result<Self> {
        let tag_prob = Self::tag_group(counts, smoothing)?;
        let word_prob = Self::word_group(counts, smoothing);
        let lexicon = counts.lexicon().clone();
        let t = lexicon.tag_count();
        let transitions = (0..=t)
            .map(|row| smoothed_estimate(counts.transitions_from(anchor_of_row(row, t)), smoothing))
            .collect();
        let lexical = lexicon
            .words()
            .map(|w| smoothed_estimate(counts.lexical(w), smoothing))
            .collect();
        Ok(HmmModel {
            lexicon,
            tag_prob,
            transitions,
            lexical,
            word_prob,
        })
    }

    /// A committee member: every transition and lexical group drawn
    /// independently from its approximate posterior. Tag probabilities are
    /// not sampled.
    pub fn sample<R: Rng + ?Sized>(
        counts: &HmmCounts,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let tag_prob = Self::tag_group(counts, cfg.smoothing())?;
        let word_prob = Self::word_group(counts, cfg.smoothing());
        let lexicon = counts.lexicon().clone();
        let t = lexicon.tag_count();
        let transitions = (0..=t)
            .map(|row| sample_multinomial(counts.transitions_from(anchor_of_row(row, t)), cfg, rng))
            .collect();
        let lexical = lexicon
            .words()
            .map(|w| sample_multinomial(counts.lexical(w), cfg, rng))
            .collect();
        Ok(HmmModel {
            lexicon,
            tag_prob,
            transitions,
            lexical,
            word_prob,
        })
    }

    fn tag_group(counts: &HmmCounts, smoothing: f64) -> Result<ProbabilityVector> {
        let tags = counts.tag_counts();
        if tags.total() == 0 {
            return Err(Error::UndefinedEstimate(
                "tag probabilities from an empty training set".into(),
            ));
        }
        if smoothing == 0.0 && tags.nonzero() < tags.value_count() {
            return Err(Error::UndefinedEstimate(
                "unsmoothed tag probabilities with an unseen tag".into(),
            ));
        }
        Ok(smoothed_estimate(tags, smoothing))
    }

    // Word probabilities only enter the generative string probability; they
    // are kept positive so every lexicon word has a defined emission.
    fn word_group(counts: &HmmCounts, smoothing: f64) -> ProbabilityVector {
        smoothed_estimate(&counts.word_counts(), smoothing.max(1e-9))
    }

    pub fn tag_probabilities(&self) -> &ProbabilityVector {
        &self.tag_prob
    }

    pub fn transition_row(&self, from: Anchor) -> &ProbabilityVector {
        &self.transitions[from.row(self.lexicon.tag_count())]
    }

    pub fn lexical_group(&self, word: WordId) -> &ProbabilityVector {
        &self.lexical[word.index()]
    }

    pub fn word_prob(&self, word: WordId) -> f64 {
        self.word_prob[word.index()]
    }

    pub fn word_probabilities(&self) -> &ProbabilityVector {
        &self.word_prob
    }

    /// Output probability `P(w|t) = P(t|w)·P(w) / P(t)`.
    pub fn emission(&self, word: WordId, tag: TagId) -> f64 {
        let p = self.lexical(word, tag);
        if p == 0.0 {
            return 0.0;
        }
        p * self.word_prob(word) / self.tag_prob(tag)
    }

    /// Log of the generative probability of the segment's words summed
    /// over all lexicon-consistent tag paths, including the transition into
    /// the right anchor when present.
    pub fn sequence_log_probability(&self, segment: &Segment) -> Result<f64> {
        let lex = &*self.lexicon;
        let Some((&first, rest)) = segment.words.split_first() else {
            return Ok(0.0);
        };
        let mut alpha: Vec<(TagId, f64)> = lex
            .allowed(first)
            .iter()
            .map(|&t| {
                (
                    t,
                    self.log_transition(segment.left, t) + self.emission(first, t).ln(),
                )
            })
            .collect();
        for &w in rest {
            alpha = lex
                .allowed(w)
                .iter()
                .map(|&t| {
                    let into = log_sum_exp(
                        alpha
                            .iter()
                            .map(|&(prev, a)| a + self.log_transition(Anchor::Tag(prev), t)),
                    );
                    (t, into + self.emission(w, t).ln())
                })
                .collect();
        }
        let total = log_sum_exp(alpha.iter().map(|&(t, a)| match segment.right {
            Some(r) => a + self.log_transition(Anchor::Tag(t), r),
            None => a,
        }));
        if total == f64::NEG_INFINITY {
            return Err(Error::NoViablePath);
        }
        Ok(total)
    }

    pub fn sequence_probability(&self, segment: &Segment) -> Result<f64> {
        self.sequence_log_probability(segment).map(f64::exp)
    }
}

impl TagScorer for HmmModel {
    fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    fn transition(&self, from: Anchor, to: TagId) -> f64 {
        self.transition_row(from)[to.index()]
    }

    fn lexical(&self, word: WordId, tag: TagId) -> f64 {
        self.lexicon
            .tag_position(word, tag)
            .map_or(0.0, |i| self.lexical[word.index()][i])
    }

    fn tag_prob(&self, tag: TagId) -> f64 {
        self.tag_prob[tag.index()]
    }
}

/// A committee member restricted to the parameter groups one segment can
/// touch. Groups are independent, so drawing only these is distributed
/// exactly like drawing a full [`HmmModel`] and projecting it.
#[derive(Debug, Clone)]
pub struct SegmentModel<'a> {
    counts: &'a HmmCounts,
    transitions: Vec<Option<ProbabilityVector>>,
    lexical: Vec<(WordId, ProbabilityVector)>,
    tag_prob: ProbabilityVector,
}

impl<'a> SegmentModel<'a> {
    pub fn sample<R: Rng + ?Sized>(
        counts: &'a HmmCounts,
        segment: &Segment,
        cfg: &SamplingConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let tag_prob = HmmModel::tag_group(counts, cfg.smoothing())?;
        let lex = counts.lexicon();
        let t = lex.tag_count();

        let mut rows = vec![false; t + 1];
        rows[segment.left.row(t)] = true;
        // The last word's tags only need a row when a right anchor follows.
        let sources = match segment.right {
            Some(_) => segment.words.len(),
            None => segment.words.len().saturating_sub(1),
        };
        for &w in &segment.words[..sources] {
            for &tag in lex.allowed(w) {
                rows[tag.index()] = true;
            }
        }
        let transitions = rows
            .iter()
            .enumerate()
            .map(|(row, &needed)| {
                needed.then(|| {
                    sample_multinomial(counts.transitions_from(anchor_of_row(row, t)), cfg, rng)
                })
            })
            .collect();

        let mut lexical: Vec<(WordId, ProbabilityVector)> = Vec::new();
        for &w in &segment.words {
            if lexical.iter().all(|(seen, _)| *seen != w) {
                lexical.push((w, sample_multinomial(counts.lexical(w), cfg, rng)));
            }
        }
        Ok(SegmentModel {
            counts,
            transitions,
            lexical,
            tag_prob,
        })
    }
}

impl TagScorer for SegmentModel<'_> {
    fn lexicon(&self) -> &Lexicon {
        self.counts.lexicon()
    }

    fn transition(&self, from: Anchor, to: TagId) -> f64 {
        let row = from.row(self.counts.lexicon().tag_count());
        self.transitions[row]
            .as_ref()
            .expect("transition row outside the sampled segment")[to.index()]
    }

    fn lexical(&self, word: WordId, tag: TagId) -> f64 {
        let Some(pos) = self.counts.lexicon().tag_position(word, tag) else {
            return 0.0;
        };
        let (_, group) = self
            .lexical
            .iter()
            .find(|(w, _)| *w == word)
            .expect("word outside the sampled segment");
        group[pos]
    }

    fn tag_prob(&self, tag: TagId) -> f64 {
        self.tag_prob[tag.index()]
    }
}

fn anchor_of_row(row: usize, tag_count: usize) -> Anchor {
    if row == tag_count {
        Anchor::Start
    } else {
        Anchor::Tag(TagId(row as u16))
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmm::lexicon::TaggedSentence;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// Tags A, B; words "a" ∈ {A}, "b" ∈ {B}, "x" ∈ {A, B}.
    fn toy() -> (Arc<Lexicon>, HmmCounts) {
        let mut lex = Lexicon::new();
        lex.insert("a", &["A"]).unwrap();
        lex.insert("b", &["B"]).unwrap();
        lex.insert("x", &["A", "B"]).unwrap();
        let lex = Arc::new(lex);
        let mut counts = HmmCounts::new(lex.clone());
        let id = |w: &str| lex.word_id(w).unwrap();
        let tag = |t: &str| lex.tags().get(t).unwrap();
        for (ws, ts) in [
            (vec!["a", "x", "b"], vec!["A", "B", "B"]),
            (vec!["x", "a"], vec!["A", "A"]),
            (vec!["b", "x"], vec!["B", "B"]),
        ] {
            counts
                .observe_sentence(&TaggedSentence {
                    words: ws.iter().map(|w| id(w)).collect(),
                    tags: ts.iter().map(|t| tag(t)).collect(),
                })
                .unwrap();
        }
        (lex, counts)
    }

    #[test]
    fn unsmoothed_model_is_exact_mle() {
        let (lex, counts) = toy();
        let m = HmmModel::mle(&counts, 0.0).unwrap();
        let a = lex.tags().get("A").unwrap();
        let b = lex.tags().get("B").unwrap();
        let x = lex.word_id("x").unwrap();
        // Tags: A ×3, B ×4.
        assert!((m.tag_prob(a) - 3.0 / 7.0).abs() < 1e-15);
        // x: A once, B twice.
        assert!((m.lexical(x, a) - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.lexical(x, b) - 2.0 / 3.0).abs() < 1e-15);
        // Start row: a, x, b → A, A, B.
        assert!((m.transition(Anchor::Start, a) - 2.0 / 3.0).abs() < 1e-15);
        // From A: A→B (a x), A→A (x a).
        assert!((m.transition(Anchor::Tag(a), b) - 0.5).abs() < 1e-15);
        // From B: B→B twice.
        assert_eq!(m.transition(Anchor::Tag(b), b), 1.0);
    }

    #[test]
    fn smoothed_model_hand_values() {
        let (lex, counts) = toy();
        let m = HmmModel::mle(&counts, 0.05).unwrap();
        let a = lex.tags().get("A").unwrap();
        let b = lex.tags().get("B").unwrap();
        let x = lex.word_id("x").unwrap();
        // Row B: counts (0, 2) over 2 tags: (0.05 / 2.0, 1.95 / 2.0).
        assert!((m.transition(Anchor::Tag(b), a) - 0.05 / 2.0).abs() < 1e-15);
        assert!((m.transition(Anchor::Tag(b), b) - 1.95 / 2.0).abs() < 1e-15);
        // x: counts (1, 2): ((0.95 + 0.05) / 2.95, (1.9 + 0.05) / 2.95).
        assert!((m.lexical(x, a) - 1.0 / 2.95).abs() < 1e-15);
        assert!((m.lexical(x, b) - 1.95 / 2.95).abs() < 1e-15);
        // Tags (3, 4): (2.9 / 6.75, 3.85 / 6.75).
        assert!((m.tag_prob(a) - 2.9 / 6.75).abs() < 1e-15);
    }

    #[test]
    fn unseen_transition_gets_smoothing_floor() {
        let (lex, counts) = toy();
        let m = HmmModel::mle(&counts, 0.05).unwrap();
        let a = lex.tags().get("A").unwrap();
        let b = lex.tags().get("B").unwrap();
        let n = counts.transitions_from(Anchor::Tag(b)).total() as f64;
        assert_eq!(counts.freq_transition(Anchor::Tag(b), a), 0);
        let floor = 0.05 / (0.95 * n + 0.05 * 2.0);
        assert!((m.transition(Anchor::Tag(b), a) - floor).abs() < 1e-15);
    }

    #[test]
    fn empty_counts_are_rejected() {
        let (lex, _) = toy();
        let empty = HmmCounts::new(lex);
        assert!(matches!(
            HmmModel::mle(&empty, 0.05),
            Err(Error::UndefinedEstimate(_))
        ));
        let cfg = SamplingConfig::default();
        assert!(HmmModel::sample(&empty, &cfg, &mut ChaCha8Rng::seed_from_u64(0)).is_err());
    }

    #[test]
    fn cold_sample_matches_point_estimate() {
        let (_, counts) = toy();
        let cfg = SamplingConfig::new(1e-14, 0.05).unwrap();
        let s = HmmModel::sample(&counts, &cfg, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let m = HmmModel::mle(&counts, 0.05).unwrap();
        for (rs, rm) in s.transitions.iter().zip(&m.transitions) {
            for (p, q) in rs.as_slice().iter().zip(rm.as_slice()) {
                assert!((p - q).abs() < 1e-6);
            }
        }
        for (gs, gm) in s.lexical.iter().zip(&m.lexical) {
            for (p, q) in gs.as_slice().iter().zip(gm.as_slice()) {
                assert!((p - q).abs() < 1e-6);
            }
        }
        assert_eq!(s.tag_prob, m.tag_prob);
    }

    #[test]
    fn sampling_is_deterministic() {
        let (_, counts) = toy();
        let cfg = SamplingConfig::default();
        let a = HmmModel::sample(&counts, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let b = HmmModel::sample(&counts, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disallowed_tags_stay_zero() {
        let (lex, counts) = toy();
        let cfg = SamplingConfig::new(50.0, 0.05).unwrap();
        let m = HmmModel::sample(&counts, &cfg, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let a_word = lex.word_id("a").unwrap();
        let b = lex.tags().get("B").unwrap();
        assert_eq!(m.lexical(a_word, b), 0.0);
        assert_eq!(m.log_local(a_word, b), f64::NEG_INFINITY);
    }

    #[test]
    fn empty_segment_has_unit_probability() {
        let (_, counts) = toy();
        let m = HmmModel::mle(&counts, 0.05).unwrap();
        let seg = Segment {
            start: 0,
            left: Anchor::Start,
            words: vec![],
            right: None,
        };
        assert_eq!(m.sequence_probability(&seg).unwrap(), 1.0);
    }
}
