//! Seeded synthetic tagged corpora generated by a random bigram HMM.
//!
//! Word frequencies follow a Zipf law, transitions are peaked (cubed
//! uniforms, normalized), and each ambiguous word has one dominant tag plus
//! one or two minor ones, which mimics the skew of natural-language
//! lexicons.

use std::sync::Arc;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::index::sample_weighted;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hmm::{HmmModel, Lexicon, TagId, TaggedCorpus, TaggedSentence, WordId};
use crate::posterior::ProbabilityVector;

pub const MIN_SENTENCE: usize = 5;
pub const MAX_SENTENCE: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub tags: usize,
    pub vocab: usize,
    pub tokens: usize,
    /// Fraction of vocabulary words with more than one allowed tag.
    pub ambiguity: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.tags < 2 {
            return Err(Error::invalid("a synthetic language needs at least 2 tags"));
        }
        if self.tags > usize::from(u16::MAX) {
            return Err(Error::invalid(format!("too many tags: {}", self.tags)));
        }
        if self.vocab < self.tags {
            return Err(Error::invalid(format!(
                "vocabulary of {} words cannot cover {} tags",
                self.vocab, self.tags
            )));
        }
        if !(0.0..=1.0).contains(&self.ambiguity) {
            return Err(Error::invalid(format!(
                "ambiguity {} outside [0, 1]",
                self.ambiguity
            )));
        }
        Ok(())
    }
}

/// Distribution shape of a synthetic language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticShape {
    /// Zipf exponent of word frequencies.
    pub zipf: f64,
    /// Transition weights are uniforms raised to this power.
    pub transition_power: i32,
    /// Relative weight of a minor tag is `minor_floor + minor_span · u²`.
    pub minor_floor: f64,
    pub minor_span: f64,
    /// A word of frequency rank `r` is picked as ambiguous with weight
    /// `(r + 1)^-ambiguity_bias`; 0 spreads ambiguity evenly.
    pub ambiguity_bias: f64,
    /// Ambiguous words get between 1 and this many minor tags.
    pub max_minor_tags: usize,
    /// Transitions into tag `j` are weighted by `(j + 1)^-tag_skew`, making
    /// high-numbered tags rare.
    pub tag_skew: f64,
}

impl Default for SyntheticShape {
    fn default() -> Self {
        SyntheticShape {
            zipf: 1.0,
            transition_power: 3,
            minor_floor: 0.05,
            minor_span: 0.45,
            ambiguity_bias: 0.0,
            max_minor_tags: 2,
            tag_skew: 0.0,
        }
    }
}

/// The generating HMM of a synthetic corpus.
#[derive(Debug, Clone)]
pub struct SyntheticLanguage {
    lexicon: Arc<Lexicon>,
    /// Rows per tag plus a final start row.
    transitions: Vec<WeightedIndex<f64>>,
    transition_probs: Vec<Vec<f64>>,
    /// Per tag: words it can emit and their probabilities.
    emitters: Vec<(Vec<WordId>, WeightedIndex<f64>)>,
    emission_probs: Vec<Vec<(WordId, f64)>>,
}

fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

fn weighted(weights: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(weights).expect("generator weights are positive")
}

impl SyntheticLanguage {
    pub fn new(spec: &SyntheticSpec, seed: u64) -> Result<Self> {
        Self::with_shape(spec, &SyntheticShape::default(), seed)
    }

    pub fn with_shape(spec: &SyntheticSpec, shape: &SyntheticShape, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (t, v) = (spec.tags, spec.vocab);

        let transition_probs: Vec<Vec<f64>> = (0..=t)
            .map(|_| {
                let w: Vec<f64> = (0..t)
                    .map(|j| {
                        let u = (1.0 - rng.random::<f64>()).powi(shape.transition_power);
                        u * ((j + 1) as f64).powf(-shape.tag_skew)
                    })
                    .collect();
                normalize(&w)
            })
            .collect();

        let ambiguous_count = (spec.ambiguity * v as f64).round() as usize;
        let mut ambiguous = vec![false; v];
        let picks = sample_weighted(
            &mut rng,
            v,
            |r| ((r + 1) as f64).powf(-shape.ambiguity_bias),
            ambiguous_count,
        )
        .map_err(|e| Error::invalid(format!("ambiguous word selection: {e}")))?;
        for i in picks {
            ambiguous[i] = true;
        }

        let mut lexicon = Lexicon::new();
        for i in 0..t {
            lexicon.intern_tag(&format!("T{i}"));
        }
        // Per word: allowed tags with their affinity.
        let mut affinity: Vec<Vec<(usize, f64)>> = Vec::with_capacity(v);
        for (w, &amb) in ambiguous.iter().enumerate() {
            let primary = if w < t { w } else { rng.random_range(0..t) };
            let mut tags = vec![(primary, 1.0)];
            if amb {
                let extra = rng.random_range(1..=shape.max_minor_tags.clamp(1, t - 1));
                while tags.len() < 1 + extra {
                    let cand = rng.random_range(0..t);
                    if tags.iter().all(|&(x, _)| x != cand) {
                        tags.push((
                            cand,
                            shape.minor_floor + shape.minor_span * rng.random::<f64>().powi(2),
                        ));
                    }
                }
            }
            let names: Vec<String> = tags.iter().map(|&(x, _)| format!("T{x}")).collect();
            lexicon.insert(&format!("w{w}"), &names)?;
            affinity.push(tags);
        }

        let mut per_tag: Vec<Vec<(WordId, f64)>> = vec![Vec::new(); t];
        for (w, tags) in affinity.iter().enumerate() {
            let zipf = ((w + 1) as f64).powf(-shape.zipf);
            for &(tag, a) in tags {
                per_tag[tag].push((WordId(w as u32), zipf * a));
            }
        }
        let emission_probs: Vec<Vec<(WordId, f64)>> = per_tag
            .into_iter()
            .map(|entries| {
                let total: f64 = entries.iter().map(|e| e.1).sum();
                entries.into_iter().map(|(w, p)| (w, p / total)).collect()
            })
            .collect();
        let emitters = emission_probs
            .iter()
            .map(|e| {
                let words = e.iter().map(|x| x.0).collect();
                let probs: Vec<f64> = e.iter().map(|x| x.1).collect();
                (words, weighted(&probs))
            })
            .collect();
        let transitions = transition_probs.iter().map(|p| weighted(p)).collect();

        Ok(SyntheticLanguage {
            lexicon: Arc::new(lexicon),
            transitions,
            transition_probs,
            emitters,
            emission_probs,
        })
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    pub fn sentence<R: Rng + ?Sized>(&self, len: usize, rng: &mut R) -> TaggedSentence {
        let t = self.lexicon.tag_count();
        let mut row = t;
        let mut sentence = TaggedSentence {
            words: Vec::with_capacity(len),
            tags: Vec::with_capacity(len),
        };
        for _ in 0..len {
            let tag = self.transitions[row].sample(rng);
            let (words, picker) = &self.emitters[tag];
            sentence.words.push(words[picker.sample(rng)]);
            sentence.tags.push(TagId(tag as u16));
            row = tag;
        }
        sentence
    }

    /// Sentences of uniformly random length until exactly `tokens` tokens;
    /// the last sentence is cut short if needed.
    pub fn corpus<R: Rng + ?Sized>(&self, tokens: usize, rng: &mut R) -> TaggedCorpus {
        let mut corpus = TaggedCorpus::default();
        let mut remaining = tokens;
        while remaining > 0 {
            let len = rng.random_range(MIN_SENTENCE..=MAX_SENTENCE).min(remaining);
            corpus.sentences.push(self.sentence(len, rng));
            remaining -= len;
        }
        corpus
    }

    /// Tag marginals averaged over all positions of sentences whose length
    /// is uniform on `MIN_SENTENCE..=MAX_SENTENCE`.
    pub fn tag_marginals(&self) -> Vec<f64> {
        let t = self.lexicon.tag_count();
        let mut current = self.transition_probs[t].clone();
        let mut total = vec![0.0; t];
        for pos in 0..MAX_SENTENCE {
            // Sentences long enough to have this position.
            let weight = MAX_SENTENCE - pos.max(MIN_SENTENCE - 1);
            for (acc, &p) in total.iter_mut().zip(&current) {
                *acc += weight as f64 * p;
            }
            let mut next = vec![0.0; t];
            for (from, &p) in current.iter().enumerate() {
                for (to, &q) in self.transition_probs[from].iter().enumerate() {
                    next[to] += p * q;
                }
            }
            current = next;
        }
        normalize(&total)
    }

    /// The generating HMM in tagger parameterization: `P(t|w)` by Bayes'
    /// rule from the emissions and the tag marginals.
    pub fn ground_truth(&self) -> Result<HmmModel> {
        let lex = &self.lexicon;
        let tag_prob = self.tag_marginals();
        let mut joint: Vec<Vec<f64>> = lex
            .words()
            .map(|w| vec![0.0; lex.allowed(w).len()])
            .collect();
        for (tag, entries) in self.emission_probs.iter().enumerate() {
            for &(w, p) in entries {
                let pos = lex
                    .tag_position(w, TagId(tag as u16))
                    .expect("emitted tag is allowed");
                joint[w.index()][pos] = p * tag_prob[tag];
            }
        }
        let word_prob: Vec<f64> = joint.iter().map(|j| j.iter().sum()).collect();
        let lexical = joint
            .iter()
            .map(|j| ProbabilityVector::new(normalize(j)))
            .collect::<Result<Vec<_>>>()?;
        let transitions = self
            .transition_probs
            .iter()
            .map(|row| ProbabilityVector::new(row.clone()))
            .collect::<Result<Vec<_>>>()?;
        HmmModel::from_parts(
            lex.clone(),
            ProbabilityVector::new(tag_prob)?,
            transitions,
            lexical,
            ProbabilityVector::new(normalize(&word_prob))?,
        )
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub corpus: TaggedCorpus,
    pub lexicon: Arc<Lexicon>,
    pub truth: HmmModel,
    pub language: SyntheticLanguage,
}

impl SyntheticCorpus {
    /// A further sample from the same language, independent of the training
    /// corpus, for use as test data.
    pub fn test_corpus(&self, tokens: usize, seed: u64) -> TaggedCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(2);
        self.language.corpus(tokens, &mut rng)
    }
}

/// Draws a random language from `seed` and samples a corpus of
/// `spec.tokens` tokens from it.
pub fn generate_synthetic_corpus(spec: &SyntheticSpec, seed: u64) -> Result<SyntheticCorpus> {
    generate_shaped_corpus(spec, &SyntheticShape::default(), seed)
}

pub fn generate_shaped_corpus(
    spec: &SyntheticSpec,
    shape: &SyntheticShape,
    seed: u64,
) -> Result<SyntheticCorpus> {
    let language = SyntheticLanguage::with_shape(spec, shape, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let corpus = language.corpus(spec.tokens, &mut rng);
    Ok(SyntheticCorpus {
        corpus,
        lexicon: language.lexicon().clone(),
        truth: language.ground_truth()?,
        language,
    })
}
