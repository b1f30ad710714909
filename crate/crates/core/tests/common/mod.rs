#![allow(dead_code)]

use std::sync::Arc;

use qbc_core::hmm::{Anchor, HmmModel, Lexicon, Segment, TagId, TagScorer, WordId};
use qbc_core::posterior::ProbabilityVector;
use rand::Rng;

/// Moments of a normal restricted to [0, 1], by composite Simpson.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub fourth: f64,
    /// Probability mass above one half.
    pub upper: f64,
}

pub fn truncated_moments(mu: f64, sigma: f64) -> Moments {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let density = |x: f64| (-0.5 * ((x - mu) / sigma).powi(2)).exp();
    let simpson = |f: &dyn Fn(f64) -> f64, a: usize, b: usize| {
        let mut s = f(a as f64 * h) + f(b as f64 * h);
        for i in a + 1..b {
            s += f(i as f64 * h) * if (i - a) % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let z = simpson(&density, 0, n);
    let mean = simpson(&|x| x * density(x), 0, n) / z;
    let variance = simpson(&|x| (x - mean).powi(2) * density(x), 0, n) / z;
    let fourth = simpson(&|x| (x - mean).powi(4) * density(x), 0, n) / z;
    let upper = simpson(&density, n / 2, n) / z;
    Moments {
        mean,
        variance,
        fourth,
        upper,
    }
}

fn random_simplex<R: Rng>(len: usize, rng: &mut R) -> ProbabilityVector {
    let raw: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    ProbabilityVector::new(raw.into_iter().map(|x| x / sum).collect()).unwrap()
}

/// A lexicon over `tags` tags in which every word allows a random nonempty
/// subset, and a model with random positive parameters over it.
pub fn random_model<R: Rng>(tags: usize, words: usize, rng: &mut R) -> HmmModel {
    let mut lex = Lexicon::new();
    let names: Vec<String> = (0..tags).map(|t| format!("T{t}")).collect();
    for name in &names {
        lex.intern_tag(name);
    }
    for w in 0..words {
        let mut allowed: Vec<&String> = names.iter().filter(|_| rng.random_bool(0.5)).collect();
        if allowed.is_empty() {
            allowed.push(&names[rng.random_range(0..tags)]);
        }
        lex.insert(&format!("w{w}"), &allowed).unwrap();
    }
    let lex = Arc::new(lex);
    let lexical = lex
        .words()
        .map(|w| random_simplex(lex.allowed(w).len(), rng))
        .collect();
    HmmModel::from_parts(
        lex.clone(),
        random_simplex(tags, rng),
        (0..=tags).map(|_| random_simplex(tags, rng)).collect(),
        lexical,
        random_simplex(words, rng),
    )
    .unwrap()
}

pub fn random_segment<R: Rng>(model: &HmmModel, max_len: usize, rng: &mut R) -> Segment {
    let lex = model.lexicon();
    let t = lex.tag_count();
    let len = rng.random_range(1..=max_len);
    let words = (0..len)
        .map(|_| WordId(rng.random_range(0..lex.word_count()) as u32))
        .collect();
    let left = if rng.random_bool(0.3) {
        Anchor::Start
    } else {
        Anchor::Tag(TagId(rng.random_range(0..t) as u16))
    };
    let right = rng
        .random_bool(0.6)
        .then(|| TagId(rng.random_range(0..t) as u16));
    Segment {
        start: 0,
        left,
        words,
        right,
    }
}

/// Every lexicon-consistent tag sequence of the segment.
pub fn all_paths(lex: &Lexicon, words: &[WordId]) -> Vec<Vec<TagId>> {
    let mut paths = vec![Vec::new()];
    for &w in words {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                lex.allowed(w).iter().map(move |&t| {
                    let mut q = p.clone();
                    q.push(t);
                    q
                })
            })
            .collect();
    }
    paths
}

/// Decoding objective of one path, summed in path order.
pub fn path_score(model: &HmmModel, seg: &Segment, tags: &[TagId]) -> f64 {
    let mut prev = seg.left;
    let mut s = 0.0;
    for (&w, &t) in seg.words.iter().zip(tags) {
        s += model.transition(prev, t).ln() + model.lexical(w, t).ln() - model.tag_prob(t).ln();
        prev = Anchor::Tag(t);
    }
    if let Some(r) = seg.right {
        s += model.transition(prev, r).ln();
    }
    s
}

/// Joint probability of the words and one path, with output probabilities
/// recovered as `P(t|w)·P(w)/P(t)`.
pub fn path_probability(model: &HmmModel, seg: &Segment, tags: &[TagId]) -> f64 {
    let mut prev = seg.left;
    let mut p = 1.0;
    for (&w, &t) in seg.words.iter().zip(tags) {
        let emit = model.lexical(w, t) * model.word_probabilities()[w.index()] / model.tag_prob(t);
        p *= model.transition(prev, t) * emit;
        prev = Anchor::Tag(t);
    }
    if let Some(r) = seg.right {
        p *= model.transition(prev, r);
    }
    p
}
