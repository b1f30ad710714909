use crate::error::{Error, Result};

use super::lexicon::{Anchor, TagId, WordId};
use super::model::TagScorer;
use super::segment::{segment_sentence, Segment};

/// Best tag sequence and its log-score.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoding {
    pub tags: Vec<TagId>,
    pub score: f64,
}

/// Viterbi search over an explicit lattice. `candidates[i]` lists the tags
/// allowed at position `i` in ascending order, `local(i, t)` scores labeling
/// position `i` with `t`, and `transition(from, to)` scores a tag bigram.
/// When `right` is given the transition into it is part of the objective.
///
/// Ties go to the lowest tag at every backpointer and at the final state.
pub fn decode_lattice<L, T>(
    candidates: &[&[TagId]],
    left: Anchor,
    right: Option<TagId>,
    local: L,
    transition: T,
) -> Result<Decoding>
where
    L: Fn(usize, TagId) -> f64,
    T: Fn(Anchor, TagId) -> f64,
{
    if candidates.is_empty() {
        let score = match right {
            Some(r) => transition(left, r),
            None => 0.0,
        };
        return Ok(Decoding {
            tags: Vec::new(),
            score,
        });
    }

    let mut delta: Vec<f64> = candidates[0]
        .iter()
        .map(|&t| transition(left, t) + local(0, t))
        .collect();
    let mut backptr: Vec<Vec<usize>> = Vec::with_capacity(candidates.len());
    backptr.push(vec![0; candidates[0].len()]);

    for i in 1..candidates.len() {
        let prev_tags = candidates[i - 1];
        let mut next = Vec::with_capacity(candidates[i].len());
        let mut ptrs = Vec::with_capacity(candidates[i].len());
        for &t in candidates[i] {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for (j, &p) in prev_tags.iter().enumerate() {
                let s = delta[j] + transition(Anchor::Tag(p), t);
                if s > best {
                    best = s;
                    arg = j;
                }
            }
            next.push(best + local(i, t));
            ptrs.push(arg);
        }
        delta = next;
        backptr.push(ptrs);
    }

    let last = candidates.len() - 1;
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for (j, &t) in candidates[last].iter().enumerate() {
        let s = match right {
            Some(r) => delta[j] + transition(Anchor::Tag(t), r),
            None => delta[j],
        };
        if s > best {
            best = s;
            arg = Some(j);
        }
    }
    let Some(mut j) = arg else {
        return Err(Error::NoViablePath);
    };

    let mut tags = vec![TagId(0); candidates.len()];
    for i in (0..candidates.len()).rev() {
        tags[i] = candidates[i][j];
        j = backptr[i][j];
    }
    Ok(Decoding { tags, score: best })
}

/// Most likely tags for a segment: maximizes
/// `Σ log P(tᵢ₋₁ → tᵢ) + log P(tᵢ|wᵢ) − log P(tᵢ)` over lexicon-consistent
/// sequences, starting from the left anchor and, when present, ending with
/// the transition into the right anchor.
pub fn viterbi<S: TagScorer + ?Sized>(model: &S, segment: &Segment) -> Result<Decoding> {
    let lex = model.lexicon();
    let candidates: Vec<&[TagId]> = segment.words.iter().map(|&w| lex.allowed(w)).collect();
    decode_lattice(
        &candidates,
        segment.left,
        segment.right,
        |i, t| model.log_local(segment.words[i], t),
        |from, to| model.log_transition(from, to),
    )
}

/// Tags a whole sentence, decoding each ambiguous run independently.
pub fn tag_sentence<S: TagScorer + ?Sized>(model: &S, words: &[WordId]) -> Result<Vec<TagId>> {
    let lex = model.lexicon();
    let mut tags: Vec<TagId> = words.iter().map(|&w| lex.allowed(w)[0]).collect();
    for seg in segment_sentence(words, lex) {
        let decoded = viterbi(model, &seg)?;
        tags[seg.start..seg.start + seg.len()].copy_from_slice(&decoded.tags);
    }
    Ok(tags)
}
