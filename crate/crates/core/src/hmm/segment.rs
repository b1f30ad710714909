//! Splitting sentences into selectable examples at unambiguous words.
//!
//! With a closed lexicon an unambiguous word fixes the tag at its position,
//! so the best tag sequence decomposes into independent runs of ambiguous
//! words bounded by unambiguous anchors.

use crate::error::Result;

use super::lexicon::{Anchor, Lexicon, TagId, WordId};

/// A maximal run of ambiguous words with its anchors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Offset of the first word within its sentence.
    pub start: usize,
    pub left: Anchor,
    pub words: Vec<WordId>,
    /// Tag of the unambiguous word right after the run, if any.
    pub right: Option<TagId>,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

fn fixed_tag(lexicon: &Lexicon, word: WordId) -> Option<TagId> {
    match lexicon.allowed(word) {
        [only] => Some(*only),
        _ => None,
    }
}

/// Maximal ambiguous runs of a sentence.
pub fn segment_sentence(words: &[WordId], lexicon: &Lexicon) -> Vec<Segment> {
    let mut segments = Vec::new();
    let mut i = 0;
    while i < words.len() {
        if !lexicon.is_ambiguous(words[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < words.len() && lexicon.is_ambiguous(words[i]) {
            i += 1;
        }
        let left = match start {
            0 => Anchor::Start,
            _ => Anchor::Tag(fixed_tag(lexicon, words[start - 1]).expect("unambiguous anchor")),
        };
        let right = words.get(i).and_then(|&w| fixed_tag(lexicon, w));
        segments.push(Segment {
            start,
            left,
            words: words[start..i].to_vec(),
            right,
        });
    }
    segments
}

/// Segments of a sentence given as word strings; every word must be in the
/// lexicon.
pub fn segment_tokens<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> Result<Vec<Segment>> {
    let words = tokens
        .iter()
        .map(|t| lexicon.require_word(t.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    Ok(segment_sentence(&words, lexicon))
}

/// The unit of selection for the tagger: a contiguous span of a sentence
/// holding at most one ambiguous run plus the unambiguous words that follow
/// it. The first example of a sentence also owns any leading unambiguous
/// words, so the examples of a sentence partition it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggerExample {
    /// Index of the source sentence.
    pub sentence: usize,
    /// Offset of the span within the sentence.
    pub offset: usize,
    /// State preceding the span.
    pub left: Anchor,
    pub words: Vec<WordId>,
    /// The ambiguous run, with `start` relative to the span.
    pub segment: Option<Segment>,
}

impl TaggerExample {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn ambiguous_len(&self) -> usize {
        self.segment.as_ref().map_or(0, Segment::len)
    }
}

/// Splits a sentence into examples (see [`TaggerExample`]).
pub fn split_examples(sentence: usize, words: &[WordId], lexicon: &Lexicon) -> Vec<TaggerExample> {
    let segments = segment_sentence(words, lexicon);
    if segments.is_empty() {
        if words.is_empty() {
            return Vec::new();
        }
        return vec![TaggerExample {
            sentence,
            offset: 0,
            left: Anchor::Start,
            words: words.to_vec(),
            segment: None,
        }];
    }
    let mut examples = Vec::with_capacity(segments.len());
    for (i, seg) in segments.iter().enumerate() {
        let offset = if i == 0 { 0 } else { seg.start };
        let end = segments.get(i + 1).map_or(words.len(), |next| next.start);
        let left = match offset {
            0 => Anchor::Start,
            _ => seg.left,
        };
        let mut local = seg.clone();
        local.start -= offset;
        examples.push(TaggerExample {
            sentence,
            offset,
            left,
            words: words[offset..end].to_vec(),
            segment: Some(local),
        });
    }
    examples
}
