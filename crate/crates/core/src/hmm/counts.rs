use std::sync::Arc;

use crate::error::{Error, Result};
use crate::posterior::EventCounts;

use super::lexicon::{Anchor, Lexicon, TagId, TaggedSentence, WordId};
use super::segment::Segment;

/// Number of stored (nonzero) count entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelSize {
    pub lexical: usize,
    pub bigram: usize,
}

/// Tag, tag-bigram and word/tag counts gathered from labeled text.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmCounts {
    lexicon: Arc<Lexicon>,
    tags: EventCounts,
    transitions: Vec<EventCounts>,
    lexical: Vec<EventCounts>,
}

impl HmmCounts {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        let t = lexicon.tag_count().max(1);
        let lexical = lexicon
            .words()
            .map(|w| EventCounts::zeros(lexicon.allowed(w).len()))
            .collect();
        HmmCounts {
            tags: EventCounts::zeros(t),
            transitions: (0..=t).map(|_| EventCounts::zeros(t)).collect(),
            lexical,
            lexicon,
        }
    }

    pub fn lexicon(&self) -> &Arc<Lexicon> {
        &self.lexicon
    }

    /// `freq(t)` for every tag.
    pub fn tag_counts(&self) -> &EventCounts {
        &self.tags
    }

    /// `freq(from → ·)`.
    pub fn transitions_from(&self, from: Anchor) -> &EventCounts {
        &self.transitions[from.row(self.lexicon.tag_count())]
    }

    /// `freq(·, w)` indexed by position in the word's allowed-tag list.
    pub fn lexical(&self, word: WordId) -> &EventCounts {
        &self.lexical[word.index()]
    }

    pub fn freq_transition(&self, from: Anchor, to: TagId) -> u64 {
        self.transitions_from(from).get(to.index())
    }

    pub fn freq_lexical(&self, word: WordId, tag: TagId) -> u64 {
        self.lexicon
            .tag_position(word, tag)
            .map_or(0, |i| self.lexical(word).get(i))
    }

    /// Counts a labeled run of words following `left`, and the transition
    /// into `right` when given. Nothing is counted if any tag is not allowed.
    pub fn observe(
        &mut self,
        left: Anchor,
        words: &[WordId],
        tags: &[TagId],
        right: Option<TagId>,
    ) -> Result<()> {
        if words.len() != tags.len() {
            return Err(Error::invalid(format!(
                "{} words labeled with {} tags",
                words.len(),
                tags.len()
            )));
        }
        let positions = words
            .iter()
            .zip(tags)
            .map(|(&w, &t)| self.lexicon.check_allowed(w, t))
            .collect::<Result<Vec<_>>>()?;
        let t = self.lexicon.tag_count();
        let mut prev = left;
        for ((&w, &tag), pos) in words.iter().zip(tags).zip(positions) {
            self.tags.increment(tag.index());
            self.transitions[prev.row(t)].increment(tag.index());
            self.lexical[w.index()].increment(pos);
            prev = Anchor::Tag(tag);
        }
        if let (Some(r), false) = (right, words.is_empty()) {
            self.transitions[prev.row(t)].increment(r.index());
        }
        Ok(())
    }

    /// Counts the labeled words of a segment together with the transitions
    /// from its left anchor and into its right anchor.
    pub fn update_segment(&mut self, segment: &Segment, gold: &[TagId]) -> Result<()> {
        self.observe(segment.left, &segment.words, gold, segment.right)
    }

    pub fn observe_sentence(&mut self, sentence: &TaggedSentence) -> Result<()> {
        self.observe(Anchor::Start, &sentence.words, &sentence.tags, None)
    }

    /// Nonzero `freq(t, w)` and `freq(t₁ → t₂)` entries.
    pub fn model_size(&self) -> ModelSize {
        ModelSize {
            lexical: self.lexical.iter().map(EventCounts::nonzero).sum(),
            bigram: self.transitions.iter().map(EventCounts::nonzero).sum(),
        }
    }

    /// Word occurrence counts over the vocabulary.
    pub(crate) fn word_counts(&self) -> EventCounts {
        EventCounts::from_counts(self.lexical.iter().map(EventCounts::total).collect())
            .unwrap_or_else(|_| EventCounts::zeros(1))
    }
}
