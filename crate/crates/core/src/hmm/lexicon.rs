use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(pub u16);

impl TagId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WordId(pub u32);

impl WordId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Left context of a tag sequence: the sentence-start state or a known tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Anchor {
    Start,
    Tag(TagId),
}

impl Anchor {
    /// Row of the transition table conditioned on this state. The start
    /// state occupies the row after the last tag.
    pub fn row(self, tag_count: usize) -> usize {
        match self {
            Anchor::Start => tag_count,
            Anchor::Tag(t) => t.index(),
        }
    }
}

impl fmt::Display for Anchor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Anchor::Start => f.write_str("<s>"),
            Anchor::Tag(t) => write!(f, "#{}", t.0),
        }
    }
}

/// Interned tag names. The start state is not a member.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagSet {
    names: Vec<String>,
    index: HashMap<String, TagId>,
}

impl TagSet {
    pub fn intern(&mut self, name: &str) -> TagId {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = TagId(u16::try_from(self.names.len()).expect("more than 65535 tags"));
        self.names.push(name.to_owned());
        self.index.insert(name.to_owned(), id);
        id
    }

    pub fn get(&self, name: &str) -> Option<TagId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, tag: TagId) -> &str {
        &self.names[tag.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = TagId> + '_ {
        (0..self.names.len()).map(|i| TagId(i as u16))
    }
}

/// Closed lexicon: the tags each word may carry.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    tags: TagSet,
    words: Vec<String>,
    word_index: HashMap<String, WordId>,
    allowed: Vec<Vec<TagId>>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `tags` to the allowed set of `word`, creating the entry if
    /// needed. Tag sets of repeated words are merged.
    pub fn insert<S: AsRef<str>>(&mut self, word: &str, tags: &[S]) -> Result<WordId> {
        if tags.is_empty() {
            return Err(Error::invalid(format!("word {word:?} has no tags")));
        }
        let ids: Vec<TagId> = tags.iter().map(|t| self.tags.intern(t.as_ref())).collect();
        let id = match self.word_index.get(word) {
            Some(&id) => id,
            None => {
                let id = WordId(u32::try_from(self.words.len()).expect("vocabulary overflow"));
                self.words.push(word.to_owned());
                self.word_index.insert(word.to_owned(), id);
                self.allowed.push(Vec::new());
                id
            }
        };
        let entry = &mut self.allowed[id.index()];
        entry.extend(ids);
        entry.sort_unstable();
        entry.dedup();
        Ok(id)
    }

    /// Registers a tag without attaching it to any word.
    pub fn intern_tag(&mut self, name: &str) -> TagId {
        self.tags.intern(name)
    }

    pub fn tags(&self) -> &TagSet {
        &self.tags
    }

    pub fn tag_count(&self) -> usize {
        self.tags.len()
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn word_id(&self, word: &str) -> Option<WordId> {
        self.word_index.get(word).copied()
    }

    pub fn require_word(&self, word: &str) -> Result<WordId> {
        self.word_id(word)
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))
    }

    pub fn word(&self, id: WordId) -> &str {
        &self.words[id.index()]
    }

    pub fn words(&self) -> impl Iterator<Item = WordId> + '_ {
        (0..self.words.len()).map(|i| WordId(i as u32))
    }

    /// Allowed tags of a word, in ascending id order.
    pub fn allowed(&self, word: WordId) -> &[TagId] {
        &self.allowed[word.index()]
    }

    pub fn is_ambiguous(&self, word: WordId) -> bool {
        self.allowed(word).len() > 1
    }

    /// Position of `tag` within the allowed set of `word`.
    pub fn tag_position(&self, word: WordId, tag: TagId) -> Option<usize> {
        self.allowed(word).binary_search(&tag).ok()
    }

    pub(crate) fn check_allowed(&self, word: WordId, tag: TagId) -> Result<usize> {
        self.tag_position(word, tag)
            .ok_or_else(|| Error::TagNotAllowed {
                word: self.word(word).to_owned(),
                tag: self.tags.name(tag).to_owned(),
            })
    }
}

/// A gold-labeled sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub words: Vec<WordId>,
    pub tags: Vec<TagId>,
}

impl TaggedSentence {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TaggedCorpus {
    pub sentences: Vec<TaggedSentence>,
}

impl TaggedCorpus {
    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(TaggedSentence::len).sum()
    }

    /// Checks that every gold tag is allowed for its word.
    pub fn validate(&self, lexicon: &Lexicon) -> Result<()> {
        for s in &self.sentences {
            if s.words.len() != s.tags.len() {
                return Err(Error::Invariant(
                    "sentence with mismatched tag count".into(),
                ));
            }
            for (&w, &t) in s.words.iter().zip(&s.tags) {
                lexicon.check_allowed(w, t)?;
            }
        }
        Ok(())
    }

    pub fn ambiguous_token_count(&self, lexicon: &Lexicon) -> usize {
        self.sentences
            .iter()
            .flat_map(|s| &s.words)
            .filter(|&&w| lexicon.is_ambiguous(w))
            .count()
    }
}
