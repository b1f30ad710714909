//! Lexicon and tagged-corpus files.
//!
//! Lexicon: one word per line followed by its allowed tags, separated by
//! whitespace; repeated words merge their tag sets. Corpus: one sentence per
//! line of whitespace-separated `word/TAG` tokens. Blank lines are skipped
//! in both.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hmm::{Lexicon, TaggedCorpus, TaggedSentence};

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io(format!("cannot open {}", path.display()), e))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(format!("cannot create {}", path.display()), e))
}

fn format_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    read_lexicon(open(path)?, path)
}

/// Parses a lexicon; `source` names the input in error messages.
pub fn read_lexicon<R: BufRead>(reader: R, source: &Path) -> Result<Lexicon> {
    let mut lexicon = Lexicon::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        let mut fields = line.split_whitespace();
        let Some(word) = fields.next() else { continue };
        let tags: Vec<&str> = fields.collect();
        if tags.is_empty() {
            return Err(format_error(
                source,
                i + 1,
                format!("word {word:?} has no tags"),
            ));
        }
        lexicon.insert(word, &tags)?;
    }
    Ok(lexicon)
}

pub fn write_lexicon<W: Write>(lexicon: &Lexicon, mut out: W) -> Result<()> {
    let io = |e| Error::io("writing lexicon", e);
    for w in lexicon.words() {
        write!(out, "{}", lexicon.word(w)).map_err(io)?;
        for &t in lexicon.allowed(w) {
            write!(out, " {}", lexicon.tags().name(t)).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_lexicon(lexicon: &Lexicon, path: &Path) -> Result<()> {
    write_lexicon(lexicon, create(path)?)
}

/// Loads a corpus against a closed lexicon.
pub fn load_corpus(path: &Path, lexicon: &Lexicon) -> Result<TaggedCorpus> {
    read_corpus(open(path)?, path, lexicon)
}

pub fn read_corpus<R: BufRead>(
    reader: R,
    source: &Path,
    lexicon: &Lexicon,
) -> Result<TaggedCorpus> {
    let mut corpus = TaggedCorpus::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", source.display()), e))?;
        let at = |msg: String| format_error(source, i + 1, msg);
        let mut sentence = TaggedSentence {
            words: Vec::new(),
            tags: Vec::new(),
        };
        for token in line.split_whitespace() {
            let (word, tag) = match token.split_once('/') {
                Some((w, t)) if !w.is_empty() && !t.is_empty() && !t.contains('/') => (w, t),
                _ => return Err(at(format!("malformed token {token:?}, expected word/TAG"))),
            };
            let w = lexicon
                .word_id(word)
                .ok_or_else(|| at(format!("word {word:?} is not in the lexicon")))?;
            let t = lexicon
                .tags()
                .get(tag)
                .filter(|&t| lexicon.tag_position(w, t).is_some())
                .ok_or_else(|| at(format!("tag {tag:?} is not allowed for word {word:?}")))?;
            sentence.words.push(w);
            sentence.tags.push(t);
        }
        if !sentence.is_empty() {
            corpus.sentences.push(sentence);
        }
    }
    Ok(corpus)
}

pub fn write_corpus<W: Write>(corpus: &TaggedCorpus, lexicon: &Lexicon, mut out: W) -> Result<()> {
    let io = |e| Error::io("writing corpus", e);
    for s in &corpus.sentences {
        for (i, (&w, &t)) in s.words.iter().zip(&s.tags).enumerate() {
            let sep = if i == 0 { "" } else { " " };
            write!(out, "{sep}{}/{}", lexicon.word(w), lexicon.tags().name(t)).map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    out.flush().map_err(io)
}

pub fn save_corpus(corpus: &TaggedCorpus, lexicon: &Lexicon, path: &Path) -> Result<()> {
    write_corpus(corpus, lexicon, create(path)?)
}

/// Shuffles sentence order reproducibly.
pub fn shuffle_sentences(corpus: &mut TaggedCorpus, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    corpus.sentences.shuffle(&mut rng);
}
