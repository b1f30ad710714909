//! Committee-based sample selection for probabilistic classifiers.
//!
//! Committees of models are drawn from an approximate posterior over
//! parameters given the labeled counts seen so far; an example is sent for
//! labeling when the committee disagrees on its classification. Two backends
//! are provided: a colorful-coin-flipper simulator ([`ccf`]) and a bigram HMM
//! part-of-speech tagger ([`hmm`]).

pub mod ccf;
pub mod committee;
pub mod error;
pub mod harness;
pub mod hmm;
pub mod posterior;
pub mod selection;

pub use error::{Error, Result};
