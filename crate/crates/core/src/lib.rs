//! Learning scripts as Left-to-Right hidden Markov models with null
//! emissions.
//!
//! A script is a [`Hmm`] whose states may emit a null observation,
//! modelling events a narrative leaves out. Models are learned by greedy
//! structure search over state merges and edge deletions
//! ([`structure::learn`]) starting from a prefix tree of the training
//! narratives, with parameters fit by EM ([`em::em_fit`]). A learned model
//! fills a gap in a partially observed narrative with
//! [`inference::predict_missing`].

// `!(x >= 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod counts;
pub mod em;
pub mod error;
pub mod extraction;
pub mod hmm;
pub mod inference;
pub mod model_file;
pub mod pipeline;
pub mod pta;
pub mod sample;
pub mod scoring;
pub mod structure;
pub mod symbol;

pub use corpus::Corpus;
pub use counts::CountTable;
pub use error::{Error, Result};
pub use hmm::{Hmm, StateId};
pub use symbol::{Emission, Symbol};
