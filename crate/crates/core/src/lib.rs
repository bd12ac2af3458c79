//! NER and lemmatization toolkit for Polish, Czech and Russian.
//!
//! The crate covers the full modelling pipeline for Slavic named-entity
//! work: converting annotated news documents into the CoNLL-2003 BIO
//! interchange format, harmonizing external corpora onto the five task
//! categories, a linear-chain CRF tagger with a pluggable token encoder,
//! a text-to-text lemmatizer conditioned on language tokens, and the
//! span-level / mention-level / exact-match metrics used to score both
//! tasks.
//!
//! Everything in here is pure computation over in-memory data. File IO,
//! checkpoint persistence and the command-line frontend live in the
//! companion `slavner` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// indexed loops in the math kernels mirror the recurrences they
// implement; iterator rewrites obscure the index arithmetic
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod adapters;
pub mod corpus;
pub mod crf;
pub mod error;
pub mod eval;
pub mod lemma;
pub mod math;
pub mod tagger;

pub use error::{Error, Result};
