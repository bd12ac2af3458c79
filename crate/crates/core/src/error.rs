//! Crate-wide error type.

use alloc::string::String;

/// Errors produced by parsing, scoring and training operations.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Input bytes were not valid UTF-8.
    #[error("invalid utf-8 at byte offset {offset}")]
    Encoding { offset: usize },

    /// A line of a structured text format could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A category string outside the task's five-element set.
    #[error("unknown category `{0}`; expected one of PER, LOC, ORG, EVT, PRO")]
    UnknownCategory(String),

    /// A BIO tag string that matches no valid pattern.
    #[error("invalid BIO tag `{tag}` at line {line}")]
    InvalidTag { tag: String, line: usize },

    /// Spans handed to an operation overlap.
    #[error("overlapping spans: [{0}, {1}) and [{2}, {3})")]
    OverlappingSpans(usize, usize, usize, usize),

    /// A span lies outside the sentence it refers to.
    #[error("span [{start}, {end}) out of bounds for length {len}")]
    SpanOutOfBounds {
        start: usize,
        end: usize,
        len: usize,
    },

    /// Two aligned inputs disagree on length.
    #[error("length mismatch: {left} vs {right} ({context})")]
    LengthMismatch {
        left: usize,
        right: usize,
        context: &'static str,
    },

    /// Gold and predicted corpora disagree at one aligned sentence.
    #[error("sentence {index}: gold has {gold} tokens, prediction has {pred}")]
    SentenceMisaligned {
        index: usize,
        gold: usize,
        pred: usize,
    },

    /// A source-corpus label with no entry in the category mapping.
    #[error("unmapped source label `{0}`")]
    UnmappedLabel(String),

    /// An operation received an empty input it cannot work with.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A numeric input contained NaN or infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// Exhaustive enumeration was requested for too large an instance.
    #[error("instance too large for exhaustive enumeration: {labels}^{len} paths")]
    InstanceTooLarge { labels: usize, len: usize },

    /// A configuration value failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = core::result::Result<T, Error>;
