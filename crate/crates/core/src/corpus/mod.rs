//! Shared-task documents, tokenization, BIO tagging and the CoNLL-2003
//! interchange format.

mod bio;
mod conll;
mod document;
mod label;
mod project;
mod tokenize;

pub use bio::{bio_to_spans, spans_to_bio, Span};
pub use conll::{read_conll, write_conll};
pub use document::{
    parse_annotation_file, parse_raw_document, AnnotationFile, MentionAnnotation, RawDocument,
    RawLayout,
};
pub use label::{Category, Label, LabelIndex, Language, CATEGORIES};
pub use project::{project_annotations, ProjectionOutcome, UnmatchedMention};
pub use tokenize::tokenize;

use alloc::string::String;
use alloc::vec::Vec;

/// A tokenized sentence with per-token character offsets into the
/// document body it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<String>,
    /// Byte offsets `(start, end)` such that `body[start..end] == token`.
    pub char_offsets: Vec<(usize, usize)>,
}

impl Sentence {
    /// Sentence without offsets, for corpora that never carried them
    /// (offsets are set to zero-length ranges at position 0).
    pub fn from_tokens(tokens: Vec<String>) -> Self {
        let char_offsets = tokens.iter().map(|_| (0, 0)).collect();
        Self {
            tokens,
            char_offsets,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// A sentence plus one BIO label per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub sentence: Sentence,
    pub tags: Vec<Label>,
}

impl TaggedSentence {
    pub fn new(sentence: Sentence, tags: Vec<Label>) -> crate::Result<Self> {
        if sentence.tokens.len() != tags.len() {
            return Err(crate::Error::LengthMismatch {
                left: sentence.tokens.len(),
                right: tags.len(),
                context: "tokens vs tags",
            });
        }
        Ok(Self { sentence, tags })
    }

    /// Entity spans of this sentence with surfaces detokenized from the
    /// stored tokens (space-joined when offsets are absent).
    pub fn spans(&self) -> Vec<Span> {
        bio_to_spans(&self.tags)
    }
}
