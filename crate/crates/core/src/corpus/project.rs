//! Projection of document-level mention lists onto token sequences.
//!
//! Shared-task gold data annotates a document with a flat list of
//! mention forms, not token offsets. Training a tagger needs BIO tags,
//! so each mention form is matched against the tokenized text and every
//! non-overlapping occurrence is tagged. Matching is exact on token
//! strings (case-sensitive); longer mentions claim tokens before
//! shorter ones so that "Unia Europejska" beats "Unia".

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use super::bio::{spans_to_bio, Span};
use super::document::MentionAnnotation;
use super::label::Category;
use super::tokenize::tokenize;
use super::{Sentence, TaggedSentence};
use crate::Result;

/// A mention that could not be located in the tokenized text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnmatchedMention {
    pub form: String,
    pub category: Category,
    pub reason: String,
}

/// Result of projecting a mention list onto sentences.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionOutcome {
    pub tagged: Vec<TaggedSentence>,
    pub unmatched: Vec<UnmatchedMention>,
}

struct Candidate {
    tokens: Vec<String>,
    category: Category,
    form: String,
    hits: usize,
}

fn mention_tokens(form: &str) -> Vec<String> {
    tokenize(form).into_iter().flat_map(|s| s.tokens).collect()
}

/// Tags every non-overlapping occurrence of each mention form.
///
/// Occurrences are claimed longest-first (in tokens), equal lengths
/// leftmost-first, remaining ties in input order; each sentence
/// position is claimed at most once. Duplicate (form, category)
/// entries are collapsed before matching. Mentions with zero
/// occurrences are returned in the unmatched report instead of failing
/// the whole document.
pub fn project_annotations(
    sentences: &[Sentence],
    mentions: &[MentionAnnotation],
) -> Result<ProjectionOutcome> {
    let mut candidates: Vec<Candidate> = Vec::new();
    let mut unmatched = Vec::new();
    for m in mentions {
        if candidates
            .iter()
            .any(|c| c.form == m.form && c.category == m.category)
        {
            continue;
        }
        let tokens = mention_tokens(&m.form);
        if tokens.is_empty() {
            unmatched.push(UnmatchedMention {
                form: m.form.clone(),
                category: m.category,
                reason: "form tokenizes to nothing".to_string(),
            });
            continue;
        }
        candidates.push(Candidate {
            tokens,
            category: m.category,
            form: m.form.clone(),
            hits: 0,
        });
    }

    let mut spans_per_sentence: Vec<Vec<Span>> = vec![Vec::new(); sentences.len()];
    for (spans, sentence) in spans_per_sentence.iter_mut().zip(sentences) {
        // (candidate index, start); width comes from the candidate
        let mut occurrences: Vec<(usize, usize)> = Vec::new();
        for (ci, cand) in candidates.iter().enumerate() {
            let width = cand.tokens.len();
            for start in 0..(sentence.len() + 1).saturating_sub(width) {
                if &sentence.tokens[start..start + width] == cand.tokens.as_slice() {
                    occurrences.push((ci, start));
                }
            }
        }
        occurrences.sort_by(|&(ca, sa), &(cb, sb)| {
            let (wa, wb) = (candidates[ca].tokens.len(), candidates[cb].tokens.len());
            wb.cmp(&wa).then(sa.cmp(&sb)).then(ca.cmp(&cb))
        });

        let mut taken = vec![false; sentence.len()];
        for (ci, start) in occurrences {
            let cand = &mut candidates[ci];
            let end = start + cand.tokens.len();
            if taken[start..end].iter().all(|t| !t) {
                taken[start..end].iter_mut().for_each(|t| *t = true);
                spans.push(Span {
                    start,
                    end,
                    category: cand.category,
                });
                cand.hits += 1;
            }
        }
    }

    for cand in &candidates {
        if cand.hits == 0 {
            unmatched.push(UnmatchedMention {
                form: cand.form.clone(),
                category: cand.category,
                reason: "no free token window matches the form".to_string(),
            });
        }
    }

    let mut tagged = Vec::with_capacity(sentences.len());
    for (sentence, spans) in sentences.iter().zip(spans_per_sentence) {
        let tags = spans_to_bio(sentence.len(), &spans)?;
        tagged.push(TaggedSentence::new(sentence.clone(), tags)?);
    }

    Ok(ProjectionOutcome { tagged, unmatched })
}
