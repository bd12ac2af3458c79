//! Deterministic, language-independent tokenization.
//!
//! Words are whitespace-separated chunks with leading and trailing
//! punctuation peeled off into single-character tokens. Sentences are
//! closed after `.`, `!`, `?` or `…` tokens whenever the next token
//! starts with an uppercase letter or a digit. No attempt is made at
//! abbreviation handling; downstream fixtures freeze this behavior.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Sentence;

const TYPOGRAPHIC_PUNCT: &[char] = &[
    '«', '»', '„', '“', '”', '‘', '’', '…', '–', '—', '·', '¡', '¿',
];

fn is_peelable_punct(c: char) -> bool {
    c.is_ascii_punctuation() || TYPOGRAPHIC_PUNCT.contains(&c)
}

fn is_sentence_final(token: &str) -> bool {
    matches!(token, "." | "!" | "?" | "…")
}

/// Splits a document body into sentences of offset-carrying tokens.
///
/// Every non-whitespace character of the body ends up in exactly one
/// token, and each token equals the body substring at its byte offsets.
pub fn tokenize(body: &str) -> Vec<Sentence> {
    let mut tokens: Vec<(String, usize, usize)> = Vec::new();

    let mut chunk_start: Option<usize> = None;
    let flush = |start: usize, end: usize, tokens: &mut Vec<(String, usize, usize)>| {
        split_chunk(body, start, end, tokens);
    };
    for (i, c) in body.char_indices() {
        if c.is_whitespace() {
            if let Some(start) = chunk_start.take() {
                flush(start, i, &mut tokens);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(start) = chunk_start {
        flush(start, body.len(), &mut tokens);
    }

    let mut sentences = Vec::new();
    let mut current: Vec<(String, usize, usize)> = Vec::new();
    for i in 0..tokens.len() {
        current.push(tokens[i].clone());
        let boundary = is_sentence_final(&tokens[i].0)
            && tokens
                .get(i + 1)
                .and_then(|t| t.0.chars().next())
                .is_some_and(|c| c.is_uppercase() || c.is_numeric());
        if boundary {
            sentences.push(to_sentence(core::mem::take(&mut current)));
        }
    }
    if !current.is_empty() {
        sentences.push(to_sentence(current));
    }
    sentences
}

fn to_sentence(tokens: Vec<(String, usize, usize)>) -> Sentence {
    let char_offsets = tokens.iter().map(|t| (t.1, t.2)).collect();
    Sentence {
        tokens: tokens.into_iter().map(|t| t.0).collect(),
        char_offsets,
    }
}

/// Splits one whitespace-delimited chunk into leading punctuation
/// tokens, a core token, and trailing punctuation tokens.
fn split_chunk(body: &str, start: usize, end: usize, out: &mut Vec<(String, usize, usize)>) {
    let chunk = &body[start..end];
    let chars: Vec<(usize, char)> = chunk.char_indices().collect();

    let mut lo = 0;
    let mut hi = chars.len();
    while lo < hi && is_peelable_punct(chars[lo].1) {
        lo += 1;
    }
    while hi > lo && is_peelable_punct(chars[hi - 1].1) {
        hi -= 1;
    }

    let abs = |char_pos: usize| -> usize {
        if char_pos == chars.len() {
            end
        } else {
            start + chars[char_pos].0
        }
    };

    for i in 0..lo {
        out.push((chars[i].1.to_string(), abs(i), abs(i + 1)));
    }
    if lo < hi {
        out.push((
            chunk[chars[lo].0..abs(hi) - start].to_string(),
            abs(lo),
            abs(hi),
        ));
    }
    for i in hi..chars.len() {
        out.push((chars[i].1.to_string(), abs(i), abs(i + 1)));
    }
}
