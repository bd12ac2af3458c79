//! Reading and writing of space-separated BIO token files.
//!
//! One token per line with the tag in the last column, blank lines
//! between sentences, `-DOCSTART-` marker lines skipped. Writing emits
//! exactly two columns, reading accepts any number of columns of which
//! only the first (token) and last (tag) are used, so four-column
//! published files load unchanged.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::label::Label;
use super::{Sentence, TaggedSentence};
use crate::{Error, Result};

/// Parses BIO sentences from file bytes.
pub fn read_conll(bytes: &[u8]) -> Result<Vec<TaggedSentence>> {
    let text = core::str::from_utf8(bytes).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })?;

    let mut sentences = Vec::new();
    let mut tokens: Vec<String> = Vec::new();
    let mut tags: Vec<Label> = Vec::new();

    let mut flush = |tokens: &mut Vec<String>, tags: &mut Vec<Label>| -> Result<()> {
        if !tokens.is_empty() {
            let sentence = Sentence::from_tokens(core::mem::take(tokens));
            sentences.push(TaggedSentence::new(sentence, core::mem::take(tags))?);
        }
        Ok(())
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut tags)?;
            continue;
        }
        let mut fields = line.split_whitespace();
        let token = fields.next().expect("non-empty line has a first field");
        if token == "-DOCSTART-" {
            flush(&mut tokens, &mut tags)?;
            continue;
        }
        let tag = match fields.last() {
            Some(tag) => tag,
            None => {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("token {token:?} has no tag column"),
                })
            }
        };
        let label = Label::parse(tag).map_err(|_| Error::InvalidTag {
            tag: tag.to_string(),
            line: idx + 1,
        })?;
        tokens.push(token.to_string());
        tags.push(label);
    }
    flush(&mut tokens, &mut tags)?;

    Ok(sentences)
}

/// Renders sentences in the two-column layout produced by this crate.
pub fn write_conll(sentences: &[TaggedSentence]) -> String {
    let mut out = String::new();
    for (i, sent) in sentences.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for (token, tag) in sent.sentence.tokens.iter().zip(&sent.tags) {
            out.push_str(token);
            out.push(' ');
            out.push_str(tag.to_str());
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::label::Category;

    #[test]
    fn reads_two_sentences() {
        let bytes = b"Ala O\nBrexit B-EVT\n\nPraga B-LOC\n";
        let sents = read_conll(bytes).unwrap();
        assert_eq!(sents.len(), 2);
        assert_eq!(sents[0].sentence.tokens, ["Ala", "Brexit"]);
        assert_eq!(sents[0].tags, [Label::Outside, Label::Begin(Category::Evt)]);
        assert_eq!(sents[1].tags, [Label::Begin(Category::Loc)]);
    }

    #[test]
    fn takes_first_and_last_columns() {
        let bytes = b"Warszawa NNP I-NP B-LOC\n";
        let sents = read_conll(bytes).unwrap();
        assert_eq!(sents[0].sentence.tokens, ["Warszawa"]);
        assert_eq!(sents[0].tags, [Label::Begin(Category::Loc)]);
    }

    #[test]
    fn skips_docstart_lines() {
        let bytes = b"-DOCSTART- -X- -X- O\n\nAla O\n";
        let sents = read_conll(bytes).unwrap();
        assert_eq!(sents.len(), 1);
        assert_eq!(sents[0].sentence.tokens, ["Ala"]);
    }

    #[test]
    fn invalid_tag_names_the_line() {
        let bytes = b"Ala O\nkota B-KOT\n";
        match read_conll(bytes) {
            Err(Error::InvalidTag { tag, line }) => {
                assert_eq!(tag, "B-KOT");
                assert_eq!(line, 2);
            }
            other => panic!("expected invalid tag error, got {other:?}"),
        }
    }

    #[test]
    fn missing_tag_column_is_an_error() {
        let bytes = b"Ala\n";
        assert!(matches!(
            read_conll(bytes),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn consecutive_blank_lines_do_not_create_empty_sentences() {
        let bytes = b"Ala O\n\n\n\nkot O\n";
        assert_eq!(read_conll(bytes).unwrap().len(), 2);
    }

    #[test]
    fn write_then_read_is_identity() {
        let original = read_conll(b"Ala O\nma O\nUE B-ORG\n\nPraga B-LOC\nnad O\n").unwrap();
        let text = write_conll(&original);
        let reread = read_conll(text.as_bytes()).unwrap();
        assert_eq!(original, reread);
    }

    #[test]
    fn written_layout_is_exact() {
        let sents = read_conll(b"UE B-ORG\n\nAla O\n").unwrap();
        assert_eq!(write_conll(&sents), "UE B-ORG\n\nAla O\n");
    }

    #[test]
    fn crlf_input_is_accepted() {
        let sents = read_conll(b"Ala O\r\nkot O\r\n").unwrap();
        assert_eq!(sents[0].sentence.tokens, ["Ala", "kot"]);
    }
}
