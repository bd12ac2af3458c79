//! Raw shared-task documents and their annotation files.
//!
//! Both formats are line-oriented UTF-8. A raw file starts with a fixed
//! number of metadata header lines (the first is always the document
//! id) followed by the body text. An annotation file starts with the
//! document id followed by one tab-separated mention record per line:
//! surface form, base form, category, and an optional cross-lingual id
//! that is carried through but never interpreted.

use alloc::borrow::Cow;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::label::{Category, Language};
use crate::{Error, Result};

/// A news document of the shared task.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawDocument {
    pub doc_id: String,
    pub language: Language,
    pub title: String,
    pub body: String,
    pub source_path: String,
}

impl RawDocument {
    /// Title and body joined with a newline; the text every consumer
    /// (annotation projection, tagging) operates on, so offsets agree
    /// across the pipeline. Entity mentions can occur in titles.
    pub fn full_text(&self) -> String {
        if self.title.is_empty() {
            self.body.clone()
        } else {
            format!("{}\n{}", self.title, self.body)
        }
    }
}

/// One gold entity record: surface form, base form and category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionAnnotation {
    pub form: String,
    pub lemma: String,
    pub category: Category,
    pub cl_id: Option<String>,
}

/// A parsed annotation file: the document it belongs to plus its
/// mention records in file order (duplicates kept).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotationFile {
    pub doc_id: String,
    pub annotations: Vec<MentionAnnotation>,
}

/// Describes the header block of a raw document file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RawLayout {
    /// Number of metadata lines before the body; the document id is
    /// always the first of them.
    pub header_lines: usize,
    /// Zero-based header line holding the title, if any.
    pub title_line: Option<usize>,
}

impl RawLayout {
    /// Two header lines: document id, then title.
    pub fn simple() -> Self {
        Self {
            header_lines: 2,
            title_line: Some(1),
        }
    }

    /// The five-line header used by the shared-task distribution:
    /// id, language, creation date, URL, title.
    pub fn bsnlp() -> Self {
        Self {
            header_lines: 5,
            title_line: Some(4),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.header_lines == 0 {
            return Err(Error::InvalidConfig(
                "layout needs at least one header line".into(),
            ));
        }
        if let Some(t) = self.title_line {
            if t >= self.header_lines {
                return Err(Error::InvalidConfig(format!(
                    "title line {t} outside header block of {} lines",
                    self.header_lines
                )));
            }
        }
        Ok(())
    }
}

impl Default for RawLayout {
    fn default() -> Self {
        Self::bsnlp()
    }
}

fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    core::str::from_utf8(bytes).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })
}

fn normalize_newlines(text: &str) -> Cow<'_, str> {
    if text.contains('\r') {
        Cow::Owned(text.replace("\r\n", "\n").replace('\r', "\n"))
    } else {
        Cow::Borrowed(text)
    }
}

/// Parses a raw document file against the given header layout.
///
/// Line endings are normalized, so CRLF and LF encodings of the same
/// document parse identically.
pub fn parse_raw_document(
    bytes: &[u8],
    language: Language,
    layout: &RawLayout,
) -> Result<RawDocument> {
    layout.validate()?;
    let text = decode_utf8(bytes)?;
    let text = normalize_newlines(text);

    let mut rest = text.as_ref();
    let mut header = Vec::with_capacity(layout.header_lines);
    for line_no in 1..=layout.header_lines {
        let Some((line, tail)) = rest.split_once('\n') else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("missing header line {line_no} of {}", layout.header_lines),
            });
        };
        header.push(line.trim_end());
        rest = tail;
    }

    let doc_id = header[0].trim();
    if doc_id.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "empty document id".into(),
        });
    }
    let title = layout
        .title_line
        .map(|t| header[t].trim().to_string())
        .unwrap_or_default();

    let body = rest.trim_matches('\n').to_string();
    if body.is_empty() {
        return Err(Error::Parse {
            line: layout.header_lines + 1,
            message: "empty document body".into(),
        });
    }

    Ok(RawDocument {
        doc_id: doc_id.to_string(),
        language,
        title,
        body,
        source_path: String::new(),
    })
}

/// Parses an annotation file: document id on the first line, then one
/// tab-separated record per line. Record order and duplicates are
/// preserved.
pub fn parse_annotation_file(bytes: &[u8]) -> Result<AnnotationFile> {
    let text = decode_utf8(bytes)?;
    let text = normalize_newlines(text);

    let mut lines = text.lines().enumerate();
    let doc_id = loop {
        match lines.next() {
            Some((_, line)) if line.trim().is_empty() => continue,
            Some((_, line)) => break line.trim().to_string(),
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing document id line".into(),
                })
            }
        }
    };

    let mut annotations = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!(
                    "expected 3 or 4 tab-separated fields, found {}",
                    fields.len()
                ),
            });
        }
        let form = fields[0].trim();
        if form.is_empty() {
            return Err(Error::Parse {
                line: idx + 1,
                message: "empty surface form".into(),
            });
        }
        let category = Category::parse(fields[2].trim())?;
        annotations.push(MentionAnnotation {
            form: form.to_string(),
            lemma: fields[1].trim().to_string(),
            category,
            cl_id: fields.get(3).map(|s| s.trim().to_string()),
        });
    }

    Ok(AnnotationFile {
        doc_id,
        annotations,
    })
}
