//! Conversion between labeled spans and BIO tag sequences.

use alloc::vec;
use alloc::vec::Vec;

use super::label::{Category, Label};
use crate::{Error, Result};

/// A contiguous entity span over token indices; `end` is exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub category: Category,
}

impl Span {
    pub fn new(start: usize, end: usize, category: Category) -> Self {
        Self {
            start,
            end,
            category,
        }
    }
}

/// Encodes non-overlapping spans as a BIO tag sequence of the given
/// length. Spans may touch but not overlap.
pub fn spans_to_bio(len: usize, spans: &[Span]) -> Result<Vec<Label>> {
    let mut sorted: Vec<Span> = spans.to_vec();
    sorted.sort();
    for span in &sorted {
        if span.start >= span.end || span.end > len {
            return Err(Error::SpanOutOfBounds {
                start: span.start,
                end: span.end,
                len,
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].start < pair[0].end {
            return Err(Error::OverlappingSpans(
                pair[0].start,
                pair[0].end,
                pair[1].start,
                pair[1].end,
            ));
        }
    }
    let mut tags = vec![Label::Outside; len];
    for span in &sorted {
        tags[span.start] = Label::Begin(span.category);
        for tag in tags.iter_mut().take(span.end).skip(span.start + 1) {
            *tag = Label::Inside(span.category);
        }
    }
    Ok(tags)
}

/// Decodes a BIO tag sequence into spans, repairing ill-formed
/// sequences by the CoNLL-2003 convention: an `I-C` that follows `O`,
/// the start of the sequence, or a span of a different category opens a
/// new span of category `C`.
pub fn bio_to_spans(tags: &[Label]) -> Vec<Span> {
    let mut spans = Vec::new();
    let mut open: Option<(usize, Category)> = None;
    for (i, &tag) in tags.iter().enumerate() {
        match tag {
            Label::Outside => {
                if let Some((start, cat)) = open.take() {
                    spans.push(Span::new(start, i, cat));
                }
            }
            Label::Begin(c) => {
                if let Some((start, cat)) = open.take() {
                    spans.push(Span::new(start, i, cat));
                }
                open = Some((i, c));
            }
            Label::Inside(c) => match open {
                Some((_, cat)) if cat == c => {}
                _ => {
                    if let Some((start, cat)) = open.take() {
                        spans.push(Span::new(start, i, cat));
                    }
                    open = Some((i, c));
                }
            },
        }
    }
    if let Some((start, cat)) = open {
        spans.push(Span::new(start, tags.len(), cat));
    }
    spans
}

#[cfg(test)]
mod tests {
    use super::*;
    use Category::*;

    fn parse_tags(tags: &[&str]) -> Vec<Label> {
        tags.iter().map(|t| Label::parse(t).unwrap()).collect()
    }

    #[test]
    fn encodes_a_leading_span() {
        let tags = spans_to_bio(3, &[Span::new(0, 2, Per)]).unwrap();
        assert_eq!(tags, parse_tags(&["B-PER", "I-PER", "O"]));
    }

    #[test]
    fn encodes_the_empty_span_set() {
        assert_eq!(spans_to_bio(2, &[]).unwrap(), parse_tags(&["O", "O"]));
    }

    #[test]
    fn encodes_adjacent_spans_with_fresh_begins() {
        let tags = spans_to_bio(4, &[Span::new(0, 1, Org), Span::new(1, 3, Loc)]).unwrap();
        assert_eq!(tags, parse_tags(&["B-ORG", "B-LOC", "I-LOC", "O"]));
    }

    #[test]
    fn rejects_overlapping_spans() {
        let err = spans_to_bio(3, &[Span::new(0, 2, Per), Span::new(1, 3, Loc)]);
        assert!(matches!(err, Err(Error::OverlappingSpans(..))));
    }

    #[test]
    fn rejects_out_of_bounds_and_empty_spans() {
        assert!(spans_to_bio(3, &[Span::new(1, 4, Per)]).is_err());
        assert!(spans_to_bio(3, &[Span::new(2, 2, Per)]).is_err());
    }

    #[test]
    fn decodes_well_formed_sequences() {
        let spans = bio_to_spans(&parse_tags(&["B-PER", "I-PER", "O"]));
        assert_eq!(spans, vec![Span::new(0, 2, Per)]);
        assert!(bio_to_spans(&parse_tags(&["O", "O"])).is_empty());
    }

    #[test]
    fn repairs_orphaned_inside_tags() {
        // expected segmentation fixed against the CoNLL-2003 evaluation
        // convention: leading I- opens a span, category switch closes it
        let spans = bio_to_spans(&parse_tags(&["I-LOC", "I-LOC", "B-ORG"]));
        assert_eq!(spans, vec![Span::new(0, 2, Loc), Span::new(2, 3, Org)]);
    }

    #[test]
    fn category_switch_inside_a_span_opens_a_new_one() {
        let spans = bio_to_spans(&parse_tags(&["B-PER", "I-LOC", "I-LOC"]));
        assert_eq!(spans, vec![Span::new(0, 1, Per), Span::new(1, 3, Loc)]);
    }

    #[test]
    fn inside_after_outside_opens_a_span() {
        let spans = bio_to_spans(&parse_tags(&["O", "I-EVT", "O"]));
        assert_eq!(spans, vec![Span::new(1, 2, Evt)]);
    }
}
