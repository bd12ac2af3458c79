//! Task metrics: span-level F1 over BIO corpora, document-level
//! mention-set F1, and exact-match accuracy for lemmatization.
//!
//! All F scores derive from raw counts (`tp`, predicted, gold) kept per
//! category, so reports serialize exactly and the micro block is always
//! the column-wise sum of the category blocks. Scores are rendered as
//! percentages with two decimals.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::corpus::{Category, Language, TaggedSentence};
use crate::{Error, Result};

/// Which metric a report was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Strict span F1 on aligned BIO sentences.
    SpanF1,
    /// Per-document deduplicated (surface, category) set F1.
    MentionSetF1,
    /// Exact-match lemmatization accuracy folded into F1 form.
    LemmaExactMatch,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::SpanF1 => "span-f1",
            Metric::MentionSetF1 => "mention-f1",
            Metric::LemmaExactMatch => "lemma-em",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "span-f1" => Ok(Metric::SpanF1),
            "mention-f1" => Ok(Metric::MentionSetF1),
            "lemma-em" => Ok(Metric::LemmaExactMatch),
            other => Err(Error::InvalidConfig(format!(
                "unknown metric `{other}`; expected span-f1, mention-f1 or lemma-em"
            ))),
        }
    }
}

/// Raw match counts; precision, recall and F1 are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    /// Predicted items that matched a gold item.
    pub tp: usize,
    /// All predicted items.
    pub pred: usize,
    /// All gold items (the support).
    pub gold: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        if self.pred == 0 {
            0.0
        } else {
            self.tp as f64 / self.pred as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.gold == 0 {
            0.0
        } else {
            self.tp as f64 / self.gold as f64
        }
    }

    pub fn f1(&self) -> f64 {
        let p = self.precision();
        let r = self.recall();
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    pub fn support(&self) -> usize {
        self.gold
    }

    fn add(&mut self, other: Counts) {
        self.tp += other.tp;
        self.pred += other.pred;
        self.gold += other.gold;
    }
}

/// Per-category and micro-averaged scores for one evaluation run.
///
/// The micro block is always the sum of the per-category blocks; the
/// constructor enforces this and the key-value parser re-checks it.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub metric: Metric,
    pub language: Option<Language>,
    pub case_sensitive: Option<bool>,
    pub per_category: BTreeMap<Category, Counts>,
    pub micro: Counts,
}

impl EvalReport {
    /// Builds a report; the micro block is summed from the categories.
    pub fn from_counts(
        metric: Metric,
        language: Option<Language>,
        case_sensitive: Option<bool>,
        per_category: BTreeMap<Category, Counts>,
    ) -> Self {
        let mut micro = Counts::default();
        for counts in per_category.values() {
            micro.add(*counts);
        }
        Self {
            metric,
            language,
            case_sensitive,
            per_category,
            micro,
        }
    }
}

/// Output encodings for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// Human-readable table, percentages with two decimals.
    Plain,
    /// `key=value` lines, parseable back with [`parse_report`].
    KeyValue,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(ReportFormat::Plain),
            "kv" => Ok(ReportFormat::KeyValue),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format `{other}`; expected plain or kv"
            ))),
        }
    }
}

/// Strict span-level F1 in the CoNLL-2003 style.
///
/// Spans come from `bio_to_spans` on both sides; a predicted span is a
/// true positive iff a not-yet-consumed gold span has the identical
/// (start, end, category) triple. Sentences must align one-to-one with
/// equal token counts.
pub fn span_f1(gold: &[TaggedSentence], pred: &[TaggedSentence]) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
            context: "gold vs predicted sentence count",
        });
    }
    let mut per_category: BTreeMap<Category, Counts> = BTreeMap::new();
    for (index, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.sentence.len() != p.sentence.len() {
            return Err(Error::SentenceMisaligned {
                index,
                gold: g.sentence.len(),
                pred: p.sentence.len(),
            });
        }
        // spans of one sentence are disjoint, so a set is faithful
        let gold_spans: BTreeSet<_> = g.spans().into_iter().collect();
        let pred_spans: BTreeSet<_> = p.spans().into_iter().collect();
        for span in &gold_spans {
            per_category.entry(span.category).or_default().gold += 1;
        }
        for span in &pred_spans {
            let counts = per_category.entry(span.category).or_default();
            counts.pred += 1;
            if gold_spans.contains(span) {
                counts.tp += 1;
            }
        }
    }
    Ok(EvalReport::from_counts(
        Metric::SpanF1,
        None,
        None,
        per_category,
    ))
}

fn fold_mentions(
    docs: &[Vec<(String, Category)>],
    case_sensitive: bool,
) -> Vec<BTreeSet<(String, Category)>> {
    docs.iter()
        .map(|doc| {
            doc.iter()
                .map(|(form, cat)| {
                    let key = if case_sensitive {
                        form.clone()
                    } else {
                        form.to_lowercase()
                    };
                    (key, *cat)
                })
                .collect()
        })
        .collect()
}

/// Document-level F1 over deduplicated (surface, category) mentions.
///
/// Gold and predicted documents align by position. Within each document
/// the mention list is reduced to a set after optional case folding; a
/// match requires equal surface and equal category.
pub fn mention_set_f1(
    gold: &[Vec<(String, Category)>],
    pred: &[Vec<(String, Category)>],
    case_sensitive: bool,
) -> Result<EvalReport> {
    if gold.len() != pred.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: pred.len(),
            context: "gold vs predicted document count",
        });
    }
    let gold_sets = fold_mentions(gold, case_sensitive);
    let pred_sets = fold_mentions(pred, case_sensitive);

    let mut per_category: BTreeMap<Category, Counts> = BTreeMap::new();
    for (g, p) in gold_sets.iter().zip(&pred_sets) {
        for (_, cat) in g {
            per_category.entry(*cat).or_default().gold += 1;
        }
        for mention in p {
            let counts = per_category.entry(mention.1).or_default();
            counts.pred += 1;
            if g.contains(mention) {
                counts.tp += 1;
            }
        }
    }
    Ok(EvalReport::from_counts(
        Metric::MentionSetF1,
        None,
        Some(case_sensitive),
        per_category,
    ))
}

/// Normalization applied to both sides of a lemma comparison: trim,
/// collapse internal whitespace runs to one space, lowercase.
pub fn normalize_lemma(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for part in s.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(&part.to_lowercase());
    }
    out
}

/// Case-insensitive exact-match accuracy over (gold, predicted) lemma
/// pairs. Both sides are passed through [`normalize_lemma`].
pub fn lemma_exact_match(pairs: &[(String, String)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("lemma pairs"));
    }
    let hits = pairs
        .iter()
        .filter(|(gold, pred)| normalize_lemma(gold) == normalize_lemma(pred))
        .count();
    Ok(hits as f64 / pairs.len() as f64)
}

fn percent(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

fn plain_row(out: &mut String, name: &str, counts: &Counts) {
    if counts.gold == 0 && counts.pred == 0 {
        out.push_str(&format!(
            "{name:<10} {:>7} {:>7} {:>7} {:>8}\n",
            "-", "-", "-", "-"
        ));
    } else {
        out.push_str(&format!(
            "{name:<10} {:>7} {:>7} {:>7} {:>8}\n",
            percent(counts.precision()),
            percent(counts.recall()),
            percent(counts.f1()),
            counts.support(),
        ));
    }
}

/// Serializes a report. The plain form is a fixed-width table with
/// percentage scores; the key-value form stores the raw counts and
/// survives [`parse_report`] unchanged.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Plain => {
            let mut out = String::new();
            out.push_str(&format!("metric: {}\n", report.metric.as_str()));
            if let Some(lang) = report.language {
                out.push_str(&format!("language: {}\n", lang.as_str()));
            }
            if let Some(cs) = report.case_sensitive {
                out.push_str(&format!(
                    "case-sensitive: {}\n",
                    if cs { "yes" } else { "no" }
                ));
            }
            out.push('\n');
            out.push_str(&format!(
                "{:<10} {:>7} {:>7} {:>7} {:>8}\n",
                "category", "prec", "rec", "f1", "support"
            ));
            for (category, counts) in &report.per_category {
                plain_row(&mut out, category.as_str(), counts);
            }
            plain_row(&mut out, "micro", &report.micro);
            out
        }
        ReportFormat::KeyValue => {
            let mut out = String::new();
            out.push_str(&format!("metric={}\n", report.metric.as_str()));
            if let Some(lang) = report.language {
                out.push_str(&format!("language={}\n", lang.as_str()));
            }
            if let Some(cs) = report.case_sensitive {
                out.push_str(&format!("case_sensitive={cs}\n"));
            }
            for (category, counts) in &report.per_category {
                let name = category.as_str();
                out.push_str(&format!("category.{name}.tp={}\n", counts.tp));
                out.push_str(&format!("category.{name}.pred={}\n", counts.pred));
                out.push_str(&format!("category.{name}.gold={}\n", counts.gold));
            }
            out.push_str(&format!("micro.tp={}\n", report.micro.tp));
            out.push_str(&format!("micro.pred={}\n", report.micro.pred));
            out.push_str(&format!("micro.gold={}\n", report.micro.gold));
            out
        }
    }
}

/// Parses the key-value report form back into an [`EvalReport`].
///
/// The micro block must equal the per-category sums; disagreement is a
/// parse error, not silently recomputed.
pub fn parse_report(text: &str) -> Result<EvalReport> {
    let mut metric = None;
    let mut language = None;
    let mut case_sensitive = None;
    let mut per_category: BTreeMap<Category, Counts> = BTreeMap::new();
    let mut micro = Counts::default();
    let mut saw_micro = false;

    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: idx + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key=value".to_string()))?;
        let parse_count = |value: &str| -> Result<usize> {
            value
                .parse::<usize>()
                .map_err(|_| err(format!("bad count `{value}`")))
        };
        match key {
            "metric" => metric = Some(Metric::parse(value)?),
            "language" => language = Some(Language::parse(value)?),
            "case_sensitive" => {
                case_sensitive = Some(match value {
                    "true" => true,
                    "false" => false,
                    other => return Err(err(format!("bad boolean `{other}`"))),
                })
            }
            _ if key.starts_with("category.") => {
                let mut parts = key.split('.');
                parts.next();
                let cat = parts
                    .next()
                    .ok_or_else(|| err("missing category name".to_string()))?;
                let field = parts
                    .next()
                    .ok_or_else(|| err("missing count field".to_string()))?;
                let category = Category::parse(cat)?;
                let counts = per_category.entry(category).or_default();
                let n = parse_count(value)?;
                match field {
                    "tp" => counts.tp = n,
                    "pred" => counts.pred = n,
                    "gold" => counts.gold = n,
                    other => return Err(err(format!("unknown count field `{other}`"))),
                }
            }
            _ if key.starts_with("micro.") => {
                saw_micro = true;
                let n = parse_count(value)?;
                match &key["micro.".len()..] {
                    "tp" => micro.tp = n,
                    "pred" => micro.pred = n,
                    "gold" => micro.gold = n,
                    other => return Err(err(format!("unknown count field `{other}`"))),
                }
            }
            other => return Err(err(format!("unknown key `{other}`"))),
        }
    }

    let metric = metric.ok_or(Error::Parse {
        line: 1,
        message: "missing metric".to_string(),
    })?;
    if !saw_micro {
        return Err(Error::Parse {
            line: 1,
            message: "missing micro block".to_string(),
        });
    }
    let report = EvalReport::from_counts(metric, language, case_sensitive, per_category);
    if report.micro != micro {
        return Err(Error::Parse {
            line: 1,
            message: "micro block does not equal per-category sums".to_string(),
        });
    }
    Ok(report)
}
