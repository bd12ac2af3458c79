//! Readers for external NER corpora and lemmatization resources, plus
//! category harmonization onto the five task categories and weighted
//! corpus merging.
//!
//! Each reader turns one published column layout into intermediate
//! (token, source tag) sentences; [`adapt_ner_corpus`] then maps source
//! categories through a [`CategoryMapping`], reverts dropped spans to
//! `O`, and recanonicalizes the BIO structure so no dangling inside
//! tags survive.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    bio_to_spans, spans_to_bio, Category, Label, Language, MentionAnnotation, Sentence,
    TaggedSentence,
};
use crate::{Error, Result};

/// External NER corpus layouts understood by [`adapt_ner_corpus`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    /// Space-separated `token tag` lines, BIO tags over PERSON,
    /// LOCATION, ORGANIZATION.
    Collection3,
    /// Tab-separated `token tag` lines, BIO tags over a wide label set
    /// (PER, LOC, ORG, EVE, VEHI, ANIM, ...).
    Multinerd,
    /// Whitespace-separated `token tag` lines with flat (non-BIO) tags
    /// O, PER, LOC, ORG; runs of one tag form a single entity.
    Polyglot,
    /// Tab-separated lines with an optional leading token index:
    /// `[index] token tag`, BIO tags over PER, LOC, ORG, MISC.
    Wikineural,
}

impl SourceFormat {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceFormat::Collection3 => "collection3",
            SourceFormat::Multinerd => "multinerd",
            SourceFormat::Polyglot => "polyglot",
            SourceFormat::Wikineural => "wikineural",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "collection3" => Ok(SourceFormat::Collection3),
            "multinerd" => Ok(SourceFormat::Multinerd),
            "polyglot" => Ok(SourceFormat::Polyglot),
            "wikineural" => Ok(SourceFormat::Wikineural),
            other => Err(Error::InvalidConfig(format!(
                "unknown source format `{other}`; expected collection3, multinerd, polyglot or wikineural"
            ))),
        }
    }
}

/// Where a lemmatization example came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LemmaOrigin {
    SharedTask,
    Sejf,
    Sejfek,
    Poleval2019,
    Translated,
}

impl LemmaOrigin {
    pub fn as_str(self) -> &'static str {
        match self {
            LemmaOrigin::SharedTask => "shared_task",
            LemmaOrigin::Sejf => "sejf",
            LemmaOrigin::Sejfek => "sejfek",
            LemmaOrigin::Poleval2019 => "poleval2019",
            LemmaOrigin::Translated => "translated",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "shared_task" => Ok(LemmaOrigin::SharedTask),
            "sejf" => Ok(LemmaOrigin::Sejf),
            "sejfek" => Ok(LemmaOrigin::Sejfek),
            "poleval2019" => Ok(LemmaOrigin::Poleval2019),
            "translated" => Ok(LemmaOrigin::Translated),
            other => Err(Error::InvalidConfig(format!(
                "unknown lemma resource origin `{other}`"
            ))),
        }
    }
}

/// One inflected-phrase / base-form training pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemmaExample {
    pub language: Language,
    pub surface: String,
    pub lemma: String,
    pub origin: LemmaOrigin,
}

/// Maps one source label either onto a task category or to `Drop`,
/// which reverts the tokens to `O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingTarget {
    Category(Category),
    Drop,
}

/// Total mapping from a source corpus's label set onto task categories.
#[derive(Debug, Clone, Default)]
pub struct CategoryMapping {
    map: BTreeMap<String, MappingTarget>,
}

impl CategoryMapping {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source_label: &str, target: MappingTarget) {
        self.map.insert(source_label.to_string(), target);
    }

    /// Looks a source label up; unmapped labels are an error so silent
    /// category loss cannot happen.
    pub fn get(&self, source_label: &str) -> Result<MappingTarget> {
        self.map
            .get(source_label)
            .copied()
            .ok_or_else(|| Error::UnmappedLabel(source_label.to_string()))
    }

    fn from_pairs(pairs: &[(&str, MappingTarget)]) -> Self {
        let mut mapping = Self::new();
        for (label, target) in pairs {
            mapping.insert(label, *target);
        }
        mapping
    }

    /// PERSON / LOCATION / ORGANIZATION onto PER / LOC / ORG.
    pub fn collection3() -> Self {
        use MappingTarget::Category as C;
        Self::from_pairs(&[
            ("PERSON", C(Category::Per)),
            ("LOCATION", C(Category::Loc)),
            ("ORGANIZATION", C(Category::Org)),
        ])
    }

    /// Identity on the three categories Polyglot provides.
    pub fn polyglot() -> Self {
        use MappingTarget::Category as C;
        Self::from_pairs(&[
            ("PER", C(Category::Per)),
            ("LOC", C(Category::Loc)),
            ("ORG", C(Category::Org)),
        ])
    }

    /// PER / LOC / ORG kept, MISC dropped.
    pub fn wikineural() -> Self {
        use MappingTarget::Category as C;
        Self::from_pairs(&[
            ("PER", C(Category::Per)),
            ("LOC", C(Category::Loc)),
            ("ORG", C(Category::Org)),
            ("MISC", MappingTarget::Drop),
        ])
    }

    /// Labels with a task counterpart are kept (events onto EVT,
    /// vehicles onto PRO as the product-like label); the rest of the
    /// published label set drops to `O`.
    pub fn multinerd() -> Self {
        use MappingTarget::{Category as C, Drop};
        Self::from_pairs(&[
            ("PER", C(Category::Per)),
            ("LOC", C(Category::Loc)),
            ("ORG", C(Category::Org)),
            ("EVE", C(Category::Evt)),
            ("VEHI", C(Category::Pro)),
            ("ANIM", Drop),
            ("BIO", Drop),
            ("CEL", Drop),
            ("DIS", Drop),
            ("FOOD", Drop),
            ("INST", Drop),
            ("MEDIA", Drop),
            ("MYTH", Drop),
            ("PLANT", Drop),
            ("TIME", Drop),
        ])
    }

    /// The default mapping shipped for each source format.
    pub fn default_for(format: SourceFormat) -> Self {
        match format {
            SourceFormat::Collection3 => Self::collection3(),
            SourceFormat::Multinerd => Self::multinerd(),
            SourceFormat::Polyglot => Self::polyglot(),
            SourceFormat::Wikineural => Self::wikineural(),
        }
    }
}

/// One sentence of (token, source tag) pairs before harmonization.
pub type RawSentence = Vec<(String, String)>;

fn decode(bytes: &[u8]) -> Result<&str> {
    core::str::from_utf8(bytes).map_err(|e| Error::Encoding {
        offset: e.valid_up_to(),
    })
}

/// Shared token/tag line reader: blank lines separate sentences,
/// `-DOCSTART-` markers are skipped, fields split on whitespace (which
/// covers both space- and tab-separated layouts).
fn read_token_tag_file(
    bytes: &[u8],
    sentences: &mut Vec<RawSentence>,
    index_column: bool,
) -> Result<()> {
    let text = decode(bytes)?;
    let mut current = RawSentence::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !current.is_empty() {
                sentences.push(core::mem::take(&mut current));
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "-DOCSTART-" {
            if !current.is_empty() {
                sentences.push(core::mem::take(&mut current));
            }
            continue;
        }
        let skip_index = index_column && fields.len() >= 3 && fields[0].parse::<usize>().is_ok();
        let fields = if skip_index {
            &fields[1..]
        } else {
            &fields[..]
        };
        if fields.len() < 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected token and tag columns, found {}", fields.len()),
            });
        }
        current.push((fields[0].to_string(), fields[fields.len() - 1].to_string()));
    }
    if !current.is_empty() {
        sentences.push(current);
    }
    Ok(())
}

/// Converts flat per-token tags (Polyglot style) into BIO: every run of
/// one non-`O` tag becomes a single entity.
fn flat_runs_to_bio(sentences: &mut [RawSentence]) {
    for sentence in sentences {
        let mut prev: Option<String> = None;
        for (_, tag) in sentence.iter_mut() {
            if tag == "O" {
                prev = None;
                continue;
            }
            let bare = tag.clone();
            *tag = if prev.as_deref() == Some(bare.as_str()) {
                format!("I-{bare}")
            } else {
                format!("B-{bare}")
            };
            prev = Some(bare);
        }
    }
}

/// Reads Collection3 files into intermediate records for
/// [`adapt_ner_corpus`] and the entity-count sanity report.
pub fn load_collection3(sources: &[&[u8]]) -> Result<Vec<RawSentence>> {
    let mut sentences = Vec::new();
    for bytes in sources {
        read_token_tag_file(bytes, &mut sentences, false)?;
    }
    if sentences.is_empty() {
        return Err(Error::EmptyInput("collection3 corpus"));
    }
    Ok(sentences)
}

/// Counts entities per source category in intermediate records, using
/// the same segmentation repair as BIO decoding (an inside tag after
/// `O` or after a different category opens a new entity).
pub fn entity_counts(records: &[RawSentence]) -> BTreeMap<String, usize> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for sentence in records {
        let mut prev: Option<&str> = None;
        for (_, tag) in sentence {
            let (prefix, category) = match tag.split_once('-') {
                Some((p, c)) if p == "B" || p == "I" => (p, c),
                _ => {
                    prev = None;
                    continue;
                }
            };
            if prefix == "B" || prev != Some(category) {
                *counts.entry(category.to_string()).or_default() += 1;
            }
            prev = Some(category);
        }
    }
    counts
}

/// True when `actual` is within `fraction` of `expected` (relative).
pub fn within_tolerance(actual: usize, expected: usize, fraction: f64) -> bool {
    let diff = actual.abs_diff(expected) as f64;
    diff <= fraction * expected as f64
}

/// An external corpus harmonized onto the task's label space.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedCorpus {
    pub language: Language,
    pub source: SourceFormat,
    pub sentences: Vec<TaggedSentence>,
}

fn map_tag(mapping: &CategoryMapping, raw: &str) -> Result<Label> {
    if raw == "O" {
        return Ok(Label::Outside);
    }
    let Some((prefix, source_label)) = raw.split_once('-') else {
        return Err(Error::UnmappedLabel(raw.to_string()));
    };
    let target = mapping.get(source_label)?;
    Ok(match (prefix, target) {
        (_, MappingTarget::Drop) => Label::Outside,
        ("B", MappingTarget::Category(c)) => Label::Begin(c),
        ("I", MappingTarget::Category(c)) => Label::Inside(c),
        _ => return Err(Error::UnmappedLabel(raw.to_string())),
    })
}

/// Reads external corpus files and harmonizes them onto the task
/// categories. Tokens whose source label maps to `Drop` revert to `O`
/// and the BIO structure is recanonicalized afterwards, so the output
/// never contains dangling inside tags.
pub fn adapt_ner_corpus(
    sources: &[&[u8]],
    format: SourceFormat,
    mapping: &CategoryMapping,
    language: Language,
) -> Result<AdaptedCorpus> {
    let mut raw = Vec::new();
    match format {
        SourceFormat::Collection3 => {
            raw = load_collection3(sources)?;
        }
        SourceFormat::Multinerd => {
            for bytes in sources {
                read_token_tag_file(bytes, &mut raw, false)?;
            }
        }
        SourceFormat::Polyglot => {
            for bytes in sources {
                read_token_tag_file(bytes, &mut raw, false)?;
            }
            flat_runs_to_bio(&mut raw);
        }
        SourceFormat::Wikineural => {
            for bytes in sources {
                read_token_tag_file(bytes, &mut raw, true)?;
            }
        }
    }
    if raw.is_empty() {
        return Err(Error::EmptyInput("external corpus"));
    }

    let mut sentences = Vec::with_capacity(raw.len());
    for record in raw {
        let tokens: Vec<String> = record.iter().map(|(t, _)| t.clone()).collect();
        let mapped: Result<Vec<Label>> = record
            .iter()
            .map(|(_, tag)| map_tag(mapping, tag))
            .collect();
        let mapped = mapped?;
        // dropping spans can orphan inside tags; decode-and-reencode
        // canonicalizes the sequence
        let spans = bio_to_spans(&mapped);
        let tags = spans_to_bio(mapped.len(), &spans)?;
        sentences.push(TaggedSentence::new(Sentence::from_tokens(tokens), tags)?);
    }
    Ok(AdaptedCorpus {
        language,
        source: format,
        sentences,
    })
}

/// Loaded lemma examples plus the count of rows that were skipped
/// (empty lemma or surface, or unparseable row).
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaLoadReport {
    pub examples: Vec<LemmaExample>,
    pub skipped: usize,
}

/// Splits a lexicon row of the `surface,lemma.TAGS` shape; the grammar
/// tag block after the last dot-separator is discarded.
fn split_lexicon_row(line: &str) -> Option<(&str, &str)> {
    let (surface, rest) = line.split_once(',')?;
    let lemma = match rest.rfind('.') {
        Some(pos) => &rest[..pos],
        None => rest,
    };
    Some((surface, lemma))
}

/// Loads a lemmatization resource. SEJF and SEJFEK rows use the
/// lexicon layout `surface,lemma.TAGS`; the shared-task, PolEval and
/// translated layouts are tab-separated `surface lemma` with extra
/// columns ignored. Duplicate (surface, lemma) pairs collapse to the
/// first occurrence; defective rows are skipped and counted.
pub fn load_lemma_resource(
    sources: &[&[u8]],
    origin: LemmaOrigin,
    language: Language,
) -> Result<LemmaLoadReport> {
    let lexicon_layout = matches!(origin, LemmaOrigin::Sejf | LemmaOrigin::Sejfek);
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut examples = Vec::new();
    let mut skipped = 0usize;

    for bytes in sources {
        let text = decode(bytes)?;
        for line in text.lines() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let parsed = if lexicon_layout {
                split_lexicon_row(line)
            } else {
                line.split_once('\t')
                    .map(|(s, rest)| (s, rest.split('\t').next().unwrap_or(rest)))
            };
            let Some((surface, lemma)) = parsed else {
                skipped += 1;
                continue;
            };
            let surface = surface.trim();
            let lemma = lemma.trim();
            if surface.is_empty() || lemma.is_empty() {
                skipped += 1;
                continue;
            }
            let key = (surface.to_string(), lemma.to_string());
            if seen.insert(key.clone()) {
                examples.push(LemmaExample {
                    language,
                    surface: key.0,
                    lemma: key.1,
                    origin,
                });
            }
        }
    }
    Ok(LemmaLoadReport { examples, skipped })
}

/// One lemma example per distinct (form, lemma) pair in an annotation
/// list. Identity pairs are kept: they teach the model to copy.
pub fn extract_shared_task_lemma_pairs(
    annotations: &[MentionAnnotation],
    language: Language,
) -> Vec<LemmaExample> {
    let mut seen: BTreeSet<(String, String)> = BTreeSet::new();
    let mut examples = Vec::new();
    for ann in annotations {
        if ann.form.is_empty() || ann.lemma.is_empty() {
            continue;
        }
        let key = (ann.form.clone(), ann.lemma.clone());
        if seen.insert(key) {
            examples.push(LemmaExample {
                language,
                surface: ann.form.clone(),
                lemma: ann.lemma.clone(),
                origin: LemmaOrigin::SharedTask,
            });
        }
    }
    examples
}

/// A named corpus with a sampling weight for [`merge_corpora`].
#[derive(Debug, Clone)]
pub struct WeightedCorpus<'a> {
    pub name: &'a str,
    pub sentences: &'a [TaggedSentence],
    pub weight: f64,
}

/// A merged-corpus sentence with the name of the corpus it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MergedSentence {
    pub tagged: TaggedSentence,
    pub provenance: String,
}

/// Builds a training corpus of `round(weight_i * len_i)` sentences per
/// source (cycling through a source when its weight exceeds 1) and
/// shuffles the concatenation deterministically under `seed`.
pub fn merge_corpora(corpora: &[WeightedCorpus], seed: u64) -> Result<Vec<MergedSentence>> {
    if corpora.is_empty() {
        return Err(Error::EmptyInput("corpora to merge"));
    }
    if corpora
        .iter()
        .any(|c| c.weight < 0.0 || !c.weight.is_finite())
    {
        return Err(Error::InvalidConfig(
            "corpus weights must be finite and nonnegative".into(),
        ));
    }
    if corpora.iter().all(|c| c.weight == 0.0) {
        return Err(Error::InvalidConfig(
            "at least one corpus weight must be positive".into(),
        ));
    }

    let mut merged = Vec::new();
    for corpus in corpora {
        #[allow(unused_imports)]
        use num_traits::Float; // round() without std
        let take = (corpus.weight * corpus.sentences.len() as f64).round() as usize;
        for i in 0..take {
            merged.push(MergedSentence {
                tagged: corpus.sentences[i % corpus.sentences.len()].clone(),
                provenance: corpus.name.to_string(),
            });
        }
    }

    // Fisher-Yates with an explicitly seeded stream
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..merged.len()).rev() {
        let j = rng.random_range(0..=i);
        merged.swap(i, j);
    }
    Ok(merged)
}
