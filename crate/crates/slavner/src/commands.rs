//! The verb implementations behind the binary. Each function takes its
//! parsed arguments and performs the whole operation; `main` only maps
//! errors to exit codes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;

use slavner_core::adapters::{
    adapt_ner_corpus, extract_shared_task_lemma_pairs, load_lemma_resource, merge_corpora,
    CategoryMapping, LemmaExample, LemmaOrigin, SourceFormat, WeightedCorpus,
};
use slavner_core::corpus::{
    parse_annotation_file, parse_raw_document, read_conll, tokenize, write_conll, Category,
    Language, RawLayout, TaggedSentence,
};
use slavner_core::eval::{
    lemma_exact_match, mention_set_f1, normalize_lemma, render_report, span_f1, Counts, EvalReport,
    Metric, ReportFormat,
};
use slavner_core::lemma::{
    assemble_training_set, predict_lemma, train_lemmatizer, DataTier, FallbackReport,
    LemmaTrainConfig,
};
use slavner_core::tagger::{train, TrainConfig};

use crate::config::Config;
use crate::error::{core_at, Error, Result};
use crate::{checkpoint, fsio, preset, submission};

fn parse_language(s: &str) -> Result<Language> {
    Language::parse(s).map_err(Error::Core)
}

fn parse_layout(s: &str) -> Result<RawLayout> {
    match s {
        "simple" => Ok(RawLayout::simple()),
        "bsnlp" => Ok(RawLayout::bsnlp()),
        other => Err(Error::invalid(format!(
            "unknown layout `{other}`; expected simple or bsnlp"
        ))),
    }
}

/// Convert a directory of raw documents plus annotation files into one
/// canonical CoNLL file via tokenization and mention projection.
#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Directory holding `<doc>.txt` raw files and `<doc>.out` annotations
    #[arg(long)]
    pub input: PathBuf,
    /// Document language: pl, cs or ru
    #[arg(long)]
    pub language: String,
    /// Raw-file header layout: bsnlp (5 lines) or simple (2 lines)
    #[arg(long, default_value = "bsnlp")]
    pub layout: String,
    /// Output CoNLL file
    #[arg(long)]
    pub output: PathBuf,
    /// Optional report of mentions that never matched the text
    #[arg(long)]
    pub unmatched: Option<PathBuf>,
}

pub fn convert(args: &ConvertArgs) -> Result<()> {
    let language = parse_language(&args.language)?;
    let layout = parse_layout(&args.layout)?;
    let files = fsio::sorted_files(&args.input, "txt")?;
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no .txt documents",
            args.input.display()
        )));
    }

    let mut tagged: Vec<TaggedSentence> = Vec::new();
    let mut unmatched_lines = String::new();
    let mut documents = 0usize;
    let mut unmatched_total = 0usize;
    for txt_path in &files {
        let doc = parse_raw_document(&fsio::read(txt_path)?, language, &layout)
            .map_err(core_at(txt_path))?;
        let out_path = txt_path.with_extension("out");
        let annotations =
            parse_annotation_file(&fsio::read(&out_path)?).map_err(core_at(&out_path))?;
        let sentences = tokenize(&doc.full_text());
        let outcome =
            slavner_core::corpus::project_annotations(&sentences, &annotations.annotations)
                .map_err(core_at(txt_path))?;
        for m in &outcome.unmatched {
            unmatched_total += 1;
            writeln!(
                unmatched_lines,
                "{}\t{}\t{}\t{}",
                annotations.doc_id,
                m.form,
                m.category.as_str(),
                m.reason
            )
            .unwrap();
        }
        tagged.extend(outcome.tagged);
        documents += 1;
    }

    let entities: usize = tagged.iter().map(|s| s.spans().len()).sum();
    fsio::write_atomic(&args.output, write_conll(&tagged).as_bytes())?;
    if let Some(report_path) = &args.unmatched {
        fsio::write_atomic(report_path, unmatched_lines.as_bytes())?;
    }
    println!(
        "converted {documents} documents: {} sentences, {entities} entities, {unmatched_total} unmatched mentions",
        tagged.len()
    );
    Ok(())
}

/// Adapt an external NER corpus into the canonical CoNLL form with the
/// source's default category mapping.
#[derive(Debug, Args)]
pub struct AdaptArgs {
    /// Source format: collection3, multinerd, polyglot or wikineural
    #[arg(long)]
    pub format: String,
    /// Corpus language: pl, cs or ru
    #[arg(long)]
    pub language: String,
    /// One or more input files in the source's own layout
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Output CoNLL file
    #[arg(long)]
    pub output: PathBuf,
}

pub fn adapt(args: &AdaptArgs) -> Result<()> {
    let format = SourceFormat::parse(&args.format)?;
    let language = parse_language(&args.language)?;
    let mapping = CategoryMapping::default_for(format);
    let mut buffers = Vec::with_capacity(args.input.len());
    for path in &args.input {
        buffers.push(fsio::read(path)?);
    }
    let slices: Vec<&[u8]> = buffers.iter().map(Vec::as_slice).collect();
    let adapted =
        adapt_ner_corpus(&slices, format, &mapping, language).map_err(core_at(&args.input[0]))?;
    let entities: usize = adapted.sentences.iter().map(|s| s.spans().len()).sum();
    fsio::write_atomic(&args.output, write_conll(&adapted.sentences).as_bytes())?;
    println!(
        "adapted {} sentences, {entities} entities from {}",
        adapted.sentences.len(),
        format.as_str()
    );
    Ok(())
}

fn ner_config(path: Option<&Path>) -> Result<TrainConfig> {
    let cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let d = TrainConfig::default();
    let config = TrainConfig {
        seed: cfg.get_u64("seed", d.seed)?,
        epochs: cfg.get_usize("epochs", d.epochs)?,
        batch_size: cfg.get_usize("batch_size", d.batch_size)?,
        learning_rate: cfg.get_f64("learning_rate", d.learning_rate)?,
        max_pieces: cfg.get_usize("max_pieces", d.max_pieces)?,
        encoder: cfg.get_string("encoder", &d.encoder),
        crf_enabled: cfg.get_bool("crf_enabled", d.crf_enabled)?,
        constraint_mask: cfg.get_bool("constraint_mask", d.constraint_mask)?,
    };
    config.validate()?;
    Ok(config)
}

/// `path` or `path@weight`; a missing weight means 1.0.
fn parse_weighted_path(raw: &str) -> (PathBuf, f64) {
    if let Some((path, weight)) = raw.rsplit_once('@') {
        if let Ok(w) = weight.parse::<f64>() {
            return (PathBuf::from(path), w);
        }
    }
    (PathBuf::from(raw), 1.0)
}

/// Train the tagger on one or more CoNLL corpora (merged by weight when
/// several are given) and write a checkpoint directory.
#[derive(Debug, Args)]
pub struct TrainNerArgs {
    /// Flat key-value hyperparameter file; defaults apply when absent
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training corpus, `path` or `path@weight`; repeatable
    #[arg(long, required = true)]
    pub corpus: Vec<String>,
    /// Held-out CoNLL corpus for checkpoint selection
    #[arg(long)]
    pub validation: Option<PathBuf>,
    /// Checkpoint directory to create
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train_ner(args: &TrainNerArgs) -> Result<()> {
    let config = ner_config(args.config.as_deref())?;

    let mut corpora: Vec<(String, Vec<TaggedSentence>, f64)> = Vec::new();
    for raw in &args.corpus {
        let (path, weight) = parse_weighted_path(raw);
        let sentences = read_conll(&fsio::read(&path)?).map_err(core_at(&path))?;
        corpora.push((fsio::stem(&path), sentences, weight));
    }
    let training: Vec<TaggedSentence> = if corpora.len() == 1 && corpora[0].2 == 1.0 {
        corpora.remove(0).1
    } else {
        let weighted: Vec<WeightedCorpus> = corpora
            .iter()
            .map(|(name, sentences, weight)| WeightedCorpus {
                name,
                sentences,
                weight: *weight,
            })
            .collect();
        merge_corpora(&weighted, config.seed)?
            .into_iter()
            .map(|m| m.tagged)
            .collect()
    };

    let validation = match &args.validation {
        Some(path) => Some(read_conll(&fsio::read(path)?).map_err(core_at(path))?),
        None => None,
    };

    let (model, report) = train(&training, validation.as_deref(), &config)?;
    checkpoint::save_ner(&args.out, &model, &report)?;
    print!(
        "trained tagger on {} sentences ({} truncated): selected epoch {}, final loss {:.6}",
        training.len(),
        report.truncated_sentences,
        report.selected_epoch,
        report.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    match report.validation_f1 {
        Some(f1) => println!(", validation span F1 {:.4}", f1),
        None => println!(),
    }
    Ok(())
}

fn lemma_config(path: Option<&Path>) -> Result<LemmaTrainConfig> {
    let cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    let d = LemmaTrainConfig::default();
    let config = LemmaTrainConfig {
        seed: cfg.get_u64("seed", d.seed)?,
        epochs: cfg.get_usize("epochs", d.epochs)?,
        batch_size: cfg.get_usize("batch_size", d.batch_size)?,
        learning_rate: cfg.get_f64("learning_rate", d.learning_rate)?,
        embed_dim: cfg.get_usize("embed_dim", d.embed_dim)?,
        hidden: cfg.get_usize("hidden", d.hidden)?,
        multilingual: cfg.get_bool("multilingual", d.multilingual)?,
    };
    config.validate()?;
    Ok(config)
}

/// `lang=dir`, e.g. `pl=data/train-pl`.
fn parse_lang_dir(raw: &str) -> Result<(Language, PathBuf)> {
    let Some((lang, dir)) = raw.split_once('=') else {
        return Err(Error::invalid(format!("expected lang=dir, got `{raw}`")));
    };
    Ok((parse_language(lang)?, PathBuf::from(dir)))
}

/// `origin:lang=path`, e.g. `sejf:pl=lex/sejf.csv`.
fn parse_resource_spec(raw: &str) -> Result<(LemmaOrigin, Language, PathBuf)> {
    let parts: Option<(&str, &str, &str)> = raw
        .split_once(':')
        .and_then(|(origin, rest)| rest.split_once('=').map(|(l, p)| (origin, l, p)));
    let Some((origin, lang, path)) = parts else {
        return Err(Error::invalid(format!(
            "expected origin:lang=path, got `{raw}`"
        )));
    };
    Ok((
        LemmaOrigin::parse(origin)?,
        parse_language(lang)?,
        PathBuf::from(path),
    ))
}

/// Train the lemmatizer from shared-task annotation directories and
/// lexical resources, restricted to one data tier.
#[derive(Debug, Args)]
pub struct TrainLemmaArgs {
    /// Flat key-value hyperparameter file; defaults apply when absent
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Shared-task annotation directory as `lang=dir`; repeatable
    #[arg(long)]
    pub annotations: Vec<String>,
    /// Lexical resource as `origin:lang=path`; repeatable
    #[arg(long)]
    pub resource: Vec<String>,
    /// Data tier: original, with-poleval or with-lexicon
    #[arg(long, default_value = "with-lexicon")]
    pub tier: String,
    /// Hold out every Nth pair for checkpoint selection
    #[arg(long)]
    pub holdout: Option<usize>,
    /// Checkpoint directory to create
    #[arg(long)]
    pub out: PathBuf,
}

pub fn train_lemma(args: &TrainLemmaArgs) -> Result<()> {
    let config = lemma_config(args.config.as_deref())?;
    let tier = DataTier::parse(&args.tier)?;

    let mut examples: Vec<LemmaExample> = Vec::new();
    for spec in &args.annotations {
        let (language, dir) = parse_lang_dir(spec)?;
        for path in fsio::sorted_files(&dir, "out")? {
            let file = parse_annotation_file(&fsio::read(&path)?).map_err(core_at(&path))?;
            examples.extend(extract_shared_task_lemma_pairs(&file.annotations, language));
        }
    }
    let mut skipped_rows = 0usize;
    for spec in &args.resource {
        let (origin, language, path) = parse_resource_spec(spec)?;
        let bytes = fsio::read(&path)?;
        let report = load_lemma_resource(&[&bytes], origin, language).map_err(core_at(&path))?;
        skipped_rows += report.skipped;
        examples.extend(report.examples);
    }

    let pairs = assemble_training_set(&examples, tier, config.multilingual);
    let (training, validation): (Vec<_>, Vec<_>) = match args.holdout {
        Some(n) if n > 1 => {
            let held: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| i % n == n - 1)
                .map(|(_, p)| p.clone())
                .collect();
            let kept: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(i, _)| i % n != n - 1)
                .map(|(_, p)| p.clone())
                .collect();
            (kept, held)
        }
        Some(_) => return Err(Error::invalid("--holdout must be at least 2")),
        None => (pairs, Vec::new()),
    };
    let validation = if validation.is_empty() {
        None
    } else {
        Some(validation.as_slice())
    };

    let (model, report) = train_lemmatizer(&training, validation, &config)?;
    checkpoint::save_lemma(
        &args.out,
        &model,
        &config,
        &report,
        &[("tier", tier.as_str().to_string())],
    )?;
    print!(
        "trained lemmatizer on {} pairs (tier {}, {skipped_rows} defective resource rows skipped): selected epoch {}, final loss {:.6}",
        training.len(),
        tier.as_str(),
        report.selected_epoch,
        report.epoch_losses.last().copied().unwrap_or(f64::NAN)
    );
    match report.validation_em {
        Some(em) => println!(", validation exact match {:.4}", em),
        None => println!(),
    }
    Ok(())
}

/// Tag raw documents and lemmatize the recognized mentions, writing one
/// prediction file per document.
#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Preset naming the model roles: system1..system4
    #[arg(long)]
    pub preset: String,
    /// Config binding roles to checkpoints (`ner.<role>`, `lemma.<role>`)
    #[arg(long)]
    pub bindings: PathBuf,
    /// Document language: pl, cs or ru
    #[arg(long)]
    pub language: String,
    /// Directory of `<doc>.txt` raw files
    #[arg(long)]
    pub input: PathBuf,
    /// Raw-file header layout: bsnlp or simple
    #[arg(long, default_value = "bsnlp")]
    pub layout: String,
    /// Directory to write `<doc>.out` prediction files into
    #[arg(long)]
    pub output: PathBuf,
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let preset = preset::preset(&args.preset)?;
    let language = parse_language(&args.language)?;
    let layout = parse_layout(&args.layout)?;
    let bindings = Config::load(&args.bindings)?;

    let ner_role = preset.ner_role[&language];
    let lemma_role = preset.lemma_role[&language];
    let ner_dir = bindings.require(&format!("ner.{ner_role}"))?;
    let lemma_dir = bindings.require(&format!("lemma.{lemma_role}"))?;
    let tagger = checkpoint::load_ner(Path::new(ner_dir))?;
    let lemmatizer = checkpoint::load_lemma(Path::new(lemma_dir))?;

    let files = fsio::sorted_files(&args.input, "txt")?;
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no .txt documents",
            args.input.display()
        )));
    }
    std::fs::create_dir_all(&args.output).map_err(crate::error::io_at(&args.output))?;

    let mut fallback = FallbackReport::default();
    let mut mentions_total = 0usize;
    for path in &files {
        let doc =
            parse_raw_document(&fsio::read(path)?, language, &layout).map_err(core_at(path))?;
        let entities = tagger.predict_document(&doc).map_err(core_at(path))?;
        let unique: BTreeSet<(String, Category)> = entities
            .into_iter()
            .map(|e| (e.surface, e.span.category))
            .collect();
        let mut records: Vec<submission::SubmissionRecord> = Vec::with_capacity(unique.len());
        for (form, category) in unique {
            let lemma = predict_lemma(
                &lemmatizer,
                language,
                &form,
                lemmatizer.multilingual,
                &mut fallback,
            )?;
            records.push((form, lemma, category));
        }
        mentions_total += records.len();
        let rendered = submission::render_prediction_file(&doc.doc_id, &records);
        let out_path = args.output.join(format!("{}.out", fsio::stem(path)));
        fsio::write_atomic(&out_path, rendered.as_bytes())?;
    }
    println!(
        "predicted {} documents: {mentions_total} unique mentions, {} lemma fallbacks",
        files.len(),
        fallback.fallbacks
    );
    Ok(())
}

fn matched_stems(gold_dir: &Path, pred_dir: &Path, ext: &str) -> Result<Vec<(PathBuf, PathBuf)>> {
    let gold = fsio::sorted_files(gold_dir, ext)?;
    let pred = fsio::sorted_files(pred_dir, ext)?;
    if gold.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no .{ext} files",
            gold_dir.display()
        )));
    }
    let gold_stems: BTreeMap<String, &PathBuf> = gold.iter().map(|p| (fsio::stem(p), p)).collect();
    let pred_stems: BTreeMap<String, &PathBuf> = pred.iter().map(|p| (fsio::stem(p), p)).collect();
    let only_gold: Vec<&str> = gold_stems
        .keys()
        .filter(|s| !pred_stems.contains_key(*s))
        .map(String::as_str)
        .collect();
    let only_pred: Vec<&str> = pred_stems
        .keys()
        .filter(|s| !gold_stems.contains_key(*s))
        .map(String::as_str)
        .collect();
    if !only_gold.is_empty() || !only_pred.is_empty() {
        let mut msg = String::from("document sets differ:");
        if !only_gold.is_empty() {
            write!(msg, " gold without prediction: {};", only_gold.join(", ")).unwrap();
        }
        if !only_pred.is_empty() {
            write!(msg, " prediction without gold: {};", only_pred.join(", ")).unwrap();
        }
        return Err(Error::invalid(msg));
    }
    Ok(gold_stems
        .into_iter()
        .map(|(stem, g)| (g.clone(), pred_stems[&stem].clone()))
        .collect())
}

/// Score a prediction directory against gold files.
#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Gold directory: .conll files for span-f1, .out files otherwise
    #[arg(long)]
    pub gold: PathBuf,
    /// Prediction directory with matching file stems
    #[arg(long)]
    pub pred: PathBuf,
    /// Metric: span-f1, mention-f1 or lemma-em
    #[arg(long)]
    pub metric: String,
    /// Compare mention surfaces case-sensitively (mention-f1 only)
    #[arg(long)]
    pub case_sensitive: bool,
    /// Language annotation recorded in the report
    #[arg(long)]
    pub language: Option<String>,
    /// Report format: plain or kv
    #[arg(long, default_value = "plain")]
    pub format: String,
    /// Also write the report to this file
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn doc_mentions(path: &Path) -> Result<Vec<(String, Category)>> {
    let file = parse_annotation_file(&fsio::read(path)?).map_err(core_at(path))?;
    Ok(file
        .annotations
        .into_iter()
        .map(|m| (m.form, m.category))
        .collect())
}

/// Per document: gold (form, category, lemma) records and the
/// predicted lemma keyed by (form, category).
type DocLemmaPairs = (
    Vec<(String, Category, String)>,
    BTreeMap<(String, Category), String>,
);

fn lemma_em_report(
    pairs_by_doc: &[DocLemmaPairs],
    language: Option<Language>,
) -> Result<EvalReport> {
    let mut per_category: BTreeMap<Category, Counts> = BTreeMap::new();
    let mut flat_pairs: Vec<(String, String)> = Vec::new();
    for (gold_records, pred_map) in pairs_by_doc {
        for (form, category, gold_lemma) in gold_records {
            // a missing prediction counts as a non-match
            let predicted = pred_map
                .get(&(form.clone(), *category))
                .cloned()
                .unwrap_or_default();
            let counts = per_category.entry(*category).or_default();
            counts.gold += 1;
            counts.pred += 1;
            if normalize_lemma(gold_lemma) == normalize_lemma(&predicted) {
                counts.tp += 1;
            }
            flat_pairs.push((gold_lemma.clone(), predicted));
        }
    }
    if flat_pairs.is_empty() {
        return Err(Error::invalid("no gold mentions to score lemmas against"));
    }
    let report = EvalReport::from_counts(Metric::LemmaExactMatch, language, None, per_category);
    // cross-check the report against the flat accuracy definition
    let em = lemma_exact_match(&flat_pairs)?;
    debug_assert!((report.micro.f1() - em).abs() < 1e-12);
    Ok(report)
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let metric = Metric::parse(&args.metric)?;
    let format = ReportFormat::parse(&args.format)?;
    let language = args.language.as_deref().map(parse_language).transpose()?;

    let mut report = match metric {
        Metric::SpanF1 => {
            let mut gold = Vec::new();
            let mut pred = Vec::new();
            for (gold_path, pred_path) in matched_stems(&args.gold, &args.pred, "conll")? {
                gold.extend(read_conll(&fsio::read(&gold_path)?).map_err(core_at(&gold_path))?);
                pred.extend(read_conll(&fsio::read(&pred_path)?).map_err(core_at(&pred_path))?);
            }
            span_f1(&gold, &pred)?
        }
        Metric::MentionSetF1 => {
            let mut gold = Vec::new();
            let mut pred = Vec::new();
            for (gold_path, pred_path) in matched_stems(&args.gold, &args.pred, "out")? {
                gold.push(doc_mentions(&gold_path)?);
                pred.push(doc_mentions(&pred_path)?);
            }
            mention_set_f1(&gold, &pred, args.case_sensitive)?
        }
        Metric::LemmaExactMatch => {
            let mut by_doc = Vec::new();
            for (gold_path, pred_path) in matched_stems(&args.gold, &args.pred, "out")? {
                let gold_file =
                    parse_annotation_file(&fsio::read(&gold_path)?).map_err(core_at(&gold_path))?;
                let pred_file =
                    parse_annotation_file(&fsio::read(&pred_path)?).map_err(core_at(&pred_path))?;
                let gold_records: Vec<(String, Category, String)> = gold_file
                    .annotations
                    .into_iter()
                    .map(|m| (m.form, m.category, m.lemma))
                    .collect();
                let pred_map: BTreeMap<(String, Category), String> = pred_file
                    .annotations
                    .into_iter()
                    .map(|m| ((m.form, m.category), m.lemma))
                    .collect();
                by_doc.push((gold_records, pred_map));
            }
            lemma_em_report(&by_doc, language)?
        }
    };
    report.language = language;

    let rendered = render_report(&report, format);
    print!("{rendered}");
    if let Some(path) = &args.output {
        fsio::write_atomic(path, rendered.as_bytes())?;
    }
    Ok(())
}

/// Package a prediction directory into a submission archive.
#[derive(Debug, Args)]
pub struct PackageArgs {
    /// Directory of `<doc>.out` prediction files
    #[arg(long)]
    pub pred: PathBuf,
    /// Preset recorded in the archive manifest
    #[arg(long)]
    pub preset: String,
    /// Archive path to write
    #[arg(long)]
    pub output: PathBuf,
    /// Raw-document directory; every `<doc>.txt` must have a prediction
    #[arg(long)]
    pub documents: Option<PathBuf>,
}

pub fn package_submission(args: &PackageArgs) -> Result<()> {
    let expected = match &args.documents {
        Some(dir) => Some(
            fsio::sorted_files(dir, "txt")?
                .iter()
                .map(|p| fsio::stem(p))
                .collect::<Vec<_>>(),
        ),
        None => None,
    };
    submission::package(&args.output, &args.pred, &args.preset, expected.as_deref())?;
    println!("packaged {}", args.output.display());
    Ok(())
}

/// Check an archive against the normative submission format.
#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Archive produced by package-submission
    #[arg(long)]
    pub archive: PathBuf,
}

pub fn validate_submission(args: &ValidateArgs) -> Result<()> {
    let report = submission::validate(&args.archive)?;
    println!(
        "archive {}: {} documents, preset {}",
        args.archive.display(),
        report.documents,
        report.preset.as_deref().unwrap_or("?")
    );
    if report.passed() {
        println!("submission format: ok");
        Ok(())
    } else {
        for problem in &report.problems {
            eprintln!("problem: {problem}");
        }
        Err(Error::invalid(format!(
            "{} format problems",
            report.problems.len()
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_paths_split_on_the_last_at_sign() {
        assert_eq!(
            parse_weighted_path("a.conll"),
            (PathBuf::from("a.conll"), 1.0)
        );
        assert_eq!(
            parse_weighted_path("a.conll@0.5"),
            (PathBuf::from("a.conll"), 0.5)
        );
        // a non-numeric suffix is part of the file name
        assert_eq!(
            parse_weighted_path("odd@name"),
            (PathBuf::from("odd@name"), 1.0)
        );
    }

    #[test]
    fn resource_specs_parse_origin_language_and_path() {
        let (origin, lang, path) = parse_resource_spec("sejf:pl=lex/sejf.csv").unwrap();
        assert_eq!(origin, LemmaOrigin::Sejf);
        assert_eq!(lang, Language::Pl);
        assert_eq!(path, PathBuf::from("lex/sejf.csv"));
        assert!(parse_resource_spec("sejf=lex.csv").is_err());
        assert!(parse_resource_spec("bad:pl=x").is_err());
    }

    #[test]
    fn lemma_em_counts_missing_predictions_as_misses() {
        let gold = vec![
            ("Litwie".to_string(), Category::Loc, "Litwa".to_string()),
            ("Sejmu".to_string(), Category::Org, "Sejm".to_string()),
        ];
        let mut pred = BTreeMap::new();
        pred.insert(("Litwie".to_string(), Category::Loc), "litwa".to_string());
        let report = lemma_em_report(&[(gold, pred)], None).unwrap();
        assert_eq!(report.micro.tp, 1);
        assert_eq!(report.micro.gold, 2);
        assert!((report.micro.f1() - 0.5).abs() < 1e-12);
    }
}
