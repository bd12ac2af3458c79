//! Checkpoint directories: `model.txt` (tensor container) plus
//! `manifest.txt` (flat key-value config echo and final metrics).
//!
//! The manifest is written last and acts as the commit marker; a
//! directory without one is treated as absent or partial.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use slavner_core::crf::CrfParams;
use slavner_core::lemma::{CharSeq2Seq, LemmaTrainConfig, LemmaTrainReport};
use slavner_core::tagger::{DeskEncoder, NerModel, TrainConfig, TrainReport};

use crate::config::Config;
use crate::error::{io_at, Error, Result};
use crate::fsio;
use crate::tensor::TensorFile;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const MODEL_FILE: &str = "model.txt";
const FORMAT_VERSION: u64 = 1;

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_at(dir))
}

fn write_pair(dir: &Path, model_text: &str, manifest_text: &str) -> Result<()> {
    ensure_dir(dir)?;
    fsio::write_atomic(&dir.join(MODEL_FILE), model_text.as_bytes())?;
    fsio::write_atomic(&dir.join(MANIFEST_FILE), manifest_text.as_bytes())?;
    Ok(())
}

fn load_parts(dir: &Path) -> Result<(Config, TensorFile)> {
    let manifest_path = dir.join(MANIFEST_FILE);
    if !manifest_path.is_file() {
        return Err(Error::invalid(format!(
            "{}: no checkpoint manifest found",
            dir.display()
        )));
    }
    let manifest = Config::load(&manifest_path)?;
    let version = manifest.get_u64("format", 0)?;
    if version != FORMAT_VERSION {
        return Err(Error::invalid(format!(
            "{}: unsupported checkpoint format {version}",
            dir.display()
        )));
    }
    let tensors = TensorFile::parse(&fsio::read_string(&dir.join(MODEL_FILE))?)?;
    Ok((manifest, tensors))
}

fn push_kv(out: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(out, "{key} = {value}").unwrap();
}

pub fn save_ner(dir: &Path, model: &NerModel, report: &TrainReport) -> Result<()> {
    let mut tensors = TensorFile::new();
    tensors.insert_strings("vocab", &model.encoder.vocab)?;
    tensors.insert_mat("embedding", &model.encoder.embedding)?;
    tensors.insert_mat("wf", &model.encoder.wf)?;
    tensors.insert_mat("uf", &model.encoder.uf)?;
    tensors.insert_vec("bf", &model.encoder.bf)?;
    tensors.insert_mat("wb", &model.encoder.wb)?;
    tensors.insert_mat("ub", &model.encoder.ub)?;
    tensors.insert_vec("bb", &model.encoder.bb)?;
    tensors.insert_mat("projection", &model.projection)?;
    tensors.insert_vec("projection_bias", &model.projection_bias)?;
    if let Some(crf) = &model.crf {
        tensors.insert_mat("crf_transition", &crf.transition)?;
        tensors.insert_vec("crf_start", &crf.start)?;
        tensors.insert_vec("crf_end", &crf.end)?;
    }

    let c = &model.config;
    let mut manifest = String::new();
    push_kv(&mut manifest, "kind", "ner");
    push_kv(&mut manifest, "format", FORMAT_VERSION);
    push_kv(&mut manifest, "seed", c.seed);
    push_kv(&mut manifest, "epochs", c.epochs);
    push_kv(&mut manifest, "batch_size", c.batch_size);
    push_kv(&mut manifest, "learning_rate", c.learning_rate);
    push_kv(&mut manifest, "max_pieces", c.max_pieces);
    push_kv(&mut manifest, "encoder", &c.encoder);
    push_kv(&mut manifest, "crf_enabled", c.crf_enabled);
    push_kv(&mut manifest, "constraint_mask", c.constraint_mask);
    push_kv(&mut manifest, "selected_epoch", report.selected_epoch);
    push_kv(
        &mut manifest,
        "truncated_sentences",
        report.truncated_sentences,
    );
    if let Some(loss) = report.epoch_losses.last() {
        push_kv(&mut manifest, "final_loss", loss);
    }
    if let Some(f1) = report.validation_f1 {
        push_kv(&mut manifest, "validation_f1", f1);
    }

    write_pair(dir, &tensors.render(), &manifest)
}

pub fn load_ner(dir: &Path) -> Result<NerModel> {
    let (manifest, mut tensors) = load_parts(dir)?;
    if manifest.get("kind") != Some("ner") {
        return Err(Error::invalid(format!(
            "{}: not a tagger checkpoint",
            dir.display()
        )));
    }
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        seed: manifest.get_u64("seed", defaults.seed)?,
        epochs: manifest.get_usize("epochs", defaults.epochs)?,
        batch_size: manifest.get_usize("batch_size", defaults.batch_size)?,
        learning_rate: manifest.get_f64("learning_rate", defaults.learning_rate)?,
        max_pieces: manifest.get_usize("max_pieces", defaults.max_pieces)?,
        encoder: manifest.get_string("encoder", &defaults.encoder),
        crf_enabled: manifest.get_bool("crf_enabled", defaults.crf_enabled)?,
        constraint_mask: manifest.get_bool("constraint_mask", defaults.constraint_mask)?,
    };
    config.validate()?;

    let vocab = tensors.take_strings("vocab")?;
    let encoder = DeskEncoder {
        vocab,
        embedding: tensors.take_mat("embedding")?,
        wf: tensors.take_mat("wf")?,
        uf: tensors.take_mat("uf")?,
        bf: tensors.take_vec("bf")?,
        wb: tensors.take_mat("wb")?,
        ub: tensors.take_mat("ub")?,
        bb: tensors.take_vec("bb")?,
    };
    if encoder.embedding.rows() != encoder.vocab.len() + 1
        || encoder.wf.cols() != encoder.embedding.cols()
        || encoder.uf.rows() != encoder.wf.rows()
        || encoder.uf.cols() != encoder.wf.rows()
        || encoder.bf.len() != encoder.wf.rows()
        || encoder.wb.rows() != encoder.wf.rows()
    {
        return Err(Error::invalid(format!(
            "{}: encoder tensor shapes are inconsistent",
            dir.display()
        )));
    }
    let projection = tensors.take_mat("projection")?;
    let projection_bias = tensors.take_vec("projection_bias")?;
    if projection.cols() != encoder.wf.rows() + encoder.wb.rows()
        || projection_bias.len() != projection.rows()
    {
        return Err(Error::invalid(format!(
            "{}: projection tensor shapes are inconsistent",
            dir.display()
        )));
    }
    let crf = if config.crf_enabled {
        let transition = tensors.take_mat("crf_transition")?;
        let start = tensors.take_vec("crf_start")?;
        let end = tensors.take_vec("crf_end")?;
        let labels = projection.rows();
        if transition.rows() != labels
            || transition.cols() != labels
            || start.len() != labels
            || end.len() != labels
        {
            return Err(Error::invalid(format!(
                "{}: transition tensor shapes are inconsistent",
                dir.display()
            )));
        }
        let mut params = CrfParams::zeros(labels);
        params.transition = transition;
        params.start = start;
        params.end = end;
        Some(params)
    } else {
        None
    };

    Ok(NerModel {
        config,
        encoder,
        projection,
        projection_bias,
        crf,
    })
}

pub fn save_lemma(
    dir: &Path,
    model: &CharSeq2Seq,
    config: &LemmaTrainConfig,
    report: &LemmaTrainReport,
    extra: &[(&str, String)],
) -> Result<()> {
    let mut tensors = TensorFile::new();
    tensors.insert_chars("charset", &model.charset);
    tensors.insert_mat("embedding", &model.embedding)?;
    tensors.insert_mat("ewf", &model.ewf)?;
    tensors.insert_mat("euf", &model.euf)?;
    tensors.insert_vec("ebf", &model.ebf)?;
    tensors.insert_mat("ewb", &model.ewb)?;
    tensors.insert_mat("eub", &model.eub)?;
    tensors.insert_vec("ebb", &model.ebb)?;
    tensors.insert_mat("dw", &model.dw)?;
    tensors.insert_mat("du", &model.du)?;
    tensors.insert_vec("db", &model.db)?;
    tensors.insert_mat("wc", &model.wc)?;
    tensors.insert_vec("bc", &model.bc)?;
    tensors.insert_mat("wo", &model.wo)?;
    tensors.insert_vec("bo", &model.bo)?;

    let mut manifest = String::new();
    push_kv(&mut manifest, "kind", "lemma");
    push_kv(&mut manifest, "format", FORMAT_VERSION);
    push_kv(&mut manifest, "seed", config.seed);
    push_kv(&mut manifest, "epochs", config.epochs);
    push_kv(&mut manifest, "batch_size", config.batch_size);
    push_kv(&mut manifest, "learning_rate", config.learning_rate);
    push_kv(&mut manifest, "embed_dim", config.embed_dim);
    push_kv(&mut manifest, "hidden", config.hidden);
    push_kv(&mut manifest, "multilingual", config.multilingual);
    push_kv(&mut manifest, "selected_epoch", report.selected_epoch);
    if let Some(loss) = report.epoch_losses.last() {
        push_kv(&mut manifest, "final_loss", loss);
    }
    if let Some(em) = report.validation_em {
        push_kv(&mut manifest, "validation_em", em);
    }
    for (key, value) in extra {
        push_kv(&mut manifest, key, value);
    }

    write_pair(dir, &tensors.render(), &manifest)
}

pub fn load_lemma(dir: &Path) -> Result<CharSeq2Seq> {
    let (manifest, mut tensors) = load_parts(dir)?;
    if manifest.get("kind") != Some("lemma") {
        return Err(Error::invalid(format!(
            "{}: not a lemmatizer checkpoint",
            dir.display()
        )));
    }
    let charset = tensors.take_chars("charset")?;
    let embedding = tensors.take_mat("embedding")?;
    let dw = tensors.take_mat("dw")?;
    let model = CharSeq2Seq {
        multilingual: manifest.get_bool("multilingual", true)?,
        charset,
        embed_dim: embedding.cols(),
        hidden: dw.rows(),
        embedding,
        ewf: tensors.take_mat("ewf")?,
        euf: tensors.take_mat("euf")?,
        ebf: tensors.take_vec("ebf")?,
        ewb: tensors.take_mat("ewb")?,
        eub: tensors.take_mat("eub")?,
        ebb: tensors.take_vec("ebb")?,
        dw,
        du: tensors.take_mat("du")?,
        db: tensors.take_vec("db")?,
        wc: tensors.take_mat("wc")?,
        bc: tensors.take_vec("bc")?,
        wo: tensors.take_mat("wo")?,
        bo: tensors.take_vec("bo")?,
    };
    let h = model.hidden;
    let v = model.charset.len() + 3;
    if model.embedding.rows() != v
        || model.ewf.rows() != h / 2
        || model.ewb.rows() != h / 2
        || model.du.rows() != h
        || model.du.cols() != h
        || model.wc.cols() != 2 * h
        || model.wo.rows() != v
        || model.bo.len() != v
    {
        return Err(Error::invalid(format!(
            "{}: lemmatizer tensor shapes are inconsistent",
            dir.display()
        )));
    }
    Ok(model)
}
