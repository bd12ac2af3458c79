//! Submission packaging: per-document prediction files, a deterministic
//! tar archive, and the validator that defines this repository's
//! normative submission format.
//!
//! Archive layout: one `<doc>.out` entry per document plus one
//! `manifest.txt` naming the preset. Entries are sorted by name and all
//! header metadata is pinned (mtime 0, uid/gid 0, mode 0644), so
//! repeated packaging of identical predictions is byte-identical.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use slavner_core::corpus::{parse_annotation_file, Category};

use crate::config::Config;
use crate::error::{core_at, io_at, Error, Result};
use crate::fsio;
use crate::preset;

pub const MANIFEST_ENTRY: &str = "manifest.txt";
pub const PLACEHOLDER_CL_ID: &str = "0";

/// One output record: surface form, lemma, category.
pub type SubmissionRecord = (String, String, Category);

/// Renders a per-document prediction file: first line the document id,
/// then one TAB-separated record per unique mention with the
/// cross-lingual id placeholder. Records are sorted and deduplicated.
pub fn render_prediction_file(doc_id: &str, records: &[SubmissionRecord]) -> String {
    let unique: BTreeSet<&SubmissionRecord> = records.iter().collect();
    let mut out = String::with_capacity(64 * (unique.len() + 1));
    out.push_str(doc_id);
    out.push('\n');
    for (form, lemma, category) in unique {
        out.push_str(form);
        out.push('\t');
        out.push_str(lemma);
        out.push('\t');
        out.push_str(category.as_str());
        out.push('\t');
        out.push_str(PLACEHOLDER_CL_ID);
        out.push('\n');
    }
    out
}

fn pinned_header(size: usize) -> tar::Header {
    let mut header = tar::Header::new_gnu();
    header.set_entry_type(tar::EntryType::Regular);
    header.set_size(size as u64);
    header.set_mode(0o644);
    header.set_uid(0);
    header.set_gid(0);
    header.set_mtime(0);
    header
}

/// Packages a prediction directory into a deterministic tar archive.
///
/// When `expected_docs` is given, every listed stem must have a
/// prediction file; missing ones abort the run.
pub fn package(
    archive_path: &Path,
    pred_dir: &Path,
    preset_name: &str,
    expected_docs: Option<&[String]>,
) -> Result<()> {
    preset::preset(preset_name)?;
    let files = fsio::sorted_files(pred_dir, "out")?;
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "{}: no prediction files",
            pred_dir.display()
        )));
    }
    if let Some(expected) = expected_docs {
        let have: BTreeSet<String> = files.iter().map(|p| fsio::stem(p)).collect();
        let missing: Vec<&str> = expected
            .iter()
            .filter(|doc| !have.contains(*doc))
            .map(String::as_str)
            .collect();
        if !missing.is_empty() {
            return Err(Error::invalid(format!(
                "missing prediction files for: {}",
                missing.join(", ")
            )));
        }
    }

    let mut entries: Vec<(String, Vec<u8>)> = Vec::with_capacity(files.len() + 1);
    for path in &files {
        let bytes = fsio::read(path)?;
        parse_annotation_file(&bytes).map_err(core_at(path))?;
        let name = path
            .file_name()
            .expect("listing returned files")
            .to_string_lossy()
            .into_owned();
        entries.push((name, bytes));
    }
    let manifest = format!("preset = {preset_name}\ndocuments = {}\n", files.len());
    entries.push((MANIFEST_ENTRY.to_string(), manifest.into_bytes()));
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    let mut builder = tar::Builder::new(Vec::new());
    for (name, bytes) in &entries {
        let mut header = pinned_header(bytes.len());
        builder
            .append_data(&mut header, name, bytes.as_slice())
            .map_err(io_at(archive_path))?;
    }
    let data = builder.into_inner().map_err(io_at(archive_path))?;
    fsio::write_atomic(archive_path, &data)
}

/// Validator outcome; `problems` empty means the archive conforms.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub preset: Option<String>,
    pub documents: usize,
    pub problems: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Checks archive structure, entry metadata determinism and record
/// shape; this is the normative definition of the submission format.
pub fn validate(archive_path: &Path) -> Result<ValidationReport> {
    let bytes = fsio::read(archive_path)?;
    let mut archive = tar::Archive::new(bytes.as_slice());
    let mut problems = Vec::new();
    let mut names = Vec::new();
    let mut manifest_text: Option<String> = None;
    let mut documents = 0usize;
    let mut doc_ids: BTreeSet<String> = BTreeSet::new();

    let entries = archive.entries().map_err(io_at(archive_path))?;
    for entry in entries {
        let mut entry = entry.map_err(io_at(archive_path))?;
        let name = entry
            .path()
            .map_err(io_at(archive_path))?
            .to_string_lossy()
            .into_owned();
        let header = entry.header();
        if header.entry_type() != tar::EntryType::Regular {
            problems.push(format!("{name}: not a regular file"));
        }
        if header.mtime().unwrap_or(1) != 0 {
            problems.push(format!("{name}: mtime is not pinned to 0"));
        }
        if header.uid().unwrap_or(1) != 0 || header.gid().unwrap_or(1) != 0 {
            problems.push(format!("{name}: uid/gid is not pinned to 0"));
        }
        if header.mode().unwrap_or(0) != 0o644 {
            problems.push(format!("{name}: mode is not 0644"));
        }
        let mut content = String::new();
        if entry.read_to_string(&mut content).is_err() {
            problems.push(format!("{name}: not valid UTF-8"));
            names.push(name);
            continue;
        }

        if name == MANIFEST_ENTRY {
            if manifest_text.is_some() {
                problems.push("more than one manifest.txt".to_string());
            }
            manifest_text = Some(content);
        } else if name.ends_with(".out") {
            documents += 1;
            match parse_annotation_file(content.as_bytes()) {
                Err(e) => problems.push(format!("{name}: {e}")),
                Ok(file) => {
                    if !doc_ids.insert(file.doc_id.clone()) {
                        problems.push(format!("{name}: duplicate document id {}", file.doc_id));
                    }
                    for (i, m) in file.annotations.iter().enumerate() {
                        if m.form.is_empty() || m.lemma.is_empty() {
                            problems.push(format!("{name}: record {}: empty form or lemma", i + 1));
                        }
                        if m.cl_id.as_deref() != Some(PLACEHOLDER_CL_ID) {
                            problems.push(format!(
                                "{name}: record {}: cross-lingual id must be the placeholder {PLACEHOLDER_CL_ID}",
                                i + 1
                            ));
                        }
                    }
                }
            }
        } else {
            problems.push(format!("{name}: unexpected entry"));
        }
        names.push(name);
    }

    let mut sorted = names.clone();
    sorted.sort();
    if names != sorted {
        problems.push("entries are not sorted by name".to_string());
    }
    if names.len() != sorted.iter().collect::<BTreeSet<_>>().len() {
        problems.push("duplicate entry names".to_string());
    }

    let preset_name = match &manifest_text {
        None => {
            problems.push("missing manifest.txt".to_string());
            None
        }
        Some(text) => match Config::parse(text) {
            Err(e) => {
                problems.push(format!("manifest.txt: {e}"));
                None
            }
            Ok(cfg) => {
                let name = cfg.get("preset").map(str::to_string);
                match &name {
                    None => problems.push("manifest.txt: missing preset key".to_string()),
                    Some(n) => {
                        if preset::preset(n).is_err() {
                            problems.push(format!("manifest.txt: unknown preset {n}"));
                        }
                    }
                }
                if let Some(count) = cfg.get("documents") {
                    if count.parse::<usize>() != Ok(documents) {
                        problems.push(format!(
                            "manifest.txt: documents = {count} but archive has {documents}"
                        ));
                    }
                }
                name
            }
        },
    };
    if documents == 0 {
        problems.push("archive contains no prediction files".to_string());
    }

    Ok(ValidationReport {
        preset: preset_name,
        documents,
        problems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn record(form: &str, lemma: &str, cat: Category) -> SubmissionRecord {
        (form.to_string(), lemma.to_string(), cat)
    }

    #[test]
    fn prediction_file_dedups_and_sorts_records() {
        let records = vec![
            record("Warszawy", "Warszawa", Category::Loc),
            record("Adama", "Adam", Category::Per),
            record("Warszawy", "Warszawa", Category::Loc),
        ];
        let text = render_prediction_file("doc-7", &records);
        assert_eq!(
            text,
            "doc-7\nAdama\tAdam\tPER\t0\nWarszawy\tWarszawa\tLOC\t0\n"
        );
    }

    #[test]
    fn entity_free_document_renders_header_only() {
        assert_eq!(render_prediction_file("doc-1", &[]), "doc-1\n");
    }

    fn write_pred(dir: &Path, name: &str, doc_id: &str, records: &[SubmissionRecord]) {
        fs::write(dir.join(name), render_prediction_file(doc_id, records)).unwrap();
    }

    #[test]
    fn packaged_archive_validates_and_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let pred = dir.path().join("pred");
        fs::create_dir(&pred).unwrap();
        write_pred(
            &pred,
            "b.out",
            "doc-b",
            &[record("Sejmu", "Sejm", Category::Org)],
        );
        write_pred(
            &pred,
            "a.out",
            "doc-a",
            &[record("Pragi", "Praga", Category::Loc)],
        );

        let tar1 = dir.path().join("one.tar");
        let tar2 = dir.path().join("two.tar");
        package(&tar1, &pred, "system2", None).unwrap();
        package(&tar2, &pred, "system2", None).unwrap();
        assert_eq!(fs::read(&tar1).unwrap(), fs::read(&tar2).unwrap());

        let report = validate(&tar1).unwrap();
        assert!(report.passed(), "problems: {:?}", report.problems);
        assert_eq!(report.preset.as_deref(), Some("system2"));
        assert_eq!(report.documents, 2);
    }

    #[test]
    fn missing_expected_documents_abort_packaging() {
        let dir = tempfile::tempdir().unwrap();
        let pred = dir.path().join("pred");
        fs::create_dir(&pred).unwrap();
        write_pred(&pred, "a.out", "doc-a", &[]);
        let err = package(
            &dir.path().join("x.tar"),
            &pred,
            "system1",
            Some(&["doc-a".to_string(), "doc-b".to_string()]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("doc-b"));
    }

    #[test]
    fn unknown_preset_is_rejected_at_packaging() {
        let dir = tempfile::tempdir().unwrap();
        assert!(package(&dir.path().join("x.tar"), dir.path(), "system9", None).is_err());
    }

    #[test]
    fn validator_flags_bad_cl_id_and_unpinned_metadata() {
        let dir = tempfile::tempdir().unwrap();
        // a record with cl_id 7 and an entry with a live mtime
        let content = b"doc-1\nForma\tForm\tPER\t7\n";
        let mut builder = tar::Builder::new(Vec::new());
        let mut header = pinned_header(content.len());
        header.set_mtime(1_700_000_000);
        builder
            .append_data(&mut header, "doc1.out", content.as_slice())
            .unwrap();
        let manifest = b"preset = system1\n";
        let mut header = pinned_header(manifest.len());
        builder
            .append_data(&mut header, "manifest.txt", manifest.as_slice())
            .unwrap();
        let path = dir.path().join("bad.tar");
        fs::write(&path, builder.into_inner().unwrap()).unwrap();

        let report = validate(&path).unwrap();
        assert!(!report.passed());
        assert!(report
            .problems
            .iter()
            .any(|p| p.contains("cross-lingual id")));
        assert!(report.problems.iter().any(|p| p.contains("mtime")));
    }

    #[test]
    fn validator_requires_a_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let content = b"doc-1\n";
        let mut builder = tar::Builder::new(Vec::new());
        let mut header = pinned_header(content.len());
        builder
            .append_data(&mut header, "doc1.out", content.as_slice())
            .unwrap();
        let path = dir.path().join("no-manifest.tar");
        fs::write(&path, builder.into_inner().unwrap()).unwrap();
        let report = validate(&path).unwrap();
        assert!(report
            .problems
            .iter()
            .any(|p| p.contains("missing manifest")));
    }
}
