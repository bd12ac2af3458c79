//! Plain-text container for model parameters: named f64 matrices and
//! vectors, string lists and character lists.
//!
//! Values are written with Rust's shortest-round-trip float formatting,
//! so save followed by load reproduces every finite f64 bit for bit.
//! Non-finite values are rejected at write time.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use slavner_core::math::Mat;

use crate::error::{Error, Result};

const MAGIC: &str = "slavner-tensors 1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TensorFile {
    mats: BTreeMap<String, Mat>,
    vecs: BTreeMap<String, Vec<f64>>,
    strings: BTreeMap<String, Vec<String>>,
    chars: BTreeMap<String, Vec<char>>,
}

fn check_finite(name: &str, data: &[f64]) -> Result<()> {
    if data.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "tensor `{name}` contains a non-finite value"
        )))
    }
}

impl TensorFile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert_mat(&mut self, name: &str, mat: &Mat) -> Result<()> {
        check_finite(name, mat.data())?;
        self.mats.insert(name.to_string(), mat.clone());
        Ok(())
    }

    pub fn insert_vec(&mut self, name: &str, vec: &[f64]) -> Result<()> {
        check_finite(name, vec)?;
        self.vecs.insert(name.to_string(), vec.to_vec());
        Ok(())
    }

    /// Strings must be newline-free; they are stored one per line.
    pub fn insert_strings(&mut self, name: &str, strings: &[String]) -> Result<()> {
        if strings.iter().any(|s| s.contains('\n') || s.contains('\r')) {
            return Err(Error::invalid(format!(
                "string list `{name}` contains a newline"
            )));
        }
        self.strings.insert(name.to_string(), strings.to_vec());
        Ok(())
    }

    pub fn insert_chars(&mut self, name: &str, chars: &[char]) {
        self.chars.insert(name.to_string(), chars.to_vec());
    }

    pub fn take_mat(&mut self, name: &str) -> Result<Mat> {
        self.mats
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("missing matrix `{name}`")))
    }

    pub fn take_vec(&mut self, name: &str) -> Result<Vec<f64>> {
        self.vecs
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("missing vector `{name}`")))
    }

    pub fn take_strings(&mut self, name: &str) -> Result<Vec<String>> {
        self.strings
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("missing string list `{name}`")))
    }

    pub fn take_chars(&mut self, name: &str) -> Result<Vec<char>> {
        self.chars
            .remove(name)
            .ok_or_else(|| Error::invalid(format!("missing char list `{name}`")))
    }

    pub fn has_mat(&self, name: &str) -> bool {
        self.mats.contains_key(name)
    }

    /// Deterministic rendering: sections sorted by kind then name.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(MAGIC);
        out.push('\n');
        for (name, mat) in &self.mats {
            writeln!(out, "mat {name} {} {}", mat.rows(), mat.cols()).unwrap();
            for r in 0..mat.rows() {
                let row: Vec<String> = mat.row(r).iter().map(|v| format!("{v}")).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        for (name, vec) in &self.vecs {
            writeln!(out, "vec {name} {}", vec.len()).unwrap();
            let row: Vec<String> = vec.iter().map(|v| format!("{v}")).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        for (name, strings) in &self.strings {
            writeln!(out, "strings {name} {}", strings.len()).unwrap();
            for s in strings {
                out.push_str(s);
                out.push('\n');
            }
        }
        for (name, chars) in &self.chars {
            writeln!(out, "chars {name} {}", chars.len()).unwrap();
            let row: Vec<String> = chars.iter().map(|c| format!("{:x}", *c as u32)).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(MAGIC) {
            return Err(Error::invalid(format!("expected `{MAGIC}` header")));
        }
        let mut file = Self::new();
        fn next_line<'a>(lines: &mut std::str::Lines<'a>) -> Result<&'a str> {
            lines
                .next()
                .ok_or_else(|| Error::invalid("truncated tensor file"))
        }
        loop {
            let header = match lines.next() {
                None => break,
                Some(h) => h,
            };
            let fields: Vec<&str> = header.split_whitespace().collect();
            let bad = || Error::invalid(format!("bad tensor section header `{header}`"));
            match fields.as_slice() {
                ["mat", name, rows, cols] => {
                    let rows: usize = rows.parse().map_err(|_| bad())?;
                    let cols: usize = cols.parse().map_err(|_| bad())?;
                    let mut data = Vec::with_capacity(rows * cols);
                    for _ in 0..rows {
                        parse_f64_row(next_line(&mut lines)?, cols, &mut data)?;
                    }
                    file.mats
                        .insert(name.to_string(), Mat::from_vec(rows, cols, data));
                }
                ["vec", name, len] => {
                    let len: usize = len.parse().map_err(|_| bad())?;
                    let mut data = Vec::with_capacity(len);
                    parse_f64_row(next_line(&mut lines)?, len, &mut data)?;
                    file.vecs.insert(name.to_string(), data);
                }
                ["strings", name, count] => {
                    let count: usize = count.parse().map_err(|_| bad())?;
                    let mut items = Vec::with_capacity(count);
                    for _ in 0..count {
                        items.push(next_line(&mut lines)?.to_string());
                    }
                    file.strings.insert(name.to_string(), items);
                }
                ["chars", name, count] => {
                    let count: usize = count.parse().map_err(|_| bad())?;
                    let line = if count == 0 {
                        ""
                    } else {
                        next_line(&mut lines)?
                    };
                    let mut items = Vec::with_capacity(count);
                    for tok in line.split_whitespace() {
                        let code = u32::from_str_radix(tok, 16)
                            .map_err(|_| Error::invalid(format!("bad code point `{tok}`")))?;
                        items.push(char::from_u32(code).ok_or_else(|| {
                            Error::invalid(format!("invalid code point {code:#x}"))
                        })?);
                    }
                    if items.len() != count {
                        return Err(Error::invalid(format!(
                            "char list `{name}`: expected {count} items, got {}",
                            items.len()
                        )));
                    }
                    file.chars.insert(name.to_string(), items);
                }
                _ => return Err(bad()),
            }
        }
        Ok(file)
    }
}

fn parse_f64_row(line: &str, expected: usize, out: &mut Vec<f64>) -> Result<()> {
    let before = out.len();
    for tok in line.split_whitespace() {
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::invalid(format!("bad float `{tok}` in tensor file")))?;
        out.push(v);
    }
    if out.len() - before != expected {
        return Err(Error::invalid(format!(
            "expected {expected} values per row, got {}",
            out.len() - before
        )));
    }
    Ok(())
}
