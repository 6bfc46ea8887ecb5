use std::fs;
use std::path::{Path, PathBuf};

use fdao_core::Dataset;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::settings::parse_number;

/// Raw bytes of an input file together with their SHA-256.
pub struct Loaded {
    pub path: PathBuf,
    pub text: String,
    pub sha256: String,
}

pub fn load(path: &Path) -> Result<Loaded> {
    let bytes = fs::read(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    let sha256 = hex_digest(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| CliError::input(format!("{}: not UTF-8 text", path.display())))?;
    Ok(Loaded { path: path.to_path_buf(), text, sha256 })
}

pub fn hex_digest(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(false).from_reader(text.as_bytes())
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| CliError::input(format!("{}: missing `{name}` column", path.display())))
}

fn field_f64(record: &csv::StringRecord, idx: usize, name: &str, path: &Path) -> Result<f64> {
    let line = record.position().map_or(0, |p| p.line());
    let raw = record.get(idx).unwrap_or("");
    parse_number(raw).map_err(|e| CliError::input(format!("{} line {line}: `{name}`: {e}", path.display())))
}

/// `x,y` data. Extra columns are ignored.
pub fn read_dataset(loaded: &Loaded) -> Result<Dataset> {
    let path = loaded.path.as_path();
    let mut rdr = reader(&loaded.text);
    let headers = rdr.headers().map_err(|source| CliError::Csv { path: path.into(), source })?.clone();
    let (xi, yi) = (column(&headers, "x", path)?, column(&headers, "y", path)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in rdr.records() {
        let record = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        xs.push(field_f64(&record, xi, "x", path)?);
        ys.push(field_f64(&record, yi, "y", path)?);
    }
    if xs.is_empty() {
        return Err(CliError::input(format!("{}: no data rows", path.display())));
    }
    Ok(Dataset::new(xs, ys)?)
}

/// `well_id,absorbance` readings.
pub fn read_absorbance(loaded: &Loaded) -> Result<Vec<f64>> {
    let path = loaded.path.as_path();
    let mut rdr = reader(&loaded.text);
    let headers = rdr.headers().map_err(|source| CliError::Csv { path: path.into(), source })?.clone();
    let ai = column(&headers, "absorbance", path)?;
    let mut values = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        values.push(field_f64(&record, ai, "absorbance", path)?);
    }
    if values.is_empty() {
        return Err(CliError::input(format!("{}: no absorbance readings", path.display())));
    }
    Ok(values)
}

/// `concentration,file` rows; relative files resolve against the manifest's directory.
pub fn read_manifest(loaded: &Loaded) -> Result<Vec<(f64, PathBuf)>> {
    let path = loaded.path.as_path();
    let base = path.parent().unwrap_or(Path::new(""));
    let mut rdr = reader(&loaded.text);
    let headers = rdr.headers().map_err(|source| CliError::Csv { path: path.into(), source })?.clone();
    let (ci, fi) = (column(&headers, "concentration", path)?, column(&headers, "file", path)?);
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        let conc = field_f64(&record, ci, "concentration", path)?;
        let file = record.get(fi).unwrap_or("");
        if file.is_empty() {
            let line = record.position().map_or(0, |p| p.line());
            return Err(CliError::input(format!("{} line {line}: empty `file`", path.display())));
        }
        rows.push((conc, base.join(file)));
    }
    Ok(rows)
}

/// `conc=path` from the command line.
pub fn parse_treated(arg: &str) -> Result<(f64, PathBuf)> {
    let (conc, file) = arg
        .split_once('=')
        .ok_or_else(|| CliError::input(format!("--treated `{arg}`: expected <concentration>=<file>")))?;
    let conc = parse_number(conc.trim()).map_err(|e| CliError::input(format!("--treated `{arg}`: {e}")))?;
    Ok((conc, PathBuf::from(file.trim())))
}
