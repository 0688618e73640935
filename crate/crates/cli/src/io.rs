use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use sha2::{Digest, Sha256};

use retroplan::dataset::{RawRecord, ReactionRecord};

use crate::error::{CliError, Result};

pub fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::input(path, e))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::input(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let err = |e: &dyn std::fmt::Display| CliError::Output {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| err(&e))?;
    tmp.write_all(bytes).map_err(|e| err(&e))?;
    tmp.persist(path).map_err(|e| err(&e))?;
    Ok(())
}

pub fn jsonl<T: serde::Serialize>(items: impl IntoIterator<Item = T>) -> Vec<u8> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, &item).expect("serializes");
        out.push(b'\n');
    }
    out
}

/// Reads reaction records, logging and skipping lines that fail to parse.
/// Returns the records and the number skipped.
pub fn read_reactions(path: &Path) -> Result<(Vec<ReactionRecord>, usize)> {
    let mut out = Vec::new();
    let mut skipped = 0;
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::input(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawRecord>(&line)
            .map_err(|e| e.to_string())
            .and_then(|raw| ReactionRecord::from_raw(&raw));
        match parsed {
            Ok(r) => out.push(r),
            Err(e) => {
                log::warn!("{}:{}: skipped: {e}", path.display(), k + 1);
                skipped += 1;
            }
        }
    }
    Ok((out, skipped))
}

/// Reads a JSON Lines file strictly: every malformed line is collected
/// into one schema error.
pub fn read_jsonl_strict<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>> {
    let mut out = Vec::new();
    let mut problems = Vec::new();
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::input(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<T>(&line) {
            Ok(v) => out.push((k + 1, v)),
            Err(e) => problems.push(format!("  line {}: {e}", k + 1)),
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Schema {
            path: path.display().to_string(),
            diagnostics: problems.join("\n"),
        });
    }
    Ok(out)
}

/// Non-empty trimmed lines with their 1-based line numbers.
pub fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (k, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|e| CliError::input(path, e))?;
        let t = line.trim();
        if !t.is_empty() {
            out.push((k + 1, t.to_string()));
        }
    }
    Ok(out)
}
