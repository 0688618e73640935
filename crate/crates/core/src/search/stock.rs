use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;

use crate::chem::{canonicalize, ChemError, Molecule};

#[derive(Debug, thiserror::Error)]
pub enum StockError {
    #[error("cannot read stock file {path}: {message}")]
    Io { path: String, message: String },
    #[error("stock line {line}: {source}")]
    Smiles { line: usize, source: ChemError },
}

/// Purchasable molecules, stored as canonical SMILES.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StockSet {
    smiles: HashSet<String>,
}

impl StockSet {
    pub fn new() -> StockSet {
        StockSet::default()
    }

    pub fn from_smiles<'a>(items: impl IntoIterator<Item = &'a str>) -> Result<StockSet, ChemError> {
        let mut s = StockSet::new();
        for item in items {
            s.smiles.insert(canonicalize(item)?);
        }
        Ok(s)
    }

    pub fn insert(&mut self, m: &Molecule) {
        self.smiles.insert(m.canonical_smiles().to_string());
    }

    pub fn contains(&self, m: &Molecule) -> bool {
        self.smiles.contains(m.canonical_smiles())
    }

    /// Membership by an already canonical string.
    pub fn contains_canonical(&self, smiles: &str) -> bool {
        self.smiles.contains(smiles)
    }

    pub fn len(&self) -> usize {
        self.smiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smiles.is_empty()
    }

    /// One SMILES per line; blank lines and `#` comments are skipped and
    /// anything after the first whitespace is ignored. Unparseable lines are
    /// skipped with a warning and returned by line number.
    pub fn read(reader: impl BufRead) -> Result<(StockSet, Vec<usize>), StockError> {
        let mut s = StockSet::new();
        let mut skipped = Vec::new();
        for (k, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| StockError::Io {
                path: "<reader>".into(),
                message: e.to_string(),
            })?;
            let Some(tok) = line.split_whitespace().next() else { continue };
            if tok.starts_with('#') {
                continue;
            }
            match canonicalize(tok) {
                Ok(c) => {
                    s.smiles.insert(c);
                }
                Err(source) => {
                    log::warn!("{}", StockError::Smiles { line: k + 1, source });
                    skipped.push(k + 1);
                }
            }
        }
        if s.is_empty() {
            log::warn!("stock is empty");
        }
        Ok((s, skipped))
    }

    pub fn load(path: &Path) -> Result<(StockSet, Vec<usize>), StockError> {
        let f = std::fs::File::open(path).map_err(|e| StockError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        StockSet::read(std::io::BufReader::new(f))
    }

    /// Sorted contents.
    pub fn sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.smiles.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}
