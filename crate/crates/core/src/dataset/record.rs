use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::chem::{ChemError, Molecule};
use crate::template::{extract_template, RetroTemplate, TemplateError};

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

/// One JSON Lines row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub patent_id: Option<String>,
    pub rxn_smiles: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionRecord {
    pub id: String,
    pub patent_id: Option<String>,
    /// One molecule per reactant component, atom-mapped.
    pub reactants: Vec<Molecule>,
    pub products: Vec<Molecule>,
    pub template: Option<RetroTemplate>,
    pub template_hash: Option<String>,
}

fn components(side: &str) -> Result<Vec<Molecule>, ChemError> {
    if side.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(Molecule::parse(side)?.split_components())
}

impl ReactionRecord {
    /// Parses `reactants>agents>product` or `reactants>>product`; agents are
    /// dropped.
    pub fn parse(id: &str, patent_id: Option<&str>, rxn: &str) -> Result<ReactionRecord, String> {
        let parts: Vec<&str> = rxn.trim().split('>').collect();
        let [reac, _, prod] = parts.as_slice() else {
            return Err(format!("reaction SMILES {rxn:?} needs two '>'"));
        };
        Ok(ReactionRecord {
            id: id.to_string(),
            patent_id: patent_id.map(str::to_string),
            reactants: components(reac).map_err(|e| e.to_string())?,
            products: components(prod).map_err(|e| e.to_string())?,
            template: None,
            template_hash: None,
        })
    }

    pub fn from_raw(raw: &RawRecord) -> Result<ReactionRecord, String> {
        let mut r = ReactionRecord::parse(&raw.id, raw.patent_id.as_deref(), &raw.rxn_smiles)?;
        if let Some(t) = &raw.template {
            let t = RetroTemplate::parse(t).map_err(|e| e.to_string())?;
            r.template_hash = Some(t.hash());
            r.template = Some(t);
        } else {
            r.template_hash = raw.template_hash.clone();
        }
        Ok(r)
    }

    pub fn to_raw(&self) -> RawRecord {
        RawRecord {
            id: self.id.clone(),
            patent_id: self.patent_id.clone(),
            rxn_smiles: self.rxn_smiles(),
            template: self.template.as_ref().map(|t| t.canonical_smarts().to_string()),
            template_hash: self.template_hash.clone(),
        }
    }

    /// Mapped `reactants>>products`.
    pub fn rxn_smiles(&self) -> String {
        let side = |ms: &[Molecule]| ms.iter().map(Molecule::to_mapped_smiles).collect::<Vec<_>>().join(".");
        format!("{}>>{}", side(&self.reactants), side(&self.products))
    }

    /// The single product. Panics on multi-product records, which the
    /// filter rejects.
    pub fn product(&self) -> &Molecule {
        assert_eq!(self.products.len(), 1, "record {} has {} products", self.id, self.products.len());
        &self.products[0]
    }

    pub fn product_smiles(&self) -> String {
        self.product().without_maps().canonical_smiles().to_string()
    }

    /// Unmapped canonical reactants, sorted.
    pub fn reactant_smiles(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .reactants
            .iter()
            .map(|m| m.without_maps().canonical_smiles().to_string())
            .collect();
        v.sort();
        v
    }

    /// SHA-256 over sorted canonical reactants and the canonical product.
    pub fn reaction_hash(&self) -> String {
        let products: Vec<String> = self
            .products
            .iter()
            .map(|m| m.without_maps().canonical_smiles().to_string())
            .collect();
        let text = format!("{}>>{}", self.reactant_smiles().join("."), products.join("."));
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    /// Extracts and stores the template.
    pub fn extract(&mut self, radius: usize) -> Result<&RetroTemplate, TemplateError> {
        let t = extract_template(&self.reactants, self.product(), radius)?;
        self.template_hash = Some(t.hash());
        Ok(self.template.insert(t))
    }
}

/// Reads records; a missing field or unknown key is a schema error with its
/// line number.
pub fn read_records(reader: impl BufRead) -> Result<Vec<ReactionRecord>, RecordError> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line_no = k + 1;
        let line = line.map_err(|e| RecordError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| RecordError::Schema {
            line: line_no,
            message: e.to_string(),
        })?;
        let rec = ReactionRecord::from_raw(&raw).map_err(|message| RecordError::Schema { line: line_no, message })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records<'a>(records: impl IntoIterator<Item = &'a ReactionRecord>, mut w: impl Write) -> std::io::Result<()> {
    for r in records {
        writeln!(w, "{}", serde_json::to_string(&r.to_raw()).expect("record serializes"))?;
    }
    Ok(())
}
