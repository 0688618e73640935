//! Retro reaction templates written `product_pattern>>reactant_patterns`:
//! parsing, canonical form and hashing, extraction from mapped reactions,
//! application by graph rewriting, and frequency libraries.

mod apply;
mod canonical;
mod extract;
mod library;

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::chem::{ChemError, Molecule, PatternGraph};

pub use apply::{apply_template, ReactantSet};
pub use extract::{extract_template, extract_template_from_smiles, DEFAULT_RADIUS};
pub use library::{LibraryEntry, LibraryStatus, TemplateLibrary};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("pattern error: {0}")]
    Pattern(#[from] ChemError),
    #[error("template must contain exactly one '>>'")]
    MissingArrow,
    #[error("template has an empty {0} side")]
    EmptySide(&'static str),
    #[error("product atom map {0} does not appear in exactly one reactant pattern")]
    UnpairedMap(u32),
    #[error("reaction has no atom maps shared by product and reactants")]
    NoMappedAtoms,
    #[error("inconsistent atom mapping: {0}")]
    InconsistentMapping(String),
    #[error("reaction has no changed atoms")]
    EmptyReactionCenter,
    #[error("rewrite conflict: {0}")]
    RewriteConflict(String),
    #[error("template library line {line}: {message}")]
    LibraryFormat { line: usize, message: String },
    #[error("template library I/O: {0}")]
    Io(String),
}

/// A retro template. `reactant_patterns` may contain disconnected patterns
/// when one reactant holds several reaction centres (written `(A.B)`).
#[derive(Clone)]
pub struct RetroTemplate {
    product_pattern: PatternGraph,
    reactant_patterns: Vec<PatternGraph>,
    source_smarts: String,
    canonical: OnceLock<(String, Vec<usize>)>,
}

impl RetroTemplate {
    pub fn new(product_pattern: PatternGraph, reactant_patterns: Vec<PatternGraph>) -> Result<RetroTemplate, TemplateError> {
        if product_pattern.num_atoms() == 0 {
            return Err(TemplateError::EmptySide("product"));
        }
        if reactant_patterns.iter().all(|r| r.num_atoms() == 0) {
            return Err(TemplateError::EmptySide("reactant"));
        }
        let reactant_patterns: Vec<PatternGraph> =
            reactant_patterns.into_iter().filter(|r| r.num_atoms() > 0).collect();
        for (&m, _) in product_pattern.atom_maps().iter() {
            let holders = reactant_patterns
                .iter()
                .filter(|r| r.atom_maps().contains_key(&m))
                .count();
            if holders != 1 {
                return Err(TemplateError::UnpairedMap(m));
            }
        }
        let mut t = RetroTemplate {
            product_pattern,
            reactant_patterns,
            source_smarts: String::new(),
            canonical: OnceLock::new(),
        };
        t.source_smarts = t.to_smarts_as_given();
        Ok(t)
    }

    pub fn parse(text: &str) -> Result<RetroTemplate, TemplateError> {
        let text = text.trim();
        let mut sides = text.split(">>");
        let (Some(prod), Some(reac), None) = (sides.next(), sides.next(), sides.next()) else {
            return Err(TemplateError::MissingArrow);
        };
        if prod.trim().is_empty() {
            return Err(TemplateError::EmptySide("product"));
        }
        if reac.trim().is_empty() {
            return Err(TemplateError::EmptySide("reactant"));
        }
        let product_pattern = PatternGraph::parse(strip_group(prod.trim()))?;
        let mut reactant_patterns = Vec::new();
        for piece in split_top_level(reac.trim()) {
            if piece.is_empty() {
                return Err(TemplateError::EmptySide("reactant"));
            }
            let grouped = strip_group(piece);
            let pattern = PatternGraph::parse(grouped)?;
            if grouped.len() == piece.len() {
                // ungrouped pieces are single connected patterns
                for comp in pattern.components() {
                    reactant_patterns.push(pattern.subpattern(&comp));
                }
            } else {
                reactant_patterns.push(pattern);
            }
        }
        let mut t = RetroTemplate::new(product_pattern, reactant_patterns)?;
        t.source_smarts = text.to_string();
        Ok(t)
    }

    pub fn product_pattern(&self) -> &PatternGraph {
        &self.product_pattern
    }

    pub fn reactant_patterns(&self) -> &[PatternGraph] {
        &self.reactant_patterns
    }

    /// The SMARTS the template was parsed from (or built as).
    pub fn source_smarts(&self) -> &str {
        &self.source_smarts
    }

    /// Canonical SMARTS: maps renumbered canonically, reactant patterns
    /// sorted. Equal for templates describing the same transformation.
    pub fn canonical_smarts(&self) -> &str {
        &self.canonical_data().0
    }

    /// See [`apply_template`].
    pub fn apply(&self, product: &Molecule) -> Vec<ReactantSet> {
        apply_template(self, product)
    }

    /// Hex SHA-256 of [`RetroTemplate::canonical_smarts`].
    pub fn hash(&self) -> String {
        template_hash(self)
    }

    /// Symmetry classes of product-pattern atoms under automorphisms of the
    /// whole template; used to deduplicate match sites.
    pub(crate) fn site_classes(&self) -> &[usize] {
        &self.canonical_data().1
    }

    fn canonical_data(&self) -> &(String, Vec<usize>) {
        self.canonical.get_or_init(|| canonical::canonicalize(self))
    }

    fn to_smarts_as_given(&self) -> String {
        let reac: Vec<String> = self.reactant_patterns.iter().map(pattern_text).collect();
        format!("{}>>{}", pattern_text(&self.product_pattern), reac.join("."))
    }
}

fn pattern_text(p: &PatternGraph) -> String {
    let s = p.to_smarts();
    if p.components().len() > 1 {
        format!("({s})")
    } else {
        s
    }
}

/// Splits at `.` outside any parentheses or brackets.
fn split_top_level(s: &str) -> Vec<&str> {
    let mut depth = 0i32;
    let mut bracket = false;
    let mut start = 0;
    let mut out = Vec::new();
    for (i, c) in s.char_indices() {
        match c {
            '[' => bracket = true,
            ']' => bracket = false,
            '(' if !bracket => depth += 1,
            ')' if !bracket => depth -= 1,
            '.' if !bracket && depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// Removes a component-grouping pair of parentheses wrapping the whole text.
fn strip_group(s: &str) -> &str {
    if !s.starts_with('(') || !s.ends_with(')') {
        return s;
    }
    let mut depth = 0i32;
    let mut bracket = false;
    for (i, c) in s.char_indices() {
        match c {
            '[' => bracket = true,
            ']' => bracket = false,
            '(' if !bracket => depth += 1,
            ')' if !bracket => {
                depth -= 1;
                if depth == 0 && i != s.len() - 1 {
                    return s;
                }
            }
            _ => {}
        }
    }
    &s[1..s.len() - 1]
}

/// Canonical hash of a template.
pub fn template_hash(t: &RetroTemplate) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(t.canonical_smarts().as_bytes()))
}

impl fmt::Display for RetroTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source_smarts)
    }
}

impl fmt::Debug for RetroTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RetroTemplate({})", self.source_smarts)
    }
}

impl PartialEq for RetroTemplate {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_smarts() == other.canonical_smarts()
    }
}

impl Eq for RetroTemplate {}

impl std::hash::Hash for RetroTemplate {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical_smarts().hash(state);
    }
}

impl std::str::FromStr for RetroTemplate {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RetroTemplate::parse(s)
    }
}
