//! Molecular graphs: a SMILES subset parser, canonical SMILES, molecular
//! weight, circular fingerprints, and SMARTS-subset pattern matching.
//!
//! Molecules store hydrogens as per-atom counts (implicit or bracket
//! explicit); there are no explicit hydrogen nodes. Graphs are immutable
//! once built and can be shared across threads.

mod aromatic;
mod canon;
mod elements;
mod fingerprint;
pub(crate) mod graph;
pub(crate) mod matching;
mod smarts;
mod smiles;
mod writer;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canon::canonical_ranking;
pub use elements::Element;
pub use fingerprint::Fingerprint;
pub use matching::{find_matches, find_matches_with_classes, Match};
pub use smarts::{AtomPrimitive, AtomQuery, BondQuery, PatternAtom, PatternBond, PatternGraph, Primitive};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChemError {
    #[error("empty input")]
    EmptyInput,
    #[error("ring closure {digit} opened at position {position} is never closed")]
    UnclosedRing { position: usize, digit: u32 },
    #[error("unbalanced parentheses at position {position}")]
    UnbalancedParentheses { position: usize },
    #[error("unknown symbol {symbol:?} at position {position}")]
    UnknownSymbol { position: usize, symbol: String },
    #[error("valence violation on {element} at position {position}")]
    ValenceViolation { position: usize, element: String },
    #[error("invalid bond at position {position}: {message}")]
    InvalidBond { position: usize, message: String },
    #[error("unsupported query feature {token:?} at position {position}")]
    UnsupportedQueryFeature { position: usize, token: String },
    #[error("malformed pattern at position {position}: {message}")]
    MalformedPattern { position: usize, message: String },
    #[error("invalid molecule graph: {0}")]
    InvalidGraph(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution, counting aromatic bonds as one.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u64 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    /// Total attached hydrogens, implicit or from a bracket `H` count.
    pub hydrogens: u8,
    pub aromatic: bool,
    pub atom_map: Option<u32>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            hydrogens: 0,
            aromatic: false,
            atom_map: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, i: usize) -> usize {
        if self.a == i {
            self.b
        } else {
            self.a
        }
    }
}

/// An attributed molecular graph. Equality and hashing go through the
/// canonical SMILES string.
#[derive(Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    canonical: OnceLock<String>,
}

impl Molecule {
    /// Builds a molecule from raw parts, checking graph structure only.
    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, ChemError> {
        let adjacency = graph::build_adjacency(atoms.len(), bonds.iter().map(|b| (b.a, b.b)))
            .map_err(ChemError::InvalidGraph)?;
        Ok(Molecule {
            atoms,
            bonds,
            adjacency,
            canonical: OnceLock::new(),
        })
    }

    /// Like [`Molecule::from_parts`] but also normalizes aromaticity and
    /// checks valences, as the SMILES parser does.
    pub fn from_parts_sanitized(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Molecule, ChemError> {
        let mut mol = Molecule::from_parts(atoms, bonds)?;
        mol.sanitize()?;
        Ok(mol)
    }

    pub fn parse(text: &str) -> Result<Molecule, ChemError> {
        smiles::parse_smiles(text)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Atoms other than hydrogen.
    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| a.element.0 != 1).count()
    }

    /// `(neighbor, bond index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    /// Sum of bond valences around `i` (aromatic counted as one).
    pub fn bond_valence(&self, i: usize) -> u8 {
        self.adjacency[i]
            .iter()
            .map(|&(_, b)| self.bonds[b].order.valence())
            .sum()
    }

    /// Hydrogen count an unbracketed organic-subset atom would get in this
    /// bonding environment. `None` if the atom cannot be written bare.
    pub(crate) fn default_hydrogens(&self, i: usize) -> Option<u8> {
        let atom = &self.atoms[i];
        if !atom.element.is_organic_subset() || atom.charge != 0 {
            return None;
        }
        let orders = self.adjacency[i].iter().map(|&(_, b)| self.bonds[b].order);
        smiles::implicit_hydrogens(atom.element, atom.aromatic, orders)
    }

    pub fn canonical_smiles(&self) -> &str {
        self.canonical.get_or_init(|| writer::write_molecule(self, false))
    }

    /// Canonical-order SMILES that keeps atom maps (bracketed atoms).
    pub fn to_mapped_smiles(&self) -> String {
        writer::write_molecule(self, true)
    }

    pub fn molecular_weight(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.element.atomic_weight() + a.hydrogens as f64 * elements::HYDROGEN_WEIGHT)
            .sum()
    }

    pub fn morgan_fingerprint(&self, radius: usize, nbits: usize) -> Fingerprint {
        fingerprint::morgan(self, radius, nbits)
    }

    /// Connected components as sorted atom index lists, ordered by their
    /// smallest index.
    pub fn components(&self) -> Vec<Vec<usize>> {
        graph::components(&self.adjacency)
    }

    /// Splits a dot-disconnected molecule into one molecule per component.
    pub fn split_components(&self) -> Vec<Molecule> {
        self.components()
            .into_iter()
            .map(|c| self.subgraph(&c))
            .collect()
    }

    /// Induced subgraph on `atoms` (kept in the given order).
    pub fn subgraph(&self, atoms: &[usize]) -> Molecule {
        let mut remap = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in atoms.iter().enumerate() {
            remap[old] = new;
        }
        let new_atoms = atoms.iter().map(|&i| self.atoms[i].clone()).collect();
        let new_bonds = self
            .bonds
            .iter()
            .filter(|b| remap[b.a] != usize::MAX && remap[b.b] != usize::MAX)
            .map(|b| Bond {
                a: remap[b.a],
                b: remap[b.b],
                order: b.order,
            })
            .collect();
        Molecule::from_parts(new_atoms, new_bonds).expect("induced subgraph is valid")
    }

    /// Copy with every atom map cleared.
    pub fn without_maps(&self) -> Molecule {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                atom_map: None,
                ..a.clone()
            })
            .collect();
        Molecule::from_parts(atoms, self.bonds.clone()).expect("same graph")
    }

    pub fn atom_maps(&self) -> BTreeSet<u32> {
        self.atoms.iter().filter_map(|a| a.atom_map).collect()
    }

    pub fn atom_with_map(&self, map: u32) -> Option<usize> {
        self.atoms.iter().position(|a| a.atom_map == Some(map))
    }

    /// Aromatic bonds outside rings become single, Kekulé rings that pass the
    /// aromaticity rule become aromatic, stray aromatic flags are cleared and
    /// valences are checked.
    pub(crate) fn sanitize(&mut self) -> Result<(), ChemError> {
        let in_ring = graph::ring_bonds(&self.adjacency, self.bonds.len());
        for (bi, bond) in self.bonds.iter_mut().enumerate() {
            if bond.order == BondOrder::Aromatic && !in_ring[bi] {
                bond.order = BondOrder::Single;
            }
        }
        aromatic::perceive_molecule(self);
        for i in 0..self.atoms.len() {
            if self.atoms[i].aromatic
                && !self.adjacency[i]
                    .iter()
                    .any(|&(_, b)| self.bonds[b].order == BondOrder::Aromatic)
            {
                self.atoms[i].aromatic = false;
            }
        }
        self.canonical = OnceLock::new();
        self.check_valences()
    }

    pub(crate) fn check_valences(&self) -> Result<(), ChemError> {
        for i in 0..self.atoms.len() {
            if !self.valence_ok(i) {
                return Err(ChemError::ValenceViolation {
                    position: i,
                    element: self.atoms[i].element.symbol().to_string(),
                });
            }
        }
        Ok(())
    }

    /// True when bonds plus hydrogens fit the element's largest valence.
    pub(crate) fn valence_ok(&self, i: usize) -> bool {
        let atom = &self.atoms[i];
        let Some(vals) = atom.element.allowed_valences(atom.charge) else {
            return true;
        };
        let max = *vals.last().unwrap();
        let mut used = self.bond_valence(i) + atom.hydrogens;
        let has_aromatic = self.adjacency[i]
            .iter()
            .any(|&(_, b)| self.bonds[b].order == BondOrder::Aromatic);
        if atom.aromatic && has_aromatic {
            used += smiles::aromatic_pi_contribution(
                atom.element,
                self.degree(i),
                atom.hydrogens,
                self.adjacency[i].iter().map(|&(_, b)| self.bonds[b].order),
            );
        }
        used <= max
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, usize)>] {
        &self.adjacency
    }

    pub(crate) fn atoms_mut(&mut self) -> &mut [Atom] {
        self.canonical = OnceLock::new();
        &mut self.atoms
    }

    pub(crate) fn bonds_mut(&mut self) -> &mut [Bond] {
        self.canonical = OnceLock::new();
        &mut self.bonds
    }
}

impl PartialEq for Molecule {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_smiles() == other.canonical_smiles()
    }
}

impl Eq for Molecule {}

impl std::hash::Hash for Molecule {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.canonical_smiles().hash(state)
    }
}

impl fmt::Debug for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Molecule({})", self.to_mapped_smiles())
    }
}

impl fmt::Display for Molecule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.canonical_smiles())
    }
}

impl std::str::FromStr for Molecule {
    type Err = ChemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Molecule::parse(s)
    }
}

pub fn parse_smiles(text: &str) -> Result<Molecule, ChemError> {
    Molecule::parse(text)
}

pub fn canonical_smiles(m: &Molecule) -> String {
    m.canonical_smiles().to_string()
}

/// Parses and canonicalizes in one step.
pub fn canonicalize(text: &str) -> Result<String, ChemError> {
    Ok(Molecule::parse(text)?.canonical_smiles().to_string())
}

pub fn molecular_weight(m: &Molecule) -> f64 {
    m.molecular_weight()
}

pub fn morgan_fingerprint(m: &Molecule, radius: usize, nbits: usize) -> Fingerprint {
    m.morgan_fingerprint(radius, nbits)
}

pub fn parse_smarts(text: &str) -> Result<PatternGraph, ChemError> {
    PatternGraph::parse(text)
}
