//! SMARTS subset: element symbols (aliphatic/aromatic), `#n`, `*`, `a`/`A`,
//! `H<n>`, `D<n>`, charges, atom maps, negation and the `&` `,` `;`
//! operators inside brackets; bond primitives `- = # : ~`. Recursive SMARTS,
//! ring queries and the rest of the language are rejected with
//! [`ChemError::UnsupportedQueryFeature`].

use std::collections::BTreeMap;
use std::fmt;

use super::aromatic::{perceive, RingView};
use super::canon::canonical_ranking;
use super::graph::build_adjacency;
use super::writer::LineGraph;
use super::{BondOrder, ChemError, Element, Molecule};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomPrimitive {
    /// `aromatic: None` for `#n` (either form).
    Element { element: Element, aromatic: Option<bool> },
    Wildcard,
    Aromatic(bool),
    HCount(u8),
    Degree(u8),
    Charge(i8),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Primitive {
    pub negated: bool,
    pub kind: AtomPrimitive,
}

impl Primitive {
    pub fn new(kind: AtomPrimitive) -> Primitive {
        Primitive { negated: false, kind }
    }

    fn matches(&self, mol: &Molecule, i: usize) -> bool {
        let atom = mol.atom(i);
        let hit = match &self.kind {
            AtomPrimitive::Element { element, aromatic } => {
                atom.element == *element && aromatic.is_none_or(|ar| ar == atom.aromatic)
            }
            AtomPrimitive::Wildcard => true,
            AtomPrimitive::Aromatic(ar) => atom.aromatic == *ar,
            AtomPrimitive::HCount(h) => atom.hydrogens == *h,
            AtomPrimitive::Degree(d) => mol.degree(i) == *d as usize,
            AtomPrimitive::Charge(c) => atom.charge == *c,
        };
        hit != self.negated
    }

    fn sort_key(&self) -> (u8, String) {
        let rank = match self.kind {
            AtomPrimitive::Element { .. } | AtomPrimitive::Wildcard => 0,
            AtomPrimitive::Aromatic(_) => 1,
            AtomPrimitive::HCount(_) => 2,
            AtomPrimitive::Degree(_) => 3,
            AtomPrimitive::Charge(_) => 4,
        };
        (rank, self.to_string())
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            f.write_str("!")?;
        }
        match &self.kind {
            AtomPrimitive::Element { element, aromatic: Some(true) } => {
                write!(f, "{}", element.symbol().to_ascii_lowercase())
            }
            AtomPrimitive::Element { element, aromatic: Some(false) } => write!(f, "{}", element.symbol()),
            AtomPrimitive::Element { element, aromatic: None } => write!(f, "#{}", element.0),
            AtomPrimitive::Wildcard => f.write_str("*"),
            AtomPrimitive::Aromatic(true) => f.write_str("a"),
            AtomPrimitive::Aromatic(false) => f.write_str("A"),
            AtomPrimitive::HCount(h) => write!(f, "H{h}"),
            AtomPrimitive::Degree(d) => write!(f, "D{d}"),
            AtomPrimitive::Charge(c) if *c >= 0 => write!(f, "+{c}"),
            AtomPrimitive::Charge(c) => write!(f, "-{}", -c),
        }
    }
}

/// Conjunction (`;`) of disjunctions (`,`) of conjunctions (`&`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AtomQuery {
    terms: Vec<Vec<Vec<Primitive>>>,
}

impl AtomQuery {
    /// A plain conjunction of primitives.
    pub fn all_of(prims: impl IntoIterator<Item = Primitive>) -> AtomQuery {
        AtomQuery {
            terms: prims.into_iter().map(|p| vec![vec![p]]).collect(),
        }
        .normalized()
    }

    pub fn terms(&self) -> &[Vec<Vec<Primitive>>] {
        &self.terms
    }

    pub fn matches(&self, mol: &Molecule, i: usize) -> bool {
        self.terms
            .iter()
            .all(|alts| alts.iter().any(|conj| conj.iter().all(|p| p.matches(mol, i))))
    }

    /// Primitives that are unconditionally required (single, un-negated).
    fn required(&self) -> impl Iterator<Item = &AtomPrimitive> {
        self.terms.iter().flat_map(|alts| {
            let single = alts.len() == 1;
            alts.iter()
                .filter(move |_| single)
                .flat_map(|conj| conj.iter())
                .filter(|p| !p.negated)
                .map(|p| &p.kind)
        })
    }

    pub fn fixed_element(&self) -> Option<(Element, Option<bool>)> {
        self.required().find_map(|p| match p {
            AtomPrimitive::Element { element, aromatic } => Some((*element, *aromatic)),
            _ => None,
        })
    }

    pub fn fixed_aromatic(&self) -> Option<bool> {
        self.required().find_map(|p| match p {
            AtomPrimitive::Element { aromatic: Some(ar), .. } => Some(*ar),
            AtomPrimitive::Aromatic(ar) => Some(*ar),
            _ => None,
        })
    }

    pub fn fixed_hydrogens(&self) -> Option<u8> {
        self.required().find_map(|p| match p {
            AtomPrimitive::HCount(h) => Some(*h),
            _ => None,
        })
    }

    pub fn fixed_charge(&self) -> Option<i8> {
        self.required().find_map(|p| match p {
            AtomPrimitive::Charge(c) => Some(*c),
            _ => None,
        })
    }

    fn normalized(mut self) -> AtomQuery {
        // a lone conjunction inside a term is the same as separate terms
        let mut flat = Vec::with_capacity(self.terms.len());
        for alts in self.terms {
            if alts.len() == 1 && alts[0].len() > 1 {
                flat.extend(alts[0].iter().map(|p| vec![vec![p.clone()]]));
            } else {
                flat.push(alts);
            }
        }
        self.terms = flat;
        for alts in &mut self.terms {
            for conj in alts.iter_mut() {
                conj.sort_by_key(|p| p.sort_key());
                conj.dedup();
            }
            alts.sort_by_key(|conj| conj.iter().map(|p| p.sort_key()).collect::<Vec<_>>());
            alts.dedup();
        }
        self.terms.sort_by_key(|alts| {
            alts.iter()
                .map(|c| c.iter().map(|p| p.sort_key()).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        });
        self.terms.dedup();
        self
    }

    fn map_primitives(&mut self, f: impl Fn(&mut Primitive)) {
        for alts in &mut self.terms {
            for conj in alts.iter_mut() {
                for p in conj.iter_mut() {
                    f(p);
                }
            }
        }
    }
}

impl fmt::Display for AtomQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: Vec<String> = self
            .terms
            .iter()
            .map(|alts| {
                alts.iter()
                    .map(|conj| conj.iter().map(|p| p.to_string()).collect::<Vec<_>>().join("&"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect();
        f.write_str(&text.join(";"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondQuery {
    /// Unspecified: single or aromatic.
    Default,
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
}

impl BondQuery {
    pub fn matches(self, order: BondOrder) -> bool {
        match self {
            BondQuery::Default => matches!(order, BondOrder::Single | BondOrder::Aromatic),
            BondQuery::Single => order == BondOrder::Single,
            BondQuery::Double => order == BondOrder::Double,
            BondQuery::Triple => order == BondOrder::Triple,
            BondQuery::Aromatic => order == BondOrder::Aromatic,
            BondQuery::Any => true,
        }
    }

    /// Concrete order when the query pins exactly one.
    pub fn fixed_order(self) -> Option<BondOrder> {
        match self {
            BondQuery::Single => Some(BondOrder::Single),
            BondQuery::Double => Some(BondOrder::Double),
            BondQuery::Triple => Some(BondOrder::Triple),
            BondQuery::Aromatic => Some(BondOrder::Aromatic),
            BondQuery::Default | BondQuery::Any => None,
        }
    }

    pub fn from_order(order: BondOrder) -> BondQuery {
        match order {
            BondOrder::Single => BondQuery::Single,
            BondOrder::Double => BondQuery::Double,
            BondOrder::Triple => BondQuery::Triple,
            BondOrder::Aromatic => BondQuery::Aromatic,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            BondQuery::Default => "",
            BondQuery::Single => "-",
            BondQuery::Double => "=",
            BondQuery::Triple => "#",
            BondQuery::Aromatic => ":",
            BondQuery::Any => "~",
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PatternAtom {
    pub query: AtomQuery,
    pub atom_map: Option<u32>,
}

impl PatternAtom {
    /// Query text without the atom map, e.g. `C;H0;D3;+0`.
    pub fn label(&self) -> String {
        self.query.to_string()
    }

    pub fn to_smarts(&self, with_map: bool) -> String {
        match self.atom_map.filter(|_| with_map) {
            Some(m) => format!("[{}:{m}]", self.query),
            None => format!("[{}]", self.query),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternBond {
    pub a: usize,
    pub b: usize,
    pub query: BondQuery,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    atoms: Vec<PatternAtom>,
    bonds: Vec<PatternBond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PatternGraph {
    pub fn new(atoms: Vec<PatternAtom>, bonds: Vec<PatternBond>) -> Result<PatternGraph, ChemError> {
        let adjacency = build_adjacency(atoms.len(), bonds.iter().map(|b| (b.a, b.b))).map_err(|m| {
            ChemError::MalformedPattern {
                position: 0,
                message: m,
            }
        })?;
        let mut seen = std::collections::BTreeSet::new();
        for a in &atoms {
            if let Some(m) = a.atom_map {
                if !seen.insert(m) {
                    return Err(ChemError::MalformedPattern {
                        position: 0,
                        message: format!("atom map {m} used twice"),
                    });
                }
            }
        }
        Ok(PatternGraph {
            atoms,
            bonds,
            adjacency,
        })
    }

    pub fn parse(text: &str) -> Result<PatternGraph, ChemError> {
        let mut pattern = SmartsParser::new(text)?.run()?;
        pattern.perceive_aromaticity();
        Ok(pattern)
    }

    pub fn atoms(&self) -> &[PatternAtom] {
        &self.atoms
    }

    pub fn bonds(&self) -> &[PatternBond] {
        &self.bonds
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<(usize, usize)>] {
        &self.adjacency
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&PatternBond> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    pub fn atom_maps(&self) -> BTreeMap<u32, usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.atom_map.map(|m| (m, i)))
            .collect()
    }

    /// Connected components as sorted atom index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        super::graph::components(&self.adjacency)
    }

    /// Pattern induced on `atoms`, kept in the given order.
    pub fn subpattern(&self, atoms: &[usize]) -> PatternGraph {
        let mut remap = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in atoms.iter().enumerate() {
            remap[old] = new;
        }
        let new_atoms = atoms.iter().map(|&i| self.atoms[i].clone()).collect();
        let new_bonds = self
            .bonds
            .iter()
            .filter(|b| remap[b.a] != usize::MAX && remap[b.b] != usize::MAX)
            .map(|b| PatternBond {
                a: remap[b.a],
                b: remap[b.b],
                query: b.query,
            })
            .collect();
        PatternGraph::new(new_atoms, new_bonds).expect("induced subpattern is valid")
    }

    /// Copy with atom maps replaced through `f` (`None` clears the map).
    pub fn remapped(&self, f: impl Fn(u32) -> Option<u32>) -> PatternGraph {
        let mut out = self.clone();
        for a in &mut out.atoms {
            a.atom_map = a.atom_map.and_then(&f);
        }
        out
    }

    pub(crate) fn labelled_adjacency(&self) -> Vec<Vec<(usize, u64)>> {
        self.adjacency
            .iter()
            .map(|nb| nb.iter().map(|&(v, b)| (v, self.bonds[b].query.code())).collect())
            .collect()
    }

    /// Automorphism orbits of the pattern ignoring atom maps; equal values
    /// mean symmetric atoms.
    pub fn symmetry_classes(&self) -> Vec<usize> {
        let labels: Vec<String> = self.atoms.iter().map(|a| a.label()).collect();
        super::matching::automorphism_orbits(&labels, &self.labelled_adjacency())
    }

    /// Writes the pattern in the order given by `ranks`.
    pub(crate) fn write_ranked(&self, ranks: &[usize], with_maps: bool) -> String {
        let graph = LineGraph {
            adj: &self.adjacency,
            ranks,
        };
        let atom_token = |i: usize| self.atoms[i].to_smarts(with_maps);
        let bond_token = |b: usize, _: usize, _: usize| self.bonds[b].query.token().to_string();
        graph.write(&atom_token, &bond_token)
    }

    /// Canonical SMARTS including atom maps.
    pub fn to_smarts(&self) -> String {
        let labels: Vec<(String, u32)> = self
            .atoms
            .iter()
            .map(|a| (a.label(), a.atom_map.unwrap_or(0)))
            .collect();
        let ranks = canonical_ranking(&labels, &self.labelled_adjacency());
        self.write_ranked(&ranks, true)
    }

    /// Kekulé rings written with explicit elements become aromatic queries.
    fn perceive_aromaticity(&mut self) {
        let n = self.atoms.len();
        let degree = |i: usize| self.adjacency[i].len();
        let view = RingView {
            element: self
                .atoms
                .iter()
                .map(|a| match a.query.fixed_element() {
                    Some((e, Some(_))) => Some(e),
                    _ => None,
                })
                .collect(),
            charge: self.atoms.iter().map(|a| a.query.fixed_charge().unwrap_or(0)).collect(),
            aromatic: self.atoms.iter().map(|a| a.query.fixed_aromatic() == Some(true)).collect(),
            donor: (0..n)
                .map(|i| match self.atoms[i].query.fixed_element() {
                    Some((e, _)) if e == Element::N => {
                        self.atoms[i].query.fixed_hydrogens().is_some_and(|h| h >= 1) || degree(i) == 3
                    }
                    Some((e, _)) if e == Element::O || e == Element::S => degree(i) == 2,
                    _ => false,
                })
                .collect(),
            bonds: self
                .bonds
                .iter()
                .map(|b| {
                    let order = match b.query {
                        BondQuery::Default | BondQuery::Single => Some(BondOrder::Single),
                        BondQuery::Double => Some(BondOrder::Double),
                        BondQuery::Aromatic => Some(BondOrder::Aromatic),
                        _ => None,
                    };
                    (b.a, b.b, order)
                })
                .collect(),
        };
        let result = perceive(&view);
        for (i, arom) in result.atoms.iter().enumerate() {
            if *arom && !view.aromatic[i] {
                let atom = &mut self.atoms[i];
                atom.query.map_primitives(|p| match &mut p.kind {
                    AtomPrimitive::Element { aromatic, .. } if aromatic.is_some() => *aromatic = Some(true),
                    AtomPrimitive::Aromatic(ar) => *ar = true,
                    _ => {}
                });
                atom.query = atom.query.clone().normalized();
            }
        }
        for (bi, arom) in result.bonds.iter().enumerate() {
            if *arom {
                self.bonds[bi].query = BondQuery::Aromatic;
            }
        }
    }
}

impl fmt::Display for PatternGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_smarts())
    }
}

impl std::str::FromStr for PatternGraph {
    type Err = ChemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PatternGraph::parse(s)
    }
}

#[derive(Debug)]
enum Tok {
    Prim(Primitive),
    Not,
    And,
    Or,
    Semi,
}

struct SmartsParser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<PatternAtom>,
    bonds: Vec<PatternBond>,
}

impl<'a> SmartsParser<'a> {
    fn new(text: &'a str) -> Result<Self, ChemError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(ChemError::EmptyInput);
        }
        Ok(SmartsParser {
            text: text.as_bytes(),
            pos: 0,
            atoms: Vec::new(),
            bonds: Vec::new(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn malformed(&self, position: usize, message: &str) -> ChemError {
        ChemError::MalformedPattern {
            position,
            message: message.to_string(),
        }
    }

    fn unsupported(&self, position: usize, len: usize) -> ChemError {
        let end = (position + len).min(self.text.len());
        ChemError::UnsupportedQueryFeature {
            position,
            token: String::from_utf8_lossy(&self.text[position..end]).into_owned(),
        }
    }

    fn run(mut self) -> Result<PatternGraph, ChemError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondQuery, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<BondQuery>, usize)> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let p = prev.ok_or_else(|| self.malformed(start, "branch before any atom"))?;
                    if self.text.get(start + 1) == Some(&b'.') {
                        return Err(self.unsupported(start, 2));
                    }
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    let (p, _) = branches
                        .pop()
                        .ok_or_else(|| self.malformed(start, "unbalanced parentheses"))?;
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'~' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(self.unsupported(pending.unwrap().1, start + 1 - pending.unwrap().1));
                    }
                    let q = match c {
                        b'-' | b'/' | b'\\' => BondQuery::Single,
                        b'=' => BondQuery::Double,
                        b'#' => BondQuery::Triple,
                        b':' => BondQuery::Aromatic,
                        _ => BondQuery::Any,
                    };
                    pending = Some((q, start));
                    self.pos += 1;
                }
                b'@' | b'!' | b';' | b',' | b'&' | b'$' => return Err(self.unsupported(start, 1)),
                b'0'..=b'9' | b'%' => {
                    let p = prev.ok_or_else(|| self.malformed(start, "ring closure before any atom"))?;
                    let digit = if c == b'%' {
                        let d = self
                            .text
                            .get(start + 1..start + 3)
                            .filter(|d| d.iter().all(u8::is_ascii_digit))
                            .ok_or_else(|| self.malformed(start, "bad %nn ring closure"))?;
                        self.pos += 3;
                        ((d[0] - b'0') * 10 + (d[1] - b'0')) as u32
                    } else {
                        self.pos += 1;
                        (c - b'0') as u32
                    };
                    let q = pending.take().map(|(q, _)| q);
                    if let Some((other, oq, _)) = rings.remove(&digit) {
                        let query = match (oq, q) {
                            (Some(a), Some(b)) if a != b => {
                                return Err(self.malformed(start, "conflicting ring closure bonds"))
                            }
                            (Some(a), _) | (_, Some(a)) => a,
                            _ => BondQuery::Default,
                        };
                        self.add_bond(other, p, query, start)?;
                    } else {
                        rings.insert(digit, (p, q, start));
                    }
                }
                _ => {
                    let idx = if c == b'[' { self.bracket_atom()? } else { self.bare_atom()? };
                    if let Some(p) = prev {
                        let q = pending.take().map(|(q, _)| q).unwrap_or(BondQuery::Default);
                        self.add_bond(p, idx, q, start)?;
                    } else if pending.is_some() {
                        return Err(self.malformed(start, "bond without a preceding atom"));
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, at)) = pending {
            return Err(self.malformed(at, "dangling bond"));
        }
        if let Some((_, at)) = branches.first() {
            return Err(self.malformed(*at, "unbalanced parentheses"));
        }
        if let Some((_, (_, _, at))) = rings.iter().next() {
            return Err(self.malformed(*at, "unclosed ring"));
        }
        PatternGraph::new(self.atoms, self.bonds)
    }

    fn add_bond(&mut self, a: usize, b: usize, query: BondQuery, at: usize) -> Result<(), ChemError> {
        if a == b || self.bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            return Err(self.malformed(at, "duplicate bond"));
        }
        self.bonds.push(PatternBond { a, b, query });
        Ok(())
    }

    fn bare_atom(&mut self) -> Result<usize, ChemError> {
        let start = self.pos;
        let c = self.text[start];
        let next = self.text.get(start + 1).copied();
        let kind = match (c, next) {
            (b'C', Some(b'l')) => Some(("Cl", Some(false), 2)),
            (b'B', Some(b'r')) => Some(("Br", Some(false), 2)),
            (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I', _) => None,
            (b'b' | b'c' | b'n' | b'o' | b'p' | b's', _) => None,
            (b'*', _) => {
                self.pos += 1;
                return Ok(self.push(AtomQuery::all_of([Primitive::new(AtomPrimitive::Wildcard)]), None));
            }
            (b'a', _) | (b'A', _) => {
                self.pos += 1;
                let prim = Primitive::new(AtomPrimitive::Aromatic(c == b'a'));
                return Ok(self.push(AtomQuery::all_of([prim]), None));
            }
            _ => return Err(self.unsupported(start, 1)),
        };
        let (symbol, aromatic, len) = match kind {
            Some(k) => k,
            None => {
                let upper = (c as char).to_ascii_uppercase().to_string();
                let sym: &'static str = Element::from_symbol(&upper).unwrap().symbol();
                (sym, Some(c.is_ascii_lowercase()), 1)
            }
        };
        self.pos += len;
        let element = Element::from_symbol(symbol).unwrap();
        let prim = Primitive::new(AtomPrimitive::Element { element, aromatic });
        Ok(self.push(AtomQuery::all_of([prim]), None))
    }

    fn push(&mut self, query: AtomQuery, atom_map: Option<u32>) -> usize {
        self.atoms.push(PatternAtom { query, atom_map });
        self.atoms.len() - 1
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        std::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
    }

    fn bracket_atom(&mut self) -> Result<usize, ChemError> {
        let open = self.pos;
        self.pos += 1;
        let mut toks: Vec<(Tok, usize)> = Vec::new();
        let mut atom_map = None;
        loop {
            let start = self.pos;
            let Some(c) = self.peek() else {
                return Err(self.malformed(open, "unterminated bracket atom"));
            };
            match c {
                b']' => {
                    self.pos += 1;
                    break;
                }
                b':' => {
                    self.pos += 1;
                    atom_map = Some(self.number().ok_or_else(|| self.malformed(start, "bad atom map"))?);
                    if self.peek() != Some(b']') {
                        return Err(self.malformed(self.pos, "atom map must end the bracket"));
                    }
                }
                b'!' => {
                    self.pos += 1;
                    toks.push((Tok::Not, start));
                }
                b'&' => {
                    self.pos += 1;
                    toks.push((Tok::And, start));
                }
                b',' => {
                    self.pos += 1;
                    toks.push((Tok::Or, start));
                }
                b';' => {
                    self.pos += 1;
                    toks.push((Tok::Semi, start));
                }
                b'$' => return Err(self.unsupported(start, 2)),
                b'*' => {
                    self.pos += 1;
                    toks.push((Tok::Prim(Primitive::new(AtomPrimitive::Wildcard)), start));
                }
                b'#' => {
                    self.pos += 1;
                    let n = self.number().ok_or_else(|| self.malformed(start, "bad atomic number"))?;
                    let element = u8::try_from(n)
                        .ok()
                        .and_then(Element::from_number)
                        .ok_or_else(|| self.unsupported(start, self.pos - start))?;
                    toks.push((
                        Tok::Prim(Primitive::new(AtomPrimitive::Element { element, aromatic: None })),
                        start,
                    ));
                }
                b'H' => {
                    self.pos += 1;
                    let h = self.number().unwrap_or(1) as u8;
                    toks.push((Tok::Prim(Primitive::new(AtomPrimitive::HCount(h))), start));
                }
                b'D' => {
                    self.pos += 1;
                    let d = self.number().unwrap_or(1) as u8;
                    toks.push((Tok::Prim(Primitive::new(AtomPrimitive::Degree(d))), start));
                }
                b'+' | b'-' => {
                    let unit: i32 = if c == b'+' { 1 } else { -1 };
                    self.pos += 1;
                    let charge = match self.number() {
                        Some(n) => unit * n as i32,
                        None => {
                            let mut q = unit;
                            while self.peek() == Some(c) {
                                q += unit;
                                self.pos += 1;
                            }
                            q
                        }
                    };
                    toks.push((Tok::Prim(Primitive::new(AtomPrimitive::Charge(charge as i8))), start));
                }
                b'0'..=b'9' => return Err(self.unsupported(start, 1)),
                _ if c.is_ascii_alphabetic() => {
                    let prim = self.bracket_symbol().ok_or_else(|| self.unsupported(start, 1))?;
                    toks.push((Tok::Prim(prim), start));
                }
                _ => return Err(self.unsupported(start, 1)),
            }
        }
        // `[H]` alone denotes a hydrogen atom rather than an H-count query.
        if let [(Tok::Prim(Primitive { negated: false, kind: AtomPrimitive::HCount(1) }), _)] = toks.as_slice() {
            if self.text[open + 1] == b'H' {
                toks[0].0 = Tok::Prim(Primitive::new(AtomPrimitive::Element {
                    element: Element::from_number(1).unwrap(),
                    aromatic: Some(false),
                }));
            }
        }
        let query = build_query(toks, open)?;
        Ok(self.push(query, atom_map.filter(|&m| m != 0)))
    }

    fn bracket_symbol(&mut self) -> Option<Primitive> {
        let rest = &self.text[self.pos..];
        let c = rest[0];
        let elem = |element: Element, aromatic: bool| {
            Primitive::new(AtomPrimitive::Element {
                element,
                aromatic: Some(aromatic),
            })
        };
        for (lower, sym) in [(&b"se"[..], "Se"), (b"as", "As")] {
            if rest.starts_with(lower) {
                self.pos += 2;
                return Some(elem(Element::from_symbol(sym)?, true));
            }
        }
        if c.is_ascii_uppercase() {
            if let Some(&c2) = rest.get(1) {
                if c2.is_ascii_lowercase() {
                    let two = format!("{}{}", c as char, c2 as char);
                    if let Some(e) = Element::from_symbol(&two) {
                        self.pos += 2;
                        return Some(elem(e, false));
                    }
                }
            }
            if c == b'A' {
                self.pos += 1;
                return Some(Primitive::new(AtomPrimitive::Aromatic(false)));
            }
            let e = Element::from_symbol(&(c as char).to_string())?;
            self.pos += 1;
            return Some(elem(e, false));
        }
        if c == b'a' {
            self.pos += 1;
            return Some(Primitive::new(AtomPrimitive::Aromatic(true)));
        }
        let e = Element::from_symbol(&(c as char).to_ascii_uppercase().to_string())?;
        if !e.can_be_aromatic() {
            return None;
        }
        self.pos += 1;
        Some(elem(e, true))
    }
}

fn build_query(toks: Vec<(Tok, usize)>, open: usize) -> Result<AtomQuery, ChemError> {
    let malformed = |position: usize, message: &str| ChemError::MalformedPattern {
        position,
        message: message.to_string(),
    };
    if toks.is_empty() {
        return Err(malformed(open, "empty bracket atom"));
    }
    let mut terms: Vec<Vec<Vec<Primitive>>> = vec![vec![vec![]]];
    let mut negate = false;
    let mut last_was_prim = false;
    for (tok, at) in toks {
        match tok {
            Tok::Prim(mut p) => {
                p.negated = negate;
                negate = false;
                terms.last_mut().unwrap().last_mut().unwrap().push(p);
                last_was_prim = true;
            }
            Tok::Not => {
                if negate {
                    return Err(malformed(at, "double negation"));
                }
                negate = true;
            }
            Tok::And | Tok::Or | Tok::Semi => {
                if !last_was_prim || negate {
                    return Err(malformed(at, "operator without operand"));
                }
                match tok {
                    Tok::Or => terms.last_mut().unwrap().push(vec![]),
                    Tok::Semi => terms.push(vec![vec![]]),
                    _ => {}
                }
                last_was_prim = false;
            }
        }
    }
    if !last_was_prim {
        return Err(malformed(open, "trailing operator"));
    }
    Ok(AtomQuery { terms }.normalized())
}
