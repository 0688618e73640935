//! SMILES subset parser: organic subset, bracket atoms, charges, ring
//! closures (including `%nn`), branches, aromatic lowercase atoms, atom maps
//! and dot-separated components. Stereo markers are accepted and dropped.

use std::collections::BTreeMap;

use super::{Atom, Bond, BondOrder, ChemError, Element, Molecule};

/// Valence contributed by the aromatic pi system for hydrogen bookkeeping.
pub(crate) fn aromatic_pi_contribution(
    element: Element,
    degree: usize,
    hydrogens: u8,
    orders: impl Iterator<Item = BondOrder>,
) -> u8 {
    let mut has_multiple = false;
    let mut has_aromatic = false;
    for o in orders {
        match o {
            BondOrder::Double | BondOrder::Triple => has_multiple = true,
            BondOrder::Aromatic => has_aromatic = true,
            BondOrder::Single => {}
        }
    }
    if has_multiple || !has_aromatic {
        return 0;
    }
    match element.0 {
        5 | 6 | 14 => 1,
        7 | 15 | 33 => u8::from(degree == 2 && hydrogens == 0),
        _ => 0,
    }
}

/// Implicit hydrogens for an unbracketed atom with the given bonds.
pub(crate) fn implicit_hydrogens(
    element: Element,
    aromatic: bool,
    orders: impl Iterator<Item = BondOrder> + Clone,
) -> Option<u8> {
    let degree = orders.clone().count();
    let mut used: u8 = orders.clone().map(|o| o.valence()).sum();
    if aromatic {
        used += aromatic_pi_contribution(element, degree, 0, orders);
    }
    element.implicit_hydrogens(0, used)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum BondSpec {
    Implicit,
    Explicit(BondOrder),
}

struct PendingRing {
    atom: usize,
    bond: BondSpec,
    position: usize,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    bracket: Vec<bool>,
    positions: Vec<usize>,
    bonds: Vec<Bond>,
    saw_stereo: bool,
}

pub(crate) fn parse_smiles(input: &str) -> Result<Molecule, ChemError> {
    let text = input.trim();
    if text.is_empty() {
        return Err(ChemError::EmptyInput);
    }
    let mut p = Parser {
        text: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        bracket: Vec::new(),
        positions: Vec::new(),
        bonds: Vec::new(),
        saw_stereo: false,
    };
    p.run()?;
    if p.saw_stereo {
        log::warn!("stereochemistry markers in {text:?} were discarded");
    }
    p.finish()
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn unknown(&self, at: usize, len: usize) -> ChemError {
        let end = (at + len).min(self.text.len());
        ChemError::UnknownSymbol {
            position: at,
            symbol: String::from_utf8_lossy(&self.text[at..end]).into_owned(),
        }
    }

    fn run(&mut self) -> Result<(), ChemError> {
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondSpec, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, PendingRing> = BTreeMap::new();

        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(ChemError::UnbalancedParentheses { position: start });
                    };
                    if pending.is_some() {
                        return Err(ChemError::InvalidBond {
                            position: start,
                            message: "bond symbol before branch".into(),
                        });
                    }
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    let Some((p, _)) = branches.pop() else {
                        return Err(ChemError::UnbalancedParentheses { position: start });
                    };
                    if let Some((_, at)) = pending {
                        return Err(ChemError::InvalidBond {
                            position: at,
                            message: "dangling bond".into(),
                        });
                    }
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if let Some((_, at)) = pending {
                        return Err(ChemError::InvalidBond {
                            position: at,
                            message: "dangling bond".into(),
                        });
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(ChemError::InvalidBond {
                            position: start,
                            message: "two consecutive bond symbols".into(),
                        });
                    }
                    let order = match c {
                        b'=' => BondOrder::Double,
                        b'#' => BondOrder::Triple,
                        b':' => BondOrder::Aromatic,
                        b'/' | b'\\' => {
                            self.saw_stereo = true;
                            BondOrder::Single
                        }
                        _ => BondOrder::Single,
                    };
                    pending = Some((BondSpec::Explicit(order), start));
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(self.unknown(start, 1));
                    };
                    let digit = self.ring_number()?;
                    let spec = pending.take().map(|(s, _)| s).unwrap_or(BondSpec::Implicit);
                    if let Some(open) = rings.remove(&digit) {
                        if open.atom == p {
                            return Err(ChemError::InvalidBond {
                                position: start,
                                message: "ring closure to the same atom".into(),
                            });
                        }
                        let spec = match (open.bond, spec) {
                            (BondSpec::Explicit(a), BondSpec::Explicit(b)) if a != b => {
                                return Err(ChemError::InvalidBond {
                                    position: start,
                                    message: "conflicting ring closure bond orders".into(),
                                })
                            }
                            (BondSpec::Explicit(a), _) | (_, BondSpec::Explicit(a)) => BondSpec::Explicit(a),
                            _ => BondSpec::Implicit,
                        };
                        self.add_bond(open.atom, p, spec, start)?;
                    } else {
                        rings.insert(
                            digit,
                            PendingRing {
                                atom: p,
                                bond: spec,
                                position: start,
                            },
                        );
                    }
                }
                b'[' => {
                    let idx = self.bracket_atom()?;
                    if let Some(p) = prev {
                        let spec = pending.take().map(|(s, _)| s).unwrap_or(BondSpec::Implicit);
                        self.add_bond(p, idx, spec, start)?;
                    } else if let Some((_, at)) = pending {
                        return Err(ChemError::InvalidBond {
                            position: at,
                            message: "bond without a preceding atom".into(),
                        });
                    }
                    prev = Some(idx);
                }
                _ => {
                    let idx = self.organic_atom()?;
                    if let Some(p) = prev {
                        let spec = pending.take().map(|(s, _)| s).unwrap_or(BondSpec::Implicit);
                        self.add_bond(p, idx, spec, start)?;
                    } else if let Some((_, at)) = pending {
                        return Err(ChemError::InvalidBond {
                            position: at,
                            message: "bond without a preceding atom".into(),
                        });
                    }
                    prev = Some(idx);
                }
            }
        }

        if let Some((_, at)) = pending {
            return Err(ChemError::InvalidBond {
                position: at,
                message: "dangling bond".into(),
            });
        }
        if let Some((_, at)) = branches.first() {
            return Err(ChemError::UnbalancedParentheses { position: *at });
        }
        if let Some((&digit, open)) = rings.iter().next() {
            return Err(ChemError::UnclosedRing {
                position: open.position,
                digit,
            });
        }
        Ok(())
    }

    fn ring_number(&mut self) -> Result<u32, ChemError> {
        let start = self.pos;
        if self.text[self.pos] == b'%' {
            let digits = self.text.get(self.pos + 1..self.pos + 3);
            match digits {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(((d[0] - b'0') * 10 + (d[1] - b'0')) as u32)
                }
                _ => Err(self.unknown(start, 3)),
            }
        } else {
            self.pos += 1;
            Ok((self.text[start] - b'0') as u32)
        }
    }

    fn add_bond(&mut self, a: usize, b: usize, spec: BondSpec, position: usize) -> Result<(), ChemError> {
        if self.bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            return Err(ChemError::InvalidBond {
                position,
                message: "duplicate bond".into(),
            });
        }
        let order = match spec {
            BondSpec::Explicit(o) => o,
            BondSpec::Implicit if self.atoms[a].aromatic && self.atoms[b].aromatic => BondOrder::Aromatic,
            BondSpec::Implicit => BondOrder::Single,
        };
        self.bonds.push(Bond { a, b, order });
        Ok(())
    }

    fn push_atom(&mut self, atom: Atom, bracket: bool, position: usize) -> usize {
        self.atoms.push(atom);
        self.bracket.push(bracket);
        self.positions.push(position);
        self.atoms.len() - 1
    }

    fn organic_atom(&mut self) -> Result<usize, ChemError> {
        let start = self.pos;
        let c = self.text[start];
        let next = self.text.get(start + 1).copied();
        let (symbol, aromatic, len) = match (c, next) {
            (b'C', Some(b'l')) => ("Cl", false, 2),
            (b'B', Some(b'r')) => ("Br", false, 2),
            (b'B', _) => ("B", false, 1),
            (b'C', _) => ("C", false, 1),
            (b'N', _) => ("N", false, 1),
            (b'O', _) => ("O", false, 1),
            (b'P', _) => ("P", false, 1),
            (b'S', _) => ("S", false, 1),
            (b'F', _) => ("F", false, 1),
            (b'I', _) => ("I", false, 1),
            (b'b', _) => ("B", true, 1),
            (b'c', _) => ("C", true, 1),
            (b'n', _) => ("N", true, 1),
            (b'o', _) => ("O", true, 1),
            (b'p', _) => ("P", true, 1),
            (b's', _) => ("S", true, 1),
            _ => return Err(self.unknown(start, 1)),
        };
        self.pos += len;
        let mut atom = Atom::new(Element::from_symbol(symbol).expect("organic subset symbol"));
        atom.aromatic = aromatic;
        Ok(self.push_atom(atom, false, start))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            std::str::from_utf8(&self.text[start..self.pos]).ok()?.parse().ok()
        }
    }

    fn bracket_atom(&mut self) -> Result<usize, ChemError> {
        let start = self.pos;
        self.pos += 1;
        if self.number().is_some() {
            log::debug!("isotope label at position {start} ignored");
        }
        let sym_start = self.pos;
        let (element, aromatic) = self.bracket_symbol().ok_or_else(|| self.unknown(sym_start, 2))?;
        // chirality
        while self.peek() == Some(b'@') {
            self.saw_stereo = true;
            self.pos += 1;
        }
        let mut hydrogens = 0u8;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hydrogens = self.number().unwrap_or(1).min(u8::MAX as u32) as u8;
        }
        let mut charge: i32 = 0;
        if let Some(sign @ (b'+' | b'-')) = self.peek() {
            let unit = if sign == b'+' { 1 } else { -1 };
            self.pos += 1;
            if let Some(n) = self.number() {
                charge = unit * n as i32;
            } else {
                charge = unit;
                while self.peek() == Some(sign) {
                    charge += unit;
                    self.pos += 1;
                }
            }
        }
        let mut atom_map = None;
        if self.peek() == Some(b':') {
            self.pos += 1;
            let at = self.pos;
            atom_map = Some(self.number().ok_or_else(|| self.unknown(at, 1))?);
        }
        if self.peek() != Some(b']') {
            return Err(self.unknown(self.pos, 1));
        }
        self.pos += 1;
        if !(-8..=8).contains(&charge) {
            return Err(self.unknown(start, self.pos - start));
        }
        let atom = Atom {
            element,
            charge: charge as i8,
            hydrogens,
            aromatic,
            atom_map: atom_map.filter(|&m| m != 0),
        };
        Ok(self.push_atom(atom, true, start))
    }

    fn bracket_symbol(&mut self) -> Option<(Element, bool)> {
        let rest = &self.text[self.pos..];
        for (lower, sym) in [(&b"se"[..], "Se"), (b"as", "As")] {
            if rest.starts_with(lower) {
                self.pos += 2;
                return Some((Element::from_symbol(sym)?, true));
            }
        }
        let c = *rest.first()?;
        if c.is_ascii_lowercase() {
            let sym = (c as char).to_ascii_uppercase().to_string();
            let el = Element::from_symbol(&sym)?;
            if !el.can_be_aromatic() {
                return None;
            }
            self.pos += 1;
            return Some((el, true));
        }
        if !c.is_ascii_uppercase() {
            return None;
        }
        if let Some(&c2) = rest.get(1) {
            if c2.is_ascii_lowercase() {
                let two = format!("{}{}", c as char, c2 as char);
                if let Some(el) = Element::from_symbol(&two) {
                    self.pos += 2;
                    return Some((el, false));
                }
            }
        }
        let el = Element::from_symbol(&(c as char).to_string())?;
        self.pos += 1;
        Some((el, false))
    }

    fn finish(self) -> Result<Molecule, ChemError> {
        let Parser {
            atoms,
            bracket,
            positions,
            bonds,
            ..
        } = self;
        let mut mol = Molecule::from_parts(atoms, bonds).map_err(|e| ChemError::InvalidBond {
            position: 0,
            message: e.to_string(),
        })?;
        for i in 0..mol.num_atoms() {
            if bracket[i] {
                continue;
            }
            let atom = mol.atom(i);
            let orders: Vec<BondOrder> = mol.neighbors(i).iter().map(|&(_, b)| mol.bonds()[b].order).collect();
            let h = implicit_hydrogens(atom.element, atom.aromatic, orders.iter().copied()).ok_or_else(|| {
                ChemError::ValenceViolation {
                    position: positions[i],
                    element: atom.element.symbol().to_string(),
                }
            })?;
            mol.atoms_mut()[i].hydrogens = h;
        }
        mol.sanitize().map_err(|e| match e {
            ChemError::ValenceViolation { position, element } => ChemError::ValenceViolation {
                position: positions[position],
                element,
            },
            other => other,
        })?;
        Ok(mol)
    }
}
