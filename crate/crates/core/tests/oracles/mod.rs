//! Independent reference implementations used as test oracles.

#![allow(dead_code)]

pub mod molset;
pub mod ted;

use std::collections::HashSet;

use rand::rngs::StdRng;
use rand::Rng;

use retroplan::chem::{
    AtomPrimitive, Atom, Bond, BondOrder, BondQuery, Element, Molecule, PatternAtom, PatternBond, PatternGraph,
};

/// Random connected molecule over C/N/O/S with up to two ring closures;
/// `None` when the draw violates valence.
pub fn random_molecule(rng: &mut StdRng, max_atoms: usize) -> Option<Molecule> {
    let n = rng.random_range(1..=max_atoms);
    let elements = [Element::C, Element::C, Element::C, Element::N, Element::O, Element::S];
    let mut atoms: Vec<Atom> = (0..n)
        .map(|_| Atom::new(elements[rng.random_range(0..elements.len())]))
        .collect();
    let mut bonds: Vec<Bond> = Vec::new();
    let order = |rng: &mut StdRng| if rng.random_bool(0.15) { BondOrder::Double } else { BondOrder::Single };
    for i in 1..n {
        let j = rng.random_range(0..i);
        bonds.push(Bond { a: j, b: i, order: order(rng) });
    }
    for _ in 0..rng.random_range(0..=2) {
        if n < 3 {
            break;
        }
        let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
        if a != b && !bonds.iter().any(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a)) {
            bonds.push(Bond { a, b, order: order(rng) });
        }
    }
    for (i, atom) in atoms.iter_mut().enumerate() {
        let used: i32 = bonds
            .iter()
            .filter(|b| b.a == i || b.b == i)
            .map(|b| b.order.valence() as i32)
            .sum();
        let max = match atom.element.0 {
            6 => 4,
            7 => 3,
            _ => 2,
        };
        if used > max {
            return None;
        }
        atom.hydrogens = (max - used) as u8;
    }
    Molecule::from_parts_sanitized(atoms, bonds).ok()
}

fn atom_from(text: &str) -> PatternAtom {
    PatternGraph::parse(text).unwrap().atoms()[0].clone()
}

fn random_query_for(rng: &mut StdRng, mol: Option<(&Molecule, usize)>) -> PatternAtom {
    let symbols = ["C", "N", "O", "c", "#6", "#7", "*", "C,N", "!C", "a", "A"];
    let base = match mol {
        Some((m, i)) if rng.random_bool(0.8) => {
            let a = m.atom(i);
            let sym = a.element.symbol();
            if rng.random_bool(0.3) {
                format!("#{}", a.element.0)
            } else if a.aromatic {
                sym.to_ascii_lowercase()
            } else {
                sym.to_string()
            }
        }
        _ => symbols[rng.random_range(0..symbols.len())].to_string(),
    };
    let mut parts = vec![base];
    if rng.random_bool(0.3) {
        let h = match mol {
            Some((m, i)) if rng.random_bool(0.7) => m.atom(i).hydrogens,
            _ => rng.random_range(0..3),
        };
        parts.push(format!("H{h}"));
    }
    if rng.random_bool(0.2) {
        let d = match mol {
            Some((m, i)) if rng.random_bool(0.7) => m.degree(i) as u8,
            _ => rng.random_range(1..4),
        };
        parts.push(format!("D{d}"));
    }
    if rng.random_bool(0.1) {
        parts.push("+0".to_string());
    }
    atom_from(&format!("[{}]", parts.join(";")))
}

fn random_bond_query(rng: &mut StdRng, actual: Option<BondOrder>) -> BondQuery {
    match rng.random_range(0..5) {
        0 => BondQuery::Any,
        1 => BondQuery::Default,
        2 => BondQuery::Double,
        _ => actual.map(BondQuery::from_order).unwrap_or(BondQuery::Single),
    }
}

/// Random connected pattern of up to `max_atoms`; half the time carved out
/// of `mol` so that matches are likely.
pub fn random_pattern(rng: &mut StdRng, mol: &Molecule, max_atoms: usize) -> PatternGraph {
    let size = rng.random_range(1..=max_atoms.min(mol.num_atoms()).max(1));
    if rng.random_bool(0.6) {
        // grow a connected atom set inside the molecule
        let mut chosen = vec![rng.random_range(0..mol.num_atoms())];
        while chosen.len() < size {
            let frontier: Vec<usize> = chosen
                .iter()
                .flat_map(|&a| mol.neighbors(a).iter().map(|&(b, _)| b))
                .filter(|b| !chosen.contains(b))
                .collect();
            if frontier.is_empty() {
                break;
            }
            chosen.push(frontier[rng.random_range(0..frontier.len())]);
        }
        let atoms = chosen.iter().map(|&i| random_query_for(rng, Some((mol, i)))).collect();
        let mut bonds = Vec::new();
        for (x, &a) in chosen.iter().enumerate() {
            for (y, &b) in chosen.iter().enumerate().skip(x + 1) {
                if let Some(bond) = mol.bond_between(a, b) {
                    bonds.push(PatternBond { a: x, b: y, query: random_bond_query(rng, Some(bond.order)) });
                }
            }
        }
        PatternGraph::new(atoms, bonds).unwrap()
    } else {
        let atoms = (0..size).map(|_| random_query_for(rng, None)).collect();
        let mut bonds = Vec::new();
        for i in 1..size {
            bonds.push(PatternBond { a: rng.random_range(0..i), b: i, query: random_bond_query(rng, None) });
        }
        PatternGraph::new(atoms, bonds).unwrap()
    }
}

fn primitive_holds(kind: &AtomPrimitive, mol: &Molecule, i: usize) -> bool {
    let a = mol.atom(i);
    match kind {
        AtomPrimitive::Element { element, aromatic } => {
            a.element == *element && aromatic.map(|ar| ar == a.aromatic).unwrap_or(true)
        }
        AtomPrimitive::Wildcard => true,
        AtomPrimitive::Aromatic(ar) => a.aromatic == *ar,
        AtomPrimitive::HCount(h) => a.hydrogens == *h,
        AtomPrimitive::Degree(d) => mol.neighbors(i).len() == *d as usize,
        AtomPrimitive::Charge(c) => a.charge == *c,
    }
}

fn atom_ok(p: &PatternAtom, mol: &Molecule, i: usize) -> bool {
    p.query.terms().iter().all(|alts| {
        alts.iter()
            .any(|conj| conj.iter().all(|prim| primitive_holds(&prim.kind, mol, i) != prim.negated))
    })
}

fn bond_ok(q: BondQuery, o: BondOrder) -> bool {
    match q {
        BondQuery::Any => true,
        BondQuery::Default => o == BondOrder::Single || o == BondOrder::Aromatic,
        BondQuery::Single => o == BondOrder::Single,
        BondQuery::Double => o == BondOrder::Double,
        BondQuery::Triple => o == BondOrder::Triple,
        BondQuery::Aromatic => o == BondOrder::Aromatic,
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Orbits of the pattern's automorphism group by exhaustive permutation.
pub fn brute_force_orbits(p: &PatternGraph) -> Vec<usize> {
    let n = p.num_atoms();
    let bond = |a: usize, b: usize| p.bond_between(a, b).map(|x| x.query);
    // the orbit of i is {sigma(i)} over the whole group; label it by its minimum
    let mut orbit: Vec<usize> = (0..n).collect();
    for sigma in permutations(n) {
        let labels_kept = (0..n).all(|i| p.atoms()[i].label() == p.atoms()[sigma[i]].label());
        let bonds_kept = (0..n).all(|i| (0..n).all(|j| bond(i, j) == bond(sigma[i], sigma[j])));
        if labels_kept && bonds_kept {
            for i in 0..n {
                orbit[i] = orbit[i].min(sigma[i]);
            }
        }
    }
    orbit
}

/// All embeddings by exhaustive search, sorted, one per
/// (atom set, orbit assignment).
pub fn brute_force_matches(p: &PatternGraph, mol: &Molecule) -> Vec<Vec<usize>> {
    let np = p.num_atoms();
    let nm = mol.num_atoms();
    let mut all = Vec::new();
    let mut assign = Vec::new();
    fn rec(p: &PatternGraph, mol: &Molecule, assign: &mut Vec<usize>, all: &mut Vec<Vec<usize>>, nm: usize) {
        let k = assign.len();
        if k == p.num_atoms() {
            let edges_ok = p.bonds().iter().all(|b| match mol.bond_between(assign[b.a], assign[b.b]) {
                Some(x) => bond_ok(b.query, x.order),
                None => false,
            });
            if edges_ok {
                all.push(assign.clone());
            }
            return;
        }
        for m in 0..nm {
            if assign.contains(&m) || !atom_ok(&p.atoms()[k], mol, m) {
                continue;
            }
            assign.push(m);
            rec(p, mol, assign, all, nm);
            assign.pop();
        }
    }
    if np > 0 && np <= nm {
        rec(p, mol, &mut assign, &mut all, nm);
    }
    all.sort();
    let orbits = brute_force_orbits(p);
    let mut seen = HashSet::new();
    all.into_iter()
        .filter(|m| {
            let mut key: Vec<(usize, usize)> = m.iter().enumerate().map(|(i, &a)| (a, orbits[i])).collect();
            key.sort();
            seen.insert(key)
        })
        .collect()
}

