use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::chem::{find_matches_with_classes, Atom, Bond, BondOrder, Molecule};

use super::{RetroTemplate, TemplateError};

/// Reactants produced by one template application, sorted and
/// deduplicated by canonical SMILES.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ReactantSet {
    molecules: Vec<Molecule>,
}

impl ReactantSet {
    pub fn new(mut molecules: Vec<Molecule>) -> ReactantSet {
        molecules.sort_by(|a, b| a.canonical_smiles().cmp(b.canonical_smiles()));
        molecules.dedup();
        ReactantSet { molecules }
    }

    pub fn molecules(&self) -> &[Molecule] {
        &self.molecules
    }

    pub fn smiles(&self) -> Vec<String> {
        self.molecules.iter().map(|m| m.canonical_smiles().to_string()).collect()
    }

    pub fn len(&self) -> usize {
        self.molecules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.molecules.is_empty()
    }

    pub fn contains(&self, m: &Molecule) -> bool {
        self.molecules.contains(m)
    }
}

impl fmt::Debug for ReactantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.smiles()).finish()
    }
}

impl fmt::Display for ReactantSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.smiles().join("."))
    }
}

impl Serialize for ReactantSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.smiles().serialize(s)
    }
}

/// One reactant set per distinct match site of the product pattern, in
/// match order. Sites whose rewrite breaks valence rules are skipped.
pub fn apply_template(t: &RetroTemplate, product: &Molecule) -> Vec<ReactantSet> {
    let matches = find_matches_with_classes(t.product_pattern(), product, t.site_classes());
    let mut out = Vec::with_capacity(matches.len());
    for m in matches {
        match rewrite(t, product, &m.atoms) {
            Ok(set) => out.push(set),
            Err(e) => log::debug!("skipping site {:?} of {}: {e}", m.atoms, t.source_smarts()),
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Origin {
    /// Molecule atom kept as is.
    Carried,
    /// Molecule atom matched by a mapped pattern atom: (reactant pattern, atom).
    Mapped(usize, usize),
    Deleted,
}

/// Rewrites one match site into a reactant set.
pub(crate) fn rewrite(t: &RetroTemplate, mol: &Molecule, image: &[usize]) -> Result<ReactantSet, TemplateError> {
    let conflict = |m: &str| TemplateError::RewriteConflict(m.to_string());
    let product = t.product_pattern();
    let pmaps = product.atom_maps();
    let n = mol.num_atoms();

    // where each reactant-side map lives
    let mut reactant_of_map: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (ri, r) in t.reactant_patterns().iter().enumerate() {
        for (m, ai) in r.atom_maps() {
            reactant_of_map.insert(m, (ri, ai));
        }
    }
    let mut origin = vec![Origin::Carried; n];
    let mut pattern_of = vec![usize::MAX; n];
    for (p, &a) in image.iter().enumerate() {
        pattern_of[a] = p;
        origin[a] = match product.atoms()[p].atom_map.and_then(|m| reactant_of_map.get(&m)) {
            Some(&(ri, ai)) => Origin::Mapped(ri, ai),
            None => Origin::Deleted,
        };
    }

    let group = carried_groups(t, mol, &origin);

    // atom table: surviving molecule atoms, then new template atoms
    let mut index = vec![usize::MAX; n];
    let mut atoms: Vec<Atom> = Vec::new();
    let mut fixed_h: Vec<bool> = Vec::new();
    let mut old_valence: Vec<Option<u8>> = Vec::new();
    for i in 0..n {
        if origin[i] == Origin::Deleted {
            continue;
        }
        index[i] = atoms.len();
        let mut atom = mol.atom(i).clone();
        atom.atom_map = None;
        let mut h_fixed = false;
        if let Origin::Mapped(ri, ai) = origin[i] {
            let q = &t.reactant_patterns()[ri].atoms()[ai].query;
            if let Some((e, _)) = q.fixed_element() {
                atom.element = e;
            }
            if let Some(ar) = q.fixed_aromatic() {
                atom.aromatic = ar;
            }
            if let Some(c) = q.fixed_charge() {
                atom.charge = c;
            }
            if let Some(h) = q.fixed_hydrogens() {
                atom.hydrogens = h;
                h_fixed = true;
            }
        }
        atoms.push(atom);
        fixed_h.push(h_fixed);
        old_valence.push(Some(mol.bond_valence(i)));
    }
    let mut new_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (ri, r) in t.reactant_patterns().iter().enumerate() {
        for (ai, pa) in r.atoms().iter().enumerate() {
            if pa.atom_map.is_some_and(|m| pmaps.contains_key(&m)) {
                continue;
            }
            let q = &pa.query;
            let (element, _) = q.fixed_element().ok_or_else(|| conflict("new atom without an element"))?;
            let mut atom = Atom::new(element);
            atom.aromatic = q.fixed_aromatic().unwrap_or(false);
            atom.charge = q.fixed_charge().unwrap_or(0);
            atom.hydrogens = q.fixed_hydrogens().unwrap_or(0);
            new_index.insert((ri, ai), atoms.len());
            fixed_h.push(q.fixed_hydrogens().is_some());
            old_valence.push(None);
            atoms.push(atom);
        }
    }
    let mol_atom_of = |ri: usize, ai: usize| -> Option<usize> {
        let m = t.reactant_patterns()[ri].atoms()[ai].atom_map?;
        pmaps.get(&m).map(|&p| image[p])
    };
    let slot = |ri: usize, ai: usize| -> usize {
        match mol_atom_of(ri, ai) {
            Some(x) => index[x],
            None => new_index[&(ri, ai)],
        }
    };

    let mut bonds: Vec<Bond> = Vec::new();
    for b in mol.bonds() {
        let (u, v) = (b.a, b.b);
        let keep = match (origin[u], origin[v]) {
            (Origin::Deleted, _) | (_, Origin::Deleted) => false,
            (Origin::Mapped(ru, au), Origin::Mapped(rv, av)) => {
                let in_template = ru == rv && t.reactant_patterns()[ru].bond_between(au, av).is_some();
                let in_product = product.bond_between(pattern_of[u], pattern_of[v]).is_some();
                !in_template && !in_product && ru == rv
            }
            _ => group[u] == group[v],
        };
        if keep {
            bonds.push(Bond {
                a: index[u],
                b: index[v],
                order: b.order,
            });
        }
    }
    for (ri, r) in t.reactant_patterns().iter().enumerate() {
        for pb in r.bonds() {
            let (a, b) = (slot(ri, pb.a), slot(ri, pb.b));
            let existing = match (mol_atom_of(ri, pb.a), mol_atom_of(ri, pb.b)) {
                (Some(x), Some(y)) => mol.bond_between(x, y).map(|bond| bond.order),
                _ => None,
            };
            let order = pb.query.fixed_order().or(existing).unwrap_or(BondOrder::Single);
            bonds.push(Bond { a, b, order });
        }
    }

    // hydrogens follow the change in bond valence unless pinned
    let mut new_valence = vec![0u8; atoms.len()];
    for b in &bonds {
        new_valence[b.a] += b.order.valence();
        new_valence[b.b] += b.order.valence();
    }
    for i in 0..atoms.len() {
        if fixed_h[i] {
            continue;
        }
        match old_valence[i] {
            Some(old) => {
                let h = atoms[i].hydrogens as i32 + old as i32 - new_valence[i] as i32;
                atoms[i].hydrogens = u8::try_from(h).map_err(|_| conflict("negative hydrogen count"))?;
            }
            None => {
                let atom = &atoms[i];
                atoms[i].hydrogens = atom
                    .element
                    .implicit_hydrogens(atom.charge, new_valence[i] + atom.aromatic as u8)
                    .unwrap_or(0);
            }
        }
    }

    let combined = Molecule::from_parts_sanitized(atoms, bonds).map_err(|e| conflict(&e.to_string()))?;
    let pieces = combined.split_components();
    if pieces.iter().any(|m| m.canonical_smiles() == mol.canonical_smiles()) {
        return Err(conflict("a reactant equals the product"));
    }
    Ok(ReactantSet::new(pieces))
}

/// Reactant-pattern group of every molecule atom: mapped atoms belong to
/// their pattern; carried atoms follow the nearest mapped anchor (ties to
/// the lowest map number); atoms reachable from no anchor get `None`.
fn carried_groups(t: &RetroTemplate, mol: &Molecule, origin: &[Origin]) -> Vec<Option<usize>> {
    let n = mol.num_atoms();
    let mut group: Vec<Option<usize>> = vec![None; n];
    let mut best: Vec<Option<(usize, u32)>> = vec![None; n];
    for i in 0..n {
        let Origin::Mapped(ri, ai) = origin[i] else { continue };
        group[i] = Some(ri);
        let map = t.reactant_patterns()[ri].atoms()[ai].atom_map.unwrap_or(u32::MAX);
        let mut dist = vec![usize::MAX; n];
        dist[i] = 0;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in mol.neighbors(u) {
                if dist[v] != usize::MAX || origin[v] != Origin::Carried {
                    continue;
                }
                dist[v] = dist[u] + 1;
                let cand = (dist[v], map);
                if best[v].is_none_or(|b| cand < b) {
                    best[v] = Some(cand);
                    group[v] = Some(ri);
                }
                queue.push_back(v);
            }
        }
    }
    group
}
