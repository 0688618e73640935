use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::chem::{BondOrder, Molecule};

use super::ReactionRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRule {
    MaxReactants,
    SingleProduct,
    ReactantAtomRange,
    MinProductAtoms,
    ReactantProductRatio,
    MaxUnmappedReactantAtoms,
    ContributingReactants,
    MaxOrphanAtoms,
    MaxUnmappedMcsAtoms,
    ProductNotInReactants,
    NoMappedUnmappedAromaticBond,
}

impl FilterRule {
    pub const ALL: [FilterRule; 11] = [
        FilterRule::MaxReactants,
        FilterRule::SingleProduct,
        FilterRule::ReactantAtomRange,
        FilterRule::MinProductAtoms,
        FilterRule::ReactantProductRatio,
        FilterRule::MaxUnmappedReactantAtoms,
        FilterRule::ContributingReactants,
        FilterRule::MaxOrphanAtoms,
        FilterRule::MaxUnmappedMcsAtoms,
        FilterRule::ProductNotInReactants,
        FilterRule::NoMappedUnmappedAromaticBond,
    ];

    pub fn description(self) -> &'static str {
        match self {
            FilterRule::MaxReactants => "at most 3 reactants",
            FilterRule::SingleProduct => "exactly 1 product",
            FilterRule::ReactantAtomRange => "reactant atoms in [10, 70]",
            FilterRule::MinProductAtoms => "at least 8 product atoms",
            FilterRule::ReactantProductRatio => "reactant atoms below 4x product atoms",
            FilterRule::MaxUnmappedReactantAtoms => "fewer than 30 unmapped reactant atoms",
            FilterRule::ContributingReactants => "some reactant contributes atoms",
            FilterRule::MaxOrphanAtoms => "at most 1 orphan atom",
            FilterRule::MaxUnmappedMcsAtoms => "at most 10 unmapped atoms in the common substructure",
            FilterRule::ProductNotInReactants => "product not among reactants",
            FilterRule::NoMappedUnmappedAromaticBond => "no aromatic bond between mapped and unmapped atoms",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterReport {
    pub id: String,
    /// Every rule with its outcome, in rule order.
    pub rules: Vec<(FilterRule, bool)>,
    /// Indices (in the input record) of reactants removed for contributing
    /// no product atoms.
    pub removed_reactants: Vec<usize>,
}

impl FilterReport {
    pub fn accepted(&self) -> bool {
        self.rules.iter().all(|&(_, ok)| ok)
    }

    pub fn failed(&self) -> Vec<FilterRule> {
        self.rules.iter().filter(|(_, ok)| !ok).map(|(r, _)| *r).collect()
    }

    pub fn passed(&self, rule: FilterRule) -> bool {
        self.rules.iter().any(|&(r, ok)| r == rule && ok)
    }
}

fn mapped(m: Option<u32>) -> Option<u32> {
    m.filter(|&x| x != 0)
}

fn map_set(ms: &[Molecule]) -> BTreeSet<u32> {
    ms.iter()
        .flat_map(|m| m.atoms().iter().filter_map(|a| mapped(a.atom_map)))
        .collect()
}

fn heavy_atoms(ms: &[Molecule]) -> usize {
    ms.iter().map(Molecule::heavy_atom_count).sum()
}

/// Atoms of `side` carrying a map number absent from `other`.
fn orphans(side: &[Molecule], other: &BTreeSet<u32>) -> usize {
    side.iter()
        .flat_map(|m| m.atoms())
        .filter(|a| mapped(a.atom_map).is_some_and(|x| !other.contains(&x)))
        .count()
}

/// Unmapped atoms in the common substructure grown from the map
/// correspondence: starting at atom pairs sharing a map number, unmatched
/// neighbours with equal element and bond order are paired greedily; pairs
/// involving an unmapped atom are counted.
pub fn unmapped_mcs_atoms(reactants: &[Molecule], product: &Molecule) -> usize {
    let mut where_r: std::collections::HashMap<u32, (usize, usize)> = std::collections::HashMap::new();
    for (mi, m) in reactants.iter().enumerate() {
        for (i, a) in m.atoms().iter().enumerate() {
            if let Some(x) = mapped(a.atom_map) {
                where_r.insert(x, (mi, i));
            }
        }
    }
    let mut used_p = vec![false; product.num_atoms()];
    let mut used_r: HashSet<(usize, usize)> = HashSet::new();
    let mut queue: Vec<(usize, (usize, usize))> = Vec::new();
    for (p, a) in product.atoms().iter().enumerate() {
        if let Some(&r) = mapped(a.atom_map).and_then(|x| where_r.get(&x)) {
            used_p[p] = true;
            used_r.insert(r);
            queue.push((p, r));
        }
    }
    let mut count = 0;
    let mut head = 0;
    while head < queue.len() {
        let (p, (mi, ri)) = queue[head];
        head += 1;
        let rm = &reactants[mi];
        for &(pn, pb) in product.neighbors(p) {
            if used_p[pn] {
                continue;
            }
            let pa = product.atom(pn);
            let order = product.bonds()[pb].order;
            let partner = rm.neighbors(ri).iter().find(|&&(rn, rb)| {
                !used_r.contains(&(mi, rn))
                    && rm.atom(rn).element == pa.element
                    && rm.bonds()[rb].order == order
                    && (mapped(pa.atom_map).is_none() || mapped(rm.atom(rn).atom_map).is_none())
            });
            if let Some(&(rn, _)) = partner {
                used_p[pn] = true;
                used_r.insert((mi, rn));
                count += 1;
                queue.push((pn, (mi, rn)));
            }
        }
    }
    count
}

fn aromatic_mapped_unmapped(ms: &[Molecule]) -> bool {
    ms.iter().any(|m| {
        m.bonds().iter().any(|b| {
            b.order == BondOrder::Aromatic && (mapped(m.atom(b.a).atom_map).is_some() != mapped(m.atom(b.b).atom_map).is_some())
        })
    })
}

/// Applies the reaction filters. Non-contributing reactants are removed
/// first; every rule is then evaluated on the modified record and
/// reported, and the record is accepted when all pass.
pub fn filter_reaction(r: &ReactionRecord) -> (bool, ReactionRecord, FilterReport) {
    let product_maps = map_set(&r.products);
    let mut modified = r.clone();
    let mut removed = Vec::new();
    let mut kept = Vec::new();
    for (i, m) in r.reactants.iter().enumerate() {
        if m.atoms().iter().any(|a| mapped(a.atom_map).is_some_and(|x| product_maps.contains(&x))) {
            kept.push(m.clone());
        } else {
            removed.push(i);
        }
    }
    modified.reactants = kept;
    let reac = &modified.reactants;
    let prods = &modified.products;
    let reactant_maps = map_set(reac);
    let r_atoms = heavy_atoms(reac);
    let p_atoms = heavy_atoms(prods);
    let unmapped_r = reac
        .iter()
        .flat_map(|m| m.atoms())
        .filter(|a| mapped(a.atom_map).is_none())
        .count();
    let orphan = orphans(reac, &product_maps) + orphans(prods, &reactant_maps);
    let mcs = if prods.len() == 1 { unmapped_mcs_atoms(reac, &prods[0]) } else { 0 };
    let reactant_set: HashSet<String> = reac.iter().map(|m| m.without_maps().canonical_smiles().to_string()).collect();
    let product_in_reactants = prods
        .iter()
        .any(|p| reactant_set.contains(p.without_maps().canonical_smiles()));
    let aromatic = aromatic_mapped_unmapped(reac) || aromatic_mapped_unmapped(prods);

    let rules = vec![
        (FilterRule::MaxReactants, reac.len() <= 3),
        (FilterRule::SingleProduct, prods.len() == 1),
        (FilterRule::ReactantAtomRange, (10..=70).contains(&r_atoms)),
        (FilterRule::MinProductAtoms, p_atoms >= 8),
        (FilterRule::ReactantProductRatio, r_atoms < 4 * p_atoms),
        (FilterRule::MaxUnmappedReactantAtoms, unmapped_r < 30),
        (FilterRule::ContributingReactants, !reac.is_empty()),
        (FilterRule::MaxOrphanAtoms, orphan <= 1),
        (FilterRule::MaxUnmappedMcsAtoms, mcs <= 10),
        (FilterRule::ProductNotInReactants, !product_in_reactants),
        (FilterRule::NoMappedUnmappedAromaticBond, !aromatic),
    ];
    let report = FilterReport {
        id: r.id.clone(),
        rules,
        removed_reactants: removed,
    };
    (report.accepted(), modified, report)
}
