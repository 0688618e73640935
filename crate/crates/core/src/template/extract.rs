use std::collections::{BTreeMap, BTreeSet};

use crate::chem::graph::distances_from;
use crate::chem::{AtomPrimitive, AtomQuery, BondQuery, Molecule, PatternAtom, PatternBond, PatternGraph, Primitive};

use super::{RetroTemplate, TemplateError};

pub const DEFAULT_RADIUS: usize = 1;

/// Parses a mapped reaction SMILES `reactants>>product` (an agents block
/// `reactants>agents>product` is accepted and ignored) and extracts its
/// template.
pub fn extract_template_from_smiles(rxn: &str, radius: usize) -> Result<RetroTemplate, TemplateError> {
    let parts: Vec<&str> = rxn.trim().split('>').collect();
    let (reac, prod) = match parts.as_slice() {
        [r, _, p] => (*r, *p),
        _ => return Err(TemplateError::MissingArrow),
    };
    let reactants = Molecule::parse(reac)?.split_components();
    let product = Molecule::parse(prod)?;
    extract_template(&reactants, &product, radius)
}

fn inconsistent(msg: String) -> TemplateError {
    TemplateError::InconsistentMapping(msg)
}

/// Full atom specification: element with aromaticity, H count, degree and
/// charge.
fn atom_spec(mol: &Molecule, i: usize, map: Option<u32>) -> PatternAtom {
    let a = mol.atom(i);
    let query = AtomQuery::all_of([
        Primitive::new(AtomPrimitive::Element {
            element: a.element,
            aromatic: Some(a.aromatic),
        }),
        Primitive::new(AtomPrimitive::HCount(a.hydrogens)),
        Primitive::new(AtomPrimitive::Degree(mol.degree(i) as u8)),
        Primitive::new(AtomPrimitive::Charge(a.charge)),
    ]);
    PatternAtom { query, atom_map: map }
}

fn pattern_on(mol: &Molecule, atoms: &[usize], map: impl Fn(usize) -> Option<u32>) -> PatternGraph {
    let mut pos = vec![usize::MAX; mol.num_atoms()];
    for (k, &i) in atoms.iter().enumerate() {
        pos[i] = k;
    }
    let pattern_atoms = atoms.iter().map(|&i| atom_spec(mol, i, map(i))).collect();
    let bonds = mol
        .bonds()
        .iter()
        .filter(|b| pos[b.a] != usize::MAX && pos[b.b] != usize::MAX)
        .map(|b| PatternBond {
            a: pos[b.a],
            b: pos[b.b],
            query: BondQuery::from_order(b.order),
        })
        .collect();
    PatternGraph::new(pattern_atoms, bonds).expect("subset of a valid molecule")
}

/// Neighbour signature used to detect changed atoms: (neighbour map or 0,
/// bond order code), sorted.
fn signature(mol: &Molecule, i: usize, shared: &BTreeSet<u32>) -> Vec<(u32, u64)> {
    let mut sig: Vec<(u32, u64)> = mol
        .neighbors(i)
        .iter()
        .map(|&(j, b)| {
            let m = mol.atom(j).atom_map.filter(|m| shared.contains(m)).unwrap_or(0);
            (m, mol.bonds()[b].order.code())
        })
        .collect();
    sig.sort_unstable();
    sig
}

/// Extracts a retro template whose centre is the set of product atoms that
/// change bonding, charge, H count or aromaticity, widened by `radius`
/// bonds. Leaving groups (reactant atoms absent from the product) are
/// included whole. Atom maps come out renumbered canonically from 1.
pub fn extract_template(reactants: &[Molecule], product: &Molecule, radius: usize) -> Result<RetroTemplate, TemplateError> {
    let mut product_maps: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, a) in product.atoms().iter().enumerate() {
        if let Some(m) = a.atom_map {
            if product_maps.insert(m, i).is_some() {
                return Err(inconsistent(format!("map {m} repeated in product")));
            }
        }
    }
    let mut reactant_maps: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
    for (mi, mol) in reactants.iter().enumerate() {
        for (i, a) in mol.atoms().iter().enumerate() {
            if let Some(m) = a.atom_map {
                if reactant_maps.insert(m, (mi, i)).is_some() {
                    return Err(inconsistent(format!("map {m} repeated in reactants")));
                }
            }
        }
    }
    if product_maps.is_empty() || !product_maps.keys().any(|m| reactant_maps.contains_key(m)) {
        return Err(TemplateError::NoMappedAtoms);
    }
    let shared: BTreeSet<u32> = product_maps.keys().copied().collect();
    let mut center = Vec::new();
    for (i, a) in product.atoms().iter().enumerate() {
        let Some(m) = a.atom_map else {
            center.push(i);
            continue;
        };
        let &(mi, ri) = reactant_maps
            .get(&m)
            .ok_or_else(|| inconsistent(format!("product map {m} missing from reactants")))?;
        let r = reactants[mi].atom(ri);
        if r.element != a.element {
            return Err(inconsistent(format!("map {m} changes element")));
        }
        let changed = r.charge != a.charge
            || r.hydrogens != a.hydrogens
            || r.aromatic != a.aromatic
            || signature(product, i, &shared) != signature(&reactants[mi], ri, &shared);
        if changed {
            center.push(i);
        }
    }
    if center.is_empty() {
        return Err(TemplateError::EmptyReactionCenter);
    }

    let mut in_template = vec![false; product.num_atoms()];
    for &c in &center {
        for (j, d) in distances_from(product.adjacency(), c).into_iter().enumerate() {
            if d <= radius {
                in_template[j] = true;
            }
        }
    }
    let product_atoms: Vec<usize> = (0..product.num_atoms()).filter(|&i| in_template[i]).collect();
    let template_maps: BTreeSet<u32> = product_atoms
        .iter()
        .filter_map(|&i| product.atom(i).atom_map)
        .collect();
    let product_pattern = pattern_on(product, &product_atoms, |i| product.atom(i).atom_map);

    let mut reactant_patterns = Vec::new();
    for mol in reactants {
        let contributes = mol.atoms().iter().any(|a| a.atom_map.is_some_and(|m| shared.contains(&m)));
        if !contributes {
            continue;
        }
        let atoms: Vec<usize> = (0..mol.num_atoms())
            .filter(|&i| match mol.atom(i).atom_map {
                Some(m) if shared.contains(&m) => template_maps.contains(&m),
                _ => true,
            })
            .collect();
        if atoms.is_empty() {
            continue;
        }
        let keep_map = |i: usize| mol.atom(i).atom_map.filter(|m| template_maps.contains(m));
        reactant_patterns.push(pattern_on(mol, &atoms, keep_map));
    }
    let raw = RetroTemplate::new(product_pattern, reactant_patterns)?;
    RetroTemplate::parse(raw.canonical_smarts())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amide_center_radius_zero() {
        let t = extract_template_from_smiles("[CH3:1][C:2](=[O:3])[OH:4].[CH3:5][NH2:6]>>[CH3:1][C:2](=[O:3])[NH:6][CH3:5]", 0)
            .unwrap();
        // centre: carbonyl C and N; hydroxyl O leaves
        assert_eq!(t.product_pattern().num_atoms(), 2);
        let set = t.apply(&Molecule::parse("CC(=O)NC").unwrap());
        assert_eq!(set.len(), 1);
        assert_eq!(set[0].smiles(), vec!["CC(=O)O".to_string(), "CN".to_string()]);
    }

    #[test]
    fn unchanged_reaction_is_rejected() {
        let err = extract_template_from_smiles("[CH3:1][OH:2]>>[CH3:1][OH:2]", 1).unwrap_err();
        assert_eq!(err, TemplateError::EmptyReactionCenter);
    }

    #[test]
    fn missing_maps_are_reported() {
        assert_eq!(extract_template_from_smiles("CO>>CO", 1).unwrap_err(), TemplateError::NoMappedAtoms);
        assert!(matches!(
            extract_template_from_smiles("[CH3:1][OH:1]>>[CH3:1]O", 1).unwrap_err(),
            TemplateError::InconsistentMapping(_)
        ));
    }

    #[test]
    fn maps_renumbered_from_one() {
        let t = extract_template_from_smiles("[CH3:7][C:8](=[O:9])[OH:4].[CH3:5][NH2:16]>>[CH3:7][C:8](=[O:9])[NH:16][CH3:5]", 1)
            .unwrap();
        let maps: Vec<u32> = t.product_pattern().atom_maps().keys().copied().collect();
        assert_eq!(maps, (1..=maps.len() as u32).collect::<Vec<_>>());
    }
}
