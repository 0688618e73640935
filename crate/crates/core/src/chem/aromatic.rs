//! Hückel-lite aromaticity: five- and six-membered rings of eligible atoms
//! with alternating single/double bonds become aromatic. Fused systems are
//! handled by iterating, so a ring whose atoms get their pi bond from an
//! already aromatic neighbour ring also qualifies. Weaker than a full
//! toolkit model; applied identically to molecules and patterns.

use super::graph::{build_adjacency, small_cycles};
use super::{BondOrder, Element, Molecule};

pub(crate) struct RingView {
    pub element: Vec<Option<Element>>,
    pub charge: Vec<i8>,
    pub aromatic: Vec<bool>,
    /// Atom can donate a lone pair as the heteroatom of a five-membered ring.
    pub donor: Vec<bool>,
    pub bonds: Vec<(usize, usize, Option<BondOrder>)>,
}

pub(crate) struct Perceived {
    pub atoms: Vec<bool>,
    pub bonds: Vec<bool>,
}

pub(crate) fn perceive(view: &RingView) -> Perceived {
    let n = view.element.len();
    let adj = build_adjacency(n, view.bonds.iter().map(|&(a, b, _)| (a, b))).expect("valid graph");
    let usable = |b: usize| {
        matches!(
            view.bonds[b].2,
            Some(BondOrder::Single | BondOrder::Double | BondOrder::Aromatic)
        )
    };
    let rings = small_cycles(&adj, 5, 6, usable);
    let mut atom_arom = view.aromatic.clone();
    let mut bond_arom: Vec<bool> = view.bonds.iter().map(|b| b.2 == Some(BondOrder::Aromatic)).collect();
    let bond_index = |a: usize, b: usize| adj[a].iter().find(|&&(x, _)| x == b).map(|&(_, bi)| bi).unwrap();

    let mut changed = true;
    while changed {
        changed = false;
        for ring in &rings {
            let len = ring.len();
            let ring_bonds: Vec<usize> = (0..len).map(|k| bond_index(ring[k], ring[(k + 1) % len])).collect();
            if ring_bonds.iter().all(|&b| bond_arom[b]) {
                continue;
            }
            let mut donors = 0;
            let mut ok = true;
            for (k, &a) in ring.iter().enumerate() {
                if view.charge[a] != 0 {
                    ok = false;
                    break;
                }
                let doubles: Vec<usize> = adj[a]
                    .iter()
                    .filter(|&&(_, b)| !bond_arom[b] && view.bonds[b].2 == Some(BondOrder::Double))
                    .map(|&(_, b)| b)
                    .collect();
                let internal = doubles
                    .iter()
                    .any(|b| *b == ring_bonds[k] || *b == ring_bonds[(k + len - 1) % len]);
                let pi_element = matches!(view.element[a], Some(e) if e == Element::C || e == Element::N);
                let pi = pi_element && doubles.len() == 1 && internal
                    || pi_element && doubles.is_empty() && atom_arom[a];
                if pi {
                    continue;
                }
                if len == 5 && doubles.is_empty() && view.donor[a] {
                    donors += 1;
                    continue;
                }
                ok = false;
                break;
            }
            let expected_donors = if len == 5 { 1 } else { 0 };
            if ok && donors == expected_donors {
                for &b in &ring_bonds {
                    bond_arom[b] = true;
                }
                for &a in ring {
                    atom_arom[a] = true;
                }
                changed = true;
            }
        }
    }
    Perceived {
        atoms: atom_arom,
        bonds: bond_arom,
    }
}

pub(crate) fn perceive_molecule(mol: &mut Molecule) {
    let view = RingView {
        element: mol.atoms().iter().map(|a| Some(a.element)).collect(),
        charge: mol.atoms().iter().map(|a| a.charge).collect(),
        aromatic: mol.atoms().iter().map(|a| a.aromatic).collect(),
        donor: (0..mol.num_atoms())
            .map(|i| {
                let a = mol.atom(i);
                match a.element.0 {
                    7 | 15 => a.hydrogens >= 1 || mol.degree(i) == 3,
                    8 | 16 | 34 => mol.degree(i) == 2,
                    _ => false,
                }
            })
            .collect(),
        bonds: mol.bonds().iter().map(|b| (b.a, b.b, Some(b.order))).collect(),
    };
    let result = perceive(&view);
    for (i, arom) in result.atoms.iter().enumerate() {
        if *arom && !mol.atom(i).aromatic {
            mol.atoms_mut()[i].aromatic = true;
        }
    }
    for (bi, arom) in result.bonds.iter().enumerate() {
        if *arom && mol.bonds()[bi].order != BondOrder::Aromatic {
            mol.bonds_mut()[bi].order = BondOrder::Aromatic;
        }
    }
}
