//! Shared fixture builders. Reactions are produced in the forward
//! direction by explicit graph edits on marker-mapped reactants, so the
//! recorded reactants and mapping never pass through template code.

#![allow(dead_code)]

pub mod filter_cases;
pub mod route_corpus;
pub mod synthetic;

use std::collections::BTreeMap;

use retroplan::chem::{Atom, Bond, BondOrder, Molecule};

#[derive(Debug, Clone, Copy)]
pub enum Edit {
    Bond(u32, u32, BondOrder),
    Unbond(u32, u32),
    Order(u32, u32, BondOrder),
    Charge(u32, i8),
    Hydrogens(u32, u8),
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    /// Fully mapped reaction SMILES `reactants>>product`.
    pub rxn: String,
    /// Canonical unmapped reactants, sorted.
    pub reactants: Vec<String>,
    /// Canonical unmapped product.
    pub product: String,
}

/// Applies `edits` to the marker-mapped reactants (maps ≥ 900 name the
/// reacting atoms) and keeps the component holding marker `keep` as the
/// product. All atoms end up mapped `1..n` in reactant order.
pub fn forward(name: &str, marked: &str, edits: &[Edit], keep: u32) -> Fixture {
    let mol = Molecule::parse(marked).unwrap_or_else(|e| panic!("{name}: {e}"));
    let mut marker: BTreeMap<u32, usize> = BTreeMap::new();
    for (i, a) in mol.atoms().iter().enumerate() {
        if let Some(m) = a.atom_map {
            marker.insert(m, i);
        }
    }
    let at = |m: u32| *marker.get(&m).unwrap_or_else(|| panic!("{name}: marker {m}"));
    let mut atoms: Vec<Atom> = mol.atoms().to_vec();
    for (i, a) in atoms.iter_mut().enumerate() {
        a.atom_map = Some(i as u32 + 1);
    }
    let reactant_side = Molecule::from_parts(atoms.clone(), mol.bonds().to_vec()).unwrap();

    let mut bonds: Vec<Bond> = mol.bonds().to_vec();
    let valence = |bonds: &[Bond], i: usize| -> i32 {
        bonds
            .iter()
            .filter(|b| b.a == i || b.b == i)
            .map(|b| b.order.valence() as i32)
            .sum()
    };
    let find = |bonds: &[Bond], a: usize, b: usize| {
        bonds
            .iter()
            .position(|x| (x.a == a && x.b == b) || (x.a == b && x.b == a))
    };
    let mut pinned_h: BTreeMap<usize, u8> = BTreeMap::new();
    let mut touched = Vec::new();
    let old: Vec<i32> = (0..atoms.len()).map(|i| valence(&bonds, i)).collect();
    for e in edits {
        match *e {
            Edit::Bond(x, y, o) => {
                bonds.push(Bond { a: at(x), b: at(y), order: o });
                touched.extend([at(x), at(y)]);
            }
            Edit::Unbond(x, y) => {
                let k = find(&bonds, at(x), at(y)).unwrap_or_else(|| panic!("{name}: no bond {x}-{y}"));
                bonds.remove(k);
                touched.extend([at(x), at(y)]);
            }
            Edit::Order(x, y, o) => {
                let k = find(&bonds, at(x), at(y)).unwrap_or_else(|| panic!("{name}: no bond {x}-{y}"));
                bonds[k].order = o;
                touched.extend([at(x), at(y)]);
            }
            Edit::Charge(x, c) => atoms[at(x)].charge = c,
            Edit::Hydrogens(x, h) => {
                pinned_h.insert(at(x), h);
            }
        }
    }
    touched.sort_unstable();
    touched.dedup();
    for &i in &touched {
        let h = atoms[i].hydrogens as i32 + old[i] - valence(&bonds, i);
        assert!(h >= 0, "{name}: negative H on atom {i}");
        atoms[i].hydrogens = h as u8;
    }
    for (&i, &h) in &pinned_h {
        atoms[i].hydrogens = h;
    }
    let edited = Molecule::from_parts(atoms, bonds).unwrap();
    let comp = edited
        .components()
        .into_iter()
        .find(|c| c.contains(&at(keep)))
        .unwrap();
    let sub = edited.subgraph(&comp);
    let product = Molecule::from_parts_sanitized(sub.atoms().to_vec(), sub.bonds().to_vec())
        .unwrap_or_else(|e| panic!("{name}: product invalid: {e}"));

    let mut reactants: Vec<String> = reactant_side
        .split_components()
        .iter()
        .map(|m| m.canonical_smiles().to_string())
        .collect();
    reactants.sort();
    let reactant_text: Vec<String> = reactant_side
        .split_components()
        .iter()
        .map(|m| m.to_mapped_smiles())
        .collect();
    Fixture {
        name: name.to_string(),
        rxn: format!("{}>>{}", reactant_text.join("."), product.to_mapped_smiles()),
        reactants,
        product: product.canonical_smiles().to_string(),
    }
}

use BondOrder::Single;
use Edit::*;

const ACIDS: &[&str] = &[
    "C[C:901](=O)[OH:902]",
    "c1ccc(cc1)[C:901](=O)[OH:902]",
    "CC(C)[C:901](=O)[OH:902]",
    "O=[C:901]([OH:902])c1ccncc1",
    "COc1ccc(cc1)[C:901](=O)[OH:902]",
];
const AMINES: &[&str] = &["[NH2:903]C", "[NH2:903]Cc1ccccc1", "C1CC[NH:903]CC1", "[NH2:903]c1ccccc1"];
const ALCOHOLS: &[&str] = &["[OH:903]C", "[OH:903]CC", "[OH:903]Cc1ccccc1"];
const ARYL_BROMIDES: &[&str] = &["[Br:902][c:901]1ccccc1", "[Br:902][c:901]1ccc(C)cc1", "[Br:902][c:901]1ccncc1"];
const BORONIC: &[&str] = &["O[B:904](O)[c:903]1ccccc1", "O[B:904](O)[c:903]1ccc(OC)cc1"];
const ALKYL_BROMIDES: &[&str] = &["[Br:902][CH2:901]C", "[Br:902][CH2:901]c1ccccc1", "[Br:902][CH2:901]CC#N"];
const SECONDARY_AMINES: &[&str] = &["C1CC[NH:903]CC1", "C1COCC[NH:903]1", "C[NH:903]C"];
const PHENOLS: &[&str] = &["[OH:903]c1ccccc1", "[OH:903]c1ccc(Cl)cc1"];
const ALDEHYDES: &[&str] = &["[CH:901](=[O:902])c1ccccc1", "[CH:901](=[O:902])C1CCCCC1", "[CH:901](=[O:902])c1ccco1"];
const SULFONYL: &[&str] = &["Cc1ccc(cc1)[S:901](=O)(=O)[Cl:902]", "C[S:901](=O)(=O)[Cl:902]"];
const KETONES: &[&str] = &["C[C:901](=[O:902])c1ccccc1", "CC[C:901](=[O:902])CC", "[O:902]=[C:901]1CCCCC1"];
const BOC_AMINES: &[&str] = &[
    "CC(C)(C)O[C:902](=O)[NH:901]Cc1ccccc1",
    "CC(C)(C)O[C:902](=O)[N:901]1CCCCC1",
    "CC(C)(C)O[C:902](=O)[NH:901]c1ccccc1",
];
const METHYL_ESTERS: &[&str] = &["CC(=O)[O:901][CH3:902]", "c1ccccc1C(=O)[O:901][CH3:902]", "CCCC(=O)[O:901][CH3:902]"];
const NITRO: &[&str] = &["[O-:903][N+:901](=[O:902])c1ccccc1", "[O-:903][N+:901](=[O:902])c1ccc(C)cc1"];

/// The curated round-trip corpus: twelve reaction classes, 60+ reactions.
pub fn reaction_fixtures() -> Vec<Fixture> {
    let mut out = Vec::new();
    for (i, acid) in ACIDS.iter().enumerate() {
        for (j, amine) in AMINES.iter().enumerate() {
            out.push(forward(
                &format!("amide-{i}-{j}"),
                &format!("{acid}.{amine}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, acid) in ACIDS.iter().take(3).enumerate() {
        for (j, alcohol) in ALCOHOLS.iter().enumerate() {
            out.push(forward(
                &format!("ester-{i}-{j}"),
                &format!("{acid}.{alcohol}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, br) in ARYL_BROMIDES.iter().enumerate() {
        for (j, b) in BORONIC.iter().enumerate() {
            out.push(forward(
                &format!("suzuki-{i}-{j}"),
                &format!("{br}.{b}"),
                &[Unbond(901, 902), Unbond(903, 904), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, br) in ALKYL_BROMIDES.iter().enumerate() {
        for (j, amine) in SECONDARY_AMINES.iter().enumerate() {
            out.push(forward(
                &format!("n-alkylation-{i}-{j}"),
                &format!("{br}.{amine}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
        for (j, ph) in PHENOLS.iter().enumerate() {
            out.push(forward(
                &format!("ether-{i}-{j}"),
                &format!("{br}.{ph}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, ald) in ALDEHYDES.iter().enumerate() {
        for (j, amine) in AMINES.iter().take(3).enumerate() {
            out.push(forward(
                &format!("reductive-amination-{i}-{j}"),
                &format!("{ald}.{amine}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, s) in SULFONYL.iter().enumerate() {
        for (j, amine) in AMINES.iter().enumerate() {
            out.push(forward(
                &format!("sulfonamide-{i}-{j}"),
                &format!("{s}.{amine}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, k) in KETONES.iter().enumerate() {
        out.push(forward(&format!("reduction-{i}"), k, &[Order(901, 902, Single)], 901));
    }
    for (i, b) in BOC_AMINES.iter().enumerate() {
        out.push(forward(&format!("boc-removal-{i}"), b, &[Unbond(901, 902)], 901));
    }
    for (i, e) in METHYL_ESTERS.iter().enumerate() {
        out.push(forward(&format!("ester-hydrolysis-{i}"), e, &[Unbond(901, 902)], 901));
    }
    for (i, br) in ARYL_BROMIDES.iter().enumerate() {
        for (j, amine) in AMINES.iter().take(2).enumerate() {
            out.push(forward(
                &format!("buchwald-{i}-{j}"),
                &format!("{br}.{amine}"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            ));
        }
    }
    for (i, n) in NITRO.iter().enumerate() {
        out.push(forward(
            &format!("nitro-reduction-{i}"),
            n,
            &[Unbond(901, 902), Unbond(901, 903), Charge(901, 0), Hydrogens(901, 2)],
            901,
        ));
    }
    out
}
