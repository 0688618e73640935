//! Crafted filter suite: for every rule one reaction that passes it and one
//! that fails it, with the expected set of failing rules.

use std::collections::BTreeSet;

use retroplan::chem::{Atom, Molecule};
use retroplan::dataset::{FilterRule, ReactionRecord};

use super::Edit::*;
use super::{forward, Fixture};
use retroplan::chem::BondOrder::Single;

pub struct FilterCase {
    pub name: &'static str,
    pub rule: FilterRule,
    pub record: ReactionRecord,
    /// Rules expected to fail; empty means accepted.
    pub failing: BTreeSet<FilterRule>,
    pub removed_reactants: Vec<usize>,
}

fn record(f: &Fixture) -> ReactionRecord {
    ReactionRecord::parse(&f.name, None, &f.rxn).unwrap()
}

fn relabel(m: &Molecule, keep: impl Fn(u32) -> bool) -> Molecule {
    let atoms: Vec<Atom> = m
        .atoms()
        .iter()
        .map(|a| Atom {
            atom_map: a.atom_map.filter(|&x| keep(x)),
            ..a.clone()
        })
        .collect();
    Molecule::from_parts(atoms, m.bonds().to_vec()).unwrap()
}

/// Clears reactant maps that do not reach the product.
fn unmap_leaving(mut r: ReactionRecord) -> ReactionRecord {
    let product_maps: BTreeSet<u32> = r.products.iter().flat_map(|p| p.atom_maps()).collect();
    r.reactants = r.reactants.iter().map(|m| relabel(m, |x| product_maps.contains(&x))).collect();
    r
}

/// Clears the given maps on both sides.
fn unmap(mut r: ReactionRecord, maps: impl Fn(u32) -> bool + Copy) -> ReactionRecord {
    r.reactants = r.reactants.iter().map(|m| relabel(m, |x| !maps(x))).collect();
    r.products = r.products.iter().map(|m| relabel(m, |x| !maps(x))).collect();
    r
}

fn amide(acid: &str, amine: &str) -> ReactionRecord {
    let f = forward("amide", &format!("{acid}.{amine}"), &[Unbond(901, 902), Bond(901, 903, Single)], 901);
    record(&f)
}

fn base() -> ReactionRecord {
    unmap_leaving(amide("c1ccc(cc1)[C:901](=O)[OH:902]", "[NH2:903]Cc1ccccc1"))
}

fn etherify(n: usize) -> ReactionRecord {
    let parts = [
        "c1ccccc1[CH2:901][Br:911]",
        "[OH:902]CCC[OH:903]",
        "[Br:912][CH2:904]CC[OH:905]",
        "[Br:913][CH3:906]",
    ];
    let edits = [
        Unbond(901, 911),
        Bond(901, 902, Single),
        Unbond(904, 912),
        Bond(903, 904, Single),
        Unbond(906, 913),
        Bond(905, 906, Single),
    ];
    let f = forward("ether", &parts[..n].join("."), &edits[..2 * (n - 1)], 901);
    unmap_leaving(record(&f))
}

fn boc(amine_tail: &str, strip: bool) -> ReactionRecord {
    let f = forward("boc", &format!("CC(C)(C)O[C:902](=O)[NH:901]{amine_tail}"), &[Unbond(901, 902)], 901);
    if strip {
        unmap_leaving(record(&f))
    } else {
        record(&f)
    }
}

fn ester_hydrolysis(acid: &str, chain: usize) -> ReactionRecord {
    let marked = format!("{acid}[O:902][CH2:903]{}", "C".repeat(chain - 1));
    let f = forward("hydrolysis", &marked, &[Unbond(902, 903)], 902);
    unmap_leaving(record(&f))
}

fn fatty_amide(chain: usize, unmapped: u32) -> ReactionRecord {
    let r = amide(&format!("{}[C:901](=O)[OH:902]", "C".repeat(chain)), "[NH2:903]Cc1ccccc1");
    unmap(unmap_leaving(r), move |x| x <= unmapped)
}

fn rules(rs: &[FilterRule]) -> BTreeSet<FilterRule> {
    rs.iter().copied().collect()
}

pub fn filter_cases() -> Vec<FilterCase> {
    use FilterRule::*;
    let none = BTreeSet::new;
    let mut out = Vec::new();
    let mut push = |name, rule, record, failing, removed: Vec<usize>| {
        out.push(FilterCase {
            name,
            rule,
            record,
            failing,
            removed_reactants: removed,
        })
    };

    push("three reactants", MaxReactants, etherify(3), none(), vec![]);
    push("four reactants", MaxReactants, etherify(4), rules(&[MaxReactants]), vec![]);

    push("one product", SingleProduct, base(), none(), vec![]);
    let mut two = base();
    two.products.push(Molecule::parse("CCCCCCCCO").unwrap());
    push("two products", SingleProduct, two, rules(&[SingleProduct]), vec![]);

    push(
        "ten reactant atoms",
        ReactantAtomRange,
        unmap_leaving(amide("CCC[C:901](=O)[OH:902]", "[NH2:903]CCC")),
        none(),
        vec![],
    );
    push(
        "nine reactant atoms",
        ReactantAtomRange,
        unmap_leaving(amide("CC[C:901](=O)[OH:902]", "[NH2:903]CCC")),
        rules(&[ReactantAtomRange]),
        vec![],
    );

    push("eight product atoms", MinProductAtoms, boc("Cc1ccccc1", true), none(), vec![]);
    push("six product atoms", MinProductAtoms, boc("CCCCC", true), rules(&[MinProductAtoms]), vec![]);

    push(
        "reactants 35 of product 9",
        ReactantProductRatio,
        ester_hydrolysis("c1ccccc1C(=O)", 26),
        none(),
        vec![],
    );
    push(
        "reactants 37 of product 9",
        ReactantProductRatio,
        ester_hydrolysis("c1ccccc1C(=O)", 28),
        rules(&[ReactantProductRatio]),
        vec![],
    );

    push(
        "29 unmapped reactant atoms",
        MaxUnmappedReactantAtoms,
        ester_hydrolysis("c1ccc(cc1)-c1ccc(cc1)C(=O)", 29),
        none(),
        vec![],
    );
    push(
        "30 unmapped reactant atoms",
        MaxUnmappedReactantAtoms,
        ester_hydrolysis("c1ccc(cc1)-c1ccc(cc1)C(=O)", 30),
        rules(&[MaxUnmappedReactantAtoms]),
        vec![],
    );

    let mut with_solvent = base();
    with_solvent.reactants.push(Molecule::parse("CCOCC").unwrap());
    push("spectator removed", ContributingReactants, with_solvent, none(), vec![2]);
    let mut detached = base();
    detached.reactants = detached.reactants.iter().map(|m| relabel(m, |_| false)).collect();
    push(
        "no contributing reactant",
        ContributingReactants,
        detached,
        rules(&[ContributingReactants, ReactantAtomRange, MaxOrphanAtoms]),
        vec![0, 1],
    );

    push(
        "one orphan atom",
        MaxOrphanAtoms,
        record(&forward(
            "amide",
            "c1ccc(cc1)[C:901](=O)[OH:902].[NH2:903]Cc1ccccc1",
            &[Unbond(901, 902), Bond(901, 903, Single)],
            901,
        )),
        none(),
        vec![],
    );
    push("six orphan atoms", MaxOrphanAtoms, boc("Cc1ccccc1", false), rules(&[MaxOrphanAtoms]), vec![]);

    push("ten unmapped common atoms", MaxUnmappedMcsAtoms, fatty_amide(12, 10), none(), vec![]);
    push(
        "twelve unmapped common atoms",
        MaxUnmappedMcsAtoms,
        fatty_amide(12, 12),
        rules(&[MaxUnmappedMcsAtoms]),
        vec![],
    );

    push("product absent from reactants", ProductNotInReactants, base(), none(), vec![]);
    let mut echo = base();
    echo.reactants = vec![echo.products[0].clone(), Molecule::parse("CCO").unwrap()];
    push(
        "product among reactants",
        ProductNotInReactants,
        echo,
        rules(&[ProductNotInReactants]),
        vec![1],
    );

    push("aliphatic unmapped neighbour", NoMappedUnmappedAromaticBond, fatty_amide(3, 1), none(), vec![]);
    // map 3 is an aromatic ring carbon of the benzoic acid
    push(
        "aromatic unmapped neighbour",
        NoMappedUnmappedAromaticBond,
        unmap(base(), |x| x == 3),
        rules(&[NoMappedUnmappedAromaticBond]),
        vec![],
    );
    out
}
