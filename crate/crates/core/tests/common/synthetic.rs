//! Synthetic planning targets. Each target is an anilide whose aniline
//! comes from a nitro reduction and whose acid is either bought (two steps)
//! or made by methyl ester hydrolysis (three steps). Every intermediate is
//! created by the step before it, so each target has exactly one route.

use retroplan::chem::{BondOrder::Single, Molecule};
use retroplan::evalmetrics::RouteTree;
use retroplan::search::StockSet;
use retroplan::template::{extract_template_from_smiles, RetroTemplate};

use super::Edit::*;
use super::{forward, Fixture};

pub struct SyntheticTarget {
    pub target: Molecule,
    pub route: RouteTree,
    /// (product, template) for every step.
    pub steps: Vec<(Molecule, RetroTemplate)>,
}

const SUBSTITUENTS: &[&str] = &["", "C", "OC", "Cl", "CC"];
/// Acid cores `R` as in `R-C(=O)OH`; the first two are bought, the others
/// made from their methyl esters.
const ACID_CORES: &[&str] = &["c1ccccc1", "CC(C)", "c1ccncc1", "C1CCCCC1"];

fn step_of(f: &Fixture) -> (Molecule, RetroTemplate) {
    let t = extract_template_from_smiles(&f.rxn, 1).unwrap_or_else(|e| panic!("{}: {e}", f.name));
    (Molecule::parse(&f.product).unwrap(), t)
}

fn leaf(s: &str, in_stock: bool) -> RouteTree {
    RouteTree::leaf(s, in_stock)
}

/// Twenty targets plus the stock that makes exactly their routes solvable.
pub fn synthetic_targets() -> (Vec<SyntheticTarget>, StockSet) {
    let mut stock = StockSet::new();
    let mut out = Vec::new();
    for (a, sub) in SUBSTITUENTS.iter().enumerate() {
        let reduction = forward(
            &format!("nitro-{a}"),
            &format!("[O-:903][N+:901](=[O:902])c1ccc({sub})cc1"),
            &[Unbond(901, 902), Unbond(901, 903), Charge(901, 0), Hydrogens(901, 2)],
            901,
        );
        let aniline = reduction.product.clone();
        for (b, core) in ACID_CORES.iter().enumerate() {
            let bought = b < 2;
            let mut steps = Vec::new();
            let acid_node = if bought {
                let acid = Molecule::parse(&format!("{core}C(=O)O")).unwrap();
                stock.insert(&acid);
                leaf(acid.canonical_smiles(), true)
            } else {
                let hydrolysis = forward(
                    &format!("hydrolysis-{b}"),
                    &format!("{core}C(=O)[O:901][CH3:902]"),
                    &[Unbond(901, 902)],
                    901,
                );
                let ester = &hydrolysis.reactants[0];
                stock.insert(&Molecule::parse(ester).unwrap());
                steps.push(step_of(&hydrolysis));
                RouteTree::step(hydrolysis.product.clone(), None, vec![leaf(ester, true)])
            };
            let coupling = forward(
                &format!("amide-{a}-{b}"),
                &format!("{core}[C:901](=O)[OH:902].[NH2:903]c1ccc({sub})cc1"),
                &[Unbond(901, 902), Bond(901, 903, Single)],
                901,
            );
            let nitro = &reduction.reactants[0];
            stock.insert(&Molecule::parse(nitro).unwrap());
            steps.push(step_of(&reduction));
            steps.push(step_of(&coupling));
            let aniline_node = RouteTree::step(aniline.clone(), None, vec![leaf(nitro, true)]);
            let route = RouteTree::step(coupling.product.clone(), None, vec![acid_node, aniline_node]);
            out.push(SyntheticTarget {
                target: Molecule::parse(&coupling.product).unwrap(),
                route,
                steps,
            });
        }
    }
    (out, stock)
}
