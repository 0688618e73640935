//! Synthetic patent corpus for the route builder. Thirty patents cycle
//! through five shapes: a linear three-step chain, a lone reaction, a copy
//! of an earlier chain, a truncated piece of an earlier chain, and a loop
//! next to a convergent two-step route.

use retroplan::chem::canonicalize;
use retroplan::dataset::ReactionRecord;
use retroplan::evalmetrics::RouteTree;

/// Distinct molecule for (family, position).
pub fn mol(family: usize, k: usize) -> String {
    format!("O{}N{}", "C".repeat(family + 1), "C".repeat(k + 1))
}

/// Distinct co-reactant.
pub fn reagent(family: usize, k: usize) -> String {
    format!("S{}N{}", "C".repeat(family + 1), "C".repeat(k + 1))
}

fn rx(id: String, patent: &str, reactants: &[String], product: &str) -> ReactionRecord {
    ReactionRecord::parse(&id, Some(patent), &format!("{}>>{product}", reactants.join("."))).unwrap()
}

fn leaf(s: &str) -> RouteTree {
    RouteTree::leaf(canonicalize(s).unwrap(), false)
}

fn step(s: &str, children: Vec<RouteTree>) -> RouteTree {
    RouteTree::step(canonicalize(s).unwrap(), None, children)
}

/// Records plus the routes expected to survive.
pub fn route_corpus() -> (Vec<ReactionRecord>, Vec<RouteTree>) {
    let mut out = Vec::new();
    let mut expected = Vec::new();
    let chain = |f: usize, patent: &str, from: usize, to: usize, out: &mut Vec<ReactionRecord>| {
        for k in from..to {
            out.push(rx(
                format!("{patent}-{k}"),
                patent,
                &[mol(f, k + 1), reagent(f, k)],
                &mol(f, k),
            ));
        }
    };
    for p in 0..30 {
        let patent = format!("US{p:03}");
        match p % 5 {
            0 => {
                chain(p, &patent, 0, 3, &mut out);
                let inner = step(&mol(p, 2), vec![leaf(&mol(p, 3)), leaf(&reagent(p, 2))]);
                let middle = step(&mol(p, 1), vec![inner, leaf(&reagent(p, 1))]);
                expected.push(step(&mol(p, 0), vec![middle, leaf(&reagent(p, 0))]));
            }
            1 => chain(p, &patent, 0, 1, &mut out),
            2 => chain(p - 2, &patent, 0, 3, &mut out),
            3 if (p / 5) % 2 == 0 => chain(p - 3, &patent, 0, 2, &mut out),
            3 => chain(p - 3, &patent, 1, 3, &mut out),
            _ => {
                let (a, b, c) = (mol(p, 0), mol(p, 1), mol(p, 2));
                out.push(rx(format!("{patent}-l1"), &patent, &[b.clone()], &a));
                out.push(rx(format!("{patent}-l2"), &patent, &[a.clone(), reagent(p, 0)], &b));
                out.push(rx(format!("{patent}-l3"), &patent, &[a.clone()], &c));
                let (e, f, g, h) = (mol(p, 10), mol(p, 11), mol(p, 12), mol(p, 13));
                out.push(rx(format!("{patent}-c1"), &patent, &[f.clone(), g.clone()], &e));
                out.push(rx(format!("{patent}-c2"), &patent, &[h.clone(), reagent(p, 11)], &f));
                let branch = step(&f, vec![leaf(&h), leaf(&reagent(p, 11))]);
                expected.push(step(&e, vec![branch, leaf(&g)]));
            }
        }
    }
    (out, expected)
}
