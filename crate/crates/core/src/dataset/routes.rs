use std::collections::{BTreeMap, HashMap, HashSet};

use crate::evalmetrics::RouteTree;
use crate::search::StockSet;

use super::ReactionRecord;

struct Reaction {
    product: String,
    reactants: Vec<String>,
    template: Option<String>,
}

/// Builds multi-step routes by chaining reactions within each patent.
///
/// Inside a patent every product that no other reaction consumes is a root;
/// each molecule is expanded with the reaction giving the deepest route
/// (input order breaks ties). Routes with fewer than two steps, routes in
/// which a molecule reappears on its own ancestor path, duplicates, and
/// routes contained in another kept route are dropped.
pub fn build_routes(reactions: &[ReactionRecord], stock: Option<&StockSet>) -> Vec<RouteTree> {
    let mut by_patent: BTreeMap<&str, Vec<Reaction>> = BTreeMap::new();
    for r in reactions {
        if r.products.len() != 1 {
            continue;
        }
        by_patent.entry(r.patent_id.as_deref().unwrap_or("")).or_default().push(Reaction {
            product: r.product_smiles(),
            reactants: r.reactant_smiles(),
            template: r.template.as_ref().map(|t| t.canonical_smarts().to_string()),
        });
    }
    let mut routes = Vec::new();
    for group in by_patent.values() {
        let mut makes: HashMap<&str, Vec<&Reaction>> = HashMap::new();
        for rx in group {
            makes.entry(rx.product.as_str()).or_default().push(rx);
        }
        let consumed: HashSet<&str> = group.iter().flat_map(|rx| rx.reactants.iter().map(String::as_str)).collect();
        let mut roots: Vec<&str> = Vec::new();
        for rx in group {
            if !consumed.contains(rx.product.as_str()) && !roots.contains(&rx.product.as_str()) {
                roots.push(&rx.product);
            }
        }
        for root in roots {
            let mut path = Vec::new();
            if let Some(route) = grow(root, &makes, &mut path, stock) {
                if route.len() >= 2 {
                    routes.push(route.canonicalized());
                }
            }
        }
    }
    let mut seen = HashSet::new();
    routes.retain(|r| seen.insert(r.route_hash()));
    let keep: Vec<bool> = (0..routes.len())
        .map(|i| !(0..routes.len()).any(|j| i != j && is_subroute(&routes[i], &routes[j])))
        .collect();
    routes.into_iter().zip(keep).filter(|(_, k)| *k).map(|(r, _)| r).collect()
}

/// `None` when a molecule repeats along its ancestor path.
fn grow<'a>(mol: &'a str, makes: &HashMap<&str, Vec<&'a Reaction>>, path: &mut Vec<&'a str>, stock: Option<&StockSet>) -> Option<RouteTree> {
    if path.contains(&mol) {
        return None;
    }
    let in_stock = stock.is_some_and(|s| s.contains_canonical(mol));
    let Some(options) = makes.get(mol) else {
        return Some(RouteTree::leaf(mol, in_stock));
    };
    path.push(mol);
    let mut best: Option<RouteTree> = None;
    let mut looped = false;
    for rx in options {
        let mut children = Vec::new();
        for r in &rx.reactants {
            match grow(r, makes, path, stock) {
                Some(c) => children.push(c),
                None => {
                    looped = true;
                    break;
                }
            }
        }
        if looped {
            break;
        }
        let cand = RouteTree::step(mol, rx.template.clone(), children);
        if best.as_ref().is_none_or(|b| cand.depth() > b.depth()) {
            best = Some(cand);
        }
    }
    path.pop();
    if looped {
        None
    } else {
        best
    }
}

/// `small` embeds in `big` from some node of `big` downward: labels agree,
/// and every reaction of `small` is the same reaction (same precursor
/// labels) in `big`; leaves of `small` may be intermediates of `big`.
pub fn is_subroute(small: &RouteTree, big: &RouteTree) -> bool {
    if small.route_hash() == big.route_hash() {
        return false;
    }
    let mut stack = vec![big];
    while let Some(n) = stack.pop() {
        if embeds(small, n) {
            return true;
        }
        stack.extend(n.children());
    }
    false
}

fn embeds(small: &RouteTree, big: &RouteTree) -> bool {
    if small.smiles != big.smiles {
        return false;
    }
    let (sc, bc) = (small.children(), big.children());
    if sc.is_empty() {
        return true;
    }
    if bc.len() != sc.len() {
        return false;
    }
    let mut s: Vec<&RouteTree> = sc.iter().collect();
    let mut b: Vec<&RouteTree> = bc.iter().collect();
    s.sort_by(|x, y| x.smiles.cmp(&y.smiles));
    b.sort_by(|x, y| x.smiles.cmp(&y.smiles));
    s.iter().zip(&b).all(|(x, y)| embeds(x, y))
}
