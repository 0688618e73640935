use std::collections::{HashMap, HashSet};

use crate::evalmetrics::{route_cost, RouteTree, DEFAULT_EPS, DEFAULT_YIELD};

use super::{Expansion, SearchResult};

/// Route tree rooted at `target` from the reactions along one tree path.
pub(crate) fn assemble_route(target: &str, target_in_stock: bool, steps: &[&Expansion]) -> RouteTree {
    let by_product: HashMap<&str, &Expansion> = steps.iter().map(|e| (e.product.as_str(), *e)).collect();
    build(target, target_in_stock, &by_product)
}

fn build(smiles: &str, in_stock: bool, steps: &HashMap<&str, &Expansion>) -> RouteTree {
    match steps.get(smiles) {
        Some(e) => RouteTree::step(
            smiles,
            Some(e.template_smarts.clone()),
            e.reactants.iter().map(|(s, st)| build(s, *st, steps)).collect(),
        ),
        None => RouteTree::leaf(smiles, in_stock),
    }
}

/// Builds the route ending at node `node` of a search tree.
pub fn route_to_node(result: &SearchResult, node: usize) -> RouteTree {
    let target_in_stock = result.nodes[0].is_solved();
    assemble_route(result.target.canonical_smiles(), target_in_stock, &result.path_expansions(node))
}

/// Distinct solved routes ordered by ascending route cost (ties keep
/// discovery order), at most `max_routes`.
pub fn extract_routes(result: &SearchResult, max_routes: usize) -> Vec<RouteTree> {
    let mut seen = HashSet::new();
    let mut routes: Vec<(f64, RouteTree)> = Vec::new();
    for (i, n) in result.nodes.iter().enumerate() {
        if !n.is_solved() {
            continue;
        }
        let r = route_to_node(result, i).canonicalized();
        if seen.insert(r.route_hash()) {
            routes.push((route_cost(&r, DEFAULT_EPS, DEFAULT_YIELD), r));
        }
    }
    routes.sort_by(|a, b| a.0.total_cmp(&b.0));
    routes.into_iter().take(max_routes).map(|(_, r)| r).collect()
}
