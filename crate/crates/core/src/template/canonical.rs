//! Canonical template form. Product and reactant patterns are joined into
//! one labelled graph (map pairs become edges, each reactant pattern gets a
//! group vertex) so that canonical ranking sees the whole transformation.

use std::collections::BTreeMap;

use crate::chem::matching::automorphism_orbits;
use crate::chem::{canonical_ranking, PatternGraph};

use super::{pattern_text, RetroTemplate};

const MAP_EDGE: u64 = 100;
const GROUP_EDGE: u64 = 200;

struct Combined {
    labels: Vec<(u8, String)>,
    adj: Vec<Vec<(usize, u64)>>,
    n_product: usize,
}

fn combined_graph(t: &RetroTemplate) -> Combined {
    let mut labels = Vec::new();
    let mut adj: Vec<Vec<(usize, u64)>> = Vec::new();
    let add_pattern = |p: &PatternGraph, kind: u8, labels: &mut Vec<(u8, String)>, adj: &mut Vec<Vec<(usize, u64)>>| {
        let offset = labels.len();
        for a in p.atoms() {
            labels.push((kind, a.label()));
            adj.push(Vec::new());
        }
        for (i, nb) in p.labelled_adjacency().into_iter().enumerate() {
            adj[offset + i].extend(nb.into_iter().map(|(j, e)| (offset + j, e)));
        }
        offset
    };
    let n_product = t.product_pattern().num_atoms();
    add_pattern(t.product_pattern(), 0, &mut labels, &mut adj);
    let product_maps = t.product_pattern().atom_maps();
    for r in t.reactant_patterns() {
        let offset = add_pattern(r, 1, &mut labels, &mut adj);
        let group = labels.len();
        labels.push((2, String::new()));
        adj.push(Vec::new());
        for (i, a) in r.atoms().iter().enumerate() {
            adj[group].push((offset + i, GROUP_EDGE));
            adj[offset + i].push((group, GROUP_EDGE));
            if let Some(&p) = a.atom_map.and_then(|m| product_maps.get(&m)) {
                adj[p].push((offset + i, MAP_EDGE));
                adj[offset + i].push((p, MAP_EDGE));
            }
        }
    }
    Combined { labels, adj, n_product }
}

/// Canonical SMARTS and product-atom symmetry classes.
pub(super) fn canonicalize(t: &RetroTemplate) -> (String, Vec<usize>) {
    let g = combined_graph(t);
    let ranks = canonical_ranking(&g.labels, &g.adj);
    let product = t.product_pattern();
    let mut mapped: Vec<usize> = (0..g.n_product)
        .filter(|&i| product.atoms()[i].atom_map.is_some())
        .collect();
    mapped.sort_by_key(|&i| ranks[i]);
    let renumber: BTreeMap<u32, u32> = mapped
        .iter()
        .enumerate()
        .map(|(k, &i)| (product.atoms()[i].atom_map.unwrap(), k as u32 + 1))
        .collect();
    let f = |m: u32| renumber.get(&m).copied();
    let mut reactants: Vec<String> = t
        .reactant_patterns()
        .iter()
        .map(|r| pattern_text(&r.remapped(f)))
        .collect();
    reactants.sort();
    let text = format!("{}>>{}", pattern_text(&product.remapped(f)), reactants.join("."));
    let orbits = automorphism_orbits(&g.labels, &g.adj);
    (text, orbits[..g.n_product].to_vec())
}
