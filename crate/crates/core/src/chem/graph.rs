//! Plain graph utilities shared by molecules and patterns.

use std::collections::{BTreeSet, VecDeque};

pub(crate) type Adjacency = Vec<Vec<(usize, usize)>>;

pub(crate) fn build_adjacency(
    n: usize,
    edges: impl Iterator<Item = (usize, usize)>,
) -> Result<Adjacency, String> {
    let mut adj: Adjacency = vec![Vec::new(); n];
    for (bi, (a, b)) in edges.enumerate() {
        if a >= n || b >= n {
            return Err(format!("bond {bi} references a missing atom"));
        }
        if a == b {
            return Err(format!("bond {bi} is a self loop on atom {a}"));
        }
        if adj[a].iter().any(|&(x, _)| x == b) {
            return Err(format!("duplicate bond between atoms {a} and {b}"));
        }
        adj[a].push((b, bi));
        adj[b].push((a, bi));
    }
    Ok(adj)
}

pub(crate) fn components(adj: &[Vec<(usize, usize)>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Marks bonds that lie on at least one cycle (non-bridges).
pub(crate) fn ring_bonds(adj: &[Vec<(usize, usize)>], n_bonds: usize) -> Vec<bool> {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut is_bridge = vec![false; n_bonds];
    let mut timer = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // Iterative DFS: (vertex, bond used to enter, next neighbor slot).
        let mut stack = vec![(root, usize::MAX, 0usize)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, via, ref mut slot)) = stack.last_mut() {
            if *slot < adj[u].len() {
                let (v, b) = adj[u][*slot];
                *slot += 1;
                if b == via {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, b, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if low[u] > disc[p] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge.iter().map(|b| !b).collect()
}

/// All simple cycles with length in `min_len..=max_len`, each as an atom
/// list starting at its smallest atom. Only edges accepted by `usable` are
/// traversed.
pub(crate) fn small_cycles(
    adj: &[Vec<(usize, usize)>],
    min_len: usize,
    max_len: usize,
    usable: impl Fn(usize) -> bool,
) -> Vec<Vec<usize>> {
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut out = Vec::new();
    let mut path = Vec::new();
    for start in 0..adj.len() {
        path.clear();
        path.push(start);
        extend_cycle(adj, start, max_len, min_len, &usable, &mut path, &mut seen, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn extend_cycle(
    adj: &[Vec<(usize, usize)>],
    start: usize,
    max_len: usize,
    min_len: usize,
    usable: &impl Fn(usize) -> bool,
    path: &mut Vec<usize>,
    seen: &mut BTreeSet<Vec<usize>>,
    out: &mut Vec<Vec<usize>>,
) {
    let u = *path.last().unwrap();
    for &(v, b) in &adj[u] {
        if !usable(b) {
            continue;
        }
        if v == start && path.len() >= min_len.max(3) {
            let mut key = path.clone();
            key.sort_unstable();
            if seen.insert(key) {
                out.push(path.clone());
            }
            continue;
        }
        if v <= start || path.contains(&v) || path.len() >= max_len {
            continue;
        }
        path.push(v);
        extend_cycle(adj, start, max_len, min_len, usable, path, seen, out);
        path.pop();
    }
}

/// BFS distances from `src`; unreachable atoms get `usize::MAX`.
pub(crate) fn distances_from(adj: &[Vec<(usize, usize)>], src: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adj.len()];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adj[u] {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(n: usize, edges: &[(usize, usize)]) -> Adjacency {
        build_adjacency(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn bridges_and_ring_bonds() {
        // triangle 0-1-2 plus tail 2-3
        let a = adj(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        assert_eq!(ring_bonds(&a, 4), vec![true, true, true, false]);
    }

    #[test]
    fn fused_cycles_enumerated_once() {
        // two fused squares: 0-1-2-3-0 and 1-4-5-2
        let a = adj(6, &[(0, 1), (1, 2), (2, 3), (3, 0), (1, 4), (4, 5), (5, 2)]);
        let cycles = small_cycles(&a, 3, 6, |_| true);
        let mut lens: Vec<usize> = cycles.iter().map(|c| c.len()).collect();
        lens.sort();
        assert_eq!(lens, vec![4, 4, 6]);
    }

    #[test]
    fn rejects_duplicate_bond() {
        assert!(build_adjacency(2, [(0, 1), (1, 0)].into_iter()).is_err());
    }
}
