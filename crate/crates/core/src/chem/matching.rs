//! Substructure search of a [`PatternGraph`] in a [`Molecule`] by
//! backtracking over a connectivity-ordered pattern (VF2-style candidate
//! pruning through already-mapped neighbours).

use std::collections::HashSet;

use super::canon::refined_classes;
use super::smarts::PatternGraph;
use super::Molecule;

/// `atoms[i]` is the molecule atom matched by pattern atom `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub atoms: Vec<usize>,
}

/// All embeddings of `pattern` in `mol`, in lexicographic order, keeping one
/// embedding per (atom set, pattern symmetry class assignment).
pub fn find_matches(pattern: &PatternGraph, mol: &Molecule) -> Vec<Match> {
    let classes = pattern.symmetry_classes();
    find_matches_with_classes(pattern, mol, &classes)
}

/// Same as [`find_matches`] with caller-supplied symmetry classes.
pub fn find_matches_with_classes(pattern: &PatternGraph, mol: &Molecule, classes: &[usize]) -> Vec<Match> {
    let mut all = all_embeddings(pattern, mol);
    all.sort();
    let mut seen = HashSet::new();
    all.into_iter()
        .filter(|m| {
            let mut key: Vec<(usize, usize)> = m.iter().enumerate().map(|(p, &a)| (a, classes[p])).collect();
            key.sort_unstable();
            seen.insert(key)
        })
        .map(|atoms| Match { atoms })
        .collect()
}

/// Every injective embedding, unordered and without symmetry reduction.
pub(crate) fn all_embeddings(pattern: &PatternGraph, mol: &Molecule) -> Vec<Vec<usize>> {
    let np = pattern.num_atoms();
    let nm = mol.num_atoms();
    if np == 0 || np > nm {
        return Vec::new();
    }
    let compatible: Vec<Vec<bool>> = pattern
        .atoms()
        .iter()
        .map(|pa| (0..nm).map(|m| pa.query.matches(mol, m)).collect())
        .collect();
    let (order, parent) = search_order(pattern.adjacency());
    let mut state = Search {
        pattern,
        mol,
        compatible: &compatible,
        order: &order,
        parent: &parent,
        assign: vec![usize::MAX; np],
        used: vec![false; nm],
        out: Vec::new(),
    };
    state.extend(0);
    state.out
}

/// Breadth-first order per component; `parent[k]` is an earlier neighbour
/// of `order[k]` when one exists.
fn search_order<E>(adj: &[Vec<(usize, E)>]) -> (Vec<usize>, Vec<Option<usize>>) {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut parent = Vec::with_capacity(n);
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = std::collections::VecDeque::from([(root, None)]);
        while let Some((v, par)) = queue.pop_front() {
            order.push(v);
            parent.push(par);
            for (w, _) in &adj[v] {
                if !seen[*w] {
                    seen[*w] = true;
                    queue.push_back((*w, Some(v)));
                }
            }
        }
    }
    (order, parent)
}

struct Search<'a> {
    pattern: &'a PatternGraph,
    mol: &'a Molecule,
    compatible: &'a [Vec<bool>],
    order: &'a [usize],
    parent: &'a [Option<usize>],
    assign: Vec<usize>,
    used: Vec<bool>,
    out: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn extend(&mut self, k: usize) {
        if k == self.order.len() {
            self.out.push(self.assign.clone());
            return;
        }
        let p = self.order[k];
        let candidates: Vec<usize> = match self.parent[k] {
            Some(par) => self.mol.neighbors(self.assign[par]).iter().map(|&(m, _)| m).collect(),
            None => (0..self.mol.num_atoms()).collect(),
        };
        for m in candidates {
            if self.used[m] || !self.compatible[p][m] || !self.bonds_agree(p, m) {
                continue;
            }
            self.assign[p] = m;
            self.used[m] = true;
            self.extend(k + 1);
            self.used[m] = false;
            self.assign[p] = usize::MAX;
        }
    }

    fn bonds_agree(&self, p: usize, m: usize) -> bool {
        self.pattern.neighbors(p).iter().all(|&(q, bi)| {
            let mq = self.assign[q];
            if mq == usize::MAX {
                return true;
            }
            match self.mol.bond_between(m, mq) {
                Some(b) => self.pattern.bonds()[bi].query.matches(b.order),
                None => false,
            }
        })
    }
}

/// Orbits of the automorphism group of a labelled graph; vertices in the
/// same orbit get the same id (the smallest member).
pub(crate) fn automorphism_orbits<K: Ord>(labels: &[K], adj: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let n = labels.len();
    let classes = refined_classes(labels, adj);
    let mut orbit: Vec<usize> = (0..n).collect();
    fn find(orbit: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while orbit[r] != r {
            r = orbit[r];
        }
        orbit[v] = r;
        r
    }
    for v in 0..n {
        for w in v + 1..n {
            if classes[v] != classes[w] || find(&mut orbit, v) == find(&mut orbit, w) {
                continue;
            }
            if let Some(perm) = automorphism_mapping(adj, &classes, v, w) {
                for (a, &b) in perm.iter().enumerate() {
                    let (ra, rb) = (find(&mut orbit, a), find(&mut orbit, b));
                    if ra != rb {
                        orbit[ra.max(rb)] = ra.min(rb);
                    }
                }
            }
        }
    }
    (0..n).map(|v| find(&mut orbit, v)).collect()
}

/// An automorphism sending `v` to `w`, if any.
fn automorphism_mapping(adj: &[Vec<(usize, u64)>], classes: &[usize], v: usize, w: usize) -> Option<Vec<usize>> {
    let n = adj.len();
    // search order: v first, then BFS through the rest
    let mut order = vec![v];
    let mut seen = vec![false; n];
    seen[v] = true;
    let mut head = 0;
    loop {
        while head < order.len() {
            let x = order[head];
            head += 1;
            for &(y, _) in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    order.push(y);
                }
            }
        }
        match (0..n).find(|&x| !seen[x]) {
            Some(x) => {
                seen[x] = true;
                order.push(x);
            }
            None => break,
        }
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn edge(adj: &[Vec<(usize, u64)>], a: usize, b: usize) -> Option<u64> {
        adj[a].iter().find(|&&(x, _)| x == b).map(|&(_, e)| e)
    }
    fn go(
        k: usize,
        order: &[usize],
        adj: &[Vec<(usize, u64)>],
        classes: &[usize],
        image: &mut [usize],
        used: &mut [bool],
        forced: (usize, usize),
    ) -> bool {
        if k == order.len() {
            return true;
        }
        let x = order[k];
        let candidates: Vec<usize> = if x == forced.0 {
            vec![forced.1]
        } else {
            (0..adj.len()).collect()
        };
        for y in candidates {
            if used[y] || classes[y] != classes[x] {
                continue;
            }
            let consistent = order[..k].iter().all(|&u| edge(adj, x, u) == edge(adj, y, image[u]));
            if !consistent {
                continue;
            }
            image[x] = y;
            used[y] = true;
            if go(k + 1, order, adj, classes, image, used, forced) {
                return true;
            }
            used[y] = false;
            image[x] = usize::MAX;
        }
        false
    }
    go(0, &order, adj, classes, &mut image, &mut used, (v, w)).then_some(image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::parse_smarts;

    fn count(p: &str, m: &str) -> usize {
        find_matches(&parse_smarts(p).unwrap(), &Molecule::parse(m).unwrap()).len()
    }

    #[test]
    fn reference_counts() {
        assert_eq!(count("C", "CCC"), 3);
        assert_eq!(count("[C][O]", "CCO"), 1);
        assert_eq!(count("[C][OH]", "OCCCCO"), 2);
    }

    #[test]
    fn symmetric_pattern_counted_once_per_site() {
        // C-C matches each bond once, not twice
        assert_eq!(count("CC", "CCC"), 2);
        assert_eq!(count("C(C)C", "CC(C)C"), 3);
    }

    #[test]
    fn bond_queries() {
        assert_eq!(count("C=O", "CC(=O)O"), 1);
        assert_eq!(count("C~O", "CC(=O)O"), 2);
        assert_eq!(count("cc", "c1ccccc1"), 6);
        assert_eq!(count("C-C", "c1ccccc1"), 0);
    }

    #[test]
    fn matches_are_sorted() {
        let p = parse_smarts("[C][OH]").unwrap();
        let m = Molecule::parse("OCCCCO").unwrap();
        let ms = find_matches(&p, &m);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn orbits_of_a_star() {
        let adj = vec![
            vec![(1, 1), (2, 1), (3, 1)],
            vec![(0, 1)],
            vec![(0, 1)],
            vec![(0, 1)],
        ];
        assert_eq!(automorphism_orbits(&[0u8; 4], &adj), vec![0, 1, 1, 1]);
    }
}
