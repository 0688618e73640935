//! Canonical atom ranking by iterative neighbourhood refinement with
//! individualization of tied atoms. Every branch of a tie is explored (up to
//! a leaf budget) and the ranking with the smallest edge certificate wins,
//! so isomorphic labelled graphs receive equivalent rankings.

const MAX_LEAVES: usize = 4096;

type Certificate = Vec<(usize, usize, u64)>;

struct Canon<'a> {
    adj: &'a [Vec<(usize, u64)>],
    leaves: usize,
    best: Option<(Certificate, Vec<usize>)>,
}

/// Returns `rank[i]` for every vertex: a permutation of `0..n` that depends
/// only on the labelled graph up to isomorphism. `labels` are vertex
/// invariants; `adj[i]` lists `(neighbor, edge label)`.
pub fn canonical_ranking<K: Ord>(labels: &[K], adj: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let n = labels.len();
    assert_eq!(adj.len(), n, "labels and adjacency disagree");
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let mut classes = vec![0usize; n];
    for (pos, &v) in order.iter().enumerate() {
        classes[v] = if pos > 0 && labels[order[pos - 1]] == labels[v] {
            classes[order[pos - 1]]
        } else {
            pos
        };
    }
    let mut canon = Canon {
        adj,
        leaves: 0,
        best: None,
    };
    canon.search(classes);
    canon.best.expect("at least one leaf").1
}

/// Symmetry classes after refinement only (no individualization).
pub(crate) fn refined_classes<K: Ord>(labels: &[K], adj: &[Vec<(usize, u64)>]) -> Vec<usize> {
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| labels[a].cmp(&labels[b]));
    let mut classes = vec![0usize; n];
    for (pos, &v) in order.iter().enumerate() {
        classes[v] = if pos > 0 && labels[order[pos - 1]] == labels[v] {
            classes[order[pos - 1]]
        } else {
            pos
        };
    }
    refine(adj, classes)
}

fn count_distinct(classes: &[usize]) -> usize {
    let mut seen = classes.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn refine(adj: &[Vec<(usize, u64)>], mut classes: Vec<usize>) -> Vec<usize> {
    let n = classes.len();
    let mut distinct = count_distinct(&classes);
    loop {
        let sigs: Vec<(usize, Vec<(u64, usize)>)> = (0..n)
            .map(|i| {
                let mut nb: Vec<(u64, usize)> = adj[i].iter().map(|&(j, e)| (e, classes[j])).collect();
                nb.sort_unstable();
                (classes[i], nb)
            })
            .collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut next = vec![0usize; n];
        for (pos, &v) in order.iter().enumerate() {
            next[v] = if pos > 0 && sigs[order[pos - 1]] == sigs[v] {
                next[order[pos - 1]]
            } else {
                pos
            };
        }
        let d = count_distinct(&next);
        classes = next;
        if d == distinct {
            return classes;
        }
        distinct = d;
    }
}

impl Canon<'_> {
    fn search(&mut self, classes: Vec<usize>) {
        let classes = refine(self.adj, classes);
        let n = classes.len();
        let mut counts = vec![0usize; n];
        for &c in &classes {
            counts[c] += 1;
        }
        let Some(cell) = (0..n).find(|&c| counts[c] > 1) else {
            self.leaf(classes);
            return;
        };
        let members: Vec<usize> = (0..n).filter(|&v| classes[v] == cell).collect();
        for (k, &v) in members.iter().enumerate() {
            if k > 0 && self.leaves >= MAX_LEAVES {
                break;
            }
            let mut next = classes.clone();
            for &w in &members {
                if w != v {
                    next[w] = cell + 1;
                }
            }
            self.search(next);
        }
    }

    fn leaf(&mut self, ranking: Vec<usize>) {
        self.leaves += 1;
        let mut cert: Certificate = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &(j, e) in nbrs {
                if i < j {
                    let (a, b) = (ranking[i].min(ranking[j]), ranking[i].max(ranking[j]));
                    cert.push((a, b, e));
                }
            }
        }
        cert.sort_unstable();
        match &self.best {
            Some((best, _)) if *best <= cert => {}
            _ => self.best = Some((cert, ranking)),
        }
    }
}
