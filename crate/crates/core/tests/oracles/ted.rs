//! Tree edit distance by enumerating every valid node mapping.

use retroplan::evalmetrics::RouteTree;

struct Flat {
    labels: Vec<String>,
    parent: Vec<Option<usize>>,
    post: Vec<usize>,
}

fn flatten(t: &RouteTree) -> Flat {
    fn go(t: &RouteTree, parent: Option<usize>, f: &mut Flat, clock: &mut usize) {
        let me = f.labels.len();
        f.labels.push(t.smiles.clone());
        f.parent.push(parent);
        f.post.push(0);
        for c in t.children() {
            go(c, Some(me), f, clock);
        }
        f.post[me] = *clock;
        *clock += 1;
    }
    let mut f = Flat {
        labels: Vec::new(),
        parent: Vec::new(),
        post: Vec::new(),
    };
    go(t, None, &mut f, &mut 0);
    f
}

fn ancestor(f: &Flat, a: usize, mut d: usize) -> bool {
    while let Some(p) = f.parent[d] {
        if p == a {
            return true;
        }
        d = p;
    }
    false
}

/// Unit-cost edit distance between the ordered molecule trees of `a` and
/// `b` as given (no canonicalization).
pub fn brute_force_ted(a: &RouteTree, b: &RouteTree) -> usize {
    let (fa, fb) = (flatten(a), flatten(b));
    let mut best = fa.labels.len() + fb.labels.len();
    let mut pairs = Vec::new();
    let mut used = vec![false; fb.labels.len()];
    search(&fa, &fb, 0, &mut pairs, &mut used, &mut best);
    best
}

fn search(fa: &Flat, fb: &Flat, i: usize, pairs: &mut Vec<(usize, usize)>, used: &mut [bool], best: &mut usize) {
    if i == fa.labels.len() {
        let relabel = pairs.iter().filter(|&&(x, y)| fa.labels[x] != fb.labels[y]).count();
        let cost = relabel + fa.labels.len() + fb.labels.len() - 2 * pairs.len();
        *best = (*best).min(cost);
        return;
    }
    search(fa, fb, i + 1, pairs, used, best);
    for j in 0..fb.labels.len() {
        if used[j] {
            continue;
        }
        let ok = pairs.iter().all(|&(x, y)| {
            ancestor(fa, x, i) == ancestor(fb, y, j)
                && ancestor(fa, i, x) == ancestor(fb, j, y)
                && (fa.post[x] < fa.post[i]) == (fb.post[y] < fb.post[j])
        });
        if ok {
            used[j] = true;
            pairs.push((i, j));
            search(fa, fb, i + 1, pairs, used, best);
            pairs.pop();
            used[j] = false;
        }
    }
}
