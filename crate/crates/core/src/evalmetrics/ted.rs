use super::RouteTree;

/// Postorder view of a labelled ordered tree.
struct Postorder<'a> {
    labels: Vec<&'a str>,
    /// Leftmost leaf descendant of each node.
    lml: Vec<usize>,
    keyroots: Vec<usize>,
}

impl<'a> Postorder<'a> {
    fn new(root: &'a RouteTree) -> Postorder<'a> {
        let mut p = Postorder {
            labels: Vec::new(),
            lml: Vec::new(),
            keyroots: Vec::new(),
        };
        p.visit(root);
        // keyroots: nodes with no later node sharing their leftmost leaf
        let n = p.labels.len();
        let mut seen = vec![false; n];
        for i in (0..n).rev() {
            if !seen[p.lml[i]] {
                seen[p.lml[i]] = true;
                p.keyroots.push(i);
            }
        }
        p.keyroots.sort_unstable();
        p
    }

    fn visit(&mut self, node: &'a RouteTree) -> usize {
        let mut first = None;
        for c in node.children() {
            let leftmost = self.visit(c);
            first.get_or_insert(leftmost);
        }
        let i = self.labels.len();
        self.labels.push(&node.smiles);
        self.lml.push(first.unwrap_or(i));
        self.lml[i]
    }
}

/// Zhang–Shasha edit distance with unit insert, delete and relabel costs,
/// on molecule-only trees with canonically ordered children.
pub fn tree_edit_distance(a: &RouteTree, b: &RouteTree) -> usize {
    let (a, b) = (a.canonicalized(), b.canonicalized());
    ordered_tree_edit_distance(&a, &b)
}

/// Zhang–Shasha on the trees as given, without reordering.
pub fn ordered_tree_edit_distance(a: &RouteTree, b: &RouteTree) -> usize {
    let ta = Postorder::new(a);
    let tb = Postorder::new(b);
    let (n, m) = (ta.labels.len(), tb.labels.len());
    let mut td = vec![vec![0usize; m]; n];
    let mut fd = vec![vec![0usize; m + 1]; n + 1];
    for &i in &ta.keyroots {
        for &j in &tb.keyroots {
            let (li, lj) = (ta.lml[i], tb.lml[j]);
            // fd[x][y]: forest distance over a[li..li+x) and b[lj..lj+y)
            let rows = i - li + 1;
            let cols = j - lj + 1;
            fd[0][0] = 0;
            for x in 1..=rows {
                fd[x][0] = fd[x - 1][0] + 1;
            }
            for y in 1..=cols {
                fd[0][y] = fd[0][y - 1] + 1;
            }
            for x in 1..=rows {
                for y in 1..=cols {
                    let (ai, bj) = (li + x - 1, lj + y - 1);
                    let del = fd[x - 1][y] + 1;
                    let ins = fd[x][y - 1] + 1;
                    if ta.lml[ai] == li && tb.lml[bj] == lj {
                        let relabel = fd[x - 1][y - 1] + usize::from(ta.labels[ai] != tb.labels[bj]);
                        fd[x][y] = del.min(ins).min(relabel);
                        td[ai][bj] = fd[x][y];
                    } else {
                        let px = ta.lml[ai] - li;
                        let py = tb.lml[bj] - lj;
                        fd[x][y] = del.min(ins).min(fd[px][py] + td[ai][bj]);
                    }
                }
            }
        }
    }
    td[n - 1][m - 1]
}
