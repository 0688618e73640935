//! Depth-first line-notation emission shared by SMILES and SMARTS output.

use super::canon::canonical_ranking;
use super::{BondOrder, Molecule};

pub(crate) struct LineGraph<'a> {
    pub adj: &'a [Vec<(usize, usize)>],
    pub ranks: &'a [usize],
}

impl LineGraph<'_> {
    /// Writes every connected component starting from its lowest-ranked
    /// atom; component strings are sorted and joined with `.`.
    pub fn write(
        &self,
        atom_token: &dyn Fn(usize) -> String,
        bond_token: &dyn Fn(usize, usize, usize) -> String,
    ) -> String {
        let n = self.adj.len();
        let mut visited = vec![false; n];
        let mut parts = Vec::new();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.ranks[i]);
        for &start in &order {
            if visited[start] {
                continue;
            }
            let mut walk = Walk {
                adj: self.adj,
                ranks: self.ranks,
                children: vec![Vec::new(); n],
                ring_open: vec![Vec::new(); n],
                ring_close: vec![Vec::new(); n],
                visit_index: vec![usize::MAX; n],
                counter: 0,
            };
            walk.discover(start, usize::MAX, &mut visited);
            let mut out = String::new();
            let mut digits = Digits::default();
            walk.emit(start, &mut out, &mut digits, atom_token, bond_token);
            parts.push(out);
        }
        parts.sort();
        parts.join(".")
    }
}

#[derive(Default)]
struct Digits {
    in_use: Vec<bool>,
    assigned: std::collections::HashMap<usize, usize>,
}

impl Digits {
    fn open(&mut self, bond: usize) -> usize {
        let d = (1..)
            .find(|&d| !self.in_use.get(d).copied().unwrap_or(false))
            .unwrap();
        if self.in_use.len() <= d {
            self.in_use.resize(d + 1, false);
        }
        self.in_use[d] = true;
        self.assigned.insert(bond, d);
        d
    }

    fn close(&mut self, bond: usize) -> usize {
        let d = self.assigned.remove(&bond).expect("ring bond was opened");
        self.in_use[d] = false;
        d
    }
}

fn digit_text(d: usize) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

struct Walk<'a> {
    adj: &'a [Vec<(usize, usize)>],
    ranks: &'a [usize],
    children: Vec<Vec<(usize, usize)>>,
    ring_open: Vec<Vec<(usize, usize)>>,
    ring_close: Vec<Vec<(usize, usize)>>,
    visit_index: Vec<usize>,
    counter: usize,
}

impl Walk<'_> {
    fn discover(&mut self, u: usize, via: usize, visited: &mut [bool]) {
        visited[u] = true;
        self.visit_index[u] = self.counter;
        self.counter += 1;
        let mut nbrs: Vec<(usize, usize)> = self.adj[u].to_vec();
        nbrs.sort_by_key(|&(v, _)| self.ranks[v]);
        for (v, b) in nbrs {
            if b == via {
                continue;
            }
            if visited[v] {
                // back edge to an ancestor, seen once from the descendant
                if self.visit_index[v] < self.visit_index[u] && !self.ring_close[u].iter().any(|&(_, x)| x == b) {
                    self.ring_open[v].push((u, b));
                    self.ring_close[u].push((v, b));
                }
                continue;
            }
            self.children[u].push((v, b));
            self.discover(v, b, visited);
        }
    }

    fn emit(
        &self,
        u: usize,
        out: &mut String,
        digits: &mut Digits,
        atom_token: &dyn Fn(usize) -> String,
        bond_token: &dyn Fn(usize, usize, usize) -> String,
    ) {
        out.push_str(&atom_token(u));
        let mut opens = self.ring_open[u].clone();
        opens.sort_by_key(|&(v, _)| self.visit_index[v]);
        let mut open_text = String::new();
        for &(v, b) in &opens {
            let d = digits.open(b);
            open_text.push_str(&bond_token(b, u, v));
            open_text.push_str(&digit_text(d));
        }
        let mut closes = self.ring_close[u].clone();
        closes.sort_by_key(|&(v, _)| self.visit_index[v]);
        for &(_, b) in &closes {
            let d = digits.close(b);
            out.push_str(&digit_text(d));
        }
        out.push_str(&open_text);
        let kids = &self.children[u];
        for (k, &(v, b)) in kids.iter().enumerate() {
            let last = k + 1 == kids.len();
            if !last {
                out.push('(');
            }
            out.push_str(&bond_token(b, u, v));
            self.emit(v, out, digits, atom_token, bond_token);
            if !last {
                out.push(')');
            }
        }
    }
}

fn aromatic_symbol(symbol: &str) -> String {
    symbol.to_ascii_lowercase()
}

pub(crate) fn molecule_labels(mol: &Molecule, with_maps: bool) -> Vec<(usize, u8, bool, i8, u8, u32)> {
    (0..mol.num_atoms())
        .map(|i| {
            let a = mol.atom(i);
            let map = if with_maps { a.atom_map.unwrap_or(0) } else { 0 };
            (mol.degree(i), a.element.0, a.aromatic, a.charge, a.hydrogens, map)
        })
        .collect()
}

pub(crate) fn molecule_ranks(mol: &Molecule, with_maps: bool) -> Vec<usize> {
    let labels = molecule_labels(mol, with_maps);
    let adj: Vec<Vec<(usize, u64)>> = mol
        .adjacency()
        .iter()
        .map(|nb| nb.iter().map(|&(v, b)| (v, mol.bonds()[b].order.code())).collect())
        .collect();
    canonical_ranking(&labels, &adj)
}

pub(crate) fn atom_text(mol: &Molecule, i: usize, with_maps: bool) -> String {
    let a = mol.atom(i);
    let map = if with_maps { a.atom_map } else { None };
    let symbol = if a.aromatic {
        aromatic_symbol(a.element.symbol())
    } else {
        a.element.symbol().to_string()
    };
    if map.is_none() && mol.default_hydrogens(i) == Some(a.hydrogens) {
        return symbol;
    }
    let mut s = format!("[{symbol}");
    match a.hydrogens {
        0 => {}
        1 => s.push('H'),
        h => s.push_str(&format!("H{h}")),
    }
    match a.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&format!("-{}", -c)),
    }
    if let Some(m) = map {
        s.push_str(&format!(":{m}"));
    }
    s.push(']');
    s
}

pub(crate) fn write_molecule(mol: &Molecule, with_maps: bool) -> String {
    let ranks = molecule_ranks(mol, with_maps);
    let graph = LineGraph {
        adj: mol.adjacency(),
        ranks: &ranks,
    };
    let atom_token = |i: usize| atom_text(mol, i, with_maps);
    let bond_token = |b: usize, _u: usize, _v: usize| {
        let bond = &mol.bonds()[b];
        let both_aromatic = mol.atom(bond.a).aromatic && mol.atom(bond.b).aromatic;
        match bond.order {
            BondOrder::Single if both_aromatic => "-".to_string(),
            BondOrder::Single => String::new(),
            BondOrder::Double => "=".to_string(),
            BondOrder::Triple => "#".to_string(),
            BondOrder::Aromatic if both_aromatic => String::new(),
            BondOrder::Aromatic => ":".to_string(),
        }
    };
    graph.write(&atom_token, &bond_token)
}
