//! Line-by-line interpreter of the direct route reconstruction pseudocode,
//! written against `RetroTemplate::apply` only.

use std::collections::BTreeSet;

use retroplan::chem::Molecule;
use retroplan::search::StockSet;
use retroplan::template::RetroTemplate;

/// (molecules, purchasable flags, parent, template index) per node.
pub type Row = (Vec<String>, Vec<bool>, Option<usize>, Option<usize>);

#[derive(Debug, Default, Clone, Copy)]
pub struct Branches {
    /// Steps that produced nothing, so the frontier carried over.
    pub retained: usize,
    /// Molecules skipped because they were already purchasable.
    pub skipped_purchasable: usize,
    /// Nodes with at least one purchasable molecule.
    pub marked: usize,
    /// Sequences cut short by an unparseable template.
    pub truncated: usize,
}

pub fn interpret(target: &Molecule, smarts: &[String], stock: Option<&StockSet>) -> (Vec<Row>, Branches) {
    let bought = |s: &str| match stock {
        Some(st) => st.contains_canonical(s),
        None => false,
    };
    let mut b = Branches::default();
    let root = target.canonical_smiles().to_string();
    let mut rows: Vec<Row> = vec![(vec![root.clone()], vec![bought(&root)], None, None)];
    let mut frontier = vec![0usize];
    for (step, text) in smarts.iter().enumerate() {
        let Ok(t) = RetroTemplate::parse(text) else {
            b.truncated += 1;
            break;
        };
        let mut produced = Vec::new();
        for &f in &frontier {
            let (mols, flags) = (rows[f].0.clone(), rows[f].1.clone());
            let mut kids: Vec<BTreeSet<String>> = Vec::new();
            for (m, &flag) in mols.iter().zip(&flags) {
                if flag {
                    b.skipped_purchasable += 1;
                    continue;
                }
                for set in t.apply(&Molecule::parse(m).unwrap()) {
                    let mut s: BTreeSet<String> = mols.iter().cloned().collect();
                    s.remove(m);
                    s.extend(set.smiles());
                    if kids.contains(&s) {
                        continue;
                    }
                    kids.push(s.clone());
                    let list: Vec<String> = s.into_iter().collect();
                    let marks: Vec<bool> = list.iter().map(|x| bought(x)).collect();
                    b.marked += marks.iter().any(|&x| x) as usize;
                    rows.push((list, marks, Some(f), Some(step)));
                    produced.push(rows.len() - 1);
                }
            }
        }
        if produced.is_empty() {
            b.retained += 1;
        } else {
            frontier = produced;
        }
    }
    (rows, b)
}
