use std::sync::Arc;

use crate::chem::Molecule;
use crate::policy::{PolicyError, RouteSample, RouteSampler, TablePolicy};
use crate::search::StockSet;

/// Route sampler built on a table policy: beam search over template chains,
/// always expanding the largest open molecule. `<STEPS=n>` prefers chains of
/// exactly `n` templates; other conditions are ignored.
pub struct TableRouteSampler {
    table: Arc<TablePolicy>,
    stock: Option<Arc<StockSet>>,
    pub branch: usize,
    pub beam_width: usize,
    pub max_steps: usize,
}

struct State {
    open: Vec<Molecule>,
    templates: Vec<String>,
    log_prob: f64,
}

struct Finished {
    templates: Vec<String>,
    log_prob: f64,
    solved: bool,
}

/// `n` from a `<STEPS=n>` token.
pub fn parse_steps_condition(condition: &str) -> Option<usize> {
    condition.strip_prefix("<STEPS=")?.strip_suffix('>')?.parse().ok()
}

impl TableRouteSampler {
    pub fn new(table: Arc<TablePolicy>, stock: Option<Arc<StockSet>>) -> TableRouteSampler {
        TableRouteSampler {
            table,
            stock,
            branch: 5,
            beam_width: 64,
            max_steps: 9,
        }
    }

    fn in_stock(&self, m: &Molecule) -> bool {
        self.stock.as_ref().is_some_and(|s| s.contains(m))
    }

    fn finish(state: State, out: &mut Vec<Finished>) {
        if !state.templates.is_empty() {
            out.push(Finished {
                solved: state.open.is_empty(),
                templates: state.templates,
                log_prob: state.log_prob,
            });
        }
    }
}

impl RouteSampler for TableRouteSampler {
    fn sample_routes(&self, target: &Molecule, n_samples: usize, condition: Option<&str>) -> Result<Vec<RouteSample>, PolicyError> {
        let goal = condition.and_then(parse_steps_condition);
        let max_len = goal.unwrap_or(self.max_steps).max(1);
        let mut done = Vec::new();
        let start = if self.in_stock(target) { Vec::new() } else { vec![target.clone()] };
        let mut beam = vec![State {
            open: start,
            templates: Vec::new(),
            log_prob: 0.0,
        }];
        for depth in 0..max_len {
            let mut next = Vec::new();
            for st in beam {
                let Some(m) = st
                    .open
                    .iter()
                    .max_by(|a, b| a.num_atoms().cmp(&b.num_atoms()).then_with(|| b.canonical_smiles().cmp(a.canonical_smiles())))
                    .cloned()
                else {
                    Self::finish(st, &mut done);
                    continue;
                };
                let mut advanced = false;
                for (hash, p) in self.table.ranked(&m, self.branch).into_iter().take(self.branch) {
                    let t = self.table.template(&hash).expect("ranked hash is in the table");
                    for set in t.apply(&m) {
                        let mut open: Vec<Molecule> = st.open.iter().filter(|x| **x != m).cloned().collect();
                        open.extend(set.molecules().iter().filter(|x| !self.in_stock(x)).cloned());
                        open.sort_by(|a, b| a.canonical_smiles().cmp(b.canonical_smiles()));
                        open.dedup();
                        let mut templates = st.templates.clone();
                        templates.push(t.canonical_smarts().to_string());
                        let child = State {
                            open,
                            templates,
                            log_prob: st.log_prob + p.ln(),
                        };
                        advanced = true;
                        if child.open.is_empty() || depth + 1 == max_len {
                            Self::finish(child, &mut done);
                        } else {
                            next.push(child);
                        }
                    }
                }
                if !advanced {
                    Self::finish(st, &mut done);
                }
            }
            next.sort_by(|a, b| b.log_prob.total_cmp(&a.log_prob));
            next.truncate(self.beam_width);
            beam = next;
        }
        let distance = |f: &Finished| goal.map(|g| f.templates.len().abs_diff(g)).unwrap_or(0);
        done.sort_by(|a, b| {
            distance(a)
                .cmp(&distance(b))
                .then(b.solved.cmp(&a.solved))
                .then(b.log_prob.total_cmp(&a.log_prob))
        });
        let mut out: Vec<RouteSample> = Vec::new();
        for f in done {
            if out.len() == n_samples {
                break;
            }
            if out.iter().any(|o| o.templates == f.templates) {
                continue;
            }
            out.push(RouteSample {
                templates: f.templates,
                log_prob: f.log_prob,
            });
        }
        Ok(out)
    }
}
