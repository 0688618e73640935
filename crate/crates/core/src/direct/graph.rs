use serde::{Deserialize, Serialize};

use crate::chem::Molecule;
use crate::evalmetrics::RouteTree;
use crate::search::{assemble_route, Expansion, StockSet};
use crate::template::RetroTemplate;

/// A generated template sequence. Templates that failed to parse are kept
/// as `None`; decoding stops at the first of them.
#[derive(Debug, Clone)]
pub struct TemplateSequence {
    pub templates: Vec<Option<RetroTemplate>>,
    pub log_prob: f64,
    pub condition: Option<String>,
}

impl TemplateSequence {
    pub fn new(templates: Vec<RetroTemplate>, log_prob: f64) -> TemplateSequence {
        TemplateSequence {
            templates: templates.into_iter().map(Some).collect(),
            log_prob,
            condition: None,
        }
    }

    /// Parses SMARTS strings; unparseable entries become `None`.
    pub fn from_smarts<S: AsRef<str>>(smarts: &[S], log_prob: f64, condition: Option<String>) -> TemplateSequence {
        TemplateSequence {
            templates: smarts.iter().map(|s| RetroTemplate::parse(s.as_ref()).ok()).collect(),
            log_prob,
            condition,
        }
    }

    /// The templates before the first invalid one.
    pub fn valid_prefix(&self) -> Vec<&RetroTemplate> {
        self.templates.iter().map_while(Option::as_ref).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolSetNode {
    /// Canonical SMILES, sorted.
    pub mols: Vec<String>,
    /// Parallel to `mols`; all false without a stock.
    pub purchasable: Vec<bool>,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Index in the sequence of the template that produced this node.
    pub template_index: Option<usize>,
    #[serde(skip)]
    pub(crate) expansion: Option<Expansion>,
}

impl MolSetNode {
    pub fn is_solved(&self) -> bool {
        self.purchasable.iter().all(|&p| p)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MolSetGraph {
    pub target: String,
    pub nodes: Vec<MolSetNode>,
}

impl MolSetGraph {
    pub fn root(&self) -> &MolSetNode {
        &self.nodes[0]
    }

    fn path_expansions(&self, node: usize) -> Vec<&Expansion> {
        let mut out = Vec::new();
        let mut cur = Some(node);
        while let Some(i) = cur {
            if let Some(e) = &self.nodes[i].expansion {
                out.push(e);
            }
            cur = self.nodes[i].parent;
        }
        out.reverse();
        out
    }

    pub fn route_to(&self, node: usize) -> RouteTree {
        assemble_route(&self.target, self.nodes[0].purchasable[0], &self.path_expansions(node))
    }

    /// Routes ending at every node without children, in node order.
    pub fn terminal_routes(&self) -> Vec<RouteTree> {
        (0..self.nodes.len())
            .filter(|&i| self.nodes[i].children.is_empty())
            .map(|i| self.route_to(i))
            .collect()
    }

    /// Number of reactions on the longest root path.
    pub fn depth(&self) -> usize {
        (0..self.nodes.len())
            .map(|mut i| {
                let mut d = 0;
                while let Some(p) = self.nodes[i].parent {
                    d += 1;
                    i = p;
                }
                d
            })
            .max()
            .unwrap_or(0)
    }
}

/// Every way of rewriting one non-purchasable molecule of `mols` with `t`:
/// the expansion and the resulting molecule set.
fn apply_template_to_molecule_set(
    mols: &[String],
    purchasable: &[bool],
    t: &RetroTemplate,
    stock: Option<&StockSet>,
) -> Vec<(Expansion, Vec<String>)> {
    let mut out: Vec<(Expansion, Vec<String>)> = Vec::new();
    for (k, smiles) in mols.iter().enumerate() {
        if purchasable[k] {
            continue;
        }
        let Ok(mol) = Molecule::parse(smiles) else { continue };
        for set in t.apply(&mol) {
            let mut next: Vec<String> = mols.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, s)| s.clone()).collect();
            next.extend(set.smiles());
            next.sort();
            next.dedup();
            if out.iter().any(|(_, m)| *m == next) {
                continue;
            }
            let e = Expansion {
                product: smiles.clone(),
                template_hash: t.hash(),
                template_smarts: t.canonical_smarts().to_string(),
                reactants: set
                    .smiles()
                    .into_iter()
                    .map(|s| {
                        let p = stock.is_some_and(|st| st.contains_canonical(&s));
                        (s, p)
                    })
                    .collect(),
            };
            out.push((e, next));
        }
    }
    out
}

/// Builds the molecule-set graph for a template sequence: each template is
/// applied to every frontier node; nodes it yields become the next frontier,
/// and when it yields none the frontier is kept for the next template.
/// Decoding stops at the first template that failed to parse.
pub fn reconstruct_routes(target: &Molecule, seq: &TemplateSequence, stock: Option<&StockSet>) -> MolSetGraph {
    let root_smiles = target.canonical_smiles().to_string();
    let mut graph = MolSetGraph {
        target: root_smiles.clone(),
        nodes: vec![MolSetNode {
            mols: vec![root_smiles],
            purchasable: vec![stock.is_some_and(|s| s.contains(target))],
            parent: None,
            children: Vec::new(),
            template_index: None,
            expansion: None,
        }],
    };
    let mut current = vec![0usize];
    for (i, t) in seq.valid_prefix().into_iter().enumerate() {
        let mut next = Vec::new();
        for &n in &current {
            let results = apply_template_to_molecule_set(&graph.nodes[n].mols, &graph.nodes[n].purchasable, t, stock);
            for (expansion, mols) in results {
                let id = graph.nodes.len();
                graph.nodes.push(MolSetNode {
                    purchasable: vec![false; mols.len()],
                    mols,
                    parent: Some(n),
                    children: Vec::new(),
                    template_index: None,
                    expansion: Some(expansion),
                });
                graph.nodes[n].children.push(id);
                next.push(id);
            }
        }
        for &id in &next {
            let node = &mut graph.nodes[id];
            node.template_index = Some(i);
            if let Some(s) = stock {
                node.purchasable = node.mols.iter().map(|m| s.contains_canonical(m)).collect();
            }
        }
        if !next.is_empty() {
            current = next;
        }
    }
    graph
}
