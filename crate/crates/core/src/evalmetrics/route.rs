use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const DEFAULT_EPS: f64 = 1.0;
pub const DEFAULT_YIELD: f64 = 0.8;

/// A synthesis route: a molecule, optionally made by one reaction whose
/// children are the precursor molecules.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "WireNode", into = "WireNode")]
pub struct RouteTree {
    pub smiles: String,
    pub in_stock: bool,
    pub reaction: Option<RouteStep>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RouteStep {
    /// Template SMARTS, when known.
    pub template: Option<String>,
    pub children: Vec<RouteTree>,
}

impl RouteTree {
    pub fn leaf(smiles: impl Into<String>, in_stock: bool) -> RouteTree {
        RouteTree {
            smiles: smiles.into(),
            in_stock,
            reaction: None,
        }
    }

    pub fn step(smiles: impl Into<String>, template: Option<String>, children: Vec<RouteTree>) -> RouteTree {
        RouteTree {
            smiles: smiles.into(),
            in_stock: false,
            reaction: Some(RouteStep { template, children }),
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.reaction.is_none()
    }

    pub fn children(&self) -> &[RouteTree] {
        self.reaction.as_ref().map(|r| r.children.as_slice()).unwrap_or(&[])
    }

    /// Number of reaction steps.
    pub fn len(&self) -> usize {
        self.reaction
            .as_ref()
            .map(|r| 1 + r.children.iter().map(RouteTree::len).sum::<usize>())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.reaction.is_none()
    }

    /// Longest chain of steps from the root to a leaf.
    pub fn depth(&self) -> usize {
        self.reaction
            .as_ref()
            .map(|r| 1 + r.children.iter().map(RouteTree::depth).max().unwrap_or(0))
            .unwrap_or(0)
    }

    pub fn leaves(&self) -> Vec<&RouteTree> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            match &n.reaction {
                None => out.push(n),
                Some(r) => stack.extend(r.children.iter().rev()),
            }
        }
        out
    }

    /// Every leaf is in stock.
    pub fn is_solved(&self) -> bool {
        self.leaves().iter().all(|l| l.in_stock)
    }

    pub fn num_molecules(&self) -> usize {
        1 + self.children().iter().map(RouteTree::num_molecules).sum::<usize>()
    }

    /// Copy with children sorted by their canonical molecule string, at
    /// every level.
    pub fn canonicalized(&self) -> RouteTree {
        let mut out = self.clone();
        out.canonicalize_in_place();
        out
    }

    fn canonicalize_in_place(&mut self) {
        if let Some(r) = &mut self.reaction {
            for c in &mut r.children {
                c.canonicalize_in_place();
            }
            r.children.sort_by_cached_key(|c| c.molecule_string());
        }
    }

    /// Molecule-only bracket form of the canonicalized tree, e.g.
    /// `CC(=O)NC(CC(=O)O,CN)`.
    pub fn molecule_string(&self) -> String {
        let mut kids: Vec<String> = self.children().iter().map(RouteTree::molecule_string).collect();
        kids.sort();
        if kids.is_empty() {
            self.smiles.clone()
        } else {
            format!("{}({})", self.smiles, kids.join(","))
        }
    }

    /// SHA-256 of the molecule-only canonical form; equal exactly when two
    /// routes are at tree edit distance zero.
    pub fn route_hash(&self) -> String {
        hex::encode(Sha256::digest(self.molecule_string().as_bytes()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("route serializes")
    }
}

impl fmt::Display for RouteTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.molecule_string())
    }
}

/// `cost(m) = eps + Σ cost(m') / yld` over precursors `m'`; leaves cost 0.
pub fn route_cost(r: &RouteTree, eps: f64, yld: f64) -> f64 {
    assert!(yld > 0.0 && yld <= 1.0, "yield must lie in (0, 1]");
    match &r.reaction {
        None => 0.0,
        Some(step) => eps + step.children.iter().map(|c| route_cost(c, eps, yld) / yld).sum::<f64>(),
    }
}

// JSON shape: {"smiles", "in_stock", "children": [{"template", "nodes"}]}
#[derive(Serialize, Deserialize)]
struct WireNode {
    smiles: String,
    #[serde(default)]
    in_stock: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<WireStep>,
}

#[derive(Serialize, Deserialize)]
struct WireStep {
    #[serde(default)]
    template: Option<String>,
    nodes: Vec<WireNode>,
}

impl From<RouteTree> for WireNode {
    fn from(r: RouteTree) -> WireNode {
        WireNode {
            smiles: r.smiles,
            in_stock: r.in_stock,
            children: r
                .reaction
                .map(|step| WireStep {
                    template: step.template,
                    nodes: step.children.into_iter().map(WireNode::from).collect(),
                })
                .into_iter()
                .collect(),
        }
    }
}

impl TryFrom<WireNode> for RouteTree {
    type Error = String;

    fn try_from(w: WireNode) -> Result<RouteTree, String> {
        if w.children.len() > 1 {
            return Err(format!("{} has more than one reaction", w.smiles));
        }
        let reaction = match w.children.into_iter().next() {
            None => None,
            Some(step) => {
                if step.nodes.is_empty() {
                    return Err(format!("reaction under {} has no precursors", w.smiles));
                }
                let children = step
                    .nodes
                    .into_iter()
                    .map(RouteTree::try_from)
                    .collect::<Result<Vec<_>, _>>()?;
                Some(RouteStep {
                    template: step.template,
                    children,
                })
            }
        };
        Ok(RouteTree {
            smiles: w.smiles,
            in_stock: w.in_stock,
            reaction,
        })
    }
}
