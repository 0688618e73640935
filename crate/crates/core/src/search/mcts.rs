use std::collections::HashMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chem::Molecule;
use crate::policy::{normalize_priors, propose, PolicyBackend, PolicyConfig, PolicyError, SINGLE_STEP_BEAM_SIZE};
use crate::template::TemplateLibrary;

use super::StockSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub c_pucb: f64,
    pub temperature: f64,
    pub expansions: usize,
    pub max_iterations: usize,
    pub time_limit_s: f64,
    pub q_init: f64,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            c_pucb: 100.0,
            temperature: 3.0,
            expansions: 10,
            max_iterations: 500,
            time_limit_s: 300.0,
            q_init: 0.5,
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    Config(String),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let positive = [
            ("c_pucb", self.c_pucb),
            ("temperature", self.temperature),
            ("time_limit_s", self.time_limit_s),
            ("q_init", self.q_init),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SearchError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.q_init > 1.0 {
            return Err(SearchError::Config(format!("q_init must not exceed 1, got {}", self.q_init)));
        }
        if self.expansions == 0 || self.max_iterations == 0 {
            return Err(SearchError::Config("expansions and max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// `Q + C·π·√N(parent) / (1 + N)`.
pub fn puct_score(q: f64, prior: f64, parent_visits: u64, visits: u64, c_pucb: f64) -> f64 {
    q + c_pucb * prior * (parent_visits as f64).sqrt() / (1.0 + visits as f64)
}

/// One visit: `Q ← (r + Q·N) / (N + 1)`, `N ← N + 1`.
pub fn q_update(q: f64, visits: u64, reward: f64) -> (f64, u64) {
    ((reward + q * visits as f64) / (visits as f64 + 1.0), visits + 1)
}

/// The reaction that created a node: which open molecule was expanded,
/// with which template, into which precursors.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub product: String,
    pub template_hash: String,
    pub template_smarts: String,
    /// Canonical SMILES with in-stock flags.
    pub reactants: Vec<(String, bool)>,
}

#[derive(Debug, Clone)]
pub struct SearchNode {
    /// Open molecules, sorted by canonical SMILES.
    pub mols: Vec<Molecule>,
    pub visits: u64,
    pub q: f64,
    pub prior: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub expansion: Option<Expansion>,
    pub expanded: bool,
    /// Some node in the subtree (itself included) is solved.
    pub subtree_solved: bool,
    /// Expanded with no live children.
    pub dead: bool,
}

impl SearchNode {
    pub fn is_solved(&self) -> bool {
        self.mols.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStats {
    pub solved: bool,
    pub first_solution_iter: Option<usize>,
    pub first_solution_time_s: Option<f64>,
    pub iterations: usize,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub target: Molecule,
    pub nodes: Vec<SearchNode>,
    pub stats: SearchStats,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.stats.solved
    }

    pub fn root(&self) -> &SearchNode {
        &self.nodes[0]
    }

    /// Edges from the root down to `node`.
    pub fn path_expansions(&self, node: usize) -> Vec<&Expansion> {
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
}

/// Outcomes of expanding one molecule: (prior, expansion, open precursors).
type Outcome = (f64, Expansion, Vec<Molecule>);

struct Search<'a> {
    backend: &'a dyn PolicyBackend,
    library: Option<&'a TemplateLibrary>,
    stock: &'a StockSet,
    cfg: &'a SearchConfig,
    nodes: Vec<SearchNode>,
    cache: HashMap<String, Vec<Outcome>>,
}

/// Runs P-UCB tree search with the policy unrestricted.
pub fn run_search(target: &Molecule, backend: &dyn PolicyBackend, stock: &StockSet, cfg: &SearchConfig) -> Result<SearchResult, SearchError> {
    run_search_with(target, backend, stock, cfg, None)
}

/// Runs P-UCB tree search; with a library, proposals are strict-filtered.
pub fn run_search_with(
    target: &Molecule,
    backend: &dyn PolicyBackend,
    stock: &StockSet,
    cfg: &SearchConfig,
    library: Option<&TemplateLibrary>,
) -> Result<SearchResult, SearchError> {
    cfg.validate()?;
    let start = Instant::now();
    let mols = if stock.contains(target) { Vec::new() } else { vec![target.clone()] };
    let root = SearchNode {
        subtree_solved: mols.is_empty(),
        mols,
        visits: 0,
        q: cfg.q_init,
        prior: 1.0,
        parent: None,
        children: Vec::new(),
        expansion: None,
        expanded: false,
        dead: false,
    };
    let mut s = Search {
        backend,
        library,
        stock,
        cfg,
        nodes: vec![root],
        cache: HashMap::new(),
    };
    let mut stats = SearchStats {
        solved: false,
        first_solution_iter: None,
        first_solution_time_s: None,
        iterations: 0,
        nodes: 1,
    };
    if s.nodes[0].is_solved() {
        stats.solved = true;
        stats.first_solution_iter = Some(0);
        stats.first_solution_time_s = Some(start.elapsed().as_secs_f64());
        return Ok(SearchResult {
            target: target.clone(),
            nodes: s.nodes,
            stats,
        });
    }
    while stats.iterations < cfg.max_iterations && start.elapsed().as_secs_f64() < cfg.time_limit_s {
        if s.nodes[0].dead {
            break;
        }
        let leaf = s.select();
        let reward = if s.nodes[leaf].is_solved() {
            1.0
        } else {
            s.expand(leaf)?;
            if s.nodes[leaf].subtree_solved { 1.0 } else { 0.0 }
        };
        s.backpropagate(leaf, reward);
        stats.iterations += 1;
        if s.nodes[0].subtree_solved && stats.first_solution_iter.is_none() {
            stats.first_solution_iter = Some(stats.iterations);
            stats.first_solution_time_s = Some(start.elapsed().as_secs_f64());
        }
    }
    stats.solved = s.nodes[0].subtree_solved;
    stats.nodes = s.nodes.len();
    Ok(SearchResult {
        target: target.clone(),
        nodes: s.nodes,
        stats,
    })
}

impl Search<'_> {
    /// Descends by maximal P-UCB among live children; the first-created
    /// child wins ties.
    fn select(&self) -> usize {
        let mut cur = 0;
        loop {
            let node = &self.nodes[cur];
            if !node.expanded || node.is_solved() {
                return cur;
            }
            let mut best: Option<(usize, f64)> = None;
            for &c in &node.children {
                let ch = &self.nodes[c];
                if ch.dead {
                    continue;
                }
                let score = puct_score(ch.q, ch.prior, node.visits, ch.visits, self.cfg.c_pucb);
                if best.is_none_or(|(_, b)| score > b) {
                    best = Some((c, score));
                }
            }
            match best {
                Some((c, _)) => cur = c,
                None => return cur,
            }
        }
    }

    /// Molecules already expanded on the path to `node`, used to refuse
    /// loops.
    fn ancestors_products(&self, node: usize) -> Vec<String> {
        let mut out = Vec::new();
        let mut cur = Some(node);
        while let Some(i) = cur {
            if let Some(e) = &self.nodes[i].expansion {
                out.push(e.product.clone());
            }
            cur = self.nodes[i].parent;
        }
        out
    }

    fn outcomes(&mut self, mol: &Molecule) -> Result<Vec<Outcome>, SearchError> {
        if let Some(o) = self.cache.get(mol.canonical_smiles()) {
            return Ok(o.clone());
        }
        let pcfg = PolicyConfig {
            k: self.cfg.expansions,
            temperature: self.cfg.temperature,
            strict: self.library.is_some(),
            beam_size: SINGLE_STEP_BEAM_SIZE,
        };
        let batch = propose(self.backend, mol, &pcfg, self.library, None)?;
        let log_probs: Vec<f64> = batch.proposals.iter().map(|p| p.log_prob).collect();
        let priors = normalize_priors(&log_probs, self.cfg.temperature);
        let mut out = Vec::new();
        for (p, prior) in batch.proposals.iter().zip(priors) {
            let sets = p.template.apply(mol);
            let share = prior / sets.len().max(1) as f64;
            for set in sets {
                let reactants: Vec<(String, bool)> = set
                    .molecules()
                    .iter()
                    .map(|m| (m.canonical_smiles().to_string(), self.stock.contains(m)))
                    .collect();
                let open: Vec<Molecule> = set.molecules().iter().filter(|m| !self.stock.contains(m)).cloned().collect();
                let e = Expansion {
                    product: mol.canonical_smiles().to_string(),
                    template_hash: p.template.hash(),
                    template_smarts: p.template.canonical_smarts().to_string(),
                    reactants,
                };
                out.push((share, e, open));
            }
        }
        self.cache.insert(mol.canonical_smiles().to_string(), out.clone());
        Ok(out)
    }

    /// Expands the largest open molecule of `leaf`.
    fn expand(&mut self, leaf: usize) -> Result<(), SearchError> {
        let target = self.nodes[leaf]
            .mols
            .iter()
            .max_by(|a, b| {
                a.num_atoms()
                    .cmp(&b.num_atoms())
                    .then_with(|| b.canonical_smiles().cmp(a.canonical_smiles()))
            })
            .cloned()
            .expect("unsolved node has open molecules");
        let outcomes = self.outcomes(&target)?;
        let mut seen_on_path = self.ancestors_products(leaf);
        seen_on_path.push(target.canonical_smiles().to_string());
        self.nodes[leaf].expanded = true;
        for (prior, expansion, open) in outcomes {
            if open.iter().any(|m| seen_on_path.iter().any(|s| s == m.canonical_smiles())) {
                continue;
            }
            let mut mols: Vec<Molecule> = self.nodes[leaf]
                .mols
                .iter()
                .filter(|m| m.canonical_smiles() != target.canonical_smiles())
                .cloned()
                .chain(open)
                .collect();
            mols.sort_by(|a, b| a.canonical_smiles().cmp(b.canonical_smiles()));
            mols.dedup();
            let solved = mols.is_empty();
            let id = self.nodes.len();
            self.nodes.push(SearchNode {
                mols,
                visits: 0,
                q: self.cfg.q_init,
                prior,
                parent: Some(leaf),
                children: Vec::new(),
                expansion: Some(expansion),
                expanded: false,
                subtree_solved: solved,
                dead: false,
            });
            self.nodes[leaf].children.push(id);
            if solved {
                self.mark_solved(leaf);
            }
        }
        if self.nodes[leaf].children.is_empty() {
            self.mark_dead(leaf);
        }
        Ok(())
    }

    fn mark_solved(&mut self, from: usize) {
        let mut cur = Some(from);
        while let Some(i) = cur {
            self.nodes[i].subtree_solved = true;
            cur = self.nodes[i].parent;
        }
    }

    fn mark_dead(&mut self, from: usize) {
        let mut cur = Some(from);
        while let Some(i) = cur {
            let n = &self.nodes[i];
            let alive = n.is_solved() || !n.expanded || n.children.iter().any(|&c| !self.nodes[c].dead);
            if alive {
                break;
            }
            self.nodes[i].dead = true;
            cur = self.nodes[i].parent;
        }
    }

    /// Updates every node from `leaf` to the root once. Each node's reward
    /// is 1 when its subtree holds a solution, so ancestors of a solved
    /// branch are rewarded even on a failed visit elsewhere.
    fn backpropagate(&mut self, leaf: usize, reward: f64) {
        let mut cur = Some(leaf);
        while let Some(i) = cur {
            let n = &mut self.nodes[i];
            let r = if n.subtree_solved { 1.0 } else { reward };
            (n.q, n.visits) = q_update(n.q, n.visits, r);
            cur = n.parent;
        }
    }
}
