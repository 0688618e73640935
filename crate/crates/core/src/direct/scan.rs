use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chem::Molecule;
use crate::evalmetrics::RouteTree;
use crate::policy::{PolicyError, RouteSampler};
use crate::search::StockSet;
use crate::tokenizer::{condition_leaf_atoms, condition_steps};

use super::{reconstruct_routes, TemplateSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScanVariant {
    Vanilla,
    NStep,
    NineStep,
    LeafSize,
}

impl ScanVariant {
    /// (condition, samples) requests issued by the variant.
    pub fn plan(self) -> Vec<(Option<String>, usize)> {
        match self {
            ScanVariant::Vanilla => vec![(None, 50)],
            ScanVariant::NStep => (2..=9).map(|n| (Some(condition_steps(n)), 10)).collect(),
            ScanVariant::NineStep => vec![(Some(condition_steps(9)), 50)],
            ScanVariant::LeafSize => (10..=40).step_by(5).map(|n| (Some(condition_leaf_atoms(n)), 10)).collect(),
        }
    }

    pub fn total_samples(self) -> usize {
        self.plan().iter().map(|(_, n)| n).sum()
    }
}

impl fmt::Display for ScanVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanVariant::Vanilla => "vanilla",
            ScanVariant::NStep => "n-step",
            ScanVariant::NineStep => "9-step",
            ScanVariant::LeafSize => "leaf-size",
        })
    }
}

impl FromStr for ScanVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<ScanVariant, String> {
        match s {
            "vanilla" => Ok(ScanVariant::Vanilla),
            "n-step" | "n_step" => Ok(ScanVariant::NStep),
            "9-step" | "nine-step" | "nine_step" => Ok(ScanVariant::NineStep),
            "leaf-size" | "leaf_size" => Ok(ScanVariant::LeafSize),
            other => Err(format!("unknown variant {other:?}; expected vanilla, n-step, 9-step or leaf-size")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectRoute {
    pub route: RouteTree,
    pub log_prob: f64,
    pub condition: Option<String>,
}

/// Issues the variant's sampling plan and reconstructs every returned
/// sequence. Routes come back in (condition, sample, terminal node) order.
pub fn condition_scan(
    target: &Molecule,
    sampler: &dyn RouteSampler,
    variant: ScanVariant,
    stock: Option<&StockSet>,
) -> Result<Vec<DirectRoute>, PolicyError> {
    let mut out = Vec::new();
    for (condition, n) in variant.plan() {
        let samples = sampler.sample_routes(target, n, condition.as_deref())?;
        for s in samples {
            let seq = TemplateSequence::from_smarts(&s.templates, s.log_prob, condition.clone());
            let graph = reconstruct_routes(target, &seq, stock);
            for route in graph.terminal_routes() {
                out.push(DirectRoute {
                    route,
                    log_prob: s.log_prob,
                    condition: condition.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Solved routes first, then fewer steps, then higher log-probability.
pub fn compare_direct(a: (bool, usize, f64), b: (bool, usize, f64)) -> Ordering {
    b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(b.2.total_cmp(&a.2))
}

/// Stable sort by [`compare_direct`].
pub fn rank_direct_routes(mut routes: Vec<DirectRoute>) -> Vec<DirectRoute> {
    routes.sort_by_cached_key(|r| (!r.route.is_solved(), r.route.len(), std::cmp::Reverse(OrdF64(r.log_prob))));
    routes
}

/// Drops routes whose canonical form already appeared, keeping the first.
pub fn dedup_routes(routes: Vec<DirectRoute>) -> Vec<DirectRoute> {
    let mut seen = std::collections::HashSet::new();
    routes.into_iter().filter(|r| seen.insert(r.route.route_hash())).collect()
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}
