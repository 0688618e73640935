use std::collections::HashSet;

use super::{tree_edit_distance, RouteTree};

/// A reactant set as sorted canonical SMILES.
pub type ReactantKey = Vec<String>;

/// Where the ground truth goes among the outcomes of one template.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Last among the template's outcomes.
    Pessimistic,
    /// First among the template's outcomes.
    Optimistic,
}

/// 1-based rank of `truth` in the flattened prediction list. `groups` holds
/// the reactant sets of each proposed template in rank order; within a
/// group the truth is moved according to `placement`, then repeated sets
/// are dropped keeping the first occurrence.
pub fn ground_truth_rank(groups: &[Vec<ReactantKey>], truth: &ReactantKey, placement: Placement) -> Option<usize> {
    let mut seen: HashSet<&ReactantKey> = HashSet::new();
    let mut rank = 0;
    for group in groups {
        let (hits, others): (Vec<&ReactantKey>, Vec<&ReactantKey>) = group.iter().partition(|s| *s == truth);
        let ordered: Vec<&ReactantKey> = match placement {
            Placement::Pessimistic => others.into_iter().chain(hits).collect(),
            Placement::Optimistic => hits.into_iter().chain(others).collect(),
        };
        for s in ordered {
            if !seen.insert(s) {
                continue;
            }
            rank += 1;
            if s == truth {
                return Some(rank);
            }
        }
    }
    None
}

/// Fraction of ranks within `1..=k`, for every `k` up to `kmax`.
pub fn accuracy_from_ranks(ranks: &[Option<usize>], kmax: usize) -> Vec<f64> {
    if ranks.is_empty() {
        return vec![0.0; kmax];
    }
    (1..=kmax)
        .map(|k| ranks.iter().filter(|r| r.is_some_and(|r| r <= k)).count() as f64 / ranks.len() as f64)
        .collect()
}

/// Single-step top-k accuracy with pessimistic multi-site placement.
pub fn topk_single_step(cases: &[(Vec<Vec<ReactantKey>>, ReactantKey)], kmax: usize) -> Vec<f64> {
    topk_single_step_with(cases, kmax, Placement::Pessimistic)
}

pub fn topk_single_step_with(cases: &[(Vec<Vec<ReactantKey>>, ReactantKey)], kmax: usize, placement: Placement) -> Vec<f64> {
    let ranks: Vec<Option<usize>> = cases
        .iter()
        .map(|(groups, truth)| ground_truth_rank(groups, truth, placement))
        .collect();
    accuracy_from_ranks(&ranks, kmax)
}

/// 1-based rank of the first predicted route at edit distance zero from the
/// ground truth.
pub fn route_rank(predicted: &[RouteTree], truth: &RouteTree) -> Option<usize> {
    predicted.iter().position(|r| tree_edit_distance(r, truth) == 0).map(|i| i + 1)
}

pub fn route_accuracy(cases: &[(Vec<RouteTree>, RouteTree)], kmax: usize) -> Vec<f64> {
    let ranks: Vec<Option<usize>> = cases.iter().map(|(p, t)| route_rank(p, t)).collect();
    accuracy_from_ranks(&ranks, kmax)
}

pub fn solve_rate(solved: &[bool]) -> f64 {
    if solved.is_empty() {
        return 0.0;
    }
    solved.iter().filter(|&&s| s).count() as f64 / solved.len() as f64
}
