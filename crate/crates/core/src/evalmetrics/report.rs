use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{accuracy_from_ranks, solve_rate};

/// Template-frequency bucket lower bounds.
pub const DEFAULT_FREQUENCY_EDGES: &[u64] = &[0, 1, 10, 100, 500, 2500];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("target {target} lacks {field}")]
    MissingStratumMetadata { target: String, field: &'static str },
}

/// Outcome for one evaluation target.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TargetResult {
    pub target: String,
    pub solved: bool,
    /// 1-based rank of the first correct prediction.
    pub rank: Option<usize>,
    #[serde(default)]
    pub predicted_length: Option<usize>,
    #[serde(default)]
    pub ground_truth_length: Option<usize>,
    #[serde(default)]
    pub template_frequency: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Strata {
    /// Overall numbers only.
    None,
    TemplateFrequency(Vec<u64>),
    RouteLength,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketRow {
    pub label: String,
    pub n: usize,
    /// Absent for empty buckets.
    pub topk: Option<Vec<f64>>,
    pub solve_rate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub topk: Vec<f64>,
    pub solve_rate: f64,
    pub buckets: Vec<BucketRow>,
    /// Predicted minus ground-truth step count, over targets with both.
    pub length_difference: BTreeMap<i64, usize>,
    pub invalid: usize,
    pub duplicates: usize,
}

fn row(label: String, members: &[&TargetResult], kmax: usize) -> BucketRow {
    if members.is_empty() {
        return BucketRow {
            label,
            n: 0,
            topk: None,
            solve_rate: None,
        };
    }
    let ranks: Vec<Option<usize>> = members.iter().map(|r| r.rank).collect();
    let solved: Vec<bool> = members.iter().map(|r| r.solved).collect();
    BucketRow {
        label,
        n: members.len(),
        topk: Some(accuracy_from_ranks(&ranks, kmax)),
        solve_rate: Some(solve_rate(&solved)),
    }
}

fn frequency_label(edges: &[u64], i: usize) -> String {
    match (edges[i], edges.get(i + 1)) {
        (lo, Some(&hi)) if hi == lo + 1 => format!("{lo}"),
        (lo, Some(&hi)) => format!("{lo}-{}", hi - 1),
        (lo, None) => format!(">={lo}"),
    }
}

pub fn stratified_report(results: &[TargetResult], strata: &Strata, kmax: usize) -> Result<EvalReport, ReportError> {
    let mut buckets = Vec::new();
    match strata {
        Strata::None => {}
        Strata::TemplateFrequency(edges) => {
            let mut members: Vec<Vec<&TargetResult>> = vec![Vec::new(); edges.len()];
            for r in results {
                let f = r.template_frequency.ok_or_else(|| ReportError::MissingStratumMetadata {
                    target: r.target.clone(),
                    field: "template_frequency",
                })?;
                if let Some(i) = edges.iter().rposition(|&lo| f >= lo) {
                    members[i].push(r);
                }
            }
            for (i, m) in members.iter().enumerate() {
                buckets.push(row(frequency_label(edges, i), m, kmax));
            }
        }
        Strata::RouteLength => {
            let mut members: BTreeMap<usize, Vec<&TargetResult>> = BTreeMap::new();
            for r in results {
                let len = r.ground_truth_length.ok_or_else(|| ReportError::MissingStratumMetadata {
                    target: r.target.clone(),
                    field: "ground_truth_length",
                })?;
                members.entry(len).or_default().push(r);
            }
            for (len, m) in members {
                buckets.push(row(format!("{len} steps"), &m, kmax));
            }
        }
    }
    let mut length_difference = BTreeMap::new();
    for r in results {
        if let (Some(p), Some(g)) = (r.predicted_length, r.ground_truth_length) {
            *length_difference.entry(p as i64 - g as i64).or_default() += 1;
        }
    }
    let ranks: Vec<Option<usize>> = results.iter().map(|r| r.rank).collect();
    let solved: Vec<bool> = results.iter().map(|r| r.solved).collect();
    Ok(EvalReport {
        n: results.len(),
        topk: accuracy_from_ranks(&ranks, kmax),
        solve_rate: solve_rate(&solved),
        buckets,
        length_difference,
        invalid: 0,
        duplicates: 0,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned columns for reading in a terminal.
    pub fn to_text(&self) -> String {
        let kmax = self.topk.len();
        let mut out = String::new();
        let _ = writeln!(out, "targets     {}", self.n);
        let _ = writeln!(out, "solve rate  {:.4}", self.solve_rate);
        for (k, a) in self.topk.iter().enumerate() {
            let _ = writeln!(out, "top-{:<7} {a:.4}", k + 1);
        }
        if self.invalid + self.duplicates > 0 {
            let _ = writeln!(out, "invalid     {}", self.invalid);
            let _ = writeln!(out, "duplicates  {}", self.duplicates);
        }
        if !self.buckets.is_empty() {
            let width = self.buckets.iter().map(|b| b.label.len()).max().unwrap_or(0).max(6);
            let _ = write!(out, "\n{:<width$}  {:>6}  {:>6}", "bucket", "n", "solve");
            for k in 1..=kmax {
                let _ = write!(out, "  {:>6}", format!("top{k}"));
            }
            out.push('\n');
            for b in &self.buckets {
                let _ = write!(out, "{:<width$}  {:>6}", b.label, b.n);
                match (&b.solve_rate, &b.topk) {
                    (Some(s), Some(t)) => {
                        let _ = write!(out, "  {s:>6.3}");
                        for a in t {
                            let _ = write!(out, "  {a:>6.3}");
                        }
                    }
                    _ => {
                        let _ = write!(out, "  {:>6}", "-");
                        for _ in 0..kmax {
                            let _ = write!(out, "  {:>6}", "-");
                        }
                    }
                }
                out.push('\n');
            }
        }
        if !self.length_difference.is_empty() {
            out.push_str("\nlength difference\n");
            for (d, c) in &self.length_difference {
                let _ = writeln!(out, "{d:>+4}  {c}");
            }
        }
        out
    }

    /// Bucket table as CSV; empty buckets leave their rate cells blank.
    pub fn buckets_csv(&self) -> String {
        let kmax = self.topk.len();
        let mut out = String::from("bucket,n,solve_rate");
        for k in 1..=kmax {
            let _ = write!(out, ",top{k}");
        }
        out.push('\n');
        for b in &self.buckets {
            let _ = write!(out, "{},{}", b.label, b.n);
            match (&b.solve_rate, &b.topk) {
                (Some(s), Some(t)) => {
                    let _ = write!(out, ",{s}");
                    for a in t {
                        let _ = write!(out, ",{a}");
                    }
                }
                _ => out.push_str(&",".repeat(kmax + 1)),
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(rank: Option<usize>, freq: u64, len: usize) -> TargetResult {
        TargetResult {
            target: format!("t{freq}-{len}"),
            solved: rank.is_some(),
            rank,
            predicted_length: Some(len),
            ground_truth_length: Some(len),
            template_frequency: Some(freq),
        }
    }

    #[test]
    fn single_bucket_matches_global() {
        let rs = vec![result(Some(1), 5, 2), result(None, 7, 3), result(Some(3), 3, 2)];
        let rep = stratified_report(&rs, &Strata::TemplateFrequency(vec![0]), 5).unwrap();
        assert_eq!(rep.buckets.len(), 1);
        assert_eq!(rep.buckets[0].topk.as_ref().unwrap(), &rep.topk);
        assert_eq!(rep.length_difference, BTreeMap::from([(0, 3)]));
    }

    #[test]
    fn empty_bucket_has_no_rate() {
        let rs = vec![result(Some(1), 5, 2)];
        let rep = stratified_report(&rs, &Strata::TemplateFrequency(DEFAULT_FREQUENCY_EDGES.to_vec()), 3).unwrap();
        assert_eq!(rep.buckets[0].label, "0");
        assert_eq!(rep.buckets[1].label, "1-9");
        assert_eq!(rep.buckets[5].label, ">=2500");
        assert_eq!(rep.buckets[0].n, 0);
        assert!(rep.buckets[0].topk.is_none());
        assert!(rep.buckets_csv().contains("\n0,0,,,,\n"));
        assert!(rep.to_text().contains("solve rate  1.0000"));
    }

    #[test]
    fn missing_metadata() {
        let r = TargetResult {
            target: "x".into(),
            ..TargetResult::default()
        };
        assert!(matches!(
            stratified_report(&[r], &Strata::RouteLength, 1),
            Err(ReportError::MissingStratumMetadata { .. })
        ));
    }
}
