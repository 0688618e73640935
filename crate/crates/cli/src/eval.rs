use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use retroplan::chem::canonicalize;
use retroplan::evalmetrics::{
    ground_truth_rank, route_rank, stratified_report, EvalReport, Placement, ReactantKey, RouteTree, Strata, TargetResult,
    DEFAULT_FREQUENCY_EDGES,
};

use crate::config::{pick, ConfigFile};
use crate::error::{CliError, Result};
use crate::io::{read_jsonl_strict, write_atomic};
use crate::manifest::ManifestBuilder;

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum StrataArg {
    None,
    TemplateFrequency,
    RouteLength,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum PlacementArg {
    Pessimistic,
    Optimistic,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub predictions: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Report JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Aligned-column text copy of the report.
    #[arg(long)]
    pub text: Option<PathBuf>,
    /// CSV of the stratified table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Largest k reported (default 10).
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long, value_enum)]
    pub strata: Option<StrataArg>,
    /// Template-frequency bucket lower edges, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub edges: Option<Vec<u64>>,
}

fn parse_setting<T: for<'de> Deserialize<'de>>(name: &str, value: Option<&String>) -> Result<Option<T>> {
    value
        .map(|v| serde_json::from_value(json!(v)).map_err(|_| CliError::Config(format!("unknown {name} {v:?}"))))
        .transpose()
}

fn strata_of(a: &ReportArgs, cfg: &ConfigFile, default: StrataArg) -> Result<(StrataArg, Strata)> {
    let from_cfg = parse_setting::<StrataArg>("eval.strata", cfg.eval.strata.as_ref())?;
    let kind = pick(a.strata, from_cfg, default);
    let strata = match kind {
        StrataArg::None => Strata::None,
        StrataArg::RouteLength => Strata::RouteLength,
        StrataArg::TemplateFrequency => {
            Strata::TemplateFrequency(a.edges.clone().unwrap_or_else(|| DEFAULT_FREQUENCY_EDGES.to_vec()))
        }
    };
    Ok((kind, strata))
}

fn schema(path: &Path, line: usize, message: String) -> CliError {
    CliError::Schema {
        path: path.display().to_string(),
        diagnostics: format!("  line {line}: {message}"),
    }
}

fn write_report(a: &ReportArgs, report: &EvalReport, m: &mut ManifestBuilder) -> Result<()> {
    write_atomic(&a.out, report.to_json().as_bytes())?;
    m.output(&a.out);
    if let Some(p) = &a.text {
        write_atomic(p, report.to_text().as_bytes())?;
        m.output(p);
    }
    if let Some(p) = &a.csv {
        write_atomic(p, report.buckets_csv().as_bytes())?;
        m.output(p);
    }
    print!("{}", report.to_text());
    Ok(())
}

#[derive(Args)]
pub struct SingleStepArgs {
    #[command(flatten)]
    pub report: ReportArgs,
    /// Where the truth goes among one template's outcomes (default pessimistic).
    #[arg(long, value_enum)]
    pub placement: Option<PlacementArg>,
}

/// Reactant sets proposed for one target, grouped by template in rank
/// order.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SinglePrediction {
    target: String,
    groups: Vec<Vec<Vec<String>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SingleTruth {
    target: String,
    reactants: Vec<String>,
    #[serde(default)]
    template_frequency: Option<u64>,
}

fn key_of(smiles: &[String]) -> std::result::Result<ReactantKey, String> {
    let mut k = smiles
        .iter()
        .flat_map(|s| s.split('.'))
        .map(|s| canonicalize(s).map_err(|e| format!("{s}: {e}")))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    k.sort();
    Ok(k)
}

fn canonical_target(path: &Path, line: usize, s: &str) -> Result<String> {
    canonicalize(s).map_err(|e| schema(path, line, format!("target {s}: {e}")))
}

pub fn single_step(a: SingleStepArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let r = &a.report;
    let kmax = pick(r.kmax, cfg.eval.kmax, 10);
    let placement_cfg = parse_setting::<PlacementArg>("eval.placement", cfg.eval.placement.as_ref())?;
    let placement = pick(a.placement, placement_cfg, PlacementArg::Pessimistic);
    let (kind, strata) = strata_of(r, cfg, StrataArg::None)?;
    let mut m = ManifestBuilder::new("eval-single-step", json!({ "kmax": kmax, "placement": placement, "strata": kind }));
    m.input(&r.predictions)?;
    m.input(&r.truth)?;
    let preds: Vec<(usize, SinglePrediction)> = read_jsonl_strict(&r.predictions)?;
    let truths: Vec<(usize, SingleTruth)> = read_jsonl_strict(&r.truth)?;

    let mut invalid = 0;
    let mut duplicates = 0;
    let mut by_target: BTreeMap<String, Vec<Vec<ReactantKey>>> = BTreeMap::new();
    for (line, p) in preds {
        let target = canonical_target(&r.predictions, line, &p.target)?;
        let mut seen: HashSet<ReactantKey> = HashSet::new();
        let mut groups = Vec::new();
        for g in &p.groups {
            let mut group = Vec::new();
            for set in g {
                match key_of(set) {
                    Ok(k) => {
                        duplicates += !seen.insert(k.clone()) as usize;
                        group.push(k);
                    }
                    Err(e) => {
                        log::debug!("{}:{line}: invalid prediction {e}", r.predictions.display());
                        invalid += 1;
                    }
                }
            }
            groups.push(group);
        }
        by_target.insert(target, groups);
    }
    let placement = match placement {
        PlacementArg::Pessimistic => Placement::Pessimistic,
        PlacementArg::Optimistic => Placement::Optimistic,
    };
    let mut results = Vec::new();
    for (line, t) in truths {
        let target = canonical_target(&r.truth, line, &t.target)?;
        let truth = key_of(&t.reactants).map_err(|e| schema(&r.truth, line, e))?;
        let rank = by_target.get(&target).and_then(|g| ground_truth_rank(g, &truth, placement));
        results.push(TargetResult {
            target,
            solved: rank.is_some(),
            rank,
            predicted_length: None,
            ground_truth_length: None,
            template_frequency: t.template_frequency,
        });
    }
    let mut report = stratified_report(&results, &strata, kmax).map_err(|e| schema(&r.truth, 0, e.to_string()))?;
    report.invalid = invalid;
    report.duplicates = duplicates;
    write_report(r, &report, &mut m)?;
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct RoutesArgs {
    #[command(flatten)]
    pub report: ReportArgs,
}

/// Output of `plan` or `direct-plan`; other fields are ignored.
#[derive(Deserialize)]
struct RoutePrediction {
    target: String,
    #[serde(default)]
    solved: Option<bool>,
    routes: Vec<RouteTree>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteTruth {
    target: String,
    route: RouteTree,
}

pub fn routes(a: RoutesArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let r = &a.report;
    let kmax = pick(r.kmax, cfg.eval.kmax, 10);
    let (kind, strata) = strata_of(r, cfg, StrataArg::RouteLength)?;
    if kind == StrataArg::TemplateFrequency {
        return Err(CliError::Config("route evaluation has no template frequencies".into()));
    }
    let mut m = ManifestBuilder::new("eval-routes", json!({ "kmax": kmax, "strata": kind }));
    m.input(&r.predictions)?;
    m.input(&r.truth)?;
    let preds: Vec<(usize, RoutePrediction)> = read_jsonl_strict(&r.predictions)?;
    let truths: Vec<(usize, RouteTruth)> = read_jsonl_strict(&r.truth)?;
    let mut duplicates = 0;
    let mut by_target: BTreeMap<String, RoutePrediction> = BTreeMap::new();
    for (line, p) in preds {
        // planners echo unparseable targets back with an error
        let Ok(target) = canonicalize(&p.target) else {
            log::warn!("{}:{line}: skipped unparseable target {}", r.predictions.display(), p.target);
            continue;
        };
        let mut seen = HashSet::new();
        duplicates += p.routes.iter().filter(|x| !seen.insert(x.route_hash())).count();
        by_target.insert(target, p);
    }
    let mut results = Vec::new();
    for (line, t) in truths {
        let target = canonical_target(&r.truth, line, &t.target)?;
        let pred = by_target.get(&target);
        let routes: &[RouteTree] = pred.map(|p| p.routes.as_slice()).unwrap_or(&[]);
        results.push(TargetResult {
            solved: pred.and_then(|p| p.solved).unwrap_or_else(|| routes.iter().any(RouteTree::is_solved)),
            rank: route_rank(routes, &t.route),
            predicted_length: routes.first().map(RouteTree::len),
            ground_truth_length: Some(t.route.len()),
            template_frequency: None,
            target,
        });
    }
    let mut report = stratified_report(&results, &strata, kmax).map_err(|e| schema(&r.truth, 0, e.to_string()))?;
    report.duplicates = duplicates;
    write_report(r, &report, &mut m)?;
    m.finish(manifest)?;
    Ok(())
}
