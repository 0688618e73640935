use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use retroplan::chem::Molecule;
use retroplan::dataset::load_stock;
use retroplan::direct::{condition_scan, dedup_routes, rank_direct_routes, DirectRoute, ScanVariant, TableRouteSampler};
use retroplan::evalmetrics::RouteTree;
use retroplan::policy::{build_table_policy, HttpPolicy, PolicyBackend, PolicyError, RouteSampler, TablePolicy};
use retroplan::search::{extract_routes, run_search_with, SearchConfig, SearchError, SearchStats, StockSet};
use retroplan::template::{TemplateLibrary, DEFAULT_RADIUS};

use crate::config::{pick, ConfigFile};
use crate::error::{CliError, Result};
use crate::io::{jsonl, read_lines, read_reactions, write_atomic};
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct PolicyArgs {
    /// Targets, one SMILES per line.
    #[arg(long)]
    pub targets: PathBuf,
    /// Purchasable molecules, one SMILES per line.
    #[arg(long)]
    pub stock: PathBuf,
    /// Reaction records for the built-in table policy; also the fallback
    /// when a policy server is configured.
    #[arg(long)]
    pub reactions: Option<PathBuf>,
    /// Policy server base URL.
    #[arg(long)]
    pub policy_url: Option<String>,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Parallel targets (default 1).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Routes kept per target (default 10).
    #[arg(long)]
    pub max_routes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

pub struct Backends {
    pub remote: Option<HttpPolicy>,
    pub table: Option<Arc<TablePolicy>>,
}

impl Backends {
    pub fn load(a: &PolicyArgs, cfg: &ConfigFile, m: &mut ManifestBuilder) -> Result<Backends> {
        let url = a.policy_url.clone().or(cfg.policy.url.clone());
        let radius = pick(a.radius, cfg.dataset.radius, DEFAULT_RADIUS);
        let timeout = cfg.policy.timeout_s.unwrap_or(30.0);
        if !(timeout > 0.0) {
            return Err(CliError::Config(format!("policy.timeout_s must be positive, got {timeout}")));
        }
        let remote = url.map(|u| HttpPolicy::with_timeout(&u, Duration::from_secs_f64(timeout)));
        let table = match &a.reactions {
            Some(p) => {
                m.input(p)?;
                let (mut records, _) = read_reactions(p)?;
                records.retain(|r| r.products.len() == 1);
                for r in &mut records {
                    if r.template.is_none() {
                        if let Err(e) = r.extract(radius) {
                            log::warn!("{}: no template: {e}", r.id);
                        }
                    }
                }
                let obs: Vec<_> = records.iter().filter_map(|r| r.template.as_ref().map(|t| (r.product(), t))).collect();
                let table = build_table_policy(obs).map_err(|e| CliError::Config(format!("table policy: {e}")))?;
                Some(Arc::new(table))
            }
            None => None,
        };
        if remote.is_none() && table.is_none() {
            return Err(CliError::Config("need --reactions or --policy-url".into()));
        }
        Ok(Backends { remote, table })
    }

    fn describe(&self) -> serde_json::Value {
        json!({
            "policy_url": self.remote.as_ref().map(|r| r.base_url().to_string()),
            "table_templates": self.table.as_ref().map(|t| t.num_templates()),
        })
    }
}

fn load_stock_file(path: &Path, m: &mut ManifestBuilder) -> Result<StockSet> {
    m.input(path)?;
    let (stock, skipped) = load_stock(path).map_err(|e| CliError::input(path, e))?;
    if !skipped.is_empty() {
        log::warn!("{}: skipped {} unparseable lines", path.display(), skipped.len());
    }
    Ok(stock)
}

fn load_targets(path: &Path, m: &mut ManifestBuilder) -> Result<Vec<String>> {
    m.input(path)?;
    Ok(read_lines(path)?.into_iter().map(|(_, s)| s).collect())
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::Config("jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn unavailable(e: &PolicyError) -> bool {
    matches!(e, PolicyError::BackendUnavailable(_) | PolicyError::InvalidResponse(_))
}

#[derive(Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub common: PolicyArgs,
    /// Exploration constant (default 100).
    #[arg(long)]
    pub c_pucb: Option<f64>,
    /// Prior softmax temperature (default 3.0).
    #[arg(long)]
    pub temperature: Option<f64>,
    /// Proposals per expansion (default 10).
    #[arg(long)]
    pub expansions: Option<usize>,
    /// Iteration budget per target (default 500).
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Seconds per target (default 300).
    #[arg(long)]
    pub time_limit: Option<f64>,
    /// Keep only proposals whose template is in --library.
    #[arg(long)]
    pub strict: bool,
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Search statistics JSONL (default: <out>.stats.jsonl).
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Serialize)]
struct PlanLine {
    target: String,
    solved: bool,
    routes: Vec<RouteTree>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct StatsLine {
    target: String,
    policy: &'static str,
    #[serde(flatten)]
    stats: Option<SearchStats>,
}

pub fn plan(a: PlanArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let defaults = SearchConfig::default();
    let s = &cfg.search;
    let search = SearchConfig {
        c_pucb: pick(a.c_pucb, s.c_pucb, defaults.c_pucb),
        temperature: pick(a.temperature, s.temperature, defaults.temperature),
        expansions: pick(a.expansions, s.expansions, defaults.expansions),
        max_iterations: pick(a.max_iterations, s.max_iterations, defaults.max_iterations),
        time_limit_s: pick(a.time_limit, s.time_limit_s, defaults.time_limit_s),
        q_init: s.q_init.unwrap_or(defaults.q_init),
    };
    search.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let strict = a.strict || cfg.policy.strict.unwrap_or(false);
    let max_routes = pick(a.common.max_routes, s.max_routes, 10);
    let jobs = pick(a.common.jobs, cfg.run.jobs, 1);
    let mut m = ManifestBuilder::new("plan", json!({ "search": search, "strict": strict, "max_routes": max_routes, "jobs": jobs }));
    let library = match (&a.library, strict) {
        (Some(p), true) => {
            m.input(p)?;
            Some(TemplateLibrary::load(p).map_err(|e| CliError::input(p, e))?)
        }
        (None, true) => return Err(PolicyError::StrictWithoutLibrary.into()),
        (_, false) => None,
    };
    let backends = Backends::load(&a.common, cfg, &mut m)?;
    let stock = load_stock_file(&a.common.stock, &mut m)?;
    let targets = load_targets(&a.common.targets, &mut m)?;

    let one = |smiles: &String| -> Result<(PlanLine, StatsLine)> {
        let target = match Molecule::parse(smiles) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("target {smiles}: {e}");
                let line = PlanLine { target: smiles.clone(), solved: false, routes: Vec::new(), error: Some(e.to_string()) };
                let stats = StatsLine { target: smiles.clone(), policy: "none", stats: None };
                return Ok((line, stats));
            }
        };
        let run = |backend: &dyn PolicyBackend| run_search_with(&target, backend, &stock, &search, library.as_ref());
        let (result, policy) = match (&backends.remote, &backends.table) {
            (Some(remote), table) => match run(remote) {
                Err(SearchError::Policy(e)) if unavailable(&e) => match table {
                    Some(t) => {
                        log::warn!("{smiles}: policy server failed ({e}); using the table policy");
                        (run(t.as_ref()), "table-fallback")
                    }
                    None => return Err(e.into()),
                },
                other => (other, "http"),
            },
            (None, Some(t)) => (run(t.as_ref()), "table"),
            (None, None) => unreachable!("checked on load"),
        };
        let result = result.map_err(|e| match e {
            SearchError::Config(c) => CliError::Config(c),
            SearchError::Policy(p) => p.into(),
        })?;
        let routes = extract_routes(&result, max_routes);
        let line = PlanLine {
            target: target.canonical_smiles().to_string(),
            solved: result.solved(),
            routes,
            error: None,
        };
        let stats = StatsLine { target: line.target.clone(), policy, stats: Some(result.stats.clone()) };
        Ok((line, stats))
    };
    let results: Vec<Result<(PlanLine, StatsLine)>> = pool(jobs)?.install(|| targets.par_iter().map(one).collect());
    let (lines, stats): (Vec<PlanLine>, Vec<StatsLine>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
    let solved = lines.iter().filter(|l| l.solved).count();
    write_atomic(&a.common.out, &jsonl(&lines))?;
    let stats_path = a.stats.clone().unwrap_or_else(|| PathBuf::from(format!("{}.stats.jsonl", a.common.out.display())));
    write_atomic(&stats_path, &jsonl(&stats))?;
    m.output(&a.common.out);
    m.output(&stats_path);
    m.summary("policy", backends.describe());
    m.summary("solved", solved);
    m.summary("targets", lines.len());
    println!("solved {solved} of {} targets", lines.len());
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct DirectPlanArgs {
    #[command(flatten)]
    pub common: PolicyArgs,
    /// Conditioning scan: vanilla, n-step, 9-step or leaf-size (default vanilla).
    #[arg(long)]
    pub variant: Option<String>,
}

#[derive(Serialize)]
struct DirectLine {
    target: String,
    solved: bool,
    routes: Vec<RouteTree>,
    log_probs: Vec<f64>,
    conditions: Vec<Option<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn direct_plan(a: DirectPlanArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let variant: ScanVariant = pick(a.variant.clone(), cfg.direct.variant.clone(), "vanilla".to_string())
        .parse()
        .map_err(CliError::Config)?;
    let max_routes = pick(a.common.max_routes, cfg.search.max_routes, 10);
    let jobs = pick(a.common.jobs, cfg.run.jobs, 1);
    let mut m = ManifestBuilder::new(
        "direct-plan",
        json!({ "variant": variant.to_string(), "samples_per_target": variant.total_samples(), "max_routes": max_routes, "jobs": jobs }),
    );
    let backends = Backends::load(&a.common, cfg, &mut m)?;
    let stock = Arc::new(load_stock_file(&a.common.stock, &mut m)?);
    let targets = load_targets(&a.common.targets, &mut m)?;
    let table_sampler = backends.table.as_ref().map(|t| TableRouteSampler::new(t.clone(), Some(stock.clone())));

    let one = |smiles: &String| -> Result<DirectLine> {
        let target = match Molecule::parse(smiles) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("target {smiles}: {e}");
                return Ok(DirectLine {
                    target: smiles.clone(),
                    solved: false,
                    routes: Vec::new(),
                    log_probs: Vec::new(),
                    conditions: Vec::new(),
                    error: Some(e.to_string()),
                });
            }
        };
        let scan = |s: &dyn RouteSampler| condition_scan(&target, s, variant, Some(&stock));
        let routes = match (&backends.remote, &table_sampler) {
            (Some(remote), table) => match scan(remote) {
                Err(e) if unavailable(&e) => match table {
                    Some(t) => {
                        log::warn!("{smiles}: policy server failed ({e}); using the table sampler");
                        scan(t)?
                    }
                    None => return Err(e.into()),
                },
                other => other?,
            },
            (None, Some(t)) => scan(t)?,
            (None, None) => unreachable!("checked on load"),
        };
        let mut ranked: Vec<DirectRoute> = rank_direct_routes(dedup_routes(routes));
        ranked.truncate(max_routes);
        Ok(DirectLine {
            target: target.canonical_smiles().to_string(),
            solved: ranked.first().is_some_and(|r| r.route.is_solved()),
            log_probs: ranked.iter().map(|r| r.log_prob).collect(),
            conditions: ranked.iter().map(|r| r.condition.clone()).collect(),
            routes: ranked.into_iter().map(|r| r.route).collect(),
            error: None,
        })
    };
    let results: Vec<Result<DirectLine>> = pool(jobs)?.install(|| targets.par_iter().map(one).collect());
    let lines = results.into_iter().collect::<Result<Vec<_>>>()?;
    let solved = lines.iter().filter(|l| l.solved).count();
    write_atomic(&a.common.out, &jsonl(&lines))?;
    m.output(&a.common.out);
    m.summary("policy", backends.describe());
    m.summary("solved", solved);
    m.summary("targets", lines.len());
    println!("solved {solved} of {} targets ({} samples each)", lines.len(), variant.total_samples());
    m.finish(manifest)?;
    Ok(())
}
