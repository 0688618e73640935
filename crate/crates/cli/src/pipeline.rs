use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use retroplan::dataset::{
    build_hard_split, build_routes as assemble_routes, filter_reaction, load_stock, split_by_molweight, write_records, FilterRule,
    ReactionRecord, DEFAULT_MW_THRESHOLD, DEFAULT_RARITY_CUTOFF,
};
use retroplan::template::{RetroTemplate, TemplateLibrary, DEFAULT_RADIUS};
use retroplan::tokenizer::{bpe_train, FrequencyTokenizer, REFERENCE_BPE_TEMPLATE_VOCAB};

use crate::config::{pick, ConfigFile};
use crate::error::{CliError, Result};
use crate::io::{jsonl, read_reactions, write_atomic};
use crate::manifest::ManifestBuilder;

#[derive(Args)]
pub struct FilterArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// JSON report with a counter for every rule.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct FilterSummary {
    total: usize,
    unreadable: usize,
    accepted: usize,
    rejected: usize,
    removed_reactants: usize,
    rule_failures: BTreeMap<String, usize>,
}

fn rule_name(r: FilterRule) -> String {
    serde_json::to_value(r).unwrap().as_str().unwrap().to_string()
}

fn records_bytes(records: &[ReactionRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(records, &mut buf).expect("write to memory");
    buf
}

pub fn filter(a: FilterArgs, _cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let mut m = ManifestBuilder::new("filter", json!({}));
    m.input(&a.input)?;
    let (records, unreadable) = read_reactions(&a.input)?;
    let mut failures: BTreeMap<FilterRule, usize> = FilterRule::ALL.iter().map(|&r| (r, 0)).collect();
    let mut kept = Vec::new();
    let mut removed = 0;
    for r in &records {
        let (accepted, modified, report) = filter_reaction(r);
        for rule in report.failed() {
            *failures.get_mut(&rule).unwrap() += 1;
        }
        removed += report.removed_reactants.len();
        if accepted {
            kept.push(modified);
        } else {
            log::info!("{} rejected: {:?}", r.id, report.failed());
        }
    }
    let summary = FilterSummary {
        total: records.len() + unreadable,
        unreadable,
        accepted: kept.len(),
        rejected: records.len() - kept.len(),
        removed_reactants: removed,
        rule_failures: failures.iter().map(|(&r, &n)| (rule_name(r), n)).collect(),
    };
    write_atomic(&a.out, &records_bytes(&kept))?;
    m.output(&a.out);
    if let Some(p) = &a.report {
        write_atomic(p, serde_json::to_string_pretty(&summary).unwrap().as_bytes())?;
        m.output(p);
    }
    println!("{:<36} {:>8}", "rule", "failures");
    for (&rule, n) in &failures {
        println!("{:<36} {:>8}  {}", rule_name(rule), n, rule.description());
    }
    println!("accepted {} of {} ({} unreadable)", summary.accepted, summary.total, unreadable);
    m.summary("filter", &summary);
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct ExtractArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Neighbourhood radius around the reaction centre (default 1).
    #[arg(long)]
    pub radius: Option<usize>,
}

/// Extracts a template for every record lacking one; failures are logged
/// and the record dropped.
fn with_templates(records: Vec<ReactionRecord>, radius: usize) -> (Vec<ReactionRecord>, usize) {
    let mut out = Vec::new();
    let mut failed = 0;
    for mut r in records {
        if r.template.is_none() {
            if let Err(e) = r.extract(radius) {
                log::warn!("{}: no template: {e}", r.id);
                failed += 1;
                continue;
            }
        }
        out.push(r);
    }
    (out, failed)
}

pub fn extract_templates(a: ExtractArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let radius = pick(a.radius, cfg.dataset.radius, DEFAULT_RADIUS);
    let mut m = ManifestBuilder::new("extract-templates", json!({ "radius": radius }));
    m.input(&a.input)?;
    let (records, unreadable) = read_reactions(&a.input)?;
    let (records, failed) = with_templates(records, radius);
    write_atomic(&a.out, &records_bytes(&records))?;
    m.output(&a.out);
    m.summary("extracted", records.len());
    m.summary("failed", failed + unreadable);
    println!("extracted {} templates, {} records failed", records.len(), failed + unreadable);
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct BuildRoutesArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Marks route leaves found in this stock.
    #[arg(long)]
    pub stock: Option<PathBuf>,
}

fn stock_or_exit(path: &Path) -> Result<retroplan::search::StockSet> {
    let (stock, skipped) = load_stock(path).map_err(|e| CliError::input(path, e))?;
    if !skipped.is_empty() {
        log::warn!("{}: skipped {} unparseable lines", path.display(), skipped.len());
    }
    Ok(stock)
}

pub fn build_routes(a: BuildRoutesArgs, _cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let mut m = ManifestBuilder::new("build-routes", json!({ "stock": a.stock }));
    m.input(&a.input)?;
    let stock = match &a.stock {
        Some(p) => {
            m.input(p)?;
            Some(stock_or_exit(p)?)
        }
        None => None,
    };
    let (records, _) = read_reactions(&a.input)?;
    let routes = assemble_routes(&records, stock.as_ref());
    write_atomic(&a.out, &jsonl(&routes))?;
    m.output(&a.out);
    m.summary("routes", routes.len());
    println!("{} routes from {} reactions", routes.len(), records.len());
    m.finish(manifest)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitMode {
    /// Reactions with rare templates go to the test side.
    Hard,
    /// Reactions with heavy products go to the test side.
    Molweight,
}

#[derive(Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: SplitMode,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
    /// Template counts for the hard split (default: counted from the input).
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// Templates seen at most this often are rare (default 10).
    #[arg(long)]
    pub rarity_cutoff: Option<u64>,
    /// Molecular weight threshold in Da (default 500).
    #[arg(long)]
    pub mw_threshold: Option<f64>,
    #[arg(long)]
    pub radius: Option<usize>,
}

pub fn split(a: SplitArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let cutoff = pick(a.rarity_cutoff, cfg.dataset.rarity_cutoff, DEFAULT_RARITY_CUTOFF);
    let threshold = pick(a.mw_threshold, cfg.dataset.mw_threshold, DEFAULT_MW_THRESHOLD);
    let radius = pick(a.radius, cfg.dataset.radius, DEFAULT_RADIUS);
    let mut m = ManifestBuilder::new(
        "split",
        json!({ "mode": a.mode, "rarity_cutoff": cutoff, "mw_threshold": threshold, "radius": radius }),
    );
    m.input(&a.input)?;
    let (records, _) = read_reactions(&a.input)?;
    let (single, multi): (Vec<_>, Vec<_>) = records.into_iter().partition(|r| r.products.len() == 1);
    if !multi.is_empty() {
        log::warn!("skipped {} records without exactly one product", multi.len());
    }
    let (train, test) = match a.mode {
        SplitMode::Molweight => split_by_molweight(&single, threshold),
        SplitMode::Hard => {
            let (records, _) = with_templates(single, radius);
            let library = match &a.library {
                Some(p) => {
                    m.input(p)?;
                    TemplateLibrary::load(p).map_err(|e| CliError::input(p, e))?
                }
                None => TemplateLibrary::from_templates(records.iter().filter_map(|r| r.template.as_ref())),
            };
            build_hard_split(&records, &library, cutoff)
        }
    };
    write_atomic(&a.train, &records_bytes(&train))?;
    write_atomic(&a.test, &records_bytes(&test))?;
    m.output(&a.train);
    m.output(&a.test);
    m.summary("train", train.len());
    m.summary("test", test.len());
    println!("train {} test {}", train.len(), test.len());
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct BuildLibraryArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Keep templates seen at least this often (default 1).
    #[arg(long)]
    pub min_count: Option<u64>,
    #[arg(long)]
    pub radius: Option<usize>,
}

pub fn build_library(a: BuildLibraryArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let min_count = pick(a.min_count, cfg.dataset.min_count, 1);
    let radius = pick(a.radius, cfg.dataset.radius, DEFAULT_RADIUS);
    let mut m = ManifestBuilder::new("build-library", json!({ "min_count": min_count, "radius": radius }));
    m.input(&a.input)?;
    let (records, _) = read_reactions(&a.input)?;
    let (records, _) = with_templates(records, radius);
    let all = TemplateLibrary::from_templates(records.iter().filter_map(|r| r.template.as_ref()));
    let mut lib = TemplateLibrary::new();
    for e in all.entries() {
        if e.count >= min_count {
            let t = RetroTemplate::parse(&e.smarts).expect("library SMARTS reparses");
            lib.insert(&t, e.count);
        }
    }
    let mut buf = Vec::new();
    lib.write_jsonl(&mut buf).expect("write to memory");
    write_atomic(&a.out, &buf)?;
    m.output(&a.out);
    m.summary("templates", lib.len());
    println!("{} templates ({} before the count threshold)", lib.len(), all.len());
    m.finish(manifest)?;
    Ok(())
}

#[derive(Args)]
pub struct TrainBpeArgs {
    /// Template library; each template counts once per occurrence.
    #[arg(long)]
    pub library: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// BPE vocabulary size (default 348).
    #[arg(long)]
    pub target_vocab: Option<usize>,
}

pub fn train_bpe(a: TrainBpeArgs, cfg: &ConfigFile, manifest: Option<&Path>) -> Result<()> {
    let target = pick(a.target_vocab, cfg.tokenizer.target_vocab, REFERENCE_BPE_TEMPLATE_VOCAB);
    let mut m = ManifestBuilder::new("train-bpe", json!({ "target_vocab": target }));
    m.input(&a.library)?;
    let lib = TemplateLibrary::load(&a.library).map_err(|e| CliError::input(&a.library, e))?;
    let mut corpus = Vec::new();
    for e in lib.entries() {
        corpus.extend(std::iter::repeat_n(e.smarts.clone(), e.count as usize));
    }
    let bpe = bpe_train(&corpus, target).map_err(|e| CliError::Config(e.to_string()))?;
    let tok = FrequencyTokenizer::new(&lib, bpe);
    let file = tok.vocabulary_file();
    write_atomic(&a.out, serde_json::to_string_pretty(&file).unwrap().as_bytes())?;
    m.output(&a.out);
    m.summary("bpe_vocab_size", tok.bpe().vocab_size());
    m.summary("whole_template_tokens", file.whole_template_tokens.len());
    m.summary("vocabulary_size", tok.vocabulary().len());
    println!(
        "BPE vocabulary {} (target {target}), {} whole-template tokens",
        tok.bpe().vocab_size(),
        file.whole_template_tokens.len()
    );
    m.finish(manifest)?;
    Ok(())
}
