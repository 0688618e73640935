mod config;
mod error;
mod eval;
mod io;
mod manifest;
mod pipeline;
mod plan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::ConfigFile;
use error::Result;

#[derive(Parser)]
#[command(name = "retroplan", version, about = "Retrosynthesis planning, data pipeline and evaluation")]
struct Cli {
    /// TOML config with per-module sections; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the first output).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the reaction filters to a reaction JSONL file.
    Filter(pipeline::FilterArgs),
    /// Attach extracted templates to reaction records.
    ExtractTemplates(pipeline::ExtractArgs),
    /// Assemble multi-step routes from reactions grouped by patent.
    BuildRoutes(pipeline::BuildRoutesArgs),
    /// Split reactions by template rarity or product molecular weight.
    Split(pipeline::SplitArgs),
    /// Count templates into a library file.
    BuildLibrary(pipeline::BuildLibraryArgs),
    /// Train BPE merges and write the template vocabulary.
    TrainBpe(pipeline::TrainBpeArgs),
    /// Plan routes by tree search.
    Plan(plan::PlanArgs),
    /// Plan routes by sampling template sequences.
    DirectPlan(plan::DirectPlanArgs),
    /// Top-k accuracy of single-step predictions.
    EvalSingleStep(eval::SingleStepArgs),
    /// Solve rate and route accuracy of planned routes.
    EvalRoutes(eval::RoutesArgs),
}

fn run(cli: Cli) -> Result<()> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    let manifest = cli.manifest.as_deref();
    match cli.command {
        Command::Filter(a) => pipeline::filter(a, &cfg, manifest),
        Command::ExtractTemplates(a) => pipeline::extract_templates(a, &cfg, manifest),
        Command::BuildRoutes(a) => pipeline::build_routes(a, &cfg, manifest),
        Command::Split(a) => pipeline::split(a, &cfg, manifest),
        Command::BuildLibrary(a) => pipeline::build_library(a, &cfg, manifest),
        Command::TrainBpe(a) => pipeline::train_bpe(a, &cfg, manifest),
        Command::Plan(a) => plan::plan(a, &cfg, manifest),
        Command::DirectPlan(a) => plan::direct_plan(a, &cfg, manifest),
        Command::EvalSingleStep(a) => eval::single_step(a, &cfg, manifest),
        Command::EvalRoutes(a) => eval::routes(a, &cfg, manifest),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
