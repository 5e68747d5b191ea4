use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use serde::Serialize;

use super::{cmd_bench, cmd_dismantle, cmd_im, cmd_viz, CliError, CmdOutcome, RunConfig, SpreadModel};
use crate::bench::{Difficulty, Family, TaskKind};
use crate::layout::LayoutKind;
use crate::selection::LabelMode;

#[derive(Debug, Parser)]
#[command(name = "graphsight", version, about = "Visual graph reasoning with multimodal selectors")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect communities, lay out and render a network.
    Viz(CmdArgs),
    /// Influence maximization from image-based seed selection.
    Im(CmdArgs),
    /// Sequential network dismantling.
    Dismantle(CmdArgs),
    /// Accuracy on basic graph questions over generated networks.
    Bench(CmdArgs),
}

#[derive(Debug, Args)]
struct CmdArgs {
    /// JSON file with any `RunConfig` fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    flags: Flags,
}

/// Each flag overrides the config field of the same name.
#[derive(Debug, Args, Serialize)]
struct Flags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    network: Option<String>,
    #[arg(long, alias = "seed")]
    #[serde(skip_serializing_if = "Option::is_none")]
    rng_seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    cache_dir: Option<PathBuf>,
    /// mllm, scripted, oracle, degree, betweenness, closeness, pagerank or ci.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    backend: Option<String>,
    /// Reply file for the scripted backend.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    fixture: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoint: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model_name: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    temperature: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_in_flight: Option<usize>,

    /// fr, circle or grid.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layout: Option<LayoutKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    layout_iterations: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    target_communities: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    adjust_d: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    top_n: Option<usize>,
    /// full or partial.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    label_mode: Option<LabelMode>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    top_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    min_labels: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    canvas_px: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    raster_scale: Option<f64>,

    #[arg(short, long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    /// ic or lt.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<SpreadModel>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    /// Monte Carlo trials for final estimates.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    trials: Option<usize>,
    /// Monte Carlo trials inside local search.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ls_trials: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iter: Option<usize>,
    #[arg(long, action = ArgAction::Set)]
    #[serde(skip_serializing_if = "Option::is_none")]
    local_search: Option<bool>,
    /// Comma-separated agent ids.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    agents: Vec<u8>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    attempts: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    requery_budget: Option<u32>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    stop_fraction: Option<f64>,
    #[arg(long, action = ArgAction::Set)]
    #[serde(skip_serializing_if = "Option::is_none")]
    relayout: Option<bool>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    ci_radius: Option<usize>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    family: Option<Family>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    difficulty: Option<Difficulty>,
    /// Comma-separated task names.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tasks: Vec<TaskKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    n_instances: Option<usize>,
    /// image-fr, image-fr-p, image-circle, image-grid, text-expert or text-adjacency.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    presentation: Option<String>,
}

type CmdFn = fn(&RunConfig) -> Result<CmdOutcome, CliError>;

fn resolve(args: &CmdArgs) -> Result<RunConfig, CliError> {
    let base = match &args.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    let overrides = match serde_json::to_value(&args.flags).expect("flags serialize") {
        serde_json::Value::Object(map) => map,
        _ => unreachable!("flags serialize to an object"),
    };
    base.merged(overrides)
}

/// Parses `argv`, runs the command and returns the process exit code:
/// 0 on success, 1 when the run fails, 2 on bad usage or configuration.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();

    let (args, cmd): (&CmdArgs, CmdFn) = match &cli.command {
        Command::Viz(a) => (a, cmd_viz),
        Command::Im(a) => (a, cmd_im),
        Command::Dismantle(a) => (a, cmd_dismantle),
        Command::Bench(a) => (a, cmd_bench),
    };
    let result = resolve(args).and_then(|cfg| cmd(&cfg));
    match result {
        Ok(out) => {
            println!("{}", out.result_path.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
