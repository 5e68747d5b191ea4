//! The `graphsight` command line: `viz`, `im`, `dismantle` and `bench`.

mod args;
mod config;

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

pub use args::run;
pub use config::{RunConfig, SpreadModel};

use crate::bench::{
    run_benchmark, BenchReport, Difficulty, Family, GenSpec, Presentation, TaskKind,
};
use crate::datasets;
use crate::graph::{read_edge_list_file, CentralityMethod, CentralityParams, Graph, LoadOptions};
use crate::layout::{AdjustmentParams, LayoutKind};
use crate::optimize::{
    auc, auc_with, dismantle, robustness_r, run_im, AucRule, DismantleConfig, DismantleTrace,
    ImConfig, LocalSearchConfig, DEFAULT_REQUERY_BUDGET,
};
use crate::pipeline::{visualize, VizParams, FULL_LABEL_MAX_NODES};
use crate::render::{ImageArtifact, LabelPolicy, RenderSpec};
use crate::selection::{
    AgentProfile, Backend, HeuristicBackend, LabelMode, MllmBackend, OracleBackend, ResponseCache,
    ScriptedBackend,
};

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, config or input paths. Exit code 2.
    #[error("{0}")]
    Usage(String),
    /// The run itself failed. Exit code 1.
    #[error("{0}")]
    Pipeline(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(_) => 1,
        }
    }
}

fn pipeline_err(e: impl std::fmt::Display) -> CliError {
    CliError::Pipeline(e.to_string())
}

/// Where a command wrote its files and the metrics it reported.
#[derive(Debug, Clone)]
pub struct CmdOutcome {
    pub run_dir: PathBuf,
    pub result_path: PathBuf,
    pub metrics: serde_json::Value,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    run_id: &'a str,
    version: &'a str,
    created_unix: u64,
    config: &'a RunConfig,
    network: serde_json::Value,
    metrics: &'a serde_json::Value,
    result: T,
}

struct RunDir {
    id: String,
    path: PathBuf,
    created_unix: u64,
}

fn open_run_dir(cfg: &RunConfig, command: &str) -> Result<RunDir, CliError> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or_default();
    let key = format!(
        "{command}\0{}\0{}\0{}",
        serde_json::to_string(cfg).expect("config serializes"),
        cfg.rng_seed,
        now.as_nanos()
    );
    let id = crate::render::sha256_hex(key.as_bytes())[..16].to_string();
    let path = cfg.out_dir.join(&id);
    std::fs::create_dir_all(&path).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
    Ok(RunDir {
        id,
        path,
        created_unix: now.as_secs(),
    })
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(pipeline_err)?;
    std::fs::write(path, text + "\n").map_err(pipeline_err)
}

fn finish<T: Serialize>(
    command: &str,
    cfg: &RunConfig,
    dir: &RunDir,
    network: serde_json::Value,
    metrics: serde_json::Value,
    result: T,
) -> Result<CmdOutcome, CliError> {
    let result_path = dir.path.join("result.json");
    write_json(
        &result_path,
        &Envelope {
            command,
            run_id: &dir.id,
            version: env!("CARGO_PKG_VERSION"),
            created_unix: dir.created_unix,
            config: cfg,
            network,
            metrics: &metrics,
            result,
        },
    )?;
    Ok(CmdOutcome {
        run_dir: dir.path.clone(),
        result_path,
        metrics,
    })
}

/// Reads `cfg.network` as a file path, or else as a bundled network name.
pub fn load_network(cfg: &RunConfig) -> Result<(String, Graph), CliError> {
    let name = cfg
        .network
        .as_deref()
        .ok_or_else(|| CliError::Usage("--network is required".into()))?;
    let path = Path::new(name);
    if path.is_file() {
        let g = read_edge_list_file(path, LoadOptions::default())
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let id = path
            .file_stem()
            .map_or_else(|| name.to_string(), |s| s.to_string_lossy().into_owned());
        return Ok((id, g));
    }
    match datasets::builtin(name) {
        Some(g) => Ok((name.to_ascii_lowercase(), g)),
        None => Err(CliError::Usage(format!(
            "no such file `{name}` and not a bundled network ({})",
            datasets::BUILTIN.join(", ")
        ))),
    }
}

fn network_info(id: &str, g: &Graph) -> serde_json::Value {
    json!({"id": id, "nodes": g.node_count(), "edges": g.edge_count()})
}

pub fn label_mode_for(cfg: &RunConfig, g: &Graph) -> LabelMode {
    cfg.label_mode.unwrap_or(if g.node_count() < FULL_LABEL_MAX_NODES {
        LabelMode::Full
    } else {
        LabelMode::Partial
    })
}

pub fn render_spec(cfg: &RunConfig, mode: LabelMode) -> RenderSpec {
    let base = match mode {
        LabelMode::Full => RenderSpec::full_label(),
        LabelMode::Partial => RenderSpec {
            label_policy: LabelPolicy::Partial {
                top_fraction: cfg.top_fraction,
                min_labels: cfg.min_labels,
            },
            ..RenderSpec::partial_label()
        },
    };
    RenderSpec {
        canvas_px: (cfg.canvas_px, cfg.canvas_px),
        ..base
    }
}

fn viz_params(cfg: &RunConfig, g: &Graph, raster: bool) -> Result<VizParams, CliError> {
    let adjust = AdjustmentParams::new(cfg.adjust_d, cfg.top_n).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = render_spec(cfg, label_mode_for(cfg, g));
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(VizParams {
        layout: cfg.layout,
        layout_iterations: cfg.layout_iterations,
        target_communities: cfg.target_communities,
        adjust: Some(adjust),
        render: spec,
        raster_scale: raster.then_some(cfg.raster_scale),
        rng_seed: cfg.rng_seed,
    })
}

/// Builds the selector named by `cfg.backend`.
pub fn make_backend(cfg: &RunConfig) -> Result<Box<dyn Backend>, CliError> {
    match cfg.backend.as_str() {
        "mllm" => Ok(Box::new(
            MllmBackend::from_env(cfg.mllm_config()).map_err(|e| CliError::Usage(e.to_string()))?,
        )),
        "scripted" => {
            let path = cfg
                .fixture
                .as_ref()
                .ok_or_else(|| CliError::Usage("the scripted backend needs --fixture".into()))?;
            Ok(Box::new(
                ScriptedBackend::from_file(path).map_err(|e| CliError::Usage(e.to_string()))?,
            ))
        }
        "oracle" => Ok(Box::new(OracleBackend)),
        other => {
            let method: CentralityMethod = other.parse().map_err(|e: String| CliError::Usage(e))?;
            Ok(Box::new(HeuristicBackend {
                method,
                params: CentralityParams {
                    radius: cfg.ci_radius,
                    ..CentralityParams::default()
                },
            }))
        }
    }
}

fn open_cache(cfg: &RunConfig) -> Result<Option<ResponseCache>, CliError> {
    cfg.cache_dir
        .as_ref()
        .map(|d| ResponseCache::open(d).map_err(|e| CliError::Usage(format!("cache {}: {e}", d.display()))))
        .transpose()
}

fn write_image(img: &ImageArtifact, dir: &Path, step: &str) -> Result<(), CliError> {
    img.write_to(dir, step).map(|_| ()).map_err(pipeline_err)
}

/// Detect, merge, lay out, adjust and draw one network.
pub fn cmd_viz(cfg: &RunConfig) -> Result<CmdOutcome, CliError> {
    let (id, g) = load_network(cfg)?;
    let params = viz_params(cfg, &g, true)?;
    if cfg.target_communities == Some(0) {
        return Err(CliError::Usage("target_communities must be at least 1".into()));
    }
    let dir = open_run_dir(cfg, "viz")?;
    let out = visualize(&g, &params).map_err(pipeline_err)?;
    write_image(&out.image, &dir.path, "viz")?;
    std::fs::write(dir.path.join("layout.json"), out.layout.to_json()).map_err(pipeline_err)?;
    std::fs::write(dir.path.join("communities.json"), out.communities.to_json(&g)).map_err(pipeline_err)?;
    let metrics = json!({
        "detected_communities": out.detected_communities,
        "communities": out.communities.community_count(),
        "labeled_nodes": out.image.labeled_nodes.len(),
        "svg_sha256": out.image.content_hash,
        "warnings": out.image.warnings,
    });
    finish("viz", cfg, &dir, network_info(&id, &g), metrics, json!({}))
}

/// Influence maximization with the configured selector and local search.
pub fn cmd_im(cfg: &RunConfig) -> Result<CmdOutcome, CliError> {
    let (id, g) = load_network(cfg)?;
    let model = cfg.diffusion_model()?;
    let backend = make_backend(cfg)?;
    let cache = open_cache(cfg)?;
    let mode = label_mode_for(cfg, &g);
    let mut agents = AgentProfile::roster(mode);
    if !cfg.agents.is_empty() {
        for a in &cfg.agents {
            if !agents.iter().any(|p| p.agent_id == *a) {
                return Err(CliError::Usage(format!("agent {a} does not take part in {mode:?} mode")));
            }
        }
        agents.retain(|p| cfg.agents.contains(&p.agent_id));
    }
    if cfg.k == 0 || cfg.k > g.node_count() {
        return Err(CliError::Usage(format!("k = {} outside 1..={}", cfg.k, g.node_count())));
    }
    let params = viz_params(cfg, &g, backend.needs_image())?;
    let dir = open_run_dir(cfg, "im")?;
    let viz = visualize(&g, &params).map_err(pipeline_err)?;
    write_image(&viz.image, &dir.path, "input")?;

    let im_cfg = ImConfig {
        k: cfg.k,
        attempts_per_agent: cfg.attempts,
        model,
        validation_trials: cfg.trials,
        rng_seed: cfg.rng_seed,
        temperature: cfg.temperature,
        requery_budget: cfg.requery_budget.unwrap_or(0),
        local_search: cfg.local_search.then_some(LocalSearchConfig {
            max_iter: cfg.max_iter,
            trials: cfg.ls_trials,
            rng_seed: cfg.rng_seed,
        }),
    };
    let run = match run_im(&g, &id, &agents, Some(&viz.image), &im_cfg, backend.as_ref(), cache.as_ref()) {
        Ok(run) => run,
        Err(e) => {
            write_json(&dir.path.join("error.json"), &json!({"error": e.to_string(), "config": cfg}))?;
            return Err(pipeline_err(e));
        }
    };
    let mut metrics = json!({
        "best_agent": run.best_agent,
        "best_seeds": run.best_seeds,
        "best_spread": run.best_spread.mean,
        "best_spread_std_error": run.best_spread.std_error,
        "validation": run.validation,
    });
    if let (Some(seeds), Some(spread)) = (&run.best_seeds_ls, &run.best_spread_ls) {
        metrics["best_seeds_ls"] = json!(seeds);
        metrics["best_spread_ls"] = json!(spread.mean);
        metrics["best_spread_ls_std_error"] = json!(spread.std_error);
    }
    finish("im", cfg, &dir, network_info(&id, &g), metrics, &run)
}

fn curve_csv(trace: &DismantleTrace) -> String {
    let mut out = String::from("q,removed,lcc,lcc_fraction\n");
    for (q, &s) in trace.lcc_curve.iter().enumerate() {
        let removed = q.checked_sub(1).map_or(String::new(), |i| trace.removal_sequence[i].to_string());
        out.push_str(&format!("{q},{removed},{s},{:.6}\n", s as f64 / trace.n.max(1) as f64));
    }
    out
}

fn dismantle_metrics(trace: &DismantleTrace) -> serde_json::Value {
    json!({
        "removals": trace.removal_sequence.len(),
        "removal_sequence": trace.removal_sequence,
        "lcc_curve": trace.lcc_curve,
        "robustness_r": robustness_r(trace),
        "auc": auc(trace),
        "auc_left_sum": auc_with(trace, AucRule::LeftSum),
        "fallbacks": trace.fallbacks,
    })
}

/// Sequential dismantling with the configured selector.
pub fn cmd_dismantle(cfg: &RunConfig) -> Result<CmdOutcome, CliError> {
    let (id, g) = load_network(cfg)?;
    if !(cfg.stop_fraction > 0.0 && cfg.stop_fraction <= 1.0) {
        return Err(CliError::Usage(format!("stop_fraction {} outside (0, 1]", cfg.stop_fraction)));
    }
    let backend = make_backend(cfg)?;
    let cache = open_cache(cfg)?;
    let spec = render_spec(cfg, label_mode_for(cfg, &g));
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let dcfg = DismantleConfig {
        stop_fraction: cfg.stop_fraction,
        relayout_each_step: cfg.relayout,
        requery_budget: cfg.requery_budget.unwrap_or(DEFAULT_REQUERY_BUDGET),
        layout: cfg.layout,
        layout_iterations: cfg.layout_iterations,
        render: spec,
        raster_scale: Some(cfg.raster_scale),
        rng_seed: cfg.rng_seed,
        temperature: cfg.temperature,
    };
    let dir = open_run_dir(cfg, "dismantle")?;
    let steps_dir = dir.path.join("steps");
    let mut write_failure = None;
    let mut on_image = |q: usize, img: &ImageArtifact| {
        if let Err(e) = img.write_to(&steps_dir, &format!("{q:04}")) {
            write_failure.get_or_insert(e.to_string());
        }
    };
    let result = dismantle(&g, backend.as_ref(), &dcfg, cache.as_ref(), &mut on_image);
    if let Some(e) = write_failure {
        return Err(CliError::Pipeline(format!("writing step images: {e}")));
    }
    let (trace, failure) = match result {
        Ok(t) => (t, None),
        Err(f) => (f.trace.clone(), Some(f.to_string())),
    };
    std::fs::write(dir.path.join("curve.csv"), curve_csv(&trace)).map_err(pipeline_err)?;
    let mut metrics = dismantle_metrics(&trace);
    if let Some(err) = &failure {
        metrics["error"] = json!(err);
    }
    let outcome = finish("dismantle", cfg, &dir, network_info(&id, &g), metrics, &trace)?;
    match failure {
        Some(err) => Err(CliError::Pipeline(err)),
        None => Ok(outcome),
    }
}

fn presentation(cfg: &RunConfig) -> Result<Presentation, CliError> {
    if let Some(style) = cfg.text_style() {
        return Ok(Presentation::Text { style });
    }
    let rest = cfg
        .presentation
        .strip_prefix("image-")
        .ok_or_else(|| CliError::Usage(format!("unknown presentation `{}`", cfg.presentation)))?;
    let (layout, communities) = match rest.strip_suffix("-p") {
        Some(l) => (l, true),
        None => (rest, false),
    };
    let layout: LayoutKind = layout.parse().map_err(|e: String| CliError::Usage(e))?;
    Ok(Presentation::Image { layout, communities })
}

/// Basic graph questions over generated networks.
pub fn cmd_bench(cfg: &RunConfig) -> Result<CmdOutcome, CliError> {
    let backend = make_backend(cfg)?;
    let cache = open_cache(cfg)?;
    let pres = presentation(cfg)?;
    let families = cfg.family.map_or_else(|| vec![Family::Ba, Family::Er, Family::Ws], |f| vec![f]);
    let levels = cfg
        .difficulty
        .map_or_else(|| vec![Difficulty::Easy, Difficulty::Hard], |d| vec![d]);
    let tasks = if cfg.tasks.is_empty() {
        TaskKind::ALL.to_vec()
    } else {
        cfg.tasks.clone()
    };
    let dir = open_run_dir(cfg, "bench")?;
    let mut reports: Vec<BenchReport> = Vec::new();
    for &f in &families {
        for &d in &levels {
            let spec = GenSpec::standard(f, d);
            let report = run_benchmark(&spec, &tasks, cfg.n_instances, backend.as_ref(), pres, cfg.rng_seed, cache.as_ref())
                .map_err(CliError::Pipeline)?;
            reports.push(report);
        }
    }
    let mut csv = String::new();
    for (i, r) in reports.iter().enumerate() {
        let body = r.to_csv();
        csv.push_str(if i == 0 { &body } else { body.split_once('\n').map_or("", |(_, b)| b) });
    }
    std::fs::write(dir.path.join("bench.csv"), &csv).map_err(pipeline_err)?;
    let rows: Vec<_> = reports.iter().flat_map(|r| r.rows.iter()).collect();
    let metrics = json!({ "rows": rows });
    finish("bench", cfg, &dir, json!(null), metrics, &reports)
}
