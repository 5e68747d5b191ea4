use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::bench::{Difficulty, Family, TaskKind, TextStyle, DEFAULT_INSTANCES};
use crate::diffusion::{DiffusionModel, DEFAULT_IC_PROBABILITY, SEARCH_TRIALS, VALIDATION_TRIALS};
use crate::graph::DEFAULT_CI_RADIUS;
use crate::layout::{LayoutKind, DEFAULT_ADJUST_D, DEFAULT_ADJUST_TOP_N, DEFAULT_FR_ITERATIONS};
use crate::optimize::{DEFAULT_ATTEMPTS, DEFAULT_MAX_ITER, DEFAULT_STOP_FRACTION};
use crate::render::{LabelPolicy, RenderSpec};
use crate::selection::{LabelMode, MllmConfig, DEFAULT_MODEL_NAME, DEFAULT_TEMPERATURE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpreadModel {
    Ic,
    Lt,
}

impl std::str::FromStr for SpreadModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ic" => Ok(SpreadModel::Ic),
            "lt" => Ok(SpreadModel::Lt),
            other => Err(format!("unknown diffusion model `{other}` (ic, lt)")),
        }
    }
}

/// Every tunable of every command. Loaded from an optional JSON file, then
/// overridden by command-line flags, and embedded verbatim in each result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Edge-list path, or a bundled network name (`karate`, `lesmis`).
    pub network: Option<String>,
    pub rng_seed: u64,
    pub out_dir: PathBuf,
    pub cache_dir: Option<PathBuf>,

    /// `mllm`, `scripted`, `oracle`, or a centrality heuristic
    /// (`degree`/`hd`, `betweenness`, `closeness`, `pagerank`, `ci`/`hci`).
    pub backend: String,
    pub fixture: Option<PathBuf>,
    pub endpoint: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_in_flight: usize,

    pub layout: LayoutKind,
    pub layout_iterations: usize,
    pub target_communities: Option<usize>,
    pub adjust_d: f64,
    pub top_n: usize,
    /// `None` picks full labels below 150 nodes and partial labels above.
    pub label_mode: Option<LabelMode>,
    pub top_fraction: f64,
    pub min_labels: usize,
    pub canvas_px: u32,
    pub raster_scale: f64,

    pub k: usize,
    pub model: SpreadModel,
    pub p: f64,
    pub trials: usize,
    pub ls_trials: usize,
    pub max_iter: usize,
    pub local_search: bool,
    /// Agent ids; empty means every agent of the label mode.
    pub agents: Vec<u8>,
    pub attempts: u32,
    /// Re-queries after an invalid reply; `None` uses the command default.
    pub requery_budget: Option<u32>,

    pub stop_fraction: f64,
    pub relayout: bool,
    pub ci_radius: usize,

    pub family: Option<Family>,
    pub difficulty: Option<Difficulty>,
    pub tasks: Vec<TaskKind>,
    pub n_instances: usize,
    /// `image-fr`, `image-fr-p`, `image-circle`, `image-grid`, `text-expert`, `text-adjacency`.
    pub presentation: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let mllm = MllmConfig::default();
        Self {
            network: None,
            rng_seed: 0,
            out_dir: PathBuf::from("runs"),
            cache_dir: None,
            backend: "degree".into(),
            fixture: None,
            endpoint: mllm.endpoint,
            model_name: DEFAULT_MODEL_NAME.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_in_flight: mllm.max_in_flight,
            layout: LayoutKind::FruchtermanReingold,
            layout_iterations: DEFAULT_FR_ITERATIONS,
            target_communities: None,
            adjust_d: DEFAULT_ADJUST_D,
            top_n: DEFAULT_ADJUST_TOP_N,
            label_mode: None,
            top_fraction: LabelPolicy::DEFAULT_TOP_FRACTION,
            min_labels: LabelPolicy::DEFAULT_MIN_LABELS,
            canvas_px: RenderSpec::full_label().canvas_px.0,
            raster_scale: 1.0,
            k: 5,
            model: SpreadModel::Ic,
            p: DEFAULT_IC_PROBABILITY,
            trials: VALIDATION_TRIALS,
            ls_trials: SEARCH_TRIALS,
            max_iter: DEFAULT_MAX_ITER,
            local_search: true,
            agents: Vec::new(),
            attempts: DEFAULT_ATTEMPTS,
            requery_budget: None,
            stop_fraction: DEFAULT_STOP_FRACTION,
            relayout: true,
            ci_radius: DEFAULT_CI_RADIUS,
            family: None,
            difficulty: None,
            tasks: Vec::new(),
            n_instances: DEFAULT_INSTANCES,
            presentation: "image-fr".into(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    /// Applies flag overrides given as a JSON object of field names to values.
    pub fn merged(self, overrides: serde_json::Map<String, serde_json::Value>) -> Result<Self, CliError> {
        let mut value = serde_json::to_value(self).expect("config serializes");
        let obj = value.as_object_mut().expect("config is an object");
        for (k, v) in overrides {
            if !obj.contains_key(&k) {
                return Err(CliError::Usage(format!("unknown config field `{k}`")));
            }
            obj.insert(k, v);
        }
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("invalid option: {e}")))
    }

    pub fn diffusion_model(&self) -> Result<DiffusionModel, CliError> {
        match self.model {
            SpreadModel::Ic => DiffusionModel::ic(self.p).map_err(|e| CliError::Usage(e.to_string())),
            SpreadModel::Lt => Ok(DiffusionModel::Lt),
        }
    }

    pub fn text_style(&self) -> Option<TextStyle> {
        match self.presentation.as_str() {
            "text-expert" => Some(TextStyle::Expert),
            "text-adjacency" => Some(TextStyle::Adjacency),
            _ => None,
        }
    }

    pub fn mllm_config(&self) -> MllmConfig {
        MllmConfig {
            endpoint: self.endpoint.clone(),
            model_name: self.model_name.clone(),
            temperature: self.temperature,
            max_in_flight: self.max_in_flight,
            ..MllmConfig::default()
        }
    }
}
