use serde::{Deserialize, Serialize};

use super::OptimizeError;
use crate::graph::{
    collective_influence_all, degree_centrality, largest_component_size, Graph, NodeId, NodeLabel,
    DEFAULT_CI_RADIUS,
};
use crate::layout::{compute_layout, LayoutKind, LayoutResult, DEFAULT_FR_ITERATIONS};
use crate::render::{rasterize, render, ImageArtifact, RenderSpec};
use crate::selection::{
    build_dismantle_prompt, query, Backend, QueryContext, ResponseCache, SelectorRequest, TaskHint,
    DEFAULT_TEMPERATURE,
};

pub const DEFAULT_STOP_FRACTION: f64 = 0.25;
pub const DEFAULT_REQUERY_BUDGET: u32 = 2;

/// Highest-degree node of the residual graph, lowest id on ties.
pub fn hd_step(g: &Graph) -> Option<NodeId> {
    degree_centrality(g).argmax()
}

/// Highest collective-influence node of the residual graph, lowest id on ties.
pub fn hci_step(g: &Graph, radius: usize) -> Option<NodeId> {
    collective_influence_all(g, radius).argmax()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DismantleConfig {
    pub stop_fraction: f64,
    pub relayout_each_step: bool,
    pub requery_budget: u32,
    pub layout: LayoutKind,
    pub layout_iterations: usize,
    pub render: RenderSpec,
    /// Scale for the PNG attached to each query; `None` sends SVG-only artifacts.
    pub raster_scale: Option<f64>,
    pub rng_seed: u64,
    pub temperature: f64,
}

impl Default for DismantleConfig {
    fn default() -> Self {
        Self {
            stop_fraction: DEFAULT_STOP_FRACTION,
            relayout_each_step: true,
            requery_budget: DEFAULT_REQUERY_BUDGET,
            layout: LayoutKind::FruchtermanReingold,
            layout_iterations: DEFAULT_FR_ITERATIONS,
            render: RenderSpec::full_label(),
            raster_scale: Some(1.0),
            rng_seed: 0,
            temperature: DEFAULT_TEMPERATURE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSource {
    Selector,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DismantleStep {
    pub q: usize,
    pub removed: NodeLabel,
    pub source: StepSource,
    pub replies: Vec<String>,
    pub lcc_after: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub image_hash: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DismantleTrace {
    pub removal_sequence: Vec<NodeLabel>,
    /// `lcc_curve[q]` is the largest component size after `q` removals.
    pub lcc_curve: Vec<usize>,
    pub n: usize,
    pub stop_fraction: f64,
    pub steps: Vec<DismantleStep>,
    pub fallbacks: usize,
}

impl DismantleTrace {
    pub fn q_max(&self) -> usize {
        self.lcc_curve.len().saturating_sub(1)
    }
}

/// Number of removals for a stop fraction: `floor(fraction * n)`.
pub fn removal_budget(n: usize, stop_fraction: f64) -> usize {
    ((stop_fraction * n as f64) + 1e-9).floor() as usize
}

/// `(1/N) * sum_{Q=1}^{Q_max} s(Q)`.
pub fn robustness_r(trace: &DismantleTrace) -> f64 {
    if trace.n == 0 {
        return 0.0;
    }
    trace.lcc_curve.iter().skip(1).sum::<usize>() as f64 / trace.n as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AucRule {
    /// Trapezoids over `Q = 0..=Q_stop` of `s(Q)/N`.
    #[default]
    Trapezoid,
    /// `sum_{Q=1}^{Q_stop} s(Q)/N`.
    LeftSum,
}

/// Area under the normalized LCC curve up to `floor(0.25 N)` removals.
pub fn auc(trace: &DismantleTrace) -> f64 {
    auc_with(trace, AucRule::Trapezoid)
}

pub fn auc_with(trace: &DismantleTrace, rule: AucRule) -> f64 {
    if trace.n == 0 || trace.lcc_curve.is_empty() {
        return 0.0;
    }
    let stop = removal_budget(trace.n, DEFAULT_STOP_FRACTION).min(trace.q_max());
    let s = &trace.lcc_curve[..=stop];
    let n = trace.n as f64;
    match rule {
        AucRule::LeftSum => s[1..].iter().sum::<usize>() as f64 / n,
        AucRule::Trapezoid => s
            .windows(2)
            .map(|w| (w[0] + w[1]) as f64 / 2.0)
            .sum::<f64>()
            / n,
    }
}

/// A trace cut short by a selector that kept failing.
#[derive(Debug)]
pub struct DismantleFailure {
    pub trace: DismantleTrace,
    pub error: OptimizeError,
}

impl std::fmt::Display for DismantleFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "dismantling stopped after {} removals: {}",
            self.trace.removal_sequence.len(),
            self.error
        )
    }
}

impl std::error::Error for DismantleFailure {}

/// Removes one selector-chosen node at a time until `floor(stop_fraction * N)`
/// nodes are gone. Invalid suggestions are re-asked up to the re-query budget,
/// then replaced by the highest-degree node.
///
/// `on_image` sees every rendered step image, for audit storage.
#[allow(clippy::result_large_err)]
pub fn dismantle(
    g: &Graph,
    backend: &dyn Backend,
    cfg: &DismantleConfig,
    cache: Option<&ResponseCache>,
    on_image: &mut dyn FnMut(usize, &ImageArtifact),
) -> Result<DismantleTrace, DismantleFailure> {
    let n = g.node_count();
    let empty_trace = || DismantleTrace {
        removal_sequence: Vec::new(),
        lcc_curve: vec![largest_component_size(g)],
        n,
        stop_fraction: cfg.stop_fraction,
        steps: Vec::new(),
        fallbacks: 0,
    };
    if !(cfg.stop_fraction > 0.0 && cfg.stop_fraction <= 1.0) {
        return Err(DismantleFailure {
            trace: empty_trace(),
            error: OptimizeError::InvalidConfig(format!(
                "stop_fraction {} outside (0, 1]",
                cfg.stop_fraction
            )),
        });
    }
    let mut trace = empty_trace();
    let budget = removal_budget(n, cfg.stop_fraction);
    let prompt = build_dismantle_prompt();
    let mut alive = vec![true; n];
    let mut base_layout: Option<LayoutResult> = None;

    for q in 1..=budget {
        let residual = g.induced(&alive);
        if residual.is_empty() {
            break;
        }
        let image = if backend.needs_image() {
            let layout = if cfg.relayout_each_step {
                compute_layout(&residual, cfg.layout, cfg.rng_seed, cfg.layout_iterations)
            } else {
                let full = base_layout.get_or_insert_with(|| {
                    compute_layout(g, cfg.layout, cfg.rng_seed, cfg.layout_iterations)
                });
                LayoutResult {
                    positions: (0..n).filter(|&v| alive[v]).map(|v| full.positions[v]).collect(),
                    ..full.clone()
                }
            };
            let drawn = render(&residual, &layout, None, &cfg.render).map_err(|e| DismantleFailure {
                trace: trace.clone(),
                error: e.into(),
            })?;
            let drawn = match cfg.raster_scale {
                Some(scale) => rasterize(&drawn, scale).map_err(|e| DismantleFailure {
                    trace: trace.clone(),
                    error: e.into(),
                })?,
                None => drawn,
            };
            on_image(q, &drawn);
            Some(drawn)
        } else {
            None
        };

        let ctx = QueryContext {
            graph: &residual,
            task: TaskHint::RemoveOne,
        };
        let mut replies = Vec::new();
        let mut last_error = None;
        let mut chosen = None;
        for r in 0..=cfg.requery_budget {
            let sample = (q as u32) * (cfg.requery_budget + 1) + r;
            let req = SelectorRequest::new(
                image.clone(),
                prompt.clone(),
                backend.model_name(),
                cfg.temperature,
                sample,
            );
            match query(backend, &req, &ctx, cache) {
                Ok(resp) => {
                    let pick = resp
                        .parsed
                        .as_ref()
                        .and_then(|p| p.first())
                        .and_then(|&label| residual.node_of(label));
                    replies.push(resp.raw_text);
                    if let Some(v) = pick {
                        chosen = Some(v);
                        break;
                    }
                }
                Err(e) => {
                    log::warn!("step {q}: selector failed: {e}");
                    last_error = Some(e);
                }
            }
        }
        let (v, source) = match chosen {
            Some(v) => (v, StepSource::Selector),
            None if replies.is_empty() => {
                let error = last_error.map_or_else(
                    || OptimizeError::InvalidConfig("selector gave no reply".into()),
                    OptimizeError::from,
                );
                return Err(DismantleFailure { trace, error });
            }
            None => {
                let v = hd_step(&residual).expect("residual graph is nonempty");
                log::info!("step {q}: falling back to highest degree");
                trace.fallbacks += 1;
                (v, StepSource::Fallback)
            }
        };
        let label = residual.label(v);
        let original = g.node_of(label).expect("residual keeps original labels");
        alive[original] = false;
        let lcc_after = largest_component_size(&g.induced(&alive));
        trace.removal_sequence.push(label);
        trace.lcc_curve.push(lcc_after);
        trace.steps.push(DismantleStep {
            q,
            removed: label,
            source,
            replies,
            lcc_after,
            image_hash: image.map(|i| i.content_hash),
        });
    }
    Ok(trace)
}

/// Adaptive baseline trace without any selector: repeatedly removes `pick(residual)`.
pub fn baseline_trace(
    g: &Graph,
    stop_fraction: f64,
    mut pick: impl FnMut(&Graph) -> Option<NodeId>,
) -> DismantleTrace {
    let n = g.node_count();
    let mut alive = vec![true; n];
    let mut trace = DismantleTrace {
        removal_sequence: Vec::new(),
        lcc_curve: vec![largest_component_size(g)],
        n,
        stop_fraction,
        steps: Vec::new(),
        fallbacks: 0,
    };
    for q in 1..=removal_budget(n, stop_fraction) {
        let residual = g.induced(&alive);
        let Some(v) = pick(&residual) else { break };
        let label = residual.label(v);
        alive[g.node_of(label).expect("residual keeps original labels")] = false;
        let lcc_after = largest_component_size(&g.induced(&alive));
        trace.removal_sequence.push(label);
        trace.lcc_curve.push(lcc_after);
        trace.steps.push(DismantleStep {
            q,
            removed: label,
            source: StepSource::Selector,
            replies: Vec::new(),
            lcc_after,
            image_hash: None,
        });
    }
    trace
}

pub fn hd_trace(g: &Graph, stop_fraction: f64) -> DismantleTrace {
    baseline_trace(g, stop_fraction, hd_step)
}

pub fn hci_trace(g: &Graph, stop_fraction: f64, radius: usize) -> DismantleTrace {
    baseline_trace(g, stop_fraction, |r| hci_step(r, radius))
}

pub fn hci_trace_default(g: &Graph, stop_fraction: f64) -> DismantleTrace {
    hci_trace(g, stop_fraction, DEFAULT_CI_RADIUS)
}
