//! Node selectors: prompt construction, reply parsing, seed-set validation
//! and the backends that turn an (image, prompt) pair into node ids.

mod backend;
mod cache;

use std::collections::BTreeSet;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diffusion::SpreadEstimate;
use crate::graph::{CentralityMethod, CentralityParams, Graph, NodeId, NodeLabel};

pub use backend::{
    query, Backend, BackendKind, HeuristicBackend, MllmBackend, MllmConfig, OracleBackend,
    QueryContext, ScriptedBackend, SelectorError, SelectorRequest, SelectorResponse, TaskHint,
    API_KEY_ENV,
};
pub use cache::{CacheEntry, ResponseCache};

pub const DEFAULT_TEMPERATURE: f64 = 1.0;
pub const DEFAULT_MODEL_NAME: &str = "gpt-4o-2024-08-06";

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("expected {expected} in reply: {raw:?}")]
    Parse { raw: String, expected: &'static str },
    #[error("k must be at least 1")]
    ZeroK,
    #[error("no attempts to aggregate")]
    NoAttempts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMode {
    Full,
    Partial,
}

impl std::str::FromStr for LabelMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(LabelMode::Full),
            "partial" => Ok(LabelMode::Partial),
            other => Err(format!("unknown label mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentProfile {
    pub agent_id: u8,
    pub name: String,
    pub hint_text: String,
    pub label_mode: LabelMode,
}

#[derive(Deserialize)]
struct AgentDef {
    agent_id: u8,
    name: String,
    hint_text: String,
    modes: Vec<LabelMode>,
}

static AGENTS: LazyLock<Vec<AgentDef>> = LazyLock::new(|| {
    serde_json::from_str(include_str!("../../data/agents.json")).expect("bundled agents.json")
});

impl AgentProfile {
    /// Agents that take part under `mode`: 1-3 for full labels, 1-4 for partial.
    pub fn roster(mode: LabelMode) -> Vec<AgentProfile> {
        AGENTS
            .iter()
            .filter(|a| a.modes.contains(&mode))
            .map(|a| AgentProfile {
                agent_id: a.agent_id,
                name: a.name.clone(),
                hint_text: a.hint_text.clone(),
                label_mode: mode,
            })
            .collect()
    }

    pub fn by_id(id: u8, mode: LabelMode) -> Option<AgentProfile> {
        Self::roster(mode).into_iter().find(|a| a.agent_id == id)
    }
}

/// A prompt fragment; `authored` marks text written for this crate rather
/// than taken from the published prompt tables.
#[derive(Debug, Clone, Deserialize)]
pub struct Fragment {
    pub text: String,
    pub authored: bool,
}

#[derive(Debug, Deserialize)]
pub struct ImPrompts {
    pub context_full: Fragment,
    pub context_partial: Fragment,
    pub task: Fragment,
    pub output: Fragment,
}

#[derive(Debug, Deserialize)]
pub struct DismantlePrompts {
    pub context: Fragment,
    pub objective: Fragment,
    pub output: Fragment,
}

#[derive(Debug, Deserialize)]
pub struct BenchPrompts {
    pub lead_image: Fragment,
    pub lead_text: Fragment,
    pub expert_nodes: Fragment,
    pub expert_edge: Fragment,
    pub questions: std::collections::BTreeMap<String, Fragment>,
}

#[derive(Debug, Deserialize)]
pub struct PromptBook {
    pub im: ImPrompts,
    pub dismantle: DismantlePrompts,
    pub bench: BenchPrompts,
}

static PROMPTS: LazyLock<PromptBook> = LazyLock::new(|| {
    serde_json::from_str(include_str!("../../data/prompts.json")).expect("bundled prompts.json")
});

pub fn prompts() -> &'static PromptBook {
    &PROMPTS
}

pub fn build_im_prompt(agent: &AgentProfile, k: usize) -> Result<String, SelectionError> {
    if k == 0 {
        return Err(SelectionError::ZeroK);
    }
    let p = &prompts().im;
    let context = match agent.label_mode {
        LabelMode::Full => &p.context_full.text,
        LabelMode::Partial => &p.context_partial.text,
    };
    let mut parts = vec![context.clone()];
    if !agent.hint_text.is_empty() {
        parts.push(agent.hint_text.clone());
    }
    parts.push(p.task.text.replace("{k}", &k.to_string()));
    parts.push(p.output.text.clone());
    Ok(parts.join("\n"))
}

pub fn build_dismantle_prompt() -> String {
    let p = &prompts().dismantle;
    [&p.context.text, &p.objective.text, &p.output.text]
        .map(|s| s.as_str())
        .join("\n")
}

/// The first bracketed, comma-separated list of non-negative integers.
/// Order and duplicates are kept as written.
pub fn parse_node_list(raw: &str) -> Result<Vec<NodeLabel>, SelectionError> {
    let mut rest = raw;
    while let Some(open) = rest.find('[') {
        let after = &rest[open + 1..];
        let Some(close) = after.find(']') else { break };
        let body = after[..close].trim();
        let parsed: Result<Vec<NodeLabel>, _> = if body.is_empty() {
            Ok(Vec::new())
        } else {
            body.split(',').map(|t| t.trim().parse::<NodeLabel>()).collect()
        };
        if let Ok(ids) = parsed {
            return Ok(ids);
        }
        rest = after;
    }
    Err(SelectionError::Parse {
        raw: raw.to_string(),
        expected: "a bracketed list of node ids",
    })
}

/// The first run of decimal digits in the reply.
pub fn parse_single_node(raw: &str) -> Result<NodeLabel, SelectionError> {
    let start = raw.find(|c: char| c.is_ascii_digit());
    let parsed = start.and_then(|s| {
        let digits: String = raw[s..].chars().take_while(|c| c.is_ascii_digit()).collect();
        digits.parse().ok()
    });
    parsed.ok_or_else(|| SelectionError::Parse {
        raw: raw.to_string(),
        expected: "a node id",
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub size_ok: bool,
    pub all_exist: bool,
    pub no_duplicates: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.size_ok && self.all_exist && self.no_duplicates
    }

    /// Report for a reply that could not be parsed at all.
    pub fn unparsed() -> Self {
        Self {
            size_ok: false,
            all_exist: false,
            no_duplicates: false,
        }
    }
}

/// Checks a parsed reply (original labels) against the graph and requested size.
pub fn validate_seed_set(g: &Graph, parsed: &[NodeLabel], k: usize) -> ValidationReport {
    let distinct: BTreeSet<_> = parsed.iter().collect();
    ValidationReport {
        size_ok: parsed.len() == k,
        all_exist: parsed.iter().all(|&l| g.node_of(l).is_some()),
        no_duplicates: distinct.len() == parsed.len(),
    }
}

/// Share of replies passing each check, over every reply including unparsed ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub replies: usize,
    pub size_ratio: f64,
    pub exist_ratio: f64,
    pub distinct_ratio: f64,
}

impl ValidationSummary {
    pub fn from_reports<'a>(reports: impl IntoIterator<Item = &'a ValidationReport>) -> Self {
        let (mut n, mut size, mut exist, mut distinct) = (0usize, 0usize, 0usize, 0usize);
        for r in reports {
            n += 1;
            size += r.size_ok as usize;
            exist += r.all_exist as usize;
            distinct += r.no_duplicates as usize;
        }
        let ratio = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        Self {
            replies: n,
            size_ratio: ratio(size),
            exist_ratio: ratio(exist),
            distinct_ratio: ratio(distinct),
        }
    }
}

/// Top-k nodes by `method`, lower id first on ties.
pub fn heuristic_select(g: &Graph, method: CentralityMethod, k: usize) -> Vec<NodeId> {
    heuristic_select_with(g, method, k, &CentralityParams::default())
}

pub fn heuristic_select_with(
    g: &Graph,
    method: CentralityMethod,
    k: usize,
    params: &CentralityParams,
) -> Vec<NodeId> {
    // pagerank is the only method that can fail; fall back to degree order so
    // a selector always answers
    let scores = method
        .scores(g, params)
        .unwrap_or_else(|_| crate::graph::degree_centrality(g));
    scores.ranking().into_iter().take(k).collect()
}

/// Index of the attempt with the highest mean spread, earliest on ties.
pub fn aggregate_attempts(attempts: &[(Vec<NodeId>, SpreadEstimate)]) -> Result<usize, SelectionError> {
    let mut best: Option<usize> = None;
    for (i, (_, est)) in attempts.iter().enumerate() {
        match best {
            Some(b) if attempts[b].1.mean >= est.mean => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(SelectionError::NoAttempts)
}
