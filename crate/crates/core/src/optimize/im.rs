use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::local_search::{local_search, LocalSearchConfig, LocalSearchResult};
use super::OptimizeError;
use crate::diffusion::{expected_spread, DiffusionModel, SpreadEstimate, VALIDATION_TRIALS};
use crate::graph::{Graph, NodeId, NodeLabel};
use crate::render::ImageArtifact;
use crate::selection::{
    aggregate_attempts, build_im_prompt, query, validate_seed_set, AgentProfile, Backend,
    BackendKind, QueryContext, ResponseCache, SelectorRequest, TaskHint, ValidationReport,
    ValidationSummary, DEFAULT_TEMPERATURE,
};

pub const DEFAULT_ATTEMPTS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImConfig {
    pub k: usize,
    pub attempts_per_agent: u32,
    pub model: DiffusionModel,
    pub validation_trials: usize,
    pub rng_seed: u64,
    pub temperature: f64,
    /// Extra queries allowed after a reply fails validation. Zero keeps the
    /// raw validity of replies observable.
    pub requery_budget: u32,
    pub local_search: Option<LocalSearchConfig>,
}

impl Default for ImConfig {
    fn default() -> Self {
        Self {
            k: 5,
            attempts_per_agent: DEFAULT_ATTEMPTS,
            model: DiffusionModel::default(),
            validation_trials: VALIDATION_TRIALS,
            rng_seed: 0,
            temperature: DEFAULT_TEMPERATURE,
            requery_budget: 0,
            local_search: Some(LocalSearchConfig::default()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub agent_id: u8,
    pub attempt: u32,
    /// 0 for the original query, then 1.. for re-queries after invalid replies.
    pub requery: u32,
    pub request_id: String,
    pub raw_text: Option<String>,
    pub parsed: Option<Vec<NodeLabel>>,
    pub validation: ValidationReport,
    pub spread: Option<SpreadEstimate>,
    pub cached: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentResult {
    pub agent: AgentProfile,
    pub attempts: Vec<AttemptRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImRun {
    pub network_id: String,
    pub model: DiffusionModel,
    pub k: usize,
    pub agents: Vec<AgentResult>,
    /// Validity ratios over first replies only.
    pub validation: ValidationSummary,
    pub best_agent: u8,
    pub best_seeds: Vec<NodeLabel>,
    pub best_spread: SpreadEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_seeds_ls: Option<Vec<NodeLabel>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_spread_ls: Option<SpreadEstimate>,
    /// True when the refined set validated below the starting set and was discarded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ls_reverted: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ls_swaps: Option<usize>,
}

fn labels_to_ids(g: &Graph, labels: &[NodeLabel]) -> Vec<NodeId> {
    labels.iter().filter_map(|&l| g.node_of(l)).collect()
}

fn ids_to_labels(g: &Graph, ids: &[NodeId]) -> Vec<NodeLabel> {
    ids.iter().map(|&v| g.label(v)).collect()
}

/// Queries every agent `attempts_per_agent` times, validates the replies,
/// estimates the spread of the valid ones and refines the best set.
pub fn run_im(
    g: &Graph,
    network_id: &str,
    agents: &[AgentProfile],
    image: Option<&ImageArtifact>,
    cfg: &ImConfig,
    backend: &dyn Backend,
    cache: Option<&ResponseCache>,
) -> Result<ImRun, OptimizeError> {
    cfg.model.validate()?;
    if cfg.k == 0 || cfg.k > g.node_count() {
        return Err(OptimizeError::InvalidConfig(format!(
            "k = {} outside 1..={}",
            cfg.k,
            g.node_count()
        )));
    }
    if agents.is_empty() || cfg.attempts_per_agent == 0 {
        return Err(OptimizeError::InvalidConfig("no agents or attempts".into()));
    }
    if backend.needs_image() && image.is_none() {
        return Err(OptimizeError::InvalidConfig(
            "backend needs an image but none was rendered".into(),
        ));
    }

    let jobs: Vec<(usize, u32)> = (0..agents.len())
        .flat_map(|a| (0..cfg.attempts_per_agent).map(move |t| (a, t)))
        .collect();
    let ask = |&(a, attempt): &(usize, u32)| -> Vec<AttemptRecord> {
        ask_agent(g, &agents[a], attempt, image, cfg, backend, cache)
    };
    // remote calls overlap; deterministic backends keep their queue order
    let records: Vec<Vec<AttemptRecord>> = if backend.kind() == BackendKind::Mllm {
        jobs.par_iter().map(ask).collect()
    } else {
        jobs.iter().map(ask).collect()
    };

    // identical seed sets share one estimate
    let mut estimates: HashMap<Vec<NodeId>, SpreadEstimate> = HashMap::new();
    let mut agent_results: Vec<AgentResult> = agents
        .iter()
        .map(|a| AgentResult {
            agent: a.clone(),
            attempts: Vec::new(),
        })
        .collect();
    let mut valid: Vec<(Vec<NodeId>, SpreadEstimate)> = Vec::new();
    let mut valid_owner: Vec<u8> = Vec::new();
    for ((a, _), recs) in jobs.iter().zip(records) {
        for mut rec in recs {
            if rec.validation.is_valid() {
                let ids = labels_to_ids(g, rec.parsed.as_deref().unwrap_or_default());
                let mut key = ids.clone();
                key.sort_unstable();
                let est = match estimates.get(&key) {
                    Some(e) => *e,
                    None => {
                        let e = expected_spread(g, &key, cfg.model, cfg.validation_trials, cfg.rng_seed)?;
                        estimates.insert(key, e);
                        e
                    }
                };
                rec.spread = Some(est);
                valid.push((ids, est));
                valid_owner.push(rec.agent_id);
            }
            agent_results[*a].attempts.push(rec);
        }
    }

    let firsts: Vec<ValidationReport> = agent_results
        .iter()
        .flat_map(|r| r.attempts.iter())
        .filter(|r| r.requery == 0)
        .map(|r| r.validation)
        .collect();
    let validation = ValidationSummary::from_reports(&firsts);

    if valid.is_empty() {
        return Err(OptimizeError::NoValidAttempts(failure_distribution(&agent_results)));
    }
    let best = aggregate_attempts(&valid)?;
    let (best_ids, best_spread) = valid[best].clone();

    let mut run = ImRun {
        network_id: network_id.to_string(),
        model: cfg.model,
        k: cfg.k,
        agents: agent_results,
        validation,
        best_agent: valid_owner[best],
        best_seeds: ids_to_labels(g, &best_ids),
        best_spread,
        best_seeds_ls: None,
        best_spread_ls: None,
        ls_reverted: None,
        ls_swaps: None,
    };

    if let Some(ls_cfg) = &cfg.local_search {
        let LocalSearchResult { seeds, swaps, .. } = local_search(g, &best_ids, cfg.model, ls_cfg)?;
        let mut key = seeds.clone();
        key.sort_unstable();
        let refined = expected_spread(g, &key, cfg.model, cfg.validation_trials, cfg.rng_seed)?;
        // the search compares on a smaller budget; keep the starting set if the
        // refined one does not hold up under the validation budget
        let reverted = refined.mean < best_spread.mean;
        let (ls_ids, ls_spread) = if reverted {
            (best_ids.clone(), best_spread)
        } else {
            (seeds, refined)
        };
        run.best_seeds_ls = Some(ids_to_labels(g, &ls_ids));
        run.best_spread_ls = Some(ls_spread);
        run.ls_reverted = Some(reverted);
        run.ls_swaps = Some(swaps.len());
    }
    Ok(run)
}

fn ask_agent(
    g: &Graph,
    agent: &AgentProfile,
    attempt: u32,
    image: Option<&ImageArtifact>,
    cfg: &ImConfig,
    backend: &dyn Backend,
    cache: Option<&ResponseCache>,
) -> Vec<AttemptRecord> {
    let prompt = match build_im_prompt(agent, cfg.k) {
        Ok(p) => p,
        Err(e) => unreachable!("k validated before querying: {e}"),
    };
    let ctx = QueryContext {
        graph: g,
        task: TaskHint::Seeds { k: cfg.k },
    };
    let mut out = Vec::new();
    for requery in 0..=cfg.requery_budget {
        let sample = attempt + requery * cfg.attempts_per_agent;
        let req = SelectorRequest::new(
            image.cloned(),
            prompt.clone(),
            backend.model_name(),
            cfg.temperature,
            sample,
        );
        let mut rec = AttemptRecord {
            agent_id: agent.agent_id,
            attempt,
            requery,
            request_id: req.request_id.clone(),
            raw_text: None,
            parsed: None,
            validation: ValidationReport::unparsed(),
            spread: None,
            cached: false,
            error: None,
        };
        match query(backend, &req, &ctx, cache) {
            Ok(resp) => {
                if let Some(parsed) = &resp.parsed {
                    rec.validation = validate_seed_set(g, parsed, cfg.k);
                }
                rec.raw_text = Some(resp.raw_text);
                rec.parsed = resp.parsed;
                rec.cached = resp.cached;
            }
            Err(e) => {
                log::warn!("agent {} attempt {attempt}: {e}", agent.agent_id);
                rec.error = Some(e.to_string());
            }
        }
        let done = rec.validation.is_valid();
        out.push(rec);
        if done {
            break;
        }
    }
    out
}

fn failure_distribution(results: &[AgentResult]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in results.iter().flat_map(|r| r.attempts.iter()) {
        let reason = if rec.error.is_some() {
            "backend error"
        } else if rec.parsed.is_none() {
            "unparseable"
        } else if !rec.validation.size_ok {
            "wrong size"
        } else if !rec.validation.all_exist {
            "unknown node"
        } else {
            "duplicates"
        };
        *counts.entry(reason).or_default() += 1;
    }
    counts
        .iter()
        .map(|(r, c)| format!("{r}: {c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::CentralityMethod;
    use crate::selection::{HeuristicBackend, LabelMode, ScriptedBackend};

    fn small_cfg(k: usize) -> ImConfig {
        ImConfig {
            k,
            attempts_per_agent: 2,
            validation_trials: 2000,
            local_search: Some(LocalSearchConfig {
                trials: 500,
                ..LocalSearchConfig::default()
            }),
            ..ImConfig::default()
        }
    }

    fn barbell() -> Graph {
        Graph::with_labels(
            vec![10, 11, 12, 13, 14, 15],
            [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (3, 5), (4, 5)],
        )
        .unwrap()
    }

    #[test]
    fn scripted_fixed_reply() {
        let g = barbell();
        let agents = AgentProfile::roster(LabelMode::Full);
        let backend = ScriptedBackend::new(vec!["[10, 15]".into()], true);
        let run = run_im(&g, "barbell", &agents, None, &small_cfg(2), &backend, None).unwrap();
        assert_eq!(run.best_seeds, vec![10, 15]);
        assert_eq!(run.validation.size_ratio, 1.0);
        assert_eq!(run.agents.len(), 3);
        assert!(run.best_spread_ls.unwrap().mean >= run.best_spread.mean);
    }

    #[test]
    fn invalid_replies_are_recorded() {
        let g = barbell();
        let agents = AgentProfile::roster(LabelMode::Full);
        let replies = vec!["[10, 10]", "nothing", "[10, 99]", "[12, 13]", "[11]", "[12, 14]"];
        let backend = ScriptedBackend::new(replies.into_iter().map(String::from).collect(), false);
        let cfg = ImConfig {
            local_search: None,
            ..small_cfg(2)
        };
        let run = run_im(&g, "barbell", &agents, None, &cfg, &backend, None).unwrap();
        assert_eq!(run.validation.replies, 6);
        assert_eq!(run.validation.size_ratio, 4.0 / 6.0);
        assert_eq!(run.validation.exist_ratio, 4.0 / 6.0);
        assert_eq!(run.validation.distinct_ratio, 4.0 / 6.0);
        assert!(run.best_seeds_ls.is_none());
        let json = serde_json::to_string(&run).unwrap();
        assert!(!json.contains("best_seeds_ls"));
    }

    #[test]
    fn requery_after_invalid_reply() {
        let g = barbell();
        let agents = AgentProfile::roster(LabelMode::Full)[..1].to_vec();
        let backend = ScriptedBackend::new(vec!["bad".into(), "[12]".into()], false);
        let cfg = ImConfig {
            k: 1,
            attempts_per_agent: 1,
            requery_budget: 2,
            local_search: None,
            ..small_cfg(1)
        };
        let run = run_im(&g, "barbell", &agents, None, &cfg, &backend, None).unwrap();
        assert_eq!(run.agents[0].attempts.len(), 2);
        assert_eq!(run.validation.replies, 1);
        assert_eq!(run.validation.size_ratio, 0.0);
        assert_eq!(run.best_seeds, vec![12]);
    }

    #[test]
    fn no_valid_attempts_is_an_error() {
        let g = barbell();
        let agents = AgentProfile::roster(LabelMode::Full);
        let backend = ScriptedBackend::new(vec!["[]".into()], true);
        let err = run_im(&g, "barbell", &agents, None, &small_cfg(2), &backend, None).unwrap_err();
        assert!(err.to_string().contains("wrong size: 6"), "{err}");
    }

    #[test]
    fn heuristic_backend_is_deterministic() {
        let g = barbell();
        let agents = AgentProfile::roster(LabelMode::Partial);
        let backend = HeuristicBackend::new(CentralityMethod::Degree);
        let a = run_im(&g, "b", &agents, None, &small_cfg(2), &backend, None).unwrap();
        let b = run_im(&g, "b", &agents, None, &small_cfg(2), &backend, None).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.best_seeds, vec![12, 13]);
    }
}
