use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::OptimizeError;
use crate::diffusion::{expected_spread, DiffusionModel, SpreadEstimate, SEARCH_TRIALS};
use crate::graph::{betweenness, Graph, NodeId};

pub const DEFAULT_MAX_ITER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchConfig {
    pub max_iter: usize,
    pub trials: usize,
    pub rng_seed: u64,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            max_iter: DEFAULT_MAX_ITER,
            trials: SEARCH_TRIALS,
            rng_seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranking {
    Degree,
    Betweenness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Swap {
    pub iteration: usize,
    pub removed: NodeId,
    pub added: NodeId,
    pub ranking: Ranking,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSearchResult {
    pub seeds: Vec<NodeId>,
    pub initial_spread: SpreadEstimate,
    pub final_spread: SpreadEstimate,
    /// Accepted swaps in order; their spreads strictly increase.
    pub swaps: Vec<Swap>,
    pub evaluations: usize,
    pub iterations: usize,
}

/// Seed-swap refinement: for each seed, try its best-ranked neighbour outside
/// the set and keep the first swap that strictly raises the estimated spread.
///
/// Every estimate uses the same trial seed, so the comparison between two
/// candidate sets is made on common random numbers.
pub fn local_search(
    g: &Graph,
    seeds: &[NodeId],
    model: DiffusionModel,
    cfg: &LocalSearchConfig,
) -> Result<LocalSearchResult, OptimizeError> {
    if cfg.max_iter == 0 {
        return Err(OptimizeError::InvalidConfig("max_iter must be at least 1".into()));
    }
    let mut distinct = seeds.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() != seeds.len() {
        return Err(OptimizeError::InvalidSeeds("duplicate seeds".into()));
    }
    let degree = g.degrees();
    let between = betweenness(g).values;
    let mut coin = ChaCha8Rng::seed_from_u64(cfg.rng_seed ^ 0x5eed_c01f_5eed_c01f);
    let estimate = |s: &[NodeId]| expected_spread(g, s, model, cfg.trials, cfg.rng_seed);

    let mut current = seeds.to_vec();
    let initial_spread = estimate(&current)?;
    let mut best = initial_spread;
    let mut swaps = Vec::new();
    let mut evaluations = 1;
    let mut iterations = 0;

    for iteration in 0..cfg.max_iter {
        iterations = iteration + 1;
        let mut improved = false;
        for pos in 0..current.len() {
            let v = current[pos];
            let ranking = if coin.random_bool(0.5) {
                Ranking::Degree
            } else {
                Ranking::Betweenness
            };
            let score = |u: NodeId| match ranking {
                Ranking::Degree => degree[u] as f64,
                Ranking::Betweenness => between[u],
            };
            let candidate = g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|u| !current.contains(u))
                .min_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
            let Some(u) = candidate else { continue };
            let mut trial = current.clone();
            trial[pos] = u;
            let spread = estimate(&trial)?;
            evaluations += 1;
            if spread.mean > best.mean {
                swaps.push(Swap {
                    iteration,
                    removed: v,
                    added: u,
                    ranking,
                    spread: spread.mean,
                });
                current = trial;
                best = spread;
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    Ok(LocalSearchResult {
        seeds: current,
        initial_spread,
        final_spread: best,
        swaps,
        evaluations,
        iterations,
    })
}
