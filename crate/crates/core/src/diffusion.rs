//! Monte Carlo Independent Cascade and Linear Threshold spread.

use rand::distr::{Bernoulli, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId};

pub const DEFAULT_IC_PROBABILITY: f64 = 0.1;
pub const SEARCH_TRIALS: usize = 5_000;
pub const VALIDATION_TRIALS: usize = 100_000;

/// Trials per parallel work unit. Fixed so results do not depend on the pool size.
const CHUNK: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum DiffusionError {
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("seed {0} is not a node of the graph")]
    UnknownNode(NodeId),
    #[error("at least one trial is required")]
    ZeroTrials,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffusionModel {
    Ic { p: f64 },
    Lt,
}

impl DiffusionModel {
    pub fn ic(p: f64) -> Result<Self, DiffusionError> {
        let model = DiffusionModel::Ic { p };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<(), DiffusionError> {
        match *self {
            DiffusionModel::Ic { p } if !(0.0..=1.0).contains(&p) => {
                Err(DiffusionError::InvalidProbability(p))
            }
            _ => Ok(()),
        }
    }
}

impl Default for DiffusionModel {
    fn default() -> Self {
        DiffusionModel::Ic {
            p: DEFAULT_IC_PROBABILITY,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
    pub rng_seed: u64,
    pub model: DiffusionModel,
}

/// Scratch buffers reused across trials. `stamp[v] == epoch` marks `v` as
/// touched in the current trial, which avoids clearing per trial.
struct Workspace {
    epoch: u32,
    active_stamp: Vec<u32>,
    seen_stamp: Vec<u32>,
    influence: Vec<u32>,
    threshold: Vec<f64>,
    frontier: Vec<NodeId>,
    next: Vec<NodeId>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            epoch: 0,
            active_stamp: vec![0; n],
            seen_stamp: vec![0; n],
            influence: vec![0; n],
            threshold: vec![0.0; n],
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn begin(&mut self) {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.active_stamp.fill(0);
            self.seen_stamp.fill(0);
            self.epoch = 1;
        }
        self.frontier.clear();
        self.next.clear();
    }

    fn is_active(&self, v: NodeId) -> bool {
        self.active_stamp[v] == self.epoch
    }

    fn activate(&mut self, v: NodeId) -> bool {
        if self.is_active(v) {
            return false;
        }
        self.active_stamp[v] = self.epoch;
        true
    }

    fn seed(&mut self, seeds: &[NodeId]) -> usize {
        let mut count = 0;
        for &s in seeds {
            if self.activate(s) {
                self.frontier.push(s);
                count += 1;
            }
        }
        count
    }

    fn ic<R: Rng + ?Sized>(&mut self, g: &Graph, seeds: &[NodeId], coin: &Bernoulli, rng: &mut R) -> usize {
        self.begin();
        let mut count = self.seed(seeds);
        while !self.frontier.is_empty() {
            for i in 0..self.frontier.len() {
                let u = self.frontier[i];
                for &w in g.neighbors(u) {
                    if !self.is_active(w) && coin.sample(rng) {
                        self.active_stamp[w] = self.epoch;
                        self.next.push(w);
                        count += 1;
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            self.next.clear();
        }
        count
    }

    fn lt<R: Rng + ?Sized>(&mut self, g: &Graph, seeds: &[NodeId], rng: &mut R) -> usize {
        self.begin();
        let mut count = self.seed(seeds);
        while !self.frontier.is_empty() {
            for i in 0..self.frontier.len() {
                let u = self.frontier[i];
                for &w in g.neighbors(u) {
                    if self.is_active(w) {
                        continue;
                    }
                    // thresholds are drawn lazily, the first time a node feels influence
                    if self.seen_stamp[w] != self.epoch {
                        self.seen_stamp[w] = self.epoch;
                        self.influence[w] = 0;
                        self.threshold[w] = 1.0 - rng.random::<f64>();
                    }
                    self.influence[w] += 1;
                    let deg = g.neighbors(w).len() as f64;
                    if self.influence[w] as f64 >= self.threshold[w] * deg {
                        self.active_stamp[w] = self.epoch;
                        self.next.push(w);
                        count += 1;
                    }
                }
            }
            std::mem::swap(&mut self.frontier, &mut self.next);
            self.next.clear();
        }
        count
    }
}

/// One IC trial; returns the number of active nodes including the seeds.
pub fn simulate_ic<R: Rng + ?Sized>(g: &Graph, seeds: &[NodeId], p: f64, rng: &mut R) -> usize {
    let coin = Bernoulli::new(p.clamp(0.0, 1.0)).expect("clamped probability");
    Workspace::new(g.node_count()).ic(g, seeds, &coin, rng)
}

/// One LT trial with thresholds uniform on (0, 1] and edge weight `1/deg(v)` into `v`.
pub fn simulate_lt<R: Rng + ?Sized>(g: &Graph, seeds: &[NodeId], rng: &mut R) -> usize {
    Workspace::new(g.node_count()).lt(g, seeds, rng)
}

/// Random stream for one trial, independent of how trials are scheduled.
pub fn trial_rng(rng_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    rng.set_stream(trial);
    rng
}

/// Mean and standard error of the spread over `trials` independent runs.
pub fn expected_spread(
    g: &Graph,
    seeds: &[NodeId],
    model: DiffusionModel,
    trials: usize,
    rng_seed: u64,
) -> Result<SpreadEstimate, DiffusionError> {
    model.validate()?;
    if trials == 0 {
        return Err(DiffusionError::ZeroTrials);
    }
    if seeds.is_empty() {
        return Err(DiffusionError::EmptySeeds);
    }
    if let Some(&bad) = seeds.iter().find(|&&s| !g.contains(s)) {
        return Err(DiffusionError::UnknownNode(bad));
    }
    let coin = match model {
        DiffusionModel::Ic { p } => Some(Bernoulli::new(p).expect("validated probability")),
        DiffusionModel::Lt => None,
    };
    let chunks = trials.div_ceil(CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = Workspace::new(g.node_count());
            let mut sum = 0u64;
            let mut sum_sq = 0u128;
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(rng_seed, t as u64);
                let x = match &coin {
                    Some(coin) => ws.ic(g, seeds, coin, &mut rng),
                    None => ws.lt(g, seeds, &mut rng),
                } as u64;
                sum += x;
                sum_sq += (x as u128) * (x as u128);
            }
            (sum, sum_sq)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));

    let n = trials as f64;
    let mean = sum as f64 / n;
    let std_error = if trials > 1 {
        // integer accumulation keeps the variance exact until the final division
        let num = (trials as u128) * sum_sq - (sum as u128) * (sum as u128);
        let var = num as f64 / (n * (n - 1.0));
        (var / n).sqrt()
    } else {
        0.0
    };
    Ok(SpreadEstimate {
        mean,
        std_error,
        trials,
        rng_seed,
        model,
    })
}
