use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{bfs_distances, connected_components, has_cycle, Graph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Ba,
    Er,
    Ws,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Difficulty {
    Easy,
    Hard,
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ba" => Ok(Family::Ba),
            "er" => Ok(Family::Er),
            "ws" => Ok(Family::Ws),
            other => Err(format!("unknown family `{other}`")),
        }
    }
}

impl std::str::FromStr for Difficulty {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            other => Err(format!("unknown difficulty `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FamilyParams {
    /// Preferential attachment of `m` edges per new node, grown from `K_{m+1}`.
    Ba { m: usize },
    Er { p: f64 },
    /// Ring where each node links `k` neighbours per side, each edge rewired with probability `rewire`.
    Ws { k: usize, rewire: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenSpec {
    pub family: Family,
    pub difficulty: Difficulty,
    pub params: FamilyParams,
    /// Inclusive node-count range.
    pub n_range: (usize, usize),
}

impl GenSpec {
    /// The published benchmark settings for a family and difficulty.
    pub fn standard(family: Family, difficulty: Difficulty) -> Self {
        let n_range = match (family, difficulty) {
            (Family::Er, Difficulty::Easy) => (10, 15),
            (_, Difficulty::Easy) => (5, 10),
            (_, Difficulty::Hard) => (15, 20),
        };
        let params = match (family, difficulty) {
            (Family::Ba, _) => FamilyParams::Ba { m: 2 },
            (Family::Er, Difficulty::Easy) => FamilyParams::Er { p: 0.2 },
            (Family::Er, Difficulty::Hard) => FamilyParams::Er { p: 0.1 },
            (Family::Ws, _) => FamilyParams::Ws { k: 1, rewire: 0.2 },
        };
        Self {
            family,
            difficulty,
            params,
            n_range,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let (lo, hi) = self.n_range;
        if lo > hi || lo == 0 {
            return Err(format!("bad node range {lo}..={hi}"));
        }
        match self.params {
            FamilyParams::Ba { m } if m == 0 || lo < m + 1 => {
                Err(format!("BA needs m >= 1 and at least m + 1 = {} nodes", m + 1))
            }
            FamilyParams::Er { p } if !(0.0..=1.0).contains(&p) => Err(format!("ER p = {p}")),
            FamilyParams::Ws { k, rewire } if k == 0 || 2 * k >= lo || !(0.0..=1.0).contains(&rewire) => {
                Err(format!("WS k = {k}, rewire = {rewire} invalid for n >= {lo}"))
            }
            _ => Ok(()),
        }
    }
}

/// Draws one graph from `spec`; the node count is uniform on `n_range`.
pub fn generate(spec: &GenSpec, rng_seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let n = rng.random_range(spec.n_range.0..=spec.n_range.1);
    let edges = match spec.params {
        FamilyParams::Ba { m } => barabasi_albert(n, m, &mut rng),
        FamilyParams::Er { p } => erdos_renyi(n, p, &mut rng),
        FamilyParams::Ws { k, rewire } => watts_strogatz(n, k, rewire, &mut rng),
    };
    Graph::from_edges(n, edges).expect("generated edges are in range")
}

fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let core = (m + 1).min(n);
    let mut edges = Vec::new();
    // each endpoint appears once per incident edge, so uniform draws are degree-proportional
    let mut ends = Vec::new();
    for u in 0..core {
        for v in u + 1..core {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    for new in core..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(ends[rng.random_range(0..ends.len())]);
        }
        for t in targets {
            edges.push((new, t));
            ends.extend([new, t]);
        }
    }
    edges
}

fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn watts_strogatz<R: Rng>(n: usize, k: usize, rewire: f64, rng: &mut R) -> Vec<(NodeId, NodeId)> {
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.random_bool(rewire) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let mut edges = Vec::new();
    for (u, set) in adj.iter().enumerate() {
        edges.extend(set.iter().filter(|&&v| u < v).map(|&v| (u, v)));
    }
    edges
}

/// Summary statistics of one graph, as tabulated for the synthetic benchmarks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    pub avg_degree: f64,
    /// Mean hop distance over ordered reachable pairs of distinct nodes; 0 when there are none.
    pub avg_shortest: f64,
    pub components: usize,
    pub has_cycle: bool,
}

pub fn graph_stats(g: &Graph) -> GraphStats {
    let n = g.node_count();
    let (mut total, mut pairs) = (0usize, 0usize);
    for s in g.nodes() {
        for d in bfs_distances(g, s).into_iter().flatten().filter(|&d| d > 0) {
            total += d;
            pairs += 1;
        }
    }
    GraphStats {
        nodes: n,
        edges: g.edge_count(),
        avg_degree: if n == 0 { 0.0 } else { 2.0 * g.edge_count() as f64 / n as f64 },
        avg_shortest: if pairs == 0 { 0.0 } else { total as f64 / pairs as f64 },
        components: connected_components(g).count(),
        has_cycle: has_cycle(g),
    }
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSe {
    pub mean: f64,
    pub std_error: f64,
}

impl MeanSe {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Self {
                mean: 0.0,
                std_error: 0.0,
            };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Self {
            mean,
            std_error: (var / n).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchStats {
    pub family: Family,
    pub difficulty: Difficulty,
    pub graphs: usize,
    pub nodes: MeanSe,
    pub edges: MeanSe,
    pub avg_degree: MeanSe,
    pub avg_shortest: MeanSe,
    pub components: MeanSe,
    pub cycle_fraction: f64,
}

/// Statistics over graphs generated with seeds `first_seed..first_seed + count`.
pub fn batch_stats(spec: &GenSpec, first_seed: u64, count: usize) -> BatchStats {
    let stats: Vec<GraphStats> = (0..count as u64)
        .map(|i| graph_stats(&generate(spec, first_seed + i)))
        .collect();
    let col = |f: fn(&GraphStats) -> f64| MeanSe::of(&stats.iter().map(f).collect::<Vec<_>>());
    BatchStats {
        family: spec.family,
        difficulty: spec.difficulty,
        graphs: count,
        nodes: col(|s| s.nodes as f64),
        edges: col(|s| s.edges as f64),
        avg_degree: col(|s| s.avg_degree),
        avg_shortest: col(|s| s.avg_shortest),
        components: col(|s| s.components as f64),
        cycle_fraction: stats.iter().filter(|s| s.has_cycle).count() as f64 / count.max(1) as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_parameters() {
        let er_hard = GenSpec::standard(Family::Er, Difficulty::Hard);
        assert_eq!(er_hard.params, FamilyParams::Er { p: 0.1 });
        assert_eq!(er_hard.n_range, (15, 20));
        assert_eq!(GenSpec::standard(Family::Er, Difficulty::Easy).n_range, (10, 15));
        assert_eq!(GenSpec::standard(Family::Ba, Difficulty::Easy).params, FamilyParams::Ba { m: 2 });
        for f in [Family::Ba, Family::Er, Family::Ws] {
            for d in [Difficulty::Easy, Difficulty::Hard] {
                assert!(GenSpec::standard(f, d).validate().is_ok());
            }
        }
    }

    #[test]
    fn ba_is_connected_with_2n_minus_3_edges() {
        let spec = GenSpec::standard(Family::Ba, Difficulty::Hard);
        for seed in 0..50 {
            let g = generate(&spec, seed);
            assert_eq!(connected_components(&g).count(), 1);
            assert_eq!(g.edge_count(), 2 * g.node_count() - 3);
        }
    }

    #[test]
    fn ws_keeps_edge_count() {
        let spec = GenSpec::standard(Family::Ws, Difficulty::Easy);
        for seed in 0..50 {
            let g = generate(&spec, seed);
            assert_eq!(g.edge_count(), g.node_count());
            assert!(has_cycle(&g));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = GenSpec::standard(Family::Er, Difficulty::Easy);
        let a = generate(&spec, 7);
        let b = generate(&spec, 7);
        assert_eq!(a.edges().collect::<Vec<_>>(), b.edges().collect::<Vec<_>>());
        assert_eq!(a.node_count(), b.node_count());
    }

    #[test]
    fn stats_of_path() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let s = graph_stats(&g);
        assert_eq!(s.components, 1);
        assert!(!s.has_cycle);
        assert!((s.avg_shortest - 8.0 / 6.0).abs() < 1e-12);
        assert!((s.avg_degree - 4.0 / 3.0).abs() < 1e-12);
    }
}
