use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{bfs_distances, Graph, GraphError, NodeId};

pub const DEFAULT_PAGERANK_ALPHA: f64 = 0.85;
pub const DEFAULT_PAGERANK_TOL: f64 = 1e-9;
pub const DEFAULT_PAGERANK_MAX_ITER: usize = 200;
pub const DEFAULT_CI_RADIUS: usize = 2;

/// Sources handled per parallel work unit in betweenness. Fixed so that the
/// floating-point summation order never depends on the thread count.
const BETWEENNESS_CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralityMethod {
    Degree,
    Betweenness,
    Closeness,
    Pagerank,
    CollectiveInfluence,
}

impl CentralityMethod {
    pub const ALL: [CentralityMethod; 5] = [
        CentralityMethod::Degree,
        CentralityMethod::Betweenness,
        CentralityMethod::Closeness,
        CentralityMethod::Pagerank,
        CentralityMethod::CollectiveInfluence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CentralityMethod::Degree => "degree",
            CentralityMethod::Betweenness => "betweenness",
            CentralityMethod::Closeness => "closeness",
            CentralityMethod::Pagerank => "pagerank",
            CentralityMethod::CollectiveInfluence => "collective_influence",
        }
    }

    /// Scores every node with this method under `params`.
    pub fn scores(self, g: &Graph, params: &CentralityParams) -> Result<CentralityScores, GraphError> {
        match self {
            CentralityMethod::Degree => Ok(degree_centrality(g)),
            CentralityMethod::Betweenness => Ok(betweenness(g)),
            CentralityMethod::Closeness => Ok(closeness_all(g)),
            CentralityMethod::Pagerank => pagerank(g, params.alpha, params.tol, params.max_iter),
            CentralityMethod::CollectiveInfluence => Ok(collective_influence_all(g, params.radius)),
        }
    }
}

impl std::str::FromStr for CentralityMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "degree" | "hd" => Ok(CentralityMethod::Degree),
            "betweenness" => Ok(CentralityMethod::Betweenness),
            "closeness" => Ok(CentralityMethod::Closeness),
            "pagerank" => Ok(CentralityMethod::Pagerank),
            "ci" | "collective_influence" | "hci" => Ok(CentralityMethod::CollectiveInfluence),
            other => Err(format!("unknown centrality method `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralityParams {
    pub alpha: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub radius: usize,
}

impl Default for CentralityParams {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_PAGERANK_ALPHA,
            tol: DEFAULT_PAGERANK_TOL,
            max_iter: DEFAULT_PAGERANK_MAX_ITER,
            radius: DEFAULT_CI_RADIUS,
        }
    }
}

/// One score per node, with the method and parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralityScores {
    pub method: CentralityMethod,
    pub values: Vec<f64>,
    pub params: CentralityParams,
}

impl CentralityScores {
    fn new(method: CentralityMethod, values: Vec<f64>, params: CentralityParams) -> Self {
        Self {
            method,
            values,
            params,
        }
    }

    /// Node ids ordered by descending score, lower id first on ties.
    pub fn ranking(&self) -> Vec<NodeId> {
        let mut order: Vec<NodeId> = (0..self.values.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .total_cmp(&self.values[a])
                .then_with(|| a.cmp(&b))
        });
        order
    }

    /// Highest-scoring node, lowest id on ties.
    pub fn argmax(&self) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for (v, &s) in self.values.iter().enumerate() {
            match best {
                Some(b) if self.values[b] >= s => {}
                _ => best = Some(v),
            }
        }
        best
    }
}

pub fn degree_centrality(g: &Graph) -> CentralityScores {
    CentralityScores::new(
        CentralityMethod::Degree,
        g.degrees().into_iter().map(|d| d as f64).collect(),
        CentralityParams::default(),
    )
}

/// Shortest-path betweenness with each unordered pair counted once.
pub fn betweenness(g: &Graph) -> CentralityScores {
    let n = g.node_count();
    let sources: Vec<NodeId> = g.nodes().collect();
    let partials: Vec<Vec<f64>> = sources
        .par_chunks(BETWEENNESS_CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut work = BrandesWork::new(n);
            for &s in chunk {
                work.accumulate_from(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut values = vec![0.0; n];
    for part in partials {
        for (v, x) in values.iter_mut().zip(part) {
            *v += x;
        }
    }
    // every unordered pair was visited from both endpoints
    for v in &mut values {
        *v /= 2.0;
    }
    CentralityScores::new(CentralityMethod::Betweenness, values, CentralityParams::default())
}

struct BrandesWork {
    stack: Vec<NodeId>,
    queue: VecDeque<NodeId>,
    dist: Vec<i64>,
    sigma: Vec<f64>,
    delta: Vec<f64>,
}

impl BrandesWork {
    fn new(n: usize) -> Self {
        Self {
            stack: Vec::with_capacity(n),
            queue: VecDeque::with_capacity(n),
            dist: vec![-1; n],
            sigma: vec![0.0; n],
            delta: vec![0.0; n],
        }
    }

    fn accumulate_from(&mut self, g: &Graph, s: NodeId, acc: &mut [f64]) {
        self.dist.fill(-1);
        self.sigma.fill(0.0);
        self.delta.fill(0.0);
        self.stack.clear();
        self.dist[s] = 0;
        self.sigma[s] = 1.0;
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.stack.push(v);
            for &w in g.neighbors(v) {
                if self.dist[w] < 0 {
                    self.dist[w] = self.dist[v] + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w] == self.dist[v] + 1 {
                    self.sigma[w] += self.sigma[v];
                }
            }
        }
        while let Some(w) = self.stack.pop() {
            for &v in g.neighbors(w) {
                if self.dist[v] == self.dist[w] - 1 {
                    self.delta[v] += self.sigma[v] / self.sigma[w] * (1.0 + self.delta[w]);
                }
            }
            if w != s {
                acc[w] += self.delta[w];
            }
        }
    }
}

/// Inverse of the summed distance to every reachable node; 0 for isolated nodes.
pub fn closeness(g: &Graph, v: NodeId) -> Result<f64, GraphError> {
    g.check_node(v)?;
    let total: usize = bfs_distances(g, v).into_iter().flatten().sum();
    Ok(if total == 0 { 0.0 } else { 1.0 / total as f64 })
}

pub fn closeness_all(g: &Graph) -> CentralityScores {
    let values = g
        .nodes()
        .into_par_iter()
        .map(|v| closeness(g, v).expect("node in range"))
        .collect();
    CentralityScores::new(CentralityMethod::Closeness, values, CentralityParams::default())
}

/// Power iteration for undirected PageRank where a node's out-weight is its
/// degree. Mass held by isolated nodes is spread uniformly so scores sum to 1.
pub fn pagerank(g: &Graph, alpha: f64, tol: f64, max_iter: usize) -> Result<CentralityScores, GraphError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(GraphError::InvalidParameter(format!(
            "damping factor must lie in (0, 1), got {alpha}"
        )));
    }
    let n = g.node_count();
    let params = CentralityParams {
        alpha,
        tol,
        max_iter,
        ..CentralityParams::default()
    };
    if n == 0 {
        return Ok(CentralityScores::new(CentralityMethod::Pagerank, Vec::new(), params));
    }
    let degrees = g.degrees();
    let uniform = 1.0 / n as f64;
    let mut rank = vec![uniform; n];
    let mut next = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for _ in 0..max_iter {
        let dangling: f64 = g
            .nodes()
            .filter(|&v| degrees[v] == 0)
            .map(|v| rank[v])
            .sum();
        let base = (1.0 - alpha) * uniform + alpha * dangling * uniform;
        for v in g.nodes() {
            let inflow: f64 = g
                .neighbors(v)
                .iter()
                .map(|&u| rank[u] / degrees[u] as f64)
                .sum();
            next[v] = base + alpha * inflow;
        }
        delta = rank.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < tol {
            return Ok(CentralityScores::new(CentralityMethod::Pagerank, rank, params));
        }
    }
    Err(GraphError::NotConverged {
        iterations: max_iter,
        delta,
        last: rank,
    })
}

pub fn pagerank_default(g: &Graph) -> Result<CentralityScores, GraphError> {
    pagerank(
        g,
        DEFAULT_PAGERANK_ALPHA,
        DEFAULT_PAGERANK_TOL,
        DEFAULT_PAGERANK_MAX_ITER,
    )
}

/// `CI_l(v) = (k_v - 1) * sum over the exact-distance-l frontier of (k_u - 1)`.
///
/// Panics if `v` is out of range.
pub fn collective_influence(g: &Graph, v: NodeId, radius: usize) -> f64 {
    let kv = g.neighbors(v).len();
    if kv <= 1 || radius == 0 {
        return 0.0;
    }
    // BFS truncated at `radius`
    let mut seen = vec![false; g.node_count()];
    seen[v] = true;
    let mut frontier = vec![v];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &u in &frontier {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    next.push(w);
                }
            }
        }
        frontier = next;
        if frontier.is_empty() {
            break;
        }
    }
    let boundary: usize = frontier.iter().map(|&u| g.neighbors(u).len() - 1).sum();
    ((kv - 1) * boundary) as f64
}

pub fn collective_influence_all(g: &Graph, radius: usize) -> CentralityScores {
    let values = g
        .nodes()
        .into_par_iter()
        .map(|v| collective_influence(g, v, radius))
        .collect();
    CentralityScores::new(
        CentralityMethod::CollectiveInfluence,
        values,
        CentralityParams {
            radius,
            ..CentralityParams::default()
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap()
    }

    fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|i| (0, i))).unwrap()
    }

    #[test]
    fn betweenness_path_and_disconnected() {
        assert_eq!(betweenness(&path3()).values, vec![0.0, 1.0, 0.0]);
        let pair = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        assert_eq!(betweenness(&pair).values, vec![0.0; 4]);
    }

    #[test]
    fn betweenness_cycle4() {
        // oracle: each vertex sits on one of the two geodesics between its two
        // non-adjacent neighbours, 1/2 each
        let c4 = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        for v in betweenness(&c4).values {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn closeness_small() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(closeness(&tri, 0).unwrap(), 0.5);
        assert!((closeness(&path3(), 0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let iso = Graph::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(closeness(&iso, 2).unwrap(), 0.0);
        assert!(closeness(&iso, 3).is_err());
    }

    #[test]
    fn pagerank_symmetry_and_dominance() {
        let tri = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let pr = pagerank_default(&tri).unwrap();
        for v in pr.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-9);
        }
        let pr = pagerank_default(&star(4)).unwrap();
        for leaf in 1..5 {
            assert!(pr.values[0] > pr.values[leaf]);
        }
        assert!((pr.values.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pagerank_rejects_bad_alpha_and_reports_nonconvergence() {
        assert!(pagerank(&star(3), 1.0, 1e-9, 10).is_err());
        match pagerank(&star(3), 0.85, 0.0, 3) {
            Err(GraphError::NotConverged { iterations, last, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(last.len(), 4);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn collective_influence_small() {
        assert_eq!(collective_influence(&path3(), 1, 1), 0.0);
        let s = star(4);
        assert_eq!(collective_influence(&s, 0, 1), 0.0);
        assert_eq!(collective_influence(&s, 1, 1), 0.0);
        // path 0-1-2-3-4: CI_1(2) = (2-1)*((2-1)+(2-1)) = 2
        let p5 = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        assert_eq!(collective_influence(&p5, 2, 1), 2.0);
        assert_eq!(collective_influence(&p5, 2, 2), 0.0);
        assert_eq!(collective_influence(&p5, 1, 2), 1.0);
    }

    #[test]
    fn ranking_tie_break() {
        let s = CentralityScores::new(
            CentralityMethod::Degree,
            vec![1.0, 3.0, 3.0, 2.0],
            CentralityParams::default(),
        );
        assert_eq!(s.ranking(), vec![1, 2, 3, 0]);
        assert_eq!(s.argmax(), Some(1));
    }
}
