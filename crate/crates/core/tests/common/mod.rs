#![allow(dead_code)]

use graphsight::graph::Graph;
use proptest::prelude::*;

/// Graph on `1..=max_n` nodes where each possible edge is present or not.
pub fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
            Graph::from_edges(n, all_pairs(n).into_iter().zip(bits).filter(|(_, b)| *b).map(|(e, _)| e)).unwrap()
        })
    })
}

/// Same, but with at most `max_m` edges.
pub fn arb_sparse_graph(max_n: usize, max_m: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(move |n| {
        let pairs = all_pairs(n);
        let cap = max_m.min(pairs.len());
        proptest::sample::subsequence(pairs, 0..=cap).prop_map(move |edges| Graph::from_edges(n, edges).unwrap())
    })
}

pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            out.push((u, v));
        }
    }
    out
}

pub fn adjacency_matrix(g: &Graph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// All-pairs hop distances by Floyd-Warshall.
pub fn floyd_warshall(g: &Graph) -> Vec<Vec<Option<usize>>> {
    let n = g.node_count();
    let a = adjacency_matrix(g);
    let mut d = vec![vec![None; n]; n];
    for u in 0..n {
        d[u][u] = Some(0);
        for v in 0..n {
            if a[u][v] {
                d[u][v] = Some(1);
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if let (Some(x), Some(y)) = (d[i][k], d[k][j]) {
                    if d[i][j].is_none_or(|z| x + y < z) {
                        d[i][j] = Some(x + y);
                    }
                }
            }
        }
    }
    d
}

/// Component sizes by union-find, sorted descending.
pub fn union_find_sizes(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Vec<usize> {
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut x = x;
        while p[x] != r {
            let next = p[x];
            p[x] = r;
            x = next;
        }
        r
    }
    let mut parent: Vec<usize> = (0..n).collect();
    for (u, v) in edges {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        if a != b {
            parent[a] = b;
        }
    }
    let mut sizes = vec![0; n];
    for v in 0..n {
        let r = find(&mut parent, v);
        sizes[r] += 1;
    }
    let mut sizes: Vec<usize> = sizes.into_iter().filter(|&s| s > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

/// Number of shortest s-t paths passing through `via` (or all of them when
/// `via` is None), by enumerating every simple path of length d(s, t).
pub fn count_shortest_paths(g: &Graph, dist: &[Vec<Option<usize>>], s: usize, t: usize, via: Option<usize>) -> u64 {
    fn walk(g: &Graph, at: usize, t: usize, left: usize, via: Option<usize>, hit: bool, seen: &mut Vec<bool>) -> u64 {
        let hit = hit || via == Some(at);
        if left == 0 {
            return u64::from(at == t && (via.is_none() || hit));
        }
        let mut total = 0;
        for &w in g.neighbors(at) {
            if !seen[w] {
                seen[w] = true;
                total += walk(g, w, t, left - 1, via, hit, seen);
                seen[w] = false;
            }
        }
        total
    }
    let Some(d) = dist[s][t] else { return 0 };
    let mut seen = vec![false; g.node_count()];
    seen[s] = true;
    walk(g, s, t, d, via, false, &mut seen)
}

/// Betweenness from its definition over unordered pairs.
pub fn brute_betweenness(g: &Graph) -> Vec<f64> {
    let n = g.node_count();
    let dist = floyd_warshall(g);
    let mut out = vec![0.0; n];
    for (s, t) in all_pairs(n) {
        let total = count_shortest_paths(g, &dist, s, t, None);
        if total == 0 {
            continue;
        }
        for (v, b) in out.iter_mut().enumerate() {
            if v != s && v != t {
                *b += count_shortest_paths(g, &dist, s, t, Some(v)) as f64 / total as f64;
            }
        }
    }
    out
}

/// Exact IC expected spread by enumerating all 2^m live-edge graphs.
pub fn live_edge_spread(g: &Graph, seeds: &[usize], p: f64) -> f64 {
    let edges: Vec<(usize, usize)> = g.edges().collect();
    let m = edges.len();
    assert!(m <= 20, "live-edge enumeration is exponential in the edge count");
    let mut total = 0.0;
    for mask in 0u32..(1 << m) {
        let live = (0..m).filter(|i| mask >> i & 1 == 1);
        let k = live.clone().count();
        let weight = p.powi(k as i32) * (1.0 - p).powi((m - k) as i32);
        if weight == 0.0 {
            continue;
        }
        let sub = Graph::from_edges(g.node_count(), live.map(|i| edges[i])).unwrap();
        let dist = floyd_warshall(&sub);
        let reached = (0..g.node_count())
            .filter(|&v| seeds.iter().any(|&s| dist[s][v].is_some()))
            .count();
        total += weight * reached as f64;
    }
    total
}

/// Exact LT expected spread with uniform thresholds and weights 1/deg:
/// equivalent to every non-seed node keeping exactly one incident edge
/// chosen uniformly, and counting nodes whose chain reaches a seed.
pub fn live_edge_lt_spread(g: &Graph, seeds: &[usize]) -> f64 {
    let n = g.node_count();
    let free: Vec<usize> = g.nodes().filter(|v| !seeds.contains(v) && !g.neighbors(*v).is_empty()).collect();
    let mut choice = vec![0usize; free.len()];
    let mut total = 0.0;
    loop {
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut weight = 1.0;
        for (i, &v) in free.iter().enumerate() {
            parent[v] = Some(g.neighbors(v)[choice[i]]);
            weight /= g.neighbors(v).len() as f64;
        }
        let reached = (0..n)
            .filter(|&v| {
                let mut at = v;
                for _ in 0..=n {
                    if seeds.contains(&at) {
                        return true;
                    }
                    match parent[at] {
                        Some(p) => at = p,
                        None => return false,
                    }
                }
                false
            })
            .count();
        total += weight * reached as f64;
        // odometer over the per-node choices
        let mut i = 0;
        loop {
            if i == free.len() {
                return total;
            }
            choice[i] += 1;
            if choice[i] < g.neighbors(free[i]).len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}
