//! Community detection (greedy modularity agglomeration) and merging of
//! small communities into their most-connected neighbours.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, NodeId, NodeLabel};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CommunityError {
    #[error("target {target} outside 1..={count}")]
    InvalidTarget { target: usize, count: usize },
    #[error("assignment covers {assigned} nodes but graph has {nodes}")]
    SizeMismatch { assigned: usize, nodes: usize },
}

/// Node to community mapping with contiguous, non-empty communities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommunityAssignment {
    membership: Vec<usize>,
    community_count: usize,
}

impl CommunityAssignment {
    /// Compacts arbitrary labels to `0..k`, preserving their relative order.
    pub fn from_membership(labels: Vec<usize>) -> Self {
        let mut distinct = labels.clone();
        distinct.sort_unstable();
        distinct.dedup();
        let membership = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present"))
            .collect();
        Self {
            membership,
            community_count: distinct.len(),
        }
    }

    /// Every node in community 0.
    pub fn single(node_count: usize) -> Self {
        Self::from_membership(vec![0; node_count])
    }

    pub fn membership(&self) -> &[usize] {
        &self.membership
    }

    pub fn community_of(&self, v: NodeId) -> usize {
        self.membership[v]
    }

    pub fn community_count(&self) -> usize {
        self.community_count
    }

    pub fn node_count(&self) -> usize {
        self.membership.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.community_count];
        for &c in &self.membership {
            sizes[c] += 1;
        }
        sizes
    }

    /// Members of each community in ascending node order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut members = vec![Vec::new(); self.community_count];
        for (v, &c) in self.membership.iter().enumerate() {
            members[c].push(v);
        }
        members
    }

    /// `{original node id: community index}`.
    pub fn labeled_map(&self, g: &Graph) -> BTreeMap<NodeLabel, usize> {
        self.membership
            .iter()
            .enumerate()
            .map(|(v, &c)| (g.label(v), c))
            .collect()
    }

    pub fn to_json(&self, g: &Graph) -> String {
        serde_json::to_string_pretty(&self.labeled_map(g)).expect("map serializes")
    }
}

/// Newman modularity of a partition of an unweighted graph.
pub fn modularity(g: &Graph, asg: &CommunityAssignment) -> f64 {
    let m = g.edge_count() as f64;
    if m == 0.0 {
        return 0.0;
    }
    let k = asg.community_count();
    let mut internal = vec![0.0; k];
    let mut degree_sum = vec![0.0; k];
    for v in g.nodes() {
        degree_sum[asg.community_of(v)] += g.neighbors(v).len() as f64;
    }
    for (u, v) in g.edges() {
        if asg.community_of(u) == asg.community_of(v) {
            internal[asg.community_of(u)] += 1.0;
        }
    }
    (0..k)
        .map(|c| internal[c] / m - (degree_sum[c] / (2.0 * m)).powi(2))
        .sum()
}

/// A pluggable community detection backend.
pub trait CommunityDetector {
    fn detect(&self, g: &Graph) -> CommunityAssignment;
}

/// Agglomerative greedy modularity maximization (Clauset-Newman-Moore).
///
/// Starting from singletons, repeatedly merges the pair of adjacent
/// communities with the largest modularity gain until no merge has a
/// positive gain. Equal gains are resolved by a seeded priority order, so
/// the result is a pure function of the graph and the seed.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyModularity {
    pub seed: u64,
}

#[derive(Debug, PartialEq)]
struct Candidate {
    gain: f64,
    key: (usize, usize),
    a: usize,
    b: usize,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.key.cmp(&self.key))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl CommunityDetector for GreedyModularity {
    fn detect(&self, g: &Graph) -> CommunityAssignment {
        let n = g.node_count();
        let m = g.edge_count() as f64;
        if m == 0.0 {
            return CommunityAssignment::from_membership((0..n).collect());
        }
        let mut priority: Vec<usize> = (0..n).collect();
        priority.shuffle(&mut ChaCha8Rng::seed_from_u64(self.seed));

        let inv_2m = 1.0 / (2.0 * m);
        let mut share: Vec<f64> = g.nodes().map(|v| g.neighbors(v).len() as f64 * inv_2m).collect();
        let mut gains: Vec<BTreeMap<usize, f64>> = g
            .nodes()
            .map(|v| {
                g.neighbors(v)
                    .iter()
                    .map(|&w| (w, 2.0 * (inv_2m - share[v] * share[w])))
                    .collect()
            })
            .collect();
        let mut members: Vec<Vec<NodeId>> = g.nodes().map(|v| vec![v]).collect();
        let mut alive = vec![true; n];

        let candidate = |a: usize, b: usize, gain: f64, priority: &[usize]| {
            let (pa, pb) = (priority[a], priority[b]);
            Candidate {
                gain,
                key: (pa.min(pb), pa.max(pb)),
                a,
                b,
            }
        };
        let mut heap = BinaryHeap::new();
        for (u, v) in g.edges() {
            heap.push(candidate(u, v, gains[u][&v], &priority));
        }

        while let Some(top) = heap.pop() {
            let (a, b) = (top.a, top.b);
            if !alive[a] || !alive[b] {
                continue;
            }
            match gains[a].get(&b) {
                Some(&current) if current.to_bits() == top.gain.to_bits() => {}
                _ => continue,
            }
            if top.gain <= 0.0 {
                break;
            }
            // keep the community with the smaller priority rank
            let (keep, gone) = if priority[a] < priority[b] { (a, b) } else { (b, a) };
            let from_gone = std::mem::take(&mut gains[gone]);
            let from_keep = std::mem::take(&mut gains[keep]);
            let mut merged = BTreeMap::new();
            for (&k, &g_gone) in &from_gone {
                if k == keep {
                    continue;
                }
                let value = match from_keep.get(&k) {
                    Some(&g_keep) => g_gone + g_keep,
                    None => g_gone - 2.0 * share[keep] * share[k],
                };
                merged.insert(k, value);
            }
            for (&k, &g_keep) in &from_keep {
                if k == gone || merged.contains_key(&k) {
                    continue;
                }
                merged.insert(k, g_keep - 2.0 * share[gone] * share[k]);
            }
            for (&k, &value) in &merged {
                gains[k].remove(&gone);
                gains[k].insert(keep, value);
                heap.push(candidate(keep, k, value, &priority));
            }
            gains[keep] = merged;
            share[keep] += share[gone];
            share[gone] = 0.0;
            alive[gone] = false;
            let moved = std::mem::take(&mut members[gone]);
            members[keep].extend(moved);
        }

        // community index order follows each community's smallest node id
        let mut labels = vec![0; n];
        for (list, _) in members.iter().zip(&alive).filter(|(_, &a)| a) {
            let root = *list.iter().min().expect("alive communities are non-empty");
            for &v in list {
                labels[v] = root;
            }
        }
        CommunityAssignment::from_membership(labels)
    }
}

pub fn detect_communities(g: &Graph, rng_seed: u64) -> CommunityAssignment {
    GreedyModularity { seed: rng_seed }.detect(g)
}

/// Repeatedly folds the smallest community into the neighbouring community
/// it shares the most edges with, until `target` communities remain.
///
/// Ties: the smallest community is the lowest index among equal sizes; among
/// equally connected neighbours the larger, then lower-indexed, wins. A
/// smallest community with no outside edges joins the smallest other
/// community.
pub fn merge_communities(
    g: &Graph,
    asg: &CommunityAssignment,
    target: usize,
) -> Result<CommunityAssignment, CommunityError> {
    if asg.node_count() != g.node_count() {
        return Err(CommunityError::SizeMismatch {
            assigned: asg.node_count(),
            nodes: g.node_count(),
        });
    }
    if target == 0 || target > asg.community_count() {
        return Err(CommunityError::InvalidTarget {
            target,
            count: asg.community_count(),
        });
    }
    let mut membership = asg.membership.clone();
    let mut count = asg.community_count();
    while count > target {
        let mut sizes = vec![0usize; count];
        for &c in &membership {
            sizes[c] += 1;
        }
        let smallest = (0..count)
            .min_by_key(|&c| (sizes[c], c))
            .expect("count > target >= 1");
        let mut links = vec![0usize; count];
        for (u, v) in g.edges() {
            let (cu, cv) = (membership[u], membership[v]);
            if cu == smallest && cv != smallest {
                links[cv] += 1;
            } else if cv == smallest && cu != smallest {
                links[cu] += 1;
            }
        }
        let others = (0..count).filter(|&c| c != smallest);
        let closest = if links.iter().any(|&l| l > 0) {
            others
                .max_by(|&a, &b| {
                    links[a]
                        .cmp(&links[b])
                        .then(sizes[a].cmp(&sizes[b]))
                        .then(b.cmp(&a))
                })
                .expect("at least two communities")
        } else {
            others
                .min_by_key(|&c| (sizes[c], c))
                .expect("at least two communities")
        };
        for c in &mut membership {
            if *c == smallest {
                *c = closest;
            }
            if *c > smallest {
                *c -= 1;
            }
        }
        count -= 1;
    }
    Ok(CommunityAssignment {
        membership,
        community_count: count,
    })
}
