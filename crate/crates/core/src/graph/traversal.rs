use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Graph, GraphError, NodeId};

/// Hop distance between two nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distance {
    Hops(usize),
    Unreachable,
}

impl Distance {
    pub fn hops(self) -> Option<usize> {
        match self {
            Distance::Hops(h) => Some(h),
            Distance::Unreachable => None,
        }
    }
}

/// BFS hop distances from `source`; `None` for unreachable nodes.
pub fn bfs_distances(g: &Graph, source: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    let mut queue = VecDeque::new();
    dist[source] = Some(0);
    queue.push_back(source);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap_or_default();
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

pub fn shortest_distance(g: &Graph, u: NodeId, v: NodeId) -> Result<Distance, GraphError> {
    g.check_node(u)?;
    g.check_node(v)?;
    Ok(match bfs_distances(g, u)[v] {
        Some(d) => Distance::Hops(d),
        None => Distance::Unreachable,
    })
}

/// Partition of the nodes by reachability.
///
/// Component indices follow the smallest node id they contain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Components {
    pub membership: Vec<usize>,
    pub sizes: Vec<usize>,
}

impl Components {
    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    /// Index of the largest component, lowest index on ties.
    pub fn largest(&self) -> Option<usize> {
        let max = *self.sizes.iter().max()?;
        self.sizes.iter().position(|&s| s == max)
    }

    pub fn largest_size(&self) -> usize {
        self.sizes.iter().copied().max().unwrap_or(0)
    }
}

pub fn connected_components(g: &Graph) -> Components {
    let mut membership = vec![usize::MAX; g.node_count()];
    let mut sizes = Vec::new();
    let mut stack = Vec::new();
    for start in g.nodes() {
        if membership[start] != usize::MAX {
            continue;
        }
        let id = sizes.len();
        let mut size = 0;
        membership[start] = id;
        stack.push(start);
        while let Some(u) = stack.pop() {
            size += 1;
            for &w in g.neighbors(u) {
                if membership[w] == usize::MAX {
                    membership[w] = id;
                    stack.push(w);
                }
            }
        }
        sizes.push(size);
    }
    Components { membership, sizes }
}

pub fn largest_component_size(g: &Graph) -> usize {
    connected_components(g).largest_size()
}

/// A simple graph is acyclic exactly when it is a forest, i.e. `|E| = |V| - c`.
pub fn has_cycle(g: &Graph) -> bool {
    g.edge_count() + connected_components(g).count() > g.node_count()
}
