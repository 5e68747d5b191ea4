//! Simple undirected graphs with contiguous node ids and the structural
//! metrics used as selection baselines and task ground truth.

mod centrality;
mod io;
mod traversal;

pub use centrality::{
    betweenness, closeness, closeness_all, collective_influence, collective_influence_all,
    degree_centrality, pagerank, pagerank_default, CentralityMethod, CentralityParams,
    CentralityScores, DEFAULT_CI_RADIUS, DEFAULT_PAGERANK_ALPHA, DEFAULT_PAGERANK_MAX_ITER,
    DEFAULT_PAGERANK_TOL,
};
pub use io::{load_edge_list, parse_edge_list, read_edge_list_file, IdMap, LoadOptions};
pub use traversal::{
    bfs_distances, connected_components, has_cycle, largest_component_size, shortest_distance,
    Components, Distance,
};

use std::collections::HashMap;

use thiserror::Error;

/// Internal node index, always in `0..node_count`.
pub type NodeId = usize;

/// Identifier a node carried in its source file (or the one shown on a
/// rendered image). Stable across node removal.
pub type NodeLabel = u64;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: malformed edge `{content}`")]
    Parse { line: usize, content: String },
    #[error("graph has no edges")]
    Empty,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("pagerank did not converge after {iterations} iterations (last delta {delta:e})")]
    NotConverged {
        iterations: usize,
        delta: f64,
        last: Vec<f64>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Immutable simple undirected graph.
///
/// Adjacency lists are sorted and symmetric; there are no self-loops or
/// parallel edges. Every node carries a [`NodeLabel`] so that ids shown to a
/// selector can be mapped back after relabeling or node removal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<NodeId>>,
    edge_count: usize,
    labels: Vec<NodeLabel>,
    label_index: HashMap<NodeLabel, NodeId>,
}

impl Graph {
    /// Builds a graph on `node_count` nodes labeled `0..node_count`.
    ///
    /// Self-loops are dropped and duplicate edges collapsed.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let labels = (0..node_count as NodeLabel).collect();
        Self::with_labels(labels, edges)
    }

    /// Builds a graph whose node `i` carries `labels[i]`. Labels must be unique.
    pub fn with_labels<I>(labels: Vec<NodeLabel>, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let n = labels.len();
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n {
                return Err(GraphError::UnknownNode(u));
            }
            if v >= n {
                return Err(GraphError::UnknownNode(v));
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        let mut label_index = HashMap::with_capacity(n);
        for (i, &label) in labels.iter().enumerate() {
            if label_index.insert(label, i).is_some() {
                return Err(GraphError::InvalidParameter(format!(
                    "duplicate node label {label}"
                )));
            }
        }
        Ok(Self {
            adjacency,
            edge_count: edge_count / 2,
            labels,
            label_index,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.node_count()
    }

    /// Sorted neighbor list. Panics if `v` is out of range.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    /// Degree of `v`, or a domain error for an unknown node.
    pub fn degree(&self, v: NodeId) -> Result<usize, GraphError> {
        self.adjacency
            .get(v)
            .map(Vec::len)
            .ok_or(GraphError::UnknownNode(v))
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency.iter().map(Vec::len).collect()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency
            .get(u)
            .is_some_and(|list| list.binary_search(&v).is_ok())
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            list.iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn label(&self, v: NodeId) -> NodeLabel {
        self.labels[v]
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    /// Internal id of the node carrying `label`, if any.
    pub fn node_of(&self, label: NodeLabel) -> Option<NodeId> {
        self.label_index.get(&label).copied()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    pub fn check_node(&self, v: NodeId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::UnknownNode(v))
        }
    }

    /// The subgraph induced by `keep`, relabeled contiguously in ascending
    /// id order. Node labels are carried over.
    pub fn induced(&self, keep: &[bool]) -> Graph {
        assert_eq!(keep.len(), self.node_count());
        let mut remap = vec![usize::MAX; self.node_count()];
        let mut labels = Vec::new();
        for v in self.nodes().filter(|&v| keep[v]) {
            remap[v] = labels.len();
            labels.push(self.labels[v]);
        }
        let mut adjacency = vec![Vec::new(); labels.len()];
        let mut edge_count = 0;
        for v in self.nodes().filter(|&v| keep[v]) {
            let list = &mut adjacency[remap[v]];
            list.extend(
                self.adjacency[v]
                    .iter()
                    .filter(|&&u| keep[u])
                    .map(|&u| remap[u]),
            );
            edge_count += list.len();
        }
        let label_index = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Graph {
            adjacency,
            edge_count: edge_count / 2,
            labels,
            label_index,
        }
    }

    /// Copy of the graph with `v` removed; remaining nodes keep their labels
    /// and relative order.
    pub fn without_node(&self, v: NodeId) -> Result<Graph, GraphError> {
        self.check_node(v)?;
        let mut keep = vec![true; self.node_count()];
        keep[v] = false;
        Ok(self.induced(&keep))
    }

    pub fn id_map(&self) -> IdMap {
        IdMap {
            internal_to_original: self.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    #[test]
    fn degree_of_triangle_and_star() {
        let g = triangle();
        for v in g.nodes() {
            assert_eq!(g.degree(v).unwrap(), 2);
        }
        let star = Graph::from_edges(6, (1..6).map(|i| (0, i))).unwrap();
        assert_eq!(star.degree(0).unwrap(), 5);
        assert!(matches!(star.degree(6), Err(GraphError::UnknownNode(6))));
    }

    #[test]
    fn dedup_and_self_loops() {
        let g = Graph::from_edges(3, [(0, 1), (1, 0), (0, 1), (2, 2)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(2).unwrap(), 0);
    }

    #[test]
    fn removal_keeps_labels() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let r = g.without_node(1).unwrap();
        assert_eq!(r.node_count(), 3);
        assert_eq!(r.labels(), &[0, 2, 3]);
        assert_eq!(r.edge_count(), 1);
        assert_eq!(r.node_of(3), Some(2));
        assert_eq!(r.node_of(1), None);
        assert!(r.has_edge(1, 2));
    }

    #[test]
    fn handshake() {
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (0, 2)]).unwrap();
        assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
    }
}
