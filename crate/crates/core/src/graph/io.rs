use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{connected_components, Graph, GraphError, NodeId, NodeLabel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LoadOptions {
    /// Keep only the largest connected component.
    pub keep_lcc: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self { keep_lcc: true }
    }
}

/// Internal id `i` corresponds to `internal_to_original[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdMap {
    pub internal_to_original: Vec<NodeLabel>,
}

impl IdMap {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("id map serializes")
    }
}

/// Reads a whitespace-separated edge list. Lines starting with `#` or `%`
/// are comments. Nodes are relabeled `0..n` in ascending original-id order.
pub fn load_edge_list<R: Read>(reader: R, opts: LoadOptions) -> Result<Graph, GraphError> {
    let mut raw_edges: Vec<(NodeLabel, NodeLabel)> = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
            continue;
        }
        let malformed = || GraphError::Parse {
            line: idx + 1,
            content: trimmed.to_string(),
        };
        let mut tokens = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(malformed());
        };
        let a: NodeLabel = a.parse().map_err(|_| malformed())?;
        let b: NodeLabel = b.parse().map_err(|_| malformed())?;
        raw_edges.push((a, b));
    }
    if raw_edges.is_empty() {
        return Err(GraphError::Empty);
    }

    let labels: Vec<NodeLabel> = raw_edges
        .iter()
        .flat_map(|&(a, b)| [a, b])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |l: NodeLabel| labels.binary_search(&l).expect("label collected above");
    let edges: Vec<(NodeId, NodeId)> = raw_edges
        .iter()
        .map(|&(a, b)| (index(a), index(b)))
        .collect();
    let graph = Graph::with_labels(labels, edges)?;
    if !opts.keep_lcc {
        return Ok(graph);
    }

    let components = connected_components(&graph);
    let Some(largest) = components.largest() else {
        return Err(GraphError::Empty);
    };
    let keep: Vec<bool> = graph
        .nodes()
        .map(|v| components.membership[v] == largest)
        .collect();
    Ok(graph.induced(&keep))
}

pub fn parse_edge_list(text: &str, opts: LoadOptions) -> Result<Graph, GraphError> {
    load_edge_list(text.as_bytes(), opts)
}

pub fn read_edge_list_file(path: impl AsRef<Path>, opts: LoadOptions) -> Result<Graph, GraphError> {
    load_edge_list(File::open(path)?, opts)
}
