//! Bundled small networks.

use crate::graph::{parse_edge_list, Graph, LoadOptions};

const KARATE: &str = include_str!("../data/networks/karate.txt");
const LESMIS: &str = include_str!("../data/networks/lesmis.txt");

/// Names accepted by [`builtin`].
pub const BUILTIN: [&str; 2] = ["karate", "lesmis"];

/// Zachary's karate club: 34 members, 78 ties, labels 0..=33.
pub fn karate() -> Graph {
    parse_edge_list(KARATE, LoadOptions::default()).expect("bundled karate edge list")
}

/// Les Miserables co-appearances: 77 characters, 254 edges.
pub fn lesmis() -> Graph {
    parse_edge_list(LESMIS, LoadOptions::default()).expect("bundled lesmis edge list")
}

pub fn builtin(name: &str) -> Option<Graph> {
    match name.to_ascii_lowercase().as_str() {
        "karate" => Some(karate()),
        "lesmis" => Some(lesmis()),
        _ => None,
    }
}
