//! 2D layouts and the community-centroid position adjustment.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::CommunityAssignment;
use crate::graph::{Graph, NodeId};

pub const DEFAULT_FR_ITERATIONS: usize = 500;
pub const DEFAULT_ADJUST_D: f64 = 0.7;
pub const DEFAULT_ADJUST_TOP_N: usize = 5;

#[derive(Debug, Error, PartialEq)]
pub enum LayoutError {
    #[error("adjustment factor d must lie in (0, 1), got {0}")]
    InvalidFactor(f64),
    #[error("layout has {positions} positions but {nodes} nodes are required")]
    SizeMismatch { positions: usize, nodes: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    FruchtermanReingold,
    Circle,
    Grid,
}

impl std::str::FromStr for LayoutKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fr" | "fruchterman_reingold" | "spring" => Ok(LayoutKind::FruchtermanReingold),
            "circle" => Ok(LayoutKind::Circle),
            "grid" => Ok(LayoutKind::Grid),
            other => Err(format!("unknown layout `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutResult {
    pub positions: Vec<Point>,
    pub layout_kind: LayoutKind,
    pub rng_seed: u64,
}

impl LayoutResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }
}

/// Computes a layout of the requested kind. `iterations` only affects the
/// force-directed layout.
pub fn compute_layout(g: &Graph, kind: LayoutKind, rng_seed: u64, iterations: usize) -> LayoutResult {
    match kind {
        LayoutKind::FruchtermanReingold => fr_layout(g, rng_seed, iterations),
        LayoutKind::Circle => circle_layout(g),
        LayoutKind::Grid => grid_layout(g),
    }
}

/// Fruchterman-Reingold spring embedding.
///
/// Starts from seeded uniform positions in the unit square, runs
/// `iterations` cooling steps with optimal distance `1/sqrt(n)`, then
/// centres the result and scales it so the largest coordinate magnitude is 1.
pub fn fr_layout(g: &Graph, rng_seed: u64, iterations: usize) -> LayoutResult {
    let n = g.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut pos: Vec<Point> = (0..n)
        .map(|_| Point::new(rng.random::<f64>(), rng.random::<f64>()))
        .collect();
    if n > 1 {
        let k = (1.0 / n as f64).sqrt();
        let mut temperature = 0.1;
        let cooling = temperature / (iterations as f64 + 1.0);
        for _ in 0..iterations {
            let snapshot = &pos;
            let displacement: Vec<Point> = (0..n)
                .into_par_iter()
                .map(|i| fr_force(g, snapshot, i, k))
                .collect();
            let mut total_step = 0.0;
            for (p, d) in pos.iter_mut().zip(&displacement) {
                let len = d.x.hypot(d.y).max(0.01);
                let step = Point::new(d.x * temperature / len, d.y * temperature / len);
                p.x += step.x;
                p.y += step.y;
                total_step += step.x.hypot(step.y);
            }
            temperature -= cooling;
            if total_step / (n as f64) < 1e-5 {
                break;
            }
        }
    }
    normalize(&mut pos);
    LayoutResult {
        positions: pos,
        layout_kind: LayoutKind::FruchtermanReingold,
        rng_seed,
    }
}

fn fr_force(g: &Graph, pos: &[Point], i: NodeId, k: f64) -> Point {
    let neighbors = g.neighbors(i);
    let mut next_neighbor = 0;
    let mut force = Point::default();
    for (j, pj) in pos.iter().enumerate() {
        if j == i {
            continue;
        }
        let dx = pos[i].x - pj.x;
        let dy = pos[i].y - pj.y;
        let dist = dx.hypot(dy).max(0.01);
        while next_neighbor < neighbors.len() && neighbors[next_neighbor] < j {
            next_neighbor += 1;
        }
        let adjacent = next_neighbor < neighbors.len() && neighbors[next_neighbor] == j;
        let mut magnitude = k * k / (dist * dist);
        if adjacent {
            magnitude -= dist / k;
        }
        force.x += dx * magnitude;
        force.y += dy * magnitude;
    }
    force
}

fn normalize(pos: &mut [Point]) {
    if pos.is_empty() {
        return;
    }
    let n = pos.len() as f64;
    let cx = pos.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pos.iter().map(|p| p.y).sum::<f64>() / n;
    let mut extent: f64 = 0.0;
    for p in pos.iter_mut() {
        p.x -= cx;
        p.y -= cy;
        extent = extent.max(p.x.abs()).max(p.y.abs());
    }
    if extent > 0.0 {
        for p in pos.iter_mut() {
            p.x /= extent;
            p.y /= extent;
        }
    }
}

/// Node `i` at angle `2*pi*i/n` on the unit circle.
pub fn circle_layout(g: &Graph) -> LayoutResult {
    let n = g.node_count();
    let positions = (0..n)
        .map(|i| {
            let theta = 2.0 * PI * i as f64 / n as f64;
            Point::new(theta.cos(), theta.sin())
        })
        .collect();
    LayoutResult {
        positions,
        layout_kind: LayoutKind::Circle,
        rng_seed: 0,
    }
}

/// Row-major placement on an integer grid `ceil(sqrt(n))` columns wide.
pub fn grid_layout(g: &Graph) -> LayoutResult {
    let n = g.node_count();
    let width = grid_width(n);
    let positions = (0..n)
        .map(|i| Point::new((i % width) as f64, (i / width) as f64))
        .collect();
    LayoutResult {
        positions,
        layout_kind: LayoutKind::Grid,
        rng_seed: 0,
    }
}

pub fn grid_width(n: usize) -> usize {
    let mut w = (n as f64).sqrt() as usize;
    while w * w < n {
        w += 1;
    }
    w.max(1)
}

/// Arithmetic mean of member positions per community.
pub fn centroids(asg: &CommunityAssignment, layout: &LayoutResult) -> Result<Vec<Point>, LayoutError> {
    if layout.positions.len() != asg.node_count() {
        return Err(LayoutError::SizeMismatch {
            positions: layout.positions.len(),
            nodes: asg.node_count(),
        });
    }
    let k = asg.community_count();
    let mut sums = vec![Point::default(); k];
    let mut counts = vec![0usize; k];
    for (v, p) in layout.positions.iter().enumerate() {
        let c = asg.community_of(v);
        sums[c].x += p.x;
        sums[c].y += p.y;
        counts[c] += 1;
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| Point::new(s.x / c as f64, s.y / c as f64))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentParams {
    /// Contraction factor towards the community centroid, in (0, 1).
    pub d: f64,
    /// Highest-degree nodes per community that keep their position.
    pub top_n: usize,
}

impl Default for AdjustmentParams {
    fn default() -> Self {
        Self {
            d: DEFAULT_ADJUST_D,
            top_n: DEFAULT_ADJUST_TOP_N,
        }
    }
}

impl AdjustmentParams {
    pub fn new(d: f64, top_n: usize) -> Result<Self, LayoutError> {
        let params = Self { d, top_n };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), LayoutError> {
        if self.d > 0.0 && self.d < 1.0 {
            Ok(())
        } else {
            Err(LayoutError::InvalidFactor(self.d))
        }
    }
}

/// Per community, the `top_n` highest-degree nodes (lower id on ties).
pub fn top_nodes_per_community(g: &Graph, asg: &CommunityAssignment, top_n: usize) -> Vec<bool> {
    let mut keep = vec![false; g.node_count()];
    for mut members in asg.members() {
        members.sort_by(|&a, &b| {
            g.neighbors(b)
                .len()
                .cmp(&g.neighbors(a).len())
                .then(a.cmp(&b))
        });
        for &v in members.iter().take(top_n) {
            keep[v] = true;
        }
    }
    keep
}

/// Pulls every non-top node towards its community centroid:
/// `p' = p*d + c*(1-d)`. Centroids are taken from the input layout.
pub fn adjust_positions(
    g: &Graph,
    layout: &LayoutResult,
    asg: &CommunityAssignment,
    params: &AdjustmentParams,
) -> Result<LayoutResult, LayoutError> {
    params.validate()?;
    if g.node_count() != asg.node_count() {
        return Err(LayoutError::SizeMismatch {
            positions: asg.node_count(),
            nodes: g.node_count(),
        });
    }
    let centres = centroids(asg, layout)?;
    let fixed = top_nodes_per_community(g, asg, params.top_n);
    let d = params.d;
    let positions = layout
        .positions
        .iter()
        .enumerate()
        .map(|(v, &p)| {
            if fixed[v] {
                p
            } else {
                let c = centres[asg.community_of(v)];
                Point::new(p.x * d + c.x * (1.0 - d), p.y * d + c.y * (1.0 - d))
            }
        })
        .collect();
    Ok(LayoutResult {
        positions,
        ..layout.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty(n: usize) -> Graph {
        Graph::from_edges(n, []).unwrap()
    }

    #[test]
    fn circle_closed_form() {
        let l = circle_layout(&empty(4));
        let expected = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for (p, (x, y)) in l.positions.iter().zip(expected) {
            assert!((p.x - x).abs() < 1e-12 && (p.y - y).abs() < 1e-12);
        }
        assert_eq!(circle_layout(&empty(1)).positions, vec![Point::new(1.0, 0.0)]);
        for p in circle_layout(&empty(17)).positions {
            assert!((p.x.hypot(p.y) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_placement() {
        let l = grid_layout(&empty(4));
        assert_eq!(
            l.positions,
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0)
            ]
        );
        assert_eq!(grid_width(5), 3);
        assert_eq!(grid_width(9), 3);
        assert_eq!(grid_width(10), 4);
        let many = grid_layout(&empty(23)).positions;
        for i in 0..many.len() {
            for j in i + 1..many.len() {
                assert_ne!(many[i], many[j]);
            }
        }
    }

    #[test]
    fn fr_single_edge_and_determinism() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let l = fr_layout(&g, 3, 100);
        assert!(l.positions.iter().all(|p| p.x.is_finite() && p.y.is_finite()));
        assert_ne!(l.positions[0], l.positions[1]);
        let a = fr_layout(&g, 11, 50);
        let b = fr_layout(&g, 11, 50);
        assert_eq!(a, b);
    }

    #[test]
    fn fr_triangle_is_equilateral() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let p = fr_layout(&g, 5, DEFAULT_FR_ITERATIONS).positions;
        let d = [p[0].distance(p[1]), p[1].distance(p[2]), p[0].distance(p[2])];
        let mean = d.iter().sum::<f64>() / 3.0;
        for x in d {
            assert!((x - mean).abs() / mean < 0.05, "{d:?}");
        }
    }

    #[test]
    fn centroid_mean_and_translation() {
        let asg = CommunityAssignment::from_membership(vec![0, 0, 1]);
        let layout = LayoutResult {
            positions: vec![Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(5.0, 7.0)],
            layout_kind: LayoutKind::Grid,
            rng_seed: 0,
        };
        let c = centroids(&asg, &layout).unwrap();
        assert_eq!(c, vec![Point::new(1.0, 0.0), Point::new(5.0, 7.0)]);
        let shifted = LayoutResult {
            positions: layout
                .positions
                .iter()
                .map(|p| Point::new(p.x + 1.5, p.y - 2.0))
                .collect(),
            ..layout.clone()
        };
        let c2 = centroids(&asg, &shifted).unwrap();
        for (a, b) in c.iter().zip(&c2) {
            assert!((b.x - a.x - 1.5).abs() < 1e-12 && (b.y - a.y + 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adjustment_arithmetic() {
        // node 2 at (2,0) is pulled halfway to the centroid (0,0)
        let g = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let asg = CommunityAssignment::single(3);
        let layout = LayoutResult {
            positions: vec![Point::new(0.0, 0.0), Point::new(-2.0, 0.0), Point::new(2.0, 0.0)],
            layout_kind: LayoutKind::Grid,
            rng_seed: 0,
        };
        let out = adjust_positions(&g, &layout, &asg, &AdjustmentParams::new(0.5, 1).unwrap()).unwrap();
        assert_eq!(out.positions[0], Point::new(0.0, 0.0));
        assert_eq!(out.positions[1], Point::new(-1.0, 0.0));
        assert_eq!(out.positions[2], Point::new(1.0, 0.0));
        assert!(AdjustmentParams::new(1.0, 1).is_err());
        assert!(AdjustmentParams::new(0.0, 1).is_err());
    }

    #[test]
    fn adjustment_near_one_is_near_identity() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let asg = CommunityAssignment::single(4);
        let layout = fr_layout(&g, 1, 50);
        let out = adjust_positions(&g, &layout, &asg, &AdjustmentParams::new(0.999, 0).unwrap()).unwrap();
        let c = centroids(&asg, &layout).unwrap()[0];
        for (a, b) in layout.positions.iter().zip(&out.positions) {
            assert!(a.distance(*b) <= 0.002 * a.distance(c) + 1e-15);
        }
    }
}
