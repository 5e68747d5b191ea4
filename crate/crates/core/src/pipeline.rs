//! Graph to image: detect communities, merge them down, lay out, pull members
//! towards their community, draw.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::community::{detect_communities, merge_communities, CommunityAssignment, CommunityError};
use crate::graph::Graph;
use crate::layout::{
    adjust_positions, compute_layout, AdjustmentParams, LayoutError, LayoutKind, LayoutResult,
    DEFAULT_FR_ITERATIONS,
};
use crate::render::{rasterize, render, ImageArtifact, LabelPolicy, RenderError, RenderSpec};

/// Networks below this size get every node labeled.
pub const FULL_LABEL_MAX_NODES: usize = 150;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Community(#[from] CommunityError),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error(transparent)]
    Render(#[from] RenderError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VizParams {
    pub layout: LayoutKind,
    pub layout_iterations: usize,
    /// Merge detected communities down to this many, when more were found.
    pub target_communities: Option<usize>,
    /// `None` skips the centroid pull.
    pub adjust: Option<AdjustmentParams>,
    pub render: RenderSpec,
    /// Also produce a PNG at this scale.
    pub raster_scale: Option<f64>,
    pub rng_seed: u64,
}

impl VizParams {
    /// Defaults sized to the network: full labels below 150 nodes, partial above.
    pub fn for_graph(g: &Graph) -> Self {
        let render = if g.node_count() < FULL_LABEL_MAX_NODES {
            RenderSpec::full_label()
        } else {
            RenderSpec::partial_label()
        };
        Self {
            layout: LayoutKind::FruchtermanReingold,
            layout_iterations: DEFAULT_FR_ITERATIONS,
            target_communities: None,
            adjust: Some(AdjustmentParams::default()),
            render,
            raster_scale: Some(1.0),
            rng_seed: 0,
        }
    }

    pub fn with_label_policy(mut self, policy: LabelPolicy) -> Self {
        self.render.label_policy = policy;
        self
    }
}

#[derive(Debug, Clone)]
pub struct VizOutput {
    pub communities: CommunityAssignment,
    pub detected_communities: usize,
    pub layout: LayoutResult,
    pub image: ImageArtifact,
}

pub fn visualize(g: &Graph, params: &VizParams) -> Result<VizOutput, PipelineError> {
    let detected = detect_communities(g, params.rng_seed);
    let detected_communities = detected.community_count();
    let communities = match params.target_communities {
        Some(t) if t < detected_communities => merge_communities(g, &detected, t)?,
        _ => detected,
    };
    let mut layout = compute_layout(g, params.layout, params.rng_seed, params.layout_iterations);
    if let Some(adjust) = &params.adjust {
        layout = adjust_positions(g, &layout, &communities, adjust)?;
    }
    let mut image = render(g, &layout, Some(&communities), &params.render)?;
    if let Some(scale) = params.raster_scale {
        image = rasterize(&image, scale)?;
    }
    Ok(VizOutput {
        communities,
        detected_communities,
        layout,
        image,
    })
}
