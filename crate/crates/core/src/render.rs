//! Node-link drawings with community colours and full or partial id labels,
//! as SVG with optional PNG rasterization.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, LazyLock};

use resvg::tiny_skia;
use resvg::usvg;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::community::CommunityAssignment;
use crate::graph::{Graph, NodeId};
use crate::layout::{LayoutResult, Point};

pub const MIN_CANVAS_PX: u32 = 256;
pub const MIN_PALETTE: usize = 12;
const MARGIN_FRACTION: f64 = 0.05;
const MIN_LABEL_CONTRAST: f64 = 3.0;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("invalid render spec: {0}")]
    InvalidSpec(String),
    #[error("layout has {positions} positions for {nodes} nodes")]
    LayoutMismatch { positions: usize, nodes: usize },
    #[error("malformed svg: {0}")]
    Svg(String),
    #[error("png encoding failed: {0}")]
    Png(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 24-bit colour, serialized as `#rrggbb`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rgb(pub u8, pub u8, pub u8);

impl Rgb {
    pub const BLACK: Rgb = Rgb(0, 0, 0);
    pub const WHITE: Rgb = Rgb(255, 255, 255);

    pub fn hex(self) -> String {
        format!("#{:02x}{:02x}{:02x}", self.0, self.1, self.2)
    }

    /// WCAG relative luminance.
    pub fn luminance(self) -> f64 {
        let lin = |c: u8| {
            let c = c as f64 / 255.0;
            if c <= 0.03928 {
                c / 12.92
            } else {
                ((c + 0.055) / 1.055).powf(2.4)
            }
        };
        0.2126 * lin(self.0) + 0.7152 * lin(self.1) + 0.0722 * lin(self.2)
    }

    pub fn contrast(self, other: Rgb) -> f64 {
        let (a, b) = (self.luminance(), other.luminance());
        (a.max(b) + 0.05) / (a.min(b) + 0.05)
    }
}

impl std::str::FromStr for Rgb {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s.strip_prefix('#').unwrap_or(s);
        if hex.len() != 6 {
            return Err(format!("expected #rrggbb, got `{s}`"));
        }
        let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|e| e.to_string());
        Ok(Rgb(byte(0)?, byte(2)?, byte(4)?))
    }
}

impl Serialize for Rgb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.hex())
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Twenty distinguishable fills (the tab20 set).
pub fn default_palette() -> Vec<Rgb> {
    [
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
        "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896", "#c5b0d5", "#c49c94",
        "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5",
    ]
    .iter()
    .map(|h| h.parse().expect("static palette"))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabelPolicy {
    Full,
    /// Label the top `ceil(top_fraction * |V|)` nodes by degree, at least `min_labels`.
    Partial { top_fraction: f64, min_labels: usize },
}

impl LabelPolicy {
    pub const DEFAULT_TOP_FRACTION: f64 = 0.01;
    pub const DEFAULT_MIN_LABELS: usize = 20;

    pub fn partial_default() -> Self {
        LabelPolicy::Partial {
            top_fraction: Self::DEFAULT_TOP_FRACTION,
            min_labels: Self::DEFAULT_MIN_LABELS,
        }
    }

    /// Nodes that receive a label under this policy.
    pub fn labeled_nodes(&self, g: &Graph) -> BTreeSet<NodeId> {
        match *self {
            LabelPolicy::Full => g.nodes().collect(),
            LabelPolicy::Partial {
                top_fraction,
                min_labels,
            } => {
                let n = g.node_count();
                let wanted = ((top_fraction * n as f64).ceil() as usize)
                    .max(min_labels)
                    .min(n);
                let mut order: Vec<NodeId> = g.nodes().collect();
                order.sort_by(|&a, &b| {
                    g.neighbors(b)
                        .len()
                        .cmp(&g.neighbors(a).len())
                        .then(a.cmp(&b))
                });
                order.into_iter().take(wanted).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderSpec {
    pub canvas_px: (u32, u32),
    pub node_radius_px: f64,
    pub palette: Vec<Rgb>,
    pub label_policy: LabelPolicy,
    pub label_color: Rgb,
    pub label_font_px: f64,
    pub background: Rgb,
    pub edge_color: Rgb,
    pub edge_width_px: f64,
}

impl RenderSpec {
    /// Every node labeled; suited to small networks.
    pub fn full_label() -> Self {
        Self {
            canvas_px: (2048, 2048),
            node_radius_px: 6.0,
            palette: default_palette(),
            label_policy: LabelPolicy::Full,
            label_color: Rgb::BLACK,
            label_font_px: 14.0,
            background: Rgb::WHITE,
            edge_color: Rgb(160, 160, 160),
            edge_width_px: 0.8,
        }
    }

    /// Only high-degree nodes labeled; suited to large networks.
    pub fn partial_label() -> Self {
        Self {
            node_radius_px: 3.0,
            label_policy: LabelPolicy::partial_default(),
            edge_width_px: 0.4,
            ..Self::full_label()
        }
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let (w, h) = self.canvas_px;
        if w < MIN_CANVAS_PX || h < MIN_CANVAS_PX {
            return Err(RenderError::InvalidSpec(format!(
                "canvas {w}x{h} is smaller than {MIN_CANVAS_PX}x{MIN_CANVAS_PX}"
            )));
        }
        let distinct: BTreeSet<_> = self.palette.iter().map(|c| c.hex()).collect();
        if distinct.len() < MIN_PALETTE || distinct.len() != self.palette.len() {
            return Err(RenderError::InvalidSpec(format!(
                "palette needs at least {MIN_PALETTE} distinct colours"
            )));
        }
        if let LabelPolicy::Partial { top_fraction, .. } = self.label_policy {
            if !(top_fraction > 0.0 && top_fraction <= 1.0) {
                return Err(RenderError::InvalidSpec(format!(
                    "top_fraction {top_fraction} outside (0, 1]"
                )));
            }
        }
        if self.label_color.contrast(self.background) < MIN_LABEL_CONTRAST {
            return Err(RenderError::InvalidSpec(
                "label colour does not contrast with the background".into(),
            ));
        }
        if self.node_radius_px.is_nan() || self.node_radius_px <= 0.0 {
            return Err(RenderError::InvalidSpec("node radius must be positive".into()));
        }
        Ok(())
    }
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self::full_label()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageArtifact {
    pub svg: String,
    #[serde(skip)]
    pub png: Option<Vec<u8>>,
    /// Hex SHA-256 of the SVG bytes.
    pub content_hash: String,
    pub labeled_nodes: BTreeSet<NodeId>,
    pub canvas_px: (u32, u32),
    pub warnings: Vec<String>,
}

impl ImageArtifact {
    /// Writes `<dir>/<step>.svg` and, when rasterized, `<dir>/<step>.png`.
    pub fn write_to(&self, dir: &Path, step: &str) -> Result<Vec<PathBuf>, RenderError> {
        std::fs::create_dir_all(dir)?;
        let svg_path = dir.join(format!("{step}.svg"));
        std::fs::write(&svg_path, &self.svg)?;
        let mut written = vec![svg_path];
        if let Some(png) = &self.png {
            let png_path = dir.join(format!("{step}.png"));
            std::fs::write(&png_path, png)?;
            written.push(png_path);
        }
        Ok(written)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Maps layout coordinates into the canvas, keeping aspect ratio, with a
/// 5% margin on every side. The y axis points up.
fn canvas_transform(positions: &[Point], (w, h): (u32, u32)) -> impl Fn(Point) -> (f64, f64) {
    let (w, h) = (w as f64, h as f64);
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in positions {
        min_x = min_x.min(p.x);
        max_x = max_x.max(p.x);
        min_y = min_y.min(p.y);
        max_y = max_y.max(p.y);
    }
    let usable_w = w * (1.0 - 2.0 * MARGIN_FRACTION);
    let usable_h = h * (1.0 - 2.0 * MARGIN_FRACTION);
    let span_x = (max_x - min_x).max(0.0);
    let span_y = (max_y - min_y).max(0.0);
    let scale = match (span_x > 0.0, span_y > 0.0) {
        (true, true) => (usable_w / span_x).min(usable_h / span_y),
        (true, false) => usable_w / span_x,
        (false, true) => usable_h / span_y,
        (false, false) => 0.0,
    };
    let mid_x = (min_x + max_x) / 2.0;
    let mid_y = (min_y + max_y) / 2.0;
    move |p: Point| (w / 2.0 + (p.x - mid_x) * scale, h / 2.0 - (p.y - mid_y) * scale)
}

/// Draws edges, then nodes coloured by community, then labels per policy.
pub fn render(
    g: &Graph,
    layout: &LayoutResult,
    asg: Option<&CommunityAssignment>,
    spec: &RenderSpec,
) -> Result<ImageArtifact, RenderError> {
    spec.validate()?;
    if layout.positions.len() != g.node_count() {
        return Err(RenderError::LayoutMismatch {
            positions: layout.positions.len(),
            nodes: g.node_count(),
        });
    }
    if let Some(a) = asg {
        if a.node_count() != g.node_count() {
            return Err(RenderError::LayoutMismatch {
                positions: a.node_count(),
                nodes: g.node_count(),
            });
        }
    }
    let mut warnings = Vec::new();
    if let Some(a) = asg {
        if a.community_count() > spec.palette.len() {
            let msg = format!(
                "{} communities exceed the {}-colour palette; colours repeat",
                a.community_count(),
                spec.palette.len()
            );
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let to_canvas = canvas_transform(&layout.positions, spec.canvas_px);
    let points: Vec<(f64, f64)> = layout.positions.iter().map(|&p| to_canvas(p)).collect();
    let labeled = spec.label_policy.labeled_nodes(g);
    let (w, h) = spec.canvas_px;

    let mut svg = String::with_capacity(128 * (g.node_count() + g.edge_count()) + 512);
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="{}"/>"#,
        spec.background.hex()
    );
    let _ = writeln!(
        svg,
        r#"<g id="edges" stroke="{}" stroke-width="{:.2}">"#,
        spec.edge_color.hex(),
        spec.edge_width_px
    );
    for (u, v) in g.edges() {
        let (x1, y1) = points[u];
        let (x2, y2) = points[v];
        let _ = writeln!(svg, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, r##"<g id="nodes" stroke="#333333" stroke-width="0.5">"##);
    for v in g.nodes() {
        let (x, y) = points[v];
        let colour = spec.palette[asg.map_or(0, |a| a.community_of(v)) % spec.palette.len()];
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{:.2}" fill="{}"/>"#,
            spec.node_radius_px,
            colour.hex()
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<g id="labels" font-family="DejaVu Sans, Arial, sans-serif" font-size="{:.1}" fill="{}">"#,
        spec.label_font_px,
        spec.label_color.hex()
    );
    // above-right of the node so the label does not sit on the marker
    let offset = spec.node_radius_px + 1.0;
    for &v in &labeled {
        let (x, y) = points[v];
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + offset,
            y - offset,
            g.label(v)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(svg, "</svg>");

    Ok(ImageArtifact {
        content_hash: sha256_hex(svg.as_bytes()),
        svg,
        png: None,
        labeled_nodes: labeled,
        canvas_px: spec.canvas_px,
        warnings,
    })
}

static FONTS: LazyLock<Arc<usvg::fontdb::Database>> = LazyLock::new(|| {
    let mut db = usvg::fontdb::Database::new();
    db.load_system_fonts();
    Arc::new(db)
});

/// Rasterizes the SVG to an RGBA PNG of `canvas_px * scale` pixels.
pub fn rasterize(img: &ImageArtifact, scale: f64) -> Result<ImageArtifact, RenderError> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(RenderError::InvalidSpec(format!("scale {scale} must be positive")));
    }
    let options = usvg::Options {
        fontdb: Arc::clone(&FONTS),
        ..usvg::Options::default()
    };
    let tree = usvg::Tree::from_str(&img.svg, &options).map_err(|e| RenderError::Svg(e.to_string()))?;
    let width = (img.canvas_px.0 as f64 * scale).round() as u32;
    let height = (img.canvas_px.1 as f64 * scale).round() as u32;
    let mut pixmap = tiny_skia::Pixmap::new(width, height)
        .ok_or_else(|| RenderError::InvalidSpec(format!("cannot allocate {width}x{height} pixmap")))?;
    let size = tree.size();
    let transform = tiny_skia::Transform::from_scale(
        width as f32 / size.width(),
        height as f32 / size.height(),
    );
    resvg::render(&tree, transform, &mut pixmap.as_mut());
    let png = pixmap.encode_png().map_err(|e| RenderError::Png(e.to_string()))?;
    Ok(ImageArtifact {
        png: Some(png),
        ..img.clone()
    })
}
