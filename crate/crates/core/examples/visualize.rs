//! Draws Les Misérables with community colours and adjusted positions.
//!
//! cargo run --release --example visualize -- [out_dir]

use graphsight::datasets;
use graphsight::pipeline::{visualize, VizParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/visualize".into());
    let g = datasets::lesmis();
    let params = VizParams::for_graph(&g);
    let viz = visualize(&g, &params)?;

    println!("{} nodes, {} edges", g.node_count(), g.edge_count());
    println!("detected {} communities, drawing {}", viz.detected_communities, viz.communities.community_count());
    for (c, size) in viz.communities.sizes().iter().enumerate() {
        println!("  community {c}: {size} nodes");
    }
    let files = viz.image.write_to(out.as_ref(), "lesmis")?;
    for f in files {
        println!("wrote {}", f.display());
    }
    println!("svg sha256 {}", viz.image.content_hash);
    Ok(())
}
