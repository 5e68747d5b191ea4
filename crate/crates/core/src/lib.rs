pub mod bench;
pub mod cli;
pub mod community;
pub mod datasets;
pub mod diffusion;
pub mod graph;
pub mod layout;
pub mod optimize;
pub mod pipeline;
pub mod render;
pub mod selection;
