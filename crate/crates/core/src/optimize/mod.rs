//! Influence maximization with local search, and sequential dismantling.

mod dismantle;
mod im;
mod local_search;

use thiserror::Error;

pub use dismantle::{
    auc, auc_with, baseline_trace, dismantle, hci_step, hci_trace, hci_trace_default, hd_step,
    hd_trace, removal_budget, robustness_r, AucRule, DismantleConfig, DismantleFailure,
    DismantleStep, DismantleTrace, StepSource, DEFAULT_REQUERY_BUDGET, DEFAULT_STOP_FRACTION,
};
pub use im::{run_im, AgentResult, AttemptRecord, ImConfig, ImRun, DEFAULT_ATTEMPTS};
pub use local_search::{
    local_search, LocalSearchConfig, LocalSearchResult, Ranking, Swap, DEFAULT_MAX_ITER,
};

#[derive(Debug, Error)]
pub enum OptimizeError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid seeds: {0}")]
    InvalidSeeds(String),
    #[error("no valid attempts ({0})")]
    NoValidAttempts(String),
    #[error(transparent)]
    Diffusion(#[from] crate::diffusion::DiffusionError),
    #[error(transparent)]
    Selection(#[from] crate::selection::SelectionError),
    #[error(transparent)]
    Selector(#[from] crate::selection::SelectorError),
    #[error(transparent)]
    Render(#[from] crate::render::RenderError),
}
