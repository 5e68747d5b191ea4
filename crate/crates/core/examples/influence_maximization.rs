//! Seed selection by every agent profile followed by local search.
//!
//! Without `MLLM_API_KEY` the degree heuristic stands in for the model.
//! cargo run --release --example influence_maximization

use graphsight::datasets;
use graphsight::diffusion::DiffusionModel;
use graphsight::graph::CentralityMethod;
use graphsight::optimize::{run_im, ImConfig, LocalSearchConfig, DEFAULT_MAX_ITER};
use graphsight::pipeline::{visualize, VizParams};
use graphsight::selection::{
    AgentProfile, Backend, HeuristicBackend, LabelMode, MllmBackend, MllmConfig,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = datasets::karate();
    let backend: Box<dyn Backend> = match MllmBackend::from_env(MllmConfig::default()) {
        Ok(b) => Box::new(b),
        Err(_) => Box::new(HeuristicBackend::new(CentralityMethod::Degree)),
    };
    let params = VizParams {
        raster_scale: backend.needs_image().then_some(1.0),
        ..VizParams::for_graph(&g)
    };
    let viz = visualize(&g, &params)?;

    let cfg = ImConfig {
        k: 5,
        attempts_per_agent: 3,
        model: DiffusionModel::ic(0.1)?,
        validation_trials: 20_000,
        rng_seed: 1,
        temperature: 1.0,
        requery_budget: 0,
        local_search: Some(LocalSearchConfig {
            max_iter: DEFAULT_MAX_ITER,
            trials: 2_000,
            rng_seed: 1,
        }),
    };
    let agents = AgentProfile::roster(LabelMode::Full);
    let run = run_im(&g, "karate", &agents, Some(&viz.image), &cfg, backend.as_ref(), None)?;

    for a in &run.agents {
        let best = a
            .attempts
            .iter()
            .filter_map(|r| Some((r.parsed.as_ref()?, r.spread.as_ref()?)))
            .max_by(|x, y| x.1.mean.total_cmp(&y.1.mean));
        match best {
            Some((seeds, est)) => println!("agent {} ({}): {seeds:?} -> {:.3}", a.agent.agent_id, a.agent.name, est.mean),
            None => println!("agent {} ({}): no valid attempt", a.agent.agent_id, a.agent.name),
        }
    }
    println!("best seeds {:?} spread {:.3}", run.best_seeds, run.best_spread.mean);
    if let (Some(seeds), Some(spread)) = (&run.best_seeds_ls, &run.best_spread_ls) {
        println!("after local search {seeds:?} spread {:.3}", spread.mean);
    }
    Ok(())
}
