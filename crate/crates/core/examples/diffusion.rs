//! Compares centrality seed sets under independent cascade and linear threshold.
//!
//! cargo run --release --example diffusion

use graphsight::datasets;
use graphsight::diffusion::{expected_spread, DiffusionModel};
use graphsight::graph::CentralityMethod;
use graphsight::selection::heuristic_select;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = datasets::karate();
    let k = 3;
    let trials = 20_000;
    println!("{:<22} {:>16} {:>16}", "seeds", "IC p=0.1", "LT");
    for method in CentralityMethod::ALL {
        let seeds = heuristic_select(&g, method, k);
        let ic = expected_spread(&g, &seeds, DiffusionModel::ic(0.1)?, trials, 7)?;
        let lt = expected_spread(&g, &seeds, DiffusionModel::Lt, trials, 7)?;
        let labels: Vec<_> = seeds.iter().map(|&v| g.label(v)).collect();
        println!(
            "{:<22} {:>8.3} ± {:<5.3} {:>8.3} ± {:<5.3}",
            format!("{} {labels:?}", method.name()),
            ic.mean,
            ic.std_error,
            lt.mean,
            lt.std_error
        );
    }
    Ok(())
}
