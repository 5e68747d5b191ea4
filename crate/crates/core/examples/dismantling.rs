//! Dismantles Zachary's karate club with the HD and HCI baselines and with a
//! selector answering one node per step.
//!
//! cargo run --release --example dismantling

use graphsight::datasets;
use graphsight::graph::CentralityMethod;
use graphsight::optimize::{
    auc, dismantle, hci_trace_default, hd_trace, robustness_r, DismantleConfig, DismantleTrace,
};
use graphsight::selection::HeuristicBackend;

fn report(name: &str, t: &DismantleTrace) {
    println!(
        "{name:<12} R = {:.4}  AUC = {:.4}  removed {:?}",
        robustness_r(t),
        auc(t),
        t.removal_sequence
    );
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = datasets::karate();
    report("HD", &hd_trace(&g, 0.25));
    report("HCI", &hci_trace_default(&g, 0.25));

    let backend = HeuristicBackend::new(CentralityMethod::Betweenness);
    let cfg = DismantleConfig::default();
    let trace = dismantle(&g, &backend, &cfg, None, &mut |_, _| {}).map_err(|f| f.to_string())?;
    report("betweenness", &trace);
    println!("lcc curve {:?}", trace.lcc_curve);
    Ok(())
}
