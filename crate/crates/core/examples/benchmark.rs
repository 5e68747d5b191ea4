//! Asks the six basic graph questions about generated networks.
//!
//! The oracle backend answers from ground truth; a scripted backend that
//! always replies "[0]" shows how wrong answers are graded.
//! cargo run --release --example benchmark

use graphsight::bench::{
    batch_stats, run_benchmark, Difficulty, Family, GenSpec, Presentation, TaskKind, TextStyle,
};
use graphsight::layout::LayoutKind;
use graphsight::selection::{OracleBackend, ScriptedBackend};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for family in [Family::Ba, Family::Er, Family::Ws] {
        for difficulty in [Difficulty::Easy, Difficulty::Hard] {
            let spec = GenSpec::standard(family, difficulty);
            let s = batch_stats(&spec, 0, 200);
            println!(
                "{family:?} {difficulty:?}: nodes {:.2}, edges {:.2}, components {:.2}, cyclic {:.0}%",
                s.nodes.mean,
                s.edges.mean,
                s.components.mean,
                100.0 * s.cycle_fraction
            );
        }
    }

    let spec = GenSpec::standard(Family::Er, Difficulty::Easy);
    let image = Presentation::Image {
        layout: LayoutKind::FruchtermanReingold,
        communities: false,
    };
    let oracle = run_benchmark(&spec, &TaskKind::ALL, 10, &OracleBackend, image, 0, None)?;
    print!("{}", oracle.to_csv());

    let constant = ScriptedBackend::new(vec!["[0]".into()], true);
    let text = Presentation::Text { style: TextStyle::Expert };
    let report = run_benchmark(&spec, &TaskKind::ALL, 50, &constant, text, 0, None)?;
    print!("{}", report.to_csv().split_once('\n').map_or("", |(_, rows)| rows));
    Ok(())
}
