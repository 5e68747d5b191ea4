//! Drives the command line in-process, the same way the `graphsight` binary does.
//!
//! cargo run --release --example cli -- viz --network karate --out-dir runs

fn main() {
    let mut argv: Vec<String> = std::env::args().collect();
    if argv.len() == 1 {
        argv.extend(["dismantle", "--network", "karate", "--backend", "hci"].map(String::from));
    }
    std::process::exit(graphsight::cli::run(argv));
}
