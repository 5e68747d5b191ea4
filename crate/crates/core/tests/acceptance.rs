//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Lines go straight to the stdout handle so they show up without
//! `--nocapture`. A criterion listed as data-gated fails when its input
//! networks are not on disk; see `scripts/fetch_networks.sh`.

mod common;

use std::io::Write;
use std::path::PathBuf;

use common::{floyd_warshall, live_edge_spread};
use graphsight::bench::{batch_stats, Difficulty, Family, GenSpec};
use graphsight::cli::{cmd_dismantle, cmd_im, RunConfig};
use graphsight::community::{detect_communities, merge_communities, CommunityAssignment};
use graphsight::datasets;
use graphsight::diffusion::{expected_spread, DiffusionModel};
use graphsight::graph::{largest_component_size, read_edge_list_file, Graph, LoadOptions};
use graphsight::layout::{adjust_positions, AdjustmentParams, LayoutKind, LayoutResult, Point};
use graphsight::optimize::{
    auc, auc_with, hci_trace, hd_trace, local_search, run_im, AucRule, ImConfig, LocalSearchConfig,
};
use graphsight::selection::{AgentProfile, LabelMode, ScriptedBackend};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const AUC_REL_TOL: f64 = 0.10;
const MC_SIGMAS: f64 = 4.0;
const LAYOUT_REL_TOL: f64 = 1e-12;
const STATS_SIGMAS: f64 = 3.0;

/// Published dismantling AUCs: (network, HD, HCI).
const PUBLISHED_AUC: [(&str, f64, f64); 4] = [
    ("karate", 4.07, 4.31),
    ("dolphins", 11.77, 12.13),
    ("lesmis", 7.62, 7.80),
    ("polbooks", 21.85, 21.81),
];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn report(out: &mut Vec<Outcome>, id: &'static str, pass: bool, detail: String) {
    let line = format!("[{}] {id}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut stdout = std::io::stdout();
    let _ = stdout.write_all(line.as_bytes());
    let _ = stdout.flush();
    out.push(Outcome { id, pass, detail });
}

fn networks_dir() -> PathBuf {
    std::env::var_os("GRAPHSIGHT_NETWORKS")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/networks"))
}

fn load(name: &str) -> Option<Graph> {
    datasets::builtin(name).or_else(|| {
        let path = networks_dir().join(format!("{name}.txt"));
        read_edge_list_file(&path, LoadOptions::default()).ok()
    })
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x - target).abs() <= rel * target.abs()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, max_m: usize) -> Graph {
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
    // partial Fisher-Yates for a uniform subset
    let m = rng.random_range(0..=max_m.min(pairs.len()));
    for i in 0..m {
        let j = rng.random_range(i..pairs.len());
        pairs.swap(i, j);
    }
    Graph::from_edges(n, pairs[..m].iter().copied()).unwrap()
}

fn c1_auc(out: &mut Vec<Outcome>) {
    let mut hd_parts = Vec::new();
    let mut hd_ok = true;
    let mut missing = Vec::new();
    let graphs: Vec<_> = PUBLISHED_AUC.iter().map(|&(name, hd, ci)| (name, hd, ci, load(name))).collect();
    for (name, hd, _, g) in &graphs {
        let Some(g) = g else {
            missing.push(*name);
            continue;
        };
        let t = hd_trace(g, 0.25);
        let a = auc(&t);
        let ok = within(a, *hd, AUC_REL_TOL);
        hd_ok &= ok;
        hd_parts.push(format!(
            "{name} {a:.3} vs {hd} (left-sum {:.3})",
            auc_with(&t, AucRule::LeftSum)
        ));
    }
    report(
        out,
        "C1a HD AUC on available networks",
        hd_ok,
        format!("trapezoid within ±10%: {}", hd_parts.join("; ")),
    );

    let mut per_l = Vec::new();
    let mut fixed_l = None;
    for l in 1..=3 {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, _, ci, g) in &graphs {
            if let Some(g) = g {
                let a = auc(&hci_trace(g, 0.25, l));
                ok &= within(a, *ci, AUC_REL_TOL);
                parts.push(format!("{name} {a:.3}"));
            }
        }
        per_l.push(format!("l={l}: {}", parts.join(", ")));
        if ok && fixed_l.is_none() {
            fixed_l = Some(l);
        }
    }
    report(
        out,
        "C1b HCI AUC, one l for all available networks",
        fixed_l.is_some(),
        format!("chosen l = {fixed_l:?}; {}", per_l.join(" | ")),
    );

    report(
        out,
        "C1c reference networks present",
        missing.is_empty(),
        if missing.is_empty() {
            "all four networks loaded".into()
        } else {
            format!("missing {} under {}", missing.join(", "), networks_dir().display())
        },
    );
}

fn c2_karate_first_step(out: &mut Vec<Outcome>) {
    let g = datasets::karate();
    let rest = g.without_node(g.node_of(0).unwrap()).unwrap();
    let lcc = largest_component_size(&rest);
    report(out, "C2 Karate LCC after removing node 0", lcc == 27, format!("LCC = {lcc}, want 27"));
}

fn c3_diffusion_oracle(out: &mut Vec<Outcome>) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut exact_ok = true;
    for i in 0..20 {
        let n = rng.random_range(2..=8);
        let g = random_graph(&mut rng, n, 12);
        let seeds = vec![rng.random_range(0..n)];
        for p in [0.1, 0.5] {
            let exact = live_edge_spread(&g, &seeds, p);
            let est = expected_spread(&g, &seeds, DiffusionModel::ic(p).unwrap(), 100_000, i).unwrap();
            let z = if est.std_error > 0.0 {
                (est.mean - exact).abs() / est.std_error
            } else if (est.mean - exact).abs() < 1e-12 {
                0.0
            } else {
                f64::INFINITY
            };
            worst = worst.max(z);
            ok &= z <= MC_SIGMAS;
        }
        let reach = floyd_warshall(&g)[seeds[0]].iter().flatten().count() as f64;
        let zero = expected_spread(&g, &seeds, DiffusionModel::ic(0.0).unwrap(), 1_000, i).unwrap();
        let one = expected_spread(&g, &seeds, DiffusionModel::ic(1.0).unwrap(), 1_000, i).unwrap();
        exact_ok &= zero.mean == 1.0 && one.mean == reach && zero.std_error == 0.0 && one.std_error == 0.0;
    }
    report(
        out,
        "C3 IC Monte Carlo vs live-edge enumeration",
        ok && exact_ok,
        format!("worst |z| = {worst:.2} (limit {MC_SIGMAS}); p=0 and p=1 exact: {exact_ok}"),
    );
}

fn c4_local_search(out: &mut Vec<Outcome>) {
    let star = Graph::from_edges(7, (1..7).map(|v| (0, v))).unwrap();
    let cfg = LocalSearchConfig::default();
    let res = local_search(&star, &[1], DiffusionModel::ic(0.5).unwrap(), &cfg).unwrap();
    let star_ok = res.seeds == vec![0];

    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fuzz_ok = true;
    for case in 0..100u64 {
        let n = rng.random_range(3..=10);
        let g = random_graph(&mut rng, n, 20);
        let k = rng.random_range(1..=n.min(4));
        let mut nodes: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.random_range(i..n);
            nodes.swap(i, j);
        }
        let seeds = &nodes[..k];
        let model = if case % 2 == 0 { DiffusionModel::ic(0.3).unwrap() } else { DiffusionModel::Lt };
        let cfg = LocalSearchConfig {
            max_iter: 3,
            trials: 300,
            rng_seed: case,
        };
        let r = local_search(&g, seeds, model, &cfg).unwrap();
        let mut sorted = r.seeds.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let valid = r.seeds.len() == k && sorted.len() == k && r.seeds.iter().all(|&v| v < n);
        let mut prev = r.initial_spread.mean;
        let mut monotone = true;
        for s in &r.swaps {
            monotone &= s.spread >= prev;
            prev = s.spread;
        }
        monotone &= r.final_spread.mean >= r.initial_spread.mean;
        fuzz_ok &= valid && monotone;
    }
    report(
        out,
        "C4 local search soundness",
        star_ok && fuzz_ok,
        format!("star leaf -> {:?} (want [0]); 100 fuzzed runs valid and non-decreasing: {fuzz_ok}", res.seeds),
    );
}

fn c5_merging(out: &mut Vec<Outcome>) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut ok = true;
    while checked < 50 {
        let n = rng.random_range(12..=40);
        let g = random_graph(&mut rng, n, n + n / 2);
        let asg = detect_communities(&g, rng.random());
        if asg.community_count() < 2 {
            continue;
        }
        let t = rng.random_range(1..asg.community_count());
        ok &= merge_communities(&g, &asg, t).unwrap().community_count() == t;
        checked += 1;
    }

    // {0,1,2} is the smallest-index smallest community, with 1 edge to
    // {3..6} and 2 edges to {7,8,9}
    let edges = [
        (0, 1), (1, 2), (0, 2),
        (3, 4), (4, 5), (5, 6), (3, 6), (3, 5),
        (7, 8), (8, 9), (7, 9),
        (2, 3), (0, 7), (1, 8),
    ];
    let g = Graph::from_edges(10, edges).unwrap();
    let asg = CommunityAssignment::from_membership(vec![0, 0, 0, 1, 1, 1, 1, 2, 2, 2]);
    let links = |c: usize| {
        edges
            .iter()
            .filter(|&&(u, v)| {
                let (a, b) = (asg.community_of(u), asg.community_of(v));
                (a == 0 && b == c) || (b == 0 && a == c)
            })
            .count()
    };
    let oracle_target = (1..3).max_by_key(|&c| links(c)).unwrap();
    let merged = merge_communities(&g, &asg, 2).unwrap();
    let target_member = asg.members()[oracle_target][0];
    let brute_ok = merged.community_of(0) == merged.community_of(target_member);
    report(
        out,
        "C5 community merging",
        ok && brute_ok,
        format!("50 random graphs reach T exactly: {ok}; 10-node merge target matches oracle: {brute_ok}"),
    );
}

fn c6_adjustment(out: &mut Vec<Outcome>) {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst: f64 = 0.0;
    let g2 = Graph::from_edges(2, []).unwrap();
    let one = CommunityAssignment::single(2);
    for _ in 0..1000 {
        let p = Point::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        let c = Point::new(rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0));
        if p.distance(c) < 1e-3 {
            continue;
        }
        let d = rng.random_range(0.01..0.99);
        // the mirror image of p about c makes c the community centroid
        let q = Point::new(2.0 * c.x - p.x, 2.0 * c.y - p.y);
        let layout = LayoutResult {
            positions: vec![p, q],
            layout_kind: LayoutKind::FruchtermanReingold,
            rng_seed: 0,
        };
        let adj = adjust_positions(&g2, &layout, &one, &AdjustmentParams { d, top_n: 0 }).unwrap();
        let rel = (adj.positions[0].distance(c) - d * p.distance(c)).abs() / (d * p.distance(c));
        worst = worst.max(rel);
    }

    let g = datasets::lesmis();
    let asg = detect_communities(&g, 0);
    let layout = graphsight::layout::compute_layout(&g, LayoutKind::FruchtermanReingold, 0, 100);
    let params = AdjustmentParams::default();
    let adj = adjust_positions(&g, &layout, &asg, &params).unwrap();
    let fixed = graphsight::layout::top_nodes_per_community(&g, &asg, params.top_n);
    let unmoved = g.nodes().filter(|&v| fixed[v]).all(|v| adj.positions[v] == layout.positions[v]);
    let moved = g.nodes().filter(|&v| !fixed[v]).count();
    report(
        out,
        "C6 layout adjustment",
        worst <= LAYOUT_REL_TOL && unmoved,
        format!("worst relative error {worst:.2e} (limit {LAYOUT_REL_TOL:e}); top_n unmoved: {unmoved} ({moved} moved)"),
    );
}

fn c7_statistics(out: &mut Vec<Outcome>) {
    let ba_easy = batch_stats(&GenSpec::standard(Family::Ba, Difficulty::Easy), 0, 200);
    let ba_hard = batch_stats(&GenSpec::standard(Family::Ba, Difficulty::Hard), 0, 200);
    let er_hard = batch_stats(&GenSpec::standard(Family::Er, Difficulty::Hard), 0, 200);
    let nodes_ok = (ba_easy.nodes.mean - 7.69).abs() <= STATS_SIGMAS * ba_easy.nodes.std_error;
    let comps_ok = ba_easy.components.mean == 1.0 && ba_hard.components.mean == 1.0;
    let er_ok = (er_hard.components.mean - 5.15).abs() <= STATS_SIGMAS * er_hard.components.std_error;
    report(
        out,
        "C7 synthetic graph statistics",
        nodes_ok && comps_ok && er_ok,
        format!(
            "BA-easy nodes {:.3} ± {:.3} vs 7.69; BA components {:.2}/{:.2}; ER-hard components {:.3} ± {:.3} vs 5.15",
            ba_easy.nodes.mean,
            ba_easy.nodes.std_error,
            ba_easy.components.mean,
            ba_hard.components.mean,
            er_hard.components.mean,
            er_hard.components.std_error
        ),
    );
}

/// 60 replies for k = 5 on Karate (ids 0..33), grouped by defect.
fn defect_fixture() -> Vec<String> {
    let mut r = Vec::new();
    // 14 valid
    for i in 0..14u64 {
        r.push(format!("Selected nodes: [{}, {}, {}, {}, {}]", i, i + 1, i + 2, i + 3, i + 4));
    }
    // 9 with four ids
    for i in 0..9u64 {
        r.push(format!("[{}, {}, {}, {}]", i, i + 5, i + 10, i + 15));
    }
    // 11 naming a node that does not exist
    for i in 0..11u64 {
        r.push(format!("[{}, {}, {}, {}, {}]", i, i + 1, i + 2, i + 3, 34 + i));
    }
    // 8 with a repeated id
    for i in 0..8u64 {
        r.push(format!("I pick [{i}, {i}, {}, {}, {}].", i + 1, i + 2, i + 3));
    }
    // 7 with six ids, a repeat and a missing node
    for i in 0..7u64 {
        r.push(format!("[{i}, {i}, 1, 2, 3, 99]"));
    }
    // 11 without a list
    for i in 0..11u64 {
        r.push(format!("The most influential node is {i}."));
    }
    r
}

fn c8_validation(out: &mut Vec<Outcome>) {
    // size ok: valid + nonexistent + repeated; all exist: valid + short +
    // repeated; no duplicates: valid + short + nonexistent
    let (want_size, want_exist, want_distinct) = (33.0 / 60.0, 31.0 / 60.0, 34.0 / 60.0);

    let replies = defect_fixture();
    let g = datasets::karate();
    let agents = AgentProfile::roster(LabelMode::Full);
    let backend = ScriptedBackend::new(replies.clone(), false);
    let cfg = ImConfig {
        k: 5,
        attempts_per_agent: (replies.len() / agents.len()) as u32,
        validation_trials: 200,
        local_search: None,
        ..ImConfig::default()
    };
    let result = run_im(&g, "karate", &agents, None, &cfg, &backend, None);
    let (pass, detail) = match result {
        Ok(run) => {
            let v = run.validation;
            (
                v.replies == 60 && v.size_ratio == want_size && v.exist_ratio == want_exist && v.distinct_ratio == want_distinct,
                format!(
                    "{} replies; size {:.4} exist {:.4} distinct {:.4} (want {want_size:.4} {want_exist:.4} {want_distinct:.4})",
                    v.replies, v.size_ratio, v.exist_ratio, v.distinct_ratio
                ),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    report(out, "C8 validation ratios on a defect fixture", pass, detail);
}

fn check_envelope(v: &Value, command: &str) -> Result<(), String> {
    let str_field = |k: &str| v.get(k).and_then(Value::as_str).ok_or(format!("{k} missing"));
    if str_field("command")? != command {
        return Err("wrong command".into());
    }
    let id = str_field("run_id")?;
    if id.len() != 16 || !id.chars().all(|c| c.is_ascii_hexdigit()) {
        return Err(format!("bad run_id {id}"));
    }
    str_field("version")?;
    v.get("created_unix").and_then(Value::as_u64).ok_or("created_unix missing")?;
    let cfg: RunConfig = serde_json::from_value(v["config"].clone()).map_err(|e| format!("config: {e}"))?;
    if cfg.network.as_deref() != Some("karate") {
        return Err("config.network".into());
    }
    if v["network"]["nodes"] != 34 || v["network"]["edges"] != 78 {
        return Err("network info".into());
    }
    if !v["metrics"].is_object() || v.get("result").is_none() {
        return Err("metrics/result missing".into());
    }
    Ok(())
}

fn c9_end_to_end(out: &mut Vec<Outcome>) {
    let dir = tempfile::tempdir().unwrap();
    let fixture = dir.path().join("replies.json");
    std::fs::write(
        &fixture,
        r#"{"replies": ["[33, 0, 32, 2, 1]", "[0, 33, 5, 6, 31]", "no idea", "[33, 33, 1, 2, 3]"], "cycle": true}"#,
    )
    .unwrap();
    let im_cfg = RunConfig {
        network: Some("karate".into()),
        rng_seed: 9,
        backend: "scripted".into(),
        fixture: Some(fixture),
        ..RunConfig::default()
    };
    let dis_cfg = RunConfig {
        network: Some("karate".into()),
        rng_seed: 9,
        backend: "hd".into(),
        ..RunConfig::default()
    };

    let mut problems = Vec::new();
    let mut metrics = Vec::new();
    for round in 0..2 {
        for (name, cfg) in [("im", &im_cfg), ("dismantle", &dis_cfg)] {
            let cfg = RunConfig {
                out_dir: dir.path().join(format!("runs{round}")),
                ..cfg.clone()
            };
            let res = if name == "im" { cmd_im(&cfg) } else { cmd_dismantle(&cfg) };
            match res {
                Ok(o) => {
                    let v: Value = serde_json::from_str(&std::fs::read_to_string(&o.result_path).unwrap()).unwrap();
                    if let Err(e) = check_envelope(&v, name) {
                        problems.push(format!("{name}: {e}"));
                    }
                    metrics.push(serde_json::to_string(&v["metrics"]).unwrap());
                }
                Err(e) => problems.push(format!("{name}: {e}")),
            }
        }
    }
    let identical = metrics.len() == 4 && metrics[0] == metrics[2] && metrics[1] == metrics[3];
    report(
        out,
        "C9 offline end-to-end runs",
        problems.is_empty() && identical,
        format!(
            "schema problems: {}; metrics identical on re-run: {identical}",
            if problems.is_empty() { "none".into() } else { problems.join("; ") }
        ),
    );
}

#[test]
fn acceptance_criteria() {
    let mut out = Vec::new();
    c1_auc(&mut out);
    c2_karate_first_step(&mut out);
    c3_diffusion_oracle(&mut out);
    c4_local_search(&mut out);
    c5_merging(&mut out);
    c6_adjustment(&mut out);
    c7_statistics(&mut out);
    c8_validation(&mut out);
    c9_end_to_end(&mut out);

    // Dolphins and Polbooks cannot be bundled; this line stays red until
    // they are fetched.
    let data_gated = ["C1c reference networks present"];
    let unexpected: Vec<_> = out
        .iter()
        .filter(|o| !o.pass && !data_gated.contains(&o.id))
        .map(|o| format!("{}: {}", o.id, o.detail))
        .collect();
    assert!(unexpected.is_empty(), "failed criteria:\n{}", unexpected.join("\n"));
}
