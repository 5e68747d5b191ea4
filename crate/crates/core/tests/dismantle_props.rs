mod common;

use common::*;
use graphsight::optimize::{auc, auc_with, hci_trace, hd_trace, removal_budget, robustness_r, AucRule};
use proptest::prelude::*;

proptest! {
    #[test]
    fn hd_trace_matches_union_find_replay(g in arb_graph(12), f in 0.05f64..=1.0) {
        let t = hd_trace(&g, f);
        let n = g.node_count();
        prop_assert!(t.removal_sequence.len() <= removal_budget(n, f));
        prop_assert_eq!(t.lcc_curve.len(), t.removal_sequence.len() + 1);
        let mut removed = vec![false; n];
        for (q, &label) in t.removal_sequence.iter().enumerate() {
            let v = g.node_of(label).unwrap();
            prop_assert!(!removed[v]);
            // the removed node has the highest residual degree
            let deg = |u: usize, removed: &[bool]| g.neighbors(u).iter().filter(|&&w| !removed[w]).count();
            let best = (0..n).filter(|&u| !removed[u]).map(|u| deg(u, &removed)).max().unwrap();
            prop_assert_eq!(deg(v, &removed), best);
            removed[v] = true;
            let alive: Vec<usize> = (0..n).filter(|&u| !removed[u]).collect();
            let index = |u: usize| alive.binary_search(&u).unwrap();
            let kept = g.edges().filter(|&(a, b)| !removed[a] && !removed[b]).map(|(a, b)| (index(a), index(b)));
            let lcc = union_find_sizes(alive.len(), kept).first().copied().unwrap_or(0);
            prop_assert_eq!(t.lcc_curve[q + 1], lcc);
        }
    }

    #[test]
    fn curve_and_metric_invariants(g in arb_graph(12), l in 1usize..4) {
        let t = hci_trace(&g, 1.0, l);
        prop_assert!(t.lcc_curve.windows(2).all(|w| w[1] <= w[0]));
        let r = robustness_r(&t);
        let left = auc_with(&t, AucRule::LeftSum);
        prop_assert!(left <= r + 1e-12);
        prop_assert!(auc(&t) >= left - 1e-12);
        prop_assert!(r <= t.n as f64);
    }
}
