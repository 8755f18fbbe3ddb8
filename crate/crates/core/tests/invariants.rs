use std::collections::HashMap;

use emergence_lab::coarse::{architectural_coherence, coupling_density, structural_entropy};
use emergence_lab::ei::{effective_information, TransitionMatrix};
use emergence_lab::graph::{clustering_coefficient, link_density};
use emergence_lab::state::DependencyGraph;
use emergence_lab::stats::{mann_kendall, mk_statistic};
use proptest::prelude::*;

fn brute_force_s(x: &[f64]) -> i64 {
    let mut s = 0;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            s += (x[j] - x[i]).partial_cmp(&0.0).map_or(0, |o| o as i64);
        }
    }
    s
}

fn arb_graph() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, Vec<f64>)> {
    (2usize..9).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec((0..n, 0..n), 0..20),
            prop::collection::vec(0.5f64..50.0, n),
        )
    })
}

fn build(n: usize, edges: &[(usize, usize)], w: &[f64], label: impl Fn(usize) -> String) -> DependencyGraph {
    let nodes: Vec<(String, f64)> = (0..n).map(|i| (label(i), w[i])).collect();
    let edges: Vec<(String, String)> = edges
        .iter()
        .filter(|(a, b)| a != b)
        .map(|&(a, b)| (label(a), label(b)))
        .collect();
    DependencyGraph::from_parts(0, nodes, edges).unwrap()
}

proptest! {
    #[test]
    fn mk_statistic_is_pairwise_sign_count(x in prop::collection::vec(-5i32..5, 0..13)) {
        let x: Vec<f64> = x.into_iter().map(f64::from).collect();
        prop_assert_eq!(mk_statistic(&x), brute_force_s(&x));
    }

    #[test]
    fn mk_p_values_are_probabilities(x in prop::collection::vec(-100.0f64..100.0, 3..60)) {
        if let Ok(mk) = mann_kendall(&x) {
            prop_assert!((0.0..=1.0).contains(&mk.p_increasing));
            prop_assert!((0.0..=1.0).contains(&mk.p_decreasing));
        }
    }

    #[test]
    fn graph_metrics_ignore_node_names((n, edges, w) in arb_graph(), shift in 1usize..7) {
        let a = build(n, &edges, &w, |i| format!("m{i}"));
        let b = build(n, &edges, &w, |i| format!("z{}", (i + shift) % n + 100 * i));
        prop_assert!((clustering_coefficient(&a) - clustering_coefficient(&b)).abs() < 1e-12);
        prop_assert_eq!(link_density(&a).unwrap(), link_density(&b).unwrap());
        prop_assert_eq!(coupling_density(&a).unwrap(), coupling_density(&b).unwrap());
        prop_assert!((structural_entropy(&a).unwrap() - structural_entropy(&b).unwrap()).abs() < 1e-12);
        let part = |g: &DependencyGraph| -> HashMap<String, String> {
            g.nodes().enumerate().map(|(i, (name, _))| (name.to_string(), (i % 2).to_string())).collect()
        };
        let q = architectural_coherence(&a, &part(&a)).unwrap();
        prop_assert!((-0.5 - 1e-12..=1.0).contains(&q));
    }

    #[test]
    fn clustering_and_density_are_bounded((n, edges, w) in arb_graph()) {
        let g = build(n, &edges, &w, |i| format!("m{i}"));
        prop_assert!((0.0..=1.0).contains(&clustering_coefficient(&g)));
        prop_assert!((0.0..=1.0).contains(&link_density(&g).unwrap()));
        let e = structural_entropy(&g).unwrap();
        prop_assert!(e >= -1e-12 && e <= (n as f64).log2() + 1e-12);
    }

    #[test]
    fn ei_is_between_zero_and_log_n(rows in prop::collection::vec(prop::collection::vec(0.01f64..1.0, 4), 4)) {
        let rows: Vec<Vec<f64>> = rows
            .into_iter()
            .map(|r| { let s: f64 = r.iter().sum(); r.into_iter().map(|v| v / s).collect() })
            .collect();
        let ei = effective_information(&TransitionMatrix::from_rows(&rows).unwrap());
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&ei));
    }
}
