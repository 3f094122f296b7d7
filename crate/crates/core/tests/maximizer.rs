mod common;

use common::{measure_matrix, naive_greedy, oracle_sigma, pair_matrix, SLACK};
use evinf::graph::{indicator_from_value, GraphBuilder};
use evinf::maximizer::{maximize_with, phi, sigma, MaximizeOptions, SpreadOptions};
use evinf::{maximize, MeasureKind, OpinionDistribution};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn opts() -> MaximizeOptions {
    MaximizeOptions {
        spread: SpreadOptions::default(),
        timing: false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sigma_matches_oracle(seed in any::<u64>(), n in 1usize..15, kind in 0usize..7, size in 0usize..6) {
        let mut rng = common::rng(seed);
        let g = common::random_graph(&mut rng, n, 0.3);
        let kind = MeasureKind::ALL[kind];
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        let set = &all[..size.min(n)];
        let f = pair_matrix(&measure_matrix(&g, kind));
        let got = sigma(&g, set, kind, SpreadOptions::default()).unwrap();
        prop_assert!((got - oracle_sigma(&f, set, true)).abs() < 1e-9);
        let lit = sigma(&g, set, kind, SpreadOptions::LITERAL).unwrap();
        prop_assert!((lit - oracle_sigma(&f, set, false)).abs() < 1e-9);
    }

    #[test]
    fn celf_matches_naive_greedy(seed in any::<u64>(), n in 1usize..25, kind in 0usize..7, k in 0usize..6) {
        let g = common::random_graph(&mut common::rng(seed), n, 0.15);
        let kind = MeasureKind::ALL[kind];
        let got: Vec<usize> = maximize_with(&g, k, kind, opts())
            .node_ids()
            .map(|id| g.index_of(id).unwrap())
            .collect();
        let want = naive_greedy(&pair_matrix(&measure_matrix(&g, kind)), k);
        prop_assert_eq!(got, want);
    }

    #[test]
    fn gains_do_not_increase(seed in any::<u64>(), kind in 0usize..7) {
        let g = common::random_graph(&mut common::rng(seed), 30, 0.1);
        let r = maximize_with(&g, 10, MeasureKind::ALL[kind], opts());
        for w in r.marginal_gains().windows(2) {
            prop_assert!(w[1] <= w[0] + SLACK);
        }
        let seeds: Vec<usize> = r.node_ids().map(|id| g.index_of(id).unwrap()).collect();
        let s = sigma(&g, &seeds, MeasureKind::ALL[kind], SpreadOptions::default()).unwrap();
        prop_assert!((s - r.sigma_values().last().copied().unwrap_or(0.0)).abs() < 1e-9);
    }
}

#[test]
fn monotone_and_submodular_on_random_triples() {
    let mut rng = common::rng(2024);
    let mut violations = Vec::new();
    for case in 0..1000 {
        let n = rng.random_range(2..=30);
        let density = rng.random_range(0.05..0.4);
        let g = common::random_graph(&mut rng, n, density);
        let kind = MeasureKind::ALL[case % 7];
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let t_len = rng.random_range(0..n);
        let s_len = rng.random_range(0..=t_len);
        let x = order[t_len];
        let t = &order[..t_len];
        let s = &order[..s_len];
        let sig = |set: &[usize]| sigma(&g, set, kind, SpreadOptions::default()).unwrap();
        let with = |set: &[usize]| {
            let mut v = set.to_vec();
            v.push(x);
            sig(&v)
        };
        if sig(s) > sig(t) + SLACK {
            violations.push(format!("case {case}: monotonicity"));
        }
        if with(s) - sig(s) < with(t) - sig(t) - SLACK {
            violations.push(format!("case {case}: submodularity"));
        }
    }
    assert!(violations.is_empty(), "{violations:?}");
}

#[test]
fn literal_form_is_not_monotone() {
    let mut b = GraphBuilder::new();
    b.add_node("u", OpinionDistribution::NEUTRAL).unwrap();
    b.add_node("w", OpinionDistribution::NEUTRAL).unwrap();
    b.add_edge("u", "w", indicator_from_value(0.8, 0.0).unwrap().bba().clone())
        .unwrap();
    let g = b.build().unwrap();
    let lit = |s: &[usize]| sigma(&g, s, MeasureKind::Plain, SpreadOptions::LITERAL).unwrap();
    assert!(lit(&[0, 1]) < lit(&[0]));
    assert!((phi(&g, &[0], 1, MeasureKind::Plain, SpreadOptions::LITERAL).unwrap() - 1.6).abs() < 1e-12);
    assert_eq!(
        phi(&g, &[0], 1, MeasureKind::Plain, SpreadOptions::default()).unwrap(),
        1.0
    );
}

#[test]
fn worker_count_does_not_change_results() {
    let g = common::random_graph(&mut common::rng(9), 150, 0.05);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| maximize_with(&g, 20, MeasureKind::Scenario2Belief, opts()))
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

#[test]
fn timing_is_optional() {
    let g = common::random_graph(&mut common::rng(1), 10, 0.3);
    assert!(maximize(&g, 3, MeasureKind::Plain).elapsed_seconds.is_some());
    assert!(maximize_with(&g, 3, MeasureKind::Plain, opts())
        .elapsed_seconds
        .is_none());
}

#[test]
fn k_beyond_node_count_is_truncated() {
    let g = common::random_graph(&mut common::rng(1), 4, 0.5);
    let r = maximize_with(&g, 10, MeasureKind::Plain, opts());
    assert_eq!(r.len(), 4);
    assert!((r.sigma_values()[3] - 4.0).abs() < 1e-9);
}
