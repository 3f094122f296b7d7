mod common;

use std::fs;

use evinf::graph::{
    edge_influence_bba, indicator_from_value, influence_frame, influence_subset, load_graph, passive_subset,
    GraphError, GraphFiles, IndicatorBBA, LoadOptions,
};
use evinf::InfluenceGraph;
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn round_trip(g: &InfluenceGraph) -> InfluenceGraph {
    let dir = tempfile::tempdir().unwrap();
    let (ep, np) = (dir.path().join("edges.csv"), dir.path().join("nodes.csv"));
    let mut buf = Vec::new();
    g.write_edges(&mut buf).unwrap();
    fs::write(&ep, buf).unwrap();
    let mut buf = Vec::new();
    g.write_nodes(&mut buf).unwrap();
    fs::write(&np, buf).unwrap();
    let files = GraphFiles {
        edges: Some(&ep),
        nodes: Some(&np),
        ..Default::default()
    };
    load_graph(&files, LoadOptions::default()).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn write_then_load_is_identity(seed in any::<u64>(), n in 2usize..25) {
        let g = common::random_graph(&mut common::rng(seed), n, 0.2);
        let h = round_trip(&g);
        prop_assert_eq!(g.node_count(), h.node_count());
        prop_assert_eq!(g.edge_count(), h.edge_count());
        for (a, b) in g.nodes().iter().zip(h.nodes()) {
            prop_assert_eq!(a.id(), b.id());
            prop_assert!((a.opinion().pos() - b.opinion().pos()).abs() < 1e-9);
            prop_assert!((a.opinion().neg() - b.opinion().neg()).abs() < 1e-9);
        }
        for (a, b) in g.edges().iter().zip(h.edges()) {
            prop_assert_eq!(g.id_of(a.src()), h.id_of(b.src()));
            prop_assert_eq!(g.id_of(a.dst()), h.id_of(b.dst()));
            prop_assert!(a.bba().max_abs_diff(b.bba()) < 1e-9);
        }
    }

    #[test]
    fn indicator_order_does_not_matter(xs in prop::collection::vec(0.0f64..=1.0, 1..6), gamma in 0.05f64..0.5, seed in any::<u64>()) {
        let mut inds: Vec<IndicatorBBA> = xs.iter().map(|&x| indicator_from_value(x, gamma).unwrap()).collect();
        let a = edge_influence_bba(&inds).unwrap();
        inds.shuffle(&mut common::rng(seed));
        let b = edge_influence_bba(&inds).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-9);
        let full = influence_frame().full();
        for &(s, _) in a.focal_elements() {
            prop_assert!(s == influence_subset() || s == passive_subset() || s == full);
        }
    }
}

#[test]
fn indicator_columns_are_fused() {
    let dir = tempfile::tempdir().unwrap();
    let ep = dir.path().join("edges.csv");
    fs::write(&ep, "src,dst,follow,mention\na,b,0.8,0.6\nb,c,1.0,0.0\n").unwrap();
    let files = GraphFiles {
        edges: Some(&ep),
        ..Default::default()
    };
    let (g, report) = load_graph(&files, LoadOptions::default()).unwrap();
    assert_eq!(g.node_count(), 3);
    assert_eq!(report.neutral_fallbacks, 3);
    let e = g.edge(g.find_edge(0, 1).unwrap());
    assert_eq!(e.indicators(), Some(&[0.8, 0.6][..]));
    let expected = edge_influence_bba(&[
        indicator_from_value(0.8, 0.1).unwrap(),
        indicator_from_value(0.6, 0.1).unwrap(),
    ])
    .unwrap();
    assert!(e.bba().max_abs_diff(&expected) < 1e-12);
}

#[test]
fn messages_set_opinions() {
    let dir = tempfile::tempdir().unwrap();
    let p = |n: &str| dir.path().join(n);
    fs::write(p("edges.csv"), "src,dst,m_I,m_P,m_IP\nalice,bob,0.5,0.3,0.2\n").unwrap();
    fs::write(p("lex.tsv"), "word\ttag\tpos\tneg\tneut\ngreat\ta\t0.75\t0\t0.25\n").unwrap();
    fs::write(p("msgs.tsv"), "alice\t1\tgreat/a\nalice\t2\tok/n\ncarol\t3\tgreat/a\n").unwrap();
    let (ep, lp, mp) = (p("edges.csv"), p("lex.tsv"), p("msgs.tsv"));
    let files = GraphFiles {
        edges: Some(&ep),
        nodes: None,
        messages: Some(&mp),
        lexicon: Some(&lp),
    };
    let (g, report) = load_graph(&files, LoadOptions::default()).unwrap();
    let alice = g.node(g.index_of("alice").unwrap()).opinion();
    assert!((alice.pos() - 0.375).abs() < 1e-12);
    assert_eq!(report.unknown_authors, 1);
    assert_eq!(report.neutral_fallbacks, 1);
}

#[test]
fn parse_errors_carry_location() {
    let dir = tempfile::tempdir().unwrap();
    let ep = dir.path().join("edges.csv");
    fs::write(&ep, "src,dst,m_I,m_P,m_IP\na,b,0.5,0.3,0.2\na,c,0.5,0.9,0.2\n").unwrap();
    let files = GraphFiles {
        edges: Some(&ep),
        ..Default::default()
    };
    match load_graph(&files, LoadOptions::default()) {
        Err(GraphError::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
    fs::write(&ep, "src,dst,m_I,m_P,m_IP\na,a,0.5,0.3,0.2\n").unwrap();
    assert!(load_graph(&files, LoadOptions::default()).is_err());
    fs::write(&ep, "from,to,x\na,b,0.5\n").unwrap();
    assert!(load_graph(&files, LoadOptions::default()).is_err());
    let missing = dir.path().join("nope.csv");
    let files = GraphFiles {
        edges: Some(&missing),
        ..Default::default()
    };
    assert!(matches!(
        load_graph(&files, LoadOptions::default()),
        Err(GraphError::Io { .. })
    ));
}
