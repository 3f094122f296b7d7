#![allow(dead_code)]

use evinf::graph::{indicator_from_value, GraphBuilder, InfluenceGraph};
use evinf::{MeasureKind, OpinionDistribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SLACK: f64 = 1e-9;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_opinion(rng: &mut ChaCha8Rng) -> OpinionDistribution {
    let a: f64 = rng.random();
    let b: f64 = rng.random();
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    OpinionDistribution::new(lo, hi - lo, 1.0 - hi).unwrap()
}

/// Random directed graph on `n` nodes with edge probability `density` and
/// uniform influences.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> InfluenceGraph {
    let mut b = GraphBuilder::new();
    for i in 0..n {
        let op = random_opinion(rng);
        b.add_node(&format!("n{i}"), op).unwrap();
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random::<f64>() < density {
                let x: f64 = rng.random();
                let bba = indicator_from_value(x, 0.0).unwrap().bba().clone();
                b.add_edge_idx(u, v, bba, None).unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// m({Pos}) of Dempster's combination of the two opinion simple BBAs.
pub fn closed_form_belief(p: f64, n: f64) -> (f64, f64) {
    let norm = 1.0 - p * n;
    (p * (1.0 - n) / norm, n * (1.0 - p) / norm)
}

/// Dense measure matrix with a unit diagonal.
pub fn measure_matrix(g: &InfluenceGraph, kind: MeasureKind) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for e in g.edges() {
        let (u, v) = (e.src(), e.dst());
        let ou = g.node(u).opinion();
        let ov = g.node(v).opinion();
        let (bu, _) = closed_form_belief(ou.pos(), ou.neg());
        let (bvp, bvn) = closed_form_belief(ov.pos(), ov.neg());
        let b = e.influence();
        a[u][v] = match kind {
            MeasureKind::Plain => b,
            MeasureKind::Scenario1Prob => ou.pos() * b,
            MeasureKind::Scenario1Belief => bu * b,
            MeasureKind::Scenario2Prob => ou.pos() * b * (1.0 - ov.neg()),
            MeasureKind::Scenario2Belief => bu * b * (1.0 - bvn),
            MeasureKind::Scenario3Prob => ou.pos() * b * (1.0 - ov.pos()),
            MeasureKind::Scenario3Belief => bu * b * (1.0 - bvp),
        };
    }
    a
}

/// Pair terms f(u, v) = (A²)[u][v].
pub fn pair_matrix(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n)
        .map(|u| (0..n).map(|v| (0..n).map(|x| a[u][x] * a[x][v]).sum()).collect())
        .collect()
}

/// σ from scratch. `cap` bounds Φ for nodes outside the set.
pub fn oracle_sigma(f: &[Vec<f64>], set: &[usize], cap: bool) -> f64 {
    (0..f.len())
        .map(|v| {
            if set.contains(&v) {
                1.0
            } else {
                let raw: f64 = set.iter().map(|&u| f[u][v]).sum();
                if cap {
                    raw.min(1.0)
                } else {
                    raw
                }
            }
        })
        .sum()
}

/// Plain greedy that re-evaluates σ for every candidate in every round.
/// Gains within `SLACK` of the best tie, and the smallest index wins.
pub fn naive_greedy(f: &[Vec<f64>], k: usize) -> Vec<usize> {
    let n = f.len();
    let mut set: Vec<usize> = Vec::new();
    let mut current = 0.0;
    for _ in 0..k.min(n) {
        let gains: Vec<(usize, f64)> = (0..n)
            .filter(|c| !set.contains(c))
            .map(|c| {
                let mut s = set.clone();
                s.push(c);
                (c, oracle_sigma(f, &s, true) - current)
            })
            .collect();
        let best = gains.iter().map(|&(_, g)| g).fold(f64::NEG_INFINITY, f64::max);
        let pick = gains
            .iter()
            .filter(|&&(_, g)| g >= best - SLACK)
            .map(|&(c, _)| c)
            .min()
            .unwrap();
        set.push(pick);
        current = oracle_sigma(f, &set, true);
    }
    set
}

/// Six-node fixture: 0→1, 0→2, 1→3, 2→3, 3→4; node 5 is isolated.
/// Nodes reachable from 0: {0, 1, 2, 3, 4}.
pub fn six_node_fixture() -> InfluenceGraph {
    let mut b = GraphBuilder::new();
    for i in 0..6 {
        b.add_node(&format!("v{i}"), OpinionDistribution::NEUTRAL).unwrap();
    }
    for (u, v) in [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4)] {
        let bba = indicator_from_value(0.5, 0.0).unwrap().bba().clone();
        b.add_edge_idx(u, v, bba, None).unwrap();
    }
    b.build().unwrap()
}

/// Runs the command line in-process and returns its exit code.
pub fn cli(args: &[&str]) -> i32 {
    let mut argv = vec!["evinf"];
    argv.extend_from_slice(args);
    evinf::cli::run_from(argv)
}

/// Every file in `dir` with its bytes, sorted by name.
pub fn snapshot(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

/// Runs a command into `first`, reruns its manifest into `second`, and
/// reports whether both directories hold identical bytes.
pub fn rerun_matches(cmd: &str, args: &[&str], first: &std::path::Path, second: &std::path::Path) -> bool {
    let f = first.to_str().unwrap();
    let mut a = vec![cmd, "--out", f];
    a.extend_from_slice(args);
    if cli(&a) != 0 {
        return false;
    }
    let manifest = first.join("manifest.toml");
    let m = manifest.to_str().unwrap();
    if cli(&[cmd, "--config", m, "--out", second.to_str().unwrap()]) != 0 {
        return false;
    }
    snapshot(first) == snapshot(second)
}
