//! Influence spread objective and lazy greedy (CELF) seed selection.
//!
//! For a seed set S and a node v, the influence given to S for influencing v is
//!
//! ```text
//! Φ(S, v) = 1                                             if v ∈ S
//!         = Σ_{u ∈ S} Σ_{x ∈ D_in(v) ∪ {v}} Inf(u,x)·Inf(x,v)   otherwise
//! ```
//!
//! with Inf(w, w) = 1 and Inf = 0 on non-edges, and σ(S) = Σ_v Φ(S, v).
//! Expanding the inner sum, the pair contribution of u to v ≠ u is
//! `f(u, v) = 2·Inf(u,v) + Σ_x Inf(u,x)·Inf(x,v)` over two-hop paths u → x → v:
//! a direct edge is counted once through x = v and once through x = u.
//! [`SpreadOptions::dedupe_direct`] drops the x = u copy.
//!
//! The raw sum is not bounded by the membership value 1, so σ can decrease
//! when a heavily influenced node joins S. [`SpreadOptions::saturate`] caps
//! Φ(S, v) at 1 for v ∉ S, which makes σ monotone as well as submodular; it is
//! on by default. With `saturate = false` the objective is the uncapped sum,
//! which is still submodular, so lazy evaluation stays exact.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, InfluenceGraph};
use crate::measures::{edge_weights, MeasureKind};

/// Gains closer than this to the round's best are treated as ties.
pub const TIE_EPSILON: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MaximizeError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("node index {0} is out of range")]
    NodeOutOfRange(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpreadOptions {
    /// Count a direct edge (u, v) once instead of twice.
    pub dedupe_direct: bool,
    /// Cap Φ(S, v) at 1 for v ∉ S.
    pub saturate: bool,
}

impl Default for SpreadOptions {
    fn default() -> Self {
        SpreadOptions {
            dedupe_direct: false,
            saturate: true,
        }
    }
}

impl SpreadOptions {
    /// The definition read literally: double-counted direct edges, no cap.
    pub const LITERAL: SpreadOptions = SpreadOptions {
        dedupe_direct: false,
        saturate: false,
    };

    fn cap(&self, x: f64) -> f64 {
        if self.saturate {
            x.min(1.0)
        } else {
            x
        }
    }
}

/// One selected seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub rank: usize,
    pub node: String,
    pub gain: f64,
    pub sigma: f64,
}

/// Ordered seed set with per-step gains and cumulative objective values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedResult {
    /// Measure name, or the baseline model name (`cd`, `oc`).
    pub measure: String,
    pub k: usize,
    pub seeds: Vec<SeedEntry>,
    /// Wall-clock seconds; `None` when timing is disabled.
    pub elapsed_seconds: Option<f64>,
}

impl SeedResult {
    pub fn empty(measure: impl Into<String>) -> Self {
        SeedResult {
            measure: measure.into(),
            k: 0,
            seeds: Vec::new(),
            elapsed_seconds: None,
        }
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &str> {
        self.seeds.iter().map(|s| s.node.as_str())
    }

    pub fn marginal_gains(&self) -> Vec<f64> {
        self.seeds.iter().map(|s| s.gain).collect()
    }

    pub fn sigma_values(&self) -> Vec<f64> {
        self.seeds.iter().map(|s| s.sigma).collect()
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }
}

/// Pair contribution f(u, v) of seed u to node v ≠ u, straight from the
/// definition: iterates x over D_in(v) ∪ {v}.
pub fn pair_influence(g: &InfluenceGraph, u: usize, v: usize, kind: MeasureKind, opts: SpreadOptions) -> f64 {
    let inf = |a: usize, b: usize| -> f64 {
        if a == b {
            1.0
        } else {
            crate::measures::influence(g, a, b, kind)
        }
    };
    let mut total = inf(u, v) * inf(v, v);
    for x in g.in_neighbors(v) {
        if x == u && opts.dedupe_direct {
            continue;
        }
        total += inf(u, x) * inf(x, v);
    }
    total
}

fn check(g: &InfluenceGraph, idx: usize) -> Result<(), MaximizeError> {
    if idx < g.node_count() {
        Ok(())
    } else {
        Err(MaximizeError::NodeOutOfRange(idx))
    }
}

/// Φ(S, v) by dense indexes.
pub fn phi(
    g: &InfluenceGraph,
    seeds: &[usize],
    v: usize,
    kind: MeasureKind,
    opts: SpreadOptions,
) -> Result<f64, MaximizeError> {
    check(g, v)?;
    for &u in seeds {
        check(g, u)?;
    }
    if seeds.contains(&v) {
        return Ok(1.0);
    }
    let raw: f64 = seeds.iter().map(|&u| pair_influence(g, u, v, kind, opts)).sum();
    Ok(opts.cap(raw))
}

/// σ(S) = Σ_v Φ(S, v).
pub fn sigma(
    g: &InfluenceGraph,
    seeds: &[usize],
    kind: MeasureKind,
    opts: SpreadOptions,
) -> Result<f64, MaximizeError> {
    (0..g.node_count()).map(|v| phi(g, seeds, v, kind, opts)).sum()
}

/// σ(S) with seeds given by node id.
pub fn sigma_by_id(
    g: &InfluenceGraph,
    seeds: &[&str],
    kind: MeasureKind,
    opts: SpreadOptions,
) -> Result<f64, MaximizeError> {
    let idx = seeds.iter().map(|s| g.index_of(s)).collect::<Result<Vec<_>, _>>()?;
    sigma(g, &idx, kind, opts)
}

/// Sparse rows f(u, ·) for every node, built from the edge list.
///
/// Each row is sorted by target and excludes u itself. Terms are summed in a
/// fixed order so rows are identical regardless of thread count.
pub struct InfluenceRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl InfluenceRows {
    pub fn new(g: &InfluenceGraph, kind: MeasureKind, opts: SpreadOptions) -> Self {
        let w = edge_weights(g, kind);
        let rows = (0..g.node_count())
            .into_par_iter()
            .map(|u| {
                let mut terms: Vec<(usize, f64)> = Vec::new();
                for &e in g.out_edges(u) {
                    let a = w[e];
                    if a == 0.0 {
                        continue;
                    }
                    let x = g.edge(e).dst();
                    terms.push((x, a));
                    if !opts.dedupe_direct {
                        terms.push((x, a));
                    }
                    for &e2 in g.out_edges(x) {
                        let v = g.edge(e2).dst();
                        if v != u && w[e2] != 0.0 {
                            terms.push((v, a * w[e2]));
                        }
                    }
                }
                terms.sort_by_key(|&(v, _)| v);
                let mut row: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
                for (v, x) in terms {
                    match row.last_mut() {
                        Some((lv, lx)) if *lv == v => *lx += x,
                        _ => row.push((v, x)),
                    }
                }
                row
            })
            .collect();
        InfluenceRows { rows }
    }

    pub fn row(&self, u: usize) -> &[(usize, f64)] {
        &self.rows[u]
    }
}

/// Incremental σ state: raw Φ accumulators and membership flags.
struct SpreadState<'a> {
    rows: &'a InfluenceRows,
    opts: SpreadOptions,
    acc: Vec<f64>,
    in_set: Vec<bool>,
}

impl<'a> SpreadState<'a> {
    fn new(rows: &'a InfluenceRows, n: usize, opts: SpreadOptions) -> Self {
        SpreadState {
            rows,
            opts,
            acc: vec![0.0; n],
            in_set: vec![false; n],
        }
    }
}

impl LazyObjective for SpreadState<'_> {
    fn universe(&self) -> usize {
        self.acc.len()
    }

    fn gain(&self, w: usize) -> f64 {
        let mut g = 1.0 - self.opts.cap(self.acc[w]);
        for &(v, f) in self.rows.row(w) {
            if self.in_set[v] {
                continue;
            }
            let before = self.acc[v];
            g += self.opts.cap(before + f) - self.opts.cap(before);
        }
        g
    }

    fn commit(&mut self, w: usize, _gain: f64) {
        for &(v, f) in self.rows.row(w) {
            self.acc[v] += f;
        }
        self.in_set[w] = true;
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    gain: f64,
    node: usize,
    round: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Max-heap: larger gain first, then smaller index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.gain
            .total_cmp(&other.gain)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// An objective that can report marginal gains against its current set and
/// absorb a selected element. Implementations must be submodular for lazy
/// evaluation to be exact.
pub(crate) trait LazyObjective: Sync {
    fn universe(&self) -> usize;
    fn gain(&self, w: usize) -> f64;
    fn commit(&mut self, w: usize, gain: f64);
}

/// Lazy greedy (CELF). Returns `(element, gain)` per round.
///
/// Each round selects the element with the largest marginal gain; among gains
/// within [`TIE_EPSILON`] of the best, the smallest index wins.
pub(crate) fn lazy_greedy<O: LazyObjective>(obj: &mut O, k: usize) -> Vec<(usize, f64)> {
    let n = obj.universe();
    let k = k.min(n);
    let mut picks = Vec::with_capacity(k);
    if k == 0 {
        return picks;
    }
    let initial: Vec<f64> = {
        let o: &O = obj;
        (0..n).into_par_iter().map(|w| o.gain(w)).collect()
    };
    let mut heap: BinaryHeap<Candidate> = initial
        .into_iter()
        .enumerate()
        .map(|(node, gain)| Candidate { gain, node, round: 0 })
        .collect();

    for round in 0..k {
        // Refresh until the top is current, then pull every candidate whose
        // bound could still tie with it.
        let mut fresh: Vec<Candidate> = Vec::new();
        let mut best = f64::NEG_INFINITY;
        while let Some(top) = heap.peek().copied() {
            if !fresh.is_empty() && top.gain < best - TIE_EPSILON {
                break;
            }
            heap.pop();
            if top.round == round {
                best = best.max(top.gain);
                fresh.push(top);
            } else {
                heap.push(Candidate {
                    gain: obj.gain(top.node),
                    node: top.node,
                    round,
                });
            }
        }
        let chosen = fresh
            .iter()
            .filter(|c| c.gain >= best - TIE_EPSILON)
            .min_by_key(|c| c.node)
            .copied()
            .expect("heap holds every unselected element");
        for c in fresh {
            if c.node != chosen.node {
                heap.push(c);
            }
        }
        obj.commit(chosen.node, chosen.gain);
        picks.push((chosen.node, chosen.gain));
    }
    picks
}

/// Options for [`maximize_with`].
#[derive(Debug, Clone, Copy, Default)]
pub struct MaximizeOptions {
    pub spread: SpreadOptions,
    /// Record wall-clock time in the result.
    pub timing: bool,
}

/// CELF with default spread options and timing enabled.
pub fn maximize(g: &InfluenceGraph, k: usize, kind: MeasureKind) -> SeedResult {
    maximize_with(
        g,
        k,
        kind,
        MaximizeOptions {
            spread: SpreadOptions::default(),
            timing: true,
        },
    )
}

pub(crate) fn truncate_k(k: usize, n: usize) -> usize {
    if k > n {
        log::warn!("k = {k} exceeds the {n} nodes of the graph; truncating");
        n
    } else {
        k
    }
}

/// Lazy greedy (CELF) selection of up to `k` seeds maximizing σ.
///
/// Produces the same seeds in the same order as full re-evaluation greedy.
pub fn maximize_with(g: &InfluenceGraph, k: usize, kind: MeasureKind, opts: MaximizeOptions) -> SeedResult {
    let start = Instant::now();
    let n = g.node_count();
    let mut result = SeedResult::empty(kind.name());
    result.k = truncate_k(k, n);
    if result.k > 0 {
        let rows = InfluenceRows::new(g, kind, opts.spread);
        let mut state = SpreadState::new(&rows, n, opts.spread);
        for (rank, (node, gain)) in lazy_greedy(&mut state, result.k).into_iter().enumerate() {
            result.seeds.push(SeedEntry {
                rank: rank + 1,
                node: g.id_of(node).to_string(),
                gain,
                sigma: 0.0,
            });
        }
        let mut running = 0.0;
        for s in &mut result.seeds {
            running += s.gain;
            s.sigma = running;
        }
    }
    if opts.timing {
        result.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{indicator_from_value, GraphBuilder};
    use crate::opinion::OpinionDistribution;

    fn path_graph() -> InfluenceGraph {
        let mut b = GraphBuilder::new();
        for id in ["u", "x", "v"] {
            b.add_node(id, OpinionDistribution::NEUTRAL).unwrap();
        }
        b.add_edge("u", "x", indicator_from_value(0.5, 0.0).unwrap().bba().clone())
            .unwrap();
        b.add_edge("x", "v", indicator_from_value(0.4, 0.0).unwrap().bba().clone())
            .unwrap();
        b.build().unwrap()
    }

    #[test]
    fn phi_examples() {
        let g = path_graph();
        let p = MeasureKind::Plain;
        let o = SpreadOptions::LITERAL;
        assert_eq!(phi(&g, &[0], 0, p, o).unwrap(), 1.0);
        assert_eq!(phi(&g, &[], 2, p, o).unwrap(), 0.0);
        assert!((phi(&g, &[0], 2, p, o).unwrap() - 0.2).abs() < 1e-15);
        assert!((phi(&g, &[0], 1, p, o).unwrap() - 1.0).abs() < 1e-15);
        assert!(phi(&g, &[7], 1, p, o).is_err());
    }

    #[test]
    fn sigma_examples() {
        let g = path_graph();
        for o in [SpreadOptions::LITERAL, SpreadOptions::default()] {
            assert_eq!(sigma(&g, &[], MeasureKind::Plain, o).unwrap(), 0.0);
            assert!((sigma(&g, &[0], MeasureKind::Plain, o).unwrap() - 2.2).abs() < 1e-12);
            assert_eq!(sigma(&g, &[0, 1, 2], MeasureKind::Plain, o).unwrap(), 3.0);
        }
        let dd = SpreadOptions {
            dedupe_direct: true,
            saturate: false,
        };
        assert!((sigma(&g, &[0], MeasureKind::Plain, dd).unwrap() - 1.7).abs() < 1e-12);
    }

    #[test]
    fn literal_form_is_not_monotone() {
        // u -> w with Inf 0.8: Φ({u}, w) = 1.6 > 1 = Φ({u, w}, w).
        let mut b = GraphBuilder::new();
        b.add_node("u", OpinionDistribution::NEUTRAL).unwrap();
        b.add_node("w", OpinionDistribution::NEUTRAL).unwrap();
        b.add_edge("u", "w", indicator_from_value(0.8, 0.0).unwrap().bba().clone())
            .unwrap();
        let g = b.build().unwrap();
        let lit = SpreadOptions::LITERAL;
        let s1 = sigma(&g, &[0], MeasureKind::Plain, lit).unwrap();
        let s2 = sigma(&g, &[0, 1], MeasureKind::Plain, lit).unwrap();
        assert!(s2 < s1);
        let sat = SpreadOptions::default();
        assert!(
            sigma(&g, &[0, 1], MeasureKind::Plain, sat).unwrap() >= sigma(&g, &[0], MeasureKind::Plain, sat).unwrap()
        );
    }

    #[test]
    fn rows_match_pair_influence() {
        let g = path_graph();
        for o in [
            SpreadOptions::LITERAL,
            SpreadOptions {
                dedupe_direct: true,
                saturate: false,
            },
        ] {
            let rows = InfluenceRows::new(&g, MeasureKind::Plain, o);
            for u in 0..3 {
                for v in 0..3 {
                    if u == v {
                        continue;
                    }
                    let r = rows.row(u).iter().find(|e| e.0 == v).map(|e| e.1).unwrap_or(0.0);
                    assert!((r - pair_influence(&g, u, v, MeasureKind::Plain, o)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn maximize_edges() {
        let g = path_graph();
        let r0 = maximize(&g, 0, MeasureKind::Plain);
        assert!(r0.is_empty());
        let all = maximize(&g, 10, MeasureKind::Plain);
        assert_eq!(all.k, 3);
        let mut ids: Vec<&str> = all.node_ids().collect();
        ids.sort();
        assert_eq!(ids, ["u", "v", "x"]);
        assert!((all.seeds.last().unwrap().sigma - 3.0).abs() < 1e-12);
        assert_eq!(all.seeds[0].node, "u");
        assert!(all.elapsed_seconds.is_some());
    }
}
