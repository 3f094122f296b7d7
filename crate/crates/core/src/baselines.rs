//! Comparison models.
//!
//! - Monte-Carlo cascade simulation under the independent cascade (ICM),
//!   weighted cascade (WC) and linear threshold (LTM) models.
//! - Credit distribution (CD): influence credit read off an action log, then
//!   maximized with lazy greedy search.
//! - Opinion-based cascading (OC): signed opinions, potential-marginal-gain
//!   pruning and threshold activation with opinion updates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ActionRecord, InfluenceGraph};
use crate::maximizer::{lazy_greedy, truncate_k, LazyObjective, SeedEntry, SeedResult};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("invalid cascade config: {0}")]
    Config(String),
    #[error("node index {0} is out of range")]
    NodeOutOfRange(usize),
}

pub type Result<T, E = BaselineError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CascadeModel {
    Icm,
    Wc,
    Ltm,
}

impl FromStr for CascadeModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "icm" => Ok(CascadeModel::Icm),
            "wc" => Ok(CascadeModel::Wc),
            "ltm" => Ok(CascadeModel::Ltm),
            other => Err(format!("unknown cascade model `{other}`")),
        }
    }
}

impl fmt::Display for CascadeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CascadeModel::Icm => "icm",
            CascadeModel::Wc => "wc",
            CascadeModel::Ltm => "ltm",
        })
    }
}

/// Where ICM probabilities and LTM weights come from. WC ignores this.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeValues {
    /// The same value on every edge.
    Constant(f64),
    /// m_(u,v)^Ω({I}) of each edge.
    Influence,
    /// Explicit values indexed by edge id.
    PerEdge(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeConfig {
    pub model: CascadeModel,
    pub edge_values: EdgeValues,
    pub monte_carlo_runs: usize,
    pub rng_seed: u64,
    /// WC only: use 1 / in-degree(v) instead of 1 / out-degree(u).
    pub wc_target_indegree: bool,
}

impl CascadeConfig {
    pub fn new(model: CascadeModel, edge_values: EdgeValues) -> Self {
        CascadeConfig {
            model,
            edge_values,
            monte_carlo_runs: 1000,
            rng_seed: 0,
            wc_target_indegree: false,
        }
    }

    /// Per-edge activation probability (ICM, WC) or weight (LTM), validated.
    pub fn edge_probabilities(&self, g: &InfluenceGraph) -> Result<Vec<f64>> {
        if self.monte_carlo_runs == 0 {
            return Err(BaselineError::Config("monte_carlo_runs must be at least 1".into()));
        }
        let values: Vec<f64> = match (&self.model, &self.edge_values) {
            (CascadeModel::Wc, _) => g
                .edges()
                .iter()
                .map(|e| {
                    let d = if self.wc_target_indegree {
                        g.in_degree(e.dst())
                    } else {
                        g.out_degree(e.src())
                    };
                    1.0 / d as f64
                })
                .collect(),
            (_, EdgeValues::Constant(p)) => vec![*p; g.edge_count()],
            (_, EdgeValues::Influence) => g.edges().iter().map(|e| e.influence()).collect(),
            (_, EdgeValues::PerEdge(v)) => {
                if v.len() != g.edge_count() {
                    return Err(BaselineError::Config(format!(
                        "{} edge values for {} edges",
                        v.len(),
                        g.edge_count()
                    )));
                }
                v.clone()
            }
        };
        if let Some(bad) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(BaselineError::Config(format!("edge value {bad} is outside [0, 1]")));
        }
        if self.model == CascadeModel::Ltm {
            for v in 0..g.node_count() {
                let total: f64 = g.in_edges(v).iter().map(|&e| values[e]).sum();
                if total > 1.0 + 1e-9 {
                    return Err(BaselineError::Config(format!(
                        "LTM weights into `{}` sum to {total} > 1",
                        g.id_of(v)
                    )));
                }
            }
        }
        Ok(values)
    }
}

/// Outcome of a single simulated cascade.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeTrace {
    pub active: Vec<bool>,
    /// Cumulative active count after each round; entry 0 is |S|.
    pub round_sizes: Vec<usize>,
}

impl CascadeTrace {
    pub fn active_count(&self) -> usize {
        self.round_sizes.last().copied().unwrap_or(0)
    }
}

fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

fn check_seeds(g: &InfluenceGraph, seeds: &[usize]) -> Result<()> {
    match seeds.iter().find(|&&s| s >= g.node_count()) {
        Some(&s) => Err(BaselineError::NodeOutOfRange(s)),
        None => Ok(()),
    }
}

fn simulate_with(
    g: &InfluenceGraph,
    seeds: &[usize],
    model: CascadeModel,
    probs: &[f64],
    rng: &mut ChaCha8Rng,
) -> CascadeTrace {
    let n = g.node_count();
    let mut active = vec![false; n];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in seeds {
        if !active[s] {
            active[s] = true;
            frontier.push(s);
        }
    }
    let mut count = frontier.len();
    let mut round_sizes = vec![count];
    match model {
        CascadeModel::Icm | CascadeModel::Wc => {
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for &u in &frontier {
                    for &e in g.out_edges(u) {
                        let v = g.edge(e).dst();
                        if !active[v] && rng.random::<f64>() < probs[e] {
                            active[v] = true;
                            next.push(v);
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                count += next.len();
                round_sizes.push(count);
                frontier = next;
            }
        }
        CascadeModel::Ltm => {
            let theta: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let mut incoming = vec![0.0; n];
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for &u in &frontier {
                    for &e in g.out_edges(u) {
                        let v = g.edge(e).dst();
                        if active[v] {
                            continue;
                        }
                        incoming[v] += probs[e];
                        if incoming[v] >= theta[v] {
                            active[v] = true;
                            next.push(v);
                        }
                    }
                }
                if next.is_empty() {
                    break;
                }
                count += next.len();
                round_sizes.push(count);
                frontier = next;
            }
        }
    }
    CascadeTrace { active, round_sizes }
}

/// One cascade, using the `run`-th random stream of the config's seed.
pub fn simulate_once(g: &InfluenceGraph, seeds: &[usize], cfg: &CascadeConfig, run: usize) -> Result<CascadeTrace> {
    check_seeds(g, seeds)?;
    let probs = cfg.edge_probabilities(g)?;
    Ok(simulate_with(
        g,
        seeds,
        cfg.model,
        &probs,
        &mut run_rng(cfg.rng_seed, run),
    ))
}

/// Monte-Carlo estimate of σ_M(S): mean final active-set size.
///
/// Runs use independent random streams and are summed in run order, so the
/// result does not depend on the number of worker threads.
pub fn cascade_spread(g: &InfluenceGraph, seeds: &[usize], cfg: &CascadeConfig) -> Result<f64> {
    check_seeds(g, seeds)?;
    let probs = cfg.edge_probabilities(g)?;
    let sizes: Vec<usize> = (0..cfg.monte_carlo_runs)
        .into_par_iter()
        .map(|run| simulate_with(g, seeds, cfg.model, &probs, &mut run_rng(cfg.rng_seed, run)).active_count())
        .collect();
    Ok(sizes.iter().sum::<usize>() as f64 / cfg.monte_carlo_runs as f64)
}

/// Direct and total influence credits extracted from an action log.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CreditTable {
    /// γ_{v,u}(a), keyed by (action, influencer v, influenced u).
    pub direct: BTreeMap<(String, usize, usize), f64>,
    /// Γ_{v,u}(a), keyed the same way.
    pub total: BTreeMap<(String, usize, usize), f64>,
    /// (user, action) pairs present in the log, in log order.
    pub events: Vec<(usize, String)>,
    /// A_u: number of distinct actions performed by each node.
    pub actions_per_node: Vec<usize>,
}

impl CreditTable {
    pub fn direct_credit(&self, action: &str, v: usize, u: usize) -> f64 {
        self.direct.get(&(action.to_string(), v, u)).copied().unwrap_or(0.0)
    }

    pub fn total_credit(&self, action: &str, v: usize, u: usize) -> f64 {
        self.total.get(&(action.to_string(), v, u)).copied().unwrap_or(0.0)
    }

    /// Σ_u Σ_a Γ_{v,u}(a) / A_u: the credit a node collects on its own.
    pub fn node_credit(&self, v: usize) -> f64 {
        self.total
            .iter()
            .filter(|((_, src, _), _)| *src == v)
            .map(|((_, _, u), c)| c / self.actions_per_node[*u].max(1) as f64)
            .sum()
    }
}

/// Scans an action log and distributes influence credit.
///
/// When u performs action a at time t, every in-neighbor v of u that performed
/// a at some t' < t with t − t' ≤ `tau` is a candidate influencer and receives
/// direct credit 1 / |candidates|. Total credit follows influence chains:
/// Γ_{v,u}(a) = γ_{v,u}(a) + Σ_w Γ_{v,w}(a) · γ_{w,u}(a).
///
/// Only the first performance of an action by a user counts. Records whose
/// user is not in the graph are ignored. `tau = None` means no window.
pub fn cd_assign_credits(g: &InfluenceGraph, log: &[ActionRecord], tau: Option<i64>) -> CreditTable {
    let n = g.node_count();
    let mut table = CreditTable {
        actions_per_node: vec![0; n],
        ..Default::default()
    };
    // action -> user -> first time
    let mut by_action: BTreeMap<&str, HashMap<usize, i64>> = BTreeMap::new();
    for rec in log {
        let Ok(u) = g.index_of(&rec.user) else {
            continue;
        };
        let first = by_action.entry(rec.action.as_str()).or_default();
        match first.get_mut(&u) {
            Some(t) if *t <= rec.time => {}
            Some(t) => *t = rec.time,
            None => {
                first.insert(u, rec.time);
            }
        }
    }
    for (action, times) in &by_action {
        let mut performers: Vec<(i64, usize)> = times.iter().map(|(&u, &t)| (t, u)).collect();
        performers.sort_unstable();
        for &(_, u) in &performers {
            table.actions_per_node[u] += 1;
            table.events.push((u, action.to_string()));
        }
        // Γ_{·,w}(a) for performers already processed.
        let mut totals: HashMap<usize, BTreeMap<usize, f64>> = HashMap::new();
        for &(t, u) in &performers {
            let candidates: Vec<usize> = g
                .in_neighbors(u)
                .filter(|v| match times.get(v) {
                    Some(&tv) => tv < t && tau.is_none_or(|w| t - tv <= w),
                    None => false,
                })
                .collect();
            let mut row: BTreeMap<usize, f64> = BTreeMap::new();
            if !candidates.is_empty() {
                let gamma = 1.0 / candidates.len() as f64;
                for &v in &candidates {
                    table.direct.insert((action.to_string(), v, u), gamma);
                    *row.entry(v).or_insert(0.0) += gamma;
                    if let Some(up) = totals.get(&v) {
                        for (&src, &c) in up {
                            *row.entry(src).or_insert(0.0) += c * gamma;
                        }
                    }
                }
            }
            for (&src, &c) in &row {
                table.total.insert((action.to_string(), src, u), c);
            }
            totals.insert(u, row);
        }
    }
    table
}

/// CD objective state: per-event accumulated credit from the current seed set.
struct CreditState {
    /// Per node: events it performed.
    own: Vec<Vec<usize>>,
    /// Per node: (event, credit) pairs it earns as an influencer.
    rows: Vec<Vec<(usize, f64)>>,
    event_owner: Vec<usize>,
    event_weight: Vec<f64>,
    acc: Vec<f64>,
    in_set: Vec<bool>,
}

impl CreditState {
    fn new(credits: &CreditTable) -> Self {
        let n = credits.actions_per_node.len();
        let mut own = vec![Vec::new(); n];
        let mut event_of: HashMap<(usize, &str), usize> = HashMap::new();
        let mut event_owner = Vec::with_capacity(credits.events.len());
        let mut event_weight = Vec::with_capacity(credits.events.len());
        for (i, (u, a)) in credits.events.iter().enumerate() {
            own[*u].push(i);
            event_of.insert((*u, a.as_str()), i);
            event_owner.push(*u);
            event_weight.push(1.0 / credits.actions_per_node[*u].max(1) as f64);
        }
        let mut rows = vec![Vec::new(); n];
        for ((a, v, u), &c) in &credits.total {
            if let Some(&e) = event_of.get(&(*u, a.as_str())) {
                rows[*v].push((e, c));
            }
        }
        let events = event_owner.len();
        CreditState {
            own,
            rows,
            event_owner,
            event_weight,
            acc: vec![0.0; events],
            in_set: vec![false; n],
        }
    }
}

impl LazyObjective for CreditState {
    fn universe(&self) -> usize {
        self.in_set.len()
    }

    fn gain(&self, w: usize) -> f64 {
        let mut g = 0.0;
        for &e in &self.own[w] {
            g += (1.0 - self.acc[e].min(1.0)) * self.event_weight[e];
        }
        for &(e, c) in &self.rows[w] {
            if self.in_set[self.event_owner[e]] {
                continue;
            }
            let before = self.acc[e];
            g += ((before + c).min(1.0) - before.min(1.0)) * self.event_weight[e];
        }
        g
    }

    fn commit(&mut self, w: usize, _gain: f64) {
        for &(e, c) in &self.rows[w] {
            self.acc[e] += c;
        }
        self.in_set[w] = true;
    }
}

/// Greedy (CELF) maximization of the credit a seed set collects.
///
/// A seed earns full credit for its own actions; for any other user u and
/// action a the seed set collects min(1, Σ_{v∈S} Γ_{v,u}(a)), weighted by
/// 1 / A_u. Once an action is fully credited it contributes no further gain.
pub fn cd_maximize(g: &InfluenceGraph, credits: &CreditTable, k: usize, timing: bool) -> SeedResult {
    let start = Instant::now();
    let mut result = SeedResult::empty("cd");
    result.k = truncate_k(k, g.node_count());
    let mut state = CreditState::new(credits);
    let mut running = 0.0;
    for (rank, (node, gain)) in lazy_greedy(&mut state, result.k).into_iter().enumerate() {
        running += gain;
        result.seeds.push(SeedEntry {
            rank: rank + 1,
            node: g.id_of(node).to_string(),
            gain,
            sigma: running,
        });
    }
    if timing {
        result.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    result
}

/// Guard for θ_u = 0 in the potential marginal gain.
pub const OC_THETA_EPSILON: f64 = 1e-6;

/// Opinion-based cascading state.
#[derive(Debug, Clone, PartialEq)]
pub struct OcState {
    /// Signed opinion Op(v).
    pub op: Vec<f64>,
    pub active: Vec<bool>,
    pub theta: Vec<f64>,
    /// w(u, v) indexed by edge id.
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OcWeights {
    /// w(u, v) = 1 / in-degree(v).
    #[default]
    InDegree,
    /// w(u, v) = m_(u,v)^Ω({I}).
    Influence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcConfig {
    /// Fraction of nodes with the smallest PMG dropped before selection.
    pub prune_fraction: f64,
    pub weights: OcWeights,
    pub rng_seed: u64,
}

impl Default for OcConfig {
    fn default() -> Self {
        OcConfig {
            prune_fraction: 0.5,
            weights: OcWeights::InDegree,
            rng_seed: 0,
        }
    }
}

impl OcState {
    /// Op(v) = Pr(Pos) − Pr(Neg); thresholds uniform on [0, 1) from the seed.
    pub fn from_graph(g: &InfluenceGraph, cfg: &OcConfig) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        let theta = (0..g.node_count()).map(|_| rng.random::<f64>()).collect();
        let weights = g
            .edges()
            .iter()
            .map(|e| match cfg.weights {
                OcWeights::InDegree => 1.0 / g.in_degree(e.dst()) as f64,
                OcWeights::Influence => e.influence(),
            })
            .collect();
        OcState {
            op: g
                .nodes()
                .iter()
                .map(|n| n.opinion().pos() - n.opinion().neg())
                .collect(),
            active: vec![false; g.node_count()],
            theta,
            weights,
        }
    }
}

/// Potential marginal gain of `v`.
pub fn oc_pmg(state: &OcState, g: &InfluenceGraph, v: usize) -> f64 {
    let opv = state.op[v];
    let mut total = opv;
    for &e in g.out_edges(v) {
        let u = g.edge(e).dst();
        let w = state.weights[e];
        let term = state.op[u] + opv * w;
        if state.active[u] {
            total += term;
        } else {
            let theta = if state.theta[u] == 0.0 {
                OC_THETA_EPSILON
            } else {
                state.theta[u]
            };
            total += w / theta * term;
        }
    }
    total
}

/// One synchronous round: threshold activation, then opinion update of every
/// node from its active in-neighbors.
pub fn oc_step(state: &OcState, g: &InfluenceGraph) -> OcState {
    let n = g.node_count();
    let mut next = state.clone();
    for v in 0..n {
        if state.active[v] {
            continue;
        }
        let incoming: f64 = g
            .in_edges(v)
            .iter()
            .filter(|&&e| state.active[g.edge(e).src()])
            .map(|&e| state.weights[e])
            .sum();
        if g.in_degree(v) > 0 && incoming > 0.0 && incoming >= state.theta[v] {
            next.active[v] = true;
        }
    }
    for v in 0..n {
        let delta: f64 = g
            .in_edges(v)
            .iter()
            .filter(|&&e| next.active[g.edge(e).src()])
            .map(|&e| state.op[g.edge(e).src()] * state.weights[e])
            .sum();
        next.op[v] = state.op[v] + delta;
    }
    next
}

/// OC seed selection.
///
/// Nodes in the bottom `prune_fraction` by initial PMG are dropped. Each
/// iteration picks the remaining candidate with the largest current PMG
/// (smallest index on ties), activates it and applies [`oc_step`].
pub fn oc_maximize(g: &InfluenceGraph, k: usize, cfg: &OcConfig, timing: bool) -> SeedResult {
    let start = Instant::now();
    let n = g.node_count();
    let mut result = SeedResult::empty("oc");
    result.k = truncate_k(k, n);
    let mut state = OcState::from_graph(g, cfg);

    let mut ranked: Vec<(f64, usize)> = (0..n).map(|v| (oc_pmg(&state, g, v), v)).collect();
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let keep = ((n as f64) * (1.0 - cfg.prune_fraction.clamp(0.0, 1.0))).ceil() as usize;
    let keep = keep.max(result.k).min(n);
    let mut candidates: Vec<usize> = ranked[..keep].iter().map(|&(_, v)| v).collect();
    candidates.sort_unstable();

    for rank in 0..result.k {
        let (pos, gain) = candidates
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, oc_pmg(&state, g, v)))
            .fold(None, |best: Option<(usize, f64)>, (i, p)| match best {
                Some((_, bp)) if bp >= p => best,
                _ => Some((i, p)),
            })
            .expect("at least k candidates are kept");
        let v = candidates.remove(pos);
        state.active[v] = true;
        state = oc_step(&state, g);
        result.seeds.push(SeedEntry {
            rank: rank + 1,
            node: g.id_of(v).to_string(),
            gain,
            sigma: state.active.iter().filter(|&&a| a).count() as f64,
        });
    }
    if timing {
        result.elapsed_seconds = Some(start.elapsed().as_secs_f64());
    }
    result
}
