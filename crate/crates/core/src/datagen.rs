//! Synthetic networks with known influencers.
//!
//! Generation runs in fixed steps from a single seed:
//!
//! 1. a directed topology (preferential attachment by default, or a supplied
//!    edge list);
//! 2. influencers are the nodes with out-degree at or above the threshold;
//! 3. edges leaving an influencer get influence uniform on [min_influence, 1],
//!    all other edges uniform on [0, min_influence);
//! 4. a random subset of influencers becomes the positive influencers, with
//!    Pr(Pos) uniform on [min_pos_opinion, 1];
//! 5. the positive influencers are split at random into two halves; the
//!    out-neighbors of the first half get Pr(Pos) uniform on
//!    [min_neighbor_pos, 1], those of the second half Pr(Neg) uniform on
//!    [min_neighbor_neg, 1].
//!
//! Everyone else keeps a background opinion with Pr(Pos) below
//! min_pos_opinion.

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{indicator_from_value, GraphBuilder, GraphError, InfluenceGraph};
use crate::opinion::OpinionDistribution;

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("invalid generator parameter: {0}")]
    InvalidParams(String),
    #[error("no node reaches the out-degree threshold {0}")]
    NoInfluencers(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Base topology of a generated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Topology {
    /// Directed preferential attachment: each edge picks its source with
    /// probability ∝ out-degree + `out_bias` and its target ∝ in-degree +
    /// `in_bias`.
    PreferentialAttachment {
        nodes: usize,
        edges: usize,
        out_bias: f64,
        in_bias: f64,
    },
    /// A fixed edge list over nodes `0..nodes`.
    EdgeList { nodes: usize, edges: Vec<(usize, usize)> },
}

impl Default for Topology {
    fn default() -> Self {
        Topology::PreferentialAttachment {
            nodes: 1010,
            edges: 6906,
            out_bias: 1.5,
            in_bias: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorParams {
    pub topology: Topology,
    pub influencer_outdegree_threshold: usize,
    pub min_influence: f64,
    pub min_pos_opinion: f64,
    pub min_neighbor_pos: f64,
    pub min_neighbor_neg: f64,
    /// Share of influencers labeled positive.
    pub positive_fraction: f64,
    pub rng_seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            topology: Topology::default(),
            influencer_outdegree_threshold: 15,
            min_influence: 0.5,
            min_pos_opinion: 0.8,
            min_neighbor_pos: 0.3,
            min_neighbor_neg: 0.8,
            positive_fraction: 0.5,
            rng_seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn validate(&self) -> Result<(), GenerateError> {
        let unit = [
            ("min_influence", self.min_influence),
            ("min_pos_opinion", self.min_pos_opinion),
            ("min_neighbor_pos", self.min_neighbor_pos),
            ("min_neighbor_neg", self.min_neighbor_neg),
            ("positive_fraction", self.positive_fraction),
        ];
        for (name, v) in unit {
            if !(0.0..=1.0).contains(&v) {
                return Err(GenerateError::InvalidParams(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        if self.influencer_outdegree_threshold < 1 {
            return Err(GenerateError::InvalidParams("threshold must be at least 1".into()));
        }
        match &self.topology {
            Topology::PreferentialAttachment {
                nodes,
                edges,
                out_bias,
                in_bias,
            } => {
                if *nodes < 2 {
                    return Err(GenerateError::InvalidParams("need at least 2 nodes".into()));
                }
                if *edges > nodes * (nodes - 1) {
                    return Err(GenerateError::InvalidParams("more edges than node pairs".into()));
                }
                if *out_bias <= 0.0 || *in_bias <= 0.0 {
                    return Err(GenerateError::InvalidParams(
                        "attachment biases must be positive".into(),
                    ));
                }
            }
            Topology::EdgeList { nodes, edges } => {
                if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= *nodes || v >= *nodes || u == v) {
                    return Err(GenerateError::InvalidParams(format!("bad edge ({u}, {v})")));
                }
            }
        }
        Ok(())
    }

    /// Parameter by the name used in sweeps.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), GenerateError> {
        match name {
            "min_influence" => self.min_influence = value,
            "min_pos_opinion" => self.min_pos_opinion = value,
            "min_neighbor_pos" => self.min_neighbor_pos = value,
            "min_neighbor_neg" => self.min_neighbor_neg = value,
            other => return Err(GenerateError::InvalidParams(format!("`{other}` cannot be swept"))),
        }
        Ok(())
    }
}

/// Labeled influencer sets, as dense node indexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GroundTruth {
    pub influencers: BTreeSet<usize>,
    pub positive_influencers: BTreeSet<usize>,
    pub pos_influencing_pos: BTreeSet<usize>,
    pub pos_influencing_neg: BTreeSet<usize>,
}

impl GroundTruth {
    pub fn is_consistent(&self) -> bool {
        self.positive_influencers.is_subset(&self.influencers)
            && self.pos_influencing_pos.is_disjoint(&self.pos_influencing_neg)
            && self
                .pos_influencing_pos
                .union(&self.pos_influencing_neg)
                .copied()
                .collect::<BTreeSet<_>>()
                == self.positive_influencers
    }
}

/// Serialized ground truth, with node ids instead of indexes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub influencers: Vec<String>,
    pub positive_influencers: Vec<String>,
    pub pos_influencing_pos: Vec<String>,
    pub pos_influencing_neg: Vec<String>,
}

impl GroundTruthFile {
    pub fn from_truth(g: &InfluenceGraph, t: &GroundTruth) -> Self {
        let ids = |s: &BTreeSet<usize>| s.iter().map(|&i| g.id_of(i).to_string()).collect();
        GroundTruthFile {
            influencers: ids(&t.influencers),
            positive_influencers: ids(&t.positive_influencers),
            pos_influencing_pos: ids(&t.pos_influencing_pos),
            pos_influencing_neg: ids(&t.pos_influencing_neg),
        }
    }
}

/// Weighted sampling with weights `count + bias` over a fixed universe.
struct Urn {
    weights: Vec<f64>,
    total: f64,
}

impl Urn {
    fn new(n: usize, bias: f64) -> Self {
        Urn {
            weights: vec![bias; n],
            total: bias * n as f64,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let mut x = rng.random::<f64>() * self.total;
        for (i, &w) in self.weights.iter().enumerate() {
            if x < w {
                return i;
            }
            x -= w;
        }
        self.weights.len() - 1
    }

    fn bump(&mut self, i: usize) {
        self.weights[i] += 1.0;
        self.total += 1.0;
    }
}

fn preferential_attachment(
    nodes: usize,
    edges: usize,
    out_bias: f64,
    in_bias: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let mut src = Urn::new(nodes, out_bias);
    let mut dst = Urn::new(nodes, in_bias);
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(edges);
    let mut out = Vec::with_capacity(edges);
    while out.len() < edges {
        let u = src.draw(rng);
        let v = dst.draw(rng);
        if u == v || !seen.insert((u, v)) {
            continue;
        }
        src.bump(u);
        dst.bump(v);
        out.push((u, v));
    }
    out
}

/// Topology edges for `params`, drawn from `rng`.
pub fn topology_edges(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> (usize, Vec<(usize, usize)>) {
    match &params.topology {
        Topology::PreferentialAttachment {
            nodes,
            edges,
            out_bias,
            in_bias,
        } => (
            *nodes,
            preferential_attachment(*nodes, *edges, *out_bias, *in_bias, rng),
        ),
        Topology::EdgeList { nodes, edges } => (*nodes, edges.clone()),
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn with_pos(rng: &mut ChaCha8Rng, pos: f64) -> OpinionDistribution {
    let rest = 1.0 - pos;
    let neg = rest * rng.random::<f64>();
    OpinionDistribution::new(pos, neg, (rest - neg).max(0.0)).expect("valid by construction")
}

fn with_neg(rng: &mut ChaCha8Rng, neg: f64) -> OpinionDistribution {
    let rest = 1.0 - neg;
    let pos = rest * rng.random::<f64>();
    OpinionDistribution::new(pos, neg, (rest - pos).max(0.0)).expect("valid by construction")
}

/// Generates a labeled network. Bit-reproducible for fixed parameters.
pub fn generate_network(params: &GeneratorParams) -> Result<(InfluenceGraph, GroundTruth), GenerateError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let (n, edges) = topology_edges(params, &mut rng);

    let mut out_deg = vec![0usize; n];
    let mut out_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        out_deg[u] += 1;
        out_adj[u].push(v);
    }
    let influencers: BTreeSet<usize> = (0..n)
        .filter(|&u| out_deg[u] >= params.influencer_outdegree_threshold)
        .collect();
    if influencers.is_empty() {
        return Err(GenerateError::NoInfluencers(params.influencer_outdegree_threshold));
    }

    let influence: Vec<f64> = edges
        .iter()
        .map(|&(u, _)| {
            if influencers.contains(&u) {
                uniform(&mut rng, params.min_influence, 1.0)
            } else {
                uniform(&mut rng, 0.0, params.min_influence)
            }
        })
        .collect();

    let mut pool: Vec<usize> = influencers.iter().copied().collect();
    pool.shuffle(&mut rng);
    let n_pos = ((pool.len() as f64) * params.positive_fraction).round() as usize;
    let mut positive: Vec<usize> = pool[..n_pos].to_vec();
    positive.shuffle(&mut rng);
    let half = positive.len().div_ceil(2);
    let (to_pos, to_neg) = positive.split_at(half);

    let mut opinions: Vec<OpinionDistribution> = (0..n)
        .map(|_| {
            let p = uniform(&mut rng, 0.0, params.min_pos_opinion);
            with_pos(&mut rng, p)
        })
        .collect();
    for &u in to_pos {
        for &v in &out_adj[u] {
            let p = uniform(&mut rng, params.min_neighbor_pos, 1.0);
            opinions[v] = with_pos(&mut rng, p);
        }
    }
    for &u in to_neg {
        for &v in &out_adj[u] {
            let q = uniform(&mut rng, params.min_neighbor_neg, 1.0);
            opinions[v] = with_neg(&mut rng, q);
        }
    }
    for &u in &positive {
        let p = uniform(&mut rng, params.min_pos_opinion, 1.0);
        opinions[u] = with_pos(&mut rng, p);
    }

    let mut b = GraphBuilder::new();
    for (i, op) in opinions.into_iter().enumerate() {
        b.add_node(&i.to_string(), op)?;
    }
    for (&(u, v), &x) in edges.iter().zip(&influence) {
        b.add_edge_idx(u, v, indicator_from_value(x, 0.0)?.bba().clone(), None)?;
    }
    let truth = GroundTruth {
        influencers,
        positive_influencers: positive.iter().copied().collect(),
        pos_influencing_pos: to_pos.iter().copied().collect(),
        pos_influencing_neg: to_neg.iter().copied().collect(),
    };
    Ok((b.build()?, truth))
}
