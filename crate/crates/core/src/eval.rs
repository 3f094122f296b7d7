//! Evaluation: detection accuracy, seed-set intersections, opinion tables
//! with confidence intervals and accumulated-metric curves.

use std::collections::{BTreeSet, HashMap};
use std::io::{Read, Write};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::graph::InfluenceGraph;
use crate::maximizer::SeedResult;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("accuracy is undefined for an empty truth set")]
    EmptyTruth,
    #[error("opinion report needs at least one seed")]
    EmptySeeds,
    #[error("confidence {0} is outside (0, 1)")]
    BadConfidence(f64),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Share of the labeled influencers found among the detected seeds.
///
/// The denominator is the number of influencers that could possibly be found:
/// |truth| when at least |truth| seeds were detected, and |detected|
/// otherwise. With k ≥ |truth| this is |detected ∩ truth| / |truth|.
pub fn accuracy(detected: &BTreeSet<usize>, truth: &BTreeSet<usize>) -> Result<f64, EvalError> {
    if truth.is_empty() {
        return Err(EvalError::EmptyTruth);
    }
    let denom = truth.len().min(detected.len());
    if denom == 0 {
        return Ok(0.0);
    }
    Ok(detected.intersection(truth).count() as f64 / denom as f64)
}

pub fn seed_intersection(a: &SeedResult, b: &SeedResult) -> usize {
    let sa: BTreeSet<&str> = a.node_ids().collect();
    b.node_ids().collect::<BTreeSet<_>>().intersection(&sa).count()
}

/// Symmetric matrix of pairwise intersections.
pub fn intersection_matrix(results: &[SeedResult]) -> Vec<Vec<usize>> {
    results
        .iter()
        .map(|a| results.iter().map(|b| seed_intersection(a, b)).collect())
        .collect()
}

/// Mean with a normal-approximation confidence half-width z·s/√n, where s is
/// the population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub half_width: f64,
    pub n: usize,
}

fn z_value(confidence: f64) -> Result<f64, EvalError> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(EvalError::BadConfidence(confidence));
    }
    let normal = Normal::standard();
    Ok(normal.inverse_cdf(0.5 + confidence / 2.0))
}

pub fn mean_ci(values: &[f64], confidence: f64) -> Result<Option<MeanCi>, EvalError> {
    let z = z_value(confidence)?;
    if values.is_empty() {
        return Ok(None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    Ok(Some(MeanCi {
        mean,
        half_width: z * var.sqrt() / n.sqrt(),
        n: values.len(),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpinionReport {
    pub seed_pos: MeanCi,
    pub seed_neg: MeanCi,
    /// `None` when no seed has an out-neighbor.
    pub neighbor_pos: Option<MeanCi>,
    pub neighbor_neg: Option<MeanCi>,
}

/// Mean Pr(Pos) and Pr(Neg) of the seeds and of the union of their
/// out-neighbors.
pub fn opinion_report(g: &InfluenceGraph, seeds: &[usize], confidence: f64) -> Result<OpinionReport, EvalError> {
    if seeds.is_empty() {
        return Err(EvalError::EmptySeeds);
    }
    let pos: Vec<f64> = seeds.iter().map(|&s| g.node(s).opinion().pos()).collect();
    let neg: Vec<f64> = seeds.iter().map(|&s| g.node(s).opinion().neg()).collect();
    let neighbors: BTreeSet<usize> = seeds.iter().flat_map(|&s| g.out_neighbors(s)).collect();
    let npos: Vec<f64> = neighbors.iter().map(|&v| g.node(v).opinion().pos()).collect();
    let nneg: Vec<f64> = neighbors.iter().map(|&v| g.node(v).opinion().neg()).collect();
    Ok(OpinionReport {
        seed_pos: mean_ci(&pos, confidence)?.expect("non-empty"),
        seed_neg: mean_ci(&neg, confidence)?.expect("non-empty"),
        neighbor_pos: mean_ci(&npos, confidence)?,
        neighbor_neg: mean_ci(&nneg, confidence)?,
    })
}

/// Seed ids of a result resolved to dense indexes.
pub fn seed_indices(g: &InfluenceGraph, r: &SeedResult) -> Result<Vec<usize>, EvalError> {
    r.node_ids()
        .map(|id| g.index_of(id).map_err(|_| EvalError::UnknownNode(id.to_string())))
        .collect()
}

/// Activity counts of one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct NodeMetrics {
    pub follow: u64,
    pub mention: u64,
    pub retweet: u64,
    pub tweet: u64,
}

/// Reads `node,follow,mention,retweet,tweet`.
pub fn read_node_metrics<R: Read>(r: R) -> Result<HashMap<String, NodeMetrics>, EvalError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd
        .headers()
        .map_err(|e| EvalError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["node", "follow", "mention", "retweet", "tweet"] {
        return Err(EvalError::Parse {
            line: 1,
            message: "expected header node,follow,mention,retweet,tweet".into(),
        });
    }
    let mut out = HashMap::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EvalError::Parse {
            line,
            message: e.to_string(),
        })?;
        let num = |j: usize| -> Result<u64, EvalError> {
            rec.get(j).unwrap_or("").parse().map_err(|e| EvalError::Parse {
                line,
                message: format!("column {j}: {e}"),
            })
        };
        out.insert(
            rec.get(0).unwrap_or("").to_string(),
            NodeMetrics {
                follow: num(1)?,
                mention: num(2)?,
                retweet: num(3)?,
                tweet: num(4)?,
            },
        );
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePoint {
    pub rank: usize,
    pub node: String,
    pub follow: u64,
    pub mention: u64,
    pub retweet: u64,
    pub tweet: u64,
}

/// Prefix sums of the metrics along the ranked seeds. Seeds without a metrics
/// row count as zero; their number is returned alongside the curve.
pub fn accumulated_curves(seeds: &SeedResult, metrics: &HashMap<String, NodeMetrics>) -> (Vec<CurvePoint>, usize) {
    let mut acc = NodeMetrics::default();
    let mut missing = 0;
    let mut out = Vec::with_capacity(seeds.len());
    for s in &seeds.seeds {
        let m = metrics.get(&s.node).copied().unwrap_or_else(|| {
            missing += 1;
            NodeMetrics::default()
        });
        acc.follow += m.follow;
        acc.mention += m.mention;
        acc.retweet += m.retweet;
        acc.tweet += m.tweet;
        out.push(CurvePoint {
            rank: s.rank,
            node: s.node.clone(),
            follow: acc.follow,
            mention: acc.mention,
            retweet: acc.retweet,
            tweet: acc.tweet,
        });
    }
    if missing > 0 {
        log::warn!(
            "{missing} seed(s) of `{}` have no metrics row; counted as zero",
            seeds.measure
        );
    }
    (out, missing)
}

pub fn write_curve<W: Write>(w: W, curve: &[CurvePoint]) -> csv::Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for p in curve {
        wr.serialize(p)?;
    }
    wr.flush()?;
    Ok(())
}
