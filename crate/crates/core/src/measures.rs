//! Per-edge influence measures.
//!
//! With b = m_(u,v)^Ω({I}) the seven measures are:
//!
//! | kind      | value                                   |
//! |-----------|-----------------------------------------|
//! | plain     | b                                       |
//! | s1-prob   | Pr_u(Pos) · b                           |
//! | s1-belief | m_u(Pos) · b                            |
//! | s2-prob   | Pr_u(Pos) · b · (1 − Pr_v(Neg))         |
//! | s2-belief | m_u(Pos) · b · (1 − m_v(Neg))           |
//! | s3-prob   | Pr_u(Pos) · b · (1 − Pr_v(Pos))         |
//! | s3-belief | m_u(Pos) · b · (1 − m_v(Pos))           |
//!
//! Non-edges have influence 0 under every measure.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{GraphError, InfluenceGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MeasureKind {
    #[serde(rename = "plain")]
    Plain,
    #[serde(rename = "s1-prob")]
    Scenario1Prob,
    #[serde(rename = "s1-belief")]
    Scenario1Belief,
    #[serde(rename = "s2-prob")]
    Scenario2Prob,
    #[serde(rename = "s2-belief")]
    Scenario2Belief,
    #[serde(rename = "s3-prob")]
    Scenario3Prob,
    #[serde(rename = "s3-belief")]
    Scenario3Belief,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 7] = [
        MeasureKind::Plain,
        MeasureKind::Scenario1Prob,
        MeasureKind::Scenario1Belief,
        MeasureKind::Scenario2Prob,
        MeasureKind::Scenario2Belief,
        MeasureKind::Scenario3Prob,
        MeasureKind::Scenario3Belief,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Plain => "plain",
            MeasureKind::Scenario1Prob => "s1-prob",
            MeasureKind::Scenario1Belief => "s1-belief",
            MeasureKind::Scenario2Prob => "s2-prob",
            MeasureKind::Scenario2Belief => "s2-belief",
            MeasureKind::Scenario3Prob => "s3-prob",
            MeasureKind::Scenario3Belief => "s3-belief",
        }
    }

    pub fn uses_belief(self) -> bool {
        matches!(
            self,
            MeasureKind::Scenario1Belief | MeasureKind::Scenario2Belief | MeasureKind::Scenario3Belief
        )
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown measure `{0}` (expected one of plain, s1-prob, s1-belief, s2-prob, s2-belief, s3-prob, s3-belief)")]
pub struct UnknownMeasure(pub String);

impl FromStr for MeasureKind {
    type Err = UnknownMeasure;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownMeasure(s.to_string()))
    }
}

/// Measure value of edge `edge_id` under `kind`.
pub fn edge_influence(g: &InfluenceGraph, edge_id: usize, kind: MeasureKind) -> f64 {
    let e = g.edge(edge_id);
    let b = e.influence();
    let (su, sv) = (g.node(e.src()), g.node(e.dst()));
    let (pu, pv) = (su.opinion(), sv.opinion());
    match kind {
        MeasureKind::Plain => b,
        MeasureKind::Scenario1Prob => pu.pos() * b,
        MeasureKind::Scenario1Belief => su.belief_pos() * b,
        MeasureKind::Scenario2Prob => pu.pos() * b * (1.0 - pv.neg()),
        MeasureKind::Scenario2Belief => su.belief_pos() * b * (1.0 - sv.belief_neg()),
        MeasureKind::Scenario3Prob => pu.pos() * b * (1.0 - pv.pos()),
        MeasureKind::Scenario3Belief => su.belief_pos() * b * (1.0 - sv.belief_pos()),
    }
}

/// Influence of node `u` on node `v` by dense index; 0 when (u, v) is not an
/// edge (including u = v, since self-loops are never stored).
pub fn influence(g: &InfluenceGraph, u: usize, v: usize, kind: MeasureKind) -> f64 {
    g.find_edge(u, v).map(|e| edge_influence(g, e, kind)).unwrap_or(0.0)
}

/// Influence by node id.
pub fn influence_by_id(g: &InfluenceGraph, u: &str, v: &str, kind: MeasureKind) -> Result<f64, GraphError> {
    Ok(influence(g, g.index_of(u)?, g.index_of(v)?, kind))
}

/// Measure values for every edge, indexed by edge id.
pub fn edge_weights(g: &InfluenceGraph, kind: MeasureKind) -> Vec<f64> {
    (0..g.edge_count()).map(|e| edge_influence(g, e, kind)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{indicator_from_value, GraphBuilder};
    use crate::opinion::OpinionDistribution;

    fn pair(pu: OpinionDistribution, pv: OpinionDistribution, b: f64) -> InfluenceGraph {
        let mut gb = GraphBuilder::new();
        gb.add_node("u", pu).unwrap();
        gb.add_node("v", pv).unwrap();
        gb.add_edge("u", "v", indicator_from_value(b, 0.0).unwrap().bba().clone())
            .unwrap();
        gb.build().unwrap()
    }

    fn d(p: f64, n: f64) -> OpinionDistribution {
        OpinionDistribution::new(p, n, 1.0 - p - n).unwrap()
    }

    #[test]
    fn names_round_trip() {
        for k in MeasureKind::ALL {
            assert_eq!(k.name().parse::<MeasureKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("s4-prob".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn scenario_products() {
        let g = pair(d(0.8, 0.0), d(0.25, 0.25), 0.5);
        let f = |k| influence_by_id(&g, "u", "v", k).unwrap();
        assert!((f(MeasureKind::Plain) - 0.5).abs() < 1e-15);
        assert!((f(MeasureKind::Scenario1Prob) - 0.4).abs() < 1e-15);
        assert!((f(MeasureKind::Scenario2Prob) - 0.3).abs() < 1e-15);
        assert!((f(MeasureKind::Scenario3Prob) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn non_edges_are_zero() {
        let g = pair(d(0.8, 0.0), d(0.25, 0.25), 0.5);
        for k in MeasureKind::ALL {
            assert_eq!(influence_by_id(&g, "v", "u", k).unwrap(), 0.0);
            assert_eq!(influence(&g, 0, 0, k), 0.0);
        }
        assert!(influence_by_id(&g, "u", "nobody", MeasureKind::Plain).is_err());
    }

    #[test]
    fn belief_variants_use_bba() {
        let g = pair(d(0.6, 0.2), d(0.6, 0.2), 1.0);
        let mpos = 0.48 / 0.88;
        let mneg = 0.08 / 0.88;
        let f = |k| influence(&g, 0, 1, k);
        assert!((f(MeasureKind::Scenario1Belief) - mpos).abs() < 1e-12);
        assert!((f(MeasureKind::Scenario2Belief) - mpos * (1.0 - mneg)).abs() < 1e-12);
        assert!((f(MeasureKind::Scenario3Belief) - mpos * (1.0 - mpos)).abs() < 1e-12);
    }
}
