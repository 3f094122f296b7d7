//! Directed social graph with opinion-annotated nodes and influence BBAs on
//! edges.
//!
//! Node ids are opaque strings mapped to dense indexes in insertion order.
//! Every edge (u, v) carries a mass function over Ω = {I, P} describing how
//! much u influences v. The graph is an immutable snapshot once built.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::belief::{combine_all, BeliefError, Frame, MassFunction, Subset};
use crate::opinion::{
    self, message_polarity, opinion_to_bba_with, parse_messages, user_opinion, BbaMapping, OpinionDistribution,
    OpinionError, PolarityLexicon,
};

pub const INFLUENCE: &str = "I";
pub const PASSIVE: &str = "P";

/// Default uncertainty discount for indicator values.
pub const DEFAULT_GAMMA: f64 = 0.1;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("{file}:{line}: {message}")]
    Parse { file: String, line: usize, message: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("duplicate edge `{0}` -> `{1}`")]
    DuplicateEdge(String, String),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("no influence indicators supplied")]
    NoIndicators,
    #[error("influence BBA must be defined on {{I, P}}")]
    WrongFrame,
    #[error("value {0} is outside [0, 1]")]
    OutOfRange(f64),
    #[error(transparent)]
    Belief(#[from] BeliefError),
    #[error(transparent)]
    Opinion(#[from] OpinionError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T, E = GraphError> = std::result::Result<T, E>;

/// The influence frame Ω = {I, P}.
pub fn influence_frame() -> &'static Frame {
    static FRAME: OnceLock<Frame> = OnceLock::new();
    FRAME.get_or_init(|| Frame::new([INFLUENCE, PASSIVE]).expect("static frame"))
}

pub fn influence_subset() -> Subset {
    Subset::from_bits(0b01)
}

pub fn passive_subset() -> Subset {
    Subset::from_bits(0b10)
}

/// One row of an action log: `user` performed `action` at `time`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionRecord {
    pub user: String,
    pub action: String,
    pub time: i64,
}

/// BBA on Ω for a single measurable influence indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorBBA {
    name: String,
    bba: MassFunction,
}

impl IndicatorBBA {
    pub fn new(name: impl Into<String>, bba: MassFunction) -> Result<Self> {
        if bba.frame() != influence_frame() {
            return Err(GraphError::WrongFrame);
        }
        Ok(IndicatorBBA { name: name.into(), bba })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bba(&self) -> &MassFunction {
        &self.bba
    }
}

/// Linear-discount mapping of an indicator value x ∈ [0, 1]:
/// m({I}) = x(1 − γ), m({P}) = (1 − x)(1 − γ), m(Ω) = γ.
pub fn indicator_from_value(x: f64, gamma: f64) -> Result<IndicatorBBA> {
    for v in [x, gamma] {
        if !(0.0..=1.0).contains(&v) {
            return Err(GraphError::OutOfRange(v));
        }
    }
    let omega = influence_frame();
    let bba = MassFunction::new(
        omega.clone(),
        [
            (influence_subset(), x * (1.0 - gamma)),
            (passive_subset(), (1.0 - x) * (1.0 - gamma)),
            (omega.full(), gamma),
        ],
    )?;
    IndicatorBBA::new("indicator", bba)
}

/// Fuses indicator BBAs with Dempster's rule.
pub fn edge_influence_bba(indicators: &[IndicatorBBA]) -> Result<MassFunction> {
    combine_all(indicators.iter().map(IndicatorBBA::bba))
        .ok_or(GraphError::NoIndicators)?
        .map_err(GraphError::from)
}

#[derive(Debug, Clone)]
pub struct Node {
    id: String,
    opinion: OpinionDistribution,
    bba: MassFunction,
    belief_pos: f64,
    belief_neg: f64,
}

impl Node {
    pub fn id(&self) -> &str {
        &self.id
    }

    /// Pr_u^Θ.
    pub fn opinion(&self) -> &OpinionDistribution {
        &self.opinion
    }

    /// m_u^Θ.
    pub fn bba(&self) -> &MassFunction {
        &self.bba
    }

    /// m_u^Θ({Pos}).
    pub fn belief_pos(&self) -> f64 {
        self.belief_pos
    }

    /// m_u^Θ({Neg}).
    pub fn belief_neg(&self) -> f64 {
        self.belief_neg
    }
}

#[derive(Debug, Clone)]
pub struct Edge {
    src: usize,
    dst: usize,
    bba: MassFunction,
    indicators: Option<Vec<f64>>,
    influence: f64,
}

impl Edge {
    pub fn src(&self) -> usize {
        self.src
    }

    pub fn dst(&self) -> usize {
        self.dst
    }

    /// m_(u,v)^Ω.
    pub fn bba(&self) -> &MassFunction {
        &self.bba
    }

    /// m_(u,v)^Ω({I}).
    pub fn influence(&self) -> f64 {
        self.influence
    }

    pub fn indicators(&self) -> Option<&[f64]> {
        self.indicators.as_deref()
    }
}

/// Immutable graph snapshot.
#[derive(Debug, Clone)]
pub struct InfluenceGraph {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl InfluenceGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, idx: usize) -> &Node {
        &self.nodes[idx]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, idx: usize) -> &Edge {
        &self.edges[idx]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    }

    pub fn id_of(&self, idx: usize) -> &str {
        &self.nodes[idx].id
    }

    /// Edge id of (u, v), if present.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_index.get(&(u, v)).copied()
    }

    /// Outgoing edge ids of `u`, ordered by destination.
    pub fn out_edges(&self, u: usize) -> &[usize] {
        &self.out_edges[u]
    }

    /// Incoming edge ids of `v` (D_in(v)), ordered by source.
    pub fn in_edges(&self, v: usize) -> &[usize] {
        &self.in_edges[v]
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out_edges[u].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.in_edges[v].len()
    }

    pub fn out_neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.out_edges[u].iter().map(|&e| self.edges[e].dst)
    }

    pub fn in_neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.in_edges[v].iter().map(|&e| self.edges[e].src)
    }

    /// Writes the node table as `node_id,pos,neg,neut`.
    pub fn write_nodes<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["node_id", "pos", "neg", "neut"])?;
        for n in &self.nodes {
            let o = n.opinion;
            wr.write_record([
                n.id.clone(),
                format!("{:?}", o.pos()),
                format!("{:?}", o.neg()),
                format!("{:?}", o.neut()),
            ])?;
        }
        wr.flush()
    }

    /// Writes the edge table in pre-estimated form `src,dst,m_I,m_P,m_IP`.
    pub fn write_edges<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["src", "dst", "m_I", "m_P", "m_IP"])?;
        let full = influence_frame().full();
        for e in &self.edges {
            wr.write_record([
                self.nodes[e.src].id.clone(),
                self.nodes[e.dst].id.clone(),
                format!("{:?}", e.bba.get(influence_subset())),
                format!("{:?}", e.bba.get(passive_subset())),
                format!("{:?}", e.bba.get(full)),
            ])?;
        }
        wr.flush()
    }
}

/// Incremental construction of an [`InfluenceGraph`].
#[derive(Debug, Default)]
pub struct GraphBuilder {
    mapping: BbaMapping,
    nodes: Vec<(String, OpinionDistribution)>,
    index: HashMap<String, usize>,
    edges: Vec<(usize, usize, MassFunction, Option<Vec<f64>>)>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_mapping(mut self, mapping: BbaMapping) -> Self {
        self.mapping = mapping;
        self
    }

    pub fn add_node(&mut self, id: &str, opinion: OpinionDistribution) -> Result<usize> {
        if self.index.contains_key(id) {
            return Err(GraphError::DuplicateNode(id.to_string()));
        }
        let idx = self.nodes.len();
        self.nodes.push((id.to_string(), opinion));
        self.index.insert(id.to_string(), idx);
        Ok(idx)
    }

    pub fn set_opinion(&mut self, idx: usize, opinion: OpinionDistribution) {
        self.nodes[idx].1 = opinion;
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn add_edge(&mut self, src: &str, dst: &str, bba: MassFunction) -> Result<usize> {
        self.add_edge_with_indicators(src, dst, bba, None)
    }

    pub fn add_edge_with_indicators(
        &mut self,
        src: &str,
        dst: &str,
        bba: MassFunction,
        indicators: Option<Vec<f64>>,
    ) -> Result<usize> {
        let u = self
            .index_of(src)
            .ok_or_else(|| GraphError::UnknownNode(src.to_string()))?;
        let v = self
            .index_of(dst)
            .ok_or_else(|| GraphError::UnknownNode(dst.to_string()))?;
        self.add_edge_idx(u, v, bba, indicators)
    }

    pub fn add_edge_idx(
        &mut self,
        u: usize,
        v: usize,
        bba: MassFunction,
        indicators: Option<Vec<f64>>,
    ) -> Result<usize> {
        if u == v {
            return Err(GraphError::SelfLoop(self.nodes[u].0.clone()));
        }
        if bba.frame() != influence_frame() {
            return Err(GraphError::WrongFrame);
        }
        if self.edge_index.contains_key(&(u, v)) {
            return Err(GraphError::DuplicateEdge(
                self.nodes[u].0.clone(),
                self.nodes[v].0.clone(),
            ));
        }
        let id = self.edges.len();
        self.edges.push((u, v, bba, indicators));
        self.edge_index.insert((u, v), id);
        Ok(id)
    }

    pub fn build(self) -> Result<InfluenceGraph> {
        let n = self.nodes.len();
        let nodes = self
            .nodes
            .into_iter()
            .map(|(id, opinion)| {
                let bba = opinion_to_bba_with(&opinion, self.mapping)?;
                Ok(Node {
                    belief_pos: bba.get(opinion::pos_subset()),
                    belief_neg: bba.get(opinion::neg_subset()),
                    id,
                    opinion,
                    bba,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let edges: Vec<Edge> = self
            .edges
            .into_iter()
            .map(|(src, dst, bba, indicators)| Edge {
                src,
                dst,
                influence: bba.get(influence_subset()),
                bba,
                indicators,
            })
            .collect();
        let mut out_edges = vec![Vec::new(); n];
        let mut in_edges = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            out_edges[e.src].push(i);
            in_edges[e.dst].push(i);
        }
        for list in &mut out_edges {
            list.sort_by_key(|&e| edges[e].dst);
        }
        for list in &mut in_edges {
            list.sort_by_key(|&e| edges[e].src);
        }
        Ok(InfluenceGraph {
            nodes,
            index: self.index,
            edges,
            out_edges,
            in_edges,
            edge_index: self.edge_index,
        })
    }
}

/// Input files for [`load_graph`]. Messages and lexicon are optional but must
/// be given together.
#[derive(Debug, Clone, Default)]
pub struct GraphFiles<'a> {
    pub edges: Option<&'a Path>,
    pub nodes: Option<&'a Path>,
    pub messages: Option<&'a Path>,
    pub lexicon: Option<&'a Path>,
}

#[derive(Debug, Clone, Copy)]
pub struct LoadOptions {
    pub gamma: f64,
    pub mapping: BbaMapping,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            gamma: DEFAULT_GAMMA,
            mapping: BbaMapping::Default,
        }
    }
}

/// Counters reported by [`load_graph`].
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LoadReport {
    /// Nodes that had neither an explicit opinion nor messages.
    pub neutral_fallbacks: usize,
    /// Messages skipped because they had no tokens.
    pub empty_messages: usize,
    /// Messages whose author is not a node of the graph.
    pub unknown_authors: usize,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| GraphError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(file: &str, line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn parse_unit(file: &str, line: usize, s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|e| parse_err(file, line, format!("bad number `{s}`: {e}")))?;
    if !(0.0..=1.0).contains(&x) {
        return Err(parse_err(file, line, format!("{x} is outside [0, 1]")));
    }
    Ok(x)
}

/// Node table rows: id plus an optional explicit opinion.
pub fn read_nodes<R: Read>(r: R, file: &str) -> Result<Vec<(String, Option<OpinionDistribution>)>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let explicit = match cols.as_slice() {
        ["node_id"] => false,
        ["node_id", "pos", "neg", "neut"] => true,
        _ => {
            return Err(parse_err(
                file,
                1,
                format!("expected header node_id[,pos,neg,neut], got {cols:?}"),
            ))
        }
    };
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(file, line, e.to_string()))?;
        let id = rec.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(parse_err(file, line, "empty node id"));
        }
        let opinion = if explicit && rec.iter().skip(1).any(|c| !c.is_empty()) {
            let p = parse_unit(file, line, rec.get(1).unwrap_or(""))?;
            let n = parse_unit(file, line, rec.get(2).unwrap_or(""))?;
            let u = parse_unit(file, line, rec.get(3).unwrap_or(""))?;
            Some(OpinionDistribution::new(p, n, u).map_err(|e| parse_err(file, line, e.to_string()))?)
        } else {
            None
        };
        out.push((id, opinion));
    }
    Ok(out)
}

/// Edge row: endpoints, fused BBA and the raw indicator values if any.
pub type EdgeRow = (String, String, MassFunction, Option<Vec<f64>>);

/// Parses either `src,dst,m_I,m_P,m_IP` or `src,dst,ind_1,...,ind_k`.
pub fn read_edges<R: Read>(r: R, file: &str, gamma: f64) -> Result<Vec<EdgeRow>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[0] != "src" || cols[1] != "dst" {
        return Err(parse_err(
            file,
            1,
            format!("expected header src,dst,... with at least one value column, got {cols:?}"),
        ));
    }
    let direct = cols[2..] == ["m_I", "m_P", "m_IP"];
    let omega = influence_frame();
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(file, line, e.to_string()))?;
        if rec.len() != cols.len() {
            return Err(parse_err(
                file,
                line,
                format!("expected {} columns, found {}", cols.len(), rec.len()),
            ));
        }
        let values = rec
            .iter()
            .skip(2)
            .map(|s| parse_unit(file, line, s))
            .collect::<Result<Vec<_>>>()?;
        let (bba, raw) = if direct {
            let bba = MassFunction::new(
                omega.clone(),
                [
                    (influence_subset(), values[0]),
                    (passive_subset(), values[1]),
                    (omega.full(), values[2]),
                ],
            )
            .map_err(|e| parse_err(file, line, e.to_string()))?;
            (bba, None)
        } else {
            let inds = values
                .iter()
                .zip(&cols[2..])
                .map(|(&x, name)| {
                    let ind = indicator_from_value(x, gamma)?;
                    IndicatorBBA::new(*name, ind.bba)
                })
                .collect::<Result<Vec<_>>>()?;
            let bba = edge_influence_bba(&inds).map_err(|e| parse_err(file, line, e.to_string()))?;
            (bba, Some(values))
        };
        out.push((rec[0].to_string(), rec[1].to_string(), bba, raw));
    }
    Ok(out)
}

/// Reads an action log `user,action,time`.
pub fn read_actions<R: Read>(r: R, file: &str) -> Result<Vec<ActionRecord>> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rd.headers().map_err(|e| parse_err(file, 1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["user", "action", "time"] {
        return Err(parse_err(file, 1, "expected header user,action,time"));
    }
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(file, line, e.to_string()))?;
        if rec.len() != 3 {
            return Err(parse_err(file, line, "expected 3 columns"));
        }
        let time: i64 = rec[2]
            .parse()
            .map_err(|e| parse_err(file, line, format!("bad time `{}`: {e}", &rec[2])))?;
        if time < 0 {
            return Err(parse_err(file, line, "time must be non-negative"));
        }
        out.push(ActionRecord {
            user: rec[0].to_string(),
            action: rec[1].to_string(),
            time,
        });
    }
    Ok(out)
}

pub fn load_actions(path: &Path) -> Result<Vec<ActionRecord>> {
    read_actions(open(path)?, &path.display().to_string())
}

/// Assembles a graph from files.
///
/// Nodes come from the node file, or from the edge endpoints when no node file
/// is given. Node opinions are taken from explicit node columns first, then
/// from message polarities, and default to neutral otherwise.
pub fn load_graph(files: &GraphFiles<'_>, opts: LoadOptions) -> Result<(InfluenceGraph, LoadReport)> {
    let mut report = LoadReport::default();
    let mut builder = GraphBuilder::new().with_mapping(opts.mapping);
    let mut explicit: Vec<bool> = Vec::new();

    let edge_rows = match files.edges {
        Some(p) => read_edges(open(p)?, &p.display().to_string(), opts.gamma)?,
        None => Vec::new(),
    };

    if let Some(p) = files.nodes {
        for (id, op) in read_nodes(open(p)?, &p.display().to_string())? {
            builder.add_node(&id, op.unwrap_or(OpinionDistribution::NEUTRAL))?;
            explicit.push(op.is_some());
        }
    } else {
        for (s, d, _, _) in &edge_rows {
            for id in [s, d] {
                if builder.index_of(id).is_none() {
                    builder.add_node(id, OpinionDistribution::NEUTRAL)?;
                    explicit.push(false);
                }
            }
        }
    }

    let mut per_user: Vec<Vec<OpinionDistribution>> = vec![Vec::new(); builder.node_count()];
    match (files.messages, files.lexicon) {
        (Some(mp), Some(lp)) => {
            let lex = PolarityLexicon::from_tsv(open(lp)?).map_err(|e| match e {
                OpinionError::Parse { line, message } => parse_err(&lp.display().to_string(), line, message),
                other => other.into(),
            })?;
            let msgs = parse_messages(open(mp)?).map_err(|e| match e {
                OpinionError::Parse { line, message } => parse_err(&mp.display().to_string(), line, message),
                other => other.into(),
            })?;
            for m in &msgs {
                let Some(idx) = builder.index_of(&m.author) else {
                    report.unknown_authors += 1;
                    continue;
                };
                match message_polarity(m, &lex) {
                    Ok(p) => per_user[idx].push(p),
                    Err(OpinionError::EmptyMessage) => report.empty_messages += 1,
                    Err(e) => return Err(e.into()),
                }
            }
        }
        (None, None) => {}
        _ => {
            return Err(parse_err(
                "<config>",
                0,
                "messages and lexicon files must be supplied together",
            ))
        }
    }

    for (idx, msgs) in per_user.iter().enumerate() {
        if explicit[idx] {
            continue;
        }
        match user_opinion(msgs) {
            Ok(op) => builder.set_opinion(idx, op),
            Err(_) => report.neutral_fallbacks += 1,
        }
    }

    for (s, d, bba, raw) in edge_rows {
        builder.add_edge_with_indicators(&s, &d, bba, raw)?;
    }
    if report.neutral_fallbacks > 0 {
        log::warn!(
            "{} node(s) without messages or explicit opinion defaulted to neutral",
            report.neutral_fallbacks
        );
    }
    Ok((builder.build()?, report))
}
