//! The `evinf` command line.
//!
//! Every subcommand reads an optional TOML config, applies flag overrides,
//! validates the result and only then computes. Outputs are staged in memory
//! and moved into the output directory at the end, together with a
//! `manifest.toml` that can be passed back through `--config` to rerun.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    cascade_spread, cd_assign_credits, cd_maximize, oc_maximize, CascadeConfig, CascadeModel, EdgeValues, OcConfig,
    OcWeights,
};
use crate::datagen::{generate_network, GeneratorParams, GroundTruthFile};
use crate::eval::{
    accumulated_curves, accuracy, intersection_matrix, opinion_report, read_node_metrics, seed_indices, write_curve,
    MeanCi,
};
use crate::graph::{load_actions, load_graph, GraphFiles, InfluenceGraph, LoadOptions, DEFAULT_GAMMA};
use crate::maximizer::{maximize_with, MaximizeOptions, SeedResult, SpreadOptions};
use crate::measures::MeasureKind;
use crate::opinion::BbaMapping;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "evinf", version, about = "Evidential opinion-based influence maximization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select seeds with the evidential objective or a baseline.
    Maximize(CommonArgs),
    /// Estimate the cascade spread of a seed set.
    Simulate(CommonArgs),
    /// Distribute influence credit over an action log.
    Credits(CommonArgs),
    /// Generate a labeled synthetic network.
    Generate(CommonArgs),
    /// Sweep a generator parameter and measure detection accuracy.
    Experiment(CommonArgs),
    /// Intersections, opinion tables and accumulated curves for seed files.
    Report(CommonArgs),
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// TOML config; a previous run's manifest.toml works too.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Root random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Extra override, `key=value` with a TOML value; dotted keys reach into
    /// tables (`generator.min_influence=0.3`).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

// ---- configs ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphInput {
    pub edges: PathBuf,
    pub nodes: Option<PathBuf>,
    pub messages: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub mapping: BbaMapping,
}

fn default_gamma() -> f64 {
    DEFAULT_GAMMA
}

impl GraphInput {
    fn load(&self) -> Result<InfluenceGraph, CliError> {
        let files = GraphFiles {
            edges: Some(&self.edges),
            nodes: self.nodes.as_deref(),
            messages: self.messages.as_deref(),
            lexicon: self.lexicon.as_deref(),
        };
        let (g, report) = load_graph(
            &files,
            LoadOptions {
                gamma: self.gamma,
                mapping: self.mapping,
            },
        )
        .map_err(compute)?;
        if report.empty_messages + report.unknown_authors > 0 {
            log::warn!(
                "{} empty messages, {} messages from unknown authors",
                report.empty_messages,
                report.unknown_authors
            );
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    #[default]
    Evidential,
    Cd,
    Oc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OcSection {
    #[serde(default = "default_prune")]
    pub prune_fraction: f64,
    #[serde(default)]
    pub weights: OcWeights,
}

fn default_prune() -> f64 {
    0.5
}

impl Default for OcSection {
    fn default() -> Self {
        OcSection {
            prune_fraction: default_prune(),
            weights: OcWeights::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaximizeConfig {
    #[serde(default)]
    pub model: Model,
    #[serde(default = "default_measure")]
    pub measure: MeasureKind,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub seed: u64,
    /// Record wall-clock time. Off by default so reruns are byte-identical.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub spread: SpreadOptions,
    /// Action log for `model = "cd"`.
    pub actions: Option<PathBuf>,
    /// CD time window; absent means unbounded.
    pub tau: Option<i64>,
    #[serde(default)]
    pub oc: OcSection,
    pub graph: GraphInput,
}

fn default_measure() -> MeasureKind {
    MeasureKind::Plain
}

fn default_k() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub cascade: CascadeModel,
    #[serde(default = "default_edge_values")]
    pub edge_values: EdgeValues,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub wc_target_indegree: bool,
    /// A seeds.json from `maximize`.
    pub seeds_file: Option<PathBuf>,
    /// Explicit seed ids, used when no seeds file is given.
    #[serde(default)]
    pub seed_nodes: Vec<String>,
    pub graph: GraphInput,
}

fn default_edge_values() -> EdgeValues {
    EdgeValues::Influence
}

fn default_runs() -> usize {
    1000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreditsConfig {
    pub actions: PathBuf,
    pub tau: Option<i64>,
    pub graph: GraphInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub generator: GeneratorParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_measures")]
    pub measures: Vec<MeasureKind>,
    #[serde(default)]
    pub spread: SpreadOptions,
    #[serde(default)]
    pub generator: GeneratorParams,
}

fn default_reps() -> usize {
    20
}

fn default_measures() -> Vec<MeasureKind> {
    vec![
        MeasureKind::Plain,
        MeasureKind::Scenario1Prob,
        MeasureKind::Scenario2Prob,
        MeasureKind::Scenario3Prob,
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    pub seed_files: Vec<PathBuf>,
    /// `node,follow,mention,retweet,tweet` table for accumulated curves.
    pub metrics: Option<PathBuf>,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    pub graph: GraphInput,
}

fn default_confidence() -> f64 {
    0.95
}

// ---- config resolution ----

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| usage(format!("empty key in `{key}`")))?;
    let mut cur = table;
    for p in parts {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| usage(format!("`{p}` in `{key}` is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_override(s: &str) -> Result<(String, toml::Value), CliError> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| usage(format!("override `{s}` is not KEY=VALUE")))?;
    let v = v.trim();
    let value = match format!("x = {v}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("x").expect("just parsed"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((k.trim().to_string(), value))
}

/// Config file plus overrides, deserialized into `T`.
fn resolve<T: for<'de> Deserialize<'de>>(args: &CommonArgs, seed_key: Option<&str>) -> Result<T, CliError> {
    let mut table = match &args.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    table.remove("command");
    if let (Some(s), Some(key)) = (args.seed, seed_key) {
        let s = i64::try_from(s).map_err(|_| usage("--seed must fit in a signed 64-bit integer"))?;
        set_path(&mut table, key, toml::Value::Integer(s))?;
    }
    if let Some(m) = &args.measure {
        m.parse::<MeasureKind>().map_err(usage)?;
        table.insert("measure".into(), toml::Value::String(m.clone()));
    }
    if let Some(k) = args.k {
        table.insert("k".into(), toml::Value::Integer(k as i64));
    }
    for s in &args.set {
        let (k, v) = parse_override(s)?;
        set_path(&mut table, &k, v)?;
    }
    T::deserialize(toml::Value::Table(table)).map_err(|e| usage(format!("invalid config: {e}")))
}

fn manifest<T: Serialize>(command: &str, cfg: &T) -> Result<Vec<u8>, CliError> {
    let mut table = toml::Table::new();
    table.insert("command".into(), toml::Value::String(command.into()));
    let body = toml::Table::try_from(cfg).map_err(compute)?;
    table.extend(body);
    Ok(toml::to_string(&table).map_err(compute)?.into_bytes())
}

/// Files produced by a command, written together at the end.
#[derive(Default)]
struct Outputs(BTreeMap<String, Vec<u8>>);

impl Outputs {
    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.0.insert(name.into(), bytes);
    }

    /// Stages every file as a hidden temporary, then renames them in place.
    fn commit(self, dir: &Path) -> Result<Vec<String>, CliError> {
        fs::create_dir_all(dir).map_err(|e| compute(format!("{}: {e}", dir.display())))?;
        let mut staged = Vec::new();
        for (name, bytes) in &self.0 {
            let tmp = dir.join(format!(".{name}.tmp"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                return Err(compute(format!("{}: {e}", tmp.display())));
            }
            staged.push((tmp, dir.join(name)));
        }
        for (tmp, dst) in &staged {
            fs::rename(tmp, dst).map_err(|e| compute(format!("{}: {e}", dst.display())))?;
        }
        Ok(self.0.into_keys().collect())
    }
}

fn json<T: Serialize>(v: &T) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_vec_pretty(v).map_err(compute)?;
    s.push(b'\n');
    Ok(s)
}

fn csv_bytes<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    f(&mut w).map_err(compute)?;
    w.into_inner().map_err(|e| compute(e.to_string()))
}

/// Seed for the `index`-th independent unit of work under `root`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index);
    rng.next_u64()
}

fn out_dir(args: &CommonArgs) -> PathBuf {
    args.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

// ---- commands ----

fn cmd_maximize(args: &CommonArgs) -> Result<Outputs, CliError> {
    let cfg: MaximizeConfig = resolve(args, Some("seed"))?;
    if !(0.0..=1.0).contains(&cfg.oc.prune_fraction) {
        return Err(usage("oc.prune_fraction must lie in [0, 1]"));
    }
    if cfg.model == Model::Cd && cfg.actions.is_none() {
        return Err(usage("model = \"cd\" needs an `actions` file"));
    }
    let g = cfg.graph.load()?;
    let result = match cfg.model {
        Model::Evidential => maximize_with(
            &g,
            cfg.k,
            cfg.measure,
            MaximizeOptions {
                spread: cfg.spread,
                timing: cfg.timing,
            },
        ),
        Model::Cd => {
            let log = load_actions(cfg.actions.as_deref().expect("checked")).map_err(compute)?;
            let credits = cd_assign_credits(&g, &log, cfg.tau);
            cd_maximize(&g, &credits, cfg.k, cfg.timing)
        }
        Model::Oc => {
            let oc = OcConfig {
                prune_fraction: cfg.oc.prune_fraction,
                weights: cfg.oc.weights,
                rng_seed: cfg.seed,
            };
            oc_maximize(&g, cfg.k, &oc, cfg.timing)
        }
    };
    let mut out = Outputs::default();
    out.add("seeds.json", json(&result)?);
    out.add(
        "runtime.csv",
        csv_bytes(|w| {
            w.write_record(["model", "nodes", "edges", "k", "elapsed_seconds"])?;
            let elapsed = result.elapsed_seconds.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([
                result.measure.clone(),
                g.node_count().to_string(),
                g.edge_count().to_string(),
                result.k.to_string(),
                elapsed,
            ])
        })?,
    );
    out.add("manifest.toml", manifest("maximize", &cfg)?);
    Ok(out)
}

#[derive(Serialize)]
struct SpreadReport<'a> {
    cascade: CascadeModel,
    runs: usize,
    seeds: &'a [String],
    spread: f64,
}

fn read_seed_file(p: &Path) -> Result<SeedResult, CliError> {
    let text = fs::read_to_string(p).map_err(|e| compute(format!("{}: {e}", p.display())))?;
    serde_json::from_str(&text).map_err(|e| compute(format!("{}: {e}", p.display())))
}

fn cmd_simulate(args: &CommonArgs) -> Result<Outputs, CliError> {
    let cfg: SimulateConfig = resolve(args, Some("seed"))?;
    if cfg.runs == 0 {
        return Err(usage("runs must be at least 1"));
    }
    let g = cfg.graph.load()?;
    let ids: Vec<String> = match &cfg.seeds_file {
        Some(p) => read_seed_file(p)?.node_ids().map(String::from).collect(),
        None => cfg.seed_nodes.clone(),
    };
    let seeds: Vec<usize> = ids
        .iter()
        .map(|id| g.index_of(id).map_err(compute))
        .collect::<Result<_, _>>()?;
    let cascade = CascadeConfig {
        model: cfg.cascade,
        edge_values: cfg.edge_values.clone(),
        monte_carlo_runs: cfg.runs,
        rng_seed: cfg.seed,
        wc_target_indegree: cfg.wc_target_indegree,
    };
    let spread = cascade_spread(&g, &seeds, &cascade).map_err(|e| match e {
        crate::baselines::BaselineError::Config(m) => usage(m),
        other => compute(other),
    })?;
    let mut out = Outputs::default();
    out.add(
        "spread.json",
        json(&SpreadReport {
            cascade: cfg.cascade,
            runs: cfg.runs,
            seeds: &ids,
            spread,
        })?,
    );
    out.add("manifest.toml", manifest("simulate", &cfg)?);
    Ok(out)
}

fn cmd_credits(args: &CommonArgs) -> Result<Outputs, CliError> {
    let cfg: CreditsConfig = resolve(args, None)?;
    let g = cfg.graph.load()?;
    let log = load_actions(&cfg.actions).map_err(compute)?;
    let table = cd_assign_credits(&g, &log, cfg.tau);
    let mut out = Outputs::default();
    out.add(
        "credits.csv",
        csv_bytes(|w| {
            w.write_record(["action", "influencer", "user", "direct", "total"])?;
            for ((a, v, u), total) in &table.total {
                let direct = table.direct_credit(a, *v, *u);
                w.write_record([
                    a.as_str(),
                    g.id_of(*v),
                    g.id_of(*u),
                    &direct.to_string(),
                    &total.to_string(),
                ])?;
            }
            Ok(())
        })?,
    );
    out.add("manifest.toml", manifest("credits", &cfg)?);
    Ok(out)
}

fn cmd_generate(args: &CommonArgs) -> Result<Outputs, CliError> {
    let mut cfg: GenerateConfig = resolve(args, Some("seed"))?;
    cfg.generator.rng_seed = cfg.seed;
    cfg.generator.validate().map_err(usage)?;
    let (g, truth) = generate_network(&cfg.generator).map_err(compute)?;
    let mut edges = Vec::new();
    g.write_edges(&mut edges).map_err(compute)?;
    let mut nodes = Vec::new();
    g.write_nodes(&mut nodes).map_err(compute)?;
    let mut out = Outputs::default();
    out.add("edges.csv", edges);
    out.add("nodes.csv", nodes);
    out.add("ground_truth.json", json(&GroundTruthFile::from_truth(&g, &truth))?);
    out.add("manifest.toml", manifest("generate", &cfg)?);
    Ok(out)
}

/// Per-repetition outcome of one measure.
#[derive(Clone, Copy, Default)]
struct RepScore {
    acc: [f64; 4],
    pos: f64,
    neg: f64,
}

fn cmd_experiment(args: &CommonArgs) -> Result<Outputs, CliError> {
    let cfg: ExperimentConfig = resolve(args, Some("seed"))?;
    if cfg.repetitions == 0 {
        return Err(usage("repetitions must be at least 1"));
    }
    if cfg.values.is_empty() || cfg.measures.is_empty() {
        return Err(usage("values and measures must be non-empty"));
    }
    for &v in &cfg.values {
        let mut p = cfg.generator.clone();
        p.set(&cfg.parameter, v).map_err(usage)?;
        p.validate().map_err(usage)?;
    }

    let jobs: Vec<(usize, usize)> = (0..cfg.values.len())
        .flat_map(|vi| (0..cfg.repetitions).map(move |r| (vi, r)))
        .collect();
    let results: Vec<Result<Vec<RepScore>, String>> = jobs
        .par_iter()
        .map(|&(vi, rep)| {
            let mut p = cfg.generator.clone();
            p.set(&cfg.parameter, cfg.values[vi]).map_err(|e| e.to_string())?;
            p.rng_seed = derive_seed(cfg.seed, rep as u64);
            let (g, t) = generate_network(&p).map_err(|e| e.to_string())?;
            let truths = [
                &t.influencers,
                &t.positive_influencers,
                &t.pos_influencing_pos,
                &t.pos_influencing_neg,
            ];
            cfg.measures
                .iter()
                .map(|&kind| {
                    let r = maximize_with(
                        &g,
                        cfg.k,
                        kind,
                        MaximizeOptions {
                            spread: cfg.spread,
                            timing: false,
                        },
                    );
                    let idx = seed_indices(&g, &r).map_err(|e| e.to_string())?;
                    let detected: BTreeSet<usize> = idx.iter().copied().collect();
                    let mut s = RepScore::default();
                    for (slot, truth) in s.acc.iter_mut().zip(truths) {
                        // An empty category (e.g. no positive influencers) scores 0.
                        *slot = accuracy(&detected, truth).unwrap_or(0.0);
                    }
                    if !idx.is_empty() {
                        let n = idx.len() as f64;
                        s.pos = idx.iter().map(|&v| g.node(v).opinion().pos()).sum::<f64>() / n;
                        s.neg = idx.iter().map(|&v| g.node(v).opinion().neg()).sum::<f64>() / n;
                    }
                    Ok(s)
                })
                .collect()
        })
        .collect();

    let mut failures = String::new();
    let bytes = csv_bytes(|w| {
        w.write_record([
            "parameter",
            "value",
            "measure",
            "accuracy_influencers",
            "accuracy_positive",
            "accuracy_pos_pos",
            "accuracy_pos_neg",
            "mean_seed_pos",
            "mean_seed_neg",
            "repetitions",
            "failed",
        ])?;
        for (vi, &value) in cfg.values.iter().enumerate() {
            let reps: Vec<&Result<Vec<RepScore>, String>> = results
                .iter()
                .zip(&jobs)
                .filter(|(_, j)| j.0 == vi)
                .map(|(r, _)| r)
                .collect();
            let ok: Vec<&Vec<RepScore>> = reps.iter().filter_map(|r| r.as_ref().ok()).collect();
            for (rep, r) in reps.iter().enumerate() {
                if let Err(e) = r {
                    let _ = writeln!(failures, "{}={value} rep {rep}: {e}", cfg.parameter);
                }
            }
            let failed = reps.len() - ok.len();
            for (mi, kind) in cfg.measures.iter().enumerate() {
                let n = ok.len() as f64;
                let mean = |f: &dyn Fn(&RepScore) -> f64| -> String {
                    if ok.is_empty() {
                        String::new()
                    } else {
                        (ok.iter().map(|r| f(&r[mi])).sum::<f64>() / n).to_string()
                    }
                };
                w.write_record([
                    cfg.parameter.clone(),
                    value.to_string(),
                    kind.name().to_string(),
                    mean(&|r| r.acc[0]),
                    mean(&|r| r.acc[1]),
                    mean(&|r| r.acc[2]),
                    mean(&|r| r.acc[3]),
                    mean(&|r| r.pos),
                    mean(&|r| r.neg),
                    ok.len().to_string(),
                    failed.to_string(),
                ])?;
            }
        }
        Ok(())
    })?;
    if !failures.is_empty() {
        log::warn!("failed repetitions:\n{failures}");
    }
    let mut out = Outputs::default();
    out.add("accuracy.csv", bytes);
    out.add("manifest.toml", manifest("experiment", &cfg)?);
    Ok(out)
}

fn ci_cells(c: Option<MeanCi>) -> [String; 2] {
    match c {
        Some(c) => [c.mean.to_string(), c.half_width.to_string()],
        None => [String::new(), String::new()],
    }
}

fn cmd_report(args: &CommonArgs) -> Result<Outputs, CliError> {
    let cfg: ReportConfig = resolve(args, None)?;
    if cfg.seed_files.is_empty() {
        return Err(usage("seed_files is empty"));
    }
    let mut missing: Vec<String> = cfg
        .seed_files
        .iter()
        .chain(cfg.metrics.iter())
        .chain([&cfg.graph.edges])
        .filter(|p| !p.is_file())
        .map(|p| p.display().to_string())
        .collect();
    if !missing.is_empty() {
        missing.insert(0, "missing input files:".into());
        return Err(compute(missing.join("\n  ")));
    }
    let g = cfg.graph.load()?;
    let results: Vec<SeedResult> = cfg
        .seed_files
        .iter()
        .map(|p| read_seed_file(p))
        .collect::<Result<_, _>>()?;
    let names: Vec<String> = cfg
        .seed_files
        .iter()
        .zip(&results)
        .map(|(p, r)| {
            let stem = p.file_stem().and_then(|s| s.to_str()).unwrap_or("seeds");
            let parent = p.parent().and_then(|d| d.file_name()).and_then(|s| s.to_str());
            match (stem, parent) {
                ("seeds", Some(dir)) => dir.to_string(),
                ("seeds", None) => r.measure.clone(),
                (s, _) => s.to_string(),
            }
        })
        .collect();
    if names.iter().collect::<BTreeSet<_>>().len() != names.len() {
        return Err(usage("seed files must have distinct names"));
    }

    let mut out = Outputs::default();
    let matrix = intersection_matrix(&results);
    out.add(
        "intersections.csv",
        csv_bytes(|w| {
            let mut header = vec!["model".to_string()];
            header.extend(names.iter().cloned());
            w.write_record(&header)?;
            for (name, row) in names.iter().zip(&matrix) {
                let mut rec = vec![name.clone()];
                rec.extend(row.iter().map(|c| c.to_string()));
                w.write_record(&rec)?;
            }
            Ok(())
        })?,
    );

    let mut rows = Vec::new();
    for (name, r) in names.iter().zip(&results) {
        let idx = seed_indices(&g, r).map_err(compute)?;
        let rep = opinion_report(&g, &idx, cfg.confidence).map_err(|e| match e {
            crate::eval::EvalError::BadConfidence(_) => usage(e),
            other => compute(format!("{name}: {other}")),
        })?;
        let mut row = vec![name.clone()];
        row.extend(ci_cells(Some(rep.seed_pos)));
        row.extend(ci_cells(Some(rep.seed_neg)));
        row.extend(ci_cells(rep.neighbor_pos));
        row.extend(ci_cells(rep.neighbor_neg));
        rows.push(row);
    }
    out.add(
        "opinions.csv",
        csv_bytes(|w| {
            w.write_record([
                "model",
                "seed_pos_mean",
                "seed_pos_ci",
                "seed_neg_mean",
                "seed_neg_ci",
                "neighbor_pos_mean",
                "neighbor_pos_ci",
                "neighbor_neg_mean",
                "neighbor_neg_ci",
            ])?;
            for r in &rows {
                w.write_record(r)?;
            }
            Ok(())
        })?,
    );

    if let Some(mp) = &cfg.metrics {
        let file = fs::File::open(mp).map_err(|e| compute(format!("{}: {e}", mp.display())))?;
        let metrics = read_node_metrics(file).map_err(|e| compute(format!("{}: {e}", mp.display())))?;
        for (name, r) in names.iter().zip(&results) {
            let (curve, _) = accumulated_curves(r, &metrics);
            let mut buf = Vec::new();
            write_curve(&mut buf, &curve).map_err(compute)?;
            out.add(format!("curves_{name}.csv"), buf);
        }
    }
    out.add("manifest.toml", manifest("report", &cfg)?);
    Ok(out)
}

/// Runs one parsed command and writes its outputs.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let (args, outputs) = match &cli.command {
        Command::Maximize(a) => (a, cmd_maximize(a)?),
        Command::Simulate(a) => (a, cmd_simulate(a)?),
        Command::Credits(a) => (a, cmd_credits(a)?),
        Command::Generate(a) => (a, cmd_generate(a)?),
        Command::Experiment(a) => (a, cmd_experiment(a)?),
        Command::Report(a) => (a, cmd_report(a)?),
    };
    outputs.commit(&out_dir(args))
}

/// Entry point for the binary; returns the process exit code.
pub fn run_from<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                log::info!("wrote {f}");
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run() -> i32 {
    run_from(std::env::args_os())
}
