//! End-to-end solve pipeline, parameter sweeps and report serialization.
//!
//! A solve runs: parse → penalty QUBO → Ising table → ramp initialization →
//! Nelder–Mead on the CVaR objective → final evolution → sampling →
//! scoring against the exhaustive IDS catalog.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::{self, BitStringError};
use crate::graph::{parse_graph, Graph, GraphError, VertexSet};
use crate::ising::{qubo_to_ising, IsingError};
use crate::oracle::{brute_force_ids, marginalize, score_distribution, OracleError, ScoreReport};
use crate::qubo::{build_qubo, default_penalty, QuboError};
use crate::simulator::{AnsatzParams, SampleDistribution};
use crate::variational::{
    initial_params, minimize, CvarConfig, OptimizerConfig, QaoaObjective, Sampling, SeedPolicy,
    TailWeighting, Termination, TracePoint, VariationalError,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse_graph: {0}")]
    Parse(#[from] GraphError),
    #[error("decode_bitstring: {0}")]
    Decode(String),
    #[error("build_qubo: {0}")]
    Qubo(#[from] QuboError),
    #[error("energy_table: {0}")]
    Ising(#[from] IsingError),
    #[error("{step}: {source}")]
    Variational {
        step: &'static str,
        source: VariationalError,
    },
    #[error("score_distribution: {0}")]
    Oracle(#[from] OracleError),
    #[error("serializing report: {0}")]
    Serialize(String),
}

impl HarnessError {
    /// Process exit code: 1 usage, 2 input, 3 internal numerical error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Read { .. } | HarnessError::Parse(_) | HarnessError::Decode(_) => 2,
            _ => 3,
        }
    }
}

fn step(step: &'static str) -> impl FnOnce(VariationalError) -> HarnessError {
    move |source| HarnessError::Variational { step, source }
}

/// Everything needed to replay a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub graph_path: PathBuf,
    pub layers: usize,
    pub alpha: f64,
    /// `None` means three quarters of the vertex count.
    pub penalty: Option<f64>,
    pub max_iterations: usize,
    /// 0 selects exact probabilities instead of sampling.
    pub shots: usize,
    pub seed: u64,
    pub ramp_scale: f64,
    pub function_tolerance: f64,
    pub initial_step: f64,
    pub seed_policy: SeedPolicy,
    pub tail_weighting: TailWeighting,
    pub output_path: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::<f64>::default();
        Self {
            graph_path: PathBuf::new(),
            layers: 15,
            alpha: 0.3,
            penalty: None,
            max_iterations: opt.max_iterations,
            shots: 10_000,
            seed: 7,
            ramp_scale: 0.75,
            function_tolerance: opt.function_tolerance,
            initial_step: opt.initial_step,
            seed_policy: SeedPolicy::default(),
            tail_weighting: TailWeighting::Fractional,
            output_path: None,
        }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if self.layers == 0 {
            return bad("layers must be at least 1".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if let Some(p) = self.penalty {
            if !(p > 0.0 && p.is_finite()) {
                return bad(format!("penalty must be positive, got {p}"));
            }
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be positive".into());
        }
        if !(self.ramp_scale > 0.0 && self.ramp_scale.is_finite()) {
            return bad(format!(
                "ramp_scale must be positive, got {}",
                self.ramp_scale
            ));
        }
        if [self.function_tolerance, self.initial_step]
            .iter()
            .any(|v| v.is_nan() || *v <= 0.0)
        {
            return bad("function_tolerance and initial_step must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSummary {
    pub minimum_size: usize,
    pub optimal_sets: Vec<VertexSet>,
    pub ids_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl From<&AnsatzParams<f64>> for ParamsRecord {
    fn from(p: &AnsatzParams<f64>) -> Self {
        Self {
            gammas: p.gammas().to_vec(),
            betas: p.betas().to_vec(),
        }
    }
}

/// Self-contained record of one solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub penalty: f64,
    pub graph: GraphSummary,
    pub qubit_count: usize,
    pub total_shots: usize,
    /// Full-register outcomes (vertex bits then slack bits).
    pub distribution: BTreeMap<String, f64>,
    pub vertex_marginal: BTreeMap<String, f64>,
    pub best_params: ParamsRecord,
    pub initial_cost: f64,
    pub best_cost: f64,
    pub evaluations: usize,
    pub terminated_by: Termination,
    pub cost_trace: Vec<TracePoint<f64>>,
    pub score: ScoreReport,
    /// IDS read off the most probable vertex string.
    pub solution: VertexSet,
    pub solution_is_ids: bool,
    pub catalog: CatalogSummary,
    pub wall_time_secs: f64,
}

impl RunReport {
    /// Copy with timing zeroed, for replay comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_secs: 0.0,
            ..self.clone()
        }
    }

    /// Rebuilds the sampled distribution from its serialized form.
    pub fn sampled_distribution(&self) -> Result<SampleDistribution<f64>, BitStringError> {
        let mut d = SampleDistribution::from_strings(
            self.distribution.iter().map(|(k, &v)| (k.as_str(), v)),
        )?;
        d.qubit_count = self.qubit_count;
        d.total_shots = self.total_shots;
        Ok(d)
    }

    pub fn to_json(&self) -> Result<String, HarnessError> {
        serde_json::to_string_pretty(self).map_err(|e| HarnessError::Serialize(e.to_string()))
    }

    /// `iteration,value,best_so_far` rows of the cost trace.
    pub fn trace_csv(&self) -> Result<String, HarnessError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let ser = |e: csv::Error| HarnessError::Serialize(e.to_string());
        w.write_record(["iteration", "value", "best_so_far"])
            .map_err(ser)?;
        for p in &self.cost_trace {
            w.serialize((p.iteration, p.value, p.best_so_far))
                .map_err(ser)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| HarnessError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
    }
}

/// Companion path of the cost-trace CSV for a report path (`x.json` → `x.trace.csv`).
pub fn trace_path(report_path: &Path) -> PathBuf {
    report_path.with_extension("trace.csv")
}

/// Writes the JSON report and its cost-trace CSV mirror.
pub fn write_report(report: &RunReport, path: &Path) -> Result<(), HarnessError> {
    let write = |p: &Path, text: String| {
        fs::write(p, text).map_err(|source| HarnessError::Write {
            path: p.to_path_buf(),
            source,
        })
    };
    write(path, report.to_json()?)?;
    write(&trace_path(path), report.trace_csv()?)
}

pub fn load_graph(path: &Path) -> Result<Graph, HarnessError> {
    let text = fs::read_to_string(path).map_err(|source| HarnessError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(parse_graph(&text)?)
}

/// Vertex set `{i : z_i = 1, i < vertex_count}` of a printed outcome.
pub fn decode_bitstring(z: &str, vertex_count: usize) -> Result<VertexSet, HarnessError> {
    let b = bits::parse_bits(z).map_err(|e| HarnessError::Decode(e.to_string()))?;
    if b.len() < vertex_count {
        return Err(HarnessError::Decode(format!(
            "string {z:?} is shorter than {vertex_count} vertices"
        )));
    }
    Ok((0..vertex_count).filter(|&i| b[i]).collect())
}

/// Stream used for the objective's shots, kept apart from the final readout.
fn optimization_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29) ^ 0xD1B5_4A32_D192_ED03
}

/// Loads `cfg.graph_path`, solves, and writes the report if `output_path` is set.
pub fn run_solve(cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let graph = load_graph(&cfg.graph_path)?;
    let report = solve_graph(&graph, cfg)?;
    if let Some(out) = &cfg.output_path {
        write_report(&report, out)?;
    }
    Ok(report)
}

/// Runs the pipeline on an in-memory graph.
pub fn solve_graph(graph: &Graph, cfg: &RunConfig) -> Result<RunReport, HarnessError> {
    cfg.validate()?;
    let started = Instant::now();
    let n = graph.vertex_count();
    let penalty = cfg.penalty.unwrap_or_else(|| default_penalty(n));

    let model = build_qubo(graph, penalty)?;
    let table = qubo_to_ising(&model).energy_table()?;
    let catalog = brute_force_ids(graph)?;

    let init = initial_params(cfg.layers, cfg.ramp_scale).map_err(step("initial_params"))?;
    let cvar = CvarConfig {
        alpha: cfg.alpha,
        weighting: cfg.tail_weighting,
    };
    let sampling = Sampling {
        shots: cfg.shots,
        seed: optimization_seed(cfg.seed),
        policy: cfg.seed_policy,
    };
    let mut objective = QaoaObjective::new(table.clone(), cfg.layers, cvar, sampling)
        .map_err(step("qaoa_objective"))?;
    let opt_cfg = OptimizerConfig {
        max_iterations: cfg.max_iterations,
        function_tolerance: cfg.function_tolerance,
        initial_step: cfg.initial_step,
    };
    let mut failure = None;
    let result = minimize(
        |p| {
            objective.evaluate(p).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        },
        &init,
        &opt_cfg,
    );
    if let Some(e) = failure {
        return Err(step("qaoa_objective")(e));
    }
    let result = result.map_err(step("minimize"))?;

    let state = objective
        .state(&result.best_params)
        .map_err(step("evolve"))?;
    let dist = state.sample(cfg.shots, cfg.seed);
    let score = score_distribution(&dist, graph, &catalog)?;
    let marginal = marginalize(&dist, n)?;

    let solution = match score.top_strings.first() {
        Some(top) => decode_bitstring(&top.bits, n)?,
        None => VertexSet::new(),
    };
    let solution_is_ids = catalog.is_ids(&solution);

    Ok(RunReport {
        config: cfg.clone(),
        penalty,
        graph: GraphSummary {
            vertex_count: n,
            edges: graph.edges().to_vec(),
        },
        qubit_count: table.qubit_count(),
        total_shots: dist.total_shots,
        distribution: dist.iter_strings().collect(),
        vertex_marginal: marginal
            .iter()
            .map(|(&k, &w)| (bits::format_index(k, n), w))
            .collect(),
        best_params: ParamsRecord::from(&result.best_params),
        initial_cost: result.cost_trace[0].value,
        best_cost: result.best_cost,
        evaluations: result.evaluations,
        terminated_by: result.terminated_by,
        cost_trace: result.cost_trace,
        score,
        solution,
        solution_is_ids,
        catalog: CatalogSummary {
            minimum_size: catalog.minimum_size,
            optimal_sets: catalog.optimal_sets.clone(),
            ids_count: catalog.all_ids.len(),
        },
        wall_time_secs: started.elapsed().as_secs_f64(),
    })
}

/// Run parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Layers,
    Alpha,
    Penalty,
    MaxIterations,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Layers => "layers",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Penalty => "penalty",
            SweepAxis::MaxIterations => "max_iterations",
        }
    }

    fn apply(self, cfg: &mut RunConfig, value: f64) -> Result<(), HarnessError> {
        let count = |v: f64| {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(HarnessError::Config(format!(
                    "{} needs a positive integer, got {v}",
                    self.name()
                )))
            }
        };
        match self {
            SweepAxis::Layers => cfg.layers = count(value)?,
            SweepAxis::Alpha => cfg.alpha = value,
            SweepAxis::Penalty => cfg.penalty = Some(value),
            SweepAxis::MaxIterations => cfg.max_iterations = count(value)?,
        }
        Ok(())
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "layers" | "q" => Ok(SweepAxis::Layers),
            "alpha" => Ok(SweepAxis::Alpha),
            "penalty" | "p" => Ok(SweepAxis::Penalty),
            "max_iterations" | "max_iters" => Ok(SweepAxis::MaxIterations),
            other => Err(HarnessError::Config(format!(
                "unknown sweep axis {other:?}"
            ))),
        }
    }
}

/// One cell of a sweep; failed cells carry the error instead of scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub settings: BTreeMap<SweepAxis, f64>,
    pub seed: u64,
    pub correct_probability: Option<f64>,
    pub optimal_probability: Option<f64>,
    /// How many minimum IDS strings rank in the top two vertex strings.
    pub optimal_in_top_two: Option<usize>,
    pub best_cost: Option<f64>,
    pub error: Option<String>,
}

/// Cartesian product of every axis' values with every seed, each solved independently.
///
/// Seeds are shared across settings so cells differ only in the swept parameters.
pub fn run_sweep(
    graph: &Graph,
    base: &RunConfig,
    axes: &[(SweepAxis, Vec<f64>)],
    seeds: &[u64],
) -> Vec<SweepRow> {
    let mut grid: Vec<BTreeMap<SweepAxis, f64>> = vec![BTreeMap::new()];
    for (axis, values) in axes {
        grid = grid
            .into_iter()
            .flat_map(|cell| {
                values.iter().map(move |&v| {
                    let mut next = cell.clone();
                    next.insert(*axis, v);
                    next
                })
            })
            .collect();
    }

    let mut rows = Vec::with_capacity(grid.len() * seeds.len());
    for settings in grid {
        for &seed in seeds {
            let outcome = settings
                .iter()
                .try_fold(
                    RunConfig {
                        seed,
                        output_path: None,
                        ..base.clone()
                    },
                    |mut cfg, (axis, &v)| axis.apply(&mut cfg, v).map(|_| cfg),
                )
                .and_then(|cfg| solve_graph(graph, &cfg));
            rows.push(match outcome {
                Ok(report) => {
                    let top_two = report
                        .catalog
                        .optimal_sets
                        .iter()
                        .filter(|set| {
                            report.score.top_strings.iter().take(2).any(|r| {
                                decode_bitstring(&r.bits, graph.vertex_count())
                                    .is_ok_and(|d| &d == *set)
                            })
                        })
                        .count();
                    SweepRow {
                        settings: settings.clone(),
                        seed,
                        correct_probability: Some(report.score.correct_probability),
                        optimal_probability: Some(report.score.optimal_probability),
                        optimal_in_top_two: Some(top_two),
                        best_cost: Some(report.best_cost),
                        error: None,
                    }
                }
                Err(e) => SweepRow {
                    settings: settings.clone(),
                    seed,
                    correct_probability: None,
                    optimal_probability: None,
                    optimal_in_top_two: None,
                    best_cost: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    rows
}

/// CSV with one column per swept axis followed by the scores.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String, HarnessError> {
    let axes: Vec<SweepAxis> = rows
        .first()
        .map(|r| r.settings.keys().copied().collect())
        .unwrap_or_default();
    let ser = |e: csv::Error| HarnessError::Serialize(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = axes.iter().map(|a| a.name().to_string()).collect();
    header.extend(
        [
            "seed",
            "correct_probability",
            "optimal_probability",
            "optimal_in_top_two",
            "best_cost",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header).map_err(ser)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let mut record: Vec<String> = axes.iter().map(|a| r.settings[a].to_string()).collect();
        record.push(r.seed.to_string());
        record.push(opt(r.correct_probability));
        record.push(opt(r.optimal_probability));
        record.push(
            r.optimal_in_top_two
                .map(|v| v.to_string())
                .unwrap_or_default(),
        );
        record.push(opt(r.best_cost));
        record.push(r.error.clone().unwrap_or_default());
        w.write_record(&record).map_err(ser)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| HarnessError::Serialize(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
}

/// Writes `<prefix>.csv` and `<prefix>.json`.
pub fn write_sweep(rows: &[SweepRow], prefix: &Path) -> Result<(PathBuf, PathBuf), HarnessError> {
    let csv_path = prefix.with_extension("csv");
    let json_path = prefix.with_extension("json");
    let json =
        serde_json::to_string_pretty(rows).map_err(|e| HarnessError::Serialize(e.to_string()))?;
    for (path, text) in [(&csv_path, sweep_csv(rows)?), (&json_path, json)] {
        fs::write(path, text).map_err(|source| HarnessError::Write {
            path: path.clone(),
            source,
        })?;
    }
    Ok((csv_path, json_path))
}
