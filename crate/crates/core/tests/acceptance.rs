//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{assignment, six_node, six_node_expression, OPTIMAL_STRINGS};
use idp_qaoa::oracle::brute_force_qubo_min;
use idp_qaoa::variational::{QaoaObjective, Sampling};
use idp_qaoa::{
    brute_force_ids, build_qubo, evaluate_qubo, evolve, qubo_to_ising, solve_graph, AnsatzParams,
    CvarConfig, Rational, RunConfig, RunReport, VertexSet,
};

const FAST_LIMIT: Duration = Duration::from_secs(1);
const ISING_TOLERANCE: f64 = 1e-9;
const NORM_DRIFT: f64 = 1e-9;
const MEAN_TOLERANCE: f64 = 1e-9;
const CVAR_TOLERANCE: f64 = 1e-12;
const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const REQUIRED_PASSING_SEEDS: usize = 3;
const MIN_CORRECT: f64 = 0.10;
const MIN_OPTIMAL: f64 = 0.05;
const TOP_K: usize = 4;
const DESCENT_CHECKPOINT: usize = 500;
const DESCENT_FRACTION: f64 = 0.6;
const SHORT_BUDGET: usize = 100;

struct Gate {
    failures: usize,
}

impl Gate {
    fn record(&mut self, id: u32, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => println!("PASS  criterion {id} ({name}): {detail}"),
            Err(detail) => {
                self.failures += 1;
                println!("FAIL  criterion {id} ({name}): {detail}");
            }
        }
    }
}

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn within_limit(started: Instant) -> Result<Duration, String> {
    let elapsed = started.elapsed();
    ensure(
        elapsed < FAST_LIMIT,
        format!("took {elapsed:.2?}, limit {FAST_LIMIT:?}"),
    )?;
    Ok(elapsed)
}

fn optimal_vertex_strings() -> BTreeSet<String> {
    OPTIMAL_STRINGS.iter().map(|s| s.to_string()).collect()
}

fn oracle_ground_truth() -> Result<String, String> {
    let started = Instant::now();
    let catalog = brute_force_ids(&six_node()).map_err(|e| e.to_string())?;
    let elapsed = within_limit(started)?;
    ensure(
        catalog.minimum_size == 3,
        format!("minimum size {}", catalog.minimum_size),
    )?;
    let expected = vec![VertexSet::from([0, 3, 4]), VertexSet::from([1, 2, 5])];
    ensure(
        catalog.optimal_sets == expected,
        format!("optimal sets {:?}", catalog.optimal_sets),
    )?;
    Ok(format!(
        "minimum size 3, optimal sets {{0, 3, 4}} and {{1, 2, 5}} in {elapsed:.2?}"
    ))
}

fn qubo_reconstruction() -> Result<String, String> {
    let p = Rational::new(9, 2);
    let model = build_qubo(&six_node(), p).map_err(|e| e.to_string())?;
    ensure(
        model.variable_count() == 10,
        format!("{} variables", model.variable_count()),
    )?;
    let expected = six_node_expression(p);
    let mut mismatches = Vec::new();
    let mut check = |vars: &[usize], got: Rational| {
        if expected.coefficient(vars) != got {
            mismatches.push(format!("{vars:?}: {got} vs {}", expected.coefficient(vars)));
        }
    };
    check(&[], model.constant());
    for (&i, &c) in model.linear() {
        check(&[i], c);
    }
    for (&(i, j), &c) in model.quadratic() {
        check(&[i, j], c);
    }
    let produced = 1 + model.linear().len() + model.quadratic().len();
    ensure(mismatches.is_empty(), mismatches.join("; "))?;
    ensure(
        produced == expected.0.len(),
        format!("{produced} terms produced, {} expected", expected.0.len()),
    )?;
    let registry: Vec<_> = model
        .slack_registry()
        .iter()
        .map(|s| (s.index, s.vertex))
        .collect();
    ensure(
        registry == [(6, 2), (7, 2), (8, 3), (9, 3)],
        format!("slack registry {registry:?}"),
    )?;
    Ok(format!(
        "{produced} collected terms equal, 10 variables, slack x6,x7→2 and x8,x9→3"
    ))
}

fn qubo_ising_equivalence() -> Result<String, String> {
    let started = Instant::now();
    let model = build_qubo(&six_node(), 4.5f64).map_err(|e| e.to_string())?;
    let hamiltonian = qubo_to_ising(&model);
    let mut worst: f64 = 0.0;
    for k in 0..1024 {
        let x = assignment(k, 10);
        let q = evaluate_qubo(&model, &x).map_err(|e| e.to_string())?;
        let e = hamiltonian.energy(&x).map_err(|e| e.to_string())?;
        worst = worst.max((q - e).abs());
    }
    let minimum = brute_force_qubo_min(&model).map_err(|e| e.to_string())?;
    let elapsed = within_limit(started)?;
    ensure(worst <= ISING_TOLERANCE, format!("max deviation {worst:e}"))?;
    ensure(
        (minimum.min_value - 3.0).abs() <= ISING_TOLERANCE,
        format!("minimum {}", minimum.min_value),
    )?;
    ensure(
        minimum.argmin.len() == 2,
        format!("{} minimizers", minimum.argmin.len()),
    )?;
    ensure(
        minimum.vertex_parts(6) == optimal_vertex_strings(),
        format!("{:?}", minimum.vertex_parts(6)),
    )?;
    Ok(format!("max |QUBO − Ising| = {worst:e} over 1024 assignments, minimum 3 at 011001/100110, {elapsed:.2?}"))
}

fn penalty_sufficiency() -> Result<String, String> {
    let started = Instant::now();
    let catalog = brute_force_ids(&six_node()).map_err(|e| e.to_string())?;
    let expected: BTreeSet<String> = catalog
        .optimal_sets
        .iter()
        .map(|s| {
            (0..6)
                .map(|i| if s.contains(i) { '1' } else { '0' })
                .collect()
        })
        .collect();
    for p in [3.0, 4.5, 6.0, 9.0] {
        let model = build_qubo(&six_node(), p).map_err(|e| e.to_string())?;
        let minimum = brute_force_qubo_min(&model).map_err(|e| e.to_string())?;
        ensure(
            minimum.vertex_parts(6) == expected,
            format!("P = {p}: {:?}", minimum.vertex_parts(6)),
        )?;
    }
    let elapsed = within_limit(started)?;
    Ok(format!(
        "argmin vertex parts equal the optimal sets for P in {{3, 4.5, 6, 9}}, {elapsed:.2?}"
    ))
}

fn simulator_invariants() -> Result<String, String> {
    let table = qubo_to_ising(&build_qubo(&six_node(), 4.5).map_err(|e| e.to_string())?)
        .energy_table()
        .map_err(|e| e.to_string())?;
    let gammas: Vec<f64> = (0..20).map(|k| 0.13 + 0.31 * k as f64).collect();
    let betas: Vec<f64> = (0..20).map(|k| 2.4 - 0.17 * k as f64).collect();
    let deep = evolve(
        &table,
        &AnsatzParams::new(gammas, betas).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let drift = (deep.norm_sqr() - 1.0).abs();
    ensure(drift <= NORM_DRIFT, format!("norm drift {drift:e}"))?;

    let flat = evolve(&table, &AnsatzParams::empty()).map_err(|e| e.to_string())?;
    let mean = table.energies().iter().sum::<f64>() / table.len() as f64;
    let mean_gap = (flat.expectation(&table).map_err(|e| e.to_string())? - mean).abs();
    ensure(
        mean_gap <= MEAN_TOLERANCE,
        format!("q=0 expectation off by {mean_gap:e}"),
    )?;

    let params =
        AnsatzParams::new(vec![0.35, 0.7, 1.05], vec![0.6, 0.4, 0.2]).map_err(|e| e.to_string())?;
    let mut objective = QaoaObjective::new(
        table.clone(),
        3,
        CvarConfig::new(1.0).map_err(|e| e.to_string())?,
        Sampling::exact(),
    )
    .map_err(|e| e.to_string())?;
    let value = objective.evaluate(&params).map_err(|e| e.to_string())?;
    let expectation = evolve(&table, &params)
        .and_then(|s| s.expectation(&table))
        .map_err(|e| e.to_string())?;
    let cvar_gap = (value - expectation).abs();
    ensure(
        cvar_gap <= CVAR_TOLERANCE,
        format!("CVaR(1) vs expectation {cvar_gap:e}"),
    )?;
    Ok(format!(
        "drift {drift:.1e}, q=0 mean gap {mean_gap:.1e}, CVaR(1) gap {cvar_gap:.1e}"
    ))
}

fn defaults(seed: u64) -> RunConfig {
    RunConfig {
        seed,
        ..RunConfig::default()
    }
}

fn run_seeds(max_iterations: usize) -> Result<Vec<RunReport>, String> {
    SEEDS
        .iter()
        .map(|&seed| {
            solve_graph(
                &six_node(),
                &RunConfig {
                    max_iterations,
                    ..defaults(seed)
                },
            )
            .map_err(|e| format!("seed {seed}: {e}"))
        })
        .collect()
}

fn seed_passes(r: &RunReport) -> bool {
    let in_top = OPTIMAL_STRINGS
        .iter()
        .all(|s| r.score.rank_of(s).is_some_and(|rank| rank < TOP_K));
    r.score.correct_probability >= MIN_CORRECT
        && r.score.optimal_probability >= MIN_OPTIMAL
        && in_top
}

fn fundamental(reports: &[RunReport]) -> Result<String, String> {
    let cfg = &reports[0].config;
    ensure(
        cfg.layers == 15
            && cfg.alpha == 0.3
            && reports[0].penalty == 4.5
            && cfg.max_iterations == 10_000
            && cfg.shots == 10_000,
        "run did not use the fundamental defaults",
    )?;
    let summary: Vec<String> = reports
        .iter()
        .map(|r| {
            let rank = |s| {
                r.score
                    .rank_of(s)
                    .map_or("-".to_string(), |k| (k + 1).to_string())
            };
            format!(
                "seed {}: {} correct {:.3} optimal {:.3} ranks {}/{}",
                r.config.seed,
                if seed_passes(r) { "ok" } else { "miss" },
                r.score.correct_probability,
                r.score.optimal_probability,
                rank(OPTIMAL_STRINGS[0]),
                rank(OPTIMAL_STRINGS[1]),
            )
        })
        .collect();
    let passing = reports.iter().filter(|r| seed_passes(r)).count();
    let detail = format!(
        "{passing}/{} seeds pass [{}]",
        reports.len(),
        summary.join("; ")
    );
    ensure(passing >= REQUIRED_PASSING_SEEDS, detail.clone())?;
    Ok(detail)
}

fn descent_shape(reports: &[RunReport]) -> Result<String, String> {
    let mut ratios = Vec::new();
    for r in reports.iter().filter(|r| seed_passes(r)) {
        let trace = &r.cost_trace;
        let monotone = trace
            .windows(2)
            .all(|w| w[1].best_so_far <= w[0].best_so_far);
        ensure(
            monotone,
            format!("seed {}: best-so-far increases", r.config.seed),
        )?;
        let initial = trace[0].value;
        let checkpoint = trace[DESCENT_CHECKPOINT.min(trace.len()) - 1].best_so_far;
        let gap = initial - r.best_cost;
        let ratio = if gap > 0.0 {
            (checkpoint - r.best_cost) / gap
        } else {
            0.0
        };
        ensure(
            ratio <= DESCENT_FRACTION,
            format!("seed {}: remaining gap at evaluation {DESCENT_CHECKPOINT} is {ratio:.2} of the total", r.config.seed),
        )?;
        ratios.push(format!("{}: {ratio:.3}", r.config.seed));
    }
    ensure(!ratios.is_empty(), "no passing seeds to inspect")?;
    Ok(format!(
        "remaining gap fraction at evaluation {DESCENT_CHECKPOINT} [{}]",
        ratios.join(", ")
    ))
}

fn budget_trend(long: &[RunReport], short: &[RunReport]) -> Result<String, String> {
    let mean = |rs: &[RunReport]| {
        rs.iter().map(|r| r.score.optimal_probability).sum::<f64>() / rs.len() as f64
    };
    let (hi, lo) = (mean(long), mean(short));
    let detail = format!("mean optimal probability {hi:.4} at 10000 vs {lo:.4} at {SHORT_BUDGET}");
    ensure(hi > lo, detail.clone())?;
    Ok(detail)
}

fn determinism(first: &[RunReport], second: &[RunReport]) -> Result<String, String> {
    for (a, b) in first.iter().zip(second) {
        let (ja, jb) = (
            a.without_timing().to_json().map_err(|e| e.to_string())?,
            b.without_timing().to_json().map_err(|e| e.to_string())?,
        );
        ensure(ja == jb, format!("seed {} differs on rerun", a.config.seed))?;
    }
    Ok(format!(
        "{} reruns byte-identical apart from timing",
        first.len()
    ))
}

fn main() -> ExitCode {
    let mut gate = Gate { failures: 0 };
    gate.record(1, "oracle ground truth", oracle_ground_truth());
    gate.record(2, "QUBO reconstruction", qubo_reconstruction());
    gate.record(3, "QUBO/Ising equivalence", qubo_ising_equivalence());
    gate.record(4, "penalty sufficiency", penalty_sufficiency());
    gate.record(5, "simulator invariants", simulator_invariants());

    match (
        run_seeds(10_000),
        run_seeds(SHORT_BUDGET),
        run_seeds(10_000),
    ) {
        (Ok(long), Ok(short), Ok(rerun)) => {
            gate.record(6, "fundamental test", fundamental(&long));
            gate.record(7, "cost-descent shape", descent_shape(&long));
            gate.record(8, "iteration-budget trend", budget_trend(&long, &short));
            gate.record(9, "determinism", determinism(&long, &rerun));
        }
        (a, b, c) => {
            let err = [a.err(), b.err(), c.err()]
                .into_iter()
                .flatten()
                .collect::<Vec<_>>()
                .join("; ");
            for (id, name) in [
                (6, "fundamental test"),
                (7, "cost-descent shape"),
                (8, "iteration-budget trend"),
                (9, "determinism"),
            ] {
                gate.record(id, name, Err(err.clone()));
            }
        }
    }

    if gate.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", gate.failures);
        ExitCode::FAILURE
    }
}
