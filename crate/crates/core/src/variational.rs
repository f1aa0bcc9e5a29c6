//! CVaR objective, ramp initialization and the derivative-free outer loop.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ising::EnergyTable;
use crate::scalar::Real;
use crate::simulator::{
    AnsatzParams, CdfSampler, QaoaCircuit, SampleDistribution, SimulatorError, Statevector,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("CVaR alpha must lie in (0, 1], got {0}")]
    InvalidAlpha(f64),
    #[error("distribution is empty")]
    EmptyDistribution,
    #[error("outcome {index} is outside the energy table of length {len}")]
    OutcomeOutOfRange { index: usize, len: usize },
    #[error("layer count must be at least 1")]
    NoLayers,
    #[error("ramp scale must be positive, got {0}")]
    InvalidRampScale(f64),
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("objective returned {value} at parameters {params:?}")]
    NonFinite { value: f64, params: Vec<f64> },
    #[error(transparent)]
    Simulator(#[from] SimulatorError),
}

/// How the outcome straddling the α boundary is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailWeighting {
    /// Boundary outcome contributes only the mass needed to reach exactly α.
    #[default]
    Fractional,
    /// Whole outcomes are taken until at least α is covered; the mean is over the covered mass.
    Inclusive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvarConfig<T> {
    pub alpha: T,
    pub weighting: TailWeighting,
}

impl<T: Real> CvarConfig<T> {
    pub fn new(alpha: T) -> Result<Self, VariationalError> {
        check_alpha(alpha)?;
        Ok(Self {
            alpha,
            weighting: TailWeighting::Fractional,
        })
    }
}

fn check_alpha<T: Real>(alpha: T) -> Result<(), VariationalError> {
    if alpha > T::zero() && alpha <= T::one() {
        Ok(())
    } else {
        Err(VariationalError::InvalidAlpha(alpha.to_f64_lossy()))
    }
}

/// Conditional value-at-risk with fractional boundary weighting.
pub fn cvar<T: Real>(
    dist: &SampleDistribution<T>,
    table: &EnergyTable<T>,
    alpha: T,
) -> Result<T, VariationalError> {
    cvar_with(dist, table, alpha, TailWeighting::Fractional)
}

/// Mean energy of the lowest-energy `alpha` share of probability mass.
pub fn cvar_with<T: Real>(
    dist: &SampleDistribution<T>,
    table: &EnergyTable<T>,
    alpha: T,
    weighting: TailWeighting,
) -> Result<T, VariationalError> {
    check_alpha(alpha)?;
    if dist.weights.is_empty() {
        return Err(VariationalError::EmptyDistribution);
    }
    let mut outcomes = Vec::with_capacity(dist.weights.len());
    for (&index, &mass) in &dist.weights {
        if index >= table.len() {
            return Err(VariationalError::OutcomeOutOfRange {
                index,
                len: table.len(),
            });
        }
        outcomes.push((table.get(index), index, mass));
    }
    outcomes.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
    });
    Ok(tail_mean(
        outcomes.iter().map(|&(e, _, m)| (e, m)),
        alpha,
        weighting,
    ))
}

fn tail_mean<T: Real>(
    sorted: impl Iterator<Item = (T, T)>,
    alpha: T,
    weighting: TailWeighting,
) -> T {
    let mut covered = T::zero();
    let mut sum = T::zero();
    for (energy, mass) in sorted {
        if covered >= alpha {
            break;
        }
        let take = match weighting {
            TailWeighting::Fractional => mass.min(alpha - covered),
            TailWeighting::Inclusive => mass,
        };
        sum = sum + take * energy;
        covered = covered + take;
    }
    match weighting {
        TailWeighting::Fractional => sum / alpha,
        TailWeighting::Inclusive => sum / covered,
    }
}

/// Annealing-style linear ramp: `γ_k = (k/q)·s`, `β_k = (1 − k/q)·s`, `k = 1..q`.
pub fn initial_params<T: Real>(
    layers: usize,
    ramp_scale: T,
) -> Result<AnsatzParams<T>, VariationalError> {
    if layers == 0 {
        return Err(VariationalError::NoLayers);
    }
    if !(ramp_scale > T::zero() && ramp_scale.is_finite()) {
        return Err(VariationalError::InvalidRampScale(
            ramp_scale.to_f64_lossy(),
        ));
    }
    let q = T::from_usize_exact(layers);
    let fraction = |k: usize| T::from_usize_exact(k) / q;
    let gammas = (1..=layers).map(|k| fraction(k) * ramp_scale).collect();
    let betas = (1..=layers)
        .map(|k| (T::one() - fraction(k)) * ramp_scale)
        .collect();
    Ok(AnsatzParams::new(gammas, betas)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig<T> {
    /// Objective-evaluation budget.
    pub max_iterations: usize,
    pub function_tolerance: T,
    /// Edge length of the starting simplex.
    pub initial_step: T,
}

impl<T: Real> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            function_tolerance: T::from_f64_lossy(1e-8),
            initial_step: T::from_f64_lossy(0.25),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIterations,
    Tolerance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint<T> {
    /// 1-based evaluation index.
    pub iteration: usize,
    pub value: T,
    pub best_so_far: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult<T> {
    pub best_params: AnsatzParams<T>,
    pub best_cost: T,
    pub cost_trace: Vec<TracePoint<T>>,
    pub evaluations: usize,
    pub terminated_by: Termination,
}

/// Budgeted evaluation wrapper recording the trace and the incumbent.
struct Recorder<T, F> {
    objective: F,
    budget: usize,
    trace: Vec<TracePoint<T>>,
    best_x: Vec<T>,
    best_f: T,
}

impl<T: Real, F: FnMut(&[T]) -> T> Recorder<T, F> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.budget
    }

    /// `Ok(None)` once the budget is spent.
    fn eval(&mut self, x: &[T]) -> Result<Option<T>, VariationalError> {
        if self.exhausted() {
            return Ok(None);
        }
        let value = (self.objective)(x);
        if !value.is_finite() {
            return Err(VariationalError::NonFinite {
                value: value.to_f64_lossy(),
                params: x.iter().map(|v| v.to_f64_lossy()).collect(),
            });
        }
        if self.trace.is_empty() || value < self.best_f {
            self.best_f = value;
            self.best_x = x.to_vec();
        }
        self.trace.push(TracePoint {
            iteration: self.trace.len() + 1,
            value,
            best_so_far: self.best_f,
        });
        Ok(Some(value))
    }
}

/// Outcome of [`nelder_mead`] on a flat parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOutcome<T> {
    pub best_x: Vec<T>,
    pub best_f: T,
    pub trace: Vec<TracePoint<T>>,
    pub terminated_by: Termination,
}

/// Nelder–Mead with reflection 1, expansion 2, contraction 1/2 and shrink 1/2.
///
/// Never exceeds `max_iterations` objective evaluations. Stops early once
/// the simplex lies within `function_tolerance` of its best vertex in every
/// coordinate and its value spread is also below `function_tolerance`.
pub fn nelder_mead<T, F>(
    objective: F,
    x0: &[T],
    cfg: &OptimizerConfig<T>,
) -> Result<SimplexOutcome<T>, VariationalError>
where
    T: Real,
    F: FnMut(&[T]) -> T,
{
    if cfg.max_iterations == 0 {
        return Err(VariationalError::InvalidConfig(
            "max_iterations must be positive",
        ));
    }
    if cfg.function_tolerance.is_nan() || cfg.function_tolerance <= T::zero() {
        return Err(VariationalError::InvalidConfig(
            "function_tolerance must be positive",
        ));
    }
    if cfg.initial_step.is_nan() || cfg.initial_step <= T::zero() {
        return Err(VariationalError::InvalidConfig(
            "initial_step must be positive",
        ));
    }

    let n = x0.len();
    let mut rec = Recorder {
        objective,
        budget: cfg.max_iterations,
        trace: Vec::new(),
        best_x: x0.to_vec(),
        best_f: T::infinity(),
    };
    let finish = |rec: Recorder<T, F>, terminated_by| SimplexOutcome {
        best_x: rec.best_x,
        best_f: rec.best_f,
        trace: rec.trace,
        terminated_by,
    };

    let f0 = rec.eval(x0)?.expect("budget is at least one");
    if n == 0 {
        return Ok(finish(rec, Termination::Tolerance));
    }

    let nf = T::from_usize_exact(n);
    let one = T::one();
    let two = one + one;
    let reflect_c = one;
    let expand_c = two;
    let contract_c = one / two;
    let shrink_c = one / two;

    let mut simplex: Vec<(Vec<T>, T)> = vec![(x0.to_vec(), f0)];
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] = x[i] + cfg.initial_step;
        match rec.eval(&x)? {
            Some(f) => simplex.push((x, f)),
            None => return Ok(finish(rec, Termination::MaxIterations)),
        }
    }

    let tol = cfg.function_tolerance;
    let point = |base: &[T], dir: &[T], t: T| -> Vec<T> {
        base.iter()
            .zip(dir)
            .map(|(&b, &d)| b + t * (d - b))
            .collect()
    };

    loop {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));

        let (best_x, best_f) = (&simplex[0].0, simplex[0].1);
        let spread_f = simplex
            .iter()
            .fold(T::zero(), |m, v| m.max((v.1 - best_f).abs()));
        let spread_x = simplex.iter().fold(T::zero(), |m, v| {
            v.0.iter()
                .zip(best_x)
                .fold(m, |m, (&a, &b)| m.max((a - b).abs()))
        });
        if spread_f <= tol && spread_x <= tol {
            return Ok(finish(rec, Termination::Tolerance));
        }

        let centroid: Vec<T> = (0..n)
            .map(|k| simplex[..n].iter().fold(T::zero(), |acc, v| acc + v.0[k]) / nf)
            .collect();
        let worst = simplex[n].clone();
        let second_worst_f = simplex[n - 1].1;

        // x_r = c + ρ(c − x_w)
        let reflected = point(&centroid, &worst.0, -reflect_c);
        let Some(fr) = rec.eval(&reflected)? else {
            return Ok(finish(rec, Termination::MaxIterations));
        };

        if fr < best_f {
            let expanded = point(&centroid, &worst.0, -expand_c);
            let Some(fe) = rec.eval(&expanded)? else {
                return Ok(finish(rec, Termination::MaxIterations));
            };
            simplex[n] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
            continue;
        }
        if fr < second_worst_f {
            simplex[n] = (reflected, fr);
            continue;
        }

        let outside = fr < worst.1;
        let candidate = if outside {
            point(&centroid, &reflected, contract_c)
        } else {
            point(&centroid, &worst.0, contract_c)
        };
        let Some(fc) = rec.eval(&candidate)? else {
            return Ok(finish(rec, Termination::MaxIterations));
        };
        if (outside && fc <= fr) || (!outside && fc < worst.1) {
            simplex[n] = (candidate, fc);
            continue;
        }

        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = point(&anchor, &vertex.0, shrink_c);
            let Some(f) = rec.eval(&x)? else {
                return Ok(finish(rec, Termination::MaxIterations));
            };
            *vertex = (x, f);
        }
    }
}

/// Minimizes an objective over ansatz schedules starting from `init`.
pub fn minimize<T, F>(
    mut objective: F,
    init: &AnsatzParams<T>,
    cfg: &OptimizerConfig<T>,
) -> Result<OptResult<T>, VariationalError>
where
    T: Real,
    F: FnMut(&AnsatzParams<T>) -> T,
{
    let outcome = nelder_mead(
        |x: &[T]| {
            let params =
                AnsatzParams::from_flat(x).expect("optimizer preserves the parameter count");
            objective(&params)
        },
        &init.to_flat(),
        cfg,
    )?;
    Ok(OptResult {
        best_params: AnsatzParams::from_flat(&outcome.best_x)?,
        best_cost: outcome.best_f,
        evaluations: outcome.trace.len(),
        cost_trace: outcome.trace,
        terminated_by: outcome.terminated_by,
    })
}

/// Random-number policy for shot-based objective evaluations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedPolicy {
    /// Every evaluation replays the same stream.
    Common,
    /// Evaluation `k` uses stream `k` of the base seed.
    #[default]
    PerEvaluation,
}

/// Sampling setup of the objective; `shots = 0` selects exact probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub shots: usize,
    pub seed: u64,
    pub policy: SeedPolicy,
}

impl Sampling {
    pub fn exact() -> Self {
        Self {
            shots: 0,
            seed: 0,
            policy: SeedPolicy::Common,
        }
    }
}

/// `(γ, β) ↦ CVaR_α` of the measured ansatz output.
pub struct QaoaObjective<T> {
    circuit: QaoaCircuit<T>,
    layers: usize,
    cvar: CvarConfig<T>,
    sampling: Sampling,
    ascending: Vec<usize>,
    state: Statevector<T>,
    sampler: CdfSampler,
    counts: Vec<u32>,
    evaluations: u64,
}

impl<T: Real> QaoaObjective<T> {
    pub fn new(
        table: EnergyTable<T>,
        layers: usize,
        cvar: CvarConfig<T>,
        sampling: Sampling,
    ) -> Result<Self, VariationalError> {
        if layers == 0 {
            return Err(VariationalError::NoLayers);
        }
        check_alpha(cvar.alpha)?;
        let state = Statevector::uniform(table.qubit_count())?;
        let ascending = table.ascending_order();
        let dim = table.len();
        Ok(Self {
            circuit: QaoaCircuit::new(table),
            layers,
            cvar,
            sampling,
            ascending,
            state,
            sampler: CdfSampler::default(),
            counts: vec![0; dim],
            evaluations: 0,
        })
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn table(&self) -> &EnergyTable<T> {
        self.circuit.table()
    }

    /// Output state of the ansatz for `params`.
    pub fn state(&mut self, params: &AnsatzParams<T>) -> Result<Statevector<T>, VariationalError> {
        Ok(self.circuit.evolve(params)?)
    }

    pub fn evaluate(&mut self, params: &AnsatzParams<T>) -> Result<T, VariationalError> {
        if params.layers() != self.layers {
            return Err(SimulatorError::ScheduleMismatch {
                gammas: params.gammas().len(),
                betas: self.layers,
            }
            .into());
        }
        self.circuit.evolve_into(&mut self.state, params)?;
        let eval_index = self.evaluations;
        self.evaluations += 1;

        let table = self.circuit.table();
        let alpha = self.cvar.alpha;
        let amplitudes = self.state.amplitudes();
        if self.sampling.shots == 0 {
            let masses = self
                .ascending
                .iter()
                .map(|&k| (table.get(k), amplitudes[k].norm_sqr()));
            return Ok(tail_mean(masses, alpha, self.cvar.weighting));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.sampling.seed);
        if self.sampling.policy == SeedPolicy::PerEvaluation {
            rng.set_stream(eval_index);
        }
        self.counts.iter_mut().for_each(|c| *c = 0);
        self.sampler.rebuild(amplitudes);
        self.sampler
            .draw_into(self.sampling.shots, &mut rng, &mut self.counts);
        let shots = T::from_usize_exact(self.sampling.shots);
        let counts = &self.counts;
        let masses = self.ascending.iter().filter(|&&k| counts[k] > 0).map(|&k| {
            (
                table.get(k),
                T::from_usize_exact(counts[k] as usize) / shots,
            )
        });
        Ok(tail_mean(masses, alpha, self.cvar.weighting))
    }
}

/// Builds the QAOA objective as a reusable closure.
pub fn qaoa_objective<T: Real>(
    table: EnergyTable<T>,
    layers: usize,
    cvar: CvarConfig<T>,
    sampling: Sampling,
) -> Result<impl FnMut(&AnsatzParams<T>) -> T, VariationalError> {
    let mut objective = QaoaObjective::new(table, layers, cvar, sampling)?;
    Ok(move |params: &AnsatzParams<T>| objective.evaluate(params).unwrap_or_else(|_| T::nan()))
}
