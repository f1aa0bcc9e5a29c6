//! Dense statevector simulation of the alternating phase/mixer ansatz.
//!
//! The cost Hamiltonian is diagonal, so the phase layer is a pointwise
//! multiply by `exp(−iγE_k)` over a precomputed [`EnergyTable`]. The mixer
//! `exp(−iβ Σ X_j)` factors exactly into one `exp(−iβX)` rotation per qubit.

use std::collections::BTreeMap;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bits;
use crate::ising::{EnergyTable, DEFAULT_QUBIT_BUDGET};
use crate::scalar::Real;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimulatorError {
    #[error("{qubits} qubits exceeds the budget of {budget}")]
    BudgetExceeded { qubits: usize, budget: usize },
    #[error("register needs at least one qubit")]
    NoQubits,
    #[error("state has {state} amplitudes, energy table has {table}")]
    DimensionMismatch { state: usize, table: usize },
    #[error("gamma and beta schedules differ in length ({gammas} vs {betas})")]
    ScheduleMismatch { gammas: usize, betas: usize },
}

/// Per-layer `(γ, β)` schedule; layer 1 is index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct AnsatzParams<T> {
    gammas: Vec<T>,
    betas: Vec<T>,
}

impl<T: Real> AnsatzParams<T> {
    pub fn new(gammas: Vec<T>, betas: Vec<T>) -> Result<Self, SimulatorError> {
        if gammas.len() != betas.len() {
            return Err(SimulatorError::ScheduleMismatch {
                gammas: gammas.len(),
                betas: betas.len(),
            });
        }
        Ok(Self { gammas, betas })
    }

    pub fn empty() -> Self {
        Self {
            gammas: Vec::new(),
            betas: Vec::new(),
        }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[T] {
        &self.gammas
    }

    pub fn betas(&self) -> &[T] {
        &self.betas
    }

    /// Flat layout used by the optimizer: all gammas, then all betas.
    pub fn to_flat(&self) -> Vec<T> {
        self.gammas.iter().chain(&self.betas).copied().collect()
    }

    /// Inverse of [`to_flat`](Self::to_flat); odd lengths are rejected.
    pub fn from_flat(flat: &[T]) -> Result<Self, SimulatorError> {
        if !flat.len().is_multiple_of(2) {
            return Err(SimulatorError::ScheduleMismatch {
                gammas: flat.len() / 2 + 1,
                betas: flat.len() / 2,
            });
        }
        let (g, b) = flat.split_at(flat.len() / 2);
        Self::new(g.to_vec(), b.to_vec())
    }
}

/// `2^n` complex amplitudes in basis-index order (see [`crate::bits`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector<T> {
    qubit_count: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> Statevector<T> {
    /// `|s⟩ = H^{⊗n}|0…0⟩`, every amplitude `2^{−n/2}`.
    pub fn uniform(n: usize) -> Result<Self, SimulatorError> {
        Self::uniform_with_budget(n, DEFAULT_QUBIT_BUDGET)
    }

    pub fn uniform_with_budget(n: usize, budget: usize) -> Result<Self, SimulatorError> {
        if n == 0 {
            return Err(SimulatorError::NoQubits);
        }
        if n > budget || n >= usize::BITS as usize {
            return Err(SimulatorError::BudgetExceeded { qubits: n, budget });
        }
        let dim = 1usize << n;
        let amp = T::one() / T::from_usize_exact(dim).sqrt();
        Ok(Self {
            qubit_count: n,
            amplitudes: vec![Complex::new(amp, T::zero()); dim],
        })
    }

    /// Computational basis state `|index⟩`.
    pub fn basis(n: usize, index: usize) -> Result<Self, SimulatorError> {
        let mut s = Self::uniform(n)?;
        s.amplitudes
            .iter_mut()
            .for_each(|a| *a = Complex::new(T::zero(), T::zero()));
        s.amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(s)
    }

    /// Builds a state from raw amplitudes; the length must be a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Option<Self> {
        let len = amplitudes.len();
        (len >= 2 && len.is_power_of_two()).then(|| Self {
            qubit_count: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_table(&self, table: &EnergyTable<T>) -> Result<(), SimulatorError> {
        if table.len() == self.dim() {
            Ok(())
        } else {
            Err(SimulatorError::DimensionMismatch {
                state: self.dim(),
                table: table.len(),
            })
        }
    }

    /// `U(C, γ) = exp(−iγH_c)`.
    pub fn apply_phase_layer(
        &mut self,
        table: &EnergyTable<T>,
        gamma: T,
    ) -> Result<(), SimulatorError> {
        self.check_table(table)?;
        for (amp, &e) in self.amplitudes.iter_mut().zip(table.energies()) {
            let (s, c) = (gamma * e).sin_cos();
            *amp = *amp * Complex::new(c, -s);
        }
        Ok(())
    }

    /// `U(B, β) = exp(−iβ Σ_j X_j)`.
    pub fn apply_mixer_layer(&mut self, beta: T) {
        let (s, c) = beta.sin_cos();
        let n = self.qubit_count;
        for j in 0..n {
            let stride = 1usize << (n - 1 - j);
            for block in self.amplitudes.chunks_exact_mut(2 * stride) {
                let (lo, hi) = block.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (x, y) = (*a, *b);
                    // (c·x − i s·y, −i s·x + c·y)
                    *a = Complex::new(c * x.re + s * y.im, c * x.im - s * y.re);
                    *b = Complex::new(c * y.re + s * x.im, c * y.im - s * x.re);
                }
            }
        }
    }

    /// `F = ⟨ψ|H_c|ψ⟩ = Σ_k |a_k|² E_k`.
    pub fn expectation(&self, table: &EnergyTable<T>) -> Result<T, SimulatorError> {
        self.check_table(table)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(table.energies())
            .fold(T::zero(), |acc, (a, &e)| acc + a.norm_sqr() * e))
    }

    /// Measures `shots` times with a ChaCha8 stream seeded by `seed`;
    /// `shots = 0` returns the exact Born probabilities instead.
    pub fn sample(&self, shots: usize, seed: u64) -> SampleDistribution<T> {
        if shots == 0 {
            let weights = self
                .amplitudes
                .iter()
                .enumerate()
                .map(|(k, a)| (k, a.norm_sqr()))
                .filter(|(_, p)| !p.is_zero())
                .collect();
            return SampleDistribution {
                qubit_count: self.qubit_count,
                total_shots: 0,
                weights,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut counts = vec![0u32; self.dim()];
        let mut sampler = CdfSampler::default();
        sampler.rebuild(&self.amplitudes);
        sampler.draw_into(shots, &mut rng, &mut counts);
        SampleDistribution::from_counts(self.qubit_count, &counts, shots)
    }
}

/// Inverse-CDF multinomial sampler with a reusable cumulative buffer.
#[derive(Debug, Default, Clone)]
pub(crate) struct CdfSampler {
    cdf: Vec<f64>,
}

impl CdfSampler {
    pub(crate) fn rebuild<T: Real>(&mut self, amplitudes: &[Complex<T>]) {
        self.cdf.clear();
        let mut acc = 0.0;
        for a in amplitudes {
            acc += a.norm_sqr().to_f64_lossy();
            self.cdf.push(acc);
        }
    }

    /// Adds `shots` draws to `counts`.
    pub(crate) fn draw_into<R: Rng>(&self, shots: usize, rng: &mut R, counts: &mut [u32]) {
        let total = *self.cdf.last().expect("non-empty distribution");
        let last = self.cdf.len() - 1;
        for _ in 0..shots {
            let u = rng.random::<f64>() * total;
            let k = self.cdf.partition_point(|&c| c <= u).min(last);
            counts[k] += 1;
        }
    }
}

/// Runs the full ansatz from `|s⟩`: phase then mixer per layer, layer 1 first.
pub fn evolve<T: Real>(
    table: &EnergyTable<T>,
    params: &AnsatzParams<T>,
) -> Result<Statevector<T>, SimulatorError> {
    let mut state = Statevector::uniform(table.qubit_count())?;
    for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
        state.apply_phase_layer(table, gamma)?;
        state.apply_mixer_layer(beta);
    }
    Ok(state)
}

/// Repeated evolution of one cost table with a cached phase spectrum.
///
/// Penalty models have few distinct energy levels, so the phase layer only
/// needs one `sin_cos` per level instead of one per amplitude.
#[derive(Debug, Clone)]
pub struct QaoaCircuit<T> {
    table: EnergyTable<T>,
    levels: Vec<T>,
    level_of: Vec<u32>,
    phases: Vec<Complex<T>>,
}

impl<T: Real> QaoaCircuit<T> {
    pub fn new(table: EnergyTable<T>) -> Self {
        let mut levels: Vec<T> = table.energies().to_vec();
        levels.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        levels.dedup();
        let level_of = table
            .energies()
            .iter()
            .map(|e| {
                levels
                    .binary_search_by(|l| l.partial_cmp(e).unwrap_or(std::cmp::Ordering::Equal))
                    .expect("every energy is a level") as u32
            })
            .collect();
        let phases = vec![Complex::new(T::one(), T::zero()); levels.len()];
        Self {
            table,
            levels,
            level_of,
            phases,
        }
    }

    pub fn table(&self) -> &EnergyTable<T> {
        &self.table
    }

    pub fn qubit_count(&self) -> usize {
        self.table.qubit_count()
    }

    /// Distinct energies of the cost table, ascending.
    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    /// Overwrites `state` with the ansatz output for `params`.
    pub fn evolve_into(
        &mut self,
        state: &mut Statevector<T>,
        params: &AnsatzParams<T>,
    ) -> Result<(), SimulatorError> {
        state.check_table(&self.table)?;
        let amp = T::one() / T::from_usize_exact(state.dim()).sqrt();
        state
            .amplitudes
            .iter_mut()
            .for_each(|a| *a = Complex::new(amp, T::zero()));
        for (&gamma, &beta) in params.gammas().iter().zip(params.betas()) {
            for (phase, &level) in self.phases.iter_mut().zip(&self.levels) {
                let (s, c) = (gamma * level).sin_cos();
                *phase = Complex::new(c, -s);
            }
            for (a, &l) in state.amplitudes.iter_mut().zip(&self.level_of) {
                *a = *a * self.phases[l as usize];
            }
            state.apply_mixer_layer(beta);
        }
        Ok(())
    }

    pub fn evolve(&mut self, params: &AnsatzParams<T>) -> Result<Statevector<T>, SimulatorError> {
        let mut state = Statevector::uniform(self.qubit_count())?;
        self.evolve_into(&mut state, params)?;
        Ok(state)
    }
}

/// Measured (or exact) distribution over basis states.
///
/// `total_shots = 0` marks exact-probability mode. Keys are basis indices;
/// [`iter_strings`](Self::iter_strings) renders them as bit strings.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleDistribution<T> {
    pub qubit_count: usize,
    pub total_shots: usize,
    pub weights: BTreeMap<usize, T>,
}

impl<T: Real> SampleDistribution<T> {
    pub fn from_counts(qubit_count: usize, counts: &[u32], shots: usize) -> Self {
        let denom = T::from_usize_exact(shots);
        let weights = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| (k, T::from_usize_exact(c as usize) / denom))
            .collect();
        Self {
            qubit_count,
            total_shots: shots,
            weights,
        }
    }

    /// Normalized distribution over explicit bit strings.
    pub fn from_strings<'a, I>(entries: I) -> Result<Self, bits::BitStringError>
    where
        I: IntoIterator<Item = (&'a str, T)>,
    {
        let mut qubit_count = 0;
        let mut weights = BTreeMap::new();
        for (s, w) in entries {
            let b = bits::parse_bits(s)?;
            qubit_count = b.len();
            let e = weights
                .entry(bits::bits_to_index(&b))
                .or_insert_with(T::zero);
            *e = *e + w;
        }
        Ok(Self {
            qubit_count,
            total_shots: 0,
            weights,
        })
    }

    pub fn total_mass(&self) -> T {
        self.weights.values().fold(T::zero(), |a, &b| a + b)
    }

    pub fn iter_strings(&self) -> impl Iterator<Item = (String, T)> + '_ {
        self.weights
            .iter()
            .map(|(&k, &w)| (bits::format_index(k, self.qubit_count), w))
    }

    /// Highest-mass outcome, lowest index on ties.
    pub fn most_probable(&self) -> Option<(usize, T)> {
        self.weights
            .iter()
            .fold(None, |best: Option<(usize, T)>, (&k, &w)| match best {
                Some((_, bw)) if bw >= w => best,
                _ => Some((k, w)),
            })
    }
}
