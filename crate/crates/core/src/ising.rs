//! Diagonal Ising Hamiltonian obtained from a QUBO by spin substitution.
//!
//! Basis bit `z_i = 1` means variable `x_i = 1`. Since `Z|1⟩ = −|1⟩`, the
//! substitution is `x_i = (1 − Z_i)/2`, and on a basis state the spin value
//! is `σ(0) = +1`, `σ(1) = −1`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bits;
use crate::qubo::{QuadraticForm, QuboModel};
use crate::scalar::Scalar;

/// Largest register the dense tables and statevectors accept by default.
pub const DEFAULT_QUBIT_BUDGET: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsingError {
    #[error("bit string has {found} positions, Hamiltonian acts on {expected} qubits")]
    LengthMismatch { expected: usize, found: usize },
    #[error("{qubits} qubits exceeds the budget of {budget}")]
    BudgetExceeded { qubits: usize, budget: usize },
}

/// `constant + Σ h_i Z_i + Σ J_ij Z_i Z_j`, keys `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingHamiltonian<T> {
    pub qubit_count: usize,
    pub constant: T,
    pub linear: BTreeMap<usize, T>,
    pub quadratic: BTreeMap<(usize, usize), T>,
}

#[inline]
fn spin<T: Scalar>(bit: bool) -> T {
    if bit {
        -T::one()
    } else {
        T::one()
    }
}

fn add<K: Ord, T: Scalar>(map: &mut BTreeMap<K, T>, key: K, c: T) {
    let entry = map.entry(key).or_insert_with(T::zero);
    *entry = *entry + c;
}

/// Substitutes `x_i = (1 − Z_i)/2` into every QUBO term and collects.
pub fn qubo_to_ising<T: Scalar>(m: &QuboModel<T>) -> IsingHamiltonian<T> {
    form_to_ising(m.form(), m.variable_count())
}

/// Spin substitution for a bare quadratic form over `qubit_count` variables.
pub fn form_to_ising<T: Scalar>(
    form: &QuadraticForm<T>,
    qubit_count: usize,
) -> IsingHamiltonian<T> {
    let two = T::one() + T::one();
    let four = two * two;
    let mut constant = form.constant;
    let mut linear = BTreeMap::new();
    let mut quadratic = BTreeMap::new();

    for (&i, &a) in &form.linear {
        constant = constant + a / two;
        add(&mut linear, i, -a / two);
    }
    for (&(i, j), &b) in &form.quadratic {
        let quarter = b / four;
        constant = constant + quarter;
        add(&mut linear, i, -quarter);
        add(&mut linear, j, -quarter);
        add(&mut quadratic, (i, j), quarter);
    }
    linear.retain(|_, c: &mut T| !c.is_zero());
    quadratic.retain(|_, c: &mut T| !c.is_zero());

    IsingHamiltonian {
        qubit_count,
        constant,
        linear,
        quadratic,
    }
}

impl<T: Scalar> IsingHamiltonian<T> {
    /// Diagonal matrix element `⟨z|H|z⟩`.
    pub fn energy(&self, z: &[bool]) -> Result<T, IsingError> {
        if z.len() != self.qubit_count {
            return Err(IsingError::LengthMismatch {
                expected: self.qubit_count,
                found: z.len(),
            });
        }
        let lin = self
            .linear
            .iter()
            .fold(T::zero(), |acc, (&i, &h)| acc + h * spin::<T>(z[i]));
        let quad = self.quadratic.iter().fold(T::zero(), |acc, (&(i, j), &c)| {
            acc + c * spin::<T>(z[i]) * spin::<T>(z[j])
        });
        Ok(self.constant + lin + quad)
    }

    pub fn energy_of_index(&self, index: usize) -> T {
        let n = self.qubit_count;
        let s = |i| spin::<T>(bits::bit(index, i, n));
        let lin = self
            .linear
            .iter()
            .fold(T::zero(), |acc, (&i, &h)| acc + h * s(i));
        let quad = self
            .quadratic
            .iter()
            .fold(T::zero(), |acc, (&(i, j), &c)| acc + c * s(i) * s(j));
        self.constant + lin + quad
    }

    pub fn energy_table(&self) -> Result<EnergyTable<T>, IsingError> {
        self.energy_table_with_budget(DEFAULT_QUBIT_BUDGET)
    }

    /// All `2^n` diagonal energies in basis-index order.
    pub fn energy_table_with_budget(&self, budget: usize) -> Result<EnergyTable<T>, IsingError> {
        let n = self.qubit_count;
        if n > budget || n >= usize::BITS as usize {
            return Err(IsingError::BudgetExceeded { qubits: n, budget });
        }
        let shift = |i: usize| n - 1 - i;
        let linear: Vec<(usize, T)> = self.linear.iter().map(|(&i, &h)| (shift(i), h)).collect();
        let quadratic: Vec<(usize, usize, T)> = self
            .quadratic
            .iter()
            .map(|(&(i, j), &c)| (shift(i), shift(j), c))
            .collect();
        let energies = (0..1usize << n)
            .map(|k| {
                let s = |b: usize| spin::<T>(k >> b & 1 == 1);
                let lin = linear.iter().fold(T::zero(), |acc, &(b, h)| acc + h * s(b));
                let quad = quadratic
                    .iter()
                    .fold(T::zero(), |acc, &(a, b, c)| acc + c * s(a) * s(b));
                self.constant + lin + quad
            })
            .collect();
        Ok(EnergyTable {
            qubit_count: n,
            energies,
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> IsingHamiltonian<U> {
        IsingHamiltonian {
            qubit_count: self.qubit_count,
            constant: f(self.constant),
            linear: self.linear.iter().map(|(&i, &c)| (i, f(c))).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &c)| (k, f(c))).collect(),
        }
    }
}

/// Free-function form of [`IsingHamiltonian::energy`].
pub fn energy<T: Scalar>(h: &IsingHamiltonian<T>, z: &[bool]) -> Result<T, IsingError> {
    h.energy(z)
}

/// Memoized diagonal of the cost Hamiltonian, indexed by basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable<T> {
    qubit_count: usize,
    energies: Vec<T>,
}

impl<T: Scalar> EnergyTable<T> {
    /// Wraps raw energies; the length must be a power of two.
    pub fn from_energies(energies: Vec<T>) -> Option<Self> {
        let len = energies.len();
        (len.is_power_of_two()).then(|| Self {
            qubit_count: len.trailing_zeros() as usize,
            energies,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn get(&self, index: usize) -> T {
        self.energies[index]
    }

    pub fn min(&self) -> T {
        self.energies
            .iter()
            .copied()
            .fold(self.energies[0], |a, b| if b < a { b } else { a })
    }

    pub fn argmin(&self) -> Vec<usize> {
        let min = self.min();
        (0..self.len())
            .filter(|&k| self.energies[k].near(min))
            .collect()
    }

    pub fn mean(&self) -> T {
        let sum = self.energies.iter().fold(T::zero(), |acc, &e| acc + e);
        sum / T::from_usize_exact(self.len())
    }

    /// Basis indices sorted by ascending energy, ties by index.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.energies[a]
                .partial_cmp(&self.energies[b])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        order
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> EnergyTable<U> {
        EnergyTable {
            qubit_count: self.qubit_count,
            energies: self.energies.iter().map(|&e| f(e)).collect(),
        }
    }
}
