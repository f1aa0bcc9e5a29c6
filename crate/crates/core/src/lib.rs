//! Independent domination via the Quantum Approximate Optimization Algorithm.
//!
//! A graph is compiled into a penalty QUBO ([`qubo`]), rewritten as a
//! diagonal Ising Hamiltonian ([`ising`]), and solved by simulating the
//! alternating phase/mixer ansatz on a dense statevector ([`simulator`])
//! while a derivative-free optimizer tunes the layer angles against a CVaR
//! objective ([`variational`]). Sampled outcomes are scored against an
//! exhaustive catalog of independent dominating sets ([`oracle`]);
//! [`harness`] ties the steps together and serializes reports.
//!
//! Model construction is generic over [`Scalar`] so the same code builds
//! exact rational models ([`ExactQubo`]) and floating-point ones
//! ([`Qubo`]); simulation and optimization are generic over [`Real`].

pub mod bits;
pub mod graph;
pub mod harness;
pub mod ising;
pub mod oracle;
pub mod qubo;
pub mod scalar;
pub mod simulator;
pub mod variational;

pub use graph::{parse_graph, Graph, GraphError, IdsCheck, VertexSet};
pub use harness::{
    decode_bitstring, run_solve, run_sweep, solve_graph, HarnessError, RunConfig, RunReport,
    SweepAxis,
};
pub use ising::{qubo_to_ising, EnergyTable, IsingHamiltonian};
pub use oracle::{
    brute_force_ids, brute_force_qubo_min, score_distribution, IdsCatalog, ScoreReport,
};
pub use qubo::{
    build_qubo, constraint_penalty, evaluate_qubo, slack_encoding, QuboModel, SlackEncoding,
};
pub use scalar::{Real, Scalar};
pub use simulator::{evolve, AnsatzParams, SampleDistribution, Statevector};
pub use variational::{
    cvar, initial_params, minimize, qaoa_objective, CvarConfig, OptResult, OptimizerConfig,
};

/// Exact rational coefficients.
pub type Rational = num_rational::Rational64;

pub type Qubo = QuboModel<f64>;
pub type ExactQubo = QuboModel<Rational>;
pub type Ising = IsingHamiltonian<f64>;
pub type ExactIsing = IsingHamiltonian<Rational>;
pub type Energies = EnergyTable<f64>;
pub type State = Statevector<f64>;
pub type State32 = Statevector<f32>;
pub type Params = AnsatzParams<f64>;
pub type Distribution = SampleDistribution<f64>;
