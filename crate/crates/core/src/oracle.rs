//! Exhaustive ground truth and scoring of sampled distributions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits;
use crate::graph::{Graph, VertexSet};
use crate::qubo::QuboModel;
use crate::scalar::{Real, Scalar};
use crate::simulator::SampleDistribution;

/// Enumeration cap for both subset and assignment scans.
pub const ORACLE_BUDGET: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{size} positions exceeds the enumeration budget of {budget}")]
    BudgetExceeded { size: usize, budget: usize },
    #[error("outcome string of length {len} is shorter than the {vertex_count} vertices")]
    StringTooShort { len: usize, vertex_count: usize },
}

fn check_budget(size: usize) -> Result<(), OracleError> {
    if size > ORACLE_BUDGET {
        Err(OracleError::BudgetExceeded {
            size,
            budget: ORACLE_BUDGET,
        })
    } else {
        Ok(())
    }
}

/// Every independent dominating set of a graph, plus the minimum ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdsCatalog {
    pub minimum_size: usize,
    pub optimal_sets: Vec<VertexSet>,
    pub all_ids: Vec<VertexSet>,
}

impl IdsCatalog {
    pub fn is_ids(&self, set: &VertexSet) -> bool {
        self.all_ids.binary_search(set).is_ok()
    }

    pub fn is_optimal(&self, set: &VertexSet) -> bool {
        self.optimal_sets.binary_search(set).is_ok()
    }
}

/// Enumerates all `2^|V|` subsets.
pub fn brute_force_ids(g: &Graph) -> Result<IdsCatalog, OracleError> {
    let n = g.vertex_count();
    check_budget(n)?;
    let mut all_ids: Vec<VertexSet> = (0u64..1 << n)
        .filter(|&mask| g.is_ids_mask(mask))
        .map(|mask| VertexSet::from_mask(mask, n))
        .collect();
    all_ids.sort();
    // Every graph has at least one IDS (any maximal independent set).
    let minimum_size = all_ids.iter().map(VertexSet::len).min().unwrap_or(0);
    let optimal_sets = all_ids
        .iter()
        .filter(|s| s.len() == minimum_size)
        .cloned()
        .collect();
    Ok(IdsCatalog {
        minimum_size,
        optimal_sets,
        all_ids,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuboMinimum<T> {
    pub min_value: T,
    /// Minimizing assignments in ascending basis-index order.
    pub argmin: Vec<Vec<bool>>,
}

impl<T> QuboMinimum<T> {
    /// Vertex parts of the minimizers as bit strings (duplicates removed).
    pub fn vertex_parts(&self, vertex_count: usize) -> BTreeSet<String> {
        self.argmin
            .iter()
            .map(|a| bits::format_bits(&a[..vertex_count]))
            .collect()
    }
}

/// Exhaustive scan over every assignment of the model's variables.
pub fn brute_force_qubo_min<T: Scalar>(m: &QuboModel<T>) -> Result<QuboMinimum<T>, OracleError> {
    let n = m.variable_count();
    check_budget(n)?;
    let mut values = Vec::with_capacity(1 << n);
    let mut min_value: Option<T> = None;
    for k in 0..1usize << n {
        let v = m.form().evaluate(&bits::index_to_bits(k, n));
        if min_value.is_none_or(|cur| v < cur) {
            min_value = Some(v);
        }
        values.push(v);
    }
    let min_value = min_value.expect("at least one assignment");
    let argmin = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.near(min_value))
        .map(|(k, _)| bits::index_to_bits(k, n))
        .collect();
    Ok(QuboMinimum { min_value, argmin })
}

/// Sums masses of full outcomes that share the same leading `vertex_count` bits.
///
/// Keys of the result are basis indices over the vertex positions only.
pub fn marginalize<T: Real>(
    dist: &SampleDistribution<T>,
    vertex_count: usize,
) -> Result<BTreeMap<usize, T>, OracleError> {
    if dist.qubit_count < vertex_count {
        return Err(OracleError::StringTooShort {
            len: dist.qubit_count,
            vertex_count,
        });
    }
    let drop = dist.qubit_count - vertex_count;
    let mut marginal = BTreeMap::new();
    for (&k, &w) in &dist.weights {
        let e = marginal.entry(k >> drop).or_insert_with(T::zero);
        *e = *e + w;
    }
    Ok(marginal)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedString {
    pub bits: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub correct_probability: f64,
    pub optimal_probability: f64,
    /// Vertex-marginal strings by descending mass, ties in lexicographic order.
    pub top_strings: Vec<RankedString>,
}

impl ScoreReport {
    /// Rank (0-based) of a vertex string among `top_strings`.
    pub fn rank_of(&self, bits: &str) -> Option<usize> {
        self.top_strings.iter().position(|r| r.bits == bits)
    }
}

/// Correct/optimal probability of a distribution judged on its vertex bits.
pub fn score_distribution<T: Real>(
    dist: &SampleDistribution<T>,
    g: &Graph,
    catalog: &IdsCatalog,
) -> Result<ScoreReport, OracleError> {
    let n = g.vertex_count();
    let marginal = marginalize(dist, n)?;
    let mut correct = 0.0;
    let mut optimal = 0.0;
    let mut top_strings = Vec::with_capacity(marginal.len());
    for (&k, &w) in &marginal {
        let mass = w.to_f64_lossy();
        let set = decode_index(k, n);
        if catalog.is_ids(&set) {
            correct += mass;
            if catalog.is_optimal(&set) {
                optimal += mass;
            }
        }
        top_strings.push(RankedString {
            bits: bits::format_index(k, n),
            probability: mass,
        });
    }
    // BTreeMap order is already lexicographic; a stable sort keeps it for ties.
    top_strings.sort_by(|a, b| b.probability.total_cmp(&a.probability));
    Ok(ScoreReport {
        correct_probability: correct,
        optimal_probability: optimal,
        top_strings,
    })
}

/// Vertex set selected by a vertex-part basis index.
pub(crate) fn decode_index(index: usize, vertex_count: usize) -> VertexSet {
    (0..vertex_count)
        .filter(|&i| bits::bit(index, i, vertex_count))
        .collect()
}
