//! Penalty QUBO for the independent domination problem.
//!
//! The objective `Σ x_i` is augmented with one covering penalty per vertex
//! (at least one member of `N[v]` selected) and one product penalty per
//! edge (endpoints not both selected). Covering constraints over three or
//! more variables are turned into equalities with a binary-encoded slack
//! integer and then squared.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("slack encodings need a neighbourhood of at least 3 vertices, got {0}")]
    SlackTooSmall(usize),
    #[error("penalty coefficient must be positive and finite, got {0}")]
    InvalidPenalty(String),
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("assignment has {found} bits, model has {expected} variables")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Binary encoding of a slack integer ranging over `[0, range_max]`.
///
/// Weights are `1, 2, 4, …` for all but the last bit, which carries the
/// residual so the maximum sum is exactly `range_max`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackEncoding {
    pub bit_count: usize,
    pub coefficients: Vec<u64>,
    pub range_max: u64,
}

impl SlackEncoding {
    /// All values the weighted sum takes as the slack bits range over `{0,1}`.
    pub fn attained_values(&self) -> std::collections::BTreeSet<u64> {
        (0u64..1 << self.bit_count)
            .map(|mask| {
                self.coefficients
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask >> k & 1 == 1)
                    .map(|(_, w)| w)
                    .sum()
            })
            .collect()
    }
}

/// Slack encoding for a covering constraint over `n ≥ 3` variables.
pub fn slack_encoding(n: usize) -> Result<SlackEncoding, QuboError> {
    if n < 3 {
        return Err(QuboError::SlackTooSmall(n));
    }
    let range_max = (n - 1) as u64;
    // binary length of n - 1
    let bit_count = (u64::BITS - range_max.leading_zeros()) as usize;
    let mut coefficients: Vec<u64> = (0..bit_count - 1).map(|k| 1 << k).collect();
    let residual = range_max - coefficients.iter().sum::<u64>();
    coefficients.push(residual);
    Ok(SlackEncoding {
        bit_count,
        coefficients,
        range_max,
    })
}

/// Quadratic pseudo-Boolean polynomial with `x² = x` applied on insertion.
///
/// Quadratic keys are stored as `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm<T> {
    pub constant: T,
    pub linear: BTreeMap<usize, T>,
    pub quadratic: BTreeMap<(usize, usize), T>,
}

impl<T: Scalar> Default for QuadraticForm<T> {
    fn default() -> Self {
        Self {
            constant: T::zero(),
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }
}

impl<T: Scalar> QuadraticForm<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_constant(&mut self, c: T) {
        self.constant = self.constant + c;
    }

    pub fn add_linear(&mut self, i: usize, c: T) {
        let entry = self.linear.entry(i).or_insert_with(T::zero);
        *entry = *entry + c;
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, c: T) {
        if i == j {
            return self.add_linear(i, c);
        }
        let entry = self
            .quadratic
            .entry((i.min(j), i.max(j)))
            .or_insert_with(T::zero);
        *entry = *entry + c;
    }

    pub fn add_form(&mut self, other: &QuadraticForm<T>) {
        self.add_constant(other.constant);
        for (&i, &c) in &other.linear {
            self.add_linear(i, c);
        }
        for (&(i, j), &c) in &other.quadratic {
            self.add_quadratic(i, j, c);
        }
    }

    /// Adds `scale · (offset + Σ c_k x_k)²`.
    pub fn add_scaled_square(&mut self, scale: T, terms: &[(usize, T)], offset: T) {
        let two = T::one() + T::one();
        self.add_constant(scale * offset * offset);
        for (k, &(i, ci)) in terms.iter().enumerate() {
            self.add_linear(i, scale * (ci * ci + two * offset * ci));
            for &(j, cj) in &terms[k + 1..] {
                self.add_quadratic(i, j, scale * two * ci * cj);
            }
        }
    }

    /// Drops coefficients that collected to exactly zero.
    pub fn prune_zeros(&mut self) {
        self.linear.retain(|_, c| !c.is_zero());
        self.quadratic.retain(|_, c| !c.is_zero());
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            constant: self.constant * s,
            linear: self.linear.iter().map(|(&i, &c)| (i, c * s)).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &c)| (k, c * s)).collect(),
        }
    }

    /// Highest variable index referenced plus one.
    pub fn span(&self) -> usize {
        let lin = self.linear.keys().next_back().map_or(0, |&i| i + 1);
        let quad = self
            .quadratic
            .keys()
            .map(|&(_, j)| j + 1)
            .max()
            .unwrap_or(0);
        lin.max(quad)
    }

    /// Evaluates the form; `bits` must cover every referenced variable.
    pub fn evaluate(&self, bits: &[bool]) -> T {
        let lin = self
            .linear
            .iter()
            .filter(|(&i, _)| bits[i])
            .fold(T::zero(), |acc, (_, &c)| acc + c);
        let quad = self
            .quadratic
            .iter()
            .filter(|(&(i, j), _)| bits[i] && bits[j])
            .fold(T::zero(), |acc, (_, &c)| acc + c);
        self.constant + lin + quad
    }

    /// Coefficient-wise conversion into another scalar type.
    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> QuadraticForm<U> {
        QuadraticForm {
            constant: f(self.constant),
            linear: self.linear.iter().map(|(&i, &c)| (i, f(c))).collect(),
            quadratic: self.quadratic.iter().map(|(&k, &c)| (k, f(c))).collect(),
        }
    }
}

/// A slack bit together with the covering constraint that owns it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlackVariable {
    pub index: usize,
    pub vertex: usize,
    pub weight: u64,
}

/// Penalty contribution of one covering constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintPenalty<T> {
    pub form: QuadraticForm<T>,
    pub slack: Vec<SlackVariable>,
}

fn check_penalty<T: Scalar>(penalty: T) -> Result<(), QuboError> {
    if penalty > T::zero() && penalty.is_finite_value() {
        Ok(())
    } else {
        Err(QuboError::InvalidPenalty(penalty.to_string()))
    }
}

/// Penalty enforcing `Σ_{j ∈ N[v]} x_j ≥ 1`.
///
/// * `|N[v]| = 1`: `P·(x_v − 1)²`
/// * `|N[v]| = 2`: `P·(1 − x_a − x_b + x_a·x_b)`
/// * otherwise: `P·(Σ x_j − S − 1)²` with `S` encoded on fresh slack bits
///   starting at index `first_slack`, least significant weight first.
pub fn constraint_penalty<T: Scalar>(
    g: &Graph,
    v: usize,
    penalty: T,
    first_slack: usize,
) -> Result<ConstraintPenalty<T>, QuboError> {
    check_penalty(penalty)?;
    g.closed_neighborhood(v)?;
    let members = g.closed_neighborhood_ordered(v);
    let mut form = QuadraticForm::new();
    let mut slack = Vec::new();
    match *members.as_slice() {
        [only] => form.add_scaled_square(penalty, &[(only, T::one())], -T::one()),
        [a, b] => {
            form.add_constant(penalty);
            form.add_linear(a, -penalty);
            form.add_linear(b, -penalty);
            form.add_quadratic(a, b, penalty);
        }
        _ => {
            let encoding = slack_encoding(members.len())?;
            let mut terms: Vec<(usize, T)> = members.iter().map(|&j| (j, T::one())).collect();
            for (k, &weight) in encoding.coefficients.iter().enumerate() {
                let index = first_slack + k;
                slack.push(SlackVariable {
                    index,
                    vertex: v,
                    weight,
                });
                let w = T::from_u64(weight).expect("slack weight fits the scalar type");
                terms.push((index, -w));
            }
            form.add_scaled_square(penalty, &terms, -T::one());
        }
    }
    Ok(ConstraintPenalty { form, slack })
}

/// The IDS penalty model over vertex variables `0..|V|` followed by slack bits.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboModel<T> {
    vertex_count: usize,
    variable_count: usize,
    form: QuadraticForm<T>,
    penalty: T,
    slack: Vec<SlackVariable>,
}

/// Penalty coefficient used when none is given: three quarters of the vertex count.
pub fn default_penalty<T: Scalar>(vertex_count: usize) -> T {
    T::from_usize_exact(3 * vertex_count) / T::from_usize_exact(4)
}

/// Compiles `g` into the penalty QUBO with coefficient `penalty`.
pub fn build_qubo<T: Scalar>(g: &Graph, penalty: T) -> Result<QuboModel<T>, QuboError> {
    check_penalty(penalty)?;
    let n = g.vertex_count();
    if n == 0 {
        return Err(QuboError::EmptyGraph);
    }
    let mut form = QuadraticForm::new();
    for i in 0..n {
        form.add_linear(i, T::one());
    }
    let mut slack = Vec::new();
    let mut next = n;
    for v in 0..n {
        let part = constraint_penalty(g, v, penalty, next)?;
        next += part.slack.len();
        slack.extend(part.slack);
        form.add_form(&part.form);
    }
    for &(i, j) in g.edges() {
        form.add_quadratic(i, j, penalty);
    }
    form.prune_zeros();
    Ok(QuboModel {
        vertex_count: n,
        variable_count: next,
        form,
        penalty,
        slack,
    })
}

impl<T: Scalar> QuboModel<T> {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn variable_count(&self) -> usize {
        self.variable_count
    }

    pub fn penalty(&self) -> T {
        self.penalty
    }

    pub fn form(&self) -> &QuadraticForm<T> {
        &self.form
    }

    pub fn constant(&self) -> T {
        self.form.constant
    }

    pub fn linear(&self) -> &BTreeMap<usize, T> {
        &self.form.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), T> {
        &self.form.quadratic
    }

    /// Slack bits in allocation order (by owning vertex, then weight position).
    pub fn slack_registry(&self) -> &[SlackVariable] {
        &self.slack
    }

    pub fn evaluate(&self, bits: &[bool]) -> Result<T, QuboError> {
        if bits.len() != self.variable_count {
            return Err(QuboError::LengthMismatch {
                expected: self.variable_count,
                found: bits.len(),
            });
        }
        Ok(self.form.evaluate(bits))
    }

    /// Multiplies every coefficient, the constant and the penalty by `s > 0`.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            form: self.form.scaled(s),
            penalty: self.penalty * s,
            ..self.clone()
        }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> QuboModel<U> {
        QuboModel {
            vertex_count: self.vertex_count,
            variable_count: self.variable_count,
            form: self.form.map(&f),
            penalty: f(self.penalty),
            slack: self.slack.clone(),
        }
    }

    /// Text export: the constant, then `i coeff` lines, then `i j coeff` lines,
    /// each block in ascending index order.
    pub fn to_export_text(&self) -> String {
        let mut out = format!("{}\n", self.form.constant);
        for (i, c) in &self.form.linear {
            let _ = writeln!(out, "{i} {c}");
        }
        for ((i, j), c) in &self.form.quadratic {
            let _ = writeln!(out, "{i} {j} {c}");
        }
        out
    }
}

/// `constant + Σ linear_i·a_i + Σ quadratic_ij·a_i·a_j`.
pub fn evaluate_qubo<T: Scalar>(m: &QuboModel<T>, bits: &[bool]) -> Result<T, QuboError> {
    m.evaluate(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::parse_bits;
    use crate::graph::parse_graph;
    use num_rational::Rational64;

    fn six() -> Graph {
        parse_graph("6 5\n0 2\n1 3\n2 3\n2 4\n3 5").unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn slack_encodings() {
        let e4 = slack_encoding(4).unwrap();
        assert_eq!(
            (e4.bit_count, e4.coefficients.clone(), e4.range_max),
            (2, vec![1, 2], 3)
        );
        let e3 = slack_encoding(3).unwrap();
        assert_eq!(
            (e3.bit_count, e3.coefficients.clone(), e3.range_max),
            (2, vec![1, 1], 2)
        );
        assert_eq!(e3.attained_values(), (0..=2).collect());
        let e5 = slack_encoding(5).unwrap();
        assert_eq!(
            (e5.bit_count, e5.coefficients.clone(), e5.range_max),
            (3, vec![1, 2, 1], 4)
        );
        assert_eq!(e5.attained_values(), (0..=4).collect());
        assert_eq!(slack_encoding(2), Err(QuboError::SlackTooSmall(2)));
    }

    #[test]
    fn pair_and_singleton_penalties() {
        let path = Graph::path(2);
        let pair = constraint_penalty(&path, 0, 3.0, 2).unwrap();
        assert!(pair.slack.is_empty());
        assert_eq!(pair.form.evaluate(&[true, false]), 0.0);
        assert_eq!(pair.form.evaluate(&[false, true]), 0.0);
        assert_eq!(pair.form.evaluate(&[true, true]), 0.0);
        assert_eq!(pair.form.evaluate(&[false, false]), 3.0);

        let single = constraint_penalty(&Graph::empty(1), 0, 2.5, 1).unwrap();
        assert_eq!(single.form.evaluate(&[true]), 0.0);
        assert_eq!(single.form.evaluate(&[false]), 2.5);
    }

    #[test]
    fn four_member_penalty_matches_square() {
        // 4.5·(x2 + x0 + x4 + x3 − x6 − 2·x7 − 1)² evaluated directly
        let g = six();
        let part = constraint_penalty(&g, 2, r(9, 2), 6).unwrap();
        assert_eq!(
            part.slack,
            vec![
                SlackVariable {
                    index: 6,
                    vertex: 2,
                    weight: 1
                },
                SlackVariable {
                    index: 7,
                    vertex: 2,
                    weight: 2
                },
            ]
        );
        for mask in 0u32..256 {
            let bits: Vec<bool> = (0..8).map(|k| mask >> k & 1 == 1).collect();
            let x = |k: usize| r(i64::from(bits[k]), 1);
            let inner = x(2) + x(0) + x(4) + x(3) - x(6) - x(7) * 2 - 1;
            assert_eq!(part.form.evaluate(&bits), r(9, 2) * inner * inner);
        }
    }

    #[test]
    fn covering_penalty_semantics() {
        // min over slack is 0 iff covered, otherwise ≥ P
        let g = Graph::complete(5);
        let part = constraint_penalty(&g, 0, 1.0, 5).unwrap();
        let slack_bits = part.slack.len();
        for mask in 0u32..32 {
            let best = (0u32..1 << slack_bits)
                .map(|s| {
                    let bits: Vec<bool> = (0..5)
                        .map(|k| mask >> k & 1 == 1)
                        .chain((0..slack_bits).map(|k| s >> k & 1 == 1))
                        .collect();
                    part.form.evaluate(&bits)
                })
                .fold(f64::INFINITY, f64::min);
            if mask == 0 {
                assert!(best >= 1.0);
            } else {
                assert_eq!(best, 0.0);
            }
        }
    }

    #[test]
    fn six_node_model_layout() {
        let m = build_qubo(&six(), 4.5).unwrap();
        assert_eq!(m.variable_count(), 10);
        let owners: Vec<_> = m
            .slack_registry()
            .iter()
            .map(|s| (s.index, s.vertex, s.weight))
            .collect();
        assert_eq!(owners, vec![(6, 2, 1), (7, 2, 2), (8, 3, 1), (9, 3, 2)]);
        assert!(m.quadratic().keys().all(|&(i, j)| i < j));
    }

    #[test]
    fn six_node_evaluations() {
        let m = build_qubo(&six(), r(9, 2)).unwrap();
        let eval = |s: &str| m.evaluate(&parse_bits(s).unwrap()).unwrap();
        assert_eq!(eval("0110010001"), r(3, 1));
        assert_eq!(eval("0000000000"), r(27, 1));
        // objective 2, uncovered N[1], N[5], N[2] over-covered with zero slack, edge 0–2
        assert_eq!(eval("1010000000"), r(20, 1));
        assert_eq!(
            m.evaluate(&[false; 3]),
            Err(QuboError::LengthMismatch {
                expected: 10,
                found: 3
            })
        );
    }

    #[test]
    fn isolated_vertex_forced_in() {
        let m = build_qubo(&Graph::empty(1), 2.0).unwrap();
        assert_eq!(m.variable_count(), 1);
        assert_eq!(m.evaluate(&[true]).unwrap(), 1.0);
        assert_eq!(m.evaluate(&[false]).unwrap(), 2.0);
    }

    #[test]
    fn triangle_has_nine_variables() {
        let m = build_qubo(&Graph::complete(3), 3.0).unwrap();
        assert_eq!(m.variable_count(), 9);
        let min = (0usize..512)
            .map(|k| m.evaluate(&crate::bits::index_to_bits(k, 9)).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, 1.0);
    }

    #[test]
    fn default_penalty_is_three_quarters_of_order() {
        assert_eq!(default_penalty::<f64>(6), 4.5);
        assert_eq!(default_penalty::<Rational64>(6), r(9, 2));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            build_qubo(&six(), 0.0),
            Err(QuboError::InvalidPenalty(_))
        ));
        assert!(matches!(
            build_qubo(&six(), f64::NAN),
            Err(QuboError::InvalidPenalty(_))
        ));
        assert_eq!(
            build_qubo(&Graph::empty(0), 1.0),
            Err(QuboError::EmptyGraph)
        );
    }

    #[test]
    fn export_is_sorted_text() {
        let m = build_qubo(&Graph::path(2), 2.0).unwrap();
        // x0 + x1 + 2·2·(1 − x0 − x1 + x0x1) + 2·x0x1
        assert_eq!(m.to_export_text(), "4\n0 -3\n1 -3\n0 1 6\n");
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn slack_is_surjective(n in 3usize..300) {
                let e = slack_encoding(n).unwrap();
                prop_assert_eq!(e.coefficients.len(), e.bit_count);
                prop_assert!(e.coefficients.iter().all(|&w| w > 0));
                let attained = e.attained_values();
                prop_assert_eq!(attained, (0..=e.range_max).collect());
            }
        }
    }
}
