#![allow(dead_code)]

use std::collections::BTreeMap;
use std::ops::{Add, Mul};

use idp_qaoa::{parse_graph, Graph, Rational};

pub const SIX_NODE: &str = "6 5\n0 2\n1 3\n2 3\n2 4\n3 5\n";
pub const OPTIMAL_STRINGS: [&str; 2] = ["011001", "100110"];

pub fn six_node() -> Graph {
    parse_graph(SIX_NODE).unwrap()
}

pub fn data_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

/// Multilinear polynomial over 0/1 variables with exact coefficients.
///
/// Monomials are sorted, deduplicated variable lists, so `x·x` collapses to `x`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Poly(pub BTreeMap<Vec<usize>, Rational>);

impl Poly {
    pub fn constant(c: i64) -> Self {
        Self::term(&[], Rational::from(c))
    }

    pub fn var(i: usize) -> Self {
        Self::term(&[i], Rational::from(1))
    }

    pub fn term(vars: &[usize], c: Rational) -> Self {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        let mut p = Poly::default();
        p.0.insert(key, c);
        p
    }

    pub fn scale(&self, c: Rational) -> Self {
        Poly(self.0.iter().map(|(k, &v)| (k.clone(), v * c)).collect()).cleaned()
    }

    pub fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    pub fn degree(&self) -> usize {
        self.0.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn coefficient(&self, vars: &[usize]) -> Rational {
        self.0.get(vars).copied().unwrap_or_default()
    }

    pub fn evaluate(&self, x: &[bool]) -> Rational {
        self.0
            .iter()
            .filter(|(k, _)| k.iter().all(|&i| x[i]))
            .map(|(_, &c)| c)
            .sum()
    }

    fn cleaned(mut self) -> Self {
        self.0.retain(|_, c| *c != Rational::from(0));
        self
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (k, c) in rhs.0 {
            *self.0.entry(k).or_default() += c;
        }
        self.cleaned()
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::default();
        for (a, &ca) in &self.0 {
            for (b, &cb) in &rhs.0 {
                let mut key: Vec<usize> = a.iter().chain(b).copied().collect();
                key.sort_unstable();
                key.dedup();
                *out.0.entry(key).or_default() += ca * cb;
            }
        }
        out.cleaned()
    }
}

fn sum(vars: &[usize]) -> Poly {
    vars.iter()
        .fold(Poly::default(), |acc, &i| acc + Poly::var(i))
}

fn neg(p: Poly) -> Poly {
    p.scale(Rational::from(-1))
}

/// The six-node instance objective written out line by line, penalty `p`.
pub fn six_node_expression(p: Rational) -> Poly {
    let pair = |a: usize, b: usize| {
        Poly::constant(1)
            + neg(Poly::var(a))
            + neg(Poly::var(b))
            + Poly::term(&[a, b], Rational::from(1))
    };
    let slack_square = |members: &[usize], s0: usize, s1: usize| {
        let slack = Poly::var(s0) + Poly::var(s1).scale(Rational::from(2));
        (sum(members) + neg(slack) + Poly::constant(-1)).square()
    };
    let edge = |a: usize, b: usize| Poly::term(&[a, b], p);

    sum(&[0, 1, 2, 3, 4, 5])
        + pair(0, 2).scale(p)
        + pair(1, 3).scale(p)
        + slack_square(&[2, 0, 4, 3], 6, 7).scale(p)
        + slack_square(&[3, 1, 2, 5], 8, 9).scale(p)
        + pair(4, 2).scale(p)
        + pair(5, 3).scale(p)
        + edge(0, 2)
        + edge(1, 3)
        + edge(2, 4)
        + edge(2, 3)
        + edge(3, 5)
}

/// Bits of `k` as `n` booleans, position 0 being the most significant bit.
pub fn assignment(k: usize, n: usize) -> Vec<bool> {
    (0..n).map(|i| k >> (n - 1 - i) & 1 == 1).collect()
}
