//! Simple undirected graphs and independent-domination predicates.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("missing header line \"<vertices> <edges>\"")]
    MissingHeader,
    #[error("line {line}: malformed header {text:?}")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: malformed edge {text:?}")]
    MalformedEdge { line: usize, text: String },
    #[error("line {line}: endpoint {vertex} out of range for {vertex_count} vertices")]
    EndpointOutOfRange {
        line: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("line {line}: self-loop on vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },
    #[error("line {line}: duplicate edge {u}-{v}")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("header declares {declared} edges but {found} were listed")]
    EdgeCountMismatch { declared: usize, found: usize },
    #[error("vertex {vertex} out of range for {vertex_count} vertices")]
    VertexOutOfRange { vertex: usize, vertex_count: usize },
}

/// Set of vertex indices, ordered ascending.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet(BTreeSet<usize>);

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.0.insert(v)
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// Members of a subset encoded as a bitmask over vertex indices (bit `i` = vertex `i`).
    pub fn from_mask(mask: u64, vertex_count: usize) -> Self {
        (0..vertex_count).filter(|&v| mask >> v & 1 == 1).collect()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(members: [usize; N]) -> Self {
        members.into_iter().collect()
    }
}

impl fmt::Display for VertexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str("}")
    }
}

/// Outcome of checking a vertex set against both IDS conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdsCheck {
    pub dominating: bool,
    pub independent: bool,
}

impl IdsCheck {
    pub fn is_ids(self) -> bool {
        self.dominating && self.independent
    }
}

/// Simple undirected graph on vertices `0..vertex_count`.
///
/// Immutable once built; the edge list is kept sorted with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::build(
            vertex_count,
            edges.iter().enumerate().map(|(k, &e)| (k + 1, e)),
        )
    }

    fn build<I>(vertex_count: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, (usize, usize))>,
    {
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut seen = BTreeSet::new();
        for (line, (u, v)) in edges {
            for vertex in [u, v] {
                if vertex >= vertex_count {
                    return Err(GraphError::EndpointOutOfRange {
                        line,
                        vertex,
                        vertex_count,
                    });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line, vertex: u });
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge { line, u, v });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        adjacency.iter_mut().for_each(|n| n.sort_unstable());
        Ok(Self {
            vertex_count,
            edges: seen.into_iter().collect(),
            adjacency,
        })
    }

    pub fn empty(vertex_count: usize) -> Self {
        Self::new(vertex_count, &[]).expect("edgeless graph is valid")
    }

    pub fn complete(vertex_count: usize) -> Self {
        let edges: Vec<_> = (0..vertex_count)
            .flat_map(|u| (u + 1..vertex_count).map(move |v| (u, v)))
            .collect();
        Self::new(vertex_count, &edges).expect("complete graph is valid")
    }

    pub fn path(vertex_count: usize) -> Self {
        let edges: Vec<_> = (1..vertex_count).map(|v| (v - 1, v)).collect();
        Self::new(vertex_count, &edges).expect("path graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count && self.adjacency[u].binary_search(&v).is_ok()
    }

    fn check_vertex(&self, vertex: usize) -> Result<(), GraphError> {
        if vertex < self.vertex_count {
            Ok(())
        } else {
            Err(GraphError::VertexOutOfRange {
                vertex,
                vertex_count: self.vertex_count,
            })
        }
    }

    /// `N[v]`: the vertex itself plus its neighbours.
    pub fn closed_neighborhood(&self, v: usize) -> Result<VertexSet, GraphError> {
        self.check_vertex(v)?;
        Ok(std::iter::once(v)
            .chain(self.adjacency[v].iter().copied())
            .collect())
    }

    /// Members of `N[v]` in the order the penalty expansion uses: `v` first,
    /// then neighbours ascending.
    pub(crate) fn closed_neighborhood_ordered(&self, v: usize) -> Vec<usize> {
        std::iter::once(v)
            .chain(self.adjacency[v].iter().copied())
            .collect()
    }

    pub fn is_independent_dominating_set(&self, d: &VertexSet) -> Result<IdsCheck, GraphError> {
        if let Some(max) = d.max() {
            self.check_vertex(max)?;
        }
        let dominating = (0..self.vertex_count)
            .all(|v| d.contains(v) || self.adjacency[v].iter().any(|&u| d.contains(u)));
        let independent = !self
            .edges
            .iter()
            .any(|&(u, v)| d.contains(u) && d.contains(v));
        Ok(IdsCheck {
            dominating,
            independent,
        })
    }

    /// Mask-based IDS test for enumeration loops; bit `i` of `mask` selects vertex `i`.
    pub(crate) fn is_ids_mask(&self, mask: u64) -> bool {
        let independent = self
            .edges
            .iter()
            .all(|&(u, v)| mask >> u & 1 == 0 || mask >> v & 1 == 0);
        independent
            && (0..self.vertex_count).all(|v| {
                mask >> v & 1 == 1 || self.adjacency[v].iter().any(|&u| mask >> u & 1 == 1)
            })
    }

    /// Renders the edge-list document accepted by [`parse_graph`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.vertex_count, self.edges.len());
        for (u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_graph(s)
    }
}

/// Parses the edge-list format: header `n m`, then `m` lines `u v`.
///
/// Blank lines are skipped; LF and CRLF endings are both accepted.
pub fn parse_graph(text: &str) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(GraphError::MissingHeader)?;
    let malformed_header = || GraphError::MalformedHeader {
        line: header_line,
        text: header.to_string(),
    };
    let (vertex_count, edge_count) = parse_pair(header).ok_or_else(malformed_header)?;

    let mut edges = Vec::with_capacity(edge_count);
    for (line, text) in lines {
        let pair = parse_pair(text).ok_or_else(|| GraphError::MalformedEdge {
            line,
            text: text.to_string(),
        })?;
        edges.push((line, pair));
    }
    if edges.len() != edge_count {
        return Err(GraphError::EdgeCountMismatch {
            declared: edge_count,
            found: edges.len(),
        });
    }
    Graph::build(vertex_count, edges)
}

fn parse_pair(text: &str) -> Option<(usize, usize)> {
    let mut fields = text.split_whitespace();
    let a = fields.next()?.parse().ok()?;
    let b = fields.next()?.parse().ok()?;
    fields.next().is_none().then_some((a, b))
}
