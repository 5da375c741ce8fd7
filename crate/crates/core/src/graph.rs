//! Bipartite tournaments and the mixed multigraphs built from them.
//!
//! A bipartite tournament on sides `A = {a_0..a_{m-1}}` and `B = {b_0..b_{n-1}}`
//! is stored as an `m x n` orientation matrix: `orient[i][j]` is `true` when the
//! arc is `a_i -> b_j` and `false` when it is `b_j -> a_i`. Every cross pair
//! therefore has exactly one arc and no arc joins two vertices of one side, so
//! neither invariant needs checking after construction.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::Bits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// Vertex identity: its side and its index within that side.
///
/// Ordering is `(side, index)`, so all of `A` precedes all of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub side: Side,
    pub index: usize,
}

impl VertexId {
    pub const fn a(index: usize) -> Self {
        VertexId {
            side: Side::A,
            index,
        }
    }

    pub const fn b(index: usize) -> Self {
        VertexId {
            side: Side::B,
            index,
        }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::A => write!(f, "a{}", self.index),
            Side::B => write!(f, "b{}", self.index),
        }
    }
}

impl Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type VertexSet = BTreeSet<VertexId>;

/// A directed arc `from -> to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
}

impl Edge {
    pub fn new(from: VertexId, to: VertexId) -> Self {
        Edge { from, to }
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.from == v || self.to == v
    }

    pub fn other(&self, v: VertexId) -> VertexId {
        if self.from == v {
            self.to
        } else {
            self.from
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.from, self.to)
    }
}

pub type EdgeSet = BTreeSet<Edge>;

/// Orientation between two vertices, as seen from the first argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arc {
    UtoV,
    VtoU,
    NoArc,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("vertex {0} is not in the tournament")]
    InvalidVertex(VertexId),
    #[error("expected {expected} labels, got {got}")]
    LabelCount { expected: usize, got: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
    #[error("part {part} has no vertex {vertex}")]
    InvalidPartVertex { part: usize, vertex: VertexId },
    #[error("undirected edge {0} joins two vertices of part {1}")]
    EdgeWithinPart(String, usize),
}

#[derive(Clone)]
pub struct BipartiteTournament {
    m: usize,
    n: usize,
    orient: Vec<bool>,
    labels: Option<Vec<String>>,
    // a_out[i]: B-indices j with a_i -> b_j; a_in[i]: B-indices j with b_j -> a_i;
    // b_out[j]: A-indices i with b_j -> a_i
    a_out: Vec<Bits>,
    a_in: Vec<Bits>,
    b_out: Vec<Bits>,
}

impl PartialEq for BipartiteTournament {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.n == other.n
            && self.orient == other.orient
            && self.labels == other.labels
    }
}

impl Eq for BipartiteTournament {}

impl fmt::Debug for BipartiteTournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.m)
            .map(|i| {
                (0..self.n)
                    .map(|j| if self.a_beats_b(i, j) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        f.debug_struct("BipartiteTournament")
            .field("m", &self.m)
            .field("n", &self.n)
            .field("orient", &rows)
            .field("labels", &self.labels)
            .finish()
    }
}

impl BipartiteTournament {
    /// Builds a tournament from `m` rows of `n` orientation flags.
    pub fn new(m: usize, n: usize, orient: Vec<Vec<bool>>) -> Result<Self, GraphError> {
        if orient.len() != m {
            return Err(GraphError::DimensionMismatch(format!(
                "expected {m} rows, got {}",
                orient.len()
            )));
        }
        if let Some((i, row)) = orient.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(GraphError::DimensionMismatch(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        let flat = orient.into_iter().flatten().collect();
        Ok(Self::from_flat(m, n, flat))
    }

    pub fn from_fn(m: usize, n: usize, mut a_to_b: impl FnMut(usize, usize) -> bool) -> Self {
        let mut flat = Vec::with_capacity(m * n);
        for i in 0..m {
            for j in 0..n {
                flat.push(a_to_b(i, j));
            }
        }
        Self::from_flat(m, n, flat)
    }

    fn from_flat(m: usize, n: usize, orient: Vec<bool>) -> Self {
        let mut a_out = vec![Bits::new(n); m];
        let mut a_in = vec![Bits::new(n); m];
        let mut b_out = vec![Bits::new(m); n];
        for i in 0..m {
            for j in 0..n {
                if orient[i * n + j] {
                    a_out[i].set(j);
                } else {
                    a_in[i].set(j);
                    b_out[j].set(i);
                }
            }
        }
        BipartiteTournament {
            m,
            n,
            orient,
            labels: None,
            a_out,
            a_in,
            b_out,
        }
    }

    /// Attaches presentation labels, `A` vertices first.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, GraphError> {
        if labels.len() != self.len() {
            return Err(GraphError::LabelCount {
                expected: self.len(),
                got: labels.len(),
            });
        }
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(GraphError::DuplicateLabel(l.clone()));
            }
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Total vertex count `m + n`.
    pub fn len(&self) -> usize {
        self.m + self.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn a_beats_b(&self, i: usize, j: usize) -> bool {
        self.orient[i * self.n + j]
    }

    pub fn orient_rows(&self) -> Vec<Vec<bool>> {
        (0..self.m)
            .map(|i| self.orient[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        match v.side {
            Side::A => v.index < self.m,
            Side::B => v.index < self.n,
        }
    }

    pub fn check(&self, v: VertexId) -> Result<(), GraphError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(GraphError::InvalidVertex(v))
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.m)
            .map(VertexId::a)
            .chain((0..self.n).map(VertexId::b))
    }

    pub fn vertex_set(&self) -> VertexSet {
        self.vertices().collect()
    }

    /// Dense index: `a_i -> i`, `b_j -> m + j`.
    #[inline]
    pub fn dense(&self, v: VertexId) -> usize {
        match v.side {
            Side::A => v.index,
            Side::B => self.m + v.index,
        }
    }

    #[inline]
    pub fn vertex(&self, d: usize) -> VertexId {
        if d < self.m {
            VertexId::a(d)
        } else {
            VertexId::b(d - self.m)
        }
    }

    /// `true` iff the arc `u -> v` exists.
    #[inline]
    pub fn has_arc(&self, u: VertexId, v: VertexId) -> bool {
        match (u.side, v.side) {
            (Side::A, Side::B) => self.a_beats_b(u.index, v.index),
            (Side::B, Side::A) => !self.a_beats_b(v.index, u.index),
            _ => false,
        }
    }

    pub fn arc(&self, u: VertexId, v: VertexId) -> Arc {
        if u.side == v.side {
            Arc::NoArc
        } else if self.has_arc(u, v) {
            Arc::UtoV
        } else {
            Arc::VtoU
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = Edge> + '_ {
        (0..self.m).flat_map(move |i| {
            (0..self.n).map(move |j| {
                if self.a_beats_b(i, j) {
                    Edge::new(VertexId::a(i), VertexId::b(j))
                } else {
                    Edge::new(VertexId::b(j), VertexId::a(i))
                }
            })
        })
    }

    pub fn is_arc(&self, e: &Edge) -> bool {
        self.contains(e.from) && self.contains(e.to) && self.has_arc(e.from, e.to)
    }

    fn opposite_side(&self, v: VertexId) -> impl Iterator<Item = VertexId> {
        let (side, len) = match v.side {
            Side::A => (Side::B, self.n),
            Side::B => (Side::A, self.m),
        };
        (0..len).map(move |index| VertexId { side, index })
    }

    /// `N^+(v)`, optionally intersected with `within`.
    pub fn out_neighbors(&self, v: VertexId, within: Option<&VertexSet>) -> VertexSet {
        self.opposite_side(v)
            .filter(|&u| self.has_arc(v, u))
            .filter(|u| within.is_none_or(|w| w.contains(u)))
            .collect()
    }

    /// `N^-(v)`, optionally intersected with `within`.
    pub fn in_neighbors(&self, v: VertexId, within: Option<&VertexSet>) -> VertexSet {
        self.opposite_side(v)
            .filter(|&u| self.has_arc(u, v))
            .filter(|u| within.is_none_or(|w| w.contains(u)))
            .collect()
    }

    /// The subtournament induced by `keep`; vertices keep their relative order.
    pub fn induced(&self, keep: &VertexSet) -> Induced {
        let a: Vec<usize> = keep
            .iter()
            .filter(|v| v.side == Side::A && v.index < self.m)
            .map(|v| v.index)
            .collect();
        let b: Vec<usize> = keep
            .iter()
            .filter(|v| v.side == Side::B && v.index < self.n)
            .map(|v| v.index)
            .collect();
        let mut t =
            BipartiteTournament::from_fn(a.len(), b.len(), |i, j| self.a_beats_b(a[i], b[j]));
        let mapping: Vec<VertexId> = a
            .iter()
            .map(|&i| VertexId::a(i))
            .chain(b.iter().map(|&j| VertexId::b(j)))
            .collect();
        if let Some(labels) = &self.labels {
            t.labels = Some(
                mapping
                    .iter()
                    .map(|&v| labels[self.dense(v)].clone())
                    .collect(),
            );
        }
        Induced {
            tournament: t,
            mapping,
        }
    }

    /// `T - S`.
    pub fn remove(&self, drop: &VertexSet) -> Induced {
        let keep: VertexSet = self.vertices().filter(|v| !drop.contains(v)).collect();
        self.induced(&keep)
    }

    /// Partition into false-twin classes: same side and identical in/out neighborhoods.
    pub fn false_twin_classes(&self) -> Vec<VertexSet> {
        let mut classes: BTreeMap<(Side, Vec<bool>), VertexSet> = BTreeMap::new();
        for i in 0..self.m {
            let row: Vec<bool> = (0..self.n).map(|j| self.a_beats_b(i, j)).collect();
            classes
                .entry((Side::A, row))
                .or_default()
                .insert(VertexId::a(i));
        }
        for j in 0..self.n {
            let col: Vec<bool> = (0..self.m).map(|i| self.a_beats_b(i, j)).collect();
            classes
                .entry((Side::B, col))
                .or_default()
                .insert(VertexId::b(j));
        }
        let mut out: Vec<VertexSet> = classes.into_values().collect();
        out.sort_by_key(|c| *c.iter().next().expect("classes are nonempty"));
        out
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Label of `v`; defaults to `a{i}` / `b{j}`.
    pub fn label(&self, v: VertexId) -> String {
        match &self.labels {
            Some(l) => l[self.dense(v)].clone(),
            None => v.to_string(),
        }
    }

    pub fn find_label(&self, label: &str) -> Option<VertexId> {
        match &self.labels {
            Some(l) => l.iter().position(|x| x == label).map(|d| self.vertex(d)),
            None => {
                let (side, rest) = match label.as_bytes().first()? {
                    b'a' => (Side::A, &label[1..]),
                    b'b' => (Side::B, &label[1..]),
                    _ => return None,
                };
                if rest.is_empty() || (rest.len() > 1 && rest.starts_with('0')) {
                    return None;
                }
                let index = rest.parse().ok()?;
                let v = VertexId { side, index };
                self.contains(v).then_some(v)
            }
        }
    }

    pub(crate) fn a_out(&self, i: usize) -> &Bits {
        &self.a_out[i]
    }

    pub(crate) fn a_in(&self, i: usize) -> &Bits {
        &self.a_in[i]
    }

    pub(crate) fn b_out(&self, j: usize) -> &Bits {
        &self.b_out[j]
    }

    /// Dense membership mask for `set`.
    pub(crate) fn mask(&self, set: &VertexSet) -> Vec<bool> {
        let mut mask = vec![false; self.len()];
        for &v in set {
            if self.contains(v) {
                mask[self.dense(v)] = true;
            }
        }
        mask
    }
}

/// An induced subtournament together with the identity of each of its vertices
/// in the host (`mapping[dense_index_in_sub]`).
#[derive(Debug, Clone)]
pub struct Induced {
    pub tournament: BipartiteTournament,
    pub mapping: Vec<VertexId>,
}

impl Induced {
    pub fn to_host(&self, v: VertexId) -> VertexId {
        self.mapping[self.tournament.dense(v)]
    }

    pub fn from_host(&self, v: VertexId) -> Option<VertexId> {
        self.mapping
            .iter()
            .position(|&x| x == v)
            .map(|d| self.tournament.vertex(d))
    }

    pub fn lift(&self, set: &VertexSet) -> VertexSet {
        set.iter().map(|&v| self.to_host(v)).collect()
    }

    pub fn project(&self, set: &VertexSet) -> VertexSet {
        set.iter().filter_map(|&v| self.from_host(v)).collect()
    }
}

/// A vertex of a mixed multigraph: the part it lives in and its id there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartVertex {
    pub part: usize,
    pub vertex: VertexId,
}

impl PartVertex {
    pub fn new(part: usize, vertex: VertexId) -> Self {
        PartVertex { part, vertex }
    }
}

impl fmt::Display for PartVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.part, self.vertex)
    }
}

/// Disjoint bipartite-tournament parts plus undirected edges between parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedMultigraph {
    parts: Vec<BipartiteTournament>,
    undirected: Vec<(PartVertex, PartVertex)>,
}

impl MixedMultigraph {
    pub fn new(
        parts: Vec<BipartiteTournament>,
        undirected: Vec<(PartVertex, PartVertex)>,
    ) -> Result<Self, GraphError> {
        let g = MixedMultigraph { parts, undirected };
        for &(u, v) in &g.undirected {
            g.check(u)?;
            g.check(v)?;
            if u.part == v.part {
                return Err(GraphError::EdgeWithinPart(format!("{u}-{v}"), u.part));
            }
        }
        Ok(g)
    }

    pub fn check(&self, v: PartVertex) -> Result<(), GraphError> {
        match self.parts.get(v.part) {
            Some(t) if t.contains(v.vertex) => Ok(()),
            _ => Err(GraphError::InvalidPartVertex {
                part: v.part,
                vertex: v.vertex,
            }),
        }
    }

    pub fn parts(&self) -> &[BipartiteTournament] {
        &self.parts
    }

    pub fn undirected(&self) -> &[(PartVertex, PartVertex)] {
        &self.undirected
    }

    pub fn vertex_count(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    pub fn vertices(&self) -> impl Iterator<Item = PartVertex> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, t)| t.vertices().map(move |v| PartVertex::new(i, v)))
    }

    /// Number of undirected edges with an endpoint in `part`.
    pub fn undirected_degree(&self, part: usize) -> usize {
        self.undirected
            .iter()
            .filter(|(u, v)| u.part == part || v.part == part)
            .count()
    }

    /// `true` iff no vertex is incident to two undirected edges.
    pub fn undirected_is_matching(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.undirected
            .iter()
            .all(|&(u, v)| u != v && seen.insert(u) && seen.insert(v))
    }
}
