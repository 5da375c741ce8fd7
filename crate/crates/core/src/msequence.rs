//! M-consistency, vertex classification and M-sequences.
//!
//! Given a set `M` with `T[M]` acyclic, let `X'_0, X'_1, ...` be the canonical
//! sequence of `T[M]`. Every vertex `v` of an M-consistent tournament is then
//! exactly one of: M-equivalent to the vertices of some `X'_i`, conflicting
//! with some `X'_i` (it has both an in- and an out-neighbor there and nothing
//! pointing the wrong way elsewhere), or universal (it can be placed first or
//! last in a topological sort of `T[M + v]`). The M-sequence groups vertices
//! into blocks `(X_i, Y_i)` by that classification.
//!
//! Block indices are 0-based throughout.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteTournament, Edge, Side, VertexId, VertexSet};
use crate::structure::{self, CanonicalSequence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MSequenceError {
    #[error("M is empty")]
    EmptyM,
    #[error("T[M] is cyclic")]
    CyclicCore,
    #[error("not M-consistent: T[M + {0}] is cyclic")]
    NotMConsistent(VertexId),
    #[error("vertex {0} is not in the tournament")]
    InvalidVertex(VertexId),
    #[error("M is not contained in the vertex universe")]
    MOutsideUniverse,
    #[error("vertex {0} fits no classification")]
    Unclassifiable(VertexId),
    #[error("block index {index} out of range ({blocks} blocks)")]
    BlockIndexOutOfRange { index: usize, blocks: usize },
    #[error("vertex {0} missing from the ordering")]
    MissingFromOrder(VertexId),
    #[error("partitions are over different ground sets")]
    GroundSetMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Classification {
    Equivalent(usize),
    Conflicting(usize),
    UniversalMinus,
    UniversalPlus,
}

/// Outcome of an M-consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Consistency {
    Consistent,
    /// `T[M]` itself has a cycle.
    CyclicCore,
    /// `T[M + v]` has a cycle.
    Violator(VertexId),
}

impl Consistency {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Consistency::Consistent)
    }
}

/// Checks `T[M]` and every `T[M + v]` for acyclicity.
pub fn is_m_consistent(t: &BipartiteTournament, m: &VertexSet) -> Consistency {
    let mut mask = t.mask(m);
    if !structure::is_acyclic_mask(t, &mask) {
        return Consistency::CyclicCore;
    }
    for v in t.vertices() {
        let d = t.dense(v);
        if mask[d] {
            continue;
        }
        mask[d] = true;
        let ok = structure::is_acyclic_mask(t, &mask);
        mask[d] = false;
        if !ok {
            return Consistency::Violator(v);
        }
    }
    Consistency::Consistent
}

/// The canonical sequence of `T[M]` with per-vertex lookups.
pub(crate) struct MContext<'a> {
    t: &'a BipartiteTournament,
    m: VertexSet,
    core: CanonicalSequence,
    // dense index -> canonical set of T[M], for M vertices
    set_of: Vec<Option<usize>>,
    m_dense: Vec<usize>,
}

/// Index span of a vertex's M-neighbors in the canonical sequence of `T[M]`.
#[derive(Debug, Clone, Copy, Default)]
struct Span {
    min_out: Option<usize>,
    max_in: Option<usize>,
}

impl<'a> MContext<'a> {
    pub fn new(t: &'a BipartiteTournament, m: &VertexSet) -> Result<Self, MSequenceError> {
        if m.is_empty() {
            return Err(MSequenceError::EmptyM);
        }
        if let Some(&v) = m.iter().find(|&&v| !t.contains(v)) {
            return Err(MSequenceError::InvalidVertex(v));
        }
        let core =
            structure::canonical_sequence_within(t, m).map_err(|_| MSequenceError::CyclicCore)?;
        let mut set_of = vec![None; t.len()];
        for (i, s) in core.sets.iter().enumerate() {
            for &v in s {
                set_of[t.dense(v)] = Some(i);
            }
        }
        Ok(MContext {
            t,
            m: m.clone(),
            m_dense: m.iter().map(|&v| t.dense(v)).collect(),
            core,
            set_of,
        })
    }

    pub fn blocks(&self) -> usize {
        self.core.len()
    }

    fn span(&self, v: VertexId) -> Span {
        let mut s = Span::default();
        for &d in &self.m_dense {
            let w = self.t.vertex(d);
            if w.side == v.side {
                continue;
            }
            let i = self.set_of[d].expect("M vertex has a canonical set");
            if self.t.has_arc(v, w) {
                s.min_out = Some(s.min_out.map_or(i, |x| x.min(i)));
            } else {
                s.max_in = Some(s.max_in.map_or(i, |x| x.max(i)));
            }
        }
        s
    }

    /// `T[M + v]` is acyclic iff no out-neighbor of `v` in M sits strictly
    /// before one of its in-neighbors.
    pub fn consistent_with(&self, v: VertexId) -> bool {
        let s = self.span(v);
        match (s.min_out, s.max_in) {
            (Some(o), Some(i)) => o >= i,
            _ => true,
        }
    }

    fn equivalent_to(&self, v: VertexId, u: VertexId) -> bool {
        self.m_dense.iter().all(|&d| {
            let w = self.t.vertex(d);
            self.t.arc(v, w) == self.t.arc(u, w)
        })
    }

    pub fn classify(&self, v: VertexId) -> Result<Classification, MSequenceError> {
        if let Some(i) = self.set_of[self.t.dense(v)] {
            return Ok(Classification::Equivalent(i));
        }
        if !self.consistent_with(v) {
            return Err(MSequenceError::NotMConsistent(v));
        }
        for (i, set) in self.core.sets.iter().enumerate() {
            let rep = *set.iter().next().expect("canonical sets are nonempty");
            if self.equivalent_to(v, rep) {
                return Ok(Classification::Equivalent(i));
            }
        }
        let s = self.span(v);
        match (s.min_out, s.max_in) {
            (Some(o), Some(i)) if o == i => Ok(Classification::Conflicting(i)),
            (_, None) => Ok(Classification::UniversalMinus),
            (None, Some(_)) => Ok(Classification::UniversalPlus),
            _ => Err(MSequenceError::Unclassifiable(v)),
        }
    }

    pub fn m(&self) -> &VertexSet {
        &self.m
    }
}

/// Classifies `v` relative to `M`.
///
/// Only `T[M]` and `T[M + v]` are checked for acyclicity here; callers that
/// need the whole tournament to be M-consistent should use [`m_sequence`].
pub fn classify(
    t: &BipartiteTournament,
    m: &VertexSet,
    v: VertexId,
) -> Result<Classification, MSequenceError> {
    if !t.contains(v) {
        return Err(MSequenceError::InvalidVertex(v));
    }
    MContext::new(t, m)?.classify(v)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Block {
    pub x: VertexSet,
    pub y: VertexSet,
}

impl Block {
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.x.iter().chain(self.y.iter()).copied()
    }

    pub fn len(&self) -> usize {
        self.x.len() + self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// The blocks `(X_0, Y_0), ..., (X_{l-1}, Y_{l-1})` of an M-consistent tournament.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MSequence {
    pub m: VertexSet,
    pub blocks: Vec<Block>,
    block_of: BTreeMap<VertexId, usize>,
}

impl MSequence {
    fn from_blocks(m: VertexSet, blocks: Vec<Block>) -> Self {
        let block_of = blocks
            .iter()
            .enumerate()
            .flat_map(|(i, b)| b.vertices().map(move |v| (v, i)))
            .collect();
        MSequence {
            m,
            blocks,
            block_of,
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_of(&self, v: VertexId) -> Option<usize> {
        self.block_of.get(&v).copied()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.block_of.contains_key(&v)
    }

    pub fn vertex_count(&self) -> usize {
        self.block_of.len()
    }

    /// `X_0, Y_0, X_1, Y_1, ...` as an ordered partition.
    pub fn flatten(&self) -> Vec<VertexSet> {
        self.blocks
            .iter()
            .flat_map(|b| [b.x.clone(), b.y.clone()])
            .collect()
    }

    fn check_index(&self, i: usize) -> Result<(), MSequenceError> {
        if i < self.blocks.len() {
            Ok(())
        } else {
            Err(MSequenceError::BlockIndexOutOfRange {
                index: i,
                blocks: self.blocks.len(),
            })
        }
    }
}

/// M-sequence of `T[within]`; `M` must lie inside `within`.
pub fn m_sequence_within(
    t: &BipartiteTournament,
    m: &VertexSet,
    within: &VertexSet,
) -> Result<MSequence, MSequenceError> {
    if !m.is_subset(within) {
        return Err(MSequenceError::MOutsideUniverse);
    }
    let ctx = MContext::new(t, m)?;
    build_sequence(&ctx, within.iter().copied())
}

pub(crate) fn build_sequence(
    ctx: &MContext<'_>,
    universe: impl Iterator<Item = VertexId>,
) -> Result<MSequence, MSequenceError> {
    let l = ctx.blocks();
    let mut blocks = vec![Block::default(); l];
    for v in universe {
        match ctx.classify(v)? {
            Classification::Equivalent(i) => blocks[i].x.insert(v),
            Classification::Conflicting(i) => blocks[i].y.insert(v),
            Classification::UniversalMinus => blocks[0].y.insert(v),
            Classification::UniversalPlus => blocks[l - 1].y.insert(v),
        };
    }
    Ok(MSequence::from_blocks(ctx.m().clone(), blocks))
}

/// The unique M-sequence of an M-consistent tournament.
pub fn m_sequence(t: &BipartiteTournament, m: &VertexSet) -> Result<MSequence, MSequenceError> {
    m_sequence_within(t, m, &t.vertex_set())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum BackEdgeKind {
    Short,
    Long,
}

/// An arc from block `from_block` to the strictly earlier block `to_block`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BackEdge {
    pub from: VertexId,
    pub to: VertexId,
    pub from_block: usize,
    pub to_block: usize,
    pub kind: BackEdgeKind,
}

impl BackEdge {
    pub fn edge(&self) -> Edge {
        Edge::new(self.from, self.to)
    }
}

/// Every arc of `T[seq]` pointing to a strictly lower block.
pub fn back_edges(t: &BipartiteTournament, seq: &MSequence) -> Vec<BackEdge> {
    let mut out = Vec::new();
    for e in t.arcs() {
        let (Some(i), Some(j)) = (seq.block_of(e.from), seq.block_of(e.to)) else {
            continue;
        };
        if i > j {
            out.push(BackEdge {
                from: e.from,
                to: e.to,
                from_block: i,
                to_block: j,
                kind: if i - j == 1 {
                    BackEdgeKind::Short
                } else {
                    BackEdgeKind::Long
                },
            });
        }
    }
    out.sort();
    out
}

/// `true` iff `u -> v` closes a square `u -> v -> m1 -> m2 -> u` with `m1, m2` in `M`.
pub fn is_conflict_edge(t: &BipartiteTournament, m: &VertexSet, e: Edge) -> bool {
    m.iter().any(|&m1| {
        t.has_arc(e.to, m1)
            && m.iter()
                .any(|&m2| t.has_arc(m1, m2) && t.has_arc(m2, e.from))
    })
}

pub fn is_conflict_back_edge(t: &BipartiteTournament, m: &VertexSet, e: &BackEdge) -> bool {
    is_conflict_edge(t, m, e.edge())
}

/// Left and right boundaries of block `i` under the ordering `order`:
/// the vertices of `X_i` before the first, resp. after the last, M-vertex of `X_i`.
pub fn boundaries(
    seq: &MSequence,
    order: &[VertexId],
    i: usize,
) -> Result<(VertexSet, VertexSet), MSequenceError> {
    seq.check_index(i)?;
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    let x = &seq.blocks[i].x;
    let mut positions = Vec::with_capacity(x.len());
    for &v in x {
        let p = *pos.get(&v).ok_or(MSequenceError::MissingFromOrder(v))?;
        positions.push((p, v));
    }
    let m_positions: Vec<usize> = positions
        .iter()
        .filter(|(_, v)| seq.m.contains(v))
        .map(|&(p, _)| p)
        .collect();
    let (Some(&first), Some(&last)) = (m_positions.iter().min(), m_positions.iter().max()) else {
        // every X_i holds a vertex of M; an empty intersection means the whole block is boundary
        return Ok((x.clone(), x.clone()));
    };
    let left = positions
        .iter()
        .filter(|&&(p, _)| p < first)
        .map(|&(_, v)| v)
        .collect();
    let right = positions
        .iter()
        .filter(|&&(p, _)| p > last)
        .map(|&(_, v)| v)
        .collect();
    Ok((left, right))
}

/// Boundaries of block `i`, right boundary of block `i - 1`, `Y_i` and the
/// left boundary of block `i + 1`. Missing neighbor blocks contribute nothing.
pub fn vicinity(
    seq: &MSequence,
    order: &[VertexId],
    i: usize,
) -> Result<VertexSet, MSequenceError> {
    let (left, right) = boundaries(seq, order, i)?;
    let mut out: VertexSet = left.union(&right).copied().collect();
    out.extend(seq.blocks[i].y.iter().copied());
    if i > 0 {
        out.extend(boundaries(seq, order, i - 1)?.1);
    }
    if i + 1 < seq.len() {
        out.extend(boundaries(seq, order, i + 1)?.0);
    }
    Ok(out)
}

/// `true` iff every set of `fine` lies inside some set of `coarse`.
pub fn is_refinement(fine: &[VertexSet], coarse: &[VertexSet]) -> Result<bool, MSequenceError> {
    let ground = |p: &[VertexSet]| p.iter().flatten().copied().collect::<VertexSet>();
    if ground(fine) != ground(coarse) {
        return Err(MSequenceError::GroundSetMismatch);
    }
    Ok(fine
        .iter()
        .filter(|s| !s.is_empty())
        .all(|s| coarse.iter().any(|c| s.is_subset(c))))
}

/// Sides of `X_i` and `Y_i` alternate: `X_i` is on the side of `X'_i`.
pub fn block_sides(seq: &MSequence, i: usize) -> Option<(Side, Side)> {
    let x = seq.blocks.get(i)?.x.iter().next()?;
    Some((x.side, x.side.opposite()))
}
