//! Squares, acyclicity and the canonical sequence of acyclic bipartite tournaments.
//!
//! A bipartite tournament is acyclic exactly when it has no directed 4-cycle.
//! [`find_square`] searches for such a cycle directly while [`is_acyclic`]
//! peels in-degree-zero vertices; the two are kept independent so that the
//! equivalence can be tested rather than assumed.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::bits::Bits;
use crate::graph::{BipartiteTournament, Side, VertexId, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("tournament is not acyclic")]
    NotAcyclic,
}

/// A directed square `a -> b -> a2 -> b2 -> a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Square {
    pub a: VertexId,
    pub b: VertexId,
    pub a2: VertexId,
    pub b2: VertexId,
}

impl Square {
    pub fn vertices(&self) -> [VertexId; 4] {
        [self.a, self.b, self.a2, self.b2]
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.vertices().contains(&v)
    }
}

/// Alive vertices split by side, for masked searches.
#[derive(Debug, Clone)]
pub(crate) struct Alive {
    pub a: Bits,
    pub b: Bits,
}

impl Alive {
    pub fn all(t: &BipartiteTournament) -> Self {
        Alive {
            a: Bits::full(t.m()),
            b: Bits::full(t.n()),
        }
    }

    pub fn from_mask(t: &BipartiteTournament, alive: &[bool]) -> Self {
        Alive {
            a: Bits::from_bools(&alive[..t.m()]),
            b: Bits::from_bools(&alive[t.m()..]),
        }
    }

    pub fn from_set(t: &BipartiteTournament, set: &VertexSet) -> Self {
        Self::from_mask(t, &t.mask(set))
    }

    pub fn contains(&self, v: VertexId) -> bool {
        match v.side {
            Side::A => self.a.get(v.index),
            Side::B => self.b.get(v.index),
        }
    }

    pub fn kill(&mut self, v: VertexId) {
        match v.side {
            Side::A => self.a.clear(v.index),
            Side::B => self.b.clear(v.index),
        }
    }

    pub fn revive(&mut self, v: VertexId) {
        match v.side {
            Side::A => self.a.set(v.index),
            Side::B => self.b.set(v.index),
        }
    }

    pub fn to_set(&self) -> VertexSet {
        self.a
            .iter_ones()
            .map(VertexId::a)
            .chain(self.b.iter_ones().map(VertexId::b))
            .collect()
    }
}

/// First square among alive vertices in lexicographic `(a, b, a2, b2)` order.
pub(crate) fn first_square(t: &BipartiteTournament, alive: &Alive) -> Option<Square> {
    for a in alive.a.iter_ones() {
        for b in t.a_out(a).iter_common(&alive.b) {
            for a2 in t.b_out(b).iter_common(&alive.a) {
                if let Some(b2) = t.a_out(a2).first_common3(t.a_in(a), &alive.b) {
                    return Some(Square {
                        a: VertexId::a(a),
                        b: VertexId::b(b),
                        a2: VertexId::a(a2),
                        b2: VertexId::b(b2),
                    });
                }
            }
        }
    }
    None
}

/// Calls `visit` on every square `(a, b, a2, b2)` among alive vertices, in
/// lexicographic order, until it returns `false`. Each directed 4-cycle is
/// visited twice, once from each of its `A` vertices.
pub(crate) fn for_each_square(
    t: &BipartiteTournament,
    alive: &Alive,
    mut visit: impl FnMut(Square) -> bool,
) {
    for a in alive.a.iter_ones() {
        for b in t.a_out(a).iter_common(&alive.b) {
            for a2 in t.b_out(b).iter_common(&alive.a) {
                for b2 in t.a_out(a2).iter_common(t.a_in(a)) {
                    if !alive.b.get(b2) {
                        continue;
                    }
                    let sq = Square {
                        a: VertexId::a(a),
                        b: VertexId::b(b),
                        a2: VertexId::a(a2),
                        b2: VertexId::b(b2),
                    };
                    if !visit(sq) {
                        return;
                    }
                }
            }
        }
    }
}

/// Some square of `t`, restricted to `within` when given.
pub fn find_square(t: &BipartiteTournament, within: Option<&VertexSet>) -> Option<Square> {
    let alive = match within {
        Some(w) => Alive::from_set(t, w),
        None => Alive::all(t),
    };
    first_square(t, &alive)
}

/// Number of distinct directed squares.
pub fn count_squares(t: &BipartiteTournament) -> usize {
    let mut tuples = 0usize;
    for_each_square(t, &Alive::all(t), |_| {
        tuples += 1;
        true
    });
    tuples / 2
}

/// Peels in-degree-zero vertices among `alive`; returns the layers as dense indices.
/// The second value is `false` when some alive vertices could not be peeled.
fn peel_layers(t: &BipartiteTournament, alive: &[bool]) -> (Vec<Vec<usize>>, bool) {
    let total = alive.iter().filter(|&&x| x).count();
    let mut indeg = vec![0usize; t.len()];
    for i in 0..t.m() {
        for j in 0..t.n() {
            let (da, db) = (i, t.m() + j);
            if alive[da] && alive[db] {
                if t.a_beats_b(i, j) {
                    indeg[db] += 1;
                } else {
                    indeg[da] += 1;
                }
            }
        }
    }
    let mut layer: Vec<usize> = (0..t.len())
        .filter(|&d| alive[d] && indeg[d] == 0)
        .collect();
    let mut layers = Vec::new();
    let mut peeled = 0;
    while !layer.is_empty() {
        peeled += layer.len();
        let mut next = Vec::new();
        for &d in &layer {
            let v = t.vertex(d);
            for u in 0..(if v.side == Side::A { t.n() } else { t.m() }) {
                let w = match v.side {
                    Side::A => VertexId::b(u),
                    Side::B => VertexId::a(u),
                };
                let dw = t.dense(w);
                if alive[dw] && t.has_arc(v, w) {
                    indeg[dw] -= 1;
                    if indeg[dw] == 0 {
                        next.push(dw);
                    }
                }
            }
        }
        next.sort_unstable();
        layers.push(std::mem::replace(&mut layer, next));
    }
    (layers, peeled == total)
}

/// Kahn-style acyclicity test over the alive vertices.
pub(crate) fn is_acyclic_mask(t: &BipartiteTournament, alive: &[bool]) -> bool {
    let mut indeg = vec![0usize; t.len()];
    for i in 0..t.m() {
        for j in 0..t.n() {
            let (da, db) = (i, t.m() + j);
            if alive[da] && alive[db] {
                if t.a_beats_b(i, j) {
                    indeg[db] += 1;
                } else {
                    indeg[da] += 1;
                }
            }
        }
    }
    let mut queue: VecDeque<usize> = (0..t.len())
        .filter(|&d| alive[d] && indeg[d] == 0)
        .collect();
    let mut seen = 0;
    while let Some(d) = queue.pop_front() {
        seen += 1;
        let v = t.vertex(d);
        let others = match v.side {
            Side::A => t.m()..t.len(),
            Side::B => 0..t.m(),
        };
        for dw in others {
            if alive[dw] && t.has_arc(v, t.vertex(dw)) {
                indeg[dw] -= 1;
                if indeg[dw] == 0 {
                    queue.push_back(dw);
                }
            }
        }
    }
    seen == alive.iter().filter(|&&x| x).count()
}

/// `true` iff `t` has no directed cycle.
pub fn is_acyclic(t: &BipartiteTournament) -> bool {
    is_acyclic_mask(t, &vec![true; t.len()])
}

/// `true` iff `t[within]` has no directed cycle.
pub fn is_acyclic_within(t: &BipartiteTournament, within: &VertexSet) -> bool {
    is_acyclic_mask(t, &t.mask(within))
}

/// The peeling of an acyclic tournament into successive source layers.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalSequence {
    pub sets: Vec<VertexSet>,
}

impl CanonicalSequence {
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Position of the set containing `v`.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.sets.iter().position(|s| s.contains(&v))
    }

    /// Concatenation of the sets, each in ascending order.
    pub fn flatten(&self) -> Vec<VertexId> {
        self.sets.iter().flat_map(|s| s.iter().copied()).collect()
    }
}

pub(crate) fn canonical_sequence_mask(
    t: &BipartiteTournament,
    alive: &[bool],
) -> Result<CanonicalSequence, StructureError> {
    let (layers, complete) = peel_layers(t, alive);
    if !complete {
        return Err(StructureError::NotAcyclic);
    }
    Ok(CanonicalSequence {
        sets: layers
            .into_iter()
            .map(|l| l.into_iter().map(|d| t.vertex(d)).collect())
            .collect(),
    })
}

/// The canonical sequence of an acyclic tournament.
pub fn canonical_sequence(t: &BipartiteTournament) -> Result<CanonicalSequence, StructureError> {
    canonical_sequence_mask(t, &vec![true; t.len()])
}

/// The canonical sequence of `t[within]`, in host vertex ids.
pub fn canonical_sequence_within(
    t: &BipartiteTournament,
    within: &VertexSet,
) -> Result<CanonicalSequence, StructureError> {
    canonical_sequence_mask(t, &t.mask(within))
}

/// `true` iff `order` is a permutation of `V(t)` with every arc pointing forward.
pub fn is_topological(t: &BipartiteTournament, order: &[VertexId]) -> bool {
    if order.len() != t.len() {
        return false;
    }
    let mut pos = vec![usize::MAX; t.len()];
    for (p, &v) in order.iter().enumerate() {
        if !t.contains(v) || pos[t.dense(v)] != usize::MAX {
            return false;
        }
        pos[t.dense(v)] = p;
    }
    t.arcs().all(|e| pos[t.dense(e.from)] < pos[t.dense(e.to)])
}

/// Flattened canonical sequence: a deterministic topological sort.
pub fn some_topological_sort(t: &BipartiteTournament) -> Result<Vec<VertexId>, StructureError> {
    Ok(canonical_sequence(t)?.flatten())
}
