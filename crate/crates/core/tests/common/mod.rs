//! Reference checks written straight from the definitions. Nothing here
//! calls into the solver, structure or M-sequence code under test.
#![allow(dead_code)]

use std::collections::BTreeSet;

use btfvs::graph::{BipartiteTournament, Edge, PartVertex, Side, VertexId, VertexSet};
use itertools::Itertools;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_tournament(rng: &mut ChaCha8Rng, m: usize, n: usize) -> BipartiteTournament {
    let rows = (0..m)
        .map(|_| (0..n).map(|_| rng.gen()).collect())
        .collect();
    BipartiteTournament::new(m, n, rows).unwrap()
}

pub fn all_vertices(t: &BipartiteTournament) -> Vec<VertexId> {
    (0..t.m())
        .map(VertexId::a)
        .chain((0..t.n()).map(VertexId::b))
        .collect()
}

/// `u -> v`, read off the orientation matrix.
pub fn arc(t: &BipartiteTournament, u: VertexId, v: VertexId) -> bool {
    match (u.side, v.side) {
        (Side::A, Side::B) => t.a_beats_b(u.index, v.index),
        (Side::B, Side::A) => !t.a_beats_b(v.index, u.index),
        _ => false,
    }
}

/// Three-colour DFS for a directed cycle inside `keep`.
pub fn acyclic_on(t: &BipartiteTournament, keep: &VertexSet) -> bool {
    let vs: Vec<VertexId> = keep.iter().copied().collect();
    let mut colour = vec![0u8; vs.len()];
    for root in 0..vs.len() {
        if colour[root] != 0 {
            continue;
        }
        let mut stack = vec![(root, 0usize)];
        colour[root] = 1;
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next == vs.len() {
                colour[u] = 2;
                stack.pop();
                continue;
            }
            let w = *next;
            *next += 1;
            if !arc(t, vs[u], vs[w]) {
                continue;
            }
            match colour[w] {
                1 => return false,
                0 => {
                    colour[w] = 1;
                    stack.push((w, 0));
                }
                _ => {}
            }
        }
    }
    true
}

pub fn acyclic(t: &BipartiteTournament) -> bool {
    acyclic_on(t, &all_vertices(t).into_iter().collect())
}

pub fn has_square(t: &BipartiteTournament) -> bool {
    for (a1, a2) in (0..t.m()).tuple_combinations() {
        for (b1, b2) in (0..t.n()).tuple_combinations() {
            let f = |i, j| t.a_beats_b(i, j);
            if (f(a1, b1) && !f(a2, b1) && f(a2, b2) && !f(a1, b2))
                || (f(a1, b2) && !f(a2, b2) && f(a2, b1) && !f(a1, b1))
            {
                return true;
            }
        }
    }
    false
}

/// Repeatedly strips the vertices with no in-neighbour left.
pub fn peel(t: &BipartiteTournament, keep: &VertexSet) -> Option<Vec<VertexSet>> {
    let mut left = keep.clone();
    let mut layers = Vec::new();
    while !left.is_empty() {
        let layer: VertexSet = left
            .iter()
            .filter(|&&v| !left.iter().any(|&u| arc(t, u, v)))
            .copied()
            .collect();
        if layer.is_empty() {
            return None;
        }
        left.retain(|v| !layer.contains(v));
        layers.push(layer);
    }
    Some(layers)
}

pub fn minus(from: &VertexSet, drop: &VertexSet) -> VertexSet {
    from.difference(drop).copied().collect()
}

/// FVS avoiding `forbidden`, containing `required` and hitting every `cover` edge.
pub fn is_solution(
    t: &BipartiteTournament,
    h: &VertexSet,
    forbidden: &VertexSet,
    required: &VertexSet,
    cover: &BTreeSet<Edge>,
) -> bool {
    h.is_disjoint(forbidden)
        && required.is_subset(h)
        && cover
            .iter()
            .all(|e| h.contains(&e.from) || h.contains(&e.to))
        && acyclic_on(t, &minus(&all_vertices(t).into_iter().collect(), h))
}

/// All constrained solutions of size at most `budget`.
pub fn all_solutions(
    t: &BipartiteTournament,
    forbidden: &VertexSet,
    required: &VertexSet,
    cover: &BTreeSet<Edge>,
    budget: usize,
) -> Vec<VertexSet> {
    let free: Vec<VertexId> = all_vertices(t)
        .into_iter()
        .filter(|v| !forbidden.contains(v) && !required.contains(v))
        .collect();
    let mut out = Vec::new();
    for size in 0..=budget.saturating_sub(required.len()).min(free.len()) {
        if required.len() > budget {
            break;
        }
        for pick in free.iter().combinations(size) {
            let mut h = required.clone();
            h.extend(pick.into_iter().copied());
            if is_solution(t, &h, forbidden, required, cover) {
                out.push(h);
            }
        }
    }
    out
}

/// Least size of a constrained solution, by increasing size.
pub fn min_solution(
    t: &BipartiteTournament,
    forbidden: &VertexSet,
    required: &VertexSet,
    cover: &BTreeSet<Edge>,
) -> Option<usize> {
    let free: Vec<VertexId> = all_vertices(t)
        .into_iter()
        .filter(|v| !forbidden.contains(v) && !required.contains(v))
        .collect();
    for size in 0..=free.len() {
        for pick in free.iter().combinations(size) {
            let mut h = required.clone();
            h.extend(pick.into_iter().copied());
            if is_solution(t, &h, forbidden, required, cover) {
                return Some(h.len());
            }
        }
    }
    None
}

pub fn min_fvs(t: &BipartiteTournament) -> usize {
    let none = VertexSet::new();
    min_solution(t, &none, &none, &BTreeSet::new()).expect("deleting everything works")
}

fn neighbourhoods(t: &BipartiteTournament, v: VertexId, m: &VertexSet) -> (VertexSet, VertexSet) {
    let out = m.iter().filter(|&&w| arc(t, v, w)).copied().collect();
    let inn = m.iter().filter(|&&w| arc(t, w, v)).copied().collect();
    (out, inn)
}

/// Every relation `v` has to the canonical sequence of `T[M]`, each one
/// checked by its own definition. A well-behaved vertex has exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Equivalent(usize),
    Conflicting(usize),
    UniversalMinus,
    UniversalPlus,
}

pub fn relations(
    t: &BipartiteTournament,
    m: &VertexSet,
    layers: &[VertexSet],
    v: VertexId,
) -> Vec<Relation> {
    let mut found = Vec::new();
    let nv = neighbourhoods(t, v, m);
    for (i, x) in layers.iter().enumerate() {
        if x.iter().any(|&u| neighbourhoods(t, u, m) == nv) {
            found.push(Relation::Equivalent(i));
        }
    }
    for (i, x) in layers.iter().enumerate() {
        let out_here = x.iter().any(|&u| arc(t, v, u));
        let in_here = x.iter().any(|&u| arc(t, u, v));
        let none_out_before = layers[..i].iter().flatten().all(|&u| !arc(t, v, u));
        let none_in_after = layers[i + 1..].iter().flatten().all(|&u| !arc(t, u, v));
        if out_here && in_here && none_out_before && none_in_after {
            found.push(Relation::Conflicting(i));
        }
    }
    let equivalent = found.iter().any(|r| matches!(r, Relation::Equivalent(_)));
    let mut with_v = m.clone();
    with_v.insert(v);
    if !equivalent && acyclic_on(t, &with_v) {
        if nv.1.is_empty() {
            found.push(Relation::UniversalMinus);
        }
        if nv.0.is_empty() {
            found.push(Relation::UniversalPlus);
        }
    }
    found
}

/// `T[M + v]` is acyclic for every `v` in `within`.
pub fn m_consistent(t: &BipartiteTournament, m: &VertexSet, within: &VertexSet) -> bool {
    within.iter().all(|&v| {
        let mut s = m.clone();
        s.insert(v);
        acyclic_on(t, &s)
    })
}

/// Blocks `(X_i, Y_i)` of the M-sequence of `T[within]`, or `None` if some
/// vertex does not have exactly one relation.
pub fn m_sequence(
    t: &BipartiteTournament,
    m: &VertexSet,
    within: &VertexSet,
) -> Option<Vec<(VertexSet, VertexSet)>> {
    let layers = peel(t, m)?;
    let last = layers.len() - 1;
    let mut blocks = vec![(VertexSet::new(), VertexSet::new()); layers.len()];
    for &v in within {
        match relations(t, m, &layers, v)[..] {
            [Relation::Equivalent(i)] => blocks[i].0.insert(v),
            [Relation::Conflicting(i)] => blocks[i].1.insert(v),
            [Relation::UniversalMinus] => blocks[0].1.insert(v),
            [Relation::UniversalPlus] => blocks[last].1.insert(v),
            _ => return None,
        };
    }
    Some(blocks)
}

/// A mixed multigraph instance as plain data.
pub struct Dfvc<'a> {
    pub parts: &'a [BipartiteTournament],
    pub undirected: &'a [(PartVertex, PartVertex)],
    pub forbidden: &'a BTreeSet<PartVertex>,
    pub internal_cover: &'a BTreeSet<(usize, Edge)>,
}

impl Dfvc<'_> {
    fn candidates(&self) -> Vec<PartVertex> {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, t)| {
                all_vertices(t)
                    .into_iter()
                    .map(move |v| PartVertex::new(i, v))
            })
            .filter(|v| !self.forbidden.contains(v))
            .collect()
    }

    /// Hits every undirected and internal-cover edge and leaves every part acyclic.
    pub fn accepts(&self, s: &BTreeSet<PartVertex>) -> bool {
        let hit = |u: PartVertex, v: PartVertex| s.contains(&u) || s.contains(&v);
        s.is_disjoint(self.forbidden)
            && self.undirected.iter().all(|&(u, v)| hit(u, v))
            && self
                .internal_cover
                .iter()
                .all(|&(p, e)| hit(PartVertex::new(p, e.from), PartVertex::new(p, e.to)))
            && self.parts.iter().enumerate().all(|(i, t)| {
                let keep = all_vertices(t)
                    .into_iter()
                    .filter(|&v| !s.contains(&PartVertex::new(i, v)))
                    .collect();
                acyclic_on(t, &keep)
            })
    }

    pub fn solutions(&self, budget: usize) -> Vec<BTreeSet<PartVertex>> {
        let all = self.candidates();
        (0..=budget.min(all.len()))
            .flat_map(|size| all.iter().copied().combinations(size))
            .map(|pick| pick.into_iter().collect())
            .filter(|s| self.accepts(s))
            .collect()
    }

    pub fn min(&self) -> Option<usize> {
        let all = self.candidates();
        (0..=all.len()).find(|&size| {
            all.iter()
                .copied()
                .combinations(size)
                .any(|pick| self.accepts(&pick.into_iter().collect()))
        })
    }
}

pub fn fib(i: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..i {
        (a, b) = (b, a + b);
    }
    a
}
