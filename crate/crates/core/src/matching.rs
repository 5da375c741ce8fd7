//! Matchings and vertex covers of edge sets of a bipartite tournament.
//!
//! Every arc joins side `A` to side `B`, so any edge set is a bipartite graph
//! with those sides; arc direction is ignored here.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::graph::{BipartiteTournament, Edge, Side, VertexId, VertexSet};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("more than {cap} minimum vertex covers")]
pub struct TooManyCovers {
    pub cap: usize,
}

fn endpoints(e: &Edge) -> (VertexId, VertexId) {
    if e.from.side == Side::A {
        (e.from, e.to)
    } else {
        (e.to, e.from)
    }
}

/// A maximum matching, by augmenting paths from each `A` vertex in order.
pub fn max_bipartite_matching(edges: &[Edge]) -> Vec<Edge> {
    let mut adj: BTreeMap<VertexId, Vec<(VertexId, Edge)>> = BTreeMap::new();
    for e in edges {
        let (a, b) = endpoints(e);
        adj.entry(a).or_default().push((b, *e));
    }
    let mut mate_of_b: BTreeMap<VertexId, (VertexId, Edge)> = BTreeMap::new();

    fn augment(
        a: VertexId,
        adj: &BTreeMap<VertexId, Vec<(VertexId, Edge)>>,
        mate_of_b: &mut BTreeMap<VertexId, (VertexId, Edge)>,
        seen: &mut BTreeSet<VertexId>,
    ) -> bool {
        for &(b, e) in adj.get(&a).map(Vec::as_slice).unwrap_or_default() {
            if !seen.insert(b) {
                continue;
            }
            let free = match mate_of_b.get(&b) {
                None => true,
                Some(&(a2, _)) => augment(a2, adj, mate_of_b, seen),
            };
            if free {
                mate_of_b.insert(b, (a, e));
                return true;
            }
        }
        false
    }

    for &a in adj.keys() {
        augment(a, &adj, &mut mate_of_b, &mut BTreeSet::new());
    }
    let mut out: Vec<Edge> = mate_of_b.values().map(|&(_, e)| e).collect();
    out.sort();
    out
}

/// A minimum vertex cover from a maximum matching (König): `A` vertices not
/// reachable from unmatched `A` vertices by alternating paths, plus the `B`
/// vertices that are reachable.
pub fn min_vertex_cover(edges: &[Edge]) -> VertexSet {
    let matching = max_bipartite_matching(edges);
    let mut mate: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    for e in &matching {
        mate.insert(e.from, e.to);
        mate.insert(e.to, e.from);
    }
    let mut adj: BTreeMap<VertexId, Vec<VertexId>> = BTreeMap::new();
    for e in edges {
        let (a, b) = endpoints(e);
        adj.entry(a).or_default().push(b);
    }
    let mut reached = VertexSet::new();
    let mut stack: Vec<VertexId> = adj
        .keys()
        .filter(|a| !mate.contains_key(a))
        .copied()
        .collect();
    reached.extend(stack.iter().copied());
    while let Some(a) = stack.pop() {
        for &b in adj.get(&a).map(Vec::as_slice).unwrap_or_default() {
            if reached.insert(b) {
                if let Some(&a2) = mate.get(&b) {
                    if reached.insert(a2) {
                        stack.push(a2);
                    }
                }
            }
        }
    }
    adj.keys()
        .filter(|a| !reached.contains(a))
        .copied()
        .chain(reached.iter().filter(|v| v.side == Side::B).copied())
        .collect()
}

/// `true` iff no two edges share an endpoint.
pub fn is_matching(edges: &[Edge]) -> bool {
    let mut seen = VertexSet::new();
    edges
        .iter()
        .all(|e| seen.insert(e.from) && seen.insert(e.to))
}

/// Every minimum vertex cover of `edges` that avoids `undeletable`, or
/// `Ok(vec![])` when no cover avoids it.
///
/// Edges with an undeletable endpoint force the other endpoint. The rest is
/// enumerated by branching on a vertex `u`: either `u` is in the cover, or all
/// of its neighbors are. Branches are pruned with the matching lower bound.
pub fn enumerate_min_vertex_covers(
    edges: &[Edge],
    undeletable: &VertexSet,
    cap: usize,
) -> Result<Vec<VertexSet>, TooManyCovers> {
    let mut forced = VertexSet::new();
    for e in edges {
        match (undeletable.contains(&e.from), undeletable.contains(&e.to)) {
            (true, true) => return Ok(Vec::new()),
            (true, false) => {
                forced.insert(e.to);
            }
            (false, true) => {
                forced.insert(e.from);
            }
            (false, false) => {}
        }
    }
    let rest: Vec<Edge> = edges
        .iter()
        .filter(|e| !forced.contains(&e.from) && !forced.contains(&e.to))
        .copied()
        .collect();
    let target = max_bipartite_matching(&rest).len();
    let mut out = Vec::new();
    let mut chosen = VertexSet::new();
    branch_covers(&rest, &mut chosen, target, cap, &mut out)?;
    for c in &mut out {
        c.extend(forced.iter().copied());
    }
    out.sort();
    Ok(out)
}

fn branch_covers(
    edges: &[Edge],
    chosen: &mut VertexSet,
    target: usize,
    cap: usize,
    out: &mut Vec<VertexSet>,
) -> Result<(), TooManyCovers> {
    let open: Vec<Edge> = edges
        .iter()
        .filter(|e| !chosen.contains(&e.from) && !chosen.contains(&e.to))
        .copied()
        .collect();
    if chosen.len() + max_bipartite_matching(&open).len() > target {
        return Ok(());
    }
    let Some(first) = open.first() else {
        if out.len() == cap {
            return Err(TooManyCovers { cap });
        }
        out.push(chosen.clone());
        return Ok(());
    };
    let u = first.from.min(first.to);

    chosen.insert(u);
    branch_covers(edges, chosen, target, cap, out)?;
    chosen.remove(&u);

    let nbrs: Vec<VertexId> = open
        .iter()
        .filter(|e| e.touches(u))
        .map(|e| e.other(u))
        .filter(|v| !chosen.contains(v))
        .collect();
    for &v in &nbrs {
        chosen.insert(v);
    }
    // every edge at u is covered now, so u can never be picked below
    branch_covers(edges, chosen, target, cap, out)?;
    for v in &nbrs {
        chosen.remove(v);
    }
    Ok(())
}

/// One endpoint per edge of the matching `q`: the endpoint outside `x` when
/// exactly one endpoint lies in `x`, otherwise the smaller endpoint.
pub fn x_preferred_cover(q: &[Edge], x: &VertexSet) -> VertexSet {
    q.iter()
        .map(|e| match (x.contains(&e.from), x.contains(&e.to)) {
            (true, false) => e.to,
            (false, true) => e.from,
            _ => e.from.min(e.to),
        })
        .collect()
}

/// `true` iff `pi` splits into a prefix of in-neighbors of `v` followed by a
/// suffix of out-neighbors.
pub fn consistent_with(t: &BipartiteTournament, pi: &[VertexId], v: VertexId) -> bool {
    let mut seen_out = false;
    for &u in pi {
        if t.has_arc(u, v) {
            if seen_out {
                return false;
            }
        } else {
            seen_out = true;
        }
    }
    true
}

/// Vertices of `candidates` on the side opposite `pi` that are inconsistent with `pi`.
/// `pi` must lie on one side.
pub fn inconsistent_vertices(
    t: &BipartiteTournament,
    pi: &[VertexId],
    candidates: &VertexSet,
) -> VertexSet {
    let Some(side) = pi.first().map(|v| v.side) else {
        return VertexSet::new();
    };
    candidates
        .iter()
        .filter(|v| v.side != side && !consistent_with(t, pi, **v))
        .copied()
        .collect()
}
