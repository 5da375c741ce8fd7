//! Delete-whole-squares 4-approximation.

use crate::graph::{BipartiteTournament, VertexSet};
use crate::structure::{first_square, Alive, Square};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Approx {
    /// More than `k` vertex-disjoint squares exist, so no FVS of size `k` does.
    TooBig,
    Fvs(VertexSet),
}

fn greedy_squares(
    t: &BipartiteTournament,
    mut alive: Alive,
    limit: Option<usize>,
) -> Option<Vec<Square>> {
    let mut found = Vec::new();
    while let Some(sq) = first_square(t, &alive) {
        if limit.is_some_and(|k| found.len() == k) {
            return None;
        }
        for v in sq.vertices() {
            alive.kill(v);
        }
        found.push(sq);
    }
    Some(found)
}

fn union(squares: &[Square]) -> VertexSet {
    squares.iter().flat_map(|s| s.vertices()).collect()
}

pub fn approx4(t: &BipartiteTournament, k: usize) -> Approx {
    match greedy_squares(t, Alive::all(t), Some(k)) {
        Some(sq) => Approx::Fvs(union(&sq)),
        None => Approx::TooBig,
    }
}

/// The greedy FVS with no budget.
pub fn approx_fvs(t: &BipartiteTournament) -> VertexSet {
    union(&greedy_squares(t, Alive::all(t), None).expect("no limit"))
}

/// The greedy FVS of `T[within]`.
pub fn approx_fvs_within(t: &BipartiteTournament, within: &VertexSet) -> VertexSet {
    union(&greedy_squares(t, Alive::from_set(t, within), None).expect("no limit"))
}
