//! Safe reduction rules.
//!
//! R1 deletes a vertex that lies on no square. R2 keeps only `k + 1` members
//! of each false-twin class: a square holds at most one vertex of a class and
//! twins substitute for each other, so with `k + 1` kept one always survives
//! a size-`k` deletion and stands in for the dropped ones.

use std::collections::HashMap;

use crate::bits::Bits;
use crate::graph::{BipartiteTournament, Induced, Side, VertexId, VertexSet};
use crate::structure::{for_each_square, Alive};

#[derive(Debug, Clone)]
pub struct Reduction {
    pub kernel: Induced,
    pub k: usize,
}

impl Reduction {
    /// Maps a solution of the kernel back to the original vertex ids.
    pub fn lift(&self, s: &VertexSet) -> VertexSet {
        self.kernel.lift(s)
    }
}

/// Applies R1 and R2 to a fixpoint. `T` has an FVS of size `<= k` iff the kernel does.
pub fn reduce(t: &BipartiteTournament, k: usize) -> Reduction {
    let mut alive = Alive::all(t);
    reduce_alive(t, &mut alive, k, None);
    Reduction {
        kernel: t.induced(&alive.to_set()),
        k,
    }
}

/// In-place reduction of the alive set. `protected` vertices are never removed.
pub(crate) fn reduce_alive(
    t: &BipartiteTournament,
    alive: &mut Alive,
    k: usize,
    protected: Option<&Alive>,
) {
    let is_protected = |v: VertexId| protected.is_some_and(|p| p.contains(v));
    loop {
        let mut changed = false;

        let mut on_square = Alive {
            a: Bits::new(t.m()),
            b: Bits::new(t.n()),
        };
        for_each_square(t, alive, |sq| {
            for v in sq.vertices() {
                on_square.revive(v);
            }
            true
        });
        for v in alive.to_set() {
            if !on_square.contains(v) && !is_protected(v) {
                alive.kill(v);
                changed = true;
            }
        }

        let mut classes: HashMap<(Side, Vec<u64>), Vec<VertexId>> = HashMap::new();
        for i in alive.a.iter_ones() {
            classes
                .entry((Side::A, t.a_out(i).and_words(&alive.b)))
                .or_default()
                .push(VertexId::a(i));
        }
        for j in alive.b.iter_ones() {
            classes
                .entry((Side::B, t.b_out(j).and_words(&alive.a)))
                .or_default()
                .push(VertexId::b(j));
        }
        for members in classes.values() {
            if members.len() <= k + 1 {
                continue;
            }
            let mut kept = members.iter().filter(|&&v| is_protected(v)).count();
            for &v in members {
                if is_protected(v) {
                    continue;
                }
                if kept < k + 1 {
                    kept += 1;
                } else {
                    alive.kill(v);
                    changed = true;
                }
            }
        }

        if !changed {
            return;
        }
    }
}
