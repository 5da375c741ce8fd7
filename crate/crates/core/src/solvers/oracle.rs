//! Exhaustive reference solver.

use std::time::Instant;

use itertools::Itertools;

use super::{Constraints, SolveResult, SolverError, Stats, Status};
use crate::graph::{BipartiteTournament, VertexId, VertexSet};
use crate::structure;

pub const ORACLE_CAP: usize = 16;

pub fn oracle_min_fvs(
    t: &BipartiteTournament,
    constraints: Option<&Constraints>,
) -> Result<SolveResult, SolverError> {
    oracle_min_fvs_capped(t, constraints, ORACLE_CAP)
}

/// Tries every candidate set by increasing size, each size in lexicographic
/// order, and returns the first one that works.
pub fn oracle_min_fvs_capped(
    t: &BipartiteTournament,
    constraints: Option<&Constraints>,
    cap: usize,
) -> Result<SolveResult, SolverError> {
    if t.len() > cap {
        return Err(SolverError::InstanceTooLarge {
            vertices: t.len(),
            cap,
        });
    }
    let start = Instant::now();
    let unconstrained = Constraints::with_budget(t.len());
    let c = constraints.unwrap_or(&unconstrained);
    c.check(t)?;

    let free: Vec<VertexId> = t
        .vertices()
        .filter(|v| !c.forbidden.contains(v) && !c.required_in.contains(v))
        .collect();
    let mut nodes = 0u64;
    let mut status = Status::NoSolution;
    let mut alive = vec![true; t.len()];
    for &v in &c.required_in {
        alive[t.dense(v)] = false;
    }
    if c.required_in.len() <= c.budget {
        'sizes: for size in 0..=(c.budget - c.required_in.len()).min(free.len()) {
            for pick in free.iter().copied().combinations(size) {
                nodes += 1;
                let covered = c.cover_edges.iter().all(|e| {
                    c.required_in.contains(&e.from)
                        || c.required_in.contains(&e.to)
                        || pick.contains(&e.from)
                        || pick.contains(&e.to)
                });
                if !covered {
                    continue;
                }
                for &v in &pick {
                    alive[t.dense(v)] = false;
                }
                let ok = structure::is_acyclic_mask(t, &alive);
                for &v in &pick {
                    alive[t.dense(v)] = true;
                }
                if ok {
                    let mut s: VertexSet = pick.into_iter().collect();
                    s.extend(c.required_in.iter().copied());
                    status = Status::Solution(s);
                    break 'sizes;
                }
            }
        }
    }
    Ok(SolveResult {
        status,
        stats: Stats {
            nodes,
            elapsed: start.elapsed(),
        },
    })
}
