//! Feedback vertex set solvers and certificate checks.

mod approx;
mod branch;
mod oracle;
mod reduce;

use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{BipartiteTournament, Edge, EdgeSet, VertexId, VertexSet};
use crate::structure;

pub use approx::{approx4, approx_fvs, approx_fvs_within, Approx};
pub use branch::{
    branch_solve, branch_solve_with, exact_min_constrained, exact_min_fvs, exact_min_fvs_with,
    squares_packing_lower_bound, BranchOptions,
};
pub use oracle::{oracle_min_fvs, oracle_min_fvs_capped, ORACLE_CAP};
pub use reduce::{reduce, Reduction};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SolverError {
    #[error("instance has {vertices} vertices, oracle cap is {cap}")]
    InstanceTooLarge { vertices: usize, cap: usize },
    #[error("vertex {0} is both forbidden and required")]
    ForbiddenRequired(VertexId),
    #[error("vertex {0} is not in the tournament")]
    InvalidVertex(VertexId),
    #[error("{0} is not an arc of the tournament")]
    NotAnArc(Edge),
}

/// Side constraints on a feedback vertex set: never delete `forbidden`,
/// always delete `required_in`, cover every edge of `cover_edges`, and use at
/// most `budget` vertices in total.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Constraints {
    pub forbidden: VertexSet,
    pub required_in: VertexSet,
    pub cover_edges: EdgeSet,
    pub budget: usize,
}

impl Constraints {
    pub fn with_budget(budget: usize) -> Self {
        Constraints {
            budget,
            ..Default::default()
        }
    }

    pub fn check(&self, t: &BipartiteTournament) -> Result<(), SolverError> {
        for &v in self.forbidden.iter().chain(&self.required_in) {
            if !t.contains(v) {
                return Err(SolverError::InvalidVertex(v));
            }
        }
        if let Some(&v) = self.forbidden.intersection(&self.required_in).next() {
            return Err(SolverError::ForbiddenRequired(v));
        }
        for e in &self.cover_edges {
            if !t.contains(e.from) || !t.contains(e.to) || !t.has_arc(e.from, e.to) {
                return Err(SolverError::NotAnArc(*e));
            }
        }
        Ok(())
    }

    /// `true` iff `s` is an FVS of `t` honoring every constraint.
    pub fn accepts(&self, t: &BipartiteTournament, s: &VertexSet) -> bool {
        s.len() <= self.budget
            && s.is_disjoint(&self.forbidden)
            && self.required_in.is_subset(s)
            && self
                .cover_edges
                .iter()
                .all(|e| s.contains(&e.from) || s.contains(&e.to))
            && verify_fvs(t, s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Solution(VertexSet),
    NoSolution,
    /// The search hit its node limit before deciding.
    BudgetExceeded,
}

impl Status {
    pub fn solution(&self) -> Option<&VertexSet> {
        match self {
            Status::Solution(s) => Some(s),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Status::Solution(_) => "solution",
            Status::NoSolution => "no_solution",
            Status::BudgetExceeded => "budget_exceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub nodes: u64,
    #[serde(serialize_with = "millis")]
    pub elapsed: Duration,
}

fn millis<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64() * 1e3)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub status: Status,
    pub stats: Stats,
}

impl SolveResult {
    pub fn solution(&self) -> Option<&VertexSet> {
        self.status.solution()
    }
}

/// `true` iff `T - S` is acyclic. Vertices outside `T` are ignored.
pub fn verify_fvs(t: &BipartiteTournament, s: &VertexSet) -> bool {
    let mut alive = vec![true; t.len()];
    for &v in s {
        if t.contains(v) {
            alive[t.dense(v)] = false;
        }
    }
    structure::is_acyclic_mask(t, &alive)
}
