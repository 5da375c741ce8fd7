//! Constrained FVS: find `H` with `|H| <= k`, `H` disjoint from `M`,
//! containing `P`, covering every edge of `F`, and `T - H` acyclic.
//!
//! The stages here each turn one instance into a family of instances with
//! more structure. Every child keeps `T`, `M` and `k` and only grows `P` and
//! `F`, so a solution of a child is always a solution of its parent.

mod family;
mod pipeline;
mod profile;
mod stages;

use std::collections::BTreeSet;
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{BipartiteTournament, Edge, EdgeSet, VertexSet};
use crate::msequence::{m_sequence_within, MSequence, MSequenceError};
use crate::sample_space::SampleSpaceError;
use crate::solvers::verify_fvs;

pub use family::{derive_forced_p, is_m_homogeneous, m_family, seed_instances};
pub use pipeline::{
    pipeline_solve, to_dfvc, DfvcReduction, PipelineOptions, PipelineOutcome, StageTrace, Via,
};
pub use profile::ConstantsProfile;
pub use stages::{
    fibonacci_branching, is_decoupled, is_low_block_degree, is_matched, is_regular,
    is_weakly_coupled, large_sets, long_back, part_max, partition_parts, short_back_large,
    stage_decoupled, stage_lowblockdegree, stage_matched, stage_regular, stage_weak,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CfvsError {
    #[error("{stage}: family of at least {size} instances exceeds cap {cap}")]
    FamilyCapExceeded {
        stage: &'static str,
        size: u128,
        cap: usize,
    },
    #[error(transparent)]
    SampleSpace(#[from] SampleSpaceError),
    #[error("T - P is not M-consistent: {0}")]
    NotMConsistent(#[from] MSequenceError),
    #[error("precondition violated: instance is not {0}")]
    PreconditionViolated(&'static str),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("internal invariant violated: {0}")]
    InvariantViolation(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfvsInstance {
    pub tournament: Arc<BipartiteTournament>,
    pub m: VertexSet,
    pub p: VertexSet,
    pub f: EdgeSet,
    pub k: usize,
}

impl CfvsInstance {
    pub fn new(
        tournament: Arc<BipartiteTournament>,
        m: VertexSet,
        p: VertexSet,
        f: EdgeSet,
        k: usize,
    ) -> Self {
        CfvsInstance {
            tournament,
            m,
            p,
            f,
            k,
        }
    }

    /// `V(T) - P`.
    pub fn rest(&self) -> VertexSet {
        self.tournament
            .vertices()
            .filter(|v| !self.p.contains(v))
            .collect()
    }

    /// The M-sequence of `T - P`.
    pub fn m_sequence(&self) -> Result<MSequence, MSequenceError> {
        m_sequence_within(&self.tournament, &self.m, &self.rest())
    }

    /// `F` restricted to `E(T - P)`.
    pub fn live_f(&self) -> Vec<Edge> {
        self.f
            .iter()
            .filter(|e| !self.p.contains(&e.from) && !self.p.contains(&e.to))
            .copied()
            .collect()
    }

    /// `false` when no solution can exist: `P` meets `M` or exceeds `k`.
    pub fn viable(&self) -> bool {
        self.p.is_disjoint(&self.m) && self.p.len() <= self.k
    }

    pub fn with_p(&self, extra: impl IntoIterator<Item = crate::graph::VertexId>) -> Self {
        let mut c = self.clone();
        c.p.extend(extra);
        c
    }

    pub fn with_f(&self, extra: impl IntoIterator<Item = Edge>) -> Self {
        let mut c = self.clone();
        c.f.extend(extra);
        c
    }

    pub fn is_solution(&self, h: &VertexSet) -> bool {
        h.len() <= self.k
            && h.is_disjoint(&self.m)
            && self.p.is_subset(h)
            && self
                .f
                .iter()
                .all(|e| h.contains(&e.from) || h.contains(&e.to))
            && verify_fvs(&self.tournament, h)
    }
}

/// Keeps the first instance for each `(P, F)` pair.
pub(crate) fn dedup(family: Vec<CfvsInstance>) -> Vec<CfvsInstance> {
    let mut seen = BTreeSet::new();
    family
        .into_iter()
        .filter(|c| seen.insert((c.p.clone(), c.f.clone())))
        .collect()
}

/// `sum_{i <= r} C(n, i)`, saturating.
pub(crate) fn subsets_upto(n: usize, r: usize) -> u128 {
    let mut total: u128 = 0;
    let mut term: u128 = 1;
    for i in 0..=r.min(n) {
        total = total.saturating_add(term);
        term = term.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    total
}
