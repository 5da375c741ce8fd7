//! The full reduction: seeds, the five refinement stages, DFVC, lifting.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    partition_parts, seed_instances, stage_decoupled, stage_lowblockdegree, stage_matched,
    stage_regular, stage_weak, CfvsError, CfvsInstance, ConstantsProfile,
};
use crate::dfvc::{dfvc_solve, DfvcInstance};
use crate::graph::{BipartiteTournament, Induced, MixedMultigraph, PartVertex, VertexSet};
use crate::solvers::{
    branch_solve_with, reduce, verify_fvs, BranchOptions, Constraints, SolveResult, Stats, Status,
};

/// A DFVC instance built from a CFVS instance, with the maps back to `T`.
#[derive(Debug, Clone)]
pub struct DfvcReduction {
    pub instance: DfvcInstance,
    pub parts: Vec<Induced>,
    pub p: VertexSet,
}

impl DfvcReduction {
    /// `P` plus the host vertices of a DFVC solution.
    pub fn lift(&self, s: &BTreeSet<PartVertex>) -> VertexSet {
        s.iter()
            .map(|v| self.parts[v.part].to_host(v.vertex))
            .chain(self.p.iter().copied())
            .collect()
    }
}

/// Parts are the induced tournaments of the greedy partition of `T - P`.
/// Edges of `F & E(T - P)` between parts become undirected edges, those
/// inside a part must be covered there, and `M` is kept but undeletable.
/// Budget is `k - |P|`.
pub fn to_dfvc(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<DfvcReduction, CfvsError> {
    if !super::is_decoupled(inst, profile)? {
        return Err(CfvsError::PreconditionViolated("decoupled"));
    }
    let parts = partition_parts(inst, profile)?;
    let induced: Vec<Induced> = parts.iter().map(|p| inst.tournament.induced(p)).collect();
    let mut local = BTreeMap::new();
    for (i, ind) in induced.iter().enumerate() {
        for (d, &host) in ind.mapping.iter().enumerate() {
            local.insert(host, PartVertex::new(i, ind.tournament.vertex(d)));
        }
    }
    let mut undirected = Vec::new();
    let mut internal_cover = BTreeSet::new();
    for e in inst.live_f() {
        let (u, v) = (local[&e.from], local[&e.to]);
        if u.part == v.part {
            internal_cover.insert((u.part, crate::graph::Edge::new(u.vertex, v.vertex)));
        } else {
            undirected.push((u, v));
        }
    }
    let graph = MixedMultigraph::new(
        induced.iter().map(|i| i.tournament.clone()).collect(),
        undirected,
    )
    .map_err(|e| CfvsError::InvariantViolation(e.to_string()))?;
    let forbidden = inst
        .m
        .iter()
        .filter_map(|v| local.get(v).copied())
        .collect();
    Ok(DfvcReduction {
        instance: DfvcInstance {
            graph,
            forbidden,
            internal_cover,
            budget: inst.k - inst.p.len(),
        },
        parts: induced,
        p: inst.p.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct PipelineOptions {
    /// Threads over seed instances; 1 keeps the search order fixed.
    pub workers: usize,
    /// Answer with the branching solver when no stage path succeeds.
    pub fallback: bool,
    /// Keep every emitted family for inspection.
    pub collect_families: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            workers: 1,
            fallback: true,
            collect_families: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Via {
    /// The reduced instance is already acyclic.
    Trivial,
    Pipeline,
    Fallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageTrace {
    pub stage: &'static str,
    pub inputs: u64,
    pub outputs: u64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutcome {
    pub result: SolveResult,
    pub via: Via,
    pub trace: Vec<StageTrace>,
    pub diagnostics: Vec<String>,
    /// `(stage, family)` pairs in emission order, when collected.
    pub families: Vec<(&'static str, Vec<CfvsInstance>)>,
}

type Stage = fn(&CfvsInstance, &ConstantsProfile) -> Result<Vec<CfvsInstance>, CfvsError>;

const STAGES: [(&str, Stage); 5] = [
    ("regular", stage_regular),
    ("weak", stage_weak),
    ("matched", stage_matched),
    ("lowblockdegree", stage_lowblockdegree),
    ("decoupled", stage_decoupled),
];

struct Run<'a> {
    profile: &'a ConstantsProfile,
    opts: &'a PipelineOptions,
    counts: [(AtomicU64, AtomicU64); 7],
    diagnostics: Mutex<Vec<String>>,
    families: Mutex<Vec<(&'static str, Vec<CfvsInstance>)>>,
    nodes: AtomicU64,
}

impl Run<'_> {
    fn note(&self, e: CfvsError) {
        self.diagnostics
            .lock()
            .expect("poisoned")
            .push(e.to_string());
    }

    fn count(&self, slot: usize, inputs: u64, outputs: u64) {
        self.counts[slot].0.fetch_add(inputs, Ordering::Relaxed);
        self.counts[slot].1.fetch_add(outputs, Ordering::Relaxed);
    }

    /// Depth-first through the stages; returns a solution of `inst`.
    fn descend(&self, inst: &CfvsInstance, depth: usize) -> Result<Option<VertexSet>, CfvsError> {
        if depth == STAGES.len() {
            return self.finish(inst);
        }
        let (name, stage) = STAGES[depth];
        let family = match stage(inst, self.profile) {
            Ok(f) => f,
            Err(e @ (CfvsError::FamilyCapExceeded { .. } | CfvsError::PreconditionViolated(_))) => {
                self.note(e);
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        self.count(depth + 1, 1, family.len() as u64);
        if self.opts.collect_families {
            self.families
                .lock()
                .expect("poisoned")
                .push((name, family.clone()));
        }
        for child in &family {
            if let Some(h) = self.descend(child, depth + 1)? {
                return Ok(Some(h));
            }
        }
        Ok(None)
    }

    fn finish(&self, inst: &CfvsInstance) -> Result<Option<VertexSet>, CfvsError> {
        let red = to_dfvc(inst, self.profile)?;
        let r =
            dfvc_solve(&red.instance).map_err(|e| CfvsError::InvariantViolation(e.to_string()))?;
        self.nodes.fetch_add(r.stats.nodes, Ordering::Relaxed);
        self.count(6, 1, r.solution.is_some() as u64);
        let Some(s) = r.solution else { return Ok(None) };
        let h = red.lift(&s);
        if !inst.is_solution(&h) {
            return Err(CfvsError::InvariantViolation(format!(
                "lifted DFVC solution {h:?} does not solve its CFVS instance"
            )));
        }
        Ok(Some(h))
    }
}

/// Decides whether `T` has an FVS of at most `k` vertices through the
/// constrained-FVS reduction. Any solution found is checked against `T`
/// before it is returned. If the stages find nothing, the answer comes from
/// [`branch_solve_with`] unless fallback is off.
pub fn pipeline_solve(
    t: &BipartiteTournament,
    k: usize,
    profile: &ConstantsProfile,
    opts: &PipelineOptions,
) -> Result<PipelineOutcome, CfvsError> {
    profile.validate()?;
    let start = Instant::now();
    let red = reduce(t, k);
    let kernel = Arc::new(red.kernel.tournament.clone());
    let run = Run {
        profile,
        opts,
        counts: Default::default(),
        diagnostics: Mutex::new(Vec::new()),
        families: Mutex::new(Vec::new()),
        nodes: AtomicU64::new(0),
    };
    let mut via = Via::Pipeline;

    let found = if verify_fvs(&kernel, &VertexSet::new()) {
        via = Via::Trivial;
        Some(VertexSet::new())
    } else {
        match seed_instances(kernel.clone(), k, profile) {
            Err(e @ CfvsError::FamilyCapExceeded { .. }) => {
                run.note(e);
                None
            }
            Err(e) => return Err(e),
            Ok(seeds) => {
                run.count(0, 1, seeds.len() as u64);
                if opts.collect_families {
                    run.families
                        .lock()
                        .expect("poisoned")
                        .push(("seeds", seeds.clone()));
                }
                let attempt = |s: &CfvsInstance| match run.descend(s, 0) {
                    Ok(None) => None,
                    other => Some(other),
                };
                let hit = if opts.workers > 1 {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(opts.workers)
                        .build()
                        .map_err(|e| CfvsError::InvariantViolation(e.to_string()))?;
                    pool.install(|| seeds.par_iter().find_map_first(attempt))
                } else {
                    seeds.iter().find_map(attempt)
                };
                hit.transpose()?.flatten()
            }
        }
    };

    let mut status = match found {
        Some(h) => {
            let h = red.lift(&h);
            if h.len() > k || !verify_fvs(t, &h) {
                return Err(CfvsError::InvariantViolation(format!(
                    "pipeline produced {h:?}, which is not an FVS of size <= {k}"
                )));
            }
            Status::Solution(h)
        }
        None => Status::NoSolution,
    };
    let mut nodes = run.nodes.load(Ordering::Relaxed);
    if status == Status::NoSolution && opts.fallback {
        via = Via::Fallback;
        let r = branch_solve_with(
            t,
            &Constraints::with_budget(k),
            &BranchOptions {
                workers: opts.workers,
                ..Default::default()
            },
        )
        .map_err(|e| CfvsError::InvariantViolation(e.to_string()))?;
        nodes += r.stats.nodes;
        status = r.status;
    }

    let names = [
        "seeds",
        "regular",
        "weak",
        "matched",
        "lowblockdegree",
        "decoupled",
        "dfvc",
    ];
    let trace = names
        .iter()
        .zip(&run.counts)
        .map(|(&stage, (i, o))| StageTrace {
            stage,
            inputs: i.load(Ordering::Relaxed),
            outputs: o.load(Ordering::Relaxed),
        })
        .collect();
    Ok(PipelineOutcome {
        result: SolveResult {
            status,
            stats: Stats {
                nodes,
                elapsed: start.elapsed(),
            },
        },
        via,
        trace,
        diagnostics: run.diagnostics.into_inner().expect("poisoned"),
        families: run.families.into_inner().expect("poisoned"),
    })
}
