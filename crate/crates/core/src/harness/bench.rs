//! Runs several solvers over a corpus and records sizes, nodes and times.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::cfvs::{pipeline_solve, CfvsError, ConstantsProfile, PipelineOptions};
use crate::graph::BipartiteTournament;
use crate::solvers::{
    approx_fvs, branch_solve_with, exact_min_fvs, oracle_min_fvs, BranchOptions, Constraints,
    SolverError, Status,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BenchSolver {
    Oracle,
    Branch,
    Approx4,
    Exact,
    Pipeline(ConstantsProfile),
}

impl BenchSolver {
    pub fn name(&self) -> &'static str {
        match self {
            BenchSolver::Oracle => "oracle",
            BenchSolver::Branch => "branch",
            BenchSolver::Approx4 => "approx4",
            BenchSolver::Exact => "exact",
            BenchSolver::Pipeline(_) => "pipeline",
        }
    }

    /// `oracle`, `branch`, `approx4`, `exact` or `pipeline`; the pipeline
    /// uses `profile`.
    pub fn parse(name: &str, profile: &ConstantsProfile) -> Option<Self> {
        Some(match name {
            "oracle" => BenchSolver::Oracle,
            "branch" => BenchSolver::Branch,
            "approx4" => BenchSolver::Approx4,
            "exact" => BenchSolver::Exact,
            "pipeline" => BenchSolver::Pipeline(profile.clone()),
            _ => return None,
        })
    }

    fn is_exact(&self) -> bool {
        !matches!(self, BenchSolver::Approx4)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub instance: String,
    pub solver: String,
    pub status: String,
    pub size: Option<usize>,
    pub nodes: u64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub records: Vec<BenchRecord>,
    /// Instances on which exact solvers reported different minimum sizes.
    pub disagreements: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Cfvs(#[from] CfvsError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Minimum FVS size by the given solver; approx4 gives its own size.
fn run_one(
    t: &BipartiteTournament,
    solver: &BenchSolver,
) -> Result<(String, Option<usize>, u64), BenchError> {
    Ok(match solver {
        BenchSolver::Oracle => match oracle_min_fvs(t, None) {
            Ok(r) => (
                "solution".into(),
                r.solution().map(|s| s.len()),
                r.stats.nodes,
            ),
            Err(SolverError::InstanceTooLarge { .. }) => ("skipped".into(), None, 0),
            Err(e) => return Err(e.into()),
        },
        BenchSolver::Branch => {
            let opts = BranchOptions {
                reduce: false,
                ..Default::default()
            };
            let mut nodes = 0;
            for k in 0..=t.len() {
                let r = branch_solve_with(t, &Constraints::with_budget(k), &opts)?;
                nodes += r.stats.nodes;
                if let Status::Solution(s) = r.status {
                    return Ok(("solution".into(), Some(s.len()), nodes));
                }
            }
            ("no_solution".into(), None, nodes)
        }
        BenchSolver::Approx4 => ("approximate".into(), Some(approx_fvs(t).len()), 0),
        BenchSolver::Exact => ("solution".into(), Some(exact_min_fvs(t).len()), 0),
        BenchSolver::Pipeline(profile) => {
            let mut nodes = 0;
            for k in 0..=t.len() {
                let out = pipeline_solve(t, k, profile, &PipelineOptions::default())?;
                nodes += out.result.stats.nodes;
                if let Status::Solution(s) = out.result.status {
                    return Ok(("solution".into(), Some(s.len()), nodes));
                }
            }
            ("no_solution".into(), None, nodes)
        }
    })
}

pub fn bench(
    corpus: &[(String, BipartiteTournament)],
    solvers: &[BenchSolver],
) -> Result<BenchReport, BenchError> {
    let mut records = Vec::new();
    let mut disagreements = Vec::new();
    for (name, t) in corpus {
        let mut sizes = Vec::new();
        for solver in solvers {
            let start = Instant::now();
            let (status, size, nodes) = run_one(t, solver)?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            if solver.is_exact() {
                if let Some(s) = size {
                    sizes.push((solver.name(), s));
                }
            }
            records.push(BenchRecord {
                instance: name.clone(),
                solver: solver.name().into(),
                status,
                size,
                nodes,
                ms,
            });
        }
        if sizes.windows(2).any(|w| w[0].1 != w[1].1) {
            disagreements.push(format!("{name}: {sizes:?}"));
        }
    }
    Ok(BenchReport {
        records,
        disagreements,
    })
}

/// CSV with columns `instance,solver,status,size,nodes,ms`.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
