//! Disjoint feedback vertex cover on mixed multigraphs.
//!
//! A solution deletes at least one endpoint of every undirected edge and
//! leaves every part acyclic. Parts share no directed arcs, so once the
//! undirected edges are resolved each part can be solved on its own.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{Edge, GraphError, MixedMultigraph, PartVertex, VertexSet};
use crate::solvers::{
    approx_fvs, exact_min_constrained, oracle_min_fvs, BranchOptions, Constraints, SolverError,
    Stats, ORACLE_CAP,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DfvcError {
    #[error("undirected edges are not a matching: {0} has two")]
    NotAMatching(PartVertex),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfvcInstance {
    pub graph: MixedMultigraph,
    /// Vertices that may not be deleted.
    pub forbidden: BTreeSet<PartVertex>,
    /// Arcs inside a part that must also lose an endpoint.
    pub internal_cover: BTreeSet<(usize, Edge)>,
    pub budget: usize,
}

impl DfvcInstance {
    pub fn new(graph: MixedMultigraph, forbidden: BTreeSet<PartVertex>, budget: usize) -> Self {
        DfvcInstance {
            graph,
            forbidden,
            internal_cover: BTreeSet::new(),
            budget,
        }
    }

    pub fn check(&self) -> Result<(), DfvcError> {
        for &v in &self.forbidden {
            self.graph.check(v)?;
        }
        for &(part, e) in &self.internal_cover {
            self.graph.check(PartVertex::new(part, e.from))?;
            self.graph.check(PartVertex::new(part, e.to))?;
            if !self.graph.parts()[part].is_arc(&e) {
                return Err(SolverError::NotAnArc(e).into());
            }
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in self.graph.undirected() {
            for x in [u, v] {
                if !seen.insert(x) {
                    return Err(DfvcError::NotAMatching(x));
                }
            }
        }
        Ok(())
    }

    fn part_constraints(&self, part: usize, required: &VertexSet) -> Constraints {
        Constraints {
            forbidden: self
                .forbidden
                .iter()
                .filter(|v| v.part == part)
                .map(|v| v.vertex)
                .collect(),
            required_in: required.clone(),
            cover_edges: self
                .internal_cover
                .iter()
                .filter(|(p, _)| *p == part)
                .map(|&(_, e)| e)
                .collect(),
            budget: self.budget,
        }
    }

    /// `true` iff `s` is a solution within budget.
    pub fn accepts(&self, s: &BTreeSet<PartVertex>) -> bool {
        s.len() <= self.budget
            && s.is_disjoint(&self.forbidden)
            && self
                .graph
                .undirected()
                .iter()
                .all(|(u, v)| s.contains(u) || s.contains(v))
            && self.graph.parts().iter().enumerate().all(|(i, t)| {
                let local: VertexSet = s.iter().filter(|v| v.part == i).map(|v| v.vertex).collect();
                let mut c = self.part_constraints(i, &VertexSet::new());
                c.budget = t.len();
                c.required_in.clear();
                c.accepts(t, &local)
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DfvcResult {
    /// A minimum solution, present iff its size is within budget.
    pub solution: Option<BTreeSet<PartVertex>>,
    /// Size of a minimum solution ignoring the budget, if any exists.
    pub optimum: Option<usize>,
    pub stats: Stats,
}

/// Branches on which endpoint of each undirected edge is deleted, then adds
/// an exact minimum FVS of every part that contains the chosen endpoints.
pub fn dfvc_solve(inst: &DfvcInstance) -> Result<DfvcResult, DfvcError> {
    inst.check()?;
    let start = Instant::now();
    let edges = inst.graph.undirected().to_vec();
    let parts = inst.graph.parts().len();
    let mut memo: BTreeMap<(usize, VertexSet), Option<VertexSet>> = BTreeMap::new();
    let mut nodes = 0u64;
    let mut best: Option<BTreeSet<PartVertex>> = None;
    let mut required: Vec<VertexSet> = vec![VertexSet::new(); parts];

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        edges: &[(PartVertex, PartVertex)],
        inst: &DfvcInstance,
        required: &mut Vec<VertexSet>,
        memo: &mut BTreeMap<(usize, VertexSet), Option<VertexSet>>,
        nodes: &mut u64,
        best: &mut Option<BTreeSet<PartVertex>>,
    ) -> Result<(), DfvcError> {
        *nodes += 1;
        if i == edges.len() {
            let mut total = BTreeSet::new();
            for (p, req) in required.iter().enumerate() {
                let key = (p, req.clone());
                let sol = match memo.get(&key) {
                    Some(s) => s.clone(),
                    None => {
                        let c = inst.part_constraints(p, req);
                        let s = exact_min_constrained(
                            &inst.graph.parts()[p],
                            &c,
                            &BranchOptions::default(),
                        )?;
                        memo.insert(key, s.clone());
                        s
                    }
                };
                let Some(sol) = sol else { return Ok(()) };
                total.extend(sol.into_iter().map(|v| PartVertex::new(p, v)));
            }
            if best.as_ref().is_none_or(|b| total.len() < b.len()) {
                *best = Some(total);
            }
            return Ok(());
        }
        let (u, v) = edges[i];
        for x in [u, v] {
            if inst.forbidden.contains(&x) {
                continue;
            }
            let fresh = required[x.part].insert(x.vertex);
            rec(i + 1, edges, inst, required, memo, nodes, best)?;
            if fresh {
                required[x.part].remove(&x.vertex);
            }
        }
        Ok(())
    }

    rec(
        0,
        &edges,
        inst,
        &mut required,
        &mut memo,
        &mut nodes,
        &mut best,
    )?;
    let optimum = best.as_ref().map(|b| b.len());
    let solution = best.filter(|b| b.len() <= inst.budget);
    debug_assert!(solution.as_ref().is_none_or(|s| inst.accepts(s)));
    Ok(DfvcResult {
        solution,
        optimum,
        stats: Stats {
            nodes,
            elapsed: start.elapsed(),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartReport {
    pub part: usize,
    pub vertices: usize,
    pub degree: usize,
    pub approx_fvs: usize,
    /// Exact minimum FVS size when the part is small enough for the oracle.
    pub exact_fvs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassReport {
    pub parts: Vec<PartReport>,
    pub violations: Vec<String>,
}

impl ClassReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks membership in the class with part degree at most `d`, part FVS
/// size in `[f, 4f]` and at most `t` parts. Without an exact size the
/// 4-approximation `a` is used: `a < f` or `a > 16f` is a certain violation.
pub fn validate_class(inst: &DfvcInstance, d: usize, f: usize, t: usize) -> ClassReport {
    let mut parts = Vec::new();
    let mut violations = Vec::new();
    let count = inst.graph.parts().len();
    if count > t {
        violations.push(format!("{count} parts exceed t = {t}"));
    }
    for (i, part) in inst.graph.parts().iter().enumerate() {
        let degree = inst.graph.undirected_degree(i);
        let approx = approx_fvs(part).len();
        let exact = if part.len() <= ORACLE_CAP {
            oracle_min_fvs(part, None)
                .ok()
                .and_then(|r| r.solution().map(|s| s.len()))
        } else {
            None
        };
        if degree > d {
            violations.push(format!(
                "part {i}: undirected degree {degree} exceeds d = {d}"
            ));
        }
        match exact {
            Some(s) if s < f || s > 4 * f => {
                violations.push(format!("part {i}: FVS size {s} outside [{f}, {}]", 4 * f))
            }
            None if approx < f || approx > 16 * f => violations.push(format!(
                "part {i}: approximate FVS size {approx} rules out [{f}, {}]",
                4 * f
            )),
            _ => {}
        }
        parts.push(PartReport {
            part: i,
            vertices: part.len(),
            degree,
            approx_fvs: approx,
            exact_fvs: exact,
        });
    }
    ClassReport { parts, violations }
}
