//! Bounded search tree over square vertices, with side constraints.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use super::reduce::reduce_alive;
use super::{Constraints, SolveResult, SolverError, Stats, Status};
use crate::graph::{BipartiteTournament, Edge, VertexId, VertexSet};
use crate::structure::{first_square, for_each_square, Alive};

#[derive(Debug, Clone)]
pub struct BranchOptions {
    /// Threads for exploring root subtrees. With one worker the search is
    /// fully deterministic.
    pub workers: usize,
    /// Give up with `BudgetExceeded` after this many search nodes.
    pub node_limit: Option<u64>,
    /// Apply the reduction rules at every node.
    pub reduce: bool,
}

impl Default for BranchOptions {
    fn default() -> Self {
        BranchOptions {
            workers: 1,
            node_limit: None,
            reduce: true,
        }
    }
}

#[derive(Clone)]
struct Node {
    alive: Alive,
    sol: Vec<VertexId>,
    budget: usize,
}

#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Found(Vec<VertexId>),
    Exhausted,
    Aborted,
}

enum Expansion {
    Leaf(Outcome),
    Children(Vec<Node>),
}

struct Search<'a> {
    t: &'a BipartiteTournament,
    forbidden: &'a VertexSet,
    cover: Vec<Edge>,
    opts: &'a BranchOptions,
    nodes: AtomicU64,
}

/// Greedy vertex-disjoint packing of squares. `None` when some square has
/// only forbidden vertices, which no deletion can break.
fn packing(t: &BipartiteTournament, alive: &Alive, forbidden: &VertexSet) -> Option<usize> {
    let mut used = alive.clone();
    let mut count = 0;
    let mut blocked = false;
    for_each_square(t, alive, |sq| {
        let vs = sq.vertices();
        if vs.iter().all(|v| forbidden.contains(v)) {
            blocked = true;
            return false;
        }
        if vs.iter().all(|&v| used.contains(v)) {
            for v in vs {
                used.kill(v);
            }
            count += 1;
        }
        true
    });
    (!blocked).then_some(count)
}

/// Size of a greedy packing of vertex-disjoint squares that each contain a
/// non-forbidden vertex; a lower bound on any FVS avoiding `forbidden`.
pub fn squares_packing_lower_bound(t: &BipartiteTournament, forbidden: &VertexSet) -> usize {
    let alive = Alive::all(t);
    let mut used = alive.clone();
    let mut count = 0;
    for_each_square(t, &alive, |sq| {
        let vs = sq.vertices();
        if !vs.iter().all(|v| forbidden.contains(v)) && vs.iter().all(|&v| used.contains(v)) {
            for v in vs {
                used.kill(v);
            }
            count += 1;
        }
        true
    });
    count
}

impl Search<'_> {
    fn child(&self, node: &Node, v: VertexId) -> Node {
        let mut c = node.clone();
        c.alive.kill(v);
        c.sol.push(v);
        c.budget -= 1;
        c
    }

    fn branch_on(&self, node: &Node, cands: impl IntoIterator<Item = VertexId>) -> Expansion {
        let mut cands: Vec<VertexId> = cands
            .into_iter()
            .filter(|v| !self.forbidden.contains(v))
            .collect();
        cands.sort();
        cands.dedup();
        if cands.is_empty() || node.budget == 0 {
            return Expansion::Leaf(Outcome::Exhausted);
        }
        Expansion::Children(cands.into_iter().map(|v| self.child(node, v)).collect())
    }

    fn expand(&self, node: &Node) -> Expansion {
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        if self.opts.node_limit.is_some_and(|lim| n > lim) {
            return Expansion::Leaf(Outcome::Aborted);
        }
        if let Some(e) = self
            .cover
            .iter()
            .find(|e| !node.sol.contains(&e.from) && !node.sol.contains(&e.to))
        {
            return self.branch_on(node, [e.from, e.to]);
        }
        let mut node = node.clone();
        if self.opts.reduce {
            reduce_alive(self.t, &mut node.alive, node.budget, None);
        }
        match packing(self.t, &node.alive, self.forbidden) {
            None => return Expansion::Leaf(Outcome::Exhausted),
            Some(lb) if lb > node.budget => return Expansion::Leaf(Outcome::Exhausted),
            _ => {}
        }
        match first_square(self.t, &node.alive) {
            None => Expansion::Leaf(Outcome::Found(node.sol)),
            Some(sq) => self.branch_on(&node, sq.vertices()),
        }
    }

    fn dfs(&self, node: &Node) -> Outcome {
        match self.expand(node) {
            Expansion::Leaf(o) => o,
            Expansion::Children(cs) => {
                for c in &cs {
                    match self.dfs(c) {
                        Outcome::Exhausted => continue,
                        o => return o,
                    }
                }
                Outcome::Exhausted
            }
        }
    }

    /// Splits the top of the tree into a frontier in preorder, then searches
    /// the frontier in parallel and keeps the first success in that order.
    fn parallel(&self, root: Node, workers: usize) -> Outcome {
        enum Item {
            Open(Node),
            Done(Outcome),
        }
        let mut frontier = vec![Item::Open(root)];
        while frontier.len() < 4 * workers && frontier.iter().any(|i| matches!(i, Item::Open(_))) {
            let mut next = Vec::with_capacity(frontier.len() * 4);
            for item in frontier {
                match item {
                    Item::Open(node) => match self.expand(&node) {
                        Expansion::Leaf(o) => next.push(Item::Done(o)),
                        Expansion::Children(cs) => next.extend(cs.into_iter().map(Item::Open)),
                    },
                    done => next.push(done),
                }
            }
            frontier = next;
        }
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build();
        let run = || {
            frontier
                .into_par_iter()
                .map(|item| match item {
                    Item::Open(node) => self.dfs(&node),
                    Item::Done(o) => o,
                })
                .find_map_first(|o| (o != Outcome::Exhausted).then_some(o))
                .unwrap_or(Outcome::Exhausted)
        };
        match pool {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }
}

pub fn branch_solve(t: &BipartiteTournament, c: &Constraints) -> Result<SolveResult, SolverError> {
    branch_solve_with(t, c, &BranchOptions::default())
}

pub fn branch_solve_with(
    t: &BipartiteTournament,
    c: &Constraints,
    opts: &BranchOptions,
) -> Result<SolveResult, SolverError> {
    c.check(t)?;
    let start = Instant::now();
    let search = Search {
        t,
        forbidden: &c.forbidden,
        cover: c
            .cover_edges
            .iter()
            .filter(|e| !c.required_in.contains(&e.from) && !c.required_in.contains(&e.to))
            .copied()
            .collect(),
        opts,
        nodes: AtomicU64::new(0),
    };
    let outcome = if c.required_in.len() > c.budget {
        Outcome::Exhausted
    } else {
        let mut alive = Alive::all(t);
        for &v in &c.required_in {
            alive.kill(v);
        }
        let root = Node {
            alive,
            sol: c.required_in.iter().copied().collect(),
            budget: c.budget - c.required_in.len(),
        };
        if opts.workers > 1 {
            search.parallel(root, opts.workers)
        } else {
            search.dfs(&root)
        }
    };
    let status = match outcome {
        Outcome::Found(sol) => {
            let s: VertexSet = sol.into_iter().collect();
            debug_assert!(c.accepts(t, &s));
            Status::Solution(s)
        }
        Outcome::Exhausted => Status::NoSolution,
        Outcome::Aborted => Status::BudgetExceeded,
    };
    Ok(SolveResult {
        status,
        stats: Stats {
            nodes: search.nodes.into_inner(),
            elapsed: start.elapsed(),
        },
    })
}

/// A minimum FVS honoring the side constraints of `c` (its budget is
/// ignored), or `None` if none exists or the node limit is hit. Raises the
/// budget from the packing bound until a solution appears.
pub fn exact_min_constrained(
    t: &BipartiteTournament,
    c: &Constraints,
    opts: &BranchOptions,
) -> Result<Option<VertexSet>, SolverError> {
    c.check(t)?;
    let mut c = c.clone();
    let max = t.len() - c.forbidden.len();
    let start = squares_packing_lower_bound(t, &c.forbidden).max(c.required_in.len());
    for k in start..=max {
        c.budget = k;
        match branch_solve_with(t, &c, opts)?.status {
            Status::Solution(s) => return Ok(Some(s)),
            Status::NoSolution => continue,
            Status::BudgetExceeded => return Ok(None),
        }
    }
    Ok(None)
}

pub fn exact_min_fvs(t: &BipartiteTournament) -> VertexSet {
    exact_min_fvs_with(t, &BranchOptions::default())
}

pub fn exact_min_fvs_with(t: &BipartiteTournament, opts: &BranchOptions) -> VertexSet {
    let opts = BranchOptions {
        node_limit: None,
        ..opts.clone()
    };
    exact_min_constrained(t, &Constraints::default(), &opts)
        .expect("unconstrained input is valid")
        .expect("deleting everything always works")
}
