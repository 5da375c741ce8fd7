//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//! Expected values come from the reference checks in `common`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use btfvs::cfvs::{
    fibonacci_branching, pipeline_solve, seed_instances, stage_decoupled, stage_lowblockdegree,
    stage_matched, stage_regular, stage_weak, to_dfvc, CfvsError, CfvsInstance, ConstantsProfile,
    PipelineOptions, Via,
};
use btfvs::dfvc::{dfvc_solve, DfvcInstance};
use btfvs::graph::{
    BipartiteTournament, Edge, MixedMultigraph, PartVertex, Side, VertexId, VertexSet,
};
use btfvs::harness::{generate, GenKind, GenSpec};
use btfvs::msequence::{
    back_edges, classify, m_sequence, m_sequence_within, BackEdgeKind, Classification,
};
use btfvs::sample_space::twise_space;
use btfvs::solvers::{
    approx4, approx_fvs, branch_solve_with, exact_min_constrained, exact_min_fvs_with,
    oracle_min_fvs, reduce, Approx, BranchOptions, Constraints, Status,
};
use btfvs::structure::{canonical_sequence, is_acyclic};
use common::*;
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        ok,
        detail: detail.into(),
    }
}

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xB7F5_0000 + criterion)
}

fn subset(rng: &mut ChaCha8Rng, from: &[VertexId], p: f64) -> VertexSet {
    from.iter().filter(|_| rng.gen_bool(p)).copied().collect()
}

fn nonempty_subset(rng: &mut ChaCha8Rng, from: &[VertexId], max: usize) -> VertexSet {
    let size = rng.gen_range(1..=max.min(from.len()));
    from.choose_multiple(rng, size).copied().collect()
}

/// Random `T` and nonempty `M` with `T` M-consistent.
fn consistent_pair(
    rng: &mut ChaCha8Rng,
    max_side: usize,
    max_m: usize,
) -> (BipartiteTournament, VertexSet) {
    loop {
        let (m, n) = (rng.gen_range(1..=max_side), rng.gen_range(1..=max_side));
        let t = random_tournament(rng, m, n);
        let all = all_vertices(&t);
        let m = nonempty_subset(rng, &all, max_m);
        if m_consistent(&t, &m, &all.iter().copied().collect()) {
            return (t, m);
        }
    }
}

fn to_relation(c: Classification) -> Relation {
    match c {
        Classification::Equivalent(i) => Relation::Equivalent(i),
        Classification::Conflicting(i) => Relation::Conflicting(i),
        Classification::UniversalMinus => Relation::UniversalMinus,
        Classification::UniversalPlus => Relation::UniversalPlus,
    }
}

fn blocks_of(seq: &btfvs::msequence::MSequence) -> Vec<(VertexSet, VertexSet)> {
    seq.blocks
        .iter()
        .map(|b| (b.x.clone(), b.y.clone()))
        .collect()
}

fn acyclic_order(rng: &mut ChaCha8Rng, m: usize, n: usize) -> BipartiteTournament {
    let mut pos: Vec<usize> = (0..m + n).collect();
    pos.shuffle(rng);
    BipartiteTournament::from_fn(m, n, |i, j| pos[i] < pos[m + j])
}

// ---- 1 ----

/// Both acyclicity checks must say the opposite of the square search.
fn agrees(t: &BipartiteTournament) -> bool {
    let square = has_square(t);
    is_acyclic(t) != square && acyclic(t) != square
}

fn acyclic_iff_square_free() -> Verdict {
    let mut bad = 0;
    let mut exhaustive = 0;
    for m in 1..=3 {
        for n in 1..=3 {
            for mask in 0u32..1 << (m * n) {
                exhaustive += 1;
                bad += !agrees(&BipartiteTournament::from_fn(m, n, |i, j| {
                    mask >> (i * n + j) & 1 == 1
                })) as usize;
            }
        }
    }
    let mut r = rng(1);
    let seeded = 1200;
    for i in 0..seeded {
        let (m, n) = (r.gen_range(1..=8), r.gen_range(1..=8));
        // half the draws are acyclic, so both directions get exercised
        let t = if i % 2 == 0 {
            random_tournament(&mut r, m, n)
        } else {
            acyclic_order(&mut r, m, n)
        };
        bad += !agrees(&t) as usize;
    }
    verdict(
        bad == 0,
        format!("{exhaustive} exhaustive + {seeded} seeded, {bad} mismatches"),
    )
}

// ---- 2, 3 ----

struct SolverCase {
    t: BipartiteTournament,
    opt: usize,
}

fn solver_cases() -> Vec<SolverCase> {
    let mut r = rng(2);
    (0..520)
        .map(|_| {
            let (m, n) = (r.gen_range(1..=8), r.gen_range(1..=8));
            let t = random_tournament(&mut r, m, n);
            let opt = min_fvs(&t);
            SolverCase { t, opt }
        })
        .collect()
}

fn random_constraints(r: &mut ChaCha8Rng, t: &BipartiteTournament) -> Constraints {
    let all = all_vertices(t);
    let forbidden = subset(r, &all, 0.15);
    let rest: Vec<VertexId> = all
        .iter()
        .filter(|v| !forbidden.contains(v))
        .copied()
        .collect();
    let required_in = subset(r, &rest, 0.1);
    let cover_edges = t
        .arcs()
        .filter(|e| !(forbidden.contains(&e.from) && forbidden.contains(&e.to)))
        .filter(|_| r.gen_bool(0.05))
        .collect();
    Constraints {
        forbidden,
        required_in,
        cover_edges,
        budget: t.len(),
    }
}

fn solvers_match_oracle(cases: &[SolverCase]) -> Verdict {
    let mut r = rng(22);
    let opts = BranchOptions::default();
    let mut bad = Vec::new();
    let mut constrained = 0;
    let mut infeasible = 0;
    for (i, case) in cases.iter().enumerate() {
        let t = &case.t;
        let none = VertexSet::new();
        let no_cover = BTreeSet::new();
        let valid = |s: &VertexSet| is_solution(t, s, &none, &none, &no_cover);

        let oracle = oracle_min_fvs(t, None)
            .ok()
            .and_then(|r| r.solution().cloned());
        if oracle
            .as_ref()
            .is_none_or(|s| s.len() != case.opt || !valid(s))
        {
            bad.push(format!("#{i} oracle"));
        }
        let exact = exact_min_fvs_with(t, &opts);
        if exact.len() != case.opt || !valid(&exact) {
            bad.push(format!("#{i} exact"));
        }
        let at =
            |k: usize| branch_solve_with(t, &Constraints::with_budget(k), &opts).map(|r| r.status);
        match at(case.opt) {
            Ok(Status::Solution(s)) if s.len() <= case.opt && valid(&s) => {}
            _ => bad.push(format!("#{i} branch at k=opt")),
        }
        if case.opt > 0 && at(case.opt - 1) != Ok(Status::NoSolution) {
            bad.push(format!("#{i} branch at k=opt-1"));
        }

        let c = random_constraints(&mut r, t);
        constrained += 1;
        let expect = min_solution(t, &c.forbidden, &c.required_in, &c.cover_edges);
        infeasible += expect.is_none() as usize;
        let valid_c =
            |s: &VertexSet| is_solution(t, s, &c.forbidden, &c.required_in, &c.cover_edges);
        let oracle = oracle_min_fvs(t, Some(&c)).map(|r| r.solution().cloned());
        match (&oracle, expect) {
            (Ok(Some(s)), Some(k)) if s.len() == k && valid_c(s) => {}
            (Ok(None), None) => {}
            _ => bad.push(format!(
                "#{i} constrained oracle {:?} vs {expect:?}",
                oracle.map(|s| s.map(|s| s.len()))
            )),
        }
        match (exact_min_constrained(t, &c, &opts), expect) {
            (Ok(Some(s)), Some(k)) if s.len() == k && valid_c(&s) => {}
            (Ok(None), None) => {}
            (got, _) => bad.push(format!("#{i} constrained exact {got:?} vs {expect:?}")),
        }
        let at = |k: usize| {
            let mut c = c.clone();
            c.budget = k;
            branch_solve_with(t, &c, &opts).map(|r| r.status)
        };
        match expect {
            Some(k) => {
                match at(k) {
                    Ok(Status::Solution(s)) if s.len() <= k && valid_c(&s) => {}
                    other => bad.push(format!("#{i} constrained branch at opt: {other:?}")),
                }
                if k > c.required_in.len() && at(k - 1) != Ok(Status::NoSolution) {
                    bad.push(format!("#{i} constrained branch at opt-1"));
                }
            }
            None => {
                if at(t.len()) != Ok(Status::NoSolution) {
                    bad.push(format!("#{i} constrained branch on infeasible input"));
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{} instances, {constrained} constrained ({infeasible} infeasible), {} mismatches{}",
            cases.len(),
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

fn approx_ratio(cases: &[SolverCase]) -> Verdict {
    let mut bad = 0;
    let mut worst = 0f64;
    let none = VertexSet::new();
    let no_cover = BTreeSet::new();
    for case in cases {
        let t = &case.t;
        let s = approx_fvs(t);
        let ok = is_solution(t, &s, &none, &none, &no_cover) && s.len() <= 4 * case.opt;
        let ok = ok
            && match approx4(t, case.opt) {
                Approx::Fvs(s4) => {
                    s4.len() <= 4 * case.opt && is_solution(t, &s4, &none, &none, &no_cover)
                }
                Approx::TooBig => false,
            };
        bad += !ok as usize;
        if case.opt > 0 {
            worst = worst.max(s.len() as f64 / case.opt as f64);
        }
    }
    let square =
        BipartiteTournament::new(2, 2, vec![vec![true, false], vec![false, true]]).unwrap();
    let s = approx_fvs(&square);
    let ratio = s.len() as f64 / min_fvs(&square) as f64;
    verdict(
        bad == 0 && ratio == 4.0,
        format!(
            "{} instances, {bad} violations, worst ratio {worst:.2}, single square ratio {ratio}",
            cases.len()
        ),
    )
}

// ---- 4 ----

fn canonical_and_refinement() -> Verdict {
    let mut r = rng(4);
    let mut bad = Vec::new();
    let cases = 1100;
    for i in 0..cases {
        let (m, n) = (r.gen_range(1..=8), r.gen_range(0..=8));
        let t = acyclic_order(&mut r, m, n);
        let all = all_vertices(&t);
        let everything: VertexSet = all.iter().copied().collect();
        let layers = peel(&t, &everything).expect("acyclic by construction");
        let Ok(canon) = canonical_sequence(&t) else {
            bad.push(format!("#{i} no canonical sequence"));
            continue;
        };
        if canon.sets != layers {
            bad.push(format!("#{i} canonical sequence differs from peeling"));
        }
        // partition
        let flat: Vec<VertexId> = canon.sets.iter().flatten().copied().collect();
        let distinct: VertexSet = flat.iter().copied().collect();
        if flat.len() != all.len()
            || distinct != everything
            || canon.sets.iter().any(|s| s.is_empty())
        {
            bad.push(format!("#{i} not a partition"));
        }
        // arcs go forward
        let layer_of: BTreeMap<VertexId, usize> = canon
            .sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&v| (v, i)))
            .collect();
        if t.arcs().any(|e| layer_of[&e.from] >= layer_of[&e.to]) {
            bad.push(format!("#{i} backward arc"));
        }
        // alternating sides
        let sides: Vec<Option<Side>> = canon
            .sets
            .iter()
            .map(|s| s.iter().map(|v| v.side).all_equal_value().ok())
            .collect();
        if sides.iter().any(Option::is_none) || sides.windows(2).any(|w| w[0] == w[1]) {
            bad.push(format!("#{i} layers do not alternate sides"));
        }

        let m = nonempty_subset(&mut r, &all, all.len());
        let expect = common::m_sequence(&t, &m, &everything);
        let got = m_sequence(&t, &m).ok().map(|s| blocks_of(&s));
        if got.is_none() || got != expect {
            bad.push(format!("#{i} M-sequence differs from definition"));
            continue;
        }
        let subs: Vec<&VertexSet> = got
            .iter()
            .flatten()
            .flat_map(|(x, y)| [x, y])
            .filter(|s| !s.is_empty())
            .collect();
        let refines = layers
            .iter()
            .all(|v| subs.iter().all(|s| v.is_subset(s) || v.is_disjoint(s)));
        if !refines {
            bad.push(format!(
                "#{i} canonical sequence does not refine the M-sequence"
            ));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{cases} acyclic instances, {} violations{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 5 ----

fn classification() -> Verdict {
    let mut r = rng(5);
    let mut bad = Vec::new();
    let mut tally: BTreeMap<&str, usize> = BTreeMap::new();
    let pairs = 1100;
    for i in 0..pairs {
        let (t, m) = consistent_pair(&mut r, 6, 5);
        let layers = peel(&t, &m).expect("T[M] acyclic");
        for v in all_vertices(&t) {
            let rel = relations(&t, &m, &layers, v);
            if rel.len() != 1 {
                bad.push(format!("#{i} {v} has relations {rel:?}"));
                continue;
            }
            let name = match rel[0] {
                Relation::Equivalent(_) => "equivalent",
                Relation::Conflicting(_) => "conflicting",
                Relation::UniversalMinus => "universal-",
                Relation::UniversalPlus => "universal+",
            };
            *tally.entry(name).or_default() += 1;
            match classify(&t, &m, v) {
                Ok(c) if to_relation(c) == rel[0] => {}
                other => bad.push(format!(
                    "#{i} {v}: classify {other:?}, definition {:?}",
                    rel[0]
                )),
            }
        }
        let everything = all_vertices(&t).into_iter().collect();
        if m_sequence(&t, &m).ok().map(|s| blocks_of(&s)) != common::m_sequence(&t, &m, &everything)
        {
            bad.push(format!("#{i} M-sequence differs from definition"));
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{pairs} M-consistent pairs, classes {tally:?}, {} violations{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 6 ----

fn insertion_and_adjustment() -> Verdict {
    let mut r = rng(6);
    let mut bad = Vec::new();
    let (mut splits, mut adjusts) = (0, 0);
    for i in 0..1000 {
        let (t, m) = consistent_pair(&mut r, 6, 5);
        let layers = peel(&t, &m).expect("T[M] acyclic");
        let everything: VertexSet = all_vertices(&t).into_iter().collect();
        let full = m_sequence_within(&t, &m, &everything)
            .ok()
            .map(|s| blocks_of(&s));
        for v in everything.iter().copied().filter(|v| !m.contains(v)) {
            if let Ok(Classification::Conflicting(c)) = classify(&t, &m, v) {
                splits += 1;
                let mut mv = m.clone();
                mv.insert(v);
                let ok = peel(&t, &mv).is_some_and(|ext| {
                    ext.len() == layers.len() + 2
                        && ext[..c] == layers[..c]
                        && ext[c + 1] == VertexSet::from([v])
                        && !ext[c].is_empty()
                        && !ext[c + 2].is_empty()
                        && ext[c].union(&ext[c + 2]).copied().collect::<VertexSet>() == layers[c]
                        && ext[c + 3..] == layers[c + 1..]
                });
                if !ok {
                    bad.push(format!("#{i} insertion of {v}"));
                }
            }

            adjusts += 1;
            let without: VertexSet = everything.iter().filter(|&&u| u != v).copied().collect();
            let before = m_sequence_within(&t, &m, &without)
                .ok()
                .map(|s| blocks_of(&s));
            let (Some(before), Some(after)) = (before, full.clone()) else {
                bad.push(format!("#{i} missing M-sequence around {v}"));
                continue;
            };
            let mut changed = Vec::new();
            for (k, (b, a)) in before.iter().zip(&after).enumerate() {
                if b.0 != a.0 {
                    changed.push((k, 'x', &b.0, &a.0));
                }
                if b.1 != a.1 {
                    changed.push((k, 'y', &b.1, &a.1));
                }
            }
            let ok = before.len() == after.len()
                && changed.len() == 1
                && changed.iter().all(|(_, _, b, a)| {
                    let mut grown = (*b).clone();
                    grown.insert(v);
                    &grown == *a
                });
            if !ok {
                bad.push(format!("#{i} adjusting by {v}"));
            }
        }
    }
    verdict(
        bad.is_empty() && splits > 0,
        format!(
            "{splits} insertions, {adjusts} adjustments, {} violations{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 7 ----

fn long_back_edges() -> Verdict {
    let mut r = rng(7);
    let mut bad = Vec::new();
    let (mut with_long, mut solutions, mut cases) = (0, 0, 0);
    // long back edges are rare, so keep drawing until enough instances have one
    while (cases < 240 || with_long < 100) && cases < 5000 {
        let i = cases;
        cases += 1;
        // an acyclic order with a few arcs flipped has many blocks and some back edges
        let (t, m) = loop {
            let (m, n) = (r.gen_range(2..=6), r.gen_range(2..=6));
            let base = acyclic_order(&mut r, m, n);
            let mut rows = base.orient_rows();
            for _ in 0..r.gen_range(1..=4) {
                let (i, j) = (r.gen_range(0..m), r.gen_range(0..n));
                rows[i][j] = !rows[i][j];
            }
            let t = BipartiteTournament::new(m, n, rows).unwrap();
            let all = all_vertices(&t);
            let mm = subset(&mut r, &all, 0.6);
            if !mm.is_empty() && m_consistent(&t, &mm, &all.iter().copied().collect()) {
                break (t, mm);
            }
        };
        let everything: VertexSet = all_vertices(&t).into_iter().collect();
        let Ok(seq) = m_sequence(&t, &m) else {
            bad.push(format!("#{i} no M-sequence"));
            continue;
        };
        if Some(blocks_of(&seq)) != common::m_sequence(&t, &m, &everything) {
            bad.push(format!("#{i} M-sequence differs from definition"));
            continue;
        }
        let long: BTreeSet<Edge> = t
            .arcs()
            .filter(|e| seq.block_of(e.from).unwrap() >= seq.block_of(e.to).unwrap() + 2)
            .collect();
        let reported: BTreeSet<Edge> = back_edges(&t, &seq)
            .iter()
            .filter(|e| e.kind == BackEdgeKind::Long)
            .map(|e| e.edge())
            .collect();
        if long != reported {
            bad.push(format!(
                "#{i} long back edges {reported:?}, expected {long:?}"
            ));
        }
        with_long += !long.is_empty() as usize;
        for h in all_solutions(&t, &m, &VertexSet::new(), &BTreeSet::new(), t.len()) {
            solutions += 1;
            if !long
                .iter()
                .all(|e| h.contains(&e.from) || h.contains(&e.to))
            {
                bad.push(format!("#{i} FVS {h:?} misses a long back edge"));
            }
        }
    }
    verdict(
        bad.is_empty() && with_long >= 100,
        format!(
            "{cases} instances ({with_long} with long back edges), {solutions} M-disjoint FVSs, {} violations{}",
            bad.len(),
            bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()
        ),
    )
}

// ---- 8 ----

fn sample_space() -> Verdict {
    let mut bad = Vec::new();
    let mut spaces = 0;
    for n in 1..=5usize {
        for t in 1..=2usize.min(n) {
            for q in [2usize, 3] {
                spaces += 1;
                let Ok(space) = twise_space(n, t, q) else {
                    bad.push(format!("n={n} t={t} q={q}: not built"));
                    continue;
                };
                let m = space.extension;
                if q.pow(m) < n || space.len() != q.pow(m * t as u32) {
                    bad.push(format!(
                        "n={n} t={t} q={q}: {} functions over GF({q}^{m})",
                        space.len()
                    ));
                }
                if space
                    .functions
                    .iter()
                    .any(|f| f.len() != n || f.iter().any(|&x| x as usize >= q))
                {
                    bad.push(format!("n={n} t={t} q={q}: malformed function"));
                }
                let cells = q.pow(t as u32);
                for pos in (0..n).combinations(t) {
                    let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
                    for f in &space.functions {
                        *counts
                            .entry(pos.iter().map(|&i| f[i]).collect())
                            .or_default() += 1;
                    }
                    if counts.len() != cells || counts.values().any(|&c| c * cells != space.len()) {
                        bad.push(format!("n={n} t={t} q={q}: positions {pos:?} not uniform"));
                    }
                }
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("{spaces} spaces, {} violations {bad:?}", bad.len()),
    )
}

// ---- 9 ----

fn conflict_graph(r: &mut ChaCha8Rng, shape: usize) -> Vec<Edge> {
    let len = r.gen_range(1..=20usize);
    match shape {
        0 => (0..len)
            .map(|i| {
                if i % 2 == 0 {
                    Edge::new(VertexId::a(i / 2), VertexId::b(i / 2))
                } else {
                    Edge::new(VertexId::b(i / 2), VertexId::a(i / 2 + 1))
                }
            })
            .collect(),
        1 => (0..len)
            .map(|j| Edge::new(VertexId::a(0), VertexId::b(j)))
            .collect(),
        _ => (0..len)
            .map(|_| {
                Edge::new(
                    VertexId::a(r.gen_range(0..6)),
                    VertexId::b(r.gen_range(0..6)),
                )
            })
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
    }
}

fn fibonacci_leaves() -> Verdict {
    let mut r = rng(9);
    let mut bad = Vec::new();
    let mut leaves_total = 0;
    let mut tightest = 0f64;
    let graphs = 450;
    for g in 0..graphs {
        let edges = conflict_graph(&mut r, g % 3);
        let leaves = fibonacci_branching(&edges, &VertexSet::new(), edges.len());
        leaves_total += leaves.len();
        let mut by_size: BTreeMap<usize, u64> = BTreeMap::new();
        for l in &leaves {
            *by_size.entry(l.len()).or_default() += 1;
            let left: Vec<&Edge> = edges
                .iter()
                .filter(|e| !l.contains(&e.from) && !l.contains(&e.to))
                .collect();
            let ends: Vec<VertexId> = left.iter().flat_map(|e| [e.from, e.to]).collect();
            if ends.iter().collect::<BTreeSet<_>>().len() != ends.len() {
                bad.push(format!("graph {g}: leaf {l:?} leaves a non-matching"));
            }
        }
        if leaves.iter().collect::<BTreeSet<_>>().len() != leaves.len() {
            bad.push(format!("graph {g}: repeated leaf"));
        }
        for (&s, &count) in &by_size {
            tightest = tightest.max(count as f64 / fib(s + 2) as f64);
            if count > fib(s + 2) {
                bad.push(format!(
                    "graph {g}: {count} leaves of size {s} > Fib({})",
                    s + 2
                ));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{graphs} graphs, {leaves_total} leaves, max count/Fib(s+2) {tightest:.3}, {} violations{}",
            bad.len(),
            bad.first().map(|b| format!(", first: {b}")).unwrap_or_default()
        ),
    )
}

// ---- 10 ----

type Stage = fn(&CfvsInstance, &ConstantsProfile) -> Result<Vec<CfvsInstance>, CfvsError>;

const STAGES: [(&str, Stage); 5] = [
    ("regular", stage_regular),
    ("weak", stage_weak),
    ("matched", stage_matched),
    ("lowblockdegree", stage_lowblockdegree),
    ("decoupled", stage_decoupled),
];

fn solves(t: &BipartiteTournament, inst: &CfvsInstance, h: &VertexSet) -> bool {
    h.len() <= inst.k && is_solution(t, h, &inst.m, &inst.p, &inst.f)
}

fn child_solutions(t: &BipartiteTournament, c: &CfvsInstance) -> Vec<VertexSet> {
    all_solutions(t, &c.m, &c.p, &c.f, c.k)
}

fn pipeline_soundness() -> Verdict {
    let profile = ConstantsProfile::toy();
    let runs = 220u64;
    let results: Vec<(BTreeMap<&str, usize>, Vec<String>)> = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut r = ChaCha8Rng::seed_from_u64(0xB7F5_0010 ^ run << 8);
            let (m, n) = (r.gen_range(2..=5), r.gen_range(2..=5));
            let t = random_tournament(&mut r, m, n);
            let k = min_fvs(&t) + r.gen_range(0..=1);
            let mut checked: BTreeMap<&str, usize> = BTreeMap::new();
            let mut bad = Vec::new();
            let root = CfvsInstance::new(
                Arc::new(t.clone()),
                VertexSet::new(),
                VertexSet::new(),
                BTreeSet::new(),
                k,
            );
            let Ok(seeds) = seed_instances(Arc::new(t.clone()), k, &profile) else {
                return (checked, bad);
            };
            let mut frontier: Vec<CfvsInstance> =
                seeds.choose_multiple(&mut r, 6).cloned().collect();
            for seed in &frontier {
                for h in child_solutions(&t, seed) {
                    *checked.entry("seeds").or_default() += 1;
                    if !solves(&t, &root, &h) {
                        bad.push(format!("run {run} seeds: {h:?}"));
                    }
                }
            }
            for (name, stage) in STAGES {
                let mut next = Vec::new();
                for parent in &frontier {
                    let Ok(family) = stage(parent, &profile) else {
                        continue;
                    };
                    for child in family.choose_multiple(&mut r, 4) {
                        for h in child_solutions(&t, child) {
                            *checked.entry(name).or_default() += 1;
                            if !solves(&t, parent, &h) {
                                bad.push(format!("run {run} {name}: {h:?}"));
                            }
                        }
                        next.push(child.clone());
                    }
                }
                frontier = next;
            }
            for inst in &frontier {
                let Ok(red) = to_dfvc(inst, &profile) else {
                    continue;
                };
                let d = &red.instance;
                let oracle = Dfvc {
                    parts: d.graph.parts(),
                    undirected: d.graph.undirected(),
                    forbidden: &d.forbidden,
                    internal_cover: &d.internal_cover,
                };
                for s in oracle.solutions(d.budget) {
                    *checked.entry("dfvc").or_default() += 1;
                    let h = red.lift(&s);
                    if !solves(&t, inst, &h) {
                        bad.push(format!("run {run} dfvc: {h:?}"));
                    }
                }
            }
            (checked, bad)
        })
        .collect();
    let mut checked: BTreeMap<&str, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for (c, b) in results {
        for (k, v) in c {
            *checked.entry(k).or_default() += v;
        }
        bad.extend(b);
    }
    let covered = [
        "seeds",
        "regular",
        "weak",
        "matched",
        "lowblockdegree",
        "decoupled",
        "dfvc",
    ]
    .iter()
    .all(|s| checked.get(s).is_some_and(|&c| c > 0));
    verdict(
        bad.is_empty() && covered,
        format!(
            "{runs} runs, lifted solutions checked per stage {checked:?}, {} violations{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 11 ----

fn pipeline_end_to_end() -> Verdict {
    let profile = ConstantsProfile::toy();
    let opts = PipelineOptions::default();
    let instances = 210u64;
    let results: Vec<Result<Vec<(bool, Via)>, String>> = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut r = ChaCha8Rng::seed_from_u64(0xB7F5_0011 ^ i << 8);
            let (m, n) = (r.gen_range(2..=8), r.gen_range(2..=8));
            let t = random_tournament(&mut r, m, n);
            let opt = min_fvs(&t);
            let none = VertexSet::new();
            let mut vias = Vec::new();
            for k in [Some(opt), opt.checked_sub(1)].into_iter().flatten() {
                let out = pipeline_solve(&t, k, &profile, &opts)
                    .map_err(|e| format!("#{i} k={k}: {e}"))?;
                vias.push((k >= opt, out.via));
                match (out.result.status, k >= opt) {
                    (Status::Solution(h), true)
                        if h.len() <= k && is_solution(&t, &h, &none, &none, &BTreeSet::new()) => {}
                    (Status::NoSolution, false) => {}
                    (s, _) => return Err(format!("#{i} k={k} opt={opt}: {}", s.name())),
                }
            }
            Ok(vias)
        })
        .collect();
    let mut via: BTreeMap<String, usize> = BTreeMap::new();
    let mut bad = Vec::new();
    for r in results {
        match r {
            Ok(vs) => {
                for (yes, v) in vs {
                    let answer = if yes { "yes" } else { "no" };
                    *via.entry(format!("{answer} by {v:?}").to_lowercase())
                        .or_default() += 1;
                }
            }
            Err(e) => bad.push(e),
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{instances} instances, answers by route {via:?}, {} mismatches{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 12 ----

fn dfvc_matches_oracle() -> Verdict {
    let mut r = rng(12);
    let mut bad = Vec::new();
    let mut yes = 0;
    let cases = 260;
    for i in 0..cases {
        let count = r.gen_range(1..=3);
        let mut parts = Vec::new();
        let mut total = 0;
        for _ in 0..count {
            let (m, n) = (r.gen_range(1..=3), r.gen_range(1..=3));
            if total + m + n > 12 {
                break;
            }
            total += m + n;
            parts.push(random_tournament(&mut r, m, n));
        }
        let pv: Vec<PartVertex> = parts
            .iter()
            .enumerate()
            .flat_map(|(p, t)| {
                all_vertices(t)
                    .into_iter()
                    .map(move |v| PartVertex::new(p, v))
            })
            .collect();
        let mut used = BTreeSet::new();
        let mut undirected = Vec::new();
        for _ in 0..r.gen_range(0..=3) {
            let (u, v) = (*pv.choose(&mut r).unwrap(), *pv.choose(&mut r).unwrap());
            if u.part != v.part && !used.contains(&u) && !used.contains(&v) {
                used.extend([u, v]);
                undirected.push((u, v));
            }
        }
        let forbidden: BTreeSet<PartVertex> =
            pv.iter().filter(|_| r.gen_bool(0.15)).copied().collect();
        let internal_cover: BTreeSet<(usize, Edge)> = parts
            .iter()
            .enumerate()
            .flat_map(|(p, t)| t.arcs().map(move |e| (p, e)).collect::<Vec<_>>())
            .filter(|_| r.gen_bool(0.05))
            .collect();
        let budget = r.gen_range(0..=5);
        let oracle = Dfvc {
            parts: &parts,
            undirected: &undirected,
            forbidden: &forbidden,
            internal_cover: &internal_cover,
        };
        let expect = oracle.min();
        let inst = DfvcInstance {
            graph: MixedMultigraph::new(parts.clone(), undirected.clone()).unwrap(),
            forbidden: forbidden.clone(),
            internal_cover: internal_cover.clone(),
            budget,
        };
        match dfvc_solve(&inst) {
            Ok(res) => {
                let within = expect.is_some_and(|k| k <= budget);
                yes += within as usize;
                let sol_ok = match &res.solution {
                    Some(s) => within && Some(s.len()) == expect && oracle.accepts(s),
                    None => !within,
                };
                if res.optimum != expect || !sol_ok {
                    bad.push(format!(
                        "#{i}: optimum {:?}, expected {expect:?}",
                        res.optimum
                    ));
                }
            }
            Err(e) => bad.push(format!("#{i}: {e}")),
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{cases} mixed multigraphs ({yes} within budget), {} mismatches{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 13 ----

fn reduction_safety() -> Verdict {
    let mut r = rng(13);
    let mut bad = Vec::new();
    let mut shrunk = 0;
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    let cases = 330;
    for i in 0..cases {
        let kind = match i % 3 {
            0 => GenKind::UniformRandom,
            1 => GenKind::TwinHeavy {
                class_size: r.gen_range(2..=3),
            },
            _ => GenKind::PlantedFvs {
                k: r.gen_range(1..=3),
            },
        };
        *by_kind.entry(kind.name()).or_default() += 1;
        let t = generate(&GenSpec::new(
            r.gen_range(2..=8),
            r.gen_range(2..=8),
            kind,
            1000 + i,
        ));
        let opt = min_fvs(&t);
        let k = r.gen_range(0..=opt + 1);
        let red = reduce(&t, k);
        let kernel = &red.kernel.tournament;
        shrunk += (kernel.len() < t.len()) as usize;
        let kopt = min_fvs(kernel);
        if (opt <= k) != (kopt <= red.k) {
            bad.push(format!(
                "#{i} k={k}: opt {opt}, kernel opt {kopt} with k'={}",
                red.k
            ));
            continue;
        }
        if kopt <= red.k {
            let s = oracle_min_fvs(kernel, None).unwrap();
            let h = red.lift(s.solution().unwrap());
            let none = VertexSet::new();
            if h.len() > k || !is_solution(&t, &h, &none, &none, &BTreeSet::new()) {
                bad.push(format!("#{i} k={k}: lifted kernel solution {h:?} fails"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!(
            "{cases} instances {by_kind:?}, {shrunk} shrunk by reduction, {} mismatches{}",
            bad.len(),
            bad.first()
                .map(|b| format!(", first: {b}"))
                .unwrap_or_default()
        ),
    )
}

// ---- 14 ----

fn monotonicity() -> Verdict {
    let mut r = rng(14);
    let mut cases = 0;
    let mut counterexamples = Vec::new();
    let mut bad = Vec::new();
    let mut trials = 0;
    while cases < 520 && trials < 20_000 {
        trials += 1;
        let (m, n) = (r.gen_range(2..=5), r.gen_range(2..=5));
        let t = random_tournament(&mut r, m, n);
        let all = all_vertices(&t);
        let everything: VertexSet = all.iter().copied().collect();
        let opt = min_fvs(&t);
        let fvss = all_solutions(
            &t,
            &VertexSet::new(),
            &VertexSet::new(),
            &BTreeSet::new(),
            opt + 1,
        );
        let h = fvss.choose(&mut r).unwrap().clone();
        let rest: Vec<VertexId> = all.iter().filter(|v| !h.contains(v)).copied().collect();
        if rest.is_empty() {
            continue;
        }
        let m = nonempty_subset(&mut r, &rest, rest.len());
        let hv: Vec<VertexId> = h.iter().copied().collect();
        let p = subset(&mut r, &hv, 0.5);
        let minus_h = minus(&everything, &h);
        let minus_p = minus(&everything, &p);
        if !m_consistent(&t, &m, &minus_p) {
            continue;
        }
        cases += 1;
        let small = m_sequence_within(&t, &m, &minus_h)
            .ok()
            .map(|s| blocks_of(&s));
        let big = m_sequence_within(&t, &m, &minus_p)
            .ok()
            .map(|s| blocks_of(&s));
        if small != common::m_sequence(&t, &m, &minus_h)
            || big != common::m_sequence(&t, &m, &minus_p)
        {
            bad.push(format!("case {cases}: M-sequence differs from definition"));
            continue;
        }
        let (small, big) = (small.unwrap(), big.unwrap());
        let monotone = small.len() == big.len()
            && small
                .iter()
                .zip(&big)
                .all(|(s, b)| s.0.is_subset(&b.0) && s.1.is_subset(&b.1));
        if !monotone {
            counterexamples.push(format!("{:?} M={m:?} H={h:?} P={p:?}", t.orient_rows()));
        }
    }
    for c in counterexamples.iter().take(3) {
        println!("    counterexample: {c}");
    }
    verdict(
        bad.is_empty() && cases >= 500,
        format!(
            "empirical: {cases} cases, {} counterexamples, {} definition mismatches",
            counterexamples.len(),
            bad.len()
        ),
    )
}

fn main() -> ExitCode {
    type Check = Box<dyn FnOnce() -> Verdict>;
    let cases = Arc::new(solver_cases());
    let (c2, c3) = (cases.clone(), cases);
    let criteria: Vec<(u32, &str, Duration, Check)> = vec![
        (
            1,
            "acyclic iff square-free",
            Duration::from_secs(10),
            Box::new(acyclic_iff_square_free),
        ),
        (
            2,
            "solvers match oracle",
            Duration::from_secs(300),
            Box::new(move || solvers_match_oracle(&c2)),
        ),
        (
            3,
            "approximation ratio",
            Duration::from_secs(60),
            Box::new(move || approx_ratio(&c3)),
        ),
        (
            4,
            "canonical sequence and refinement",
            Duration::from_secs(60),
            Box::new(canonical_and_refinement),
        ),
        (
            5,
            "classification",
            Duration::from_secs(60),
            Box::new(classification),
        ),
        (
            6,
            "insertion and adjustment",
            Duration::from_secs(60),
            Box::new(insertion_and_adjustment),
        ),
        (
            7,
            "long back edges",
            Duration::from_secs(120),
            Box::new(long_back_edges),
        ),
        (
            8,
            "t-wise sample space",
            Duration::from_secs(10),
            Box::new(sample_space),
        ),
        (
            9,
            "fibonacci leaf bound",
            Duration::from_secs(60),
            Box::new(fibonacci_leaves),
        ),
        (
            10,
            "pipeline soundness",
            Duration::from_secs(300),
            Box::new(pipeline_soundness),
        ),
        (
            11,
            "pipeline end to end",
            Duration::from_secs(600),
            Box::new(pipeline_end_to_end),
        ),
        (
            12,
            "dfvc solver",
            Duration::from_secs(120),
            Box::new(dfvc_matches_oracle),
        ),
        (
            13,
            "reduction safety",
            Duration::from_secs(120),
            Box::new(reduction_safety),
        ),
        (
            14,
            "monotonicity (empirical)",
            Duration::from_secs(600),
            Box::new(monotonicity),
        ),
    ];
    let mut failed = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let took = start.elapsed();
        let ok = v.ok && took <= limit;
        failed += !ok as usize;
        let time = format!("{:.2}s of {}s", took.as_secs_f64(), limit.as_secs());
        println!(
            "criterion {n:>2} {}: {name}: {} [{time}]",
            if ok { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!("acceptance: {} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
