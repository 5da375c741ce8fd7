//! Property checks over generated instances, with optional fault injection.

use std::collections::BTreeMap;
use std::sync::Arc;

use itertools::Itertools;
use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::gen::{generate, rng_for, GenKind, GenSpec};
use crate::cfvs::{
    derive_forced_p, fibonacci_branching, seed_instances, stage_decoupled, stage_lowblockdegree,
    stage_matched, stage_regular, stage_weak, CfvsError, CfvsInstance, ConstantsProfile,
};
use crate::graph::{BipartiteTournament, Edge, VertexId, VertexSet};
use crate::io::{instance_value, InstanceFile};
use crate::msequence::{back_edges, classify, m_sequence_within, BackEdgeKind, Classification};
use crate::sample_space::twise_space;
use crate::solvers::{
    approx_fvs, branch_solve, oracle_min_fvs, reduce, verify_fvs, Constraints, Status,
};
use crate::structure::{canonical_sequence, canonical_sequence_within, find_square, is_acyclic};

/// Deliberate bugs the suite must catch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Report every tournament as having the opposite acyclicity.
    InvertAcyclic,
    /// Report one vertex fewer than the true approximate FVS.
    ShrinkApprox,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Random instances per property.
    pub instances: usize,
    /// Largest side size of random instances.
    pub max_side: usize,
    pub profile: ConstantsProfile,
    pub faults: Vec<Fault>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0,
            instances: 100,
            max_side: 5,
            profile: ConstantsProfile::toy(),
            faults: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// The property has no proof behind it; failures are findings, not bugs.
    pub empirical: bool,
    pub counterexample: Option<Value>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub properties: Vec<PropertyResult>,
}

impl SuiteReport {
    /// All non-empirical properties hold.
    pub fn all_passed(&self) -> bool {
        self.properties.iter().all(|p| p.empirical || p.passed())
    }
}

struct Check {
    name: &'static str,
    empirical: bool,
    cases: usize,
    failures: usize,
    counterexample: Option<Value>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check {
            name,
            empirical: false,
            cases: 0,
            failures: 0,
            counterexample: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> Value) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
            if self.counterexample.is_none() {
                self.counterexample = Some(witness());
            }
        }
    }

    fn done(self) -> PropertyResult {
        PropertyResult {
            name: self.name,
            cases: self.cases,
            failures: self.failures,
            empirical: self.empirical,
            counterexample: self.counterexample,
        }
    }
}

fn witness(t: &BipartiteTournament, note: Value) -> Value {
    json!({ "instance": instance_value(&InstanceFile::new(t.clone())), "detail": note })
}

fn labels(set: &VertexSet) -> Vec<String> {
    set.iter().map(|v| v.to_string()).collect()
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    rng: ChaCha8Rng,
}

impl Ctx<'_> {
    fn fault(&self, f: Fault) -> bool {
        self.cfg.faults.contains(&f)
    }

    fn acyclic(&self, t: &BipartiteTournament) -> bool {
        is_acyclic(t) != self.fault(Fault::InvertAcyclic)
    }

    fn instance(&mut self, kind: GenKind) -> BipartiteTournament {
        let max = self.cfg.max_side.max(1);
        let m = self.rng.gen_range(1..=max);
        let n = self.rng.gen_range(1..=max);
        generate(&GenSpec::new(m, n, kind, self.rng.gen()))
    }

    fn mixed(&mut self) -> BipartiteTournament {
        let kinds = [
            GenKind::UniformRandom,
            GenKind::Acyclic,
            GenKind::PlantedFvs { k: 2 },
            GenKind::TwinHeavy { class_size: 2 },
        ];
        let kind = kinds.choose(&mut self.rng).expect("nonempty").clone();
        self.instance(kind)
    }

    fn subset(&mut self, from: &VertexSet, p: f64) -> VertexSet {
        from.iter()
            .filter(|_| self.rng.gen_bool(p))
            .copied()
            .collect()
    }

    /// A nonempty `M` with `T[M]` acyclic, drawn from `T - H` for an FVS `H`,
    /// and `P` the forced vertices, so that `T - P` is M-consistent.
    fn consistent_pair(&mut self, t: &BipartiteTournament) -> Option<(VertexSet, VertexSet)> {
        let h = approx_fvs(t);
        let rest: VertexSet = t.vertices().filter(|v| !h.contains(v)).collect();
        let mut m = self.subset(&rest, 0.5);
        if m.is_empty() {
            m.insert(*rest.iter().choose(&mut self.rng)?);
        }
        let p = derive_forced_p(t, &m);
        Some((m, p))
    }
}

fn acyclic_iff_square_free(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("acyclic_iff_square_free");
    for (m, n) in [(1, 1), (1, 2), (2, 1), (2, 2), (2, 3), (3, 2)] {
        for bits in 0u32..(1 << (m * n)) {
            let t = BipartiteTournament::from_fn(m, n, |i, j| bits >> (i * n + j) & 1 == 1);
            let ok = cx.acyclic(&t) == find_square(&t, None).is_none();
            c.record(ok, || {
                witness(&t, json!("is_acyclic disagrees with square search"))
            });
        }
    }
    for _ in 0..cx.cfg.instances {
        let t = cx.mixed();
        let ok = cx.acyclic(&t) == find_square(&t, None).is_none();
        c.record(ok, || {
            witness(&t, json!("is_acyclic disagrees with square search"))
        });
    }
    c.done()
}

fn canonical_layers(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("canonical_sequence_layers");
    for _ in 0..cx.cfg.instances {
        let t = cx.instance(GenKind::Acyclic);
        let Ok(seq) = canonical_sequence(&t) else {
            c.record(false, || {
                witness(&t, json!("acyclic instance has no canonical sequence"))
            });
            continue;
        };
        let index: BTreeMap<VertexId, usize> = seq
            .sets
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.iter().map(move |&v| (v, i)))
            .collect();
        let partition = index.len() == t.len() && seq.sets.iter().all(|s| !s.is_empty());
        let one_side = seq
            .sets
            .iter()
            .all(|s| s.iter().all(|v| v.side == s.first().unwrap().side));
        let alternating = seq
            .sets
            .windows(2)
            .all(|w| w[0].first().unwrap().side != w[1].first().unwrap().side);
        let forward = t.arcs().all(|e| index[&e.from] < index[&e.to]);
        let tight = t.vertices().filter(|v| index[v] > 0).all(|v| {
            t.in_neighbors(v, None)
                .iter()
                .any(|u| index[u] + 1 == index[&v])
        });
        c.record(
            partition && one_side && alternating && forward && tight,
            || {
                witness(
                    &t,
                    json!("canonical sequence is not a tight alternating layering"),
                )
            },
        );
    }
    c.done()
}

/// Classification from the canonical sequence of `T[M + v]`, compared with that of `T[M]`.
fn classify_by_insertion(
    t: &BipartiteTournament,
    m: &VertexSet,
    v: VertexId,
) -> Option<Classification> {
    let base = canonical_sequence_within(t, m).ok()?.sets;
    let mut mv = m.clone();
    mv.insert(v);
    let ext = canonical_sequence_within(t, &mv).ok()?.sets;
    let without_v =
        |s: &VertexSet| -> VertexSet { s.iter().filter(|&&u| u != v).copied().collect() };
    let single: VertexSet = [v].into();
    if ext.len() == base.len() {
        let i = ext.iter().position(|s| s.contains(&v))?;
        let same = ext.iter().zip(&base).all(|(e, b)| &without_v(e) == b);
        return same.then_some(Classification::Equivalent(i));
    }
    if ext.len() == base.len() + 1 {
        if ext[0] == single && ext[1..] == base[..] {
            return Some(Classification::UniversalMinus);
        }
        if ext[base.len()] == single && ext[..base.len()] == base[..] {
            return Some(Classification::UniversalPlus);
        }
        return None;
    }
    if ext.len() == base.len() + 2 {
        let i = ext.iter().position(|s| s == &single)?.checked_sub(1)?;
        let (a, b) = (&ext[i], ext.get(i + 2)?);
        let merged: VertexSet = a.union(b).copied().collect();
        let ok = ext[..i] == base[..i] && merged == base[i] && ext[i + 3..] == base[i + 1..];
        return ok.then_some(Classification::Conflicting(i));
    }
    None
}

fn classification(cx: &mut Ctx) -> [PropertyResult; 3] {
    let mut unique = Check::new("classification_unique");
    let mut insertion = Check::new("conflicting_insertion_splits_set");
    let mut adjust = Check::new("adjustment_adds_to_one_sub_block");
    for _ in 0..cx.cfg.instances {
        let t = cx.mixed();
        let Some((m, p)) = cx.consistent_pair(&t) else {
            continue;
        };
        let rest: VertexSet = t.vertices().filter(|v| !p.contains(v)).collect();
        for v in rest.iter().copied().filter(|v| !m.contains(v)) {
            let got = classify(&t, &m, v).ok();
            let expect = classify_by_insertion(&t, &m, v);
            unique.record(got.is_some() && got == expect, || {
                witness(
                    &t,
                    json!({"m": labels(&m), "v": v.to_string(), "got": got, "expected": expect}),
                )
            });
            if let Some(Classification::Conflicting(_)) = got {
                insertion.record(expect == got, || {
                    witness(&t, json!({"m": labels(&m), "v": v.to_string()}))
                });
            }
            let small: VertexSet = rest.iter().filter(|&&u| u != v).copied().collect();
            if let (Ok(before), Ok(after)) = (
                m_sequence_within(&t, &m, &small),
                m_sequence_within(&t, &m, &rest),
            ) {
                let mut diffs = 0;
                let mut grew_by_v = true;
                for (b, a) in before.blocks.iter().zip(&after.blocks) {
                    for (x, y) in [(&b.x, &a.x), (&b.y, &a.y)] {
                        if x != y {
                            diffs += 1;
                            let mut expect = x.clone();
                            expect.insert(v);
                            grew_by_v &= &expect == y;
                        }
                    }
                }
                let ok = before.len() == after.len() && diffs == 1 && grew_by_v;
                adjust.record(ok, || {
                    witness(&t, json!({"m": labels(&m), "v": v.to_string()}))
                });
            }
        }
    }
    [unique.done(), insertion.done(), adjust.done()]
}

fn refinement(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("canonical_refines_m_sequence");
    for _ in 0..cx.cfg.instances {
        let t = cx.instance(GenKind::Acyclic);
        let all = t.vertex_set();
        let mut m = cx.subset(&all, 0.4);
        if m.is_empty() {
            m.insert(t.vertex(0));
        }
        let (Ok(canon), Ok(seq)) = (canonical_sequence(&t), m_sequence_within(&t, &m, &all)) else {
            c.record(false, || {
                witness(&t, json!({"m": labels(&m), "error": "no sequence"}))
            });
            continue;
        };
        let ok = crate::msequence::is_refinement(&canon.sets, &seq.flatten()).unwrap_or(false);
        c.record(ok, || witness(&t, json!({"m": labels(&m)})));
    }
    c.done()
}

/// Every FVS of `T - P` that avoids `M` hits every long back edge.
fn long_back_edges(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("long_back_edges_are_hit");
    for _ in 0..cx.cfg.instances {
        let t = cx.mixed();
        if t.len() > 12 {
            continue;
        }
        let Some((m, p)) = cx.consistent_pair(&t) else {
            continue;
        };
        let rest: VertexSet = t.vertices().filter(|v| !p.contains(v)).collect();
        let Ok(seq) = m_sequence_within(&t, &m, &rest) else {
            continue;
        };
        let long: Vec<Edge> = back_edges(&t, &seq)
            .iter()
            .filter(|e| e.kind == BackEdgeKind::Long)
            .map(|e| e.edge())
            .collect();
        let free: Vec<VertexId> = rest.iter().filter(|v| !m.contains(v)).copied().collect();
        for mask in 0u32..(1 << free.len()) {
            let h: VertexSet = (0..free.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| free[i])
                .collect();
            let within: VertexSet = rest.iter().filter(|v| !h.contains(v)).copied().collect();
            if !crate::structure::is_acyclic_within(&t, &within) {
                continue;
            }
            let ok = long
                .iter()
                .all(|e| h.contains(&e.from) || h.contains(&e.to));
            c.record(ok, || {
                witness(
                    &t,
                    json!({"m": labels(&m), "p": labels(&p), "h": labels(&h)}),
                )
            });
        }
    }
    c.done()
}

/// With `H` an FVS, `M` inside `T - H` and `P` inside `H`, every sub-block
/// of the M-sequence of `T - H` sits inside the same sub-block for `T - P`.
fn monotonicity(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("m_sequence_monotone");
    c.empirical = true;
    for _ in 0..cx.cfg.instances {
        let t = cx.mixed();
        let Some((m, forced)) = cx.consistent_pair(&t) else {
            continue;
        };
        let h0 = approx_fvs(&t);
        let mut h: VertexSet = h0.iter().filter(|v| !m.contains(v)).copied().collect();
        h.extend(forced.iter().copied());
        if !verify_fvs(&t, &h) {
            continue;
        }
        let mut p = forced.clone();
        p.extend(cx.subset(&h, 0.5));
        let sub = |drop: &VertexSet| -> VertexSet {
            t.vertices().filter(|v| !drop.contains(v)).collect()
        };
        let (Ok(small), Ok(big)) = (
            m_sequence_within(&t, &m, &sub(&h)),
            m_sequence_within(&t, &m, &sub(&p)),
        ) else {
            continue;
        };
        let ok = small.len() == big.len()
            && small
                .blocks
                .iter()
                .zip(&big.blocks)
                .all(|(s, b)| s.x.is_subset(&b.x) && s.y.is_subset(&b.y));
        c.record(ok, || {
            witness(
                &t,
                json!({"m": labels(&m), "p": labels(&p), "h": labels(&h)}),
            )
        });
    }
    c.done()
}

fn solvers(cx: &mut Ctx) -> [PropertyResult; 3] {
    let mut branch = Check::new("branch_matches_oracle");
    let mut approx = Check::new("approx_within_four");
    let mut red = Check::new("reduction_preserves_answer");
    for _ in 0..cx.cfg.instances {
        let t = cx.mixed();
        if t.len() > 14 {
            continue;
        }
        let opt = oracle_min_fvs(&t, None)
            .ok()
            .and_then(|r| r.solution().map(|s| s.len()))
            .expect("small instance has an optimum");
        let at = |k: usize| branch_solve(&t, &Constraints::with_budget(k)).map(|r| r.status);
        let ok = matches!(at(opt), Ok(Status::Solution(_)))
            && (opt == 0 || at(opt - 1) == Ok(Status::NoSolution));
        branch.record(ok, || witness(&t, json!({"opt": opt})));

        let mut a = approx_fvs(&t);
        if cx.fault(Fault::ShrinkApprox) {
            let first = a.iter().next().copied();
            if let Some(v) = first {
                a.remove(&v);
            }
        }
        approx.record(verify_fvs(&t, &a) && a.len() <= 4 * opt, || {
            witness(&t, json!({"opt": opt, "approx": labels(&a)}))
        });

        for k in [opt.saturating_sub(1), opt] {
            let r = reduce(&t, k);
            let kopt = oracle_min_fvs(&r.kernel.tournament, None)
                .ok()
                .and_then(|x| x.solution().map(|s| s.len()))
                .expect("kernel is no larger");
            red.record((opt <= k) == (kopt <= r.k), || {
                witness(&t, json!({"k": k, "opt": opt}))
            });
        }
    }
    [branch.done(), approx.done(), red.done()]
}

fn twins(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("twins_share_no_square");
    for _ in 0..cx.cfg.instances {
        let t = cx.instance(GenKind::TwinHeavy { class_size: 2 });
        let classes = t.false_twin_classes();
        let mut ok = true;
        crate::structure::for_each_square(&t, &crate::structure::Alive::all(&t), |sq| {
            let vs = sq.vertices();
            ok &= classes
                .iter()
                .all(|cl| vs.iter().filter(|v| cl.contains(v)).count() <= 1);
            ok
        });
        c.record(ok, || witness(&t, json!("a square holds two twins")));
    }
    c.done()
}

fn sample_space(_: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("sample_space_uniform");
    for n in 1..=5 {
        for t in 1..=2usize.min(n) {
            for q in [2usize, 3] {
                let Ok(space) = twise_space(n, t, q) else {
                    c.record(false, || json!({"n": n, "t": t, "q": q}));
                    continue;
                };
                let total = space.functions.len();
                let mut ok = true;
                for pos in (0..n).combinations(t) {
                    let mut counts: BTreeMap<Vec<u32>, usize> = BTreeMap::new();
                    for f in &space.functions {
                        *counts
                            .entry(pos.iter().map(|&i| f[i]).collect())
                            .or_default() += 1;
                    }
                    let cells = q.pow(t as u32);
                    ok &= counts.len() == cells && counts.values().all(|&k| k * cells == total);
                }
                c.record(ok, || json!({"n": n, "t": t, "q": q}));
            }
        }
    }
    c.done()
}

fn fib(i: usize) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..i {
        (a, b) = (b, a + b);
    }
    a
}

fn fibonacci(cx: &mut Ctx) -> PropertyResult {
    let mut c = Check::new("fibonacci_leaf_bound");
    for trial in 0..cx.cfg.instances {
        let edges = random_conflict_graph(&mut cx.rng, trial);
        let leaves = fibonacci_branching(&edges, &VertexSet::new(), edges.len());
        let mut by_size: BTreeMap<usize, u64> = BTreeMap::new();
        for l in &leaves {
            *by_size.entry(l.len()).or_default() += 1;
        }
        let ok = by_size.iter().all(|(&s, &count)| count <= fib(s + 2));
        c.record(
            ok,
            || json!({"edges": edges.iter().map(|e| e.to_string()).collect::<Vec<_>>()}),
        );
    }
    c.done()
}

/// Paths, stars and random bipartite graphs with at most 20 edges.
pub fn random_conflict_graph(rng: &mut ChaCha8Rng, trial: usize) -> Vec<Edge> {
    let len = rng.gen_range(1..=20usize);
    match trial % 3 {
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
        _ => {
            let mut set = std::collections::BTreeSet::new();
            for _ in 0..len {
                set.insert(Edge::new(
                    VertexId::a(rng.gen_range(0..6)),
                    VertexId::b(rng.gen_range(0..6)),
                ));
            }
            set.into_iter().collect()
        }
    }
}

/// Any solution of an emitted child also solves its parent.
fn stage_backward(cx: &mut Ctx) -> PropertyResult {
    type Stage = fn(&CfvsInstance, &ConstantsProfile) -> Result<Vec<CfvsInstance>, CfvsError>;
    let stages: [(&str, Stage); 5] = [
        ("regular", stage_regular),
        ("weak", stage_weak),
        ("matched", stage_matched),
        ("lowblockdegree", stage_lowblockdegree),
        ("decoupled", stage_decoupled),
    ];
    let mut c = Check::new("stage_children_solve_parent");
    let profile = cx.cfg.profile.clone();
    for _ in 0..cx.cfg.instances / 4 + 1 {
        let t = cx.instance(GenKind::PlantedFvs { k: 2 });
        if t.len() > 12 {
            continue;
        }
        let k = oracle_min_fvs(&t, None)
            .ok()
            .and_then(|r| r.solution().map(|s| s.len()))
            .unwrap_or(0);
        let Ok(seeds) = seed_instances(Arc::new(t.clone()), k, &profile) else {
            continue;
        };
        let mut frontier: Vec<CfvsInstance> = seeds.into_iter().take(6).collect();
        for (name, stage) in stages {
            let mut next = Vec::new();
            for parent in &frontier {
                let Ok(family) = stage(parent, &profile) else {
                    continue;
                };
                for child in family.iter().take(4) {
                    let cons = Constraints {
                        forbidden: child.m.clone(),
                        required_in: child.p.clone(),
                        cover_edges: child.f.clone(),
                        budget: child.k,
                    };
                    if let Ok(r) = oracle_min_fvs(&t, Some(&cons)) {
                        if let Some(h) = r.solution() {
                            c.record(parent.is_solution(h), || {
                                witness(&t, json!({"stage": name, "h": labels(h)}))
                            });
                        }
                    }
                    next.push(child.clone());
                }
            }
            frontier = next;
        }
    }
    c.done()
}

pub fn run_lemma_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut cx = Ctx {
        cfg,
        rng: rng_for(cfg.seed, 0),
    };
    let mut properties = vec![acyclic_iff_square_free(&mut cx), canonical_layers(&mut cx)];
    properties.extend(classification(&mut cx));
    properties.push(refinement(&mut cx));
    properties.push(long_back_edges(&mut cx));
    properties.extend(solvers(&mut cx));
    properties.push(twins(&mut cx));
    properties.push(sample_space(&mut cx));
    properties.push(fibonacci(&mut cx));
    properties.push(stage_backward(&mut cx));
    properties.push(monotonicity(&mut cx));
    SuiteReport { properties }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig {
            instances: 20,
            max_side: 4,
            ..Default::default()
        }
    }

    #[test]
    fn clean_build_passes() {
        let r = run_lemma_suite(&small());
        for p in &r.properties {
            assert!(p.passed(), "{} failed: {:?}", p.name, p.counterexample);
            assert!(
                p.cases > 0 || p.name == "conflicting_insertion_splits_set",
                "{} ran no cases",
                p.name
            );
        }
    }

    #[test]
    fn inverted_acyclicity_is_caught() {
        let cfg = SuiteConfig {
            faults: vec![Fault::InvertAcyclic],
            ..small()
        };
        let r = run_lemma_suite(&cfg);
        let p = r
            .properties
            .iter()
            .find(|p| p.name == "acyclic_iff_square_free")
            .unwrap();
        assert!(!p.passed());
        assert!(p.counterexample.is_some());
        assert!(!r.all_passed());
    }
}
