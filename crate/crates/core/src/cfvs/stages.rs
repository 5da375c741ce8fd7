//! The refinement stages and the structural predicates they establish.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use super::{dedup, subsets_upto, CfvsError, CfvsInstance, ConstantsProfile};
use crate::graph::{Edge, EdgeSet, Side, VertexId, VertexSet};
use crate::matching::{
    enumerate_min_vertex_covers, inconsistent_vertices, is_matching, max_bipartite_matching,
    min_vertex_cover, x_preferred_cover,
};
use crate::msequence::{back_edges, is_conflict_edge, BackEdge, BackEdgeKind, MSequence};
use crate::solvers::approx_fvs_within;

fn cap_check(stage: &'static str, size: u128, profile: &ConstantsProfile) -> Result<(), CfvsError> {
    if size > profile.family_cap as u128 {
        Err(CfvsError::FamilyCapExceeded {
            stage,
            size,
            cap: profile.family_cap,
        })
    } else {
        Ok(())
    }
}

/// Counts enumerated candidates and fails once the profile cap is passed.
struct Budget<'a> {
    stage: &'static str,
    profile: &'a ConstantsProfile,
    used: u128,
}

impl Budget<'_> {
    fn tick(&mut self) -> Result<(), CfvsError> {
        self.used += 1;
        cap_check(self.stage, self.used, self.profile)
    }
}

fn subsets<T: Clone>(items: &[T], max: usize) -> impl Iterator<Item = Vec<T>> + '_ {
    (0..=max.min(items.len())).flat_map(move |r| items.iter().cloned().combinations(r))
}

// ---- regular ----

/// Non-M vertices of large sets: `X_i` with `|X_i| >= large_ratio * |X_i & M|`
/// and `Y_i` with `|Y_i| >= large_ratio`, in the M-sequence of `T - P`.
pub fn large_sets(inst: &CfvsInstance, profile: &ConstantsProfile) -> Result<VertexSet, CfvsError> {
    let seq = inst.m_sequence()?;
    let r = profile.large_ratio;
    let mut out = VertexSet::new();
    for b in &seq.blocks {
        let mi = b.x.iter().filter(|v| inst.m.contains(v)).count();
        if b.x.len() >= r * mi {
            out.extend(b.x.iter().filter(|v| !inst.m.contains(v)).copied());
        }
        if b.y.len() >= r {
            out.extend(b.y.iter().copied());
        }
    }
    Ok(out)
}

/// Every `X_i` with at least `large_ratio` vertices has at least
/// `|X_i| / large_ratio` vertices of `M`, and every `|Y_i| <= large_ratio`.
pub fn is_regular(inst: &CfvsInstance, profile: &ConstantsProfile) -> Result<bool, CfvsError> {
    let seq = inst.m_sequence()?;
    Ok(regular_on(&seq, inst, profile))
}

fn regular_on(seq: &MSequence, inst: &CfvsInstance, profile: &ConstantsProfile) -> bool {
    let r = profile.large_ratio;
    seq.blocks.iter().all(|b| {
        let mi = b.x.iter().filter(|v| inst.m.contains(v)).count();
        (b.x.len() < r || mi * r >= b.x.len()) && b.y.len() <= r
    })
}

pub fn stage_regular(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let large: Vec<VertexId> = large_sets(inst, profile)?.into_iter().collect();
    cap_check(
        "regular",
        subsets_upto(large.len(), profile.budget_slack),
        profile,
    )?;
    let mut out = Vec::new();
    for keep in subsets(&large, profile.budget_slack) {
        let child = inst.with_p(large.iter().filter(|v| !keep.contains(v)).copied());
        if child.viable() && is_regular(&child, profile)? {
            out.push(child);
        }
    }
    Ok(dedup(out))
}

// ---- weakly coupled ----

fn pair_groups(back: &[BackEdge]) -> BTreeMap<usize, Vec<Edge>> {
    let mut groups: BTreeMap<usize, Vec<Edge>> = BTreeMap::new();
    for e in back.iter().filter(|e| e.kind == BackEdgeKind::Short) {
        groups.entry(e.to_block).or_default().push(e.edge());
    }
    groups
}

pub fn long_back(inst: &CfvsInstance) -> Result<EdgeSet, CfvsError> {
    let seq = inst.m_sequence()?;
    Ok(back_edges(&inst.tournament, &seq)
        .into_iter()
        .filter(|e| e.kind == BackEdgeKind::Long)
        .map(|e| e.edge())
        .collect())
}

/// Short back edges between consecutive block pairs whose back-edge matching
/// reaches `weak_matching`.
pub fn short_back_large(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<EdgeSet, CfvsError> {
    let seq = inst.m_sequence()?;
    let back = back_edges(&inst.tournament, &seq);
    Ok(pair_groups(&back)
        .into_values()
        .filter(|g| max_bipartite_matching(g).len() >= profile.weak_matching)
        .flatten()
        .collect())
}

/// Within `T - P`: every edge of `F` is a back edge closing a square with two
/// `M` vertices, every long back edge is in `F`, and between each pair of
/// consecutive blocks the back edges outside `F` have matching number at
/// most `weak_matching`.
pub fn is_weakly_coupled(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<bool, CfvsError> {
    let seq = inst.m_sequence()?;
    Ok(weakly_coupled_on(&seq, inst, profile))
}

fn weakly_coupled_on(seq: &MSequence, inst: &CfvsInstance, profile: &ConstantsProfile) -> bool {
    let back = back_edges(&inst.tournament, seq);
    let back_set: BTreeSet<Edge> = back.iter().map(|e| e.edge()).collect();
    let f_ok = inst
        .live_f()
        .iter()
        .all(|e| back_set.contains(e) && is_conflict_edge(&inst.tournament, &inst.m, *e));
    let long_ok = back
        .iter()
        .filter(|e| e.kind == BackEdgeKind::Long)
        .all(|e| inst.f.contains(&e.edge()));
    let residual: Vec<BackEdge> = back
        .iter()
        .filter(|e| !inst.f.contains(&e.edge()))
        .copied()
        .collect();
    let match_ok = pair_groups(&residual)
        .values()
        .all(|g| max_bipartite_matching(g).len() <= profile.weak_matching);
    f_ok && long_ok && match_ok
}

pub fn stage_weak(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let large: Vec<Edge> = short_back_large(inst, profile)?.into_iter().collect();
    let long = long_back(inst)?;
    cap_check(
        "weak",
        subsets_upto(large.len(), profile.budget_slack),
        profile,
    )?;
    let mut out = Vec::new();
    for b in subsets(&large, profile.budget_slack) {
        let child = inst.with_f(
            large
                .iter()
                .filter(|e| !b.contains(e))
                .chain(&long)
                .copied(),
        );
        if child.viable() && is_weakly_coupled(&child, profile)? {
            out.push(child);
        }
    }
    Ok(dedup(out))
}

// ---- matched ----

/// `F & E(T - P)` is a matching.
pub fn is_matched(inst: &CfvsInstance) -> bool {
    is_matching(&inst.live_f())
}

/// Branches on the smallest vertex `v` of degree at least 2: either `v` is
/// deleted, or all its neighbors are. Leaves are reached when the remaining
/// edges form a matching; a leaf is kept only if the budget can still cover
/// that matching. Vertices in `undeletable` are never deleted. Returns the
/// deleted set of every kept leaf.
pub fn fibonacci_branching(
    edges: &[Edge],
    undeletable: &VertexSet,
    budget: usize,
) -> Vec<VertexSet> {
    let mut out = Vec::new();
    fib_rec(
        edges.to_vec(),
        &mut VertexSet::new(),
        budget,
        undeletable,
        &mut out,
    );
    out
}

fn fib_rec(
    edges: Vec<Edge>,
    added: &mut VertexSet,
    budget: usize,
    undeletable: &VertexSet,
    out: &mut Vec<VertexSet>,
) {
    let mut degree: BTreeMap<VertexId, usize> = BTreeMap::new();
    for e in &edges {
        *degree.entry(e.from).or_default() += 1;
        *degree.entry(e.to).or_default() += 1;
    }
    let Some((&v, _)) = degree.iter().find(|(_, &d)| d >= 2) else {
        if edges.len() <= budget {
            out.push(added.clone());
        }
        return;
    };
    let without = |gone: &VertexSet| -> Vec<Edge> {
        edges
            .iter()
            .filter(|e| !gone.contains(&e.from) && !gone.contains(&e.to))
            .copied()
            .collect()
    };

    if budget >= 1 && !undeletable.contains(&v) {
        let gone: VertexSet = [v].into();
        added.insert(v);
        fib_rec(without(&gone), added, budget - 1, undeletable, out);
        added.remove(&v);
    }

    let nbrs: VertexSet = edges
        .iter()
        .filter(|e| e.touches(v))
        .map(|e| e.other(v))
        .collect();
    if nbrs.len() <= budget && nbrs.is_disjoint(undeletable) {
        added.extend(nbrs.iter().copied());
        fib_rec(without(&nbrs), added, budget - nbrs.len(), undeletable, out);
        for u in &nbrs {
            added.remove(u);
        }
    }
}

pub fn stage_matched(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let budget = inst.k.saturating_sub(inst.p.len());
    let leaves = fibonacci_branching(&inst.live_f(), &inst.m, budget);
    cap_check("matched", leaves.len() as u128, profile)?;
    let mut out = Vec::new();
    for added in leaves {
        let child = inst.with_p(added);
        if !child.viable() || !is_matched(&child) {
            continue;
        }
        let seq = child.m_sequence()?;
        if regular_on(&seq, &child, profile) && weakly_coupled_on(&seq, &child, profile) {
            out.push(child);
        }
    }
    Ok(dedup(out))
}

// ---- low block degree ----

fn incident_live_f(live: &[Edge], set: &VertexSet) -> usize {
    live.iter()
        .filter(|e| set.contains(&e.from) || set.contains(&e.to))
        .count()
}

fn block_set(seq: &MSequence, i: usize) -> VertexSet {
    seq.blocks[i].vertices().collect()
}

/// Every long back edge of `T - P` is in `F`, and every block meets at most
/// `block_degree` edges of `F & E(T - P)`.
pub fn is_low_block_degree(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<bool, CfvsError> {
    let seq = inst.m_sequence()?;
    Ok(low_block_degree_on(&seq, inst, profile))
}

fn low_block_degree_on(seq: &MSequence, inst: &CfvsInstance, profile: &ConstantsProfile) -> bool {
    let live = inst.live_f();
    let long_ok = back_edges(&inst.tournament, seq)
        .iter()
        .filter(|e| e.kind == BackEdgeKind::Long)
        .all(|e| inst.f.contains(&e.edge()));
    long_ok
        && (0..seq.len())
            .all(|i| incident_live_f(&live, &block_set(seq, i)) <= profile.block_degree)
}

fn all_four(seq: &MSequence, inst: &CfvsInstance, profile: &ConstantsProfile) -> bool {
    is_matching(&inst.live_f())
        && regular_on(seq, inst, profile)
        && weakly_coupled_on(seq, inst, profile)
        && low_block_degree_on(seq, inst, profile)
}

/// Each side's vertices of `set` in every order, combined across sides.
fn side_orders(set: &VertexSet) -> Vec<(Vec<VertexId>, Vec<VertexId>)> {
    let a: Vec<VertexId> = set.iter().filter(|v| v.side == Side::A).copied().collect();
    let b: Vec<VertexId> = set.iter().filter(|v| v.side == Side::B).copied().collect();
    let pa: Vec<Vec<VertexId>> = a.iter().copied().permutations(a.len()).collect();
    let pb: Vec<Vec<VertexId>> = b.iter().copied().permutations(b.len()).collect();
    pa.iter()
        .flat_map(|x| pb.iter().map(move |y| (x.clone(), y.clone())))
        .collect()
}

pub fn stage_lowblockdegree(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let seq = inst.m_sequence()?;
    let t = &inst.tournament;
    let live = inst.live_f();
    let back = back_edges(t, &seq);
    let heavy: Vec<usize> = (0..seq.len())
        .filter(|&i| incident_live_f(&live, &block_set(&seq, i)) >= profile.block_degree)
        .collect();
    let fam_cap = (2 * inst.k).div_ceil(profile.block_degree);
    let mut budget = Budget {
        stage: "lowblockdegree",
        profile,
        used: 0,
    };
    let mut out = Vec::new();

    for fam in subsets(&heavy, fam_cap) {
        let mut x = VertexSet::new();
        let mut y = VertexSet::new();
        let mut cands = VertexSet::new();
        let mut fam_vertices = VertexSet::new();
        for &i in &fam {
            x.extend(seq.blocks[i].x.iter().copied());
            y.extend(seq.blocks[i].y.iter().copied());
            fam_vertices.extend(seq.blocks[i].vertices());
            for j in i.saturating_sub(1)..=(i + 1).min(seq.len() - 1) {
                cands.extend(seq.blocks[j].x.iter().copied());
            }
            cands.extend(seq.blocks[i].y.iter().copied());
        }
        let cands: Vec<VertexId> = cands.into_iter().filter(|v| !inst.m.contains(v)).collect();
        let m_cap = 3 * profile.hom_window * fam.len();
        for m_prime in subsets(&cands, m_cap) {
            let m_prime: VertexSet = m_prime.into_iter().collect();
            let keep: VertexSet = inst.m.union(&m_prime).copied().collect();

            let mut p1: VertexSet = y.difference(&m_prime).copied().collect();
            for e in &back {
                if m_prime.contains(&e.from) {
                    p1.insert(e.to);
                }
                if m_prime.contains(&e.to) {
                    p1.insert(e.from);
                }
            }
            if !p1.is_disjoint(&keep) {
                continue;
            }
            let x_rest: VertexSet = x
                .iter()
                .filter(|v| !m_prime.contains(v) && !p1.contains(v))
                .copied()
                .collect();

            for (pa, pb) in side_orders(&m_prime) {
                let mut p2 = p1.clone();
                p2.extend(inconsistent_vertices(t, &pa, &x_rest));
                p2.extend(inconsistent_vertices(t, &pb, &x_rest));
                if !p2.is_disjoint(&keep) {
                    continue;
                }
                let gone: VertexSet = inst.p.union(&p2).copied().collect();
                let e_prime: Vec<Edge> = back
                    .iter()
                    .map(|e| e.edge())
                    .filter(|e| {
                        (x_rest.contains(&e.from) || x_rest.contains(&e.to))
                            && !gone.contains(&e.from)
                            && !gone.contains(&e.to)
                    })
                    .collect();
                let covers = enumerate_min_vertex_covers(&e_prime, &keep, profile.family_cap)
                    .map_err(|_| CfvsError::FamilyCapExceeded {
                        stage: "lowblockdegree",
                        size: profile.family_cap as u128 + 1,
                        cap: profile.family_cap,
                    })?;
                for c in covers {
                    budget.tick()?;
                    let mut p3 = p2.clone();
                    p3.extend(c);
                    let gone: VertexSet = inst.p.union(&p3).copied().collect();
                    let region: VertexSet =
                        x.union(&y).filter(|v| !gone.contains(v)).copied().collect();
                    let f_prime: Vec<Edge> = live
                        .iter()
                        .filter(|e| !gone.contains(&e.from) && !gone.contains(&e.to))
                        .filter(|e| region.contains(&e.from) || region.contains(&e.to))
                        .copied()
                        .collect();
                    let mut pick = VertexSet::new();
                    let mut blocked = false;
                    let preferred = x_preferred_cover(&f_prime, &fam_vertices);
                    for e in &f_prime {
                        let first = if preferred.contains(&e.from) {
                            e.from
                        } else {
                            e.to
                        };
                        let v = if keep.contains(&first) {
                            e.other(first)
                        } else {
                            first
                        };
                        if keep.contains(&v) {
                            blocked = true;
                            break;
                        }
                        pick.insert(v);
                    }
                    if blocked {
                        continue;
                    }
                    let child = inst.with_p(p3.into_iter().chain(pick));
                    if !child.viable() {
                        continue;
                    }
                    let cseq = child.m_sequence()?;
                    if all_four(&cseq, &child, profile) {
                        out.push(child);
                    }
                }
            }
        }
    }
    Ok(dedup(out))
}

// ---- partition and decoupled ----

/// Most parts a decoupled partition may have: `k / part_fvs_f`, plus one
/// for the trailing remainder part.
pub fn part_max(k: usize, profile: &ConstantsProfile) -> usize {
    k / profile.part_fvs_f + 1
}

fn part_full(
    inst: &CfvsInstance,
    live: &[Edge],
    part: &VertexSet,
    profile: &ConstantsProfile,
) -> bool {
    approx_fvs_within(&inst.tournament, part).len() >= 4 * profile.part_fvs_f
        || incident_live_f(live, part) >= profile.part_degree_d
}

fn partition_on(
    seq: &MSequence,
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Vec<VertexSet> {
    let live = inst.live_f();
    let mut parts = Vec::new();
    let mut cur = VertexSet::new();
    for b in &seq.blocks {
        cur.extend(b.vertices());
        if part_full(inst, &live, &cur, profile) {
            parts.push(std::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        parts.push(cur);
    }
    parts
}

/// Greedy split of `V(T) - P` into runs of consecutive blocks. A run closes
/// as soon as the 4-approximation returns at least `4 * part_fvs_f` vertices
/// on it or it meets at least `part_degree_d` edges of `F & E(T - P)`; the
/// leftover blocks form a final part.
pub fn partition_parts(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<VertexSet>, CfvsError> {
    let seq = inst.m_sequence()?;
    if !regular_on(&seq, inst, profile) {
        return Err(CfvsError::PreconditionViolated("regular"));
    }
    if !weakly_coupled_on(&seq, inst, profile) {
        return Err(CfvsError::PreconditionViolated("weakly-coupled"));
    }
    if !is_matched(inst) {
        return Err(CfvsError::PreconditionViolated("matched"));
    }
    if !low_block_degree_on(&seq, inst, profile) {
        return Err(CfvsError::PreconditionViolated("low-block-degree"));
    }
    Ok(partition_on(&seq, inst, profile))
}

/// The greedy partition of `T - P` has at most [`part_max`] parts, each a
/// run of whole consecutive blocks, every part but the last meets the
/// closing rule, and every back edge of `T - P` between two parts is in `F`.
pub fn is_decoupled(inst: &CfvsInstance, profile: &ConstantsProfile) -> Result<bool, CfvsError> {
    let seq = inst.m_sequence()?;
    Ok(decoupled_on(&seq, inst, profile))
}

fn decoupled_on(seq: &MSequence, inst: &CfvsInstance, profile: &ConstantsProfile) -> bool {
    let parts = partition_on(seq, inst, profile);
    let live = inst.live_f();
    let part_of: BTreeMap<VertexId, usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().map(move |&v| (v, i)))
        .collect();
    // each part is a contiguous run of whole blocks, in order
    let mut next_block = 0;
    for part in &parts {
        let blocks: BTreeSet<usize> = part.iter().filter_map(|&v| seq.block_of(v)).collect();
        let expect: BTreeSet<usize> = (next_block..next_block + blocks.len()).collect();
        if blocks != expect || blocks.iter().any(|&i| !block_set(seq, i).is_subset(part)) {
            return false;
        }
        next_block += blocks.len();
    }
    let closing_ok = parts[..parts.len().saturating_sub(1)]
        .iter()
        .all(|p| part_full(inst, &live, p, profile));
    let cross_ok = back_edges(&inst.tournament, seq)
        .iter()
        .filter(|e| part_of[&e.from] != part_of[&e.to])
        .all(|e| inst.f.contains(&e.edge()));
    parts.len() <= part_max(inst.k, profile) && closing_ok && cross_ok
}

pub fn stage_decoupled(
    inst: &CfvsInstance,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let parts = partition_parts(inst, profile)?;
    let seq = inst.m_sequence()?;
    let part_of: BTreeMap<VertexId, usize> = parts
        .iter()
        .enumerate()
        .flat_map(|(i, p)| p.iter().map(move |&v| (v, i)))
        .collect();
    let j: Vec<Edge> = back_edges(&inst.tournament, &seq)
        .iter()
        .filter(|e| part_of[&e.from] != part_of[&e.to])
        .map(|e| e.edge())
        .collect();
    let b_cap = 2 * parts.len() * profile.simple_back;
    let mut budget = Budget {
        stage: "decoupled",
        profile,
        used: 0,
    };
    cap_check("decoupled", subsets_upto(j.len(), b_cap), profile)?;
    let mut out = Vec::new();
    for b in subsets(&j, b_cap) {
        let jb: Vec<Edge> = j.iter().filter(|e| !b.contains(e)).copied().collect();
        let d: Vec<VertexId> = min_vertex_cover(&jb).into_iter().collect();
        cap_check(
            "decoupled",
            budget.used.saturating_add(1u128 << d.len().min(127)),
            profile,
        )?;
        for c in subsets(&d, d.len()) {
            budget.tick()?;
            let c: VertexSet = c.into_iter().collect();
            let mut pc = c.clone();
            for e in &jb {
                for (u, w) in [(e.from, e.to), (e.to, e.from)] {
                    if d.contains(&u) && !c.contains(&u) {
                        pc.insert(w);
                    }
                }
            }
            if !pc.is_disjoint(&inst.m) {
                continue;
            }
            let child = inst.with_p(pc);
            if !child.viable() {
                continue;
            }
            let cseq = child.m_sequence()?;
            if all_four(&cseq, &child, profile) && decoupled_on(&cseq, &child, profile) {
                out.push(child);
            }
        }
    }
    Ok(dedup(out))
}
