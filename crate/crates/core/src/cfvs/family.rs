//! Undeletable-set families and seed instances.

use std::collections::BTreeSet;
use std::sync::Arc;

use itertools::Itertools;

use super::{subsets_upto, CfvsError, CfvsInstance, ConstantsProfile};
use crate::graph::{BipartiteTournament, EdgeSet, Side, VertexId, VertexSet};
use crate::msequence::MContext;
use crate::sample_space::{twise_space_capped, SampleSpaceError};
use crate::structure;

/// All `Z_f \ H^` where `Z_f` collects the vertices `v_i` with `f(i) = 1` for
/// each `f` of the t-wise sample space, and `|H^| <= budget_slack`.
/// Vertex `v_i` is the `i`-th vertex in `(side, index)` order.
pub fn m_family(
    t: &BipartiteTournament,
    profile: &ConstantsProfile,
) -> Result<Vec<VertexSet>, CfvsError> {
    let cap = profile.family_cap;
    if t.is_empty() {
        return Ok(vec![VertexSet::new()]);
    }
    let space = twise_space_capped(t.len(), profile.hom_window, profile.sample_q, cap as u128)
        .map_err(|e| match e {
            SampleSpaceError::TooLarge { size, .. } => CfvsError::FamilyCapExceeded {
                stage: "m_family",
                size,
                cap,
            },
            other => other.into(),
        })?;
    let zs: BTreeSet<VertexSet> = space
        .functions
        .iter()
        .map(|f| {
            (0..t.len())
                .filter(|&i| f[i] == 1)
                .map(|i| t.vertex(i))
                .collect()
        })
        .collect();
    let size: u128 = zs
        .iter()
        .map(|z| subsets_upto(z.len(), profile.budget_slack))
        .fold(0u128, |a, b| a.saturating_add(b));
    if size > cap as u128 {
        return Err(CfvsError::FamilyCapExceeded {
            stage: "m_family",
            size,
            cap,
        });
    }
    let mut out = BTreeSet::new();
    for z in &zs {
        let members: Vec<VertexId> = z.iter().copied().collect();
        for r in 0..=profile.budget_slack.min(members.len()) {
            for hat in members.iter().combinations(r) {
                let mut m = z.clone();
                for v in hat {
                    m.remove(v);
                }
                out.insert(m);
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Vertices outside `M` that close a square with three vertices of `M`,
/// i.e. those `v` with `T[M + v]` cyclic. `T[M]` must be acyclic.
pub fn derive_forced_p(t: &BipartiteTournament, m: &VertexSet) -> VertexSet {
    let Ok(ctx) = MContext::new(t, m) else {
        return VertexSet::new();
    };
    t.vertices()
        .filter(|v| !m.contains(v) && !ctx.consistent_with(*v))
        .collect()
}

/// One instance `(T, M, P, {}, k)` per usable `M` of the family, with `P`
/// the forced vertices. `M` is unusable when empty, when `T[M]` is cyclic,
/// or when more than `k` vertices are forced.
pub fn seed_instances(
    t: Arc<BipartiteTournament>,
    k: usize,
    profile: &ConstantsProfile,
) -> Result<Vec<CfvsInstance>, CfvsError> {
    let mut out = Vec::new();
    for m in m_family(&t, profile)? {
        if m.is_empty() || !structure::is_acyclic_within(&t, &m) {
            continue;
        }
        let p = derive_forced_p(&t, &m);
        if p.len() > k {
            continue;
        }
        out.push(CfvsInstance::new(t.clone(), m, p, EdgeSet::new(), k));
    }
    Ok(out)
}

/// `true` iff some topological sort of `T - H` has an `M` vertex in every run
/// of `window` consecutive same-side vertices.
///
/// Topological sorts of an acyclic bipartite tournament are exactly the
/// orders that list its canonical sets in sequence, each set in any internal
/// order. Per side, the sets are visited in order while tracking the length
/// of the trailing run without `M`. Inside a set with `c >= 1` vertices of
/// `M` and `d` others, up to `window - 1 - run` others go before its first
/// `M` vertex and up to `window - 1` between consecutive ones, and the rest
/// trail. Leaving the shortest trailing run is never worse for later sets,
/// so this greedy choice is exact.
pub fn is_m_homogeneous(
    t: &BipartiteTournament,
    m: &VertexSet,
    h: &VertexSet,
    window: usize,
) -> bool {
    if window == 0 || !m.is_disjoint(h) {
        return false;
    }
    let rest: VertexSet = t.vertices().filter(|v| !h.contains(v)).collect();
    let Ok(canon) = structure::canonical_sequence_within(t, &rest) else {
        return false;
    };
    [Side::A, Side::B].into_iter().all(|side| {
        let mut run = 0usize;
        for set in canon
            .sets
            .iter()
            .filter(|s| s.iter().next().is_some_and(|v| v.side == side))
        {
            let c = set.iter().filter(|v| m.contains(v)).count();
            let d = set.len() - c;
            if c == 0 {
                run += d;
            } else {
                let room = (window - 1 - run) + (c - 1) * (window - 1);
                run = d.saturating_sub(room);
            }
            if run >= window {
                return false;
            }
        }
        true
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> BipartiteTournament {
        BipartiteTournament::new(2, 2, vec![vec![true, false], vec![false, true]]).unwrap()
    }

    #[test]
    fn forced_p() {
        let t = square();
        let m: VertexSet = [VertexId::a(0), VertexId::b(0), VertexId::a(1)].into();
        assert_eq!(derive_forced_p(&t, &m), [VertexId::b(1)].into());
        let m: VertexSet = [VertexId::a(0)].into();
        assert!(derive_forced_p(&t, &m).is_empty());
    }

    #[test]
    fn homogeneity_basics() {
        let chain = BipartiteTournament::from_fn(3, 3, |i, j| i <= j);
        let all = chain.vertex_set();
        assert!(is_m_homogeneous(&chain, &all, &VertexSet::new(), 1));
        assert!(!is_m_homogeneous(
            &chain,
            &VertexSet::new(),
            &VertexSet::new(),
            3
        ));
        // window longer than each side: no window exists
        assert!(is_m_homogeneous(
            &chain,
            &VertexSet::new(),
            &VertexSet::new(),
            4
        ));
        // H must be an FVS
        assert!(!is_m_homogeneous(
            &square(),
            &VertexSet::new(),
            &VertexSet::new(),
            5
        ));
    }

    #[test]
    fn twins_can_be_spread() {
        // one A set of four twins {a0..a3} (all beat b0); M = {a1, a3} and
        // window 2 works as a0 a1 a2 a3 but not with window 1
        let t = BipartiteTournament::from_fn(4, 1, |_, _| true);
        let m: VertexSet = [VertexId::a(1), VertexId::a(3), VertexId::b(0)].into();
        assert!(is_m_homogeneous(&t, &m, &VertexSet::new(), 2));
        assert!(!is_m_homogeneous(&t, &m, &VertexSet::new(), 1));
    }

    #[test]
    fn family_without_slack() {
        let t = square();
        let mut p = ConstantsProfile::toy();
        p.hom_window = 1;
        p.sample_q = 2;
        p.budget_slack = 0;
        let fam = m_family(&t, &p).unwrap();
        // degree-0 polynomials over GF(8) are constants, so each Z_f is empty or everything
        assert_eq!(fam, vec![VertexSet::new(), t.vertex_set()]);
        p.family_cap = 1;
        assert!(matches!(
            m_family(&t, &p),
            Err(CfvsError::FamilyCapExceeded { .. })
        ));
    }
}
