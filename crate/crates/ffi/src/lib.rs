//! C ABI over the btfvs solvers.
//!
//! Tournaments and solutions are opaque handles owned by the caller and
//! released with the matching `_free`. Every fallible call returns a
//! [`BtfvsStatus`]; on failure [`btfvs_last_error`] describes what went wrong.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use btfvs::cfvs::{pipeline_solve, ConstantsProfile, PipelineOptions};
use btfvs::graph::{BipartiteTournament, Side, VertexId};
use btfvs::io::parse_instance;
use btfvs::solvers::{branch_solve_with, exact_min_fvs_with, BranchOptions, Constraints, Status};
use btfvs::structure::is_acyclic;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BtfvsStatus {
    Ok = 0,
    /// No FVS within the budget.
    NoSolution = 1,
    InvalidArgument = 2,
    ParseError = 3,
    /// A panic or a failed internal check.
    Internal = 4,
    NullPointer = 5,
}

pub struct BtfvsTournament(BipartiteTournament);

pub struct BtfvsSolution(Vec<VertexId>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: BtfvsStatus, msg: impl Into<String>) -> BtfvsStatus {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
    status
}

fn guard(f: impl FnOnce() -> BtfvsStatus) -> BtfvsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BtfvsStatus::Internal, msg)
        }
    }
}

unsafe fn tournament<'a>(t: *const BtfvsTournament) -> Option<&'a BipartiteTournament> {
    t.as_ref().map(|t| &t.0)
}

unsafe fn put_solution(out: *mut *mut BtfvsSolution, s: impl IntoIterator<Item = VertexId>) {
    *out = Box::into_raw(Box::new(BtfvsSolution(s.into_iter().collect())));
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn btfvs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Builds a tournament from a row-major `m * n` array where a nonzero
/// `orient[i * n + j]` means `a_i -> b_j`.
///
/// # Safety
/// `orient` must point to `m * n` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_tournament_new(
    m: usize,
    n: usize,
    orient: *const u8,
    out: *mut *mut BtfvsTournament,
) -> BtfvsStatus {
    guard(|| {
        if out.is_null() || (orient.is_null() && m * n > 0) {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        let cells = if m * n == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(orient, m * n)
        };
        let rows = (0..m)
            .map(|i| cells[i * n..(i + 1) * n].iter().map(|&c| c != 0).collect())
            .collect();
        match BipartiteTournament::new(m, n, rows) {
            Ok(t) => {
                *out = Box::into_raw(Box::new(BtfvsTournament(t)));
                BtfvsStatus::Ok
            }
            Err(e) => fail(BtfvsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Parses an instance document. Only the tournament is kept.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_tournament_from_json(
    json: *const c_char,
    out: *mut *mut BtfvsTournament,
) -> BtfvsStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        let Ok(text) = CStr::from_ptr(json).to_str() else {
            return fail(BtfvsStatus::ParseError, "input is not UTF-8");
        };
        match parse_instance(text) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(BtfvsTournament(f.tournament)));
                BtfvsStatus::Ok
            }
            Err(e) => fail(BtfvsStatus::ParseError, e.to_string()),
        }
    })
}

/// # Safety
/// `t` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn btfvs_tournament_free(t: *mut BtfvsTournament) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live handle; `m` and `n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_tournament_size(
    t: *const BtfvsTournament,
    m: *mut usize,
    n: *mut usize,
) -> BtfvsStatus {
    let Some(t) = tournament(t) else {
        return fail(BtfvsStatus::NullPointer, "null tournament");
    };
    if m.is_null() || n.is_null() {
        return fail(BtfvsStatus::NullPointer, "null argument");
    }
    *m = t.m();
    *n = t.n();
    BtfvsStatus::Ok
}

/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_is_acyclic(
    t: *const BtfvsTournament,
    out: *mut bool,
) -> BtfvsStatus {
    guard(|| {
        let Some(t) = tournament(t) else {
            return fail(BtfvsStatus::NullPointer, "null tournament");
        };
        if out.is_null() {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        *out = is_acyclic(t);
        BtfvsStatus::Ok
    })
}

/// Searches for an FVS of at most `k` vertices with the branching solver.
/// Returns `NoSolution` when none exists; `*out` is set only on `Ok`.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_solve(
    t: *const BtfvsTournament,
    k: usize,
    workers: usize,
    out: *mut *mut BtfvsSolution,
) -> BtfvsStatus {
    guard(|| {
        let Some(t) = tournament(t) else {
            return fail(BtfvsStatus::NullPointer, "null tournament");
        };
        if out.is_null() {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        let opts = BranchOptions {
            workers: workers.max(1),
            ..Default::default()
        };
        match branch_solve_with(t, &Constraints::with_budget(k), &opts) {
            Ok(r) => match r.status {
                Status::Solution(s) => {
                    put_solution(out, s);
                    BtfvsStatus::Ok
                }
                _ => fail(BtfvsStatus::NoSolution, format!("no FVS of size <= {k}")),
            },
            Err(e) => fail(BtfvsStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Minimum FVS.
///
/// # Safety
/// `t` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_min_fvs(
    t: *const BtfvsTournament,
    workers: usize,
    out: *mut *mut BtfvsSolution,
) -> BtfvsStatus {
    guard(|| {
        let Some(t) = tournament(t) else {
            return fail(BtfvsStatus::NullPointer, "null tournament");
        };
        if out.is_null() {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        let opts = BranchOptions {
            workers: workers.max(1),
            ..Default::default()
        };
        put_solution(out, exact_min_fvs_with(t, &opts));
        BtfvsStatus::Ok
    })
}

/// Decides FVS <= k through the constrained-FVS reduction. `profile` is
/// "paper", "toy" or "file:<path>"; NULL means "toy".
///
/// # Safety
/// `t` must be a live handle, `profile` NULL or NUL-terminated, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_pipeline_solve(
    t: *const BtfvsTournament,
    k: usize,
    profile: *const c_char,
    workers: usize,
    out: *mut *mut BtfvsSolution,
) -> BtfvsStatus {
    guard(|| {
        let Some(t) = tournament(t) else {
            return fail(BtfvsStatus::NullPointer, "null tournament");
        };
        if out.is_null() {
            return fail(BtfvsStatus::NullPointer, "null argument");
        }
        let spec = if profile.is_null() {
            "toy"
        } else {
            match CStr::from_ptr(profile).to_str() {
                Ok(s) => s,
                Err(_) => return fail(BtfvsStatus::InvalidArgument, "profile is not UTF-8"),
            }
        };
        let profile = match ConstantsProfile::resolve(spec, k) {
            Ok(p) => p,
            Err(e) => return fail(BtfvsStatus::InvalidArgument, e.to_string()),
        };
        let opts = PipelineOptions {
            workers: workers.max(1),
            ..Default::default()
        };
        match pipeline_solve(t, k, &profile, &opts) {
            Ok(o) => match o.result.status {
                Status::Solution(s) => {
                    put_solution(out, s);
                    BtfvsStatus::Ok
                }
                _ => fail(BtfvsStatus::NoSolution, format!("no FVS of size <= {k}")),
            },
            Err(e) => fail(BtfvsStatus::Internal, e.to_string()),
        }
    })
}

/// # Safety
/// `s` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn btfvs_solution_len(s: *const BtfvsSolution) -> usize {
    s.as_ref().map_or(0, |s| s.0.len())
}

/// Writes the `i`-th vertex: `side` is 0 for A and 1 for B.
///
/// # Safety
/// `s` must be a live handle; `side` and `index` writable.
#[no_mangle]
pub unsafe extern "C" fn btfvs_solution_get(
    s: *const BtfvsSolution,
    i: usize,
    side: *mut u8,
    index: *mut usize,
) -> BtfvsStatus {
    let Some(s) = s.as_ref() else {
        return fail(BtfvsStatus::NullPointer, "null solution");
    };
    if side.is_null() || index.is_null() {
        return fail(BtfvsStatus::NullPointer, "null argument");
    }
    let Some(v) = s.0.get(i) else {
        return fail(
            BtfvsStatus::InvalidArgument,
            format!("index {i} out of range {}", s.0.len()),
        );
    };
    *side = match v.side {
        Side::A => 0,
        Side::B => 1,
    };
    *index = v.index;
    BtfvsStatus::Ok
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn btfvs_solution_free(s: *mut BtfvsSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}
