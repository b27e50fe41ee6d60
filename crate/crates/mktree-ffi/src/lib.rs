//! C ABI for the mktree library.
//!
//! Models are passed across the boundary as opaque `MkModel` handles.  Every
//! fallible call returns an [`MkStatus`] code; on failure a human-readable
//! message is stored in thread-local storage and can be fetched with
//! [`mk_last_error_message`].  Strings returned by the library must be
//! released with [`mk_string_free`], models with [`mk_model_free`].
//!
//! The corresponding header, `include/mktree.h`, is generated at build time
//! by cbindgen.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use mktree::infer::{self, Evidence};
use mktree::io::read_csv_samples;
use mktree::learn::learn_markov_backbone_ktree;
use mktree::model::{self, DataSource, MarkovKTree, ModelJson};
use mktree::tables::VariableId;
use mktree::MkError;

/// Status code returned by every fallible call in this API.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MkStatus {
    /// The call succeeded.
    MkOk = 0,
    /// A required pointer argument was null.
    MkNullPointer = 1,
    /// The input was malformed: unparseable JSON or CSV, an unknown or
    /// duplicate variable, a state out of range, or an inconsistent model.
    MkInvalidInput = 2,
    /// The request was well-formed but has no answer, e.g. a backbone
    /// k-tree was requested with k >= n.
    MkInfeasible = 3,
    /// The supplied evidence has probability zero under the model.
    MkZeroProbabilityEvidence = 4,
    /// A caller-provided output buffer was too small.
    MkBufferTooSmall = 5,
    /// An internal invariant was violated; the handle is still valid but
    /// the result of this call must be discarded.
    MkInternal = 6,
}

/// Opaque handle to a fitted Markov k-tree model.
pub struct MkModel {
    inner: MarkovKTree,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    // Interior NULs cannot survive the trip through a C string.
    let sanitized: Vec<u8> = msg.bytes().filter(|&b| b != 0).collect();
    let cstring = CString::new(sanitized).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = cstring);
}

fn fail(err: MkError) -> MkStatus {
    let status = match &err {
        MkError::ZeroProbabilityEvidence => MkStatus::MkZeroProbabilityEvidence,
        MkError::Infeasible(_) | MkError::NoRetainingKTree { .. } => MkStatus::MkInfeasible,
        _ => MkStatus::MkInvalidInput,
    };
    set_error(&err.to_string());
    status
}

/// Runs a closure, translating panics into `MkInternal` instead of
/// unwinding across the FFI boundary.
fn guarded(body: impl FnOnce() -> MkStatus) -> MkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            MkStatus::MkInternal
        }
    }
}

/// # Safety
/// `ptr` must be non-null and point to a NUL-terminated string.
unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, MkStatus> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(MkStatus::MkNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        MkStatus::MkInvalidInput
    })
}

unsafe fn model_arg<'a>(ptr: *const MkModel) -> Result<&'a MarkovKTree, MkStatus> {
    if ptr.is_null() {
        set_error("null model handle");
        return Err(MkStatus::MkNullPointer);
    }
    Ok(&(*ptr).inner)
}

/// Builds an [`Evidence`] from parallel arrays of variables and states.
unsafe fn evidence_arg(
    vars: *const u16,
    states: *const u32,
    len: usize,
) -> Result<Evidence, MkStatus> {
    if len == 0 {
        return Ok(Evidence::empty());
    }
    if vars.is_null() || states.is_null() {
        set_error("null evidence array");
        return Err(MkStatus::MkNullPointer);
    }
    let vars = std::slice::from_raw_parts(vars, len);
    let states = std::slice::from_raw_parts(states, len);
    let pairs = vars
        .iter()
        .zip(states)
        .map(|(&v, &s)| (VariableId(v), s));
    Evidence::from_pairs(pairs).map_err(fail)
}

fn hand_out(out: *mut *mut MkModel, model: MarkovKTree) -> MkStatus {
    if out.is_null() {
        set_error("null output pointer");
        return MkStatus::MkNullPointer;
    }
    let handle = Box::new(MkModel { inner: model });
    unsafe { *out = Box::into_raw(handle) };
    MkStatus::MkOk
}

/// Returns the message describing the most recent failure on this thread.
///
/// The pointer stays valid until the next failing call on the same thread.
/// Never returns null; before any failure it points at an empty string.
#[no_mangle]
pub extern "C" fn mk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a model from its JSON serialization.
///
/// On success writes a freshly allocated handle to `out`; release it with
/// [`mk_model_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_model_from_json(
    json: *const c_char,
    out: *mut *mut MkModel,
) -> MkStatus {
    guarded(|| {
        let json = match str_arg(json) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let parsed: ModelJson = match serde_json::from_str(json) {
            Ok(p) => p,
            Err(e) => return fail(MkError::from(e)),
        };
        match model::from_model_json(&parsed) {
            Ok(m) => hand_out(out, m),
            Err(e) => fail(e),
        }
    })
}

/// Loads a model from a JSON file on disk.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_model_load(path: *const c_char, out: *mut *mut MkModel) -> MkStatus {
    guarded(|| {
        let path = match str_arg(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => return fail(MkError::from(e)),
        };
        let parsed: ModelJson = match serde_json::from_str(&text) {
            Ok(p) => p,
            Err(e) => return fail(MkError::from(e)),
        };
        match model::from_model_json(&parsed) {
            Ok(m) => hand_out(out, m),
            Err(e) => fail(e),
        }
    })
}

/// Learns a backbone k-tree model from a CSV sample file and hands back the
/// fitted model.  `pseudocount` is the additive smoothing applied to the
/// empirical counts; pass 0.0 for the raw maximum-likelihood fit.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_learn_csv(
    path: *const c_char,
    k: usize,
    pseudocount: f64,
    out: *mut *mut MkModel,
) -> MkStatus {
    guarded(|| {
        let path = match str_arg(path) {
            Ok(s) => s,
            Err(status) => return status,
        };
        let data = match read_csv_samples(Path::new(path)) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        let dist = match DataSource::empirical(&data.samples, &data.cards, pseudocount) {
            Ok(d) => d,
            Err(e) => return fail(e),
        };
        match learn_markov_backbone_ktree(&dist, k) {
            Ok((model, _)) => hand_out(out, model),
            Err(e) => fail(e),
        }
    })
}

/// Releases a model handle.  Passing null is a no-op.
///
/// # Safety
/// `model` must be a pointer previously returned by this library, and must
/// not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn mk_model_free(model: *mut MkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of variables in the model, or 0 if `model` is null.
///
/// # Safety
/// `model` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn mk_model_n(model: *const MkModel) -> usize {
    model_arg(model).map(|m| m.n()).unwrap_or(0)
}

/// Treewidth parameter k of the model, or 0 if `model` is null.
///
/// # Safety
/// `model` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn mk_model_k(model: *const MkModel) -> usize {
    model_arg(model).map(|m| m.k()).unwrap_or(0)
}

/// Cardinality of variable `var` (1-based), or 0 if the handle is null or
/// the variable is out of range.
///
/// # Safety
/// `model` must be a valid handle or null.
#[no_mangle]
pub unsafe extern "C" fn mk_model_cardinality(model: *const MkModel, var: u16) -> u32 {
    let Ok(m) = model_arg(model) else { return 0 };
    m.cardinalities().card(VariableId(var)).unwrap_or(0)
}

/// Serializes the model to JSON.  On success writes a freshly allocated
/// string to `out`; release it with [`mk_string_free`].
///
/// # Safety
/// `model` must be a valid handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_model_to_json(
    model: *const MkModel,
    out: *mut *mut c_char,
) -> MkStatus {
    guarded(|| {
        let m = match model_arg(model) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out.is_null() {
            set_error("null output pointer");
            return MkStatus::MkNullPointer;
        }
        let json = model::to_model_json(m);
        let text = match serde_json::to_string(&json) {
            Ok(t) => t,
            Err(e) => return fail(MkError::from(e)),
        };
        match CString::new(text) {
            Ok(cstring) => {
                *out = cstring.into_raw();
                MkStatus::MkOk
            }
            Err(_) => {
                set_error("serialized model contains an interior NUL");
                MkStatus::MkInternal
            }
        }
    })
}

/// Releases a string previously returned by this library.  Passing null is
/// a no-op.
///
/// # Safety
/// `s` must be a pointer previously returned by this library, and must not
/// be used after this call.
#[no_mangle]
pub unsafe extern "C" fn mk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Evaluates log2 P(assignment) for a full assignment of all n variables,
/// given as state indices in variable order X1..Xn.  Writes the result to
/// `out_log2p`; negative infinity denotes probability zero.
///
/// # Safety
/// `assignment` must point to `len` readable u32s; `out_log2p` must be a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mk_log2_joint(
    model: *const MkModel,
    assignment: *const u32,
    len: usize,
    out_log2p: *mut f64,
) -> MkStatus {
    guarded(|| {
        let m = match model_arg(model) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if assignment.is_null() || out_log2p.is_null() {
            set_error("null pointer argument");
            return MkStatus::MkNullPointer;
        }
        let assignment = std::slice::from_raw_parts(assignment, len);
        match model::joint_probability(m, assignment) {
            Ok((_, log2p)) => {
                *out_log2p = log2p;
                MkStatus::MkOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Computes the posterior marginal P(X = x | evidence) for variable `var`
/// (1-based).  The distribution is written to `out_probs`, which must have
/// room for `out_cap` doubles; the number written (the cardinality of the
/// variable) is stored in `out_len`.
///
/// Evidence is given as `ev_len` parallel entries of `ev_vars` (1-based
/// variable ids) and `ev_states`; pass null/0 for no evidence.
///
/// # Safety
/// All pointer arguments must be valid for the lengths described above.
#[no_mangle]
pub unsafe extern "C" fn mk_marginal(
    model: *const MkModel,
    var: u16,
    ev_vars: *const u16,
    ev_states: *const u32,
    ev_len: usize,
    out_probs: *mut f64,
    out_cap: usize,
    out_len: *mut usize,
) -> MkStatus {
    guarded(|| {
        let m = match model_arg(model) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out_probs.is_null() || out_len.is_null() {
            set_error("null output pointer");
            return MkStatus::MkNullPointer;
        }
        let evidence = match evidence_arg(ev_vars, ev_states, ev_len) {
            Ok(e) => e,
            Err(status) => return status,
        };
        let table = match infer::marginal(m, VariableId(var), &evidence) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        let probs = table.probs();
        *out_len = probs.len();
        if probs.len() > out_cap {
            set_error("output buffer too small for the marginal");
            return MkStatus::MkBufferTooSmall;
        }
        std::ptr::copy_nonoverlapping(probs.as_ptr(), out_probs, probs.len());
        MkStatus::MkOk
    })
}

/// Computes log2 P(evidence), the log-probability of the evidence under the
/// model.  Writes negative infinity and returns `MkOk` when the evidence
/// has probability zero (unlike the query calls, which treat that as an
/// error).
///
/// # Safety
/// Pointer arguments must be valid as described for [`mk_marginal`].
#[no_mangle]
pub unsafe extern "C" fn mk_evidence_log2(
    model: *const MkModel,
    ev_vars: *const u16,
    ev_states: *const u32,
    ev_len: usize,
    out_log2p: *mut f64,
) -> MkStatus {
    guarded(|| {
        let m = match model_arg(model) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out_log2p.is_null() {
            set_error("null output pointer");
            return MkStatus::MkNullPointer;
        }
        let evidence = match evidence_arg(ev_vars, ev_states, ev_len) {
            Ok(e) => e,
            Err(status) => return status,
        };
        match infer::evidence_probability(m, &evidence) {
            Ok(log2p) => {
                *out_log2p = log2p;
                MkStatus::MkOk
            }
            Err(e) => fail(e),
        }
    })
}

/// Computes a most probable explanation: a full assignment maximizing
/// P(X | evidence).  The assignment (state indices for X1..Xn) is written
/// to `out_states`, which must have room for `out_cap` u32s, and its joint
/// log2-probability to `out_log2p`.
///
/// # Safety
/// Pointer arguments must be valid as described for [`mk_marginal`].
#[no_mangle]
pub unsafe extern "C" fn mk_mpe(
    model: *const MkModel,
    ev_vars: *const u16,
    ev_states: *const u32,
    ev_len: usize,
    out_states: *mut u32,
    out_cap: usize,
    out_log2p: *mut f64,
) -> MkStatus {
    guarded(|| {
        let m = match model_arg(model) {
            Ok(m) => m,
            Err(status) => return status,
        };
        if out_states.is_null() || out_log2p.is_null() {
            set_error("null output pointer");
            return MkStatus::MkNullPointer;
        }
        if m.n() > out_cap {
            set_error("output buffer too small for the assignment");
            return MkStatus::MkBufferTooSmall;
        }
        let evidence = match evidence_arg(ev_vars, ev_states, ev_len) {
            Ok(e) => e,
            Err(status) => return status,
        };
        match infer::mpe(m, &evidence) {
            Ok((states, log2p)) => {
                std::ptr::copy_nonoverlapping(states.as_ptr(), out_states, states.len());
                *out_log2p = log2p;
                MkStatus::MkOk
            }
            Err(e) => fail(e),
        }
    })
}
