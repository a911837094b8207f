//! C interface to the `resroute` solvers.
//!
//! Objects cross the boundary as opaque handles created by `rr_*_new` style
//! constructors and released with the matching `rr_*_free`. Every fallible
//! entry point returns an [`RrStatus`]; on failure a message is available
//! from [`rr_last_error_message`] on the same thread. Strings returned
//! through `char **` out-parameters are owned by the caller and must be
//! released with [`rr_string_free`]. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use resroute::encoding::{decode, Assignment, Decoded};
use resroute::oracle::{brute_force_solve, min_sum_baseline, RoutingSolution, SolutionView};
use resroute::qubo::{build_qubo, default_alpha, exhaustive_minimize, QuboModel, DEFAULT_EXHAUSTIVE_LIMIT};
use resroute::topology::{
    build_failure_model, reduced_topology, resolve_scenario, toy_topology, FailureModel, Scenario,
    Topology, TopologyDocument,
};
use resroute::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidTopology = 4,
    UnknownVertex = 5,
    NotSecondary = 6,
    InvalidArgument = 7,
    TooManyVariables = 8,
    /// No vertex-disjoint pair exists; the out handle is set to NULL.
    Infeasible = 9,
    /// The assignment does not decode to a pair of disjoint paths.
    InvalidAssignment = 10,
    Internal = 11,
    Panic = 12,
}

/// A validated network topology.
pub struct RrTopology {
    inner: Topology,
    scenario: Option<Scenario>,
}

/// Per-link and joint failure probabilities for one topology.
pub struct RrFailureModel {
    inner: FailureModel,
    edges: usize,
}

/// A routing solution: two paths, their latency and resiliency.
pub struct RrSolution {
    view: SolutionView,
}

/// A QUBO model for one source, with what is needed to decode it.
pub struct RrQubo {
    model: QuboModel,
    topology: Topology,
    failures: FailureModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    let c = CString::new(text).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> RrStatus {
    match err {
        Error::Parse { .. } | Error::Json(_) => RrStatus::Parse,
        Error::SelfLoop { .. }
        | Error::DuplicateEdge { .. }
        | Error::DuplicateVertex { .. }
        | Error::WrongTerminalCount { .. }
        | Error::NegativeLatency { .. }
        | Error::InvalidIdentifier { .. }
        | Error::UnknownEdge { .. }
        | Error::ProbabilityOutOfRange { .. } => RrStatus::InvalidTopology,
        Error::UnknownVertex { .. } => RrStatus::UnknownVertex,
        Error::NotSecondary { .. } => RrStatus::NotSecondary,
        Error::TooManyVariables { .. } => RrStatus::TooManyVariables,
        Error::LengthMismatch { .. } | Error::InvalidParameter(_) | Error::UnknownScenario(_) => {
            RrStatus::InvalidArgument
        }
        _ => RrStatus::Internal,
    }
}

type FfiResult<T> = std::result::Result<T, RrStatus>;

fn fail<T>(status: RrStatus, message: impl Into<String>) -> FfiResult<T> {
    set_error(message);
    Err(status)
}

fn lift<T>(r: resroute::Result<T>) -> FfiResult<T> {
    r.or_else(|e| fail(status_of(&e), e.to_string()))
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> RrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            RrStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            RrStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(RrStatus::NullPointer, format!("{what} is NULL"));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(s),
        Err(_) => fail(RrStatus::InvalidUtf8, format!("{what} is not valid UTF-8")),
    }
}

unsafe fn read_ref<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    match p.as_ref() {
        Some(r) => Ok(r),
        None => fail(RrStatus::NullPointer, format!("{what} is NULL")),
    }
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return fail(RrStatus::NullPointer, format!("{what} is NULL"));
    }
    out.write(value);
    Ok(())
}

fn check_out<T>(out: *mut T, what: &str) -> FfiResult<()> {
    if out.is_null() {
        return fail(RrStatus::NullPointer, format!("{what} is NULL"));
    }
    Ok(())
}

fn into_c_string(s: String) -> FfiResult<*mut c_char> {
    match CString::new(s) {
        Ok(c) => Ok(c.into_raw()),
        Err(_) => fail(RrStatus::Internal, "string contains a nul byte"),
    }
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message of the last failed call on this thread, or NULL after a
/// success. Valid until the next `rr_*` call on the same thread.
#[no_mangle]
pub extern "C" fn rr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code, e.g. `"NotSecondary"`.
#[no_mangle]
pub extern "C" fn rr_status_name(status: RrStatus) -> *const c_char {
    let name: &'static CStr = match status {
        RrStatus::Ok => c"Ok",
        RrStatus::NullPointer => c"NullPointer",
        RrStatus::InvalidUtf8 => c"InvalidUtf8",
        RrStatus::Parse => c"Parse",
        RrStatus::InvalidTopology => c"InvalidTopology",
        RrStatus::UnknownVertex => c"UnknownVertex",
        RrStatus::NotSecondary => c"NotSecondary",
        RrStatus::InvalidArgument => c"InvalidArgument",
        RrStatus::TooManyVariables => c"TooManyVariables",
        RrStatus::Infeasible => c"Infeasible",
        RrStatus::InvalidAssignment => c"InvalidAssignment",
        RrStatus::Internal => c"Internal",
        RrStatus::Panic => c"Panic",
    };
    name.as_ptr()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn rr_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a topology document (JSON).
///
/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_topology_from_json(json: *const c_char, out: *mut *mut RrTopology) -> RrStatus {
    guard(|| {
        check_out(out, "out")?;
        let text = read_str(json, "json")?;
        let doc = lift(TopologyDocument::from_json(text))?;
        let inner = lift(doc.topology())?;
        write_out(
            out,
            boxed(RrTopology {
                inner,
                scenario: doc.scenario,
            }),
            "out",
        )
    })
}

/// Built-in instance: `kind` 0 is the five-vertex example network, 1 the
/// four-vertex reduced network.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rr_topology_builtin(kind: c_int, out: *mut *mut RrTopology) -> RrStatus {
    guard(|| {
        check_out(out, "out")?;
        let inner = match kind {
            0 => toy_topology(),
            1 => reduced_topology(),
            _ => return fail(RrStatus::InvalidArgument, format!("unknown built-in topology {kind}")),
        };
        write_out(out, boxed(RrTopology { inner, scenario: None }), "out")
    })
}

/// # Safety
/// `t` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rr_topology_free(t: *mut RrTopology) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_topology_counts(
    t: *const RrTopology,
    vertices: *mut usize,
    edges: *mut usize,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        write_out(vertices, t.inner.vertex_count(), "vertices")?;
        write_out(edges, t.inner.edge_count(), "edges")
    })
}

/// Serializes the topology (and its embedded scenario, if any) to JSON.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_topology_to_json(t: *const RrTopology, out: *mut *mut c_char) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        check_out(out, "out")?;
        let doc = TopologyDocument::from_topology(&t.inner, t.scenario.clone());
        write_out(out, into_c_string(doc.to_json())?, "out")
    })
}

/// Failure model from a scenario name (`"uncorrelated"`, `"correlated"`, or
/// the name of the scenario embedded in the topology document). NULL
/// selects the embedded scenario, else independent failures at 0.1.
///
/// # Safety
/// `scenario` must be NULL or nul-terminated; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rr_failure_model_new(
    t: *const RrTopology,
    scenario: *const c_char,
    out: *mut *mut RrFailureModel,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        check_out(out, "out")?;
        let name = if scenario.is_null() {
            None
        } else {
            Some(read_str(scenario, "scenario")?)
        };
        let sc = lift(resolve_scenario(&t.inner, t.scenario.as_ref(), name))?;
        let inner = lift(build_failure_model(&t.inner, &sc))?;
        write_out(
            out,
            boxed(RrFailureModel {
                edges: t.inner.edge_count(),
                inner,
            }),
            "out",
        )
    })
}

/// Failure model from a scenario JSON object
/// (`{"default_marginal": .., "overrides": [..]}`).
///
/// # Safety
/// `json` must be nul-terminated; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rr_failure_model_from_json(
    t: *const RrTopology,
    json: *const c_char,
    out: *mut *mut RrFailureModel,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        check_out(out, "out")?;
        let sc: Scenario = lift(serde_json::from_str(read_str(json, "json")?).map_err(Error::from))?;
        let inner = lift(build_failure_model(&t.inner, &sc))?;
        write_out(
            out,
            boxed(RrFailureModel {
                edges: t.inner.edge_count(),
                inner,
            }),
            "out",
        )
    })
}

/// # Safety
/// `f` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rr_failure_model_free(f: *mut RrFailureModel) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Joint failure probability of two edges (indices in document order).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_failure_model_joint(
    f: *const RrFailureModel,
    a: usize,
    b: usize,
    out: *mut f64,
) -> RrStatus {
    guard(|| {
        let f = read_ref(f, "failure model")?;
        if a >= f.edges || b >= f.edges {
            return fail(RrStatus::InvalidArgument, format!("edge index out of range (have {})", f.edges));
        }
        write_out(out, f.inner.joint(a, b), "out")
    })
}

fn solution_handle(t: &Topology, sol: &RoutingSolution) -> *mut RrSolution {
    boxed(RrSolution { view: sol.view(t) })
}

/// Exact optimum of `latency + B * resiliency` for `source`. Returns
/// `Infeasible` (and a NULL handle) when no disjoint pair exists.
///
/// # Safety
/// Pointers must be valid; `source` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rr_solve(
    t: *const RrTopology,
    f: *const RrFailureModel,
    source: *const c_char,
    trade_off: f64,
    demand: f64,
    out: *mut *mut RrSolution,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        let f = read_ref(f, "failure model")?;
        let source = read_str(source, "source")?;
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        match lift(brute_force_solve(&t.inner, &f.inner, source, trade_off, demand))? {
            Some(sol) => write_out(out, solution_handle(&t.inner, &sol), "out"),
            None => fail(RrStatus::Infeasible, format!("no vertex-disjoint pair from {source}")),
        }
    })
}

/// Minimum total latency disjoint pair (ignores failures).
///
/// # Safety
/// Pointers must be valid; `source` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rr_min_sum_baseline(
    t: *const RrTopology,
    source: *const c_char,
    out: *mut *mut RrSolution,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        let source = read_str(source, "source")?;
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        match lift(min_sum_baseline(&t.inner, source))? {
            Some(sol) => write_out(out, solution_handle(&t.inner, &sol), "out"),
            None => fail(RrStatus::Infeasible, format!("no vertex-disjoint pair from {source}")),
        }
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rr_solution_free(s: *mut RrSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Latency, resiliency and objective; any out pointer may be NULL.
///
/// # Safety
/// `s` must be valid; non-NULL outs writable.
#[no_mangle]
pub unsafe extern "C" fn rr_solution_values(
    s: *const RrSolution,
    latency: *mut f64,
    resiliency: *mut f64,
    objective: *mut f64,
) -> RrStatus {
    guard(|| {
        let s = read_ref(s, "solution")?;
        for (p, v) in [
            (latency, s.view.latency),
            (resiliency, s.view.resiliency),
            (objective, s.view.objective),
        ] {
            if !p.is_null() {
                p.write(v);
            }
        }
        Ok(())
    })
}

/// Comma-separated vertex ids of path `which` (1 or 2).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_solution_path(
    s: *const RrSolution,
    which: c_int,
    out: *mut *mut c_char,
) -> RrStatus {
    guard(|| {
        let s = read_ref(s, "solution")?;
        check_out(out, "out")?;
        let path = match which {
            1 => &s.view.path1,
            2 => &s.view.path2,
            _ => return fail(RrStatus::InvalidArgument, format!("path index must be 1 or 2, got {which}")),
        };
        write_out(out, into_c_string(path.join(","))?, "out")
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_solution_to_json(s: *const RrSolution, out: *mut *mut c_char) -> RrStatus {
    guard(|| {
        let s = read_ref(s, "solution")?;
        check_out(out, "out")?;
        let text = lift(serde_json::to_string(&s.view).map_err(Error::from))?;
        write_out(out, into_c_string(text)?, "out")
    })
}

/// Builds the penalized QUBO for `source`. `alpha <= 0` selects the default
/// (twice the total latency).
///
/// # Safety
/// Pointers must be valid; `source` nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_build(
    t: *const RrTopology,
    f: *const RrFailureModel,
    source: *const c_char,
    trade_off: f64,
    alpha: f64,
    demand: f64,
    out: *mut *mut RrQubo,
) -> RrStatus {
    guard(|| {
        let t = read_ref(t, "topology")?;
        let f = read_ref(f, "failure model")?;
        let source = read_str(source, "source")?;
        check_out(out, "out")?;
        let alpha = if alpha > 0.0 { alpha } else { default_alpha(&t.inner) };
        let model = lift(build_qubo(&t.inner, &f.inner, source, trade_off, alpha, demand))?;
        write_out(
            out,
            boxed(RrQubo {
                model,
                topology: t.inner.clone(),
                failures: f.inner.clone(),
            }),
            "out",
        )
    })
}

/// # Safety
/// `q` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_free(q: *mut RrQubo) {
    if !q.is_null() {
        drop(Box::from_raw(q));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_num_variables(q: *const RrQubo, out: *mut usize) -> RrStatus {
    guard(|| {
        let q = read_ref(q, "qubo")?;
        write_out(out, q.model.len(), "out")
    })
}

/// Energy of an assignment given as `len` bytes (0 or nonzero).
///
/// # Safety
/// `bits` must point to `len` readable bytes; other pointers valid.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_energy(
    q: *const RrQubo,
    bits: *const u8,
    len: usize,
    out: *mut f64,
) -> RrStatus {
    guard(|| {
        let q = read_ref(q, "qubo")?;
        if bits.is_null() && len > 0 {
            return fail(RrStatus::NullPointer, "bits is NULL");
        }
        let slice = if len == 0 { &[][..] } else { std::slice::from_raw_parts(bits, len) };
        let a = Assignment::from_bits(slice.iter().map(|&b| b != 0).collect());
        write_out(out, lift(q.model.energy(&a))?, "out")
    })
}

/// Exhaustive minimum (up to 26 variables). Bit `i` of the index is
/// variable `i`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_minimize(q: *const RrQubo, index: *mut u64, energy: *mut f64) -> RrStatus {
    guard(|| {
        let q = read_ref(q, "qubo")?;
        check_out(index, "index")?;
        check_out(energy, "energy")?;
        let r = lift(exhaustive_minimize(&q.model.qubo, DEFAULT_EXHAUSTIVE_LIMIT))?;
        write_out(index, r.index, "index")?;
        write_out(energy, r.energy, "energy")
    })
}

/// Decodes a basis index into a solution, or `InvalidAssignment`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_decode(q: *const RrQubo, index: u64, out: *mut *mut RrSolution) -> RrStatus {
    guard(|| {
        let q = read_ref(q, "qubo")?;
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        let n = q.model.len();
        if n < 64 && index >> n != 0 {
            return fail(RrStatus::InvalidArgument, format!("index has bits beyond {n} variables"));
        }
        match lift(decode(&q.model.layout, &Assignment::from_index(index, n)))? {
            Decoded::Valid { path1, path2 } => {
                let sol = RoutingSolution::evaluate(
                    &q.topology,
                    &q.failures,
                    path1,
                    path2,
                    q.model.trade_off,
                    q.model.demand,
                );
                write_out(out, solution_handle(&q.topology, &sol), "out")
            }
            Decoded::Invalid(report) => fail(RrStatus::InvalidAssignment, report.describe()),
        }
    })
}

/// Sparse coefficient text (`i j value` rows, constant in a comment).
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn rr_qubo_to_text(q: *const RrQubo, out: *mut *mut c_char) -> RrStatus {
    guard(|| {
        let q = read_ref(q, "qubo")?;
        check_out(out, "out")?;
        write_out(out, into_c_string(q.model.qubo.to_text())?, "out")
    })
}
