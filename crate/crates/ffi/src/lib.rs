//! C ABI over the argument-graph and coverage parts of
//! `scenario-completeness`.
//!
//! Every fallible function returns an [`ScStatus`]; on failure the message
//! is available from [`sc_last_error`] on the same thread. Strings returned
//! through out-parameters are owned by the caller and released with
//! [`sc_string_free`]. Handles are opaque and released with their `_free`
//! function; passing NULL to a `_free` function is a no-op.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use scenario_completeness::coverage::{discovery_curve, fit_saturation, good_turing_coverage, SaturationCurve};
use scenario_completeness::gsn::{
    export_graph, parse_graph, propagate_status, top_goal_status, validate_structure, ArgumentGraph, EvidenceVerdict,
    ExportMode, NodeStatus, Outcome,
};
use scenario_completeness::Execution;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    InvalidGraph = 4,
    UnknownNode = 5,
    InvalidArgument = 6,
    CoverageError = 7,
    IndexOutOfRange = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScOutcome {
    Refuting = 0,
    Confirming = 1,
    Inconclusive = 2,
}

/// Node status; `None` for nodes without one (context nodes, or a graph
/// without root goals for the top-goal query).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScNodeStatus {
    None = 0,
    Supported = 1,
    Undermined = 2,
    Undetermined = 3,
    Refuted = 4,
    Confirmed = 5,
    Open = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScExportMode {
    Document = 0,
    Renderable = 1,
}

/// Opaque argument graph.
pub struct ScGraph {
    graph: ArgumentGraph,
}

/// Opaque discovery curve.
pub struct ScCurve {
    curve: SaturationCurve,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(ScStatus, String);

type FfiResult<T> = Result<T, Failure>;

fn fail<T>(status: ScStatus, msg: impl Into<String>) -> FfiResult<T> {
    Err(Failure(status, msg.into()))
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> ScStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ScStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ScStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return fail(ScStatus::NullPointer, format!("{name} is NULL"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(ScStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().map_or_else(|| fail(ScStatus::NullPointer, format!("{name} is NULL")), Ok)
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().map_or_else(|| fail(ScStatus::NullPointer, format!("{name} is NULL")), Ok)
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).unwrap_or_default().into_raw()
}

unsafe fn labels_arg<'a>(labels: *const *const c_char, count: usize) -> FfiResult<Vec<&'a str>> {
    if labels.is_null() && count > 0 {
        return fail(ScStatus::NullPointer, "labels is NULL");
    }
    (0..count).map(|i| str_arg(*labels.add(i), &format!("labels[{i}]"))).collect()
}

fn status_code(s: Option<NodeStatus>) -> ScNodeStatus {
    match s {
        None => ScNodeStatus::None,
        Some(NodeStatus::Supported) => ScNodeStatus::Supported,
        Some(NodeStatus::Undermined) => ScNodeStatus::Undermined,
        Some(NodeStatus::Undetermined) => ScNodeStatus::Undetermined,
        Some(NodeStatus::Refuted) => ScNodeStatus::Refuted,
        Some(NodeStatus::Confirmed) => ScNodeStatus::Confirmed,
        Some(NodeStatus::Open) => ScNodeStatus::Open,
    }
}

/// Message of the last failed call on this thread; empty after a success.
/// Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a GSN document into a new graph handle.
///
/// # Safety
/// `document` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_parse(document: *const c_char, out: *mut *mut ScGraph) -> ScStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let text = str_arg(document, "document")?;
        let graph = parse_graph(text).or_else(|e| fail(ScStatus::ParseError, e.to_string()))?;
        *out = Box::into_raw(Box::new(ScGraph { graph }));
        Ok(())
    })
}

/// # Safety
/// `graph` must be NULL or a handle from [`sc_graph_parse`], not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_free(graph: *mut ScGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Structural validation. Writes the number of violations to `count` and,
/// if `report` is not NULL, one violation per line into a new string.
///
/// # Safety
/// `graph` must be a live handle; `count` a valid pointer; `report` NULL or
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_validate(graph: *const ScGraph, count: *mut usize, report: *mut *mut c_char) -> ScStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let count = out_arg(count, "count")?;
        let violations = validate_structure(&g.graph);
        *count = violations.len();
        if let Some(report) = report.as_mut() {
            *report = owned_string(violations.iter().map(|v| format!("{v}\n")).collect());
        }
        Ok(())
    })
}

/// Adds a verdict to an evidence node of the graph in place. `outcome` is
/// an [`ScOutcome`] value.
///
/// # Safety
/// `graph` must be a live handle; string arguments NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_attach_verdict(
    graph: *mut ScGraph,
    evidence_id: *const c_char,
    outcome: i32,
    source: *const c_char,
    detail: *const c_char,
    timestamp: i64,
) -> ScStatus {
    guard(|| {
        let g = out_arg(graph, "graph")?;
        let id = str_arg(evidence_id, "evidence_id")?;
        let source = str_arg(source, "source")?;
        let detail = str_arg(detail, "detail")?;
        let outcome = match outcome {
            x if x == ScOutcome::Refuting as i32 => Outcome::Refuting,
            x if x == ScOutcome::Confirming as i32 => Outcome::Confirming,
            x if x == ScOutcome::Inconclusive as i32 => Outcome::Inconclusive,
            other => return fail(ScStatus::InvalidArgument, format!("outcome {other}")),
        };
        g.graph = g
            .graph
            .with_verdict(id, EvidenceVerdict::new(source, outcome, detail, timestamp))
            .or_else(|e| fail(ScStatus::UnknownNode, e.to_string()))?;
        Ok(())
    })
}

/// Recomputes every node status in place. Fails without changing the graph
/// if it is structurally invalid.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_propagate(graph: *mut ScGraph) -> ScStatus {
    guard(|| {
        let g = out_arg(graph, "graph")?;
        g.graph = propagate_status(&g.graph).or_else(|e| fail(ScStatus::InvalidGraph, e.to_string()))?;
        Ok(())
    })
}

/// # Safety
/// `graph` must be a live handle; `node_id` NUL-terminated; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_node_status(
    graph: *const ScGraph,
    node_id: *const c_char,
    out: *mut ScNodeStatus,
) -> ScStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let id = str_arg(node_id, "node_id")?;
        let out = out_arg(out, "out")?;
        let node = g.graph.node(id).map_or_else(|| fail(ScStatus::UnknownNode, format!("unknown node `{id}`")), Ok)?;
        *out = status_code(node.status);
        Ok(())
    })
}

/// Aggregate status of the root goals.
///
/// # Safety
/// `graph` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_top_goal_status(graph: *const ScGraph, out: *mut ScNodeStatus) -> ScStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        *out_arg(out, "out")? = status_code(top_goal_status(&g.graph));
        Ok(())
    })
}

/// Writes the graph as a GSN document or a TGF rendering; `mode` is an
/// [`ScExportMode`] value.
///
/// # Safety
/// `graph` must be a live handle; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sc_graph_export(graph: *const ScGraph, mode: i32, out: *mut *mut c_char) -> ScStatus {
    guard(|| {
        let g = ref_arg(graph, "graph")?;
        let out = out_arg(out, "out")?;
        let mode = match mode {
            x if x == ScExportMode::Document as i32 => ExportMode::Document,
            x if x == ScExportMode::Renderable as i32 => ExportMode::Renderable,
            other => return fail(ScStatus::InvalidArgument, format!("export mode {other}")),
        };
        *out = owned_string(export_graph(&g.graph, mode));
        Ok(())
    })
}

/// Good–Turing coverage `1 − f1/N` of `count` labels.
///
/// # Safety
/// `labels` must point to `count` NUL-terminated strings; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sc_good_turing(labels: *const *const c_char, count: usize, out: *mut f64) -> ScStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let labels = labels_arg(labels, count)?;
        *out = good_turing_coverage(&labels)
            .or_else(|e| fail(ScStatus::CoverageError, e.to_string()))?
            .estimate;
        Ok(())
    })
}

/// Seeded discovery curve over the given sample sizes.
///
/// # Safety
/// `labels` must point to `count` NUL-terminated strings, `sizes` to
/// `size_count` values; `out` valid.
#[no_mangle]
pub unsafe extern "C" fn sc_discovery_curve(
    labels: *const *const c_char,
    count: usize,
    sizes: *const usize,
    size_count: usize,
    repetitions: usize,
    seed: u64,
    out: *mut *mut ScCurve,
) -> ScStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let labels = labels_arg(labels, count)?;
        if sizes.is_null() && size_count > 0 {
            return fail(ScStatus::NullPointer, "sizes is NULL");
        }
        let sizes = if size_count == 0 { &[][..] } else { std::slice::from_raw_parts(sizes, size_count) };
        let curve = discovery_curve(&labels, sizes, repetitions, seed, Execution::Parallel)
            .or_else(|e| fail(ScStatus::CoverageError, e.to_string()))?;
        *out = Box::into_raw(Box::new(ScCurve { curve }));
        Ok(())
    })
}

/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_curve_free(curve: *mut ScCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// Number of points on the curve; 0 for NULL.
///
/// # Safety
/// `curve` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sc_curve_len(curve: *const ScCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.sample_sizes.len())
}

/// # Safety
/// `curve` must be a live handle; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn sc_curve_point(
    curve: *const ScCurve,
    index: usize,
    sample_size: *mut usize,
    mean_distinct: *mut f64,
    stddev: *mut f64,
) -> ScStatus {
    guard(|| {
        let c = &ref_arg(curve, "curve")?.curve;
        if index >= c.sample_sizes.len() {
            return fail(ScStatus::IndexOutOfRange, format!("index {index} of {}", c.sample_sizes.len()));
        }
        *out_arg(sample_size, "sample_size")? = c.sample_sizes[index];
        *out_arg(mean_distinct, "mean_distinct")? = c.mean_distinct[index];
        *out_arg(stddev, "stddev")? = c.stddev[index];
        Ok(())
    })
}

/// Least-squares fit of `K(1 − exp(−n/τ))` to the curve.
///
/// # Safety
/// `curve` must be a live handle; out pointers valid.
#[no_mangle]
pub unsafe extern "C" fn sc_curve_fit(curve: *const ScCurve, k: *mut f64, tau: *mut f64, rmse: *mut f64) -> ScStatus {
    guard(|| {
        let c = ref_arg(curve, "curve")?;
        let (k, tau, rmse) = (out_arg(k, "k")?, out_arg(tau, "tau")?, out_arg(rmse, "rmse")?);
        let fit = fit_saturation(&c.curve).or_else(|e| fail(ScStatus::CoverageError, e.to_string()))?;
        (*k, *tau, *rmse) = (fit.k_hat, fit.tau_hat, fit.rmse);
        Ok(())
    })
}
