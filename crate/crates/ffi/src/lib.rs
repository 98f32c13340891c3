//! C ABI over the qbench simulator, circuit builders and run harness.
//!
//! Every fallible call returns a [`QbStatus`]. On failure the message is kept
//! per thread and can be read with [`qb_last_error`]. Handles are opaque and
//! must be released with the matching `*_free` function. Strings returned
//! through `char **` out-parameters are owned by the caller and released with
//! [`qb_string_free`].

use qbench::backend::Backend;
use qbench::gates::{Mat2, C64};
use qbench::harness::{self, Benchmark, RunManifest};
use qbench::riemann::{self, ExtComplex};
use qbench::sim::{self, StateVector};
use qbench::{bell, Circuit, Error, Gate};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidCircuit = 3,
    WidthExceeded = 4,
    ZeroBranch = 5,
    InvalidConfig = 6,
    MissingData = 7,
    Backend = 8,
    Io = 9,
    Panic = 10,
    Other = 11,
}

/// Opaque circuit handle.
pub struct QbCircuit(Circuit);

/// Opaque simulated state handle.
pub struct QbState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QbStatus {
    match e {
        Error::InvalidGate(_) | Error::InvalidCircuit(_) => QbStatus::InvalidCircuit,
        Error::WidthExceeded { .. } => QbStatus::WidthExceeded,
        Error::ZeroBranch(_) => QbStatus::ZeroBranch,
        Error::InvalidConfig(_) | Error::Json(_) | Error::NormViolation(_) => QbStatus::InvalidConfig,
        Error::MissingData(_) | Error::EmptyHistogram | Error::IncompleteCoverage(_) => QbStatus::MissingData,
        Error::Backend(_) | Error::Timeout(_) | Error::MalformedJob(_) => QbStatus::Backend,
        Error::Io(_) => QbStatus::Io,
        _ => QbStatus::Other,
    }
}

enum Fail {
    Null(&'static str),
    Arg(String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any failure (including panics) and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> QbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            QbStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            QbStatus::NullPointer
        }
        Ok(Err(Fail::Arg(msg))) => {
            set_error(msg);
            QbStatus::InvalidArgument
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            QbStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{what} is not UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or(Fail::Null(what))
}

unsafe fn circuit_ref<'a>(c: *const QbCircuit) -> Result<&'a Circuit, Fail> {
    c.as_ref().map(|c| &c.0).ok_or(Fail::Null("circuit"))
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let slot = out_ptr(out, "out")?;
    *slot = CString::new(s).map_err(|_| Fail::Arg("string contains NUL".into()))?.into_raw();
    Ok(())
}

unsafe fn write_circuit(out: *mut *mut QbCircuit, c: Circuit) -> Result<(), Fail> {
    let slot = out_ptr(out, "out")?;
    *slot = Box::into_raw(Box::new(QbCircuit(c)));
    Ok(())
}

/// Reads a row-major 2×2 complex matrix from 8 doubles (re, im pairs).
unsafe fn read_matrix(m: *const f64) -> Result<Mat2, Fail> {
    if m.is_null() {
        return Err(Fail::Null("matrix"));
    }
    let v = std::slice::from_raw_parts(m, 8);
    Ok(Mat2::new(
        C64::new(v[0], v[1]),
        C64::new(v[2], v[3]),
        C64::new(v[4], v[5]),
        C64::new(v[6], v[7]),
    ))
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn qb_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn qb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_new(n_qubits: usize, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| {
        if n_qubits == 0 || n_qubits > sim::MAX_WIDTH {
            return Err(Fail::Arg(format!("n_qubits must be in 1..={}", sim::MAX_WIDTH)));
        }
        write_circuit(out, Circuit::new(n_qubits))
    })
}

/// Parses a circuit from its JSON form.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_from_json(json: *const c_char, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| {
        let parsed = serde_json::from_str(str_arg(json, "json")?).map_err(Error::from)?;
        write_circuit(out, Circuit::from_json(&parsed)?)
    })
}

/// # Safety
/// `c` must be a valid circuit and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_to_json(c: *const QbCircuit, out: *mut *mut c_char) -> QbStatus {
    guard(|| {
        let json = serde_json::to_string(&circuit_ref(c)?.to_json()).map_err(Error::from)?;
        write_string(out, json)
    })
}

/// # Safety
/// `c` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_free(c: *mut QbCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Appends a single-qubit gate. `matrix` holds 8 doubles: row-major
/// entries as (re, im) pairs.
///
/// # Safety
/// `c` must be a valid circuit, `label` a NUL-terminated string and
/// `matrix` must point at 8 doubles.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_push_1q(
    c: *mut QbCircuit,
    label: *const c_char,
    target: usize,
    matrix: *const f64,
) -> QbStatus {
    guard(|| {
        let circuit = &mut out_ptr(c, "circuit")?.0;
        let g = Gate::try_new(str_arg(label, "label")?, target, None, read_matrix(matrix)?)?;
        circuit.try_push(g)?;
        Ok(())
    })
}

/// Appends a singly-controlled gate with the same matrix layout as
/// [`qb_circuit_push_1q`].
///
/// # Safety
/// As for [`qb_circuit_push_1q`].
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_push_controlled(
    c: *mut QbCircuit,
    label: *const c_char,
    control: usize,
    target: usize,
    matrix: *const f64,
) -> QbStatus {
    guard(|| {
        let circuit = &mut out_ptr(c, "circuit")?.0;
        let g = Gate::try_new(str_arg(label, "label")?, target, Some(control), read_matrix(matrix)?)?;
        circuit.try_push(g)?;
        Ok(())
    })
}

/// Requires `qubit` to read `bit` (0 or 1) for a shot to count.
///
/// # Safety
/// `c` must be a valid circuit.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_postselect(c: *mut QbCircuit, qubit: usize, bit: u8) -> QbStatus {
    guard(|| {
        out_ptr(c, "circuit")?.0.set_postselect(qubit, bit)?;
        Ok(())
    })
}

/// Writes qubit count, gate count (basis rotations included), two-qubit gate
/// count and depth. Any out pointer may be NULL.
///
/// # Safety
/// `c` must be a valid circuit; non-NULL out pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_circuit_stats(
    c: *const QbCircuit,
    n_qubits: *mut usize,
    gates: *mut usize,
    two_qubit: *mut usize,
    depth: *mut usize,
) -> QbStatus {
    guard(|| {
        let c = circuit_ref(c)?;
        for (p, v) in [
            (n_qubits, c.n_qubits()),
            (gates, c.gate_count(true)),
            (two_qubit, c.two_qubit_count()),
            (depth, c.depth_with_rotations()),
        ] {
            if let Some(p) = p.as_mut() {
                *p = v;
            }
        }
        Ok(())
    })
}

/// Bell-test circuit along `path` with analyser angles `theta_a`, `theta_b`.
///
/// # Safety
/// `path` must point at `path_len` indices; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_bell_circuit(
    n_qubits: usize,
    path: *const usize,
    path_len: usize,
    theta_a: f64,
    theta_b: f64,
    out: *mut *mut QbCircuit,
) -> QbStatus {
    guard(|| {
        if path.is_null() {
            return Err(Fail::Null("path"));
        }
        let path = std::slice::from_raw_parts(path, path_len);
        write_circuit(out, bell::bell_circuit(n_qubits, path, theta_a, theta_b)?)
    })
}

/// Level-`level` circuit of the microscope map at pixel `z`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_microscope_circuit(level: u32, re: f64, im: f64, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| write_circuit(out, riemann::microscope_circuit(level, ExtComplex::finite(re, im))?))
}

/// Level-`level` Mandelbrot circuit for parameter `c`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_mandelbrot_circuit(level: u32, re: f64, im: f64, out: *mut *mut QbCircuit) -> QbStatus {
    guard(|| write_circuit(out, riemann::mandelbrot_circuit(level, C64::new(re, im))?))
}

/// Simulates `c` from |0…0⟩ (post-selection is not applied).
///
/// # Safety
/// `c` must be a valid circuit and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_simulate(c: *const QbCircuit, out: *mut *mut QbState) -> QbStatus {
    guard(|| {
        let s = sim::simulate(circuit_ref(c)?)?;
        *out_ptr(out, "out")? = Box::into_raw(Box::new(QbState(s)));
        Ok(())
    })
}

/// # Safety
/// `s` must be NULL or a handle from this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn qb_state_free(s: *mut QbState) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of amplitudes, or 0 for NULL.
///
/// # Safety
/// `s` must be NULL or a valid state.
#[no_mangle]
pub unsafe extern "C" fn qb_state_len(s: *const QbState) -> usize {
    s.as_ref().map_or(0, |s| s.0.amplitudes().len())
}

/// Copies amplitudes as interleaved (re, im) into `buf`, which must hold
/// `2 * qb_state_len(s)` doubles; `buf_len` is its length in doubles.
///
/// # Safety
/// `s` must be a valid state and `buf` must point at `buf_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn qb_state_amplitudes(s: *const QbState, buf: *mut f64, buf_len: usize) -> QbStatus {
    guard(|| {
        let s = s.as_ref().ok_or(Fail::Null("state"))?;
        if buf.is_null() {
            return Err(Fail::Null("buf"));
        }
        let amps = s.0.amplitudes();
        if buf_len < 2 * amps.len() {
            return Err(Fail::Arg(format!("buffer holds {buf_len} doubles, need {}", 2 * amps.len())));
        }
        let out = std::slice::from_raw_parts_mut(buf, 2 * amps.len());
        for (k, a) in amps.iter().enumerate() {
            out[2 * k] = a.re;
            out[2 * k + 1] = a.im;
        }
        Ok(())
    })
}

/// Samples `shots` readouts of `c` with its post-selection and writes the
/// histogram JSON to `out`. Deterministic in `seed`.
///
/// # Safety
/// `c` must be a valid circuit and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn qb_sample(c: *const QbCircuit, shots: u64, seed: u64, out: *mut *mut c_char) -> QbStatus {
    guard(|| {
        let c = circuit_ref(c)?;
        let state = sim::simulate(c)?;
        let h = sim::measure::sample(&state, shots, c.postselect(), seed);
        write_string(out, serde_json::to_string(&h).map_err(Error::from)?)
    })
}

/// Runs a benchmark into `dir` and writes the scores JSON to `out`.
/// `benchmark_json` is the benchmark part of a run manifest (tagged by
/// `"benchmark"`); `backend` is `exact`, `sample` or `noisy:<file>`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn qb_run(
    benchmark_json: *const c_char,
    backend: *const c_char,
    seed: u64,
    dir: *const c_char,
    out: *mut *mut c_char,
) -> QbStatus {
    guard(|| {
        let bench: Benchmark = serde_json::from_str(str_arg(benchmark_json, "benchmark_json")?).map_err(Error::from)?;
        let dir = Path::new(str_arg(dir, "dir")?);
        let backend = Backend::parse(str_arg(backend, "backend")?, &dir.join("queue"))?;
        if matches!(backend, Backend::MockRemote(_)) {
            return Err(Fail::Arg("mock-remote needs the qbench executable as worker".into()));
        }
        let manifest = RunManifest::new(bench, &backend, seed);
        let scores = harness::run(manifest, backend, dir)?;
        write_string(out, serde_json::to_string(&scores).map_err(Error::from)?)
    })
}
