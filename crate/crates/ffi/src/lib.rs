//! C ABI over the `fiberopt` optimizer.
//!
//! Objects cross the boundary as opaque handles (`FoConfig`, `FoRun`) that
//! are created and released by this library. Every fallible call returns an
//! [`FoStatus`]; on failure the message is kept per thread and can be copied
//! out with [`fo_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fiberopt::cli_io::{snapshot_vtk, write_history, OptConfig};
use fiberopt::optimizer::{Problem, RunResult, RunStatus, Snapshot};
use fiberopt::Error;

/// Status codes; the numeric values of the first five match the CLI exit
/// codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Invalid configuration key, value or file syntax.
    Validation = 2,
    /// Numerical failure: singular tensor, failed factorization, degenerate
    /// fractions.
    Solver = 3,
    /// The run hit its iteration limit. The run handle is still produced.
    NonConvergence = 4,
    Io = 5,
    /// Bad non-pointer argument: invalid UTF-8, index out of range, short
    /// output buffer.
    InvalidArgument = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Optimization settings.
pub struct FoConfig(OptConfig);

/// A finished optimization with its final design.
pub struct FoRun {
    problem: Problem,
    result: RunResult,
}

/// One row of the optimization history.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoStepRecord {
    pub step: usize,
    pub compliance: f64,
    pub weight_violation: f64,
    pub lambda: f64,
    pub integral: f64,
    pub lagrangian: f64,
    pub max_dphi: f64,
    pub wall_ms: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

struct Failure(FoStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.root() {
            Error::Io(_) => FoStatus::Io,
            _ if e.exit_code() == 2 => FoStatus::Validation,
            _ => FoStatus::Solver,
        };
        Failure(status, e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(FoStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(FoStatus::NullArgument, format!("`{name}` is null"))
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

/// Runs `f`, records any failure or panic and converts it to a status.
fn guard(f: impl FnOnce() -> Result<FoStatus, Failure>) -> FoStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => {
            if status == FoStatus::Ok {
                set_error(String::new());
            }
            status
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FoStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

/// Copies `s` with a terminating NUL into `buf` when it fits and returns the
/// length of `s` in bytes (without the NUL). With a null `buf` or a `cap`
/// of zero nothing is written.
unsafe fn copy_out(s: &str, buf: *mut c_char, cap: usize) -> usize {
    if !buf.is_null() && cap > 0 {
        let n = s.len().min(cap - 1);
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
    }
    s.len()
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fo_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated to
/// `cap − 1` bytes, NUL-terminated) and returns its full length. Pass a null
/// buffer to query the length. The message is empty after a successful
/// call.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fo_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| copy_out(&e.borrow(), buf, cap))
}

/// New configuration holding the defaults. Release with [`fo_config_free`].
#[no_mangle]
pub extern "C" fn fo_config_new() -> *mut FoConfig {
    Box::into_raw(Box::new(FoConfig(OptConfig::default())))
}

/// Loads and validates a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fo_config_load(path: *const c_char, out: *mut *mut FoConfig) -> FoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let path = text(path, "path")?;
        let cfg = fiberopt::cli_io::load_config(Path::new(path))?;
        *out = Box::into_raw(Box::new(FoConfig(cfg)));
        Ok(FoStatus::Ok)
    })
}

/// Sets one key using the config-file syntax for its value. The whole
/// configuration is revalidated; on failure it is left unchanged.
///
/// # Safety
/// `cfg` must be a live handle; `key` and `value` NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fo_config_set(cfg: *mut FoConfig, key: *const c_char, value: *const c_char) -> FoStatus {
    guard(|| {
        let cfg = cfg.as_mut().ok_or_else(|| null("cfg"))?;
        let (key, value) = (text(key, "key")?, text(value, "value")?);
        let mut next = cfg.0.clone();
        next.set(key, value.trim())?;
        next.validate()?;
        cfg.0 = next;
        Ok(FoStatus::Ok)
    })
}

/// Writes the effective configuration in loadable text form; see
/// [`fo_last_error_message`] for the buffer convention. Returns 0 for a null
/// handle.
///
/// # Safety
/// `cfg` must be null or a live handle; `buf` null or `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn fo_config_echo(cfg: *const FoConfig, buf: *mut c_char, cap: usize) -> usize {
    match cfg.as_ref() {
        Some(c) => copy_out(&c.0.echo(), buf, cap),
        None => 0,
    }
}

/// # Safety
/// `cfg` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fo_config_free(cfg: *mut FoConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Runs the optimization described by `cfg` from its initial design.
///
/// On `Ok` and `NonConvergence` `*out` receives a run handle to release
/// with [`fo_run_free`]; on any other status it is set to null.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fo_run(cfg: *const FoConfig, out: *mut *mut FoRun) -> FoStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = handle(cfg, "cfg")?;
        let problem = Problem::new(&cfg.0)?;
        let result = problem.run_from(problem.initial_design()?, |_| Ok(()))?;
        let status = match result.status {
            RunStatus::Converged => FoStatus::Ok,
            RunStatus::NonConvergence => FoStatus::NonConvergence,
        };
        if status == FoStatus::NonConvergence {
            set_error(format!("no convergence within {} steps", cfg.0.max_iters));
        }
        *out = Box::into_raw(Box::new(FoRun { problem, result }));
        Ok(status)
    })
}

/// Whether the run met the convergence criteria; false for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fo_run_converged(run: *const FoRun) -> bool {
    run.as_ref().is_some_and(|r| r.result.status == RunStatus::Converged)
}

/// Number of history rows (iterations including step 0); 0 for a null
/// handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fo_run_step_count(run: *const FoRun) -> usize {
    run.as_ref().map_or(0, |r| r.result.history.len())
}

/// Copies history row `index` into `out`.
///
/// # Safety
/// `run` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fo_run_step(run: *const FoRun, index: usize, out: *mut FoStepRecord) -> FoStatus {
    guard(|| {
        let run = handle(run, "run")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let records = run.result.history.records();
        let r = records
            .get(index)
            .ok_or_else(|| invalid(format!("step index {index} out of range (0..{})", records.len())))?;
        *out = FoStepRecord {
            step: r.step,
            compliance: r.compliance,
            weight_violation: r.weight_violation,
            lambda: r.lambda,
            integral: r.integral,
            lagrangian: r.lagrangian,
            max_dphi: r.max_dphi,
            wall_ms: r.wall_ms,
        };
        Ok(FoStatus::Ok)
    })
}

/// Number of mesh elements; 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn fo_run_element_count(run: *const FoRun) -> usize {
    run.as_ref().map_or(0, |r| r.problem.mesh.n_elements())
}

/// Final smoothed phase fractions, three values (void, isotropic, fiber)
/// per element; `len` must be at least `3 × element count`.
///
/// # Safety
/// `run` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fo_run_fractions(run: *const FoRun, out: *mut f64, len: usize) -> FoStatus {
    guard(|| {
        let run = handle(run, "run")?;
        let values: Vec<f64> = run.result.evaluation.fractions.0.iter().flatten().copied().collect();
        fill(&values, out, len)
    })
}

/// Final fiber angles in radians, one per element, in `[0, π)`.
///
/// # Safety
/// `run` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fo_run_angles(run: *const FoRun, out: *mut f64, len: usize) -> FoStatus {
    guard(|| {
        let run = handle(run, "run")?;
        fill(&run.result.evaluation.angles, out, len)
    })
}

unsafe fn fill(values: &[f64], out: *mut f64, len: usize) -> Result<FoStatus, Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    if len < values.len() {
        return Err(invalid(format!("buffer holds {len} values, {} needed", values.len())));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(FoStatus::Ok)
}

/// Writes `config.echo`, `history.csv` and the final snapshot
/// (`final.vtk`) into `dir`, creating it if needed.
///
/// # Safety
/// `run` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn fo_run_write(run: *const FoRun, dir: *const c_char) -> FoStatus {
    guard(|| {
        let run = handle(run, "run")?;
        let dir = Path::new(text(dir, "dir")?);
        run.problem.config.write_echo(dir)?;
        write_history(dir, &run.result.history)?;
        let snap = Snapshot {
            step: run.result.history.last().map_or(0, |r| r.step),
            mesh: &run.problem.mesh,
            design: &run.result.design,
            evaluation: &run.result.evaluation,
        };
        std::fs::write(dir.join("final.vtk"), snapshot_vtk(&snap)).map_err(Error::from)?;
        Ok(FoStatus::Ok)
    })
}

/// # Safety
/// `run` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn fo_run_free(run: *mut FoRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
