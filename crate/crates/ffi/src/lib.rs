//! C ABI over the aimvqe library.
//!
//! Every call returns an [`AimvqeStatus`]; on failure the message is
//! available from [`aimvqe_last_error`] on the same thread. Operators are
//! opaque handles created by `aimvqe_operator_*` constructors and released
//! with [`aimvqe_operator_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use aimvqe::cluster::{exchange_coupling, ClusterParameters};
use aimvqe::error::Error;
use aimvqe::experiment::{cmd_correlation, cmd_jmodel, cmd_sweep, cmd_vqe, LoadedConfig};
use aimvqe::fermion::{szsz_operator, SpinOrbitalIndexing};
use aimvqe::pauli::{parse_operator, QubitOperator};
use aimvqe::spectral::{exact_ground_state, measure_correlation};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AimvqeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Syntax = 3,
    Config = 4,
    Io = 5,
    InvalidArgument = 6,
    Numerical = 7,
    Panic = 8,
}

/// Experiment kinds accepted by [`aimvqe_run_experiment`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AimvqeCommand {
    Vqe = 0,
    Sweep = 1,
    Correlation = 2,
    Jmodel = 3,
}

/// Opaque qubit operator.
pub struct AimvqeOperator {
    inner: QubitOperator,
}

/// Ground-state summary filled by [`aimvqe_operator_ground_state`].
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct AimvqeGroundState {
    pub energy: f64,
    /// NaN when no second level was computed.
    pub gap: f64,
    /// -1 when the state has no definite particle number.
    pub n_electrons: i64,
    pub residual: f64,
    pub degenerate: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AimvqeStatus {
    match e {
        Error::Syntax { .. } | Error::EmptyInput => AimvqeStatus::Syntax,
        Error::Config { .. } | Error::Json(_) | Error::Csv(_) => AimvqeStatus::Config,
        Error::Io(_) => AimvqeStatus::Io,
        Error::IndexOutOfRange { .. }
        | Error::SameSite
        | Error::WidthMismatch { .. }
        | Error::TooWide { .. }
        | Error::OddWidth(_)
        | Error::SingularParameters(_)
        | Error::NotHermitian(_) => AimvqeStatus::InvalidArgument,
        _ => AimvqeStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (AimvqeStatus, String)>) -> AimvqeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            AimvqeStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            AimvqeStatus::Panic
        }
    }
}

fn lib<T>(r: aimvqe::error::Result<T>) -> Result<T, (AimvqeStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), (AimvqeStatus, String)> {
    if p.is_null() {
        Err((AimvqeStatus::NullPointer, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated string.
unsafe fn str_arg<'a>(s: *const c_char, name: &str) -> Result<&'a str, (AimvqeStatus, String)> {
    non_null(s, name)?;
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (AimvqeStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn aimvqe_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn aimvqe_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a Pauli listing held in memory.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_parse(
    text: *const c_char,
    out: *mut *mut AimvqeOperator,
) -> AimvqeStatus {
    guard(|| {
        non_null(out, "out")?;
        let op = lib(parse_operator(str_arg(text, "text")?))?;
        *out = Box::into_raw(Box::new(AimvqeOperator { inner: op }));
        Ok(())
    })
}

/// Reads and parses a Pauli listing from a file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_load(
    path: *const c_char,
    out: *mut *mut AimvqeOperator,
) -> AimvqeStatus {
    guard(|| {
        non_null(out, "out")?;
        let text = lib(std::fs::read_to_string(str_arg(path, "path")?).map_err(Error::from))?;
        let op = lib(parse_operator(&text))?;
        *out = Box::into_raw(Box::new(AimvqeOperator { inner: op }));
        Ok(())
    })
}

/// Releases an operator. Null is ignored.
///
/// # Safety
/// `op` must come from an `aimvqe_operator_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_free(op: *mut AimvqeOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Term count and qubit width.
///
/// # Safety
/// `op` must be a live handle; `terms` and `qubits` writable.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_shape(
    op: *const AimvqeOperator,
    terms: *mut usize,
    qubits: *mut usize,
) -> AimvqeStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(terms, "terms")?;
        non_null(qubits, "qubits")?;
        let op = &(*op).inner;
        *terms = op.len();
        *qubits = op.num_qubits().max(op.declared_qubits().unwrap_or(0));
        Ok(())
    })
}

/// Exact ground state of a Hermitian operator.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_ground_state(
    op: *const AimvqeOperator,
    out: *mut AimvqeGroundState,
) -> AimvqeStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        let g = lib(exact_ground_state(&(*op).inner))?;
        *out = AimvqeGroundState {
            energy: g.energy,
            gap: g.gap.unwrap_or(f64::NAN),
            n_electrons: g.n_electrons.map_or(-1, |k| k as i64),
            residual: g.residual,
            degenerate: g.degenerate,
        };
        Ok(())
    })
}

/// `<S_z(i) S_z(j)>` in the exact ground state, with sites laid out as
/// spin-up/spin-down qubit pairs.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_operator_ground_szsz(
    op: *const AimvqeOperator,
    site_i: usize,
    site_j: usize,
    out: *mut f64,
) -> AimvqeStatus {
    guard(|| {
        non_null(op, "op")?;
        non_null(out, "out")?;
        let op = &(*op).inner;
        let n = op.num_qubits().max(op.declared_qubits().unwrap_or(0));
        let indexing = lib(SpinOrbitalIndexing::for_qubits(n))?;
        lib(szsz_operator(site_i, site_j, &indexing))?;
        let g = lib(exact_ground_state(op))?;
        *out = lib(measure_correlation(&g.state, site_i, site_j, &indexing))?;
        Ok(())
    })
}

/// Exchange coupling of the two-site cluster model, in the units of the inputs.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_exchange_coupling(
    delta: f64,
    t_pd: f64,
    u_d: f64,
    u_p: f64,
    out: *mut f64,
) -> AimvqeStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = lib(exchange_coupling(&ClusterParameters { delta, t_pd, u_d, u_p }))?;
        Ok(())
    })
}

/// Runs an experiment config as the CLI would, writing CSV and JSON into
/// `out_dir` (null: the config's own output directory).
///
/// # Safety
/// `config_path` must be a NUL-terminated string; `out_dir` null or one.
#[no_mangle]
pub unsafe extern "C" fn aimvqe_run_experiment(
    command: AimvqeCommand,
    config_path: *const c_char,
    out_dir: *const c_char,
) -> AimvqeStatus {
    guard(|| {
        let cfg = lib(LoadedConfig::load(Path::new(str_arg(config_path, "config_path")?)))?;
        lib(cfg.config.validate())?;
        let out = if out_dir.is_null() {
            cfg.resolve(&cfg.config.output.dir)
        } else {
            str_arg(out_dir, "out_dir")?.into()
        };
        match command {
            AimvqeCommand::Vqe => lib(cmd_vqe(&cfg, &out).map(drop)),
            AimvqeCommand::Sweep => lib(cmd_sweep(&cfg, &out).map(drop)),
            AimvqeCommand::Correlation => lib(cmd_correlation(&cfg, &out).map(drop)),
            AimvqeCommand::Jmodel => lib(cmd_jmodel(&cfg, &out).map(drop)),
        }
    })
}
