//! C ABI for `rmls`.
//!
//! Every fallible call returns an [`RmlsStatus`]; on failure a description is
//! available from [`rmls_last_error`] on the same thread. Instances are opaque
//! handles owned by the caller and released with [`rmls_instance_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use rmls::engine::{run_ensemble, EngineConfig};
use rmls::hamiltonian::{gap_lower_bound, EmbeddingMode, Variant};
use rmls::instance::{
    exact_solution, generate_with_kappa, load_instance, save_instance, GeneratorConfig,
    QlspInstance,
};
use rmls::schedule::{build_schedule_with_steps, gate_cost_estimate, s_of_v, v_bounds};
use rmls::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmlsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// Input failed a mathematical precondition such as Hermiticity or norm.
    Validation = 3,
    /// Post-selection exhausted its attempts.
    PostSelection = 4,
    Io = 5,
    /// Output buffer shorter than required; nothing was written.
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmlsVariant {
    GroundState = 0,
    GapAmplified = 1,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RmlsMode {
    General = 0,
    PositiveDefinite = 1,
}

impl From<RmlsVariant> for Variant {
    fn from(v: RmlsVariant) -> Self {
        match v {
            RmlsVariant::GroundState => Variant::GroundState,
            RmlsVariant::GapAmplified => Variant::GapAmplified,
        }
    }
}

impl From<RmlsMode> for EmbeddingMode {
    fn from(m: RmlsMode) -> Self {
        match m {
            RmlsMode::General => EmbeddingMode::General,
            RmlsMode::PositiveDefinite => EmbeddingMode::PositiveDefinite,
        }
    }
}

/// Opaque instance handle.
pub struct RmlsInstance {
    inner: QlspInstance,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RmlsEnsembleSummary {
    /// Trace distance of the reduced output to `|x><x|`.
    pub error: f64,
    pub expected_total_time: f64,
    pub full_space_fidelity: f64,
    pub q: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RmlsGateCost {
    pub tau: f64,
    pub segments: u64,
    pub truncation_order: u32,
    pub queries: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let c = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> RmlsStatus {
    match err {
        Error::Io { .. } => RmlsStatus::Io,
        Error::PostSelection { .. } => RmlsStatus::PostSelection,
        Error::InvalidArgument(_) | Error::KappaCeiling { .. } => RmlsStatus::InvalidArgument,
        _ => RmlsStatus::Validation,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (RmlsStatus, String)>) -> RmlsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_last_error("");
            RmlsStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            RmlsStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (RmlsStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (RmlsStatus, String) {
    (RmlsStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `p` must be null or valid for writes of `T`.
unsafe fn write_out<T>(p: *mut T, value: T, what: &str) -> Result<(), (RmlsStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// # Safety
/// `inst` must be null or a live handle.
unsafe fn instance_ref<'a>(
    inst: *const RmlsInstance,
) -> Result<&'a QlspInstance, (RmlsStatus, String)> {
    inst.as_ref()
        .map(|i| &i.inner)
        .ok_or_else(|| null("instance"))
}

/// # Safety
/// `path` must be null or a NUL-terminated string.
unsafe fn path_arg(path: *const c_char) -> Result<String, (RmlsStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| {
            (
                RmlsStatus::InvalidArgument,
                "path is not valid UTF-8".to_string(),
            )
        })
}

/// Message for the most recent failed call on this thread; empty after a
/// success. Valid until the next `rmls_*` call on this thread.
#[no_mangle]
pub extern "C" fn rmls_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Generates an instance with `2^n` rows, at most `d` nonzeros per row and
/// condition number within `kappa_tol` of `kappa`, drawing at most
/// `max_attempts` candidates (0 selects the library default).
///
/// # Safety
/// `out` must be valid for writes; on success it receives a new handle.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_generate(
    n: u32,
    d: usize,
    kappa: f64,
    kappa_tol: f64,
    seed: u64,
    max_attempts: usize,
    out: *mut *mut RmlsInstance,
) -> RmlsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = GeneratorConfig::new(n, d, kappa, seed);
        cfg.kappa_tol = kappa_tol;
        if max_attempts > 0 {
            cfg.max_attempts = max_attempts;
        }
        let inner = generate_with_kappa(&cfg).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(RmlsInstance { inner })), "out")
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_load(
    path: *const c_char,
    out: *mut *mut RmlsInstance,
) -> RmlsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = load_instance(path_arg(path)?).map_err(lib_err)?;
        write_out(out, Box::into_raw(Box::new(RmlsInstance { inner })), "out")
    })
}

/// # Safety
/// `inst` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_save(
    inst: *const RmlsInstance,
    path: *const c_char,
) -> RmlsStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        save_instance(inst, path_arg(path)?).map_err(lib_err)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `inst` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_free(inst: *mut RmlsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_kappa(
    inst: *const RmlsInstance,
    out: *mut f64,
) -> RmlsStatus {
    guard(|| write_out(out, instance_ref(inst)?.kappa(), "out"))
}

/// Dimension `N` of the linear system.
///
/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_dim(
    inst: *const RmlsInstance,
    out: *mut usize,
) -> RmlsStatus {
    guard(|| write_out(out, instance_ref(inst)?.dim(), "out"))
}

/// Writes the normalized solution `|x>` as separate real and imaginary parts.
///
/// # Safety
/// `re` and `im` must each be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_instance_exact_solution(
    inst: *const RmlsInstance,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> RmlsStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        if len < inst.dim() {
            return Err((
                RmlsStatus::BufferTooSmall,
                format!("buffer holds {len} values, need {}", inst.dim()),
            ));
        }
        let x = exact_solution(inst).map_err(lib_err)?;
        for (i, a) in x.amplitudes().iter().enumerate() {
            re.add(i).write(a.re);
            im.add(i).write(a.im);
        }
        Ok(())
    })
}

/// Runs `n_rep` repetitions over a `q`-step schedule on the global thread pool.
///
/// # Safety
/// `inst` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_run_ensemble(
    inst: *const RmlsInstance,
    variant: RmlsVariant,
    mode: RmlsMode,
    q: usize,
    n_rep: usize,
    master_seed: u64,
    out: *mut RmlsEnsembleSummary,
) -> RmlsStatus {
    guard(|| {
        let inst = instance_ref(inst)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let sched = build_schedule_with_steps(inst.kappa(), variant.into(), q).map_err(lib_err)?;
        let res = run_ensemble(
            inst,
            &sched,
            n_rep,
            master_seed,
            &EngineConfig::with_mode(mode.into()),
        )
        .map_err(lib_err)?;
        write_out(
            out,
            RmlsEnsembleSummary {
                error: res.error,
                expected_total_time: res.total_expected_time,
                full_space_fidelity: res.full_space_fidelity,
                q,
            },
            "out",
        )
    })
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_s_of_v(v: f64, kappa: f64, out: *mut f64) -> RmlsStatus {
    guard(|| write_out(out, s_of_v(v, kappa).map_err(lib_err)?, "out"))
}

/// # Safety
/// `v_a` and `v_b` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_v_bounds(kappa: f64, v_a: *mut f64, v_b: *mut f64) -> RmlsStatus {
    guard(|| {
        if v_a.is_null() || v_b.is_null() {
            return Err(null("output"));
        }
        let (a, b) = v_bounds(kappa).map_err(lib_err)?;
        v_a.write(a);
        v_b.write(b);
        Ok(())
    })
}

/// `(1-s)^2 + (s/kappa)^2`.
#[no_mangle]
pub extern "C" fn rmls_gap_lower_bound(s: f64, kappa: f64) -> f64 {
    gap_lower_bound(s, kappa)
}

/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rmls_gate_cost(
    total_time: f64,
    d: usize,
    epsilon: f64,
    out: *mut RmlsGateCost,
) -> RmlsStatus {
    guard(|| {
        let g = gate_cost_estimate(total_time, d, epsilon).map_err(lib_err)?;
        write_out(
            out,
            RmlsGateCost {
                tau: g.tau,
                segments: g.r,
                truncation_order: g.k,
                queries: g.queries,
            },
            "out",
        )
    })
}
