//! C ABI over the `feynbohm` library.
//!
//! Objects cross the boundary as opaque handles created by `fb_*_new`
//! style constructors and released with the matching `fb_*_free`. Every
//! fallible call returns an [`FbStatus`]; on failure a description is kept
//! per thread and can be read with [`fb_last_error_message`]. Outputs are
//! written through caller-provided pointers only on success.
//!
//! Complex data is passed as two parallel `double` arrays (real and
//! imaginary parts). Matrices are row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use feynbohm::bohm::ensemble_equivariance;
use feynbohm::euclid::{euclidean_kernel, ground_energy_estimate};
use feynbohm::evolution::{build_hamiltonian, evolve, unitary_step, Hamiltonian, UnitaryStep};
use feynbohm::measures::{measure_vs_born_report, MeasureVariant, VariantStatus};
use feynbohm::pathsum::path_sum_evolve;
use feynbohm::scenario::{execute, parse_config, ExecuteError};
use feynbohm::state::{born_distribution, normalize, Boundary, GridSpec, PhysicsParams, Space, WaveFunction};
use feynbohm::{Complex64, Error};
use nalgebra::{DMatrix, DVector};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotNormalized = 3,
    SpaceMismatch = 4,
    NotHermitian = 5,
    NotUnitary = 6,
    EnumerationCapExceeded = 7,
    DegenerateMeasure = 8,
    NumericalFailure = 9,
    NotConverged = 10,
    ConfigError = 11,
    IoError = 12,
    BufferTooSmall = 13,
    InvalidUtf8 = 14,
    Panic = 15,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbBoundary {
    Periodic = 0,
    Dirichlet = 1,
}

/// Order of the per-variant arrays filled by [`fb_measure_report`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbMeasureVariant {
    PositiveReal = 0,
    PositiveImag = 1,
    Modulus = 2,
}

pub struct FbGrid(GridSpec);
pub struct FbHamiltonian(Hamiltonian);
pub struct FbWaveFunction(WaveFunction);
pub struct FbUnitary(UnitaryStep);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FbStatus {
    match e {
        Error::ZeroNorm | Error::NotNormalized { .. } => FbStatus::NotNormalized,
        Error::SpaceMismatch => FbStatus::SpaceMismatch,
        Error::NotHermitian { .. } => FbStatus::NotHermitian,
        Error::NotUnitary { .. } => FbStatus::NotUnitary,
        Error::EnumerationCapExceeded { .. } => FbStatus::EnumerationCapExceeded,
        Error::DegenerateMeasure { .. } => FbStatus::DegenerateMeasure,
        Error::NotConverged { .. } => FbStatus::NotConverged,
        Error::EigendecompositionFailure
        | Error::NormCollapse { .. }
        | Error::NormBlowup { .. }
        | Error::MassCollapse { .. }
        | Error::ComplexHamiltonian { .. } => FbStatus::NumericalFailure,
        _ => FbStatus::InvalidArgument,
    }
}

struct Failure(FbStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> Outcome) -> FbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FbStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FbStatus::Panic
        }
    }
}

fn null(what: &str) -> Failure {
    Failure(FbStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Outcome<&'a T> {
    unsafe { p.as_ref() }.ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &str) -> Outcome<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

unsafe fn out_slice<'a>(p: *mut f64, len: usize, what: &str) -> Outcome<&'a mut [f64]> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

unsafe fn put<T>(out: *mut T, value: T) -> Outcome {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    unsafe { out.write(value) };
    Ok(())
}

unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Outcome {
    unsafe { put(out, Box::into_raw(Box::new(value))) }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(null(what));
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Failure(FbStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn complex(re: &[f64], im: &[f64]) -> Vec<Complex64> {
    re.iter().zip(im).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// Description of the last failure on this thread, or null after a success.
///
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn fb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `boundary` takes an [`FbBoundary`] value.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_grid_new(x_min: f64, x_max: f64, n_points: usize, boundary: i32, out: *mut *mut FbGrid) -> FbStatus {
    guard(|| {
        let b = match boundary {
            x if x == FbBoundary::Periodic as i32 => Boundary::Periodic,
            x if x == FbBoundary::Dirichlet as i32 => Boundary::Dirichlet,
            other => return Err(Failure(FbStatus::InvalidArgument, format!("unknown boundary {other}"))),
        };
        unsafe { put_handle(out, FbGrid(GridSpec::new(x_min, x_max, n_points, b)?)) }
    })
}

/// # Safety
/// `grid` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_grid_points(grid: *const FbGrid, out: *mut usize) -> FbStatus {
    guard(|| unsafe { put(out, handle(grid, "grid")?.0.n_points()) })
}

/// # Safety
/// `grid` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_grid_dx(grid: *const FbGrid, out: *mut f64) -> FbStatus {
    guard(|| unsafe { put(out, handle(grid, "grid")?.0.dx()) })
}

/// # Safety
/// `grid` must come from [`fb_grid_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fb_grid_free(grid: *mut FbGrid) {
    free(grid)
}

/// Finite-difference Hamiltonian with `potential` sampled on every grid point.
///
/// # Safety
/// `potential` must hold `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_hamiltonian_new(
    grid: *const FbGrid,
    potential: *const f64,
    len: usize,
    hbar: f64,
    mass: f64,
    out: *mut *mut FbHamiltonian,
) -> FbStatus {
    guard(|| unsafe {
        let g = handle(grid, "grid")?.0;
        let v = slice(potential, len, "potential")?;
        let h = build_hamiltonian(g, v, PhysicsParams::new(hbar, mass)?)?;
        put_handle(out, FbHamiltonian(h))
    })
}

/// Lowest eigenvalue from the dense eigendecomposition.
///
/// # Safety
/// `h` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_hamiltonian_min_eigenvalue(h: *const FbHamiltonian, out: *mut f64) -> FbStatus {
    guard(|| unsafe {
        let eig = handle(h, "hamiltonian")?.0.eigen()?;
        put(out, eig.values()[0])
    })
}

/// # Safety
/// `h` must come from [`fb_hamiltonian_new`] or be null.
#[no_mangle]
pub unsafe extern "C" fn fb_hamiltonian_free(h: *mut FbHamiltonian) {
    free(h)
}

/// Normalized Gaussian packet; `width` is the standard deviation of `|psi|^2`.
///
/// # Safety
/// `grid` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_gaussian(
    grid: *const FbGrid,
    center: f64,
    width: f64,
    wavenumber: f64,
    out: *mut *mut FbWaveFunction,
) -> FbStatus {
    guard(|| unsafe {
        let g = handle(grid, "grid")?.0;
        put_handle(out, FbWaveFunction(WaveFunction::gaussian(g, center, width, wavenumber)?))
    })
}

/// State on a grid (`grid` non-null) or on a finite space of size `len`.
/// Amplitudes are taken as given; see [`fb_wavefunction_normalize`].
///
/// # Safety
/// `re` and `im` must hold `len` doubles; `grid` is a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_new(
    grid: *const FbGrid,
    re: *const f64,
    im: *const f64,
    len: usize,
    out: *mut *mut FbWaveFunction,
) -> FbStatus {
    guard(|| unsafe {
        let space = match grid.as_ref() {
            Some(g) => Space::Grid(g.0),
            None => Space::finite(len)?,
        };
        let amps = complex(slice(re, len, "re")?, slice(im, len, "im")?);
        put_handle(out, FbWaveFunction(WaveFunction::new(space, DVector::from_vec(amps), 0.0)?))
    })
}

/// # Safety
/// `psi` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_normalize(psi: *const FbWaveFunction, out: *mut *mut FbWaveFunction) -> FbStatus {
    guard(|| unsafe { put_handle(out, FbWaveFunction(normalize(&handle(psi, "psi")?.0)?)) })
}

/// # Safety
/// `psi` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_len(psi: *const FbWaveFunction, out: *mut usize) -> FbStatus {
    guard(|| unsafe { put(out, handle(psi, "psi")?.0.len()) })
}

/// Copies the amplitudes into `re` and `im`, each of capacity `cap`.
///
/// # Safety
/// `re` and `im` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_amplitudes(psi: *const FbWaveFunction, re: *mut f64, im: *mut f64, cap: usize) -> FbStatus {
    guard(|| unsafe {
        let psi = &handle(psi, "psi")?.0;
        let n = psi.len();
        if cap < n {
            return Err(Failure(FbStatus::BufferTooSmall, format!("need {n} entries, got {cap}")));
        }
        let (re, im) = (out_slice(re, n, "re")?, out_slice(im, n, "im")?);
        for (j, a) in psi.amplitudes().iter().enumerate() {
            re[j] = a.re;
            im[j] = a.im;
        }
        Ok(())
    })
}

/// Born probabilities per configuration into `out` (capacity `cap`).
///
/// # Safety
/// `out` must be valid for `cap` writes.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_born(psi: *const FbWaveFunction, out: *mut f64, cap: usize) -> FbStatus {
    guard(|| unsafe {
        let d = born_distribution(&handle(psi, "psi")?.0)?;
        let w = d.weights();
        if cap < w.len() {
            return Err(Failure(FbStatus::BufferTooSmall, format!("need {} entries, got {cap}", w.len())));
        }
        out_slice(out, w.len(), "out")?.copy_from_slice(w);
        Ok(())
    })
}

/// # Safety
/// `psi` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fb_wavefunction_free(psi: *mut FbWaveFunction) {
    free(psi)
}

/// `exp(-i dt H / hbar)`.
///
/// # Safety
/// `h` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_unitary_from_hamiltonian(h: *const FbHamiltonian, dt: f64, out: *mut *mut FbUnitary) -> FbStatus {
    guard(|| unsafe { put_handle(out, FbUnitary(unitary_step(&handle(h, "hamiltonian")?.0, dt)?)) })
}

/// Unitary step on a finite space of size `n` from row-major parts.
///
/// # Safety
/// `re` and `im` must hold `n * n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fb_unitary_from_matrix(n: usize, re: *const f64, im: *const f64, dt: f64, out: *mut *mut FbUnitary) -> FbStatus {
    guard(|| unsafe {
        let len = n.checked_mul(n).ok_or_else(|| Failure(FbStatus::InvalidArgument, "matrix size overflows".into()))?;
        let vals = complex(slice(re, len, "re")?, slice(im, len, "im")?);
        let m = DMatrix::from_row_slice(n, n, &vals);
        put_handle(out, FbUnitary(UnitaryStep::from_matrix(Space::finite(n)?, m, dt)?))
    })
}

/// # Safety
/// `u` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fb_unitary_free(u: *mut FbUnitary) {
    free(u)
}

/// Applies the step `steps` times by matrix products.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_evolve(u: *const FbUnitary, psi: *const FbWaveFunction, steps: usize, out: *mut *mut FbWaveFunction) -> FbStatus {
    guard(|| unsafe {
        let r = evolve(&handle(u, "unitary")?.0, &handle(psi, "psi")?.0, steps)?;
        put_handle(out, FbWaveFunction(r))
    })
}

/// Same result as [`fb_evolve`] by summing over every discrete path.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_path_sum_evolve(
    u: *const FbUnitary,
    psi: *const FbWaveFunction,
    steps: usize,
    out: *mut *mut FbWaveFunction,
) -> FbStatus {
    guard(|| unsafe {
        let r = path_sum_evolve(&handle(u, "unitary")?.0, &handle(psi, "psi")?.0, steps)?;
        put_handle(out, FbWaveFunction(r))
    })
}

/// Endpoint TV distance from the Born distribution for each
/// [`FbMeasureVariant`]. Degenerate variants get `NaN` in `tv` and `0` in
/// `ok`; the call itself still succeeds.
///
/// # Safety
/// `tv` and `ok` must be valid for 3 writes each.
#[no_mangle]
pub unsafe extern "C" fn fb_measure_report(
    u: *const FbUnitary,
    psi: *const FbWaveFunction,
    steps: usize,
    tv: *mut f64,
    ok: *mut u8,
) -> FbStatus {
    guard(|| unsafe {
        let report = measure_vs_born_report(&handle(u, "unitary")?.0, &handle(psi, "psi")?.0, steps)?;
        let tv = out_slice(tv, 3, "tv")?;
        if ok.is_null() {
            return Err(null("ok"));
        }
        let ok = std::slice::from_raw_parts_mut(ok, 3);
        for (i, v) in MeasureVariant::ALL.into_iter().enumerate() {
            let rec = report.record(v);
            tv[i] = rec.tv_distance.unwrap_or(f64::NAN);
            ok[i] = (rec.status == VariantStatus::Ok) as u8;
        }
        Ok(())
    })
}

/// Smallest entry of `exp(-dtau H)`.
///
/// # Safety
/// `h` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_euclidean_kernel_min_entry(h: *const FbHamiltonian, dtau: f64, out: *mut f64) -> FbStatus {
    guard(|| unsafe { put(out, euclidean_kernel(&handle(h, "hamiltonian")?.0, dtau)?.min_entry()) })
}

/// Imaginary-time ground-energy estimate from a nonnegative start vector.
///
/// # Safety
/// `rho0` must hold `len` doubles; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_ground_energy(
    h: *const FbHamiltonian,
    rho0: *const f64,
    len: usize,
    dtau: f64,
    steps: usize,
    tol: f64,
    out: *mut f64,
) -> FbStatus {
    guard(|| unsafe {
        let e = ground_energy_estimate(&handle(h, "hamiltonian")?.0, slice(rho0, len, "rho0")?, dtau, steps, tol)?;
        put(out, e)
    })
}

/// Largest KS statistic over the initial sample and three checkpoints of a
/// Bohmian ensemble of `count` particles.
///
/// # Safety
/// Handles must be live; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn fb_equivariance_max_ks(
    h: *const FbHamiltonian,
    psi0: *const FbWaveFunction,
    count: usize,
    t_span: f64,
    ode_dt: f64,
    seed: u64,
    out: *mut f64,
) -> FbStatus {
    guard(|| unsafe {
        let r = ensemble_equivariance(&handle(h, "hamiltonian")?.0, &handle(psi0, "psi0")?.0, count, t_span, ode_dt, seed)?;
        if let Some(f) = r.failures.first() {
            return Err(Failure(FbStatus::NumericalFailure, format!("{} trajectories failed, first: {}", r.failures.len(), f.error)));
        }
        put(out, r.max_ks())
    })
}

/// Parses a TOML scenario config and writes its results into `out_dir`.
///
/// `seed` replaces every configured seed when `override_seed` is nonzero.
///
/// # Safety
/// Both strings must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fb_run_scenario(config_toml: *const c_char, out_dir: *const c_char, override_seed: u8, seed: u64) -> FbStatus {
    guard(|| unsafe {
        let mut cfg = parse_config(text(config_toml, "config")?).map_err(|e| Failure(FbStatus::ConfigError, e.to_string()))?;
        if override_seed != 0 {
            cfg.set_seed(seed);
        }
        let dir = text(out_dir, "out_dir")?;
        match execute(&cfg, Path::new(dir)) {
            Ok(_) => Ok(()),
            Err(ExecuteError::Io(e)) => Err(Failure(FbStatus::IoError, e.to_string())),
            Err(ExecuteError::Numerical { error, .. }) => Err(error.into()),
        }
    })
}
