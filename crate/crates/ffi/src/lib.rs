//! C interface to the torus-vrep solvers.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `tv_*_new` (or producing) call and released by the matching `tv_*_free`.
//! Fallible functions return a [`TvStatus`]; on failure the message is
//! available from [`tv_last_error_message`] on the same thread.

use num_complex::Complex64;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use torus_vrep::{
    build_basis, forward, invert_density, DensityProfile, Error, FockBasis, GibbsEnsemble, InteractionSpec,
    InversionOptions, InversionResult, PotentialField, TorusGrid,
};

/// Status codes returned by fallible calls.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    BufferTooSmall = 3,
    NotConverged = 4,
    NumericalFailure = 5,
    Panic = 6,
}

pub struct TvBasis(FockBasis);
pub struct TvPotential(PotentialField);
pub struct TvInteraction(InteractionSpec);
pub struct TvEnsemble(GibbsEnsemble);
pub struct TvInversion(InversionResult);

/// Scalar thermodynamics of a Gibbs ensemble.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TvThermodynamics {
    pub beta: f64,
    pub log_z: f64,
    pub omega: f64,
    pub entropy: f64,
    pub internal_energy: f64,
    pub kinetic_energy: f64,
    pub min_density: f64,
}

/// Solver settings for [`tv_invert`]. Zero fields take the library defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TvInversionOptions {
    pub tol_rho: f64,
    pub tol_grad: f64,
    pub max_iter: usize,
    pub potential_cutoff: usize,
}

/// Summary of an inversion run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TvInversionSummary {
    pub converged: bool,
    pub iterations: usize,
    pub f_value: f64,
    pub density_residual: f64,
    pub gradient_norm: f64,
    pub potential_cutoff: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn status_for(err: &Error) -> TvStatus {
    match err {
        Error::EigensolverFailure { .. } | Error::Degenerate(_) => TvStatus::NumericalFailure,
        _ => TvStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<(), (TvStatus, String)>) -> TvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TvStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            TvStatus::Panic
        }
    }
}

fn lib(err: Error) -> (TvStatus, String) {
    (status_for(&err), err.to_string())
}

fn null(name: &str) -> (TvStatus, String) {
    (TvStatus::NullPointer, format!("{name} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, name: &str) -> Result<&'a T, (TvStatus, String)> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn put<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Copies `values` into a caller buffer of length `len`; `written` always
/// receives the full length so callers can size the buffer on a first call.
unsafe fn copy_out(values: &[f64], buf: *mut f64, len: usize, written: *mut usize) -> Result<(), (TvStatus, String)> {
    if !written.is_null() {
        *written = values.len();
    }
    if buf.is_null() {
        return if len == 0 { Ok(()) } else { Err(null("buffer")) };
    }
    if len < values.len() {
        return Err((
            TvStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", values.len()),
        ));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

unsafe fn read_complex(re: *const f64, im: *const f64, count: usize) -> Result<Vec<Complex64>, (TvStatus, String)> {
    if count == 0 {
        return Ok(Vec::new());
    }
    if re.is_null() {
        return Err(null("re"));
    }
    let re = std::slice::from_raw_parts(re, count);
    let im: Vec<f64> = if im.is_null() {
        vec![0.0; count]
    } else {
        std::slice::from_raw_parts(im, count).to_vec()
    };
    Ok(re.iter().zip(im).map(|(&a, b)| Complex64::new(a, b)).collect())
}

/// Last error message on this thread, or null if none. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn tv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn tv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Fock basis for `particles` fermions in plane waves `|p| <= cutoff` with spin.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn tv_basis_new(cutoff: usize, particles: usize, out: *mut *mut TvBasis) -> TvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let basis = build_basis(cutoff, particles).map_err(lib)?;
        put(out, TvBasis(basis));
        Ok(())
    })
}

/// Number of determinants, or 0 for a null handle.
///
/// # Safety
/// `basis` must be null or a live handle from [`tv_basis_new`].
#[no_mangle]
pub unsafe extern "C" fn tv_basis_dimension(basis: *const TvBasis) -> usize {
    basis.as_ref().map_or(0, |b| b.0.dimension())
}

/// # Safety
/// `basis` must be null or a live handle from [`tv_basis_new`], not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tv_basis_free(basis: *mut TvBasis) {
    if !basis.is_null() {
        drop(Box::from_raw(basis));
    }
}

/// Potential with `v̂_k = re[k-1] + i·im[k-1]` for `k = 1..=count`
/// (`v̂_{-k}` is the conjugate, `v̂_0 = 0`). `im` may be null for a real
/// cosine series.
///
/// # Safety
/// `re` (and `im` if non-null) must point to `count` readable doubles; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_potential_new(
    re: *const f64,
    im: *const f64,
    count: usize,
    out: *mut *mut TvPotential,
) -> TvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let coeffs = read_complex(re, im, count)?;
        put(out, TvPotential(PotentialField::from_coefficients(coeffs).map_err(lib)?));
        Ok(())
    })
}

/// Distributional potential `f + g'` from the Fourier coefficients of `f`
/// and `g` for `k = 1..=count`.
///
/// # Safety
/// Each non-null array must hold `count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_potential_from_parts(
    f_re: *const f64,
    f_im: *const f64,
    g_re: *const f64,
    g_im: *const f64,
    count: usize,
    out: *mut *mut TvPotential,
) -> TvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let zero = Complex64::new(0.0, 0.0);
        let mut f = vec![zero];
        let mut g = vec![zero];
        if !f_re.is_null() {
            f.extend(read_complex(f_re, f_im, count)?);
        }
        if !g_re.is_null() {
            g.extend(read_complex(g_re, g_im, count)?);
        }
        let v = torus_vrep::potential_from_parts(&f, &g).map_err(lib)?;
        put(out, TvPotential(v));
        Ok(())
    })
}

/// Largest stored mode of the potential, or 0 for a null handle.
///
/// # Safety
/// `potential` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tv_potential_cutoff(potential: *const TvPotential) -> usize {
    potential.as_ref().map_or(0, |p| p.0.cutoff())
}

/// Writes `v̂_k` for any integer `k` (zero outside the stored range).
///
/// # Safety
/// `potential` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_potential_coefficient(
    potential: *const TvPotential,
    k: i32,
    re: *mut f64,
    im: *mut f64,
) -> TvStatus {
    guard(|| {
        let p = borrow(potential, "potential")?;
        if re.is_null() || im.is_null() {
            return Err(null("re/im"));
        }
        let c = p.0.coefficient(k);
        *re = c.re;
        *im = c.im;
        Ok(())
    })
}

/// # Safety
/// `potential` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tv_potential_free(potential: *mut TvPotential) {
    if !potential.is_null() {
        drop(Box::from_raw(potential));
    }
}

/// Pair interaction `2·strength·cos(2π(x-y))`; `strength = 0` gives no interaction.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_interaction_cosine(strength: f64, out: *mut *mut TvInteraction) -> TvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let w = if strength == 0.0 {
            InteractionSpec::none()
        } else {
            InteractionSpec::cosine(strength).map_err(lib)?
        };
        put(out, TvInteraction(w));
        Ok(())
    })
}

/// Pair interaction with real even Fourier coefficients `ŵ_k = w[k]`, `k = 0..count-1`.
///
/// # Safety
/// `w` must point to `count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_interaction_new(w: *const f64, count: usize, out: *mut *mut TvInteraction) -> TvStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if w.is_null() && count > 0 {
            return Err(null("w"));
        }
        let coeffs = if count == 0 { Vec::new() } else { std::slice::from_raw_parts(w, count).to_vec() };
        put(out, TvInteraction(InteractionSpec::from_coefficients(coeffs).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `interaction` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tv_interaction_free(interaction: *mut TvInteraction) {
    if !interaction.is_null() {
        drop(Box::from_raw(interaction));
    }
}

fn grid_for(basis: &FockBasis, grid_points: usize) -> Result<TorusGrid, (TvStatus, String)> {
    if grid_points == 0 {
        Ok(TorusGrid::for_basis(basis))
    } else {
        TorusGrid::new(grid_points).map_err(lib)
    }
}

/// Gibbs ensemble of `H_v` at inverse temperature `beta`. A null
/// `interaction` means non-interacting; `grid_points = 0` uses `8K` points.
///
/// # Safety
/// Handles must be live (or null where allowed); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_forward(
    basis: *const TvBasis,
    potential: *const TvPotential,
    interaction: *const TvInteraction,
    beta: f64,
    grid_points: usize,
    out: *mut *mut TvEnsemble,
) -> TvStatus {
    guard(|| {
        let basis = &borrow(basis, "basis")?.0;
        let v = &borrow(potential, "potential")?.0;
        let none = InteractionSpec::none();
        let w = interaction.as_ref().map_or(&none, |w| &w.0);
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = grid_for(basis, grid_points)?;
        put(out, TvEnsemble(forward(basis, v, w, beta, grid).map_err(lib)?));
        Ok(())
    })
}

/// # Safety
/// `ensemble` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_ensemble_thermodynamics(
    ensemble: *const TvEnsemble,
    out: *mut TvThermodynamics,
) -> TvStatus {
    guard(|| {
        let e = &borrow(ensemble, "ensemble")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = TvThermodynamics {
            beta: e.beta,
            log_z: e.log_z,
            omega: e.omega,
            entropy: e.entropy,
            internal_energy: e.internal_energy,
            kinetic_energy: e.kinetic_energy,
            min_density: e.density.min_value(),
        };
        Ok(())
    })
}

/// Density on the uniform grid `x_m = m/M`. Pass a null buffer with
/// `len = 0` to query `M` through `written`.
///
/// # Safety
/// `ensemble` must be live; `buf` must hold `len` doubles; `written` may be null.
#[no_mangle]
pub unsafe extern "C" fn tv_ensemble_density(
    ensemble: *const TvEnsemble,
    buf: *mut f64,
    len: usize,
    written: *mut usize,
) -> TvStatus {
    guard(|| {
        let e = &borrow(ensemble, "ensemble")?.0;
        copy_out(e.density.grid_values(), buf, len, written)
    })
}

/// Density Fourier coefficients `ρ̂_k` for `k = 0..=2K`, split into real and
/// imaginary buffers of equal length.
///
/// # Safety
/// `ensemble` must be live; `re` and `im` must each hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tv_ensemble_fourier(
    ensemble: *const TvEnsemble,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    written: *mut usize,
) -> TvStatus {
    guard(|| {
        let e = &borrow(ensemble, "ensemble")?.0;
        let f = e.density.fourier();
        let re_vals: Vec<f64> = f.iter().map(|c| c.re).collect();
        let im_vals: Vec<f64> = f.iter().map(|c| c.im).collect();
        copy_out(&re_vals, re, len, written)?;
        copy_out(&im_vals, im, len, written)
    })
}

/// # Safety
/// `ensemble` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tv_ensemble_free(ensemble: *mut TvEnsemble) {
    if !ensemble.is_null() {
        drop(Box::from_raw(ensemble));
    }
}

/// Potential whose Gibbs density matches the target `ρ̂_k = re[k] + i·im[k]`,
/// `k = 0..count-1`, with `ρ̂_0 = N`. A run that stops without meeting the
/// tolerances still produces a handle and returns `NotConverged`.
///
/// # Safety
/// Handles must be live (interaction and options may be null); `re` and `im`
/// must hold `count` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_invert(
    basis: *const TvBasis,
    interaction: *const TvInteraction,
    beta: f64,
    re: *const f64,
    im: *const f64,
    count: usize,
    options: *const TvInversionOptions,
    out: *mut *mut TvInversion,
) -> TvStatus {
    let mut converged = true;
    let status = guard(|| {
        let basis = &borrow(basis, "basis")?.0;
        let none = InteractionSpec::none();
        let w = interaction.as_ref().map_or(&none, |w| &w.0);
        if out.is_null() {
            return Err(null("out"));
        }
        let fourier = read_complex(re, im, count)?;
        let target =
            DensityProfile::new(basis.particle_count(), fourier, TorusGrid::for_basis(basis)).map_err(lib)?;
        let o = options.as_ref().copied().unwrap_or_default();
        let defaults = InversionOptions::default();
        let opts = InversionOptions {
            tol_rho: if o.tol_rho > 0.0 { o.tol_rho } else { defaults.tol_rho },
            tol_grad: if o.tol_grad > 0.0 { o.tol_grad } else { defaults.tol_grad },
            max_iter: if o.max_iter > 0 { o.max_iter } else { defaults.max_iter },
            potential_cutoff: (o.potential_cutoff > 0).then_some(o.potential_cutoff),
            ..defaults
        };
        let result = invert_density(&target, beta, basis, w, &opts).map_err(lib)?;
        converged = result.converged;
        if !converged {
            set_last_error(format!(
                "inversion stopped after {} iterations: density residual {:e}, gradient norm {:e}",
                result.iterations, result.density_residual, result.gradient_norm
            ));
        }
        put(out, TvInversion(result));
        Ok(())
    });
    if status == TvStatus::Ok && !converged {
        TvStatus::NotConverged
    } else {
        status
    }
}

/// # Safety
/// `inversion` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_inversion_summary(
    inversion: *const TvInversion,
    out: *mut TvInversionSummary,
) -> TvStatus {
    guard(|| {
        let r = &borrow(inversion, "inversion")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = TvInversionSummary {
            converged: r.converged,
            iterations: r.iterations,
            f_value: r.f_value,
            density_residual: r.density_residual,
            gradient_norm: r.gradient_norm,
            potential_cutoff: r.potential.cutoff(),
        };
        Ok(())
    })
}

/// Copies the recovered potential into a new handle (gauge `v̂_0 = 0`).
///
/// # Safety
/// `inversion` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tv_inversion_potential(
    inversion: *const TvInversion,
    out: *mut *mut TvPotential,
) -> TvStatus {
    guard(|| {
        let r = &borrow(inversion, "inversion")?.0;
        if out.is_null() {
            return Err(null("out"));
        }
        put(out, TvPotential(r.potential.clone()));
        Ok(())
    })
}

/// # Safety
/// `inversion` must be null or a live handle, not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tv_inversion_free(inversion: *mut TvInversion) {
    if !inversion.is_null() {
        drop(Box::from_raw(inversion));
    }
}
