//! C ABI over the `rotstar` library.
//!
//! Every fallible call returns an [`RsStatus`]; on failure the message is
//! available from [`rs_last_error`] on the same thread. Handles are opaque
//! and must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use rotstar::eos::EquationOfState;
use rotstar::equilibrium::{extended_theta, solve_equilibrium, EquilibriumSolution, SolveOptions};
use rotstar::potential::grid::AxiGrid;
use rotstar::radial::{solve_lane_emden_default, RadialProfile};
use rotstar::rotation::CentrifugalField;
use rotstar::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Domain = 3,
    NoZeroFound = 4,
    StepFailure = 5,
    SingularPoint = 6,
    NoSignChange = 7,
    DivergentAxisIntegral = 8,
    NoConvergence = 9,
    SingularLinearization = 10,
    ModeNonConvergence = 11,
    NoBracket = 12,
    GammaFourThirds = 13,
    StationaryMass = 14,
    Continuation = 15,
    Panic = 99,
}

impl From<&Error> for RsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } => RsStatus::InvalidParameter,
            Error::Domain(_) => RsStatus::Domain,
            Error::NoZeroFound { .. } => RsStatus::NoZeroFound,
            Error::StepFailure { .. } => RsStatus::StepFailure,
            Error::SingularPoint => RsStatus::SingularPoint,
            Error::NoSignChange { .. } => RsStatus::NoSignChange,
            Error::DivergentAxisIntegral => RsStatus::DivergentAxisIntegral,
            Error::NoConvergence { .. } => RsStatus::NoConvergence,
            Error::SingularLinearization { .. } => RsStatus::SingularLinearization,
            Error::ModeNonConvergence { .. } => RsStatus::ModeNonConvergence,
            Error::NoBracket { .. } => RsStatus::NoBracket,
            Error::GammaFourThirds => RsStatus::GammaFourThirds,
            Error::StationaryMass { .. } => RsStatus::StationaryMass,
            Error::Continuation { .. } => RsStatus::Continuation,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), RsStatus>) -> RsStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            RsStatus::Panic
        }
    }
}

fn fail(e: Error) -> RsStatus {
    let s = RsStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null() -> RsStatus {
    set_error("null pointer argument".into());
    RsStatus::NullPointer
}

/// Message of the last failure on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn rs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn rs_version() -> *const c_char {
    static V: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!(),
        };
    V.as_ptr()
}

/// Spherical solution for a polytrope of index `nu`.
pub struct RsProfile {
    eos: EquationOfState,
    u_o: f64,
    profile: RadialProfile,
}

/// A converged rotating equilibrium.
pub struct RsSolution {
    xi1: f64,
    sol: EquilibriumSolution,
}

/// Solve the Lane-Emden problem for `P = A ρ^{1+1/nu}` with central enthalpy `u_o`.
///
/// # Safety
/// `out` must be valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rs_lane_emden(
    nu: f64,
    a_const: f64,
    u_o: f64,
    tol: f64,
    out: *mut *mut RsProfile,
) -> RsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let eos = EquationOfState::polytrope_index(nu, a_const).map_err(fail)?;
        let profile = solve_lane_emden_default(&eos, u_o, tol).map_err(fail)?;
        *out = Box::into_raw(Box::new(RsProfile { eos, u_o, profile }));
        Ok(())
    })
}

/// # Safety
/// `p` must be null or a handle from [`rs_lane_emden`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_profile_free(p: *mut RsProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// First zero `ξ₁` and `μ₁ = −ξ₁²θ′(ξ₁)`.
///
/// # Safety
/// `p` must be a live handle; `xi1` and `mu1` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rs_profile_zero(
    p: *const RsProfile,
    xi1: *mut f64,
    mu1: *mut f64,
) -> RsStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if xi1.is_null() || mu1.is_null() {
            return Err(null());
        }
        *xi1 = p.profile.xi1;
        *mu1 = p.profile.mu1;
        Ok(())
    })
}

/// `θ(r)` including the harmonic extension beyond `ξ₁`.
///
/// # Safety
/// `p` must be a live handle; `value` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_profile_theta(
    p: *const RsProfile,
    r: f64,
    value: *mut f64,
) -> RsStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if value.is_null() {
            return Err(null());
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(fail(Error::InvalidParameter {
                name: "r".into(),
                reason: "must be finite and nonnegative".into(),
            }));
        }
        *value = p.profile.theta_at(r).0;
        Ok(())
    })
}

/// Uniformly rotating equilibrium at rotation parameter `beta`, started from the profile.
///
/// # Safety
/// `p` must be a live handle; `out` valid for a pointer write.
#[no_mangle]
pub unsafe extern "C" fn rs_solve_rigid(
    p: *const RsProfile,
    beta: f64,
    n_r: usize,
    n_zeta: usize,
    l_max: usize,
    tol: f64,
    out: *mut *mut RsSolution,
) -> RsStatus {
    guard(|| {
        let p = p.as_ref().ok_or_else(null)?;
        if out.is_null() {
            return Err(null());
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(fail(Error::InvalidParameter {
                name: "beta".into(),
                reason: "must be finite and nonnegative".into(),
            }));
        }
        let xi1 = p.profile.xi1;
        let grid =
            Arc::new(AxiGrid::for_profile(xi1, 1.5 * xi1, n_r, n_zeta, l_max).map_err(fail)?);
        let init = extended_theta(&p.profile, grid.clone());
        let opts = SolveOptions {
            tol,
            ..SolveOptions::default()
        };
        let sol = solve_equilibrium(
            &CentrifugalField::rigid(beta, grid),
            &p.eos,
            p.u_o,
            &init,
            &opts,
        )
        .map_err(fail)?;
        *out = Box::into_raw(Box::new(RsSolution { xi1, sol }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`rs_solve_rigid`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_solution_free(s: *mut RsSolution) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Scalar diagnostics of a solution.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RsSummary {
    pub equatorial_radius: f64,
    pub polar_radius: f64,
    /// `(R_eq − R_pole)/ξ₁`.
    pub oblateness: f64,
    pub residual: f64,
    pub hl_sigma_min: f64,
    /// Nonzero when every admissibility flag holds.
    pub admissible: i32,
}

/// # Safety
/// `s` must be a live handle; `out` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_solution_summary(
    s: *const RsSolution,
    out: *mut RsSummary,
) -> RsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let re = s.sol.equatorial_radius().map_err(fail)?;
        let rp = s.sol.polar_radius().map_err(fail)?;
        *out = RsSummary {
            equatorial_radius: re,
            polar_radius: rp,
            oblateness: (re - rp) / s.xi1,
            residual: s.sol.residual(),
            hl_sigma_min: s.sol.hl_sigma_min,
            admissible: s.sol.admissibility.all() as i32,
        };
        Ok(())
    })
}

/// Boundary radius at each solver `ζ` node. Writes `min(len, n_zeta)` values and
/// stores the node count in `count`.
///
/// # Safety
/// `s` must be a live handle; `zeta` and `radius` valid for `len` writes; `count` valid for a write.
#[no_mangle]
pub unsafe extern "C" fn rs_solution_boundary(
    s: *const RsSolution,
    zeta: *mut f64,
    radius: *mut f64,
    len: usize,
    count: *mut usize,
) -> RsStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(null)?;
        if count.is_null() || (len > 0 && (zeta.is_null() || radius.is_null())) {
            return Err(null());
        }
        let n = s.sol.zeta_nodes.len();
        *count = n;
        for k in 0..n.min(len) {
            *zeta.add(k) = s.sol.zeta_nodes[k];
            *radius.add(k) = s.sol.r_of_zeta[k];
        }
        Ok(())
    })
}
