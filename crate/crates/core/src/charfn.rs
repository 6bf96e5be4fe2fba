//! Affine characteristic function `E[e^{u X_t^x}] = exp(φ(t,u) + x ψ(t,u))`
//! on `Re u ≤ 0`.
//!
//! `ψ` solves `∂_t ψ = σ²ψ²/2 − aψ`, `ψ(0) = u`, and has the closed form
//! `ψ = u e^{−at} / (1 − (σ²/2a) u (1 − e^{−at}))`. `φ` is the principal-branch
//! log term of the diffusion plus `∫_0^t ∫ (e^{ξψ(s,u)} − 1) ν(dξ) ds`.
//!
//! Branch safety: for `Re u ≤ 0` the quantity `1 − (σ²/2a) u (1 − e^{−at})`
//! has real part `1 − (σ²/2a) Re(u) (1 − e^{−at}) ≥ 1`, so it stays in the
//! right half-plane and never meets the cut of the principal logarithm on
//! `(−∞, 0]`. The same holds for the `t → ∞` limit `1 − (σ²/2a) u`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{first_moment, JcirParams};
use crate::ode::dopri5;
use crate::quad::{self, Tolerance};

pub const DEFAULT_ODE_TOL: f64 = 1e-10;

/// A point of `{u ∈ ℂ : Re u ≤ 0}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint(Complex64);

impl FrequencyPoint {
    pub fn new(u: Complex64) -> Result<Self> {
        if u.re > 0.0 || !u.re.is_finite() || !u.im.is_finite() {
            return Err(Error::invalid("u", format!("Re u must be <= 0, got {u}")));
        }
        Ok(FrequencyPoint(u))
    }

    /// `u = i·v`.
    pub fn imaginary(v: f64) -> Self {
        FrequencyPoint(Complex64::new(0.0, v))
    }

    pub fn real(r: f64) -> Result<Self> {
        Self::new(Complex64::new(r, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Self {
        FrequencyPoint(self.0.conj())
    }
}

/// Characteristic-function value with its affine exponents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfValue {
    pub value: Complex64,
    pub phi: Complex64,
    pub psi: Complex64,
}

fn one_minus_exp(a: f64, t: f64) -> f64 {
    -(-a * t).exp_m1()
}

pub fn psi(t: f64, u: FrequencyPoint, p: &JcirParams) -> Complex64 {
    let u = u.value();
    let a = p.a();
    u * (-a * t).exp() / (1.0 - p.half_var_ratio() * u * one_minus_exp(a, t))
}

fn psi_raw(t: f64, u: Complex64, p: &JcirParams) -> Complex64 {
    psi(t, FrequencyPoint(u), p)
}

/// `−(2aθ/σ²) Log(1 − (σ²/2a) u (1 − e^{−at}))`.
pub fn diffusion_log_term(t: f64, u: FrequencyPoint, p: &JcirParams) -> Complex64 {
    let base = 1.0 - p.half_var_ratio() * u.value() * one_minus_exp(p.a(), t);
    -p.shape() * base.ln()
}

/// `∫_0^t ∫ (e^{ξψ(s,u)} − 1) ν(dξ) ds`, the log of the jump factor.
pub fn jump_exponent(t: f64, u: FrequencyPoint, p: &JcirParams, quad_tol: f64) -> Result<Complex64> {
    if p.nu().is_zero() || t == 0.0 || u.value() == Complex64::new(0.0, 0.0) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let inner_tol = Tolerance::relative(quad_tol * 0.01);
    let nu = p.nu();
    // Adaptive quadrature cannot propagate errors from the integrand, so the
    // first failure is stashed and re-raised.
    let failure = std::cell::RefCell::new(None);
    let est = quad::integrate(
        |s: f64| match nu.laplace_exponent(psi_raw(s, u.value(), p), inner_tol) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                Complex64::new(0.0, 0.0)
            }
        },
        0.0,
        t,
        Tolerance::relative(quad_tol).with_abs(1e-15).with_max_intervals(5000),
        "∫_0^t ∫(e^{ξψ(s,u)}−1)ν(dξ)ds",
    )?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est.value)
}

pub fn phi(t: f64, u: FrequencyPoint, p: &JcirParams, quad_tol: f64) -> Result<Complex64> {
    Ok(diffusion_log_term(t, u, p) + jump_exponent(t, u, p, quad_tol)?)
}

/// Full characteristic function `exp(φ + xψ)`, the product of [`cir_cf`]
/// and [`z_cf`].
pub fn jcir_cf(t: f64, x: f64, u: FrequencyPoint, p: &JcirParams, quad_tol: f64) -> Result<CfValue> {
    if x < 0.0 {
        return Err(Error::invalid("x", "initial state must be >= 0"));
    }
    let phi = phi(t, u, p, quad_tol)?;
    let psi = psi(t, u, p);
    Ok(CfValue {
        value: (phi + x * psi).exp(),
        phi,
        psi,
    })
}

/// Characteristic function of the jump-free CIR part.
pub fn cir_cf(t: f64, x: f64, u: FrequencyPoint, p: &JcirParams) -> Complex64 {
    (diffusion_log_term(t, u, p) + x * psi(t, u, p)).exp()
}

/// Characteristic function of the pure-jump component `Z_t` (started at
/// zero with `θ = 0`).
pub fn z_cf(t: f64, u: FrequencyPoint, p: &JcirParams, quad_tol: f64) -> Result<Complex64> {
    Ok(jump_exponent(t, u, p, quad_tol)?.exp())
}

/// Integrates the generalized Riccati system
/// `∂_t φ = aθψ + ∫(e^{ξψ}−1)ν(dξ)`, `∂_t ψ = σ²ψ²/2 − aψ` from
/// `(φ, ψ)(0) = (0, u)`. The jump integral is evaluated by quadrature in `ξ`
/// at each stage. Returns `(φ(t,u), ψ(t,u))`.
pub fn riccati_oracle(t: f64, u: FrequencyPoint, p: &JcirParams, ode_tol: f64) -> Result<(Complex64, Complex64)> {
    if t < 0.0 {
        return Err(Error::invalid("t", "time must be >= 0"));
    }
    let a = p.a();
    let a_theta = a * p.theta();
    let half_s2 = 0.5 * p.sigma2();
    // the absolute floor sits well under the controller's absolute tolerance
    let jump_tol = Tolerance {
        abs: ode_tol * 1e-4,
        ..Tolerance::relative(ode_tol * 1e-2)
    };
    let nu = p.nu();
    // the solution keeps Re ψ ≤ max(Re u, 0); a trial stage outside that is
    // rejected by the controller instead of being fed to the quadrature
    let re_cap = u.value().re.max(0.0) * (1.0 + 1e-9) + 1e-12;
    let rhs = |_s: f64, y: &[Complex64; 2]| -> Result<[Complex64; 2]> {
        let psi = y[1];
        if !(psi.re <= re_cap) || !psi.im.is_finite() {
            let nan = Complex64::new(f64::NAN, f64::NAN);
            return Ok([nan, nan]);
        }
        let jumps = nu.laplace_exponent_quadrature(psi, jump_tol)?;
        Ok([a_theta * psi + jumps, half_s2 * psi * psi - a * psi])
    };
    // the controller's local tolerance is kept below the requested global one
    let local = ode_tol * 1e-2;
    let y = dopri5(rhs, [Complex64::new(0.0, 0.0), u.value()], t, local, local)?;
    Ok((y[0], y[1]))
}

/// Characteristic function of the invariant law, the `t → ∞` limit of
/// [`jcir_cf`]: `(1 − (σ²/2a)u)^{−2aθ/σ²} · exp(∫_0^∞ ∫ (e^{ξψ(s,u)}−1) ν(dξ) ds)`.
///
/// The `s`-integral stops at `T` where the remainder bound
/// `|u| e^{−aT} ∫ξν / a` drops below `tail_tol`.
pub fn invariant_cf(u: FrequencyPoint, p: &JcirParams, tail_tol: f64) -> Result<Complex64> {
    let base = 1.0 - p.half_var_ratio() * u.value();
    let log_term = -p.shape() * base.ln();
    if p.nu().is_zero() {
        return Ok(log_term.exp());
    }
    let m1 = first_moment(p.nu(), 1e-10)?;
    if !m1.is_finite() {
        return Err(Error::Inadmissible("invariant law requires ∫ξν(dξ) < ∞".to_string()));
    }
    let a = p.a();
    let un = u.value().norm();
    if un == 0.0 || m1 == 0.0 {
        return Ok(log_term.exp());
    }
    let horizon = ((un * m1 / (a * tail_tol)).ln() / a).max(1.0 / a);
    let jumps = jump_exponent(horizon, u, p, tail_tol.min(1e-10))?;
    Ok((log_term + jumps).exp())
}
