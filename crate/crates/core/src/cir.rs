//! Jump-free CIR transition law: Bessel-form density and exact sampling.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::model::JcirParams;
use crate::special::{bessel_iq, ln_gamma};

/// Constants of the CIR transition density over a horizon `t`:
/// `κ = 2a/(σ²(1−e^{−at}))`, `u = κ x e^{−at}`, `v = κ y`, `q = 2aθ/σ² − 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirGridConstants {
    pub kappa: f64,
    pub u_nc: f64,
    pub v_nc: f64,
    pub q: f64,
}

impl CirGridConstants {
    pub fn new(t: f64, x: f64, y: f64, p: &JcirParams) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::invalid("t", "transition horizon must be > 0"));
        }
        if !(x >= 0.0) {
            return Err(Error::invalid("x", "initial state must be >= 0"));
        }
        let kappa = kappa(t, p);
        Ok(CirGridConstants {
            kappa,
            u_nc: kappa * x * (-p.a() * t).exp(),
            v_nc: kappa * y,
            q: p.shape() - 1.0,
        })
    }
}

/// `κ = 2a / (σ²(1 − e^{−at}))`.
pub fn kappa(t: f64, p: &JcirParams) -> f64 {
    2.0 * p.a() / (p.sigma2() * -(-p.a() * t).exp_m1())
}

/// CIR transition density `f(t, x, y)`.
///
/// At `y = 0` returns `0` for `q > 0`, the finite limit for `q = 0` and
/// `+∞` for `q < 0` (integrable singularity). With `θ = 0` (`q = −1`) and
/// `x > 0` the law has an atom at the origin of mass `e^{−u}`; this function
/// returns the density of the continuous part, and `0` when `x = 0`.
pub fn cir_density(t: f64, x: f64, y: f64, p: &JcirParams) -> Result<f64> {
    if y < 0.0 {
        return Ok(0.0);
    }
    let c = CirGridConstants::new(t, x, y, p)?;
    Ok(density_from_constants(&c))
}

fn density_from_constants(c: &CirGridConstants) -> f64 {
    let CirGridConstants {
        kappa,
        u_nc: u,
        v_nc: v,
        q,
    } = *c;
    // q = −1 exactly: I_{−1} = I_1, and the law carries an atom at 0
    let absorbing = q <= -1.0;
    if u == 0.0 {
        if absorbing {
            return 0.0;
        }
        if v == 0.0 {
            return boundary_value(q, kappa * (-ln_gamma(q + 1.0)).exp());
        }
        return (kappa.ln() + q * v.ln() - v - ln_gamma(q + 1.0)).exp();
    }
    if v == 0.0 {
        if absorbing {
            // continuous part near 0: κ e^{−u} u (1 + O(v))
            return kappa * u * (-u).exp();
        }
        return boundary_value(q, kappa * (-u - ln_gamma(q + 1.0)).exp());
    }
    let order = if absorbing { 1.0 } else { q };
    let bessel = bessel_iq(order, 2.0 * (u * v).sqrt());
    if bessel.mantissa == 0.0 {
        return 0.0;
    }
    (kappa.ln() - u - v + 0.5 * q * (v.ln() - u.ln()) + bessel.ln()).exp()
}

fn boundary_value(q: f64, finite_limit: f64) -> f64 {
    // σ given as a rounded square root makes q = 0 land a few ulps off
    if q.abs() <= 1e-12 {
        finite_limit
    } else if q > 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// `E[X_t^x]` of the jump-free CIR process.
pub fn cir_mean(t: f64, x: f64, p: &JcirParams) -> f64 {
    let decay = (-p.a() * t).exp();
    p.theta() * (1.0 - decay) + x * decay
}

/// `Var[X_t^x]` of the jump-free CIR process.
pub fn cir_variance(t: f64, x: f64, p: &JcirParams) -> f64 {
    let a = p.a();
    let decay = (-a * t).exp();
    let one_minus = -(-a * t).exp_m1();
    x * (p.sigma2() / a) * (decay - decay * decay) + p.theta() * p.half_var_ratio() * one_minus * one_minus
}

/// Exact draw from the CIR transition law: `N ~ Poisson(κ x e^{−at})`, then
/// `Gamma(2aθ/σ² + N, scale 1/κ)`. A zero shape yields exactly `0`.
pub fn cir_sample<R: Rng + ?Sized>(t: f64, x: f64, p: &JcirParams, rng: &mut R) -> Result<f64> {
    let c = CirGridConstants::new(t, x, 0.0, p)?;
    let n = if c.u_nc > 0.0 {
        Poisson::new(c.u_nc)
            .map_err(|e| Error::invalid("x", format!("Poisson rate {}: {e}", c.u_nc)))?
            .sample(rng)
    } else {
        0.0
    };
    let shape = p.shape() + n;
    if shape == 0.0 {
        return Ok(0.0);
    }
    let gamma = Gamma::new(shape, 1.0 / c.kappa).map_err(|e| Error::invalid("theta", format!("{e}")))?;
    Ok(gamma.sample(rng))
}
