//! Transition densities by cosine-series inversion of the characteristic
//! function, and the lower bound `p(t,x,y) ≥ C(t) f(t,x,y)`.
//!
//! On `[0, L]` a density has the expansion `Σ' A_k cos(kπy/L)` with
//! `A_k = (2/L) Re E[e^{ikπX/L}]` up to the mass beyond `L`. When the
//! function behaves like `c_0 + c_1 y` at the origin, the even extension has
//! a kink there, `A_k` decays like `k^{−2}` and the plain truncated sum is
//! only `O(1/N)` accurate near `y = 0`. In that case the `k^{−2}` law is
//! fitted on the last coefficients and its infinite tail is added back in
//! closed form, using `Σ_{k≥1} cos(kφ)/k² = π²/6 − πφ/2 + φ²/4` on `[0, 2π]`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::charfn::{cir_cf, z_cf, FrequencyPoint};
use crate::cir::{cir_density, cir_mean, cir_variance};
use crate::error::{Error, Result};
use crate::jumppart::{lambda_of_t, z_mean};
use crate::model::JcirParams;
use crate::quad::{self, integrate_half_line, HalfLineRule, Improper, Tolerance};

/// Which function is expanded in cosines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InversionMode {
    /// The full characteristic function `E[e^{uX_t^x}]`.
    Full,
    /// Only the remainder `p − C f`, whose transform is
    /// `cir_cf · (z_cf − C)`; `C f` is added back in closed form.
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub terms: usize,
    /// Span `L = mean + span_sd · sd`.
    pub span_sd: f64,
    pub tol_mass: f64,
    pub mode: InversionMode,
    pub quad_tol: f64,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            terms: 1 << 14,
            span_sd: 12.0,
            tol_mass: 1e-6,
            mode: InversionMode::Residual,
            quad_tol: 1e-10,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.terms < 64 {
            return Err(Error::invalid("terms", "need at least 64 cosine terms"));
        }
        if !(self.span_sd > 0.0) {
            return Err(Error::invalid("span_sd", "must be > 0"));
        }
        if !(self.tol_mass > 0.0) {
            return Err(Error::invalid("tol_mass", "must be > 0"));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol < 1e-2) {
            return Err(Error::invalid("quad_tol", "must lie in (0, 0.01)"));
        }
        Ok(())
    }
}

/// `Σ_{k≥1} cos(kφ)/k²` for `φ ∈ [0, 2π]`.
fn clausen_cos2(phi: f64) -> f64 {
    PI * PI / 6.0 - PI * phi / 2.0 + phi * phi / 4.0
}

/// Fitted tail `A_k ≈ (c_even + c_alt (−1)^k) / k²` for `k ≥ N`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct KinkTail {
    c_even: f64,
    c_alt: f64,
}

/// Truncated cosine series on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosSeries {
    span: f64,
    coeffs: Vec<f64>,
    tail: Option<KinkTail>,
    error_bound: f64,
}

impl CosSeries {
    /// Builds the series from `cf(ω) = E[e^{iωX}]`. `kink_tail` enables the
    /// fitted `k^{−2}` tail.
    pub fn from_cf<F>(span: f64, terms: usize, kink_tail: bool, cf: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<Complex64> + Sync,
    {
        let coeffs = (0..terms)
            .into_par_iter()
            .map(|k| cf(k as f64 * PI / span).map(|v| 2.0 / span * v.re))
            .collect::<Result<Vec<f64>>>()?;
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Inversion("non-finite cosine coefficient".to_string()));
        }
        let last = terms - 1;
        let scaled = |k: usize| coeffs[k] * (k * k) as f64;
        // pair means cancel the alternating part, pair differences isolate it
        let even = |k: usize| 0.5 * (scaled(k) + scaled(k - 1));
        let alt = |k: usize| 0.5 * (scaled(k) - scaled(k - 1)) * if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let half = last / 2;
        let n = terms as f64;
        let (tail, error_bound) = if kink_tail {
            // Richardson step on the O(k^{−2}) correction of the k^{−2} law
            let tail = KinkTail {
                c_even: (4.0 * even(last) - even(half)) / 3.0,
                c_alt: (4.0 * alt(last) - alt(half)) / 3.0,
            };
            let drift = (even(half) - even(last)).abs() + (alt(half) - alt(last)).abs();
            (Some(tail), drift / (9.0 * n))
        } else {
            (None, coeffs[last].abs() * n)
        };
        Ok(CosSeries {
            span,
            coeffs,
            tail,
            error_bound,
        })
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    /// Estimate of the truncation error: the coefficient tail plus the
    /// value at `L`, where mass beyond the span folds back first.
    pub fn error_bound(&self) -> f64 {
        self.error_bound + self.eval(self.span).abs()
    }

    pub fn eval(&self, y: f64) -> f64 {
        if y < 0.0 || y > self.span {
            return 0.0;
        }
        let theta = PI * y / self.span;
        let mut sum = 0.5 * self.coeffs[0];
        let mut partial_even = 0.0;
        let mut partial_alt = 0.0;
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let cos = (k as f64 * theta).cos();
            sum += c * cos;
            if self.tail.is_some() {
                let w = cos / (k * k) as f64;
                partial_even += w;
                partial_alt += if k % 2 == 0 { w } else { -w };
            }
        }
        if let Some(tail) = self.tail {
            sum += tail.c_even * (clausen_cos2(theta) - partial_even);
            sum += tail.c_alt * (clausen_cos2(theta + PI) - partial_alt);
        }
        sum
    }
}

/// Upper end `L = mean + span_sd · sd` of the inversion interval, from the
/// analytic first two moments of `X_t^x`.
pub fn inversion_span(t: f64, x: f64, p: &JcirParams, span_sd: f64, quad_tol: f64) -> Result<f64> {
    let nu = p.nu();
    let tol = Tolerance::relative(quad_tol);
    let m1 = nu.moment(1, tol)?;
    let m2 = nu.moment(2, tol)?;
    if !(m1.is_finite() && m2.is_finite()) {
        return Err(Error::Inversion(
            "the span rule needs ∫ξν(dξ) and ∫ξ²ν(dξ) to be finite".to_string(),
        ));
    }
    let a = p.a();
    let one_minus = -(-a * t).exp_m1();
    let one_minus_2 = -(-2.0 * a * t).exp_m1();
    let var_z = m2 * one_minus_2 / (2.0 * a) + m1 * p.sigma2() / a * (one_minus / a - one_minus_2 / (2.0 * a));
    let mean = cir_mean(t, x, p) + z_mean(t, p)?;
    let sd = (cir_variance(t, x, p) + var_z).sqrt();
    Ok(mean + span_sd * sd)
}

/// Exponent `γ` of the small-`y` behaviour `y^γ` of the expanded function.
fn small_y_exponent(p: &JcirParams, mode: InversionMode) -> f64 {
    let q = p.shape() - 1.0;
    match mode {
        InversionMode::Full => q,
        InversionMode::Residual => q + 1.0,
    }
}

fn kink_type(gamma: f64) -> bool {
    gamma.abs() < 1e-9 || (gamma - 1.0).abs() < 1e-9
}

/// A density expansion of `X_t^x`, ready to evaluate.
#[derive(Debug, Clone)]
pub struct DensitySeries {
    pub t: f64,
    pub x: f64,
    pub mode: InversionMode,
    /// `C(t)`; `1` for the zero measure.
    pub c_t: f64,
    pub lambda_t: f64,
    series: CosSeries,
    params: JcirParams,
}

impl DensitySeries {
    pub fn new(t: f64, x: f64, p: &JcirParams, cfg: &InversionConfig) -> Result<Self> {
        cfg.validate()?;
        if !(t > 0.0) {
            return Err(Error::invalid("t", "time must be > 0"));
        }
        if !(x >= 0.0) {
            return Err(Error::invalid("x", "initial state must be >= 0"));
        }
        Self::with_span(t, x, p, cfg, inversion_span(t, x, p, cfg.span_sd, cfg.quad_tol)?)
    }

    fn with_span(t: f64, x: f64, p: &JcirParams, cfg: &InversionConfig, span: f64) -> Result<Self> {
        let lambda_t = lambda_of_t(t, p, cfg.quad_tol)?;
        let c_t = (-lambda_t).exp();
        let kink = kink_type(small_y_exponent(p, cfg.mode));
        let tol = cfg.quad_tol;
        let series = match cfg.mode {
            InversionMode::Full => CosSeries::from_cf(span, cfg.terms, kink, |w| {
                let u = FrequencyPoint::imaginary(w);
                Ok(cir_cf(t, x, u, p) * z_cf(t, u, p, tol)?)
            })?,
            InversionMode::Residual => CosSeries::from_cf(span, cfg.terms, kink, |w| {
                let u = FrequencyPoint::imaginary(w);
                if p.nu().is_zero() {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                Ok(cir_cf(t, x, u, p) * (z_cf(t, u, p, tol)? - c_t))
            })?,
        };
        Ok(DensitySeries {
            t,
            x,
            mode: cfg.mode,
            c_t,
            lambda_t,
            series,
            params: p.clone(),
        })
    }

    pub fn span(&self) -> f64 {
        self.series.span()
    }

    pub fn error_bound(&self) -> f64 {
        self.series.error_bound()
    }

    /// CIR density `f(t, x, y)`.
    pub fn cir(&self, y: f64) -> Result<f64> {
        cir_density(self.t, self.x, y, &self.params)
    }

    /// `p(t, x, y) − C(t) f(t, x, y)`.
    pub fn margin(&self, y: f64) -> Result<f64> {
        Ok(match self.mode {
            InversionMode::Residual => self.series.eval(y),
            InversionMode::Full => self.series.eval(y) - self.c_t * self.cir(y)?,
        })
    }

    /// `p(t, x, y)`.
    pub fn density(&self, y: f64) -> Result<f64> {
        Ok(match self.mode {
            InversionMode::Residual => self.c_t * self.cir(y)? + self.series.eval(y),
            InversionMode::Full => self.series.eval(y),
        })
    }

    /// `∫_0^L g(y) dy` for a bounded, well-resolved function of the series.
    fn integrate_series(&self, g: impl Fn(f64) -> f64, tol: f64, label: &str) -> Result<f64> {
        let est = quad::integrate(
            g,
            0.0,
            self.span(),
            Tolerance::relative(0.0).with_abs(tol).with_max_intervals(20_000),
            label,
        )?;
        Ok(est.value)
    }

    /// `∫_0^L p dy`, and the mass of the negative part of the expanded function.
    pub fn mass_check(&self, tol: f64) -> Result<(f64, f64)> {
        let span = self.span();
        let series_mass = self.integrate_series(|y| self.series.eval(y), tol * 0.01, "∫ series dy")?;
        let negative = self.integrate_series(|y| (-self.series.eval(y)).max(0.0), tol * 0.01, "∫ negative part dy")?;
        let mass = match self.mode {
            InversionMode::Full => series_mass,
            InversionMode::Residual => {
                let tail = integrate_half_line(
                    |y: f64| cir_density(self.t, self.x, y, &self.params).unwrap_or(f64::NAN),
                    span,
                    span,
                    1.0,
                    HalfLineRule::new(Tolerance::relative(1e-6).with_abs(tol * 0.01)),
                    "∫_L^∞ f dy",
                )?;
                let tail = match tail {
                    Improper::Finite(e) => e.value,
                    Improper::Divergent => f64::INFINITY,
                };
                self.c_t * (1.0 - tail) + series_mass
            }
        };
        Ok((mass, negative))
    }
}

/// Densities on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub t: f64,
    pub x: f64,
    pub y_grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub inv_error_bound: f64,
    pub span: f64,
    /// `∫_0^L p dy` of the expansion.
    pub mass: f64,
}

impl DensityGrid {
    pub fn trapezoid_mass(&self) -> f64 {
        self.y_grid
            .windows(2)
            .zip(self.p_values.windows(2))
            .map(|(y, p)| 0.5 * (y[1] - y[0]) * (p[0] + p[1]))
            .sum()
    }
}

fn check_grid(y_grid: &[f64]) -> Result<()> {
    if y_grid.is_empty() {
        return Err(Error::invalid("y_grid", "empty grid"));
    }
    if y_grid.iter().any(|y| !(*y >= 0.0 && y.is_finite())) {
        return Err(Error::invalid("y_grid", "abscissae must be finite and >= 0"));
    }
    if y_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("y_grid", "abscissae must be strictly increasing"));
    }
    Ok(())
}

fn series_for_grid(t: f64, x: f64, y_grid: &[f64], p: &JcirParams, cfg: &InversionConfig) -> Result<DensitySeries> {
    cfg.validate()?;
    check_grid(y_grid)?;
    if !(t > 0.0) {
        return Err(Error::invalid("t", "time must be > 0"));
    }
    if !(x >= 0.0) {
        return Err(Error::invalid("x", "initial state must be >= 0"));
    }
    let rule = inversion_span(t, x, p, cfg.span_sd, cfg.quad_tol)?;
    let mut span = rule.max(*y_grid.last().expect("non-empty"));
    let mut widenings = 0;
    loop {
        let series = DensitySeries::with_span(t, x, p, cfg, span)?;
        let (mass, negative) = series.mass_check(cfg.tol_mass)?;
        if (mass - 1.0).abs() <= cfg.tol_mass && negative <= cfg.tol_mass {
            return Ok(series);
        }
        // mass missing beyond L is a tail heavier than the moment rule
        // assumes; anything else is a resolution problem
        if mass < 1.0 - cfg.tol_mass && negative <= cfg.tol_mass && widenings < MAX_WIDENINGS {
            span *= 1.5;
            widenings += 1;
            continue;
        }
        return Err(Error::Inversion(format!(
            "mass over [0, {span:.4}] is {mass:.10} with negative part {negative:.3e}; \
             increase span_sd or terms"
        )));
    }
}

/// Times the span may grow by 1.5 when mass is missing beyond it.
const MAX_WIDENINGS: usize = 6;

/// `p(t, x, y)` on `y_grid`. The span is widened to cover the grid, and
/// further while mass is missing beyond it.
pub fn density_from_cf(t: f64, x: f64, y_grid: &[f64], p: &JcirParams, cfg: &InversionConfig) -> Result<DensityGrid> {
    let series = series_for_grid(t, x, y_grid, p, cfg)?;
    let p_values = y_grid
        .iter()
        .map(|&y| series.density(y))
        .collect::<Result<Vec<f64>>>()?;
    let (mass, _) = series.mass_check(cfg.tol_mass)?;
    Ok(DensityGrid {
        t,
        x,
        y_grid: y_grid.to_vec(),
        p_values,
        inv_error_bound: series.error_bound(),
        span: series.span(),
        mass,
    })
}

/// Evenly spaced grid on `[y_min, L]`, where `L` follows the span rule and
/// `y_min = L·10⁻⁴` when the CIR density is unbounded at the origin, else 0.
pub fn default_grid(t: f64, x: f64, p: &JcirParams, n_y: usize, cfg: &InversionConfig) -> Result<Vec<f64>> {
    if n_y < 2 {
        return Err(Error::invalid("n_y", "need at least two grid points"));
    }
    let span = inversion_span(t, x, p, cfg.span_sd, cfg.quad_tol)?;
    let q = p.shape() - 1.0;
    let y_min = if q < -1e-12 { span * 1e-4 } else { 0.0 };
    Ok((0..n_y)
        .map(|i| y_min + (span - y_min) * i as f64 / (n_y - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundReport {
    pub t: f64,
    pub x: f64,
    pub lambda_t: f64,
    pub c_t: f64,
    pub y_grid: Vec<f64>,
    pub p_values: Vec<f64>,
    pub f_values: Vec<f64>,
    /// `p − C f` per grid point.
    pub margin: Vec<f64>,
    pub min_margin: f64,
    /// Number of margins below `−tol`.
    pub violations: usize,
    pub tol: f64,
    pub inv_error_bound: f64,
}

/// Evaluates `p(t,x,y) − C(t) f(t,x,y)` on `y_grid`.
pub fn lower_bound_check(
    t: f64,
    x: f64,
    y_grid: &[f64],
    p: &JcirParams,
    tol: f64,
    cfg: &InversionConfig,
) -> Result<LowerBoundReport> {
    if !(tol >= 0.0) {
        return Err(Error::invalid("tol", "must be >= 0"));
    }
    let series = series_for_grid(t, x, y_grid, p, cfg)?;
    let mut p_values = Vec::with_capacity(y_grid.len());
    let mut f_values = Vec::with_capacity(y_grid.len());
    let mut margin = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        p_values.push(series.density(y)?);
        f_values.push(series.cir(y)?);
        margin.push(series.margin(y)?);
    }
    let min_margin = margin.iter().copied().fold(f64::INFINITY, f64::min);
    let violations = margin.iter().filter(|&&m| m < -tol).count();
    Ok(LowerBoundReport {
        t,
        x,
        lambda_t: series.lambda_t,
        c_t: series.c_t,
        y_grid: y_grid.to_vec(),
        p_values,
        f_values,
        margin,
        min_margin,
        violations,
        tol,
        inv_error_bound: series.error_bound(),
    })
}
