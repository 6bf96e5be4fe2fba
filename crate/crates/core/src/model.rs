//! Model constants and Lévy measures of the jump driver.
//!
//! The jump driver is a pure-jump subordinator with Lévy measure `ν` on
//! `(0, ∞)` satisfying `∫ (ξ ∧ 1) ν(dξ) < ∞`. Four representations are
//! supported: the zero measure, finitely many point masses, a compound
//! Poisson measure `rate · g(ξ) dξ` with a normalized jump density `g`, and
//! an infinite-activity density `n(ξ)` together with a truncation threshold
//! below which samplers drop jumps.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};

use crate::error::{Error, Result};
use crate::quad::{self, HalfLineRule, Improper, QuadValue, Tolerance};
use crate::special::gamma;

pub const DEFAULT_EPS_TRUNC: f64 = 1e-8;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// A single atom of a discrete Lévy measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointMass {
    pub size: f64,
    pub mass: f64,
}

/// Normalized jump-size densities for compound Poisson drivers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDensity {
    Exponential { mean: f64 },
    Gamma { shape: f64, rate: f64 },
}

impl JumpDensity {
    fn validate(&self) -> Result<()> {
        match *self {
            JumpDensity::Exponential { mean } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::invalid("mean", "exponential jump mean must be > 0"));
                }
            }
            JumpDensity::Gamma { shape, rate } => {
                if !(shape > 0.0 && shape.is_finite()) {
                    return Err(Error::invalid("shape", "gamma jump shape must be > 0"));
                }
                if !(rate > 0.0 && rate.is_finite()) {
                    return Err(Error::invalid("rate", "gamma jump rate must be > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match *self {
            JumpDensity::Exponential { mean } => (-x / mean).exp() / mean,
            JumpDensity::Gamma { shape, rate } => {
                ((shape - 1.0) * x.ln() + shape * rate.ln() - rate * x - crate::special::ln_gamma(shape)).exp()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpDensity::Exponential { mean } => mean,
            JumpDensity::Gamma { shape, rate } => shape / rate,
        }
    }

    pub fn second_moment(&self) -> f64 {
        match *self {
            JumpDensity::Exponential { mean } => 2.0 * mean * mean,
            JumpDensity::Gamma { shape, rate } => shape * (shape + 1.0) / (rate * rate),
        }
    }

    /// `E[e^{wξ}]` for `Re w ≤ 0`.
    pub fn transform(&self, w: Complex64) -> Complex64 {
        match *self {
            JumpDensity::Exponential { mean } => 1.0 / (1.0 - mean * w),
            JumpDensity::Gamma { shape, rate } => (1.0 - w / rate).powf(-shape),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpDensity::Exponential { mean } => Exp::new(1.0 / mean).expect("validated").sample(rng),
            JumpDensity::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated").sample(rng),
        }
    }
}

/// Infinite-activity Lévy densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LevyDensity {
    /// `n(ξ) = intensity · ξ^{-1-alpha} · e^{-lambda ξ}`; `lambda = 0` gives
    /// the one-sided stable density.
    TemperedStable { intensity: f64, alpha: f64, lambda: f64 },
}

impl LevyDensity {
    fn validate(&self) -> Result<()> {
        let LevyDensity::TemperedStable {
            intensity,
            alpha,
            lambda,
        } = *self;
        if !(intensity > 0.0 && intensity.is_finite()) {
            return Err(Error::invalid("intensity", "must be > 0"));
        }
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::invalid("alpha", "stability index must lie in (0, 2)"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid("lambda", "tempering must be >= 0"));
        }
        Ok(())
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let LevyDensity::TemperedStable {
            intensity,
            alpha,
            lambda,
        } = *self;
        if xi <= 0.0 {
            return 0.0;
        }
        intensity * (-(1.0 + alpha) * xi.ln() - lambda * xi).exp()
    }

    fn scale(&self) -> f64 {
        let LevyDensity::TemperedStable { lambda, .. } = *self;
        if lambda > 0.0 {
            1.0 / lambda
        } else {
            1.0
        }
    }

    /// Closed-form `∫ (e^{wξ} - 1) n(ξ) dξ`, when it exists.
    fn laplace_exponent(&self, w: Complex64) -> Option<Complex64> {
        let LevyDensity::TemperedStable {
            intensity,
            alpha,
            lambda,
        } = *self;
        if alpha >= 1.0 {
            return None;
        }
        let lam = Complex64::new(lambda, 0.0);
        Some(intensity * gamma(-alpha) * ((lam - w).powf(alpha) - lam.powf(alpha)))
    }

    /// Draws from `n` restricted to `[lower, ∞)` and normalized.
    ///
    /// Pareto proposal with index `alpha` on `[lower, ∞)`, accepted with
    /// probability `e^{-lambda (ξ - lower)}`.
    fn sample_above<R: Rng + ?Sized>(&self, lower: f64, rng: &mut R) -> f64 {
        let LevyDensity::TemperedStable { alpha, lambda, .. } = *self;
        loop {
            let u: f64 = rng.random();
            let xi = lower * (1.0 - u).powf(-1.0 / alpha);
            if lambda == 0.0 {
                return xi;
            }
            let v: f64 = rng.random();
            if v < (-lambda * (xi - lower)).exp() {
                return xi;
            }
        }
    }
}

/// Internal representation of a Lévy measure.
#[derive(Debug, Clone, PartialEq)]
pub enum LevyKind {
    Zero,
    PointMasses(Vec<PointMass>),
    FiniteActivity {
        rate: f64,
        jumps: JumpDensity,
    },
    InfiniteActivity {
        density: LevyDensity,
        eps_trunc: f64,
    },
    /// `density` restricted to `[lower, ∞)`; a finite measure. This is what
    /// samplers of an infinite-activity measure actually draw from.
    Truncated {
        density: LevyDensity,
        lower: f64,
    },
}

/// A validated Lévy measure on `(0, ∞)` with `∫ (ξ ∧ 1) ν(dξ) < ∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyMeasure {
    kind: LevyKind,
}

impl LevyMeasure {
    pub fn zero() -> Self {
        LevyMeasure { kind: LevyKind::Zero }
    }

    pub fn point_masses(masses: Vec<PointMass>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::invalid("jumps", "point-mass list is empty"));
        }
        for pm in &masses {
            if !(pm.size > 0.0 && pm.size.is_finite()) {
                return Err(Error::invalid("jumps", format!("jump size {} must be > 0", pm.size)));
            }
            if !(pm.mass > 0.0 && pm.mass.is_finite()) {
                return Err(Error::invalid("jumps", format!("mass {} must be > 0", pm.mass)));
            }
        }
        Ok(LevyMeasure {
            kind: LevyKind::PointMasses(masses),
        })
    }

    pub fn finite_activity(rate: f64, jumps: JumpDensity) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::invalid("rate", "total jump rate must be > 0"));
        }
        jumps.validate()?;
        Ok(LevyMeasure {
            kind: LevyKind::FiniteActivity { rate, jumps },
        })
    }

    /// Builds an infinite-activity measure, verifying `∫ (ξ ∧ 1) n(ξ) dξ < ∞`
    /// numerically.
    pub fn infinite_activity(density: LevyDensity, eps_trunc: f64) -> Result<Self> {
        density.validate()?;
        if !(eps_trunc > 0.0 && eps_trunc < 1.0) {
            return Err(Error::invalid("eps_trunc", "truncation threshold must lie in (0, 1)"));
        }
        let nu = LevyMeasure {
            kind: LevyKind::InfiniteActivity { density, eps_trunc },
        };
        let wedge = nu.integrate_real(|xi| xi.min(1.0), Tolerance::relative(1e-8), "∫(ξ∧1)ν(dξ)")?;
        match wedge {
            Improper::Finite(_) => Ok(nu),
            Improper::Divergent => Err(Error::Inadmissible("∫(ξ∧1)ν(dξ) diverges for this density".to_string())),
        }
    }

    pub fn kind(&self) -> &LevyKind {
        &self.kind
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, LevyKind::Zero)
    }

    /// The measure samplers actually draw from: infinite-activity densities
    /// are restricted to `[eps_trunc, ∞)`, everything else is unchanged.
    pub fn truncated(&self) -> LevyMeasure {
        match self.kind {
            LevyKind::InfiniteActivity { density, eps_trunc } => LevyMeasure {
                kind: LevyKind::Truncated {
                    density,
                    lower: eps_trunc,
                },
            },
            _ => self.clone(),
        }
    }

    /// Returns `c · ν`.
    pub fn scaled(&self, c: f64) -> Result<LevyMeasure> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("scale", "must be > 0"));
        }
        let scale_density = |d: LevyDensity| {
            let LevyDensity::TemperedStable {
                intensity,
                alpha,
                lambda,
            } = d;
            LevyDensity::TemperedStable {
                intensity: intensity * c,
                alpha,
                lambda,
            }
        };
        let kind = match &self.kind {
            LevyKind::Zero => LevyKind::Zero,
            LevyKind::PointMasses(pm) => LevyKind::PointMasses(
                pm.iter()
                    .map(|p| PointMass {
                        size: p.size,
                        mass: p.mass * c,
                    })
                    .collect(),
            ),
            LevyKind::FiniteActivity { rate, jumps } => LevyKind::FiniteActivity {
                rate: rate * c,
                jumps: *jumps,
            },
            LevyKind::InfiniteActivity { density, eps_trunc } => LevyKind::InfiniteActivity {
                density: scale_density(*density),
                eps_trunc: *eps_trunc,
            },
            LevyKind::Truncated { density, lower } => LevyKind::Truncated {
                density: scale_density(*density),
                lower: *lower,
            },
        };
        Ok(LevyMeasure { kind })
    }

    fn scale_hint(&self) -> f64 {
        match &self.kind {
            LevyKind::FiniteActivity { jumps, .. } => jumps.mean(),
            LevyKind::InfiniteActivity { density, .. } | LevyKind::Truncated { density, .. } => density.scale(),
            _ => 1.0,
        }
    }

    /// Density of the absolutely continuous variants.
    fn density_at(&self, xi: f64) -> f64 {
        match &self.kind {
            LevyKind::FiniteActivity { rate, jumps } => rate * jumps.pdf(xi),
            LevyKind::InfiniteActivity { density, .. } => density.eval(xi),
            LevyKind::Truncated { density, lower } if xi >= *lower => density.eval(xi),
            _ => 0.0,
        }
    }

    /// `∫ f(ξ) ν(dξ)` over the part of `(0, ∞)` selected by `region`.
    fn integrate_region<T, F>(&self, f: F, region: Region, rule: HalfLineRule, label: &str) -> Result<Improper<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        match &self.kind {
            LevyKind::Zero => Ok(Improper::Finite(quad::Estimate {
                value: T::default(),
                error: 0.0,
            })),
            LevyKind::PointMasses(pm) => {
                let value = pm
                    .iter()
                    .filter(|p| region.contains(p.size))
                    .fold(T::default(), |acc, p| acc + f(p.size) * p.mass);
                Ok(Improper::Finite(quad::Estimate { value, error: 0.0 }))
            }
            LevyKind::Truncated { lower, .. } => {
                let g = |xi: f64| f(xi) * self.density_at(xi);
                let lower = *lower;
                let mut total = quad::Estimate {
                    value: T::default(),
                    error: 0.0,
                };
                if region != Region::AboveOne && lower < 1.0 {
                    let part = quad::integrate(
                        |w: f64| {
                            let xi = w.exp();
                            g(xi) * xi
                        },
                        lower.ln(),
                        0.0,
                        rule.tol,
                        label,
                    )?;
                    total.value = total.value + part.value;
                    total.error += part.error;
                }
                if region != Region::BelowOne {
                    let start = lower.max(1.0);
                    let part = quad::integrate_half_line(
                        |w: f64| {
                            let xi = w.exp();
                            if xi.is_finite() {
                                g(xi) * xi
                            } else {
                                T::default()
                            }
                        },
                        start.ln(),
                        3.0 + self.scale_hint().ln().max(0.0),
                        1.0,
                        rule,
                        label,
                    )?;
                    match part {
                        Improper::Finite(e) => {
                            total.value = total.value + e.value;
                            total.error += e.error;
                        }
                        Improper::Divergent => return Ok(Improper::Divergent),
                    }
                }
                Ok(Improper::Finite(total))
            }
            _ => {
                let g = |xi: f64| f(xi) * self.density_at(xi);
                let scale = self.scale_hint();
                match region {
                    Region::All => quad::integrate_positive_axis(g, scale, rule, label),
                    Region::BelowOne => quad::integrate_below_one(g, scale, rule, label),
                    Region::AboveOne => quad::integrate_above_one(g, scale, rule, label),
                }
            }
        }
    }

    /// `∫ f(ξ) ν(dξ)` for a real integrand, with divergence detection.
    pub fn integrate_real<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance, label: &str) -> Result<Improper<f64>> {
        self.integrate_region(f, Region::All, HalfLineRule::new(tol), label)
    }

    /// `∫ f(ξ) ν(dξ)` for a complex integrand. The caller guarantees
    /// integrability; divergence is reported as an error.
    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, f: F, tol: Tolerance, label: &str) -> Result<Complex64> {
        match self.integrate_region(f, Region::All, HalfLineRule::new(tol), label)? {
            Improper::Finite(e) => Ok(e.value),
            Improper::Divergent => Err(Error::Divergent {
                integral: label.to_string(),
            }),
        }
    }

    /// `∫ (e^{wξ} - 1) ν(dξ)` for `Re w ≤ 0`, in closed form where the
    /// representation allows it and by quadrature otherwise.
    pub fn laplace_exponent(&self, w: Complex64, tol: Tolerance) -> Result<Complex64> {
        match &self.kind {
            LevyKind::Zero => Ok(Complex64::new(0.0, 0.0)),
            LevyKind::PointMasses(pm) => Ok(pm.iter().map(|p| expm1(w * p.size) * p.mass).sum()),
            LevyKind::FiniteActivity { rate, jumps } => Ok(*rate * (jumps.transform(w) - 1.0)),
            LevyKind::InfiniteActivity { density, .. } => match density.laplace_exponent(w) {
                Some(v) => Ok(v),
                None => self.laplace_exponent_quadrature(w, tol),
            },
            LevyKind::Truncated { .. } => self.laplace_exponent_quadrature(w, tol),
        }
    }

    /// `∫ (e^{wξ} - 1) ν(dξ)` by quadrature in `ξ`, whatever the variant.
    pub fn laplace_exponent_quadrature(&self, w: Complex64, tol: Tolerance) -> Result<Complex64> {
        if w == Complex64::new(0.0, 0.0) {
            return Ok(w);
        }
        self.integrate_complex(|xi| expm1(w * xi), tol, "∫(e^{wξ}-1)ν(dξ)")
    }

    /// Total mass, which is infinite for infinite-activity measures.
    pub fn total_mass(&self) -> Result<f64> {
        match &self.kind {
            LevyKind::Zero => Ok(0.0),
            LevyKind::PointMasses(pm) => Ok(pm.iter().map(|p| p.mass).sum()),
            LevyKind::FiniteActivity { rate, .. } => Ok(*rate),
            LevyKind::InfiniteActivity { .. } => Ok(f64::INFINITY),
            LevyKind::Truncated { .. } => Ok(self
                .integrate_real(|_| 1.0, Tolerance::relative(1e-12), "ν([ε,∞))")?
                .finite()
                .map_or(f64::INFINITY, |e| e.value)),
        }
    }

    /// `∫ ξ^k ν(dξ)`, `+∞` when divergent.
    pub fn moment(&self, k: i32, tol: Tolerance) -> Result<f64> {
        let label = format!("∫ξ^{k}ν(dξ)");
        Ok(match self.integrate_real(|xi| xi.powi(k), tol, &label)? {
            Improper::Finite(e) => e.value,
            Improper::Divergent => f64::INFINITY,
        })
    }

    /// Upper bound on the first-moment bias from dropping jumps below the
    /// truncation threshold over a horizon `t`: `t · ∫_0^ε ξ n(ξ) dξ`.
    pub fn truncation_bias(&self, t: f64) -> Result<f64> {
        match &self.kind {
            LevyKind::InfiniteActivity { density, eps_trunc } => {
                let eps = *eps_trunc;
                let est = quad::integrate_half_line(
                    |w: f64| {
                        let xi = w.exp();
                        xi * xi * density.eval(xi)
                    },
                    eps.ln(),
                    3.0,
                    -1.0,
                    HalfLineRule::new(Tolerance::relative(1e-10)),
                    "∫_0^ε ξ n(ξ) dξ",
                )?;
                Ok(est.finite().map_or(f64::INFINITY, |e| t * e.value))
            }
            _ => Ok(0.0),
        }
    }

    /// A sampler for the finite measure samplers draw from (see
    /// [`LevyMeasure::truncated`]).
    pub fn jump_sampler(&self) -> Result<JumpSampler> {
        let truncated = self.truncated();
        let mass = truncated.total_mass()?;
        let kind = match truncated.kind {
            LevyKind::Zero => SamplerKind::Empty,
            LevyKind::PointMasses(pm) => {
                let mut acc = 0.0;
                let cumulative = pm
                    .iter()
                    .map(|p| {
                        acc += p.mass;
                        acc / mass
                    })
                    .collect();
                SamplerKind::Discrete {
                    sizes: pm.iter().map(|p| p.size).collect(),
                    cumulative,
                }
            }
            LevyKind::FiniteActivity { jumps, .. } => SamplerKind::Density(jumps),
            LevyKind::Truncated { density, lower } => SamplerKind::Levy { density, lower },
            LevyKind::InfiniteActivity { .. } => unreachable!("truncated() removes this variant"),
        };
        Ok(JumpSampler { mass, kind })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    All,
    BelowOne,
    AboveOne,
}

impl Region {
    fn contains(self, xi: f64) -> bool {
        match self {
            Region::All => true,
            Region::BelowOne => xi < 1.0,
            Region::AboveOne => xi > 1.0,
        }
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
pub fn expm1(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half_sin = (0.5 * y).sin();
    Complex64::new(x.exp_m1() * y.cos() - 2.0 * half_sin * half_sin, x.exp() * y.sin())
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Empty,
    Discrete { sizes: Vec<f64>, cumulative: Vec<f64> },
    Density(JumpDensity),
    Levy { density: LevyDensity, lower: f64 },
}

/// Total mass and normalized jump-size law of a finite Lévy measure.
#[derive(Debug, Clone)]
pub struct JumpSampler {
    mass: f64,
    kind: SamplerKind,
}

impl JumpSampler {
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Draws a jump size from `ν / |ν|`. Panics on the empty measure.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            SamplerKind::Empty => panic!("cannot sample jumps of the zero measure"),
            SamplerKind::Discrete { sizes, cumulative } => {
                let u: f64 = rng.random();
                let idx = cumulative.partition_point(|&c| c <= u).min(sizes.len() - 1);
                sizes[idx]
            }
            SamplerKind::Density(d) => d.sample(rng),
            SamplerKind::Levy { density, lower } => density.sample_above(*lower, rng),
        }
    }
}

/// Model constants of `dX = a(θ - X)dt + σ√X dW + dJ`.
#[derive(Debug, Clone, PartialEq)]
pub struct JcirParams {
    a: f64,
    theta: f64,
    sigma: f64,
    nu: LevyMeasure,
}

impl JcirParams {
    pub fn new(a: f64, theta: f64, sigma: f64, nu: LevyMeasure) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid("a", "mean-reversion rate must satisfy a > 0"));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(Error::invalid("theta", "long-run level must satisfy theta >= 0"));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid("sigma", "volatility must satisfy sigma > 0"));
        }
        Ok(JcirParams { a, theta, sigma, nu })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn nu(&self) -> &LevyMeasure {
        &self.nu
    }

    /// `σ² / (2a)`.
    pub fn half_var_ratio(&self) -> f64 {
        self.sigma2() / (2.0 * self.a)
    }

    /// `2aθ / σ²`, the shape of the diffusion part's gamma law.
    pub fn shape(&self) -> f64 {
        2.0 * self.a * self.theta / self.sigma2()
    }

    /// Same diffusion constants with a different jump measure.
    pub fn with_nu(&self, nu: LevyMeasure) -> JcirParams {
        JcirParams { nu, ..self.clone() }
    }
}

/// Integrability diagnostics for the jump measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport {
    /// `∫ (ξ ∧ 1) ν(dξ)`.
    pub int_xi_wedge_1: f64,
    /// `∫_(1,∞) ξ ν(dξ)`, `+∞` when divergent.
    pub int_tail_xi: f64,
    /// `∫_(0,1) ξ ln(1/ξ) ν(dξ)`, `+∞` when divergent.
    pub int_xi_log: f64,
    /// Small-jump condition needed for the compound Poisson decomposition.
    pub small_jumps_ok: bool,
    /// Large-jump moment condition needed for the drift bound.
    pub large_jumps_ok: bool,
    pub ergodic_ok: bool,
}

fn improper_value(r: Improper<f64>) -> f64 {
    match r {
        Improper::Finite(e) => e.value.max(0.0),
        Improper::Divergent => f64::INFINITY,
    }
}

/// Evaluates the integrability conditions on `ν`.
pub fn check_admissible(nu: &LevyMeasure, quad_tol: f64) -> Result<AdmissibilityReport> {
    let rule = HalfLineRule::new(Tolerance::relative(quad_tol));
    let below = |f: fn(f64) -> f64, label| nu.integrate_region(f, Region::BelowOne, rule, label);
    let above = |f: fn(f64) -> f64, label| nu.integrate_region(f, Region::AboveOne, rule, label);

    let wedge_low = improper_value(below(|xi| xi, "∫_(0,1) ξ ν(dξ)")?);
    let tail_mass = improper_value(above(|_| 1.0, "ν([1,∞))")?);
    let int_tail_xi = improper_value(above(|xi| xi, "∫_(1,∞) ξ ν(dξ)")?);
    let int_xi_log = improper_value(below(|xi| -xi * xi.ln(), "∫_(0,1) ξ ln(1/ξ) ν(dξ)")?);
    // point masses sitting exactly at 1 belong to neither open region
    let at_one = match nu.kind() {
        LevyKind::PointMasses(pm) => pm.iter().filter(|p| p.size == 1.0).map(|p| p.mass).sum(),
        _ => 0.0,
    };
    let int_xi_wedge_1 = wedge_low + tail_mass + at_one;
    let small_jumps_ok = int_xi_log.is_finite();
    let large_jumps_ok = int_tail_xi.is_finite();
    Ok(AdmissibilityReport {
        int_xi_wedge_1,
        int_tail_xi,
        int_xi_log,
        small_jumps_ok,
        large_jumps_ok,
        ergodic_ok: small_jumps_ok && large_jumps_ok,
    })
}

/// `∫ ξ ν(dξ)`, `+∞` when divergent.
pub fn first_moment(nu: &LevyMeasure, quad_tol: f64) -> Result<f64> {
    nu.moment(1, Tolerance::relative(quad_tol))
}
