//! The pure-jump component `Z_t`: started at zero with `θ = 0`, it is a
//! compound Poisson variable with rate
//! `λ(t) = ∫_0^t ∫ (1 − e^{−α(s,ξ)}) ν(dξ) ds` and jump law
//! `ρ = λ^{−1} ∫_0^t ∫ m_{α,β} ν(dξ) ds`, so `P(Z_t = 0) = e^{−λ(t)}`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::besseldist::{alpha_beta, alpha_of, sample_conditional_nonzero, BesselParams};
use crate::error::{Error, Result};
use crate::model::{first_moment, JcirParams, JumpSampler, LevyKind, LevyMeasure};
use crate::quad::{self, Improper, Tolerance};

/// Rejection samplers refuse to run below this acceptance probability.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Beyond this value of `α`, `1 − e^{−α}` equals one in double precision.
const SATURATION: f64 = 60.0;

/// `∫_0^t (1 − e^{−α(s,ξ)}) ds` for a single jump size.
///
/// With `y = α(s, ξ)` and `c = 2aξ/σ²` the integral becomes
/// `a^{−1} ∫_{α(t,ξ)}^∞ (1 − e^{−y}) c / (y (y + c)) dy`, evaluated in
/// `w = ln y` up to `y = 60` and in closed form beyond.
pub fn time_integral(t: f64, xi: f64, p: &JcirParams, quad_tol: f64) -> Result<f64> {
    let a = p.a();
    let c = 2.0 * a * xi / p.sigma2();
    let y_t = alpha_of(t, xi, p);
    if y_t >= SATURATION {
        return Ok((c / y_t).ln_1p() / a);
    }
    let body = quad::integrate(
        |w: f64| {
            let y = w.exp();
            // y c/(y+c) without forming y·c, which underflows for tiny jumps
            let harmonic = if y < c { y / (1.0 + y / c) } else { c / (1.0 + c / y) };
            -(-y).exp_m1() / y * harmonic
        },
        y_t.ln(),
        SATURATION.ln(),
        Tolerance::relative(quad_tol).with_abs(1e-300),
        "∫(1−e^{−y}) c/(y+c) d(ln y)",
    )?;
    Ok((body.value + (c / SATURATION).ln_1p()) / a)
}

fn lambda_for(t: f64, nu: &LevyMeasure, p: &JcirParams, quad_tol: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::invalid("t", "time must be > 0"));
    }
    match nu.kind() {
        LevyKind::Zero => Ok(0.0),
        LevyKind::PointMasses(pm) => pm
            .iter()
            .map(|m| Ok(m.mass * time_integral(t, m.size, p, quad_tol)?))
            .sum(),
        _ => {
            // integrate_real cannot propagate errors from the integrand
            let failure = std::cell::RefCell::new(None);
            let label = "∫_0^t∫(1−e^{−α})ν(dξ)ds";
            let value = nu.integrate_real(
                |xi| match time_integral(t, xi, p, quad_tol * 0.01) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.borrow_mut().get_or_insert(e);
                        0.0
                    }
                },
                Tolerance::relative(quad_tol),
                label,
            )?;
            if let Some(e) = failure.into_inner() {
                return Err(e);
            }
            match value {
                Improper::Finite(est) => Ok(est.value),
                Improper::Divergent => Err(Error::Divergent {
                    integral: label.to_string(),
                }),
            }
        }
    }
}

/// Poisson rate `λ(t)` of the jump component.
pub fn lambda_of_t(t: f64, p: &JcirParams, quad_tol: f64) -> Result<f64> {
    lambda_for(t, p.nu(), p, quad_tol)
}

/// `C(t) = P(Z_t = 0) = e^{−λ(t)}`.
pub fn c_lower(t: f64, p: &JcirParams, quad_tol: f64) -> Result<f64> {
    Ok((-lambda_of_t(t, p, quad_tol)?).exp())
}

/// `E[Z_t] = ((1 − e^{−at})/a) ∫ ξ ν(dξ)`.
pub fn z_mean(t: f64, p: &JcirParams) -> Result<f64> {
    let m1 = first_moment(p.nu(), 1e-10)?;
    if m1 == 0.0 {
        return Ok(0.0);
    }
    Ok(-(-p.a() * t).exp_m1() / p.a() * m1)
}

/// Fixed-`t` quantities of the jump component, plus what its samplers need.
///
/// For an infinite-activity measure the samplers draw from the measure
/// truncated below `eps_trunc`; `sampling_lambda` is the rate of that
/// truncated representation, while `lambda_t` and `c_t` refer to `ν` itself.
#[derive(Debug, Clone)]
pub struct JumpPartSummary {
    pub t: f64,
    pub lambda_t: f64,
    pub c_t: f64,
    pub mean_z: f64,
    pub sampling_lambda: f64,
    params: JcirParams,
    jumps: Option<JumpSampler>,
}

impl JumpPartSummary {
    pub fn new(t: f64, p: &JcirParams, quad_tol: f64) -> Result<Self> {
        let lambda_t = lambda_of_t(t, p, quad_tol)?;
        let truncated = p.nu().truncated();
        let sampling_lambda = if truncated == *p.nu() {
            lambda_t
        } else {
            lambda_for(t, &truncated, p, quad_tol)?
        };
        let jumps = if p.nu().is_zero() {
            None
        } else {
            Some(p.nu().jump_sampler()?)
        };
        Ok(JumpPartSummary {
            t,
            lambda_t,
            c_t: (-lambda_t).exp(),
            mean_z: z_mean(t, p)?,
            sampling_lambda,
            params: p.clone(),
            jumps,
        })
    }

    /// Acceptance probability `λ / (t |ν|)` of the rejection sampler for `ρ`.
    pub fn acceptance(&self) -> f64 {
        match &self.jumps {
            Some(j) => self.sampling_lambda / (self.t * j.mass()),
            None => 0.0,
        }
    }

    fn check_acceptance(&self) -> Result<()> {
        let acceptance = self.acceptance();
        if acceptance < MIN_ACCEPTANCE {
            return Err(Error::AcceptanceTooLow {
                acceptance,
                floor: MIN_ACCEPTANCE,
            });
        }
        Ok(())
    }

    /// One draw from `ρ`, together with the number of proposals it took.
    pub fn rho_sample_counted<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(f64, u64)> {
        let jumps = self
            .jumps
            .as_ref()
            .ok_or_else(|| Error::invalid("nu", "ρ is undefined for the zero measure"))?;
        self.check_acceptance()?;
        let mut proposals = 0;
        loop {
            proposals += 1;
            // s in (0, t]
            let s = self.t * (1.0 - rng.random::<f64>());
            let xi = jumps.sample(rng);
            let (alpha, beta) = alpha_beta(s, xi, &self.params);
            let accept = -(-alpha).exp_m1();
            if rng.random::<f64>() < accept {
                let bp = BesselParams { alpha, beta };
                return Ok((sample_conditional_nonzero(&bp, rng), proposals));
            }
        }
    }

    pub fn rho_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        Ok(self.rho_sample_counted(rng)?.0)
    }

    /// `N ~ Poisson(λ)`, then the sum of `N` draws from `ρ`.
    pub fn z_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        if self.sampling_lambda == 0.0 {
            return Ok(0.0);
        }
        self.check_acceptance()?;
        let n: f64 = Poisson::new(self.sampling_lambda)
            .map_err(|e| Error::invalid("nu", format!("Poisson rate {}: {e}", self.sampling_lambda)))?
            .sample(rng);
        let mut total = 0.0;
        for _ in 0..n as u64 {
            total += self.rho_sample(rng)?;
        }
        Ok(total)
    }
}

/// Single draw from `ρ`; builds the summary for `(t, p)` on every call.
pub fn rho_sample<R: Rng + ?Sized>(t: f64, p: &JcirParams, rng: &mut R) -> Result<f64> {
    JumpPartSummary::new(t, p, 1e-10)?.rho_sample(rng)
}

/// Single draw of `Z_t`; builds the summary for `(t, p)` on every call.
pub fn z_sample<R: Rng + ?Sized>(t: f64, p: &JcirParams, rng: &mut R) -> Result<f64> {
    JumpPartSummary::new(t, p, 1e-10)?.z_sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::{z_cf, FrequencyPoint};
    use crate::model::{JumpDensity, LevyDensity, PointMass};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_nu(nu: LevyMeasure) -> JcirParams {
        JcirParams::new(1.0, 1.0, 2f64.sqrt(), nu).unwrap()
    }

    fn unit_mass() -> JcirParams {
        with_nu(LevyMeasure::point_masses(vec![PointMass { size: 1.0, mass: 1.0 }]).unwrap())
    }

    fn exponential_jumps() -> JcirParams {
        with_nu(LevyMeasure::finite_activity(1.0, JumpDensity::Exponential { mean: 1.0 }).unwrap())
    }

    fn tempered_stable() -> JcirParams {
        let nu = LevyMeasure::infinite_activity(
            LevyDensity::TemperedStable {
                intensity: 0.5,
                alpha: 0.5,
                lambda: 1.0,
            },
            1e-3,
        )
        .unwrap();
        with_nu(nu)
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut sum = f(a) + f(b);
        for i in 1..n {
            sum += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        sum * h / 3.0
    }

    // α(s, ξ) = k(s) ξ
    fn rate_k(s: f64, p: &JcirParams) -> f64 {
        2.0 * p.a() / (p.sigma2() * (p.a() * s).exp_m1())
    }

    #[test]
    fn zero_measure() {
        let p = with_nu(LevyMeasure::zero());
        assert_eq!(lambda_of_t(1.0, &p, 1e-10).unwrap(), 0.0);
        assert_eq!(c_lower(1.0, &p, 1e-10).unwrap(), 1.0);
        assert_eq!(z_mean(3.0, &p).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(z_sample(1.0, &p, &mut rng).unwrap(), 0.0);
    }

    #[test]
    fn saturated_jump_fills_the_horizon() {
        // a large jump keeps α above the saturation level on all of (0, t]
        let p = unit_mass();
        let m = time_integral(0.01, 100.0, &p, 1e-12).unwrap();
        assert!((m - 0.01).abs() < 1e-15);
    }

    #[test]
    fn point_mass_lambda_matches_simpson_over_time() {
        let p = unit_mass();
        let oracle = simpson(
            |s| if s == 0.0 { 1.0 } else { -(-rate_k(s, &p)).exp_m1() },
            0.0,
            1.0,
            200_000,
        );
        let lambda = lambda_of_t(1.0, &p, 1e-12).unwrap();
        assert!((lambda - oracle).abs() < 1e-8, "{lambda} vs {oracle}");
    }

    #[test]
    fn exponential_jumps_lambda_matches_simpson() {
        // ∫(1−e^{−kξ}) Exp(1)(dξ) = k/(1+k)
        let p = exponential_jumps();
        let oracle = simpson(
            |s| {
                if s == 0.0 {
                    1.0
                } else {
                    let k = rate_k(s, &p);
                    k / (1.0 + k)
                }
            },
            0.0,
            0.7,
            200_000,
        );
        let lambda = lambda_of_t(0.7, &p, 1e-10).unwrap();
        assert!((lambda - oracle).abs() < 1e-8, "{lambda} vs {oracle}");
    }

    #[test]
    fn tempered_stable_lambda_matches_time_quadrature() {
        // λ = −∫_0^t ∫(e^{−k(s)ξ} − 1) ν(dξ) ds with the closed-form exponent
        let p = tempered_stable();
        let oracle = quad::integrate(
            |s: f64| {
                -p.nu()
                    .laplace_exponent(Complex64::new(-rate_k(s, &p), 0.0), Tolerance::default())
                    .unwrap()
                    .re
            },
            0.0,
            1.0,
            Tolerance::relative(1e-12),
            "oracle",
        )
        .unwrap()
        .value;
        let lambda = lambda_of_t(1.0, &p, 1e-10).unwrap();
        assert!((lambda - oracle).abs() < 1e-7 * oracle, "{lambda} vs {oracle}");
    }

    #[test]
    fn monotone_in_time_and_linear_in_scale() {
        let p = exponential_jumps();
        let mut prev_lambda = 0.0;
        let mut prev_c = 1.0;
        for t in [0.05, 0.2, 1.0, 3.0, 10.0] {
            let lambda = lambda_of_t(t, &p, 1e-10).unwrap();
            let c = c_lower(t, &p, 1e-10).unwrap();
            assert!(lambda >= prev_lambda && c <= prev_c && c > 0.0);
            prev_lambda = lambda;
            prev_c = c;
        }
        let scaled = p.with_nu(p.nu().scaled(2.5).unwrap());
        let l1 = lambda_of_t(1.0, &p, 1e-10).unwrap();
        let l2 = lambda_of_t(1.0, &scaled, 1e-10).unwrap();
        assert!((l2 - 2.5 * l1).abs() < 1e-10 * l2);
    }

    #[test]
    fn z_mean_closed_form() {
        let p = with_nu(LevyMeasure::point_masses(vec![PointMass { size: 2.0, mass: 3.0 }]).unwrap());
        assert!((z_mean(2f64.ln(), &p).unwrap() - 3.0).abs() < 1e-14);
        assert!((z_mean(80.0, &p).unwrap() - 6.0).abs() < 1e-14);
    }

    fn mean_se(vals: &[f64]) -> (f64, f64) {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    fn assert_cf_close(draws: &[f64], v: f64, target: Complex64) {
        let (re, se_re) = mean_se(&draws.iter().map(|d| (v * d).cos()).collect::<Vec<_>>());
        let (im, se_im) = mean_se(&draws.iter().map(|d| (v * d).sin()).collect::<Vec<_>>());
        assert!((re - target.re).abs() < 4.0 * se_re, "re {re} vs {}", target.re);
        assert!((im - target.im).abs() < 4.0 * se_im, "im {im} vs {}", target.im);
    }

    #[test]
    fn z_sampler_atom_mean_and_cf() {
        for (p, seed) in [(exponential_jumps(), 1u64), (unit_mass(), 2)] {
            let t = 0.8;
            let summary = JumpPartSummary::new(t, &p, 1e-10).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<f64> = (0..1_000_000).map(|_| summary.z_sample(&mut rng).unwrap()).collect();
            let zeros: Vec<f64> = draws.iter().map(|&d| f64::from(u8::from(d == 0.0))).collect();
            let (freq, se) = mean_se(&zeros);
            assert!((freq - summary.c_t).abs() < 4.0 * se, "{freq} vs {}", summary.c_t);
            let (mean, se) = mean_se(&draws);
            assert!((mean - summary.mean_z).abs() < 4.0 * se, "{mean} vs {}", summary.mean_z);
            let target = z_cf(t, FrequencyPoint::imaginary(1.0), &p, 1e-10).unwrap();
            assert_cf_close(&draws, 1.0, target);
        }
    }

    #[test]
    fn truncated_infinite_activity_sampler_matches_truncated_cf() {
        let p = tempered_stable();
        let t = 0.5;
        let summary = JumpPartSummary::new(t, &p, 1e-10).unwrap();
        assert!(summary.sampling_lambda < summary.lambda_t);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws: Vec<f64> = (0..200_000).map(|_| summary.z_sample(&mut rng).unwrap()).collect();
        let truncated = p.with_nu(p.nu().truncated());
        let target = z_cf(t, FrequencyPoint::imaginary(2.0), &truncated, 1e-10).unwrap();
        assert_cf_close(&draws, 2.0, target);
    }

    // ρ̂(u) = λ^{−1} ∫_0^t ∫ (e^{αu/(β−u)} − e^{−α}) ν(dξ) ds for a point mass at ξ
    fn rho_cf_point_mass(t: f64, xi: f64, p: &JcirParams, lambda: f64, u: Complex64) -> Complex64 {
        let est = quad::integrate(
            |s: f64| {
                if s == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let (alpha, beta) = alpha_beta(s, xi, p);
                (alpha * u / (beta - u)).exp() - (-alpha).exp()
            },
            0.0,
            t,
            Tolerance::relative(1e-12).with_abs(1e-14),
            "oracle",
        )
        .unwrap();
        est.value / lambda
    }

    #[test]
    fn rho_sampler_cf_and_acceptance_rate() {
        let p = unit_mass();
        let t = 1.0;
        let summary = JumpPartSummary::new(t, &p, 1e-12).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut draws = Vec::with_capacity(400_000);
        let mut proposals = 0u64;
        for _ in 0..400_000 {
            let (d, k) = summary.rho_sample_counted(&mut rng).unwrap();
            assert!(d > 0.0);
            draws.push(d);
            proposals += k;
        }
        let target = rho_cf_point_mass(t, 1.0, &p, summary.lambda_t, Complex64::new(0.0, 1.0));
        assert_cf_close(&draws, 1.0, target);

        // accepted count ~ Binomial(proposals, acceptance)
        let acc = summary.acceptance();
        let rate = draws.len() as f64 / proposals as f64;
        let se = (acc * (1.0 - acc) / proposals as f64).sqrt();
        assert!((rate - acc).abs() < 4.0 * se, "{rate} vs {acc}");

        // compound Poisson identity e^{λ(ρ̂ − 1)} = Ẑ
        let u = Complex64::new(-0.3, 2.0);
        let rho_hat = rho_cf_point_mass(t, 1.0, &p, summary.lambda_t, u);
        let lhs = (summary.lambda_t * (rho_hat - 1.0)).exp();
        let rhs = z_cf(t, FrequencyPoint::new(u).unwrap(), &p, 1e-12).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn rho_law_invariant_under_scaling() {
        let p = exponential_jumps();
        let q = p.with_nu(p.nu().scaled(3.0).unwrap());
        let sp = JumpPartSummary::new(0.6, &p, 1e-10).unwrap();
        let sq = JumpPartSummary::new(0.6, &q, 1e-10).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(77);
        let mut r2 = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..1000 {
            assert_eq!(sp.rho_sample(&mut r1).unwrap(), sq.rho_sample(&mut r2).unwrap());
        }
    }

    #[test]
    fn tiny_acceptance_is_refused() {
        // tiny jumps of huge total mass: α ≪ 1 almost everywhere
        let p = with_nu(LevyMeasure::point_masses(vec![PointMass { size: 1e-9, mass: 1e6 }]).unwrap());
        let summary = JumpPartSummary::new(5.0, &p, 1e-10).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            summary.rho_sample(&mut rng),
            Err(Error::AcceptanceTooLow { .. })
        ));
    }
}
