//! Bessel distribution `μ_{α,β} = e^{−α} δ_0 + m_{α,β}`, the law of the
//! diffusion-driven remainder of a single jump of size `ξ` after time `s`.
//!
//! `m_{α,β}(dx) = β e^{−α−βx} √(α/(βx)) I_1(2√(αβx)) dx` and
//! `μ̂_{α,β}(u) = exp(αu/(β−u))`, which is the transform of a Poisson(α) sum
//! of Exponential(β) variables; the sampler uses that identity.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};

use crate::charfn::FrequencyPoint;
use crate::error::{Error, Result};
use crate::model::JcirParams;
use crate::special::bessel_iq;

/// Above this rate the zero-truncated Poisson is drawn by rejecting zeros.
const INVERSION_MAX_ALPHA: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BesselParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", "must be finite and > 0"));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", "must be finite and > 0"));
        }
        Ok(BesselParams { alpha, beta })
    }

    /// `α = 2aξ/(σ²(e^{as}−1))`, `β = 2a e^{as}/(σ²(e^{as}−1))`.
    pub fn from_time_jump(s: f64, xi: f64, p: &JcirParams) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::invalid("s", "elapsed time must be > 0"));
        }
        if !(xi > 0.0) {
            return Err(Error::invalid("xi", "jump size must be > 0"));
        }
        let (alpha, beta) = alpha_beta(s, xi, p);
        BesselParams::new(alpha, beta)
    }
}

pub(crate) fn alpha_beta(s: f64, xi: f64, p: &JcirParams) -> (f64, f64) {
    let a = p.a();
    let growth = (a * s).exp_m1();
    let scale = 2.0 * a / (p.sigma2() * growth);
    (scale * xi, scale * (a * s).exp())
}

/// `α(s, ξ)` alone.
pub(crate) fn alpha_of(s: f64, xi: f64, p: &JcirParams) -> f64 {
    2.0 * p.a() * xi / (p.sigma2() * (p.a() * s).exp_m1())
}

/// Mass `e^{−α}` of the atom at zero.
pub fn atom_mass(bp: &BesselParams) -> f64 {
    (-bp.alpha).exp()
}

/// Density of the absolutely continuous part `m_{α,β}` at `x > 0`; at
/// `x = 0` the finite right limit `αβe^{−α}`.
pub fn pdf_continuous(bp: &BesselParams, x: f64) -> f64 {
    let BesselParams { alpha, beta } = *bp;
    if x < 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return alpha * beta * (-alpha).exp();
    }
    let bessel = bessel_iq(1.0, 2.0 * (alpha * beta * x).sqrt());
    (beta.ln() - alpha - beta * x + 0.5 * (alpha.ln() - beta.ln() - x.ln()) + bessel.ln()).exp()
}

/// `μ̂_{α,β}(u) = exp(αu/(β−u))`.
pub fn cf(bp: &BesselParams, u: FrequencyPoint) -> Complex64 {
    let u = u.value();
    (bp.alpha * u / (bp.beta - u)).exp()
}

fn sum_of_exponentials<R: Rng + ?Sized>(n: f64, beta: f64, rng: &mut R) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    Gamma::new(n, 1.0 / beta).expect("positive shape and scale").sample(rng)
}

/// Exact draw: `N ~ Poisson(α)`, then the sum of `N` Exponential(β)
/// variables; `N = 0` gives exactly `0`.
pub fn sample<R: Rng + ?Sized>(bp: &BesselParams, rng: &mut R) -> f64 {
    let n: f64 = Poisson::new(bp.alpha).expect("alpha > 0").sample(rng);
    sum_of_exponentials(n, bp.beta, rng)
}

/// Draw from `m_{α,β} / (1 − e^{−α})`, i.e. with `N` conditioned on `N ≥ 1`.
pub fn sample_conditional_nonzero<R: Rng + ?Sized>(bp: &BesselParams, rng: &mut R) -> f64 {
    let n = zero_truncated_poisson(bp.alpha, rng);
    sum_of_exponentials(n, bp.beta, rng)
}

fn zero_truncated_poisson<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha > INVERSION_MAX_ALPHA {
        let poisson = Poisson::new(alpha).expect("alpha > 0");
        loop {
            let n: f64 = poisson.sample(rng);
            if n >= 1.0 {
                return n;
            }
        }
    }
    let u: f64 = rng.random();
    let target = u * -(-alpha).exp_m1();
    let mut k = 1.0;
    let mut prob = alpha * (-alpha).exp();
    let mut cumulative = prob;
    while cumulative <= target && prob > 0.0 {
        k += 1.0;
        prob *= alpha / k;
        cumulative += prob;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LevyMeasure;
    use crate::quad::{integrate, Tolerance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn bp(alpha: f64, beta: f64) -> BesselParams {
        BesselParams::new(alpha, beta).unwrap()
    }

    fn mass_up_to(b: &BesselParams, upper: f64, g: impl Fn(f64) -> f64) -> f64 {
        integrate(
            |x| g(x) * pdf_continuous(b, x),
            0.0,
            upper,
            Tolerance::relative(1e-13).with_abs(1e-16),
            "test",
        )
        .unwrap()
        .value
    }

    fn upper_limit(b: &BesselParams) -> f64 {
        let mean = b.alpha / b.beta;
        let sd = (2.0 * b.alpha).sqrt() / b.beta;
        mean + 40.0 * sd + 40.0 / b.beta
    }

    #[test]
    fn parameters_from_time_and_jump() {
        let p = JcirParams::new(1.0, 1.0, 2f64.sqrt(), LevyMeasure::zero()).unwrap();
        let b = BesselParams::from_time_jump(2f64.ln(), 1.0, &p).unwrap();
        assert!((b.alpha - 1.0).abs() < 1e-14 && (b.beta - 2.0).abs() < 1e-14);
        let b2 = BesselParams::from_time_jump(2f64.ln(), 2.0, &p).unwrap();
        assert!((b2.alpha - 2.0 * b.alpha).abs() < 1e-14 && b2.beta == b.beta);
        let late = BesselParams::from_time_jump(60.0, 1.0, &p).unwrap();
        assert!(late.alpha < 1e-25 && (late.beta - 1.0).abs() < 1e-14);
        assert!(b.beta > 2.0 * p.a() / p.sigma2());
        assert!(BesselParams::from_time_jump(0.0, 1.0, &p).is_err());
    }

    #[test]
    fn atom_mass_values() {
        assert!((atom_mass(&bp(2f64.ln(), 1.0)) - 0.5).abs() < 1e-15);
        assert!((atom_mass(&bp(1e-300, 1.0)) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn total_mass_is_one() {
        for alpha in [0.1, 1.0, 10.0] {
            for beta in [0.5, 2.0] {
                let b = bp(alpha, beta);
                let total = atom_mass(&b) + mass_up_to(&b, upper_limit(&b), |_| 1.0);
                assert!((total - 1.0).abs() < 1e-8, "alpha={alpha} beta={beta}: {total}");
            }
        }
    }

    #[test]
    fn density_limit_at_origin() {
        let b = bp(1.3, 0.7);
        let limit = pdf_continuous(&b, 0.0);
        assert!((pdf_continuous(&b, 1e-12) - limit).abs() < 1e-10 * limit);
    }

    #[test]
    fn cf_values() {
        let b = bp(1.0, 2.0);
        assert_eq!(cf(&b, FrequencyPoint::imaginary(0.0)), Complex64::new(1.0, 0.0));
        let v = cf(&b, FrequencyPoint::real(-2.0).unwrap());
        assert!((v.re - (-0.5f64).exp()).abs() < 1e-15 && v.im == 0.0);

        // atom plus numerical transform of the continuous part
        let upper = upper_limit(&b);
        let re = mass_up_to(&b, upper, f64::cos);
        let im = mass_up_to(&b, upper, f64::sin);
        let numeric = Complex64::new(atom_mass(&b) + re, im);
        assert!((numeric - cf(&b, FrequencyPoint::imaginary(1.0))).norm() < 1e-7);
    }

    #[test]
    fn mean_from_cf_derivative() {
        let b = bp(1.7, 0.9);
        let h = 1e-5;
        let d = (cf(&b, FrequencyPoint::imaginary(h)) - cf(&b, FrequencyPoint::imaginary(-h))) / (2.0 * h);
        assert!((d.im - b.alpha / b.beta).abs() < 1e-8);
        let mean = mass_up_to(&b, upper_limit(&b), |x| x);
        assert!((mean - b.alpha / b.beta).abs() < 1e-9);
    }

    #[test]
    fn convolution_semigroup_in_alpha() {
        for v in [-3.0, 0.5, 12.0] {
            let u = FrequencyPoint::new(Complex64::new(-0.4, v)).unwrap();
            let lhs = cf(&bp(2.5, 1.5), u);
            let rhs = cf(&bp(1.0, 1.5), u) * cf(&bp(1.5, 1.5), u);
            assert!((lhs - rhs).norm() < 1e-14);
        }
    }

    fn moments(vals: impl Iterator<Item = f64>) -> (f64, f64, usize) {
        let (mut n, mut mean, mut m2) = (0usize, 0.0, 0.0);
        for v in vals {
            n += 1;
            let d = v - mean;
            mean += d / n as f64;
            m2 += d * (v - mean);
        }
        (mean, (m2 / (n as f64 - 1.0) / n as f64).sqrt(), n)
    }

    #[test]
    fn sampler_matches_law() {
        let b = bp(0.8, 1.6);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..1_000_000).map(|_| sample(&b, &mut rng)).collect();
        let (zero_freq, se, _) = moments(draws.iter().map(|&d| f64::from(u8::from(d == 0.0))));
        assert!((zero_freq - atom_mass(&b)).abs() < 4.0 * se);
        let (mean, se, _) = moments(draws.iter().copied());
        assert!((mean - b.alpha / b.beta).abs() < 4.0 * se);
        let exact = cf(&b, FrequencyPoint::imaginary(1.0));
        let (re, se_re, _) = moments(draws.iter().map(|d| d.cos()));
        let (im, se_im, _) = moments(draws.iter().map(|d| d.sin()));
        assert!((re - exact.re).abs() < 4.0 * se_re && (im - exact.im).abs() < 4.0 * se_im);
    }

    #[test]
    fn conditional_sampler_mean_and_positivity() {
        for (alpha, seed) in [(0.05, 3), (2.0, 4), (45.0, 5)] {
            let b = bp(alpha, 1.2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws: Vec<f64> = (0..200_000).map(|_| sample_conditional_nonzero(&b, &mut rng)).collect();
            assert!(draws.iter().all(|&d| d > 0.0));
            let (mean, se, _) = moments(draws.iter().copied());
            let expected = mass_up_to(&b, upper_limit(&b), |x| x) / -(-alpha).exp_m1();
            assert!(((b.alpha / b.beta) / -(-alpha).exp_m1() - expected).abs() < 1e-8 * expected);
            assert!((mean - expected).abs() < 4.0 * se, "alpha={alpha}");
        }
    }

    #[test]
    fn conditional_sampler_chi_square() {
        let b = bp(1.5, 2.0);
        let norm = -(-b.alpha).exp_m1();
        let edges: Vec<f64> = (0..=20).map(|i| i as f64 * 0.2).collect();
        let n = 200_000;
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut counts = vec![0.0; edges.len()];
        for _ in 0..n {
            let d = sample_conditional_nonzero(&b, &mut rng);
            let bin = edges
                .partition_point(|&e| e <= d)
                .saturating_sub(1)
                .min(edges.len() - 1);
            counts[bin] += 1.0;
        }
        let mut probs: Vec<f64> = edges
            .windows(2)
            .map(|w| {
                integrate(|x| pdf_continuous(&b, x), w[0], w[1], Tolerance::relative(1e-12), "bin")
                    .unwrap()
                    .value
                    / norm
            })
            .collect();
        probs.push(1.0 - probs.iter().sum::<f64>());
        let stat: f64 = counts
            .iter()
            .zip(&probs)
            .map(|(c, p)| (c - n as f64 * p).powi(2) / (n as f64 * p))
            .sum();
        let p_value = 1.0 - ChiSquared::new((probs.len() - 1) as f64).unwrap().cdf(stat);
        assert!(p_value > 0.01, "chi2={stat} p={p_value}");
    }
}
