//! Exact fixed-time sampling, Euler paths and skeleton chains.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::charfn::FrequencyPoint;
use crate::cir::cir_sample;
use crate::error::{Error, Result};
use crate::jumppart::JumpPartSummary;
use crate::model::{JcirParams, JumpSampler};
use crate::rng::StreamFactory;

/// Exact sampler of `X_t^x` at a fixed horizon: CIR draw plus an independent
/// draw of the jump component `Z_t`.
#[derive(Debug, Clone)]
pub struct MarginalSampler {
    t: f64,
    params: JcirParams,
    jumps: JumpPartSummary,
}

impl MarginalSampler {
    pub fn new(t: f64, p: &JcirParams, quad_tol: f64) -> Result<Self> {
        Ok(MarginalSampler {
            t,
            params: p.clone(),
            jumps: JumpPartSummary::new(t, p, quad_tol)?,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.t
    }

    pub fn jump_part(&self) -> &JumpPartSummary {
        &self.jumps
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> Result<f64> {
        Ok(cir_sample(self.t, x, &self.params, rng)? + self.jumps.z_sample(rng)?)
    }
}

/// One exact draw of `X_t^x`; builds the jump summary on every call.
pub fn exact_marginal_sample<R: Rng + ?Sized>(t: f64, x: f64, p: &JcirParams, rng: &mut R) -> Result<f64> {
    MarginalSampler::new(t, p, 1e-10)?.sample(x, rng)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathConfig {
    pub x0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub seed: u64,
}

impl PathConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.x0 >= 0.0 && self.x0.is_finite()) {
            return Err(Error::invalid("x0", "initial state must be >= 0"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::invalid("horizon", "must be > 0"));
        }
        if !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::invalid("dt", "must satisfy 0 < dt <= horizon"));
        }
        Ok(())
    }

    /// Step sizes covering `[0, horizon]`; the last one may be shorter.
    fn steps(&self) -> Vec<f64> {
        let full = (self.horizon / self.dt * (1.0 + 1e-12)).floor() as usize;
        let mut steps = vec![self.dt; full];
        let rest = self.horizon - full as f64 * self.dt;
        if rest > 1e-12 * self.horizon {
            steps.push(rest);
        }
        steps
    }
}

/// Compound Poisson increment over `dt`: number of jumps and their total.
pub fn jump_increment<R: Rng + ?Sized>(jumps: &JumpSampler, dt: f64, rng: &mut R) -> (u64, f64) {
    let rate = jumps.mass() * dt;
    if rate == 0.0 {
        return (0, 0.0);
    }
    let n = Poisson::new(rate).expect("finite positive rate").sample(rng) as u64;
    let total = (0..n).map(|_| jumps.sample(rng)).sum();
    (n, total)
}

/// Full-truncation Euler path: the drift and diffusion coefficients see
/// `X⁺`, and the recorded states are `X⁺`. Jumps are compound Poisson
/// increments of the measure samplers draw from.
pub fn euler_path_with_rng<R: Rng + ?Sized>(cfg: &PathConfig, p: &JcirParams, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let jumps = if p.nu().is_zero() {
        None
    } else {
        Some(p.nu().jump_sampler()?)
    };
    let (a, theta, sigma) = (p.a(), p.theta(), p.sigma());
    let mut x = cfg.x0;
    let mut t = 0.0;
    let mut out = vec![(0.0, x)];
    for dt in cfg.steps() {
        let xp = x.max(0.0);
        let z: f64 = rng.sample(StandardNormal);
        let dj = jumps.as_ref().map_or(0.0, |j| jump_increment(j, dt, rng).1);
        x += a * (theta - xp) * dt + sigma * (xp * dt).sqrt() * z + dj;
        t += dt;
        out.push((t, x.max(0.0)));
    }
    Ok(out)
}

/// Euler path drawn from stream 0 of the key derived from `cfg.seed`.
pub fn euler_path(cfg: &PathConfig, p: &JcirParams) -> Result<Vec<(f64, f64)>> {
    let mut rng = StreamFactory::new(cfg.seed, "euler").stream(0);
    euler_path_with_rng(cfg, p, &mut rng)
}

/// States `η_n = X_{nδ}`, `n = 0, …, n_steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonChain {
    pub delta: f64,
    pub states: Vec<f64>,
}

/// Iterates the exact `δ`-step sampler from `x`.
pub fn skeleton_chain_with<R: Rng + ?Sized>(
    x: f64,
    n_steps: usize,
    step: &MarginalSampler,
    rng: &mut R,
) -> Result<SkeletonChain> {
    if !(x >= 0.0) {
        return Err(Error::invalid("x", "initial state must be >= 0"));
    }
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(x);
    let mut current = x;
    for _ in 0..n_steps {
        current = step.sample(current, rng)?;
        states.push(current);
    }
    Ok(SkeletonChain {
        delta: step.horizon(),
        states,
    })
}

pub fn skeleton_chain<R: Rng + ?Sized>(
    x: f64,
    delta: f64,
    n_steps: usize,
    p: &JcirParams,
    rng: &mut R,
) -> Result<SkeletonChain> {
    if !(delta > 0.0) {
        return Err(Error::invalid("delta", "skeleton spacing must be > 0"));
    }
    let step = MarginalSampler::new(delta, p, 1e-10)?;
    skeleton_chain_with(x, n_steps, &step, rng)
}

/// Empirical characteristic function with jackknife standard errors of the
/// real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McCf {
    pub value: Complex64,
    pub se_re: f64,
    pub se_im: f64,
}

impl McCf {
    /// `√(se_re² + se_im²)`.
    pub fn se(&self) -> f64 {
        self.se_re.hypot(self.se_im)
    }
}

fn jackknife_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let total: f64 = values.iter().sum();
    let mean = total / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    // leave-one-out means (total − v)/(n − 1) average back to the full mean
    let ss: f64 = values
        .iter()
        .map(|v| {
            let d = (total - v) / (n - 1.0) - mean;
            d * d
        })
        .sum();
    (mean, ((n - 1.0) / n * ss).sqrt())
}

/// `N^{−1} Σ e^{u x_j}`.
pub fn mc_cf(samples: &[f64], u: FrequencyPoint) -> Result<McCf> {
    if samples.is_empty() {
        return Err(Error::InsufficientData(
            "empirical CF needs at least one sample".to_string(),
        ));
    }
    let u = u.value();
    let (re, im): (Vec<f64>, Vec<f64>) = samples
        .iter()
        .map(|&x| {
            let z = (u * x).exp();
            (z.re, z.im)
        })
        .unzip();
    let (mre, se_re) = jackknife_mean(&re);
    let (mim, se_im) = jackknife_mean(&im);
    Ok(McCf {
        value: Complex64::new(mre, mim),
        se_re,
        se_im,
    })
}
