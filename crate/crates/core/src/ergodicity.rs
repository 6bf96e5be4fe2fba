//! Monte Carlo diagnostics for the drift bound and for exponential
//! convergence in total variation.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use crate::charfn::{invariant_cf, FrequencyPoint};
use crate::error::{Error, Result};
use crate::model::{check_admissible, first_moment, JcirParams};
use crate::rng::{sample_batch, StreamFactory};
use crate::simulate::{mc_cf, MarginalSampler, McCf};

const QUAD_TOL: f64 = 1e-10;
const MAX_BINS: usize = 20_000;

/// Bootstrap resamples used by [`tv_distance`].
pub const BOOTSTRAP_RESAMPLES: usize = 200;

fn drift_constant(p: &JcirParams) -> Result<(f64, f64)> {
    let m1 = first_moment(p.nu(), QUAD_TOL)?;
    if !m1.is_finite() {
        return Err(Error::Inadmissible("drift bound requires ∫ξν(dξ) < ∞".to_string()));
    }
    Ok((m1, p.theta() + m1 / p.a()))
}

/// `E[X_t^x] = θ(1−e^{−at}) + x e^{−at} + (1−e^{−at})/a · ∫ξν(dξ)`.
pub fn analytic_mean(t: f64, x: f64, p: &JcirParams) -> Result<f64> {
    let (m1, _) = drift_constant(p)?;
    let decay = (-p.a() * t).exp();
    let growth = -(-p.a() * t).exp_m1();
    Ok(p.theta() * growth + x * decay + growth / p.a() * m1)
}

/// `M = θ + (1/a)∫ξν(dξ)`, the constant in `E[X_t^x] ≤ e^{−at}x + M`.
pub fn drift_bound_constant(p: &JcirParams) -> Result<f64> {
    drift_constant(p).map(|(_, m)| m)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovCheck {
    pub analytic_mean: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    pub bound: f64,
    pub ok: bool,
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Compares `E[X_t^x]` with its Monte Carlo estimate and with the drift
/// bound `e^{−at}x + M`.
pub fn lyapunov_check<R: Rng + ?Sized>(
    x: f64,
    t: f64,
    p: &JcirParams,
    n_mc: usize,
    rng: &mut R,
) -> Result<LyapunovCheck> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid("x", "initial state must be finite and >= 0"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", "time must be finite and > 0"));
    }
    if n_mc < 2 {
        return Err(Error::invalid("n_mc", "need at least two draws"));
    }
    let analytic = analytic_mean(t, x, p)?;
    let bound = (-p.a() * t).exp() * x + drift_bound_constant(p)?;
    let sampler = MarginalSampler::new(t, p, QUAD_TOL)?;
    let draws = (0..n_mc)
        .map(|_| sampler.sample(x, rng))
        .collect::<Result<Vec<f64>>>()?;
    let (mc_mean, mc_se) = mean_se(&draws);
    let ok = analytic <= bound && (mc_mean - analytic).abs() <= 4.0 * mc_se;
    Ok(LyapunovCheck {
        analytic_mean: analytic,
        mc_mean,
        mc_se,
        bound,
        ok,
    })
}

/// Total variation estimate with its bootstrap standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvEstimate {
    pub tv: f64,
    pub se: f64,
    pub bins: usize,
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Shared Freedman–Diaconis binning of the pooled sample.
struct Binning {
    lo: f64,
    width: f64,
    bins: usize,
}

impl Binning {
    fn pooled(a: &[f64], b: &[f64]) -> Binning {
        let mut pooled: Vec<f64> = a.iter().chain(b).copied().collect();
        pooled.sort_by(f64::total_cmp);
        let lo = pooled[0];
        let hi = pooled[pooled.len() - 1];
        let range = hi - lo;
        if !(range > 0.0) {
            return Binning {
                lo,
                width: 1.0,
                bins: 1,
            };
        }
        let iqr = quantile_sorted(&pooled, 0.75) - quantile_sorted(&pooled, 0.25);
        let fd = 2.0 * iqr * (pooled.len() as f64).powf(-1.0 / 3.0);
        let bins = if fd > 0.0 {
            ((range / fd).ceil() as usize).clamp(1, MAX_BINS)
        } else {
            MAX_BINS
        };
        Binning {
            lo,
            width: range / bins as f64,
            bins,
        }
    }

    fn counts(&self, sample: &[f64]) -> Vec<u64> {
        let mut counts = vec![0u64; self.bins];
        for &v in sample {
            let k = (((v - self.lo) / self.width) as usize).min(self.bins - 1);
            counts[k] += 1;
        }
        counts
    }
}

fn half_l1(ca: &[u64], na: f64, cb: &[u64], nb: f64) -> f64 {
    let s: f64 = ca
        .iter()
        .zip(cb)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum();
    (0.5 * s).clamp(0.0, 1.0)
}

fn multinomial<R: Rng + ?Sized>(n: u64, counts: &[u64], total: u64, rng: &mut R) -> Vec<u64> {
    let mut remaining_n = n;
    let mut remaining_total = total;
    counts
        .iter()
        .map(|&c| {
            if remaining_n == 0 || c == 0 {
                remaining_total -= c;
                return 0;
            }
            let draw = if c >= remaining_total {
                remaining_n
            } else {
                Binomial::new(remaining_n, c as f64 / remaining_total as f64)
                    .expect("probability in [0,1]")
                    .sample(rng)
            };
            remaining_n -= draw;
            remaining_total -= c;
            draw
        })
        .collect()
}

/// `½ Σ |p̂_i − q̂_i|` over a shared Freedman–Diaconis binning of the pooled
/// sample. The standard error comes from [`BOOTSTRAP_RESAMPLES`] multinomial
/// resamples of both histograms.
pub fn tv_distance<R: Rng + ?Sized>(a: &[f64], b: &[f64], rng: &mut R) -> Result<TvEstimate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientData(
            "TV distance needs two non-empty samples".to_string(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::invalid("sample", "samples must be finite"));
    }
    let binning = Binning::pooled(a, b);
    let ca = binning.counts(a);
    let cb = binning.counts(b);
    let (na, nb) = (a.len() as u64, b.len() as u64);
    let tv = half_l1(&ca, na as f64, &cb, nb as f64);
    let boot: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let ra = multinomial(na, &ca, na, rng);
            let rb = multinomial(nb, &cb, nb, rng);
            half_l1(&ra, na as f64, &rb, nb as f64)
        })
        .collect();
    let (_, se_of_mean) = mean_se(&boot);
    Ok(TvEstimate {
        tv,
        se: se_of_mean * (boot.len() as f64).sqrt(),
        bins: binning.bins,
    })
}

/// `n_mc` exact draws of `X_{t_ref}^0`, a stand-in for the invariant law.
pub fn invariant_sample(p: &JcirParams, t_ref: f64, n_mc: usize, factory: &StreamFactory) -> Result<Vec<f64>> {
    if !(t_ref > 0.0) || !t_ref.is_finite() {
        return Err(Error::invalid("t_ref", "reference horizon must be finite and > 0"));
    }
    if n_mc == 0 {
        return Err(Error::invalid("n_mc", "need at least one draw"));
    }
    let sampler = MarginalSampler::new(t_ref, p, QUAD_TOL)?;
    sample_batch(factory, n_mc, |rng| sampler.sample(0.0, rng))
}

/// Empirical CF of an invariant sample next to `invariant_cf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantCfCheck {
    pub u: FrequencyPoint,
    pub empirical: McCf,
    pub exact: num_complex::Complex64,
}

impl InvariantCfCheck {
    /// `|empirical − exact|` in units of the Monte Carlo standard error.
    pub fn z_score(&self) -> f64 {
        (self.empirical.value - self.exact).norm() / self.empirical.se().max(f64::MIN_POSITIVE)
    }
}

/// Compares the sample with `invariant_cf` at each frequency.
pub fn validate_invariant_sample(
    sample: &[f64],
    p: &JcirParams,
    u_list: &[FrequencyPoint],
) -> Result<Vec<InvariantCfCheck>> {
    u_list
        .iter()
        .map(|&u| {
            Ok(InvariantCfCheck {
                u,
                empirical: mc_cf(sample, u)?,
                exact: invariant_cf(u, p, 1e-12)?,
            })
        })
        .collect()
}

/// Skeleton drift `E[η_{n+1} | η_n] ≤ e^{−aδ}η_n + M`, checked on
/// equal-count bins of `η_n` for each step `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftCell {
    pub n: usize,
    /// Mean of `η_n` over the conditioning bin.
    pub state: f64,
    /// Mean of `η_{n+1} − e^{−aδ}η_n` over the bin.
    pub excess: f64,
    pub se: f64,
}

/// Per-starting-point results of [`ergodic_rate_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct StartReport {
    pub x: f64,
    /// `(n, tv̂_n, bootstrap se)` for `n = 0, …, n_max`.
    pub tv_series: Vec<(usize, f64, f64)>,
    /// Inclusive range of `n` used in the log-linear fit.
    pub fit_range: (usize, usize),
    pub beta_hat: f64,
    /// Standard error of `β̂` from the regression slope.
    pub beta_se: f64,
    /// Fitted `log B′`.
    pub intercept: f64,
    pub intercept_se: f64,
    pub fit_r2: f64,
    /// `tv̂_{n+1} ≤ tv̂_n + 3·√(se_n² + se_{n+1}²)` for every `n`.
    pub monotone_ok: bool,
    pub drift: Vec<DriftCell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicityReport {
    pub delta: f64,
    pub n_max: usize,
    pub n_mc: usize,
    pub t_ref: f64,
    /// TV estimate between two independent invariant samples of size `n_mc`.
    pub noise_floor: f64,
    pub starts: Vec<StartReport>,
    /// `M = θ + (1/a)∫ξν(dξ)`.
    pub m_bound: f64,
    /// Smallest constant for which the empirical skeleton drift holds.
    pub m_hat: f64,
    /// Every drift cell satisfies `excess ≤ M + 4·se`.
    pub lyapunov_ok: bool,
    /// Pairwise `|β̂_i − β̂_j| ≤ 2·√(se_i² + se_j²)`.
    pub beta_agree: bool,
    /// Slope of the intercepts against `ln(x+1)`; the bound `B(x+1)β^n`
    /// allows at most 1.
    pub intercept_slope: Option<f64>,
}

impl ErgodicityReport {
    /// `β̂` pooled by inverse-variance weighting across starting points.
    pub fn beta_hat(&self) -> f64 {
        let (num, den) = self.starts.iter().fold((0.0, 0.0), |(num, den), s| {
            let w = 1.0 / s.beta_se.max(1e-300).powi(2);
            (num + w * s.beta_hat, den + w)
        });
        num / den
    }

    /// Smallest `R²` across starting points.
    pub fn fit_r2(&self) -> f64 {
        self.starts.iter().map(|s| s.fit_r2).fold(f64::INFINITY, f64::min)
    }

    pub fn monotone_ok(&self) -> bool {
        self.starts.iter().all(|s| s.monotone_ok)
    }
}

struct LinearFit {
    slope: f64,
    slope_se: f64,
    intercept: f64,
    intercept_se: f64,
    r2: f64,
}

fn least_squares(points: &[(f64, f64)]) -> LinearFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let s2 = if points.len() > 2 { sse / (n - 2.0) } else { 0.0 };
    LinearFit {
        slope,
        slope_se: (s2 / sxx).sqrt(),
        intercept,
        intercept_se: (s2 * (1.0 / n + mx * mx / sxx)).sqrt(),
        r2: if syy > 0.0 { 1.0 - sse / syy } else { 1.0 },
    }
}

/// Start of the fit: the first `n` at which `tv̂_n` has left the saturated
/// regime near 1.
const FIT_START_TV: f64 = 0.5;

/// Indices used in the log-linear fit: from the first `tv̂_n ≤ 0.5` up to the
/// last point before `tv̂_n < 3·se_n` or `tv̂_n < 3·floor`.
fn fit_range(series: &[(usize, f64, f64)], floor: f64) -> Option<(usize, usize)> {
    let start = series.iter().position(|&(_, tv, _)| tv <= FIT_START_TV)?;
    let mut end = None;
    for (i, &(_, tv, se)) in series.iter().enumerate().skip(start) {
        if tv < 3.0 * se || tv < 3.0 * floor {
            break;
        }
        end = Some(i);
    }
    end.map(|e| (start, e))
}

fn drift_cells(chains: &[Vec<f64>], n_max: usize, decay: f64) -> Vec<DriftCell> {
    const CELLS: usize = 10;
    let mut out = Vec::new();
    for n in 0..n_max {
        let mut pairs: Vec<(f64, f64)> = chains.iter().map(|c| (c[n], c[n + 1])).collect();
        pairs.sort_by(|l, r| l.0.total_cmp(&r.0));
        let size = pairs.len().div_ceil(CELLS);
        for cell in pairs.chunks(size) {
            if cell.len() < 2 {
                continue;
            }
            let excess: Vec<f64> = cell.iter().map(|&(now, next)| next - decay * now).collect();
            let (mean, se) = mean_se(&excess);
            out.push(DriftCell {
                n,
                state: cell.iter().map(|c| c.0).sum::<f64>() / cell.len() as f64,
                excess: mean,
                se,
            });
        }
    }
    out
}

/// Skeleton drift cells for one starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftReport {
    pub x: f64,
    pub delta: f64,
    pub m_bound: f64,
    /// Largest cell excess.
    pub m_hat: f64,
    pub cells: Vec<DriftCell>,
    /// Every cell satisfies `excess ≤ M + 4·se`.
    pub ok: bool,
}

fn skeleton_chains(
    x: f64,
    n_steps: usize,
    step: &MarginalSampler,
    n_chains: usize,
    factory: &StreamFactory,
) -> Result<Vec<Vec<f64>>> {
    sample_batch(factory, n_chains, |rng: &mut ChaCha8Rng| {
        let mut states = Vec::with_capacity(n_steps + 1);
        let mut current = x;
        states.push(current);
        for _ in 0..n_steps {
            current = step.sample(current, rng)?;
            states.push(current);
        }
        Ok(states)
    })
}

/// Runs `n_chains` skeleton chains from `x` and checks
/// `E[η_{n+1} | η_n] ≤ e^{−aδ}η_n + M` on equal-count bins of `η_n`.
pub fn skeleton_drift_check(
    x: f64,
    delta: f64,
    n_steps: usize,
    p: &JcirParams,
    n_chains: usize,
    factory: &StreamFactory,
) -> Result<DriftReport> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid("x", "initial state must be finite and >= 0"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", "skeleton spacing must be finite and > 0"));
    }
    if n_steps == 0 || n_chains < 20 {
        return Err(Error::invalid("n_chains", "need at least one step and 20 chains"));
    }
    let m_bound = drift_bound_constant(p)?;
    let step = MarginalSampler::new(delta, p, QUAD_TOL)?;
    let chains = skeleton_chains(x, n_steps, &step, n_chains, factory)?;
    let cells = drift_cells(&chains, n_steps, (-p.a() * delta).exp());
    let m_hat = cells.iter().map(|c| c.excess).fold(f64::NEG_INFINITY, f64::max);
    let ok = cells.iter().all(|c| c.excess <= m_bound + 4.0 * c.se);
    Ok(DriftReport {
        x,
        delta,
        m_bound,
        m_hat,
        cells,
        ok,
    })
}

/// Monte Carlo check of exponential ergodicity on the `δ`-skeleton.
///
/// The invariant law is approximated by exact draws of `X_{t_ref}^0` with
/// `t_ref = 4·n_max·δ`. For each starting point, `n_mc` skeleton chains give
/// `tv̂_n = TV(η_n, π̂)`, and `log tv̂_n` is fitted linearly in `n` over the
/// range chosen by the saturation and noise-floor rules.
pub fn ergodic_rate_fit(
    x_list: &[f64],
    delta: f64,
    n_max: usize,
    p: &JcirParams,
    n_mc: usize,
    factory: &StreamFactory,
) -> Result<ErgodicityReport> {
    if x_list.is_empty() {
        return Err(Error::invalid("x_list", "need at least one starting point"));
    }
    if x_list.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::invalid("x_list", "starting points must be finite and >= 0"));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::invalid("delta", "skeleton spacing must be finite and > 0"));
    }
    if n_max < 3 {
        return Err(Error::invalid("n_max", "need at least three skeleton steps"));
    }
    if n_mc < 100 {
        return Err(Error::invalid("n_mc", "need at least 100 chains"));
    }
    let report = check_admissible(p.nu(), QUAD_TOL)?;
    if !report.ergodic_ok {
        return Err(Error::Inadmissible(
            "ergodicity requires ∫_(0,1) ξ ln(1/ξ) ν(dξ) < ∞ and ∫_(1,∞) ξ ν(dξ) < ∞".to_string(),
        ));
    }
    let m_bound = drift_bound_constant(p)?;
    let decay = (-p.a() * delta).exp();
    let t_ref = 4.0 * n_max as f64 * delta;

    let reference = invariant_sample(p, t_ref, 2 * n_mc, &factory.derive("invariant"))?;
    let (pi_hat, pi_null) = reference.split_at(n_mc);
    let mut boot_rng = factory.derive("bootstrap").stream(0);
    let noise_floor = tv_distance(pi_hat, pi_null, &mut boot_rng)?.tv;

    let step = MarginalSampler::new(delta, p, QUAD_TOL)?;
    let mut starts = Vec::with_capacity(x_list.len());
    for (k, &x) in x_list.iter().enumerate() {
        let chains = skeleton_chains(x, n_max, &step, n_mc, &factory.derive(&format!("chains/{k}")))?;
        let mut tv_series = Vec::with_capacity(n_max + 1);
        let mut column = vec![0.0; n_mc];
        for n in 0..=n_max {
            for (slot, chain) in column.iter_mut().zip(&chains) {
                *slot = chain[n];
            }
            let est = tv_distance(&column, pi_hat, &mut boot_rng)?;
            tv_series.push((n, est.tv, est.se));
        }
        let monotone_ok = tv_series
            .windows(2)
            .all(|w| w[1].1 <= w[0].1 + 3.0 * w[0].2.hypot(w[1].2));
        let (lo, hi) = fit_range(&tv_series, noise_floor).ok_or_else(no_fit_range)?;
        if hi < lo + 2 {
            return Err(no_fit_range());
        }
        let points: Vec<(f64, f64)> = tv_series[lo..=hi]
            .iter()
            .map(|&(n, tv, _)| (n as f64, tv.ln()))
            .collect();
        let fit = least_squares(&points);
        let beta_hat = fit.slope.exp();
        starts.push(StartReport {
            x,
            fit_range: (tv_series[lo].0, tv_series[hi].0),
            beta_hat,
            beta_se: beta_hat * fit.slope_se,
            intercept: fit.intercept,
            intercept_se: fit.intercept_se,
            fit_r2: fit.r2,
            monotone_ok,
            drift: drift_cells(&chains, n_max, decay),
            tv_series,
        });
    }

    let worst = starts
        .iter()
        .flat_map(|s| &s.drift)
        .max_by(|l, r| l.excess.total_cmp(&r.excess))
        .copied();
    let m_hat = worst.map_or(f64::NEG_INFINITY, |c| c.excess);
    let lyapunov_ok = starts
        .iter()
        .flat_map(|s| &s.drift)
        .all(|c| c.excess <= m_bound + 4.0 * c.se);
    let beta_agree = starts.iter().enumerate().all(|(i, si)| {
        starts[i + 1..]
            .iter()
            .all(|sj| (si.beta_hat - sj.beta_hat).abs() <= 2.0 * si.beta_se.hypot(sj.beta_se))
    });
    let distinct = starts.iter().any(|s| s.x != starts[0].x);
    let intercept_slope = distinct.then(|| {
        let pts: Vec<(f64, f64)> = starts.iter().map(|s| ((s.x + 1.0).ln(), s.intercept)).collect();
        least_squares(&pts).slope
    });
    Ok(ErgodicityReport {
        delta,
        n_max,
        n_mc,
        t_ref,
        noise_floor,
        starts,
        m_bound,
        m_hat,
        lyapunov_ok,
        beta_agree,
        intercept_slope,
    })
}

fn no_fit_range() -> Error {
    Error::InsufficientData(
        "TV series reaches the Monte Carlo noise floor before three usable points; increase n_mc or reduce delta"
            .to_string(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpDensity, LevyDensity, LevyMeasure, PointMass};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_distr::Gamma;
    use statrs::distribution::{Continuous, Gamma as GammaDist};

    fn cir(a: f64, theta: f64, sigma: f64) -> JcirParams {
        JcirParams::new(a, theta, sigma, LevyMeasure::zero()).unwrap()
    }

    fn bajd() -> JcirParams {
        let nu = LevyMeasure::finite_activity(1.0, JumpDensity::Exponential { mean: 1.0 }).unwrap();
        JcirParams::new(1.0, 1.0, 2f64.sqrt(), nu).unwrap()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn lyapunov_hand_values() {
        let p = cir(1.0, 1.0, 1.0);
        let check = lyapunov_check(2.0, 2f64.ln(), &p, 100_000, &mut rng(1)).unwrap();
        assert!((check.analytic_mean - 1.5).abs() < 1e-14);
        assert!((check.bound - 2.0).abs() < 1e-14);
        assert!(check.ok, "{check:?}");

        let zero_start = lyapunov_check(0.0, 0.7, &p, 10_000, &mut rng(2)).unwrap();
        assert!(zero_start.analytic_mean <= p.theta());
        assert!(zero_start.analytic_mean <= zero_start.bound);
    }

    #[test]
    fn lyapunov_long_run_mean_is_jump_moment() {
        let nu = LevyMeasure::point_masses(vec![PointMass { size: 1.0, mass: 1.0 }]).unwrap();
        let p = JcirParams::new(1.0, 0.0, 1.0, nu).unwrap();
        let mean = analytic_mean(50.0, 0.0, &p).unwrap();
        assert!((mean - 1.0).abs() < 1e-12);
        assert!(mean <= drift_bound_constant(&p).unwrap());
        let check = lyapunov_check(3.0, 1.0, &bajd(), 100_000, &mut rng(3)).unwrap();
        assert!(check.ok, "{check:?}");
        assert!((drift_bound_constant(&bajd()).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn lyapunov_rejects_infinite_first_moment() {
        let stable = LevyDensity::TemperedStable {
            intensity: 1.0,
            alpha: 0.5,
            lambda: 0.0,
        };
        let p = JcirParams::new(1.0, 1.0, 1.0, LevyMeasure::infinite_activity(stable, 1e-6).unwrap()).unwrap();
        assert!(matches!(
            lyapunov_check(1.0, 1.0, &p, 10, &mut rng(4)),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn tv_trivial_cases() {
        let mut r = rng(5);
        let a: Vec<f64> = (0..10_000).map(|_| r.random::<f64>()).collect();
        let same = tv_distance(&a, &a, &mut r).unwrap();
        assert_eq!(same.tv, 0.0);
        let shifted: Vec<f64> = a.iter().map(|v| v + 5.0).collect();
        let apart = tv_distance(&a, &shifted, &mut r).unwrap();
        assert!((apart.tv - 1.0).abs() < 1e-12, "{apart:?}");
        assert!(tv_distance(&[], &a, &mut r).is_err());
        assert!(tv_distance(&[f64::NAN], &a, &mut r).is_err());
    }

    #[test]
    fn tv_matches_quadrature_on_gamma_pair() {
        let (shape_a, shape_b) = (2.0, 3.0);
        let mut r = rng(6);
        let ga = Gamma::new(shape_a, 1.0).unwrap();
        let gb = Gamma::new(shape_b, 1.0).unwrap();
        let a: Vec<f64> = (0..1_000_000).map(|_| ga.sample(&mut r)).collect();
        let b: Vec<f64> = (0..1_000_000).map(|_| gb.sample(&mut r)).collect();
        let est = tv_distance(&a, &b, &mut r).unwrap();

        // composite Simpson on ½|f − g|, with the crossing point as a node
        let fa = GammaDist::new(shape_a, 1.0).unwrap();
        let fb = GammaDist::new(shape_b, 1.0).unwrap();
        let h = |x: f64| 0.5 * (fa.pdf(x) - fb.pdf(x)).abs();
        let simpson = |lo: f64, hi: f64, n: usize| {
            let w = (hi - lo) / n as f64;
            let inner: f64 = (1..n)
                .map(|i| h(lo + i as f64 * w) * if i % 2 == 1 { 4.0 } else { 2.0 })
                .sum();
            (h(lo) + h(hi) + inner) * w / 3.0
        };
        // Gamma(2) and Gamma(3) densities cross at x = 2
        let exact = simpson(0.0, 2.0, 20_000) + simpson(2.0, 60.0, 200_000);
        assert!((est.tv - exact).abs() < 0.01, "{} vs {exact}", est.tv);
        assert!(est.se > 0.0 && est.se < 0.01);
    }

    #[test]
    fn tv_symmetry_and_triangle() {
        let mut r = rng(7);
        let draw = |shape: f64, r: &mut ChaCha8Rng| -> Vec<f64> {
            let g = Gamma::new(shape, 1.0).unwrap();
            (0..200_000).map(|_| g.sample(r)).collect()
        };
        let (a, b, c) = (draw(2.0, &mut r), draw(2.5, &mut r), draw(3.0, &mut r));
        let ab = tv_distance(&a, &b, &mut r).unwrap();
        let ba = tv_distance(&b, &a, &mut r).unwrap();
        assert_eq!(ab.tv, ba.tv);
        let bc = tv_distance(&b, &c, &mut r).unwrap();
        let ac = tv_distance(&a, &c, &mut r).unwrap();
        // separate pooled binnings: allow the sampling noise of three estimates
        let slack = 3.0 * (ab.se.powi(2) + bc.se.powi(2) + ac.se.powi(2)).sqrt();
        assert!(ac.tv <= ab.tv + bc.tv + slack, "{ac:?} {ab:?} {bc:?}");
    }

    #[test]
    fn invariant_sample_matches_invariant_cf() {
        let p = bajd();
        let factory = StreamFactory::new(8, "pi");
        let sample = invariant_sample(&p, 20.0, 200_000, &factory).unwrap();
        let freqs = [FrequencyPoint::imaginary(1.0), FrequencyPoint::imaginary(2.0)];
        for check in validate_invariant_sample(&sample, &p, &freqs).unwrap() {
            assert!(check.z_score() < 4.0, "{check:?}");
        }
        let (mean, se) = mean_se(&sample);
        assert!(
            (mean - drift_bound_constant(&p).unwrap()).abs() < 4.0 * se,
            "{mean} ± {se}"
        );

        let longer = invariant_sample(&p, 40.0, 200_000, &StreamFactory::new(9, "pi")).unwrap();
        for u in freqs {
            let first = mc_cf(&sample, u).unwrap();
            let second = mc_cf(&longer, u).unwrap();
            assert!((first.value - second.value).norm() < 4.0 * first.se().hypot(second.se()));
        }
    }

    #[test]
    fn invariant_sample_of_cir_is_gamma() {
        let p = cir(2.0, 0.5, 0.8);
        let sample = invariant_sample(&p, 15.0, 200_000, &StreamFactory::new(10, "pi")).unwrap();
        let (shape, scale) = (p.shape(), p.half_var_ratio());
        for v in [1.0, 2.0] {
            let u = FrequencyPoint::imaginary(v);
            let gamma_cf = (Complex64::new(1.0, 0.0) - Complex64::new(0.0, v * scale)).powf(-shape);
            let emp = mc_cf(&sample, u).unwrap();
            assert!((emp.value - gamma_cf).norm() < 4.0 * emp.se(), "{emp:?} vs {gamma_cf}");
        }
    }

    #[test]
    fn rate_fit_on_small_cir_run() {
        let p = cir(1.0, 1.0, 2f64.sqrt());
        let report = ergodic_rate_fit(&[0.0, 4.0], 0.25, 24, &p, 20_000, &StreamFactory::new(11, "erg")).unwrap();
        assert!(report.noise_floor > 0.0 && report.noise_floor < 0.1);
        assert!(report.lyapunov_ok && report.m_hat <= report.m_bound + 0.1);
        for s in &report.starts {
            assert!(s.tv_series.iter().all(|&(_, tv, _)| (0.0..=1.0).contains(&tv)));
            assert!(s.beta_hat > 0.0 && s.beta_hat < 1.0, "{s:?}");
            assert!(s.fit_r2 > 0.95, "{s:?}");
            assert!(s.monotone_ok);
            assert!(s.fit_range.1 >= s.fit_range.0 + 2);
        }
        let slope = report.intercept_slope.unwrap();
        assert!(slope > 0.0 && slope <= 1.0, "{slope}");
    }

    #[test]
    fn skeleton_drift_holds() {
        let report = skeleton_drift_check(6.0, 0.5, 6, &bajd(), 50_000, &StreamFactory::new(14, "drift")).unwrap();
        assert!(
            report.ok,
            "{:?}",
            report.cells.iter().max_by(|l, r| l.excess.total_cmp(&r.excess))
        );
        assert_eq!(report.cells.len(), 60);
        // the exact conditional excess is (θ + m1/a)(1 − e^{−aδ}) for every state
        let exact = 2.0 * -(-0.5f64).exp_m1();
        for c in &report.cells {
            assert!((c.excess - exact).abs() < 5.0 * c.se, "{c:?}");
        }
    }

    #[test]
    fn rate_fit_is_reproducible() {
        let p = bajd();
        let f = StreamFactory::new(12, "erg");
        let first = ergodic_rate_fit(&[4.0], 0.25, 16, &p, 20_000, &f).unwrap();
        let second = ergodic_rate_fit(&[4.0], 0.25, 16, &p, 20_000, &f).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn rate_fit_reports_noise_floor_and_bad_input() {
        let p = cir(1.0, 1.0, 2f64.sqrt());
        let f = StreamFactory::new(13, "erg");
        let coarse = ergodic_rate_fit(&[0.0], 4.0, 5, &p, 1_000, &f);
        assert!(matches!(coarse, Err(Error::InsufficientData(_))), "{coarse:?}");
        assert!(ergodic_rate_fit(&[], 0.5, 5, &p, 1_000, &f)
            .unwrap_err()
            .is_validation());
        assert!(ergodic_rate_fit(&[0.0], -1.0, 5, &p, 1_000, &f)
            .unwrap_err()
            .is_validation());
        let stable = LevyDensity::TemperedStable {
            intensity: 1.0,
            alpha: 0.5,
            lambda: 0.0,
        };
        let heavy = p.with_nu(LevyMeasure::infinite_activity(stable, 1e-6).unwrap());
        assert!(matches!(
            ergodic_rate_fit(&[0.0], 0.5, 5, &heavy, 1_000, &f),
            Err(Error::Inadmissible(_))
        ));
    }
}
