//! Adaptive Gauss-Kronrod quadrature for real and complex integrands, with
//! helpers for half-lines and for integrals against densities on `(0, ∞)`.

// Kronrod nodes and weights are kept at their published digits.
#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values that can be integrated: closed under addition and real scaling.
pub trait QuadValue: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(self) -> f64;
}

impl QuadValue for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Stopping rule for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Tolerance {
            abs: 0.0,
            rel,
            max_intervals: 2000,
        }
    }

    pub fn with_abs(mut self, abs: f64) -> Self {
        self.abs = abs;
        self
    }

    pub fn with_max_intervals(mut self, n: usize) -> Self {
        self.max_intervals = n;
        self
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::relative(1e-10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

struct Panel<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    // integral of |f|, used to bound round-off
    abs_value: f64,
}

impl<T> PartialEq for Panel<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Panel<T> {}
impl<T> PartialOrd for Panel<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Panel<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> Panel<T> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.magnitude() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        let pair = f1 + f2;
        kronrod = kronrod + pair * WGK[j];
        abs_sum += (f1.magnitude() + f2.magnitude()) * WGK[j];
        if j % 2 == 1 {
            gauss = gauss + pair * WG[j / 2];
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).magnitude();
    Panel {
        a,
        b,
        value,
        error,
        abs_value: abs_sum * half.abs(),
    }
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate is below `max(tol.abs, tol.rel·|I|)` or falls to the round-off
/// level of the integrand.
pub fn integrate<T, F>(f: F, a: f64, b: f64, tol: Tolerance, label: &str) -> Result<Estimate<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if a == b {
        return Ok(Estimate {
            value: T::default(),
            error: 0.0,
        });
    }
    let first = kronrod15(&f, a, b);
    let mut value = first.value;
    let mut error = first.error;
    let mut abs_value = first.abs_value;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let target = tol.abs.max(tol.rel * value.magnitude());
        let roundoff = 50.0 * f64::EPSILON * abs_value;
        if error <= target || error <= roundoff {
            return Ok(Estimate { value, error });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                integral: label.to_string(),
                error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a.min(worst.b) || mid >= worst.a.max(worst.b) {
            // interval no longer splittable in floating point
            return Err(Error::QuadratureNonConvergence {
                integral: label.to_string(),
                error,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        value = value - worst.value + left.value + right.value;
        error = error - worst.error + left.error + right.error;
        abs_value = abs_value - worst.abs_value + left.abs_value + right.abs_value;
        heap.push(left);
        heap.push(right);
    }
}

/// Outcome of an improper integral evaluated by cutoff doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Improper<T> {
    Finite(Estimate<T>),
    Divergent,
}

impl<T> Improper<T> {
    pub fn finite(self) -> Option<Estimate<T>> {
        match self {
            Improper::Finite(e) => Some(e),
            Improper::Divergent => None,
        }
    }
}

/// Controls for cutoff doubling on half-lines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfLineRule {
    pub tol: Tolerance,
    /// Partial integrals beyond this magnitude are declared divergent.
    pub ceiling: f64,
    /// Consecutive non-shrinking, non-negligible pieces that signal divergence.
    pub growth_run: usize,
    pub max_doublings: usize,
}

impl HalfLineRule {
    pub fn new(tol: Tolerance) -> Self {
        HalfLineRule {
            tol,
            ceiling: 1e15,
            growth_run: 5,
            max_doublings: 64,
        }
    }
}

/// Integrates `f` over `[start, ∞)` (`direction > 0`) or `(-∞, start]`
/// (`direction < 0`) by successive doublings of the cutoff distance,
/// starting with a piece of length `first_width`.
///
/// Converges once two consecutive pieces are negligible against the partial
/// sum. Declares divergence when the partial sum passes `rule.ceiling`, or
/// when `rule.growth_run` consecutive pieces are both non-negligible and
/// no smaller than their predecessor.
pub fn integrate_half_line<T, F>(
    f: F,
    start: f64,
    first_width: f64,
    direction: f64,
    rule: HalfLineRule,
    label: &str,
) -> Result<Improper<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let sign = direction.signum();
    let mut total = T::default();
    let mut error = 0.0;
    let mut inner = 0.0;
    let mut outer = first_width;
    let mut previous_piece = f64::NAN;
    let mut negligible_run = 0;
    let mut growth_run = 0;
    let piece_tol = Tolerance {
        abs: rule.tol.abs,
        rel: rule.tol.rel * 0.1,
        max_intervals: rule.tol.max_intervals,
    };
    for _ in 0..rule.max_doublings {
        let (a, b) = (start + sign * inner, start + sign * outer);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let piece = integrate(&f, lo, hi, piece_tol, label)?;
        total = total + piece.value;
        error += piece.error;
        let size = piece.value.magnitude();
        let scale = total.magnitude();
        if !scale.is_finite() || scale > rule.ceiling {
            return Ok(Improper::Divergent);
        }
        let negligible = size <= rule.tol.rel * scale + rule.tol.abs;
        if negligible {
            negligible_run += 1;
            growth_run = 0;
            if negligible_run >= 2 {
                return Ok(Improper::Finite(Estimate { value: total, error }));
            }
        } else {
            negligible_run = 0;
            if previous_piece.is_finite() && size >= previous_piece {
                growth_run += 1;
                if growth_run >= rule.growth_run {
                    return Ok(Improper::Divergent);
                }
            } else {
                growth_run = 0;
            }
        }
        previous_piece = size;
        inner = outer;
        outer *= 2.0;
    }
    Err(Error::QuadratureNonConvergence {
        integral: label.to_string(),
        error,
    })
}

/// Integrates `g(ξ)` over `(0, ∞)` in the log variable `ξ = e^w`, splitting
/// at `ξ = 1` and using `scale` (a typical magnitude of the integrand's
/// support) to size the first pieces on either side.
pub fn integrate_positive_axis<T, F>(g: F, scale: f64, rule: HalfLineRule, label: &str) -> Result<Improper<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let lower = integrate_below_one(&g, scale, rule, label)?;
    let upper = integrate_above_one(&g, scale, rule, label)?;
    Ok(match (lower, upper) {
        (Improper::Finite(l), Improper::Finite(u)) => Improper::Finite(Estimate {
            value: l.value + u.value,
            error: l.error + u.error,
        }),
        _ => Improper::Divergent,
    })
}

/// `∫_(0,1] g(ξ) dξ` in the log variable.
pub fn integrate_below_one<T, F>(g: F, scale: f64, rule: HalfLineRule, label: &str) -> Result<Improper<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let width = (3.0 - scale.ln().min(0.0)).max(1.0);
    integrate_half_line(
        |w: f64| {
            let xi = w.exp();
            if xi == 0.0 {
                T::default()
            } else {
                g(xi) * xi
            }
        },
        0.0,
        width,
        -1.0,
        rule,
        label,
    )
}

/// `∫_[1,∞) g(ξ) dξ` in the log variable.
pub fn integrate_above_one<T, F>(g: F, scale: f64, rule: HalfLineRule, label: &str) -> Result<Improper<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    let width = (3.0 + scale.ln().max(0.0)).max(1.0);
    integrate_half_line(
        |w: f64| {
            let xi = w.exp();
            if !xi.is_finite() {
                T::default()
            } else {
                g(xi) * xi
            }
        },
        0.0,
        width,
        1.0,
        rule,
        label,
    )
}
