//! Modified Bessel function of the first kind in overflow-safe split form.

/// Arguments at or below this value use the power series from `k = 0`.
pub const R_SWITCH: f64 = 50.0;

/// A positive number stored as `mantissa · e^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scaled {
    pub mantissa: f64,
    pub exponent: f64,
}

impl Scaled {
    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.exponent.exp()
        }
    }

    pub fn ln(self) -> f64 {
        self.mantissa.ln() + self.exponent
    }
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// `I_q(r)` for order `q > -1` and `r ≥ 0`.
///
/// Series for `r ≤ R_SWITCH`; above it the large-argument asymptotic
/// expansion, or, when that expansion cannot reach full precision (order
/// large against the argument), the series summed outward from its largest
/// term.
pub fn bessel_iq(q: f64, r: f64) -> Scaled {
    debug_assert!(q > -1.0 && r >= 0.0);
    if r == 0.0 {
        let mantissa = if q == 0.0 {
            1.0
        } else if q > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        return Scaled {
            mantissa,
            exponent: 0.0,
        };
    }
    if r <= R_SWITCH {
        return bessel_iq_series(q, r);
    }
    bessel_iq_asymptotic(q, r).unwrap_or_else(|| bessel_iq_peak_series(q, r))
}

/// Power series `Σ (r/2)^{2k+q} / (k! Γ(k+q+1))` summed from `k = 0`.
pub fn bessel_iq_series(q: f64, r: f64) -> Scaled {
    let z = 0.25 * r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= z / (k * (k + q));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    Scaled {
        mantissa: sum,
        exponent: q * (0.5 * r).ln() - ln_gamma(q + 1.0),
    }
}

/// Large-argument expansion `e^r/√(2πr) Σ (-1)^k a_k(q) / r^k`.
///
/// Returns `None` when the terms start growing before they reach double
/// precision.
pub fn bessel_iq_asymptotic(q: f64, r: f64) -> Option<Scaled> {
    let mu = 4.0 * q * q;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 1.0;
    loop {
        let odd = 2.0 * k - 1.0;
        let next = -term * (mu - odd * odd) / (8.0 * k * r);
        if next.abs() >= term.abs() && next != 0.0 {
            return None;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
        k += 1.0;
        if k > 500.0 {
            return None;
        }
    }
    Some(Scaled {
        mantissa: sum / (2.0 * std::f64::consts::PI * r).sqrt(),
        exponent: r,
    })
}

/// Power series summed outward from its peak term, in log scale.
pub fn bessel_iq_peak_series(q: f64, r: f64) -> Scaled {
    let z = 0.25 * r * r;
    let peak = ((-q + (q * q + r * r).sqrt()) / 2.0).floor().max(0.0);
    let ln_peak = (2.0 * peak + q) * (0.5 * r).ln() - ln_gamma(peak + 1.0) - ln_gamma(peak + q + 1.0);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = peak;
    loop {
        term *= z / ((k + 1.0) * (k + 1.0 + q));
        sum += term;
        k += 1.0;
        if term < 1e-17 * sum {
            break;
        }
    }
    term = 1.0;
    k = peak;
    while k >= 1.0 {
        term *= k * (k + q) / z;
        sum += term;
        k -= 1.0;
        if term < 1e-17 * sum {
            break;
        }
    }
    Scaled {
        mantissa: sum,
        exponent: ln_peak,
    }
}
