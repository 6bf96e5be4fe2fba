//! Dormand-Prince 5(4) integrator with adaptive step control, for small
//! complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(t, y)` from `0` to `t_end`, controlling the local
/// error per component to `atol + rtol·|y|`. A step whose stages are not
/// finite is rejected and retried with a smaller `h`.
pub fn dopri5<const N: usize, F>(f: F, y0: [Complex64; N], t_end: f64, rtol: f64, atol: f64) -> Result<[Complex64; N]>
where
    F: Fn(f64, &[Complex64; N]) -> Result<[Complex64; N]>,
{
    if t_end == 0.0 {
        return Ok(y0);
    }
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (t_end * 1e-3).max(1e-8).min(t_end);
    let h_min = 1e-14 * t_end.max(1.0);
    let mut k = [[Complex64::new(0.0, 0.0); N]; 7];
    k[0] = f(t, &y)?;
    while t < t_end {
        if t + h > t_end {
            h = t_end - t;
        }
        for s in 1..7 {
            let mut ys = y;
            for (i, yi) in ys.iter_mut().enumerate() {
                for j in 0..s {
                    *yi += k[j][i] * (h * A[s][j]);
                }
            }
            k[s] = f(t + C[s] * h, &ys)?;
        }
        let mut y5 = y;
        let mut err = 0.0_f64;
        for i in 0..N {
            let mut e = Complex64::new(0.0, 0.0);
            for s in 0..7 {
                y5[i] += k[s][i] * (h * B5[s]);
                e += k[s][i] * (h * (B5[s] - B4[s]));
            }
            let scale = atol + rtol * y[i].norm().max(y5[i].norm());
            let ratio = e.norm() / scale;
            // f64::max drops NaN, which would accept a non-finite step
            if !(ratio <= err) {
                err = ratio;
            }
        }
        if err <= 1.0 {
            t += h;
            y = y5;
            // first-same-as-last: stage 7 was evaluated at the accepted point
            k[0] = k[6];
        }
        let factor = if !err.is_finite() {
            0.2
        } else if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min && t < t_end {
            return Err(Error::StepSizeUnderflow { t });
        }
    }
    Ok(y)
}
