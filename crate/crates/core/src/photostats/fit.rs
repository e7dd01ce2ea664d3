//! Levenberg-Marquardt sinusoid fits.

use alloc::vec::Vec;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::ramsey::FringeScan;

pub const MAX_ITERATIONS: usize = 200;
pub const STEP_TOLERANCE: f64 = 1e-10;
/// Frequency grid searched for the starting point, relative to the hint.
pub const SEARCH_RANGE: (f64, f64) = (0.5, 1.5);
const SEARCH_POINTS: usize = 401;
/// Fitted frequencies further than this from the hint get a warning.
pub const FREQUENCY_WARNING: f64 = 0.1;

/// `y = offset + amplitude cos(frequency x + phase)` with `amplitude >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinusoidFit {
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    /// Wrapped to `(-pi, pi]`.
    pub phase: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    /// False when the iteration cap was hit first.
    pub converged: bool,
    /// Flat data: amplitude is zero and frequency is the hint.
    pub degenerate: bool,
}

/// Ramsey fringe fit `I(delta) = offset (1 + v cos(delta t_total + phase))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub offset: f64,
    pub amplitude: f64,
    /// Fringe frequency in detuning space, i.e. the fitted `t_total`, s.
    pub frequency: f64,
    pub phase: f64,
    /// `amplitude / offset`, clamped to `[0, 1]`.
    pub visibility: f64,
    pub residual_rms: f64,
    pub iterations: usize,
    pub converged: bool,
    pub degenerate: bool,
    /// Fitted `t_total` is more than 10% away from the hint.
    pub frequency_warning: bool,
}

pub fn fit_fringe(scan: &FringeScan, t_total_hint: f64) -> Result<FitResult> {
    if scan.points.len() < 8 {
        return Err(Error::InsufficientData("fringe fit needs at least 8 points"));
    }
    if !(t_total_hint.is_finite() && t_total_hint > 0.0) {
        return Err(Error::InvalidParameter { name: "t_total hint", value: t_total_hint });
    }
    let xs: Vec<f64> = scan.deltas().collect();
    let ys: Vec<f64> = scan.intensities().collect();
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
    if (hi - lo) * t_total_hint < 2.0 * core::f64::consts::PI {
        return Err(Error::InsufficientData("scan spans less than one fringe period"));
    }
    let fit = fit_sinusoid(&xs, &ys, t_total_hint)?;
    let visibility = if fit.offset > 0.0 { (fit.amplitude / fit.offset).clamp(0.0, 1.0) } else { 0.0 };
    Ok(FitResult {
        offset: fit.offset,
        amplitude: fit.amplitude,
        frequency: fit.frequency,
        phase: fit.phase,
        visibility,
        residual_rms: fit.residual_rms,
        iterations: fit.iterations,
        converged: fit.converged,
        degenerate: fit.degenerate,
        frequency_warning: ((fit.frequency - t_total_hint) / t_total_hint).abs() > FREQUENCY_WARNING,
    })
}

/// Least-squares sinusoid with the frequency searched around `freq_hint`.
pub fn fit_sinusoid(xs: &[f64], ys: &[f64], freq_hint: f64) -> Result<SinusoidFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidGrid("x and y lengths differ"));
    }
    if xs.len() < 4 {
        return Err(Error::InsufficientData("sinusoid fit needs at least 4 points"));
    }
    if !(freq_hint.is_finite() && freq_hint > 0.0) {
        return Err(Error::InvalidParameter { name: "frequency hint", value: freq_hint });
    }
    if let Some(&bad) = xs.iter().chain(ys).find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter { name: "data point", value: bad });
    }
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let y_scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    let spread = ys.iter().fold(0.0f64, |m, y| m.max((y - mean).abs()));
    if spread <= 1e-12 * y_scale || y_scale == 0.0 {
        return Ok(SinusoidFit {
            offset: mean,
            amplitude: 0.0,
            frequency: freq_hint,
            phase: 0.0,
            residual_rms: rms(ys.iter().map(|y| y - mean)),
            iterations: 0,
            converged: true,
            degenerate: true,
        });
    }

    // Work in u = x / x_scale so the frequency parameter is of order one.
    let x_scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let x_scale = if x_scale > 0.0 { x_scale } else { 1.0 };
    let us: Vec<f64> = xs.iter().map(|x| x / x_scale).collect();
    let g_hint = freq_hint * x_scale;

    let mut best: Option<(f64, [f64; 4])> = None;
    for k in 0..SEARCH_POINTS {
        let t = k as f64 / (SEARCH_POINTS - 1) as f64;
        let g = g_hint * (SEARCH_RANGE.0 + t * (SEARCH_RANGE.1 - SEARCH_RANGE.0));
        if let Some((o, c, s)) = linear_fit(&us, ys, g) {
            let q = [o, c, s, g];
            let e = sse(&us, ys, &q);
            if best.is_none_or(|(b, _)| e < b) {
                best = Some((e, q));
            }
        }
    }
    let (mut err, mut q) = best.ok_or(Error::InsufficientData("no frequency in the search range resolves the data"))?;

    let scales = [y_scale, y_scale, y_scale, g_hint];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(&us, ys, &q);
        let mut stepped = false;
        while lambda < 1e16 {
            let mut a = jtj;
            for i in 0..4 {
                a.0[i][i] += C64::new(lambda * jtj.0[i][i].re.max(1e-300), 0.0);
            }
            let Ok(delta) = a.solve(&jtr) else {
                lambda *= 10.0;
                continue;
            };
            let trial: [f64; 4] = core::array::from_fn(|i| q[i] + delta[i].re);
            let e = sse(&us, ys, &trial);
            if e <= err {
                let rel = (0..4).map(|i| delta[i].re.abs() / q[i].abs().max(scales[i])).fold(0.0, f64::max);
                q = trial;
                err = e;
                lambda = (lambda / 10.0).max(1e-12);
                stepped = true;
                if rel < STEP_TOLERANCE {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        // No downhill step at any damping: already at the minimum.
        if converged || !stepped {
            converged = true;
            break;
        }
    }

    let [o, c, s, g] = q;
    let mut amplitude = c.hypot(s);
    let mut phase = (-s).atan2(c);
    if amplitude == 0.0 {
        phase = 0.0;
        amplitude = 0.0;
    }
    Ok(SinusoidFit {
        offset: o,
        amplitude,
        frequency: g / x_scale,
        phase,
        residual_rms: (err / n).sqrt(),
        iterations,
        converged,
        degenerate: false,
    })
}

fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = residuals.fold((0.0, 0usize), |(s, k), r| (s + r * r, k + 1));
    (sum / count as f64).sqrt()
}

fn model(u: f64, q: &[f64; 4]) -> f64 {
    let (sin, cos) = (q[3] * u).sin_cos();
    q[0] + q[1] * cos + q[2] * sin
}

fn sse(us: &[f64], ys: &[f64], q: &[f64; 4]) -> f64 {
    us.iter().zip(ys).map(|(&u, &y)| (model(u, q) - y).powi(2)).sum()
}

/// Offset and quadratures at fixed frequency.
fn linear_fit(us: &[f64], ys: &[f64], g: f64) -> Option<(f64, f64, f64)> {
    let mut a = Matrix::<3>::zeros();
    let mut b = [C64::new(0.0, 0.0); 3];
    for (&u, &y) in us.iter().zip(ys) {
        let (sin, cos) = (g * u).sin_cos();
        let row = [1.0, cos, sin];
        for i in 0..3 {
            b[i] += row[i] * y;
            for j in 0..3 {
                a.0[i][j] += row[i] * row[j];
            }
        }
    }
    let w = a.solve(&b).ok()?;
    Some((w[0].re, w[1].re, w[2].re))
}

fn normal_equations(us: &[f64], ys: &[f64], q: &[f64; 4]) -> (Matrix<4>, [C64; 4]) {
    let mut jtj = Matrix::<4>::zeros();
    let mut jtr = [C64::new(0.0, 0.0); 4];
    for (&u, &y) in us.iter().zip(ys) {
        let (sin, cos) = (q[3] * u).sin_cos();
        let r = y - (q[0] + q[1] * cos + q[2] * sin);
        let row = [1.0, cos, sin, u * (q[2] * cos - q[1] * sin)];
        for i in 0..4 {
            jtr[i] += row[i] * r;
            for j in 0..4 {
                jtj.0[i][j] += row[i] * row[j];
            }
        }
    }
    (jtj, jtr)
}
