use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{ComplexSignal, Error, Result};

/// Peak-interpolation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakConfig {
    /// Upsampling factor of the spline grid; 1 returns the coarse peak.
    pub factor: usize,
    /// Coarse samples on each side of the peak used as spline nodes.
    pub half_window: usize,
    /// Polish the best grid point by golden-section search on the spline.
    pub refine: bool,
}

impl Default for PeakConfig {
    fn default() -> Self {
        Self { factor: 8, half_window: 8, refine: true }
    }
}

impl PeakConfig {
    pub fn with_factor(factor: usize) -> Self {
        Self { factor, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakEstimate {
    /// s.
    pub delay_s: f64,
    pub peak_magnitude: f64,
    /// Index of the coarse maximum in the correlation.
    pub coarse_index: usize,
}

/// Natural cubic spline through `(i, y[i])`, `i = 0..n`.
struct NaturalSpline {
    y: Vec<Complex64>,
    m: Vec<Complex64>,
}

impl NaturalSpline {
    fn new(y: &[Complex64]) -> Self {
        let n = y.len();
        let mut m = vec![Complex64::new(0.0, 0.0); n];
        if n >= 3 {
            // Thomas solve of m[i-1] + 4 m[i] + m[i+1] = 6 Δ²y[i], m[0] = m[n-1] = 0.
            let k = n - 2;
            let mut c = vec![0.0; k];
            let mut d = vec![Complex64::new(0.0, 0.0); k];
            for i in 0..k {
                let rhs = (y[i] - y[i + 1] * 2.0 + y[i + 2]) * 6.0;
                if i == 0 {
                    c[0] = 1.0 / 4.0;
                    d[0] = rhs / 4.0;
                } else {
                    let w = 4.0 - c[i - 1];
                    c[i] = 1.0 / w;
                    d[i] = (rhs - d[i - 1]) / w;
                }
            }
            for i in (0..k).rev() {
                let next = if i + 1 < k { m[i + 2] } else { Complex64::new(0.0, 0.0) };
                m[i + 1] = d[i] - next * c[i];
            }
        }
        Self { y: y.to_vec(), m }
    }

    fn eval(&self, x: f64) -> Complex64 {
        let n = self.y.len();
        if n == 1 {
            return self.y[0];
        }
        let i = (x.floor().max(0.0) as usize).min(n - 2);
        let b = x - i as f64;
        let a = 1.0 - b;
        self.y[i] * a + self.y[i + 1] * b + (self.m[i] * (a * a * a - a) + self.m[i + 1] * (b * b * b - b)) / 6.0
    }
}

/// Index of the largest magnitude, ties going to the smaller `|lag|`.
fn coarse_peak(mags: &[f64], lag_of: impl Fn(usize) -> f64) -> Result<usize> {
    let top = mags.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let bottom = mags.iter().copied().fold(f64::INFINITY, f64::min);
    if !(top > 0.0) || top == bottom {
        return Err(Error::NoPeak);
    }
    let tol = top * 1e-12;
    let mut best: Option<usize> = None;
    for (i, &v) in mags.iter().enumerate() {
        if v >= top - tol {
            best = match best {
                Some(b) if lag_of(b).abs() <= lag_of(i).abs() => Some(b),
                _ => Some(i),
            };
        }
    }
    best.ok_or(Error::NoPeak)
}

/// Sub-sample peak of a correlation.
///
/// A natural cubic spline is fitted separately to the real and imaginary
/// parts over `±half_window` coarse samples around the magnitude maximum.
/// Its magnitude is scanned on a grid `factor` times finer than the input,
/// within one coarse sample of the maximum, and the best grid point is
/// optionally polished within one fine step.
/// Interpolating I/Q rather than `|y|` keeps the fit smooth near the top
/// of a modulated lobe, where `|y|` has a kink-like curvature.
pub fn interpolate_peak(correlation: &ComplexSignal, config: PeakConfig) -> Result<PeakEstimate> {
    if config.factor == 0 {
        return Err(Error::Domain("interpolation factor must be at least 1".into()));
    }
    let mags = correlation.magnitudes();
    let k0 = coarse_peak(&mags, |i| correlation.time(i))?;
    if config.factor == 1 {
        return Ok(PeakEstimate { delay_s: correlation.time(k0), peak_magnitude: mags[k0], coarse_index: k0 });
    }
    let lo = k0.saturating_sub(config.half_window);
    let hi = (k0 + config.half_window).min(correlation.len() - 1);
    let spline = NaturalSpline::new(&correlation.samples[lo..=hi]);
    let mag = |x: f64| spline.eval(x).norm();

    let step = 1.0 / config.factor as f64;
    let centre = (k0 - lo) as f64;
    // The search stays within one coarse sample of the coarse peak: the
    // wider node window only conditions the fit, and scanning it all could
    // hop to a neighbouring lobe of nearly equal height.
    let first = (centre - 1.0).max(0.0);
    let last = (centre + 1.0).min((hi - lo) as f64);
    let points = ((last - first) * config.factor as f64).round() as usize;
    let mut best = (centre, mag(centre));
    for j in 0..=points {
        let x = first + j as f64 * step;
        let v = mag(x);
        // Strictly better, or equal and closer to lag zero.
        let closer = (correlation.time(lo) + x / correlation.sample_rate).abs()
            < (correlation.time(lo) + best.0 / correlation.sample_rate).abs();
        if v > best.1 || (v == best.1 && closer) {
            best = (x, v);
        }
    }
    if config.refine {
        let (a, b) = ((best.0 - step).max(first), (best.0 + step).min(last));
        let x = golden_max(&mag, a, b, 1e-6 * step);
        let v = mag(x);
        if v >= best.1 {
            best = (x, v);
        }
    }
    Ok(PeakEstimate {
        delay_s: correlation.time(lo) + best.0 / correlation.sample_rate,
        peak_magnitude: best.1,
        coarse_index: k0,
    })
}

/// Golden-section maximization of a unimodal function on `[a, b]`.
fn golden_max(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}
