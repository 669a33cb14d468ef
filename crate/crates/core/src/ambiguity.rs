//! Delay-Doppler ambiguity functions.
//!
//! The sampled surface discretizes
//!
//! ```text
//! AF(t, f_D) = ∫ s(τ) s*(τ − t) e^{j2π f_D τ} dτ
//! ```
//!
//! by Doppler-modulating the signal and FFT-correlating it with itself.
//! The closed forms for PTTW, SFW and TTSFW cover a single pulse overlap
//! (`|t| ≤ T`) and return 0 beyond it. Every surface is normalized by its
//! own value at `(0, 0)`, which is the global maximum of `|AF|`.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::waveforms::{WaveformFamily, WaveformSpec};
use crate::{ComplexSignal, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurfaceSource {
    Analytic,
    Numeric,
}

/// `|AF|` on a delay-Doppler grid. `magnitude[i][j]` belongs to
/// `doppler_axis[i]` and `delay_axis[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguitySurface {
    /// s.
    pub delay_axis: Vec<f64>,
    /// Hz.
    pub doppler_axis: Vec<f64>,
    pub magnitude: Vec<Vec<f64>>,
    pub source: SurfaceSource,
}

impl AmbiguitySurface {
    /// Largest value and its `(doppler_index, delay_index)`.
    pub fn peak(&self) -> (f64, usize, usize) {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (i, row) in self.magnitude.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        best
    }

    /// Row nearest `f_D = 0`.
    pub fn zero_doppler_cut(&self) -> &[f64] {
        let i = nearest_index(&self.doppler_axis, 0.0);
        &self.magnitude[i]
    }

    /// Largest pointwise difference against a surface on the same grid.
    pub fn max_abs_deviation(&self, other: &AmbiguitySurface) -> Result<f64> {
        if self.delay_axis.len() != other.delay_axis.len() {
            return Err(Error::LengthMismatch(self.delay_axis.len(), other.delay_axis.len()));
        }
        if self.doppler_axis.len() != other.doppler_axis.len() {
            return Err(Error::LengthMismatch(self.doppler_axis.len(), other.doppler_axis.len()));
        }
        Ok(self
            .magnitude
            .iter()
            .zip(&other.magnitude)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max))
    }

    /// Long-form CSV: `delay_s,doppler_hz,magnitude`, Doppler-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "delay_s,doppler_hz,magnitude")?;
        for (fd, row) in self.doppler_axis.iter().zip(&self.magnitude) {
            for (t, m) in self.delay_axis.iter().zip(row) {
                writeln!(w, "{t:.16e},{fd:.16e},{m:.16e}")?;
            }
        }
        Ok(())
    }
}

fn nearest_index(axis: &[f64], x: f64) -> usize {
    axis.iter().enumerate().min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs())).map(|(i, _)| i).unwrap_or(0)
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![(lo + hi) / 2.0],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Symmetric delay axis on exact sample lags: `k·stride/fs` for
/// `k ∈ [-half, half]`.
pub fn aligned_delay_axis(half: usize, stride: usize, sample_rate: f64) -> Vec<f64> {
    let half = half as i64;
    (-half..=half).map(|k| (k * stride as i64) as f64 / sample_rate).collect()
}

/// Default grid: delay `±2/δf` (or `±4/Δf` without stepping) clipped to
/// the pulse, Doppler `±2/T`, 201 points each.
pub fn default_grid(spec: &WaveformSpec) -> (Vec<f64>, Vec<f64>) {
    let span = if spec.delta_f_step > 0.0 && spec.num_pulses > 1 {
        2.0 / spec.delta_f_step
    } else {
        4.0 / spec.pulse_bandwidth().abs().max(f64::MIN_POSITIVE)
    };
    let span = span.min(spec.pulse_duration);
    let doppler = 2.0 / spec.pulse_duration;
    (linspace(-span, span, 201), linspace(-doppler, doppler, 201))
}

/// Sampled ambiguity surface. Delays are snapped to the nearest sample lag
/// and the returned `delay_axis` holds the snapped values.
pub fn ambiguity_numeric(signal: &ComplexSignal, delay_axis: &[f64], doppler_axis: &[f64]) -> Result<AmbiguitySurface> {
    if delay_axis.is_empty() || doppler_axis.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = signal.len();
    let fs = signal.sample_rate;
    let norm = signal.sum_sq();
    if n == 0 || !(norm > 0.0) {
        return Err(Error::Domain("ambiguity of a zero-energy signal".into()));
    }
    let lags: Vec<i64> = delay_axis.iter().map(|t| (t * fs).round() as i64).collect();
    if let Some(&bad) = lags.iter().find(|l| l.unsigned_abs() as usize >= n) {
        return Err(Error::Domain(format!("delay of {bad} samples exceeds the {n}-sample signal")));
    }
    let m = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let mut spec_conj = signal.samples.clone();
    spec_conj.resize(m, Complex64::new(0.0, 0.0));
    fwd.process(&mut spec_conj);
    for v in &mut spec_conj {
        *v = v.conj();
    }
    let ctx = RowContext { signal, spec_conj: &spec_conj, fwd, inv, lags: &lags, scale: 1.0 / (m as f64 * norm) };
    let magnitude = map_rows(doppler_axis, |fd| ctx.row(fd));
    Ok(AmbiguitySurface {
        delay_axis: lags.iter().map(|&l| l as f64 / fs).collect(),
        doppler_axis: doppler_axis.to_vec(),
        magnitude,
        source: SurfaceSource::Numeric,
    })
}

struct RowContext<'a> {
    signal: &'a ComplexSignal,
    spec_conj: &'a [Complex64],
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    lags: &'a [i64],
    scale: f64,
}

impl RowContext<'_> {
    fn row(&self, doppler: f64) -> Vec<f64> {
        let m = self.spec_conj.len();
        let fs = self.signal.sample_rate;
        let mut buf: Vec<Complex64> = self
            .signal
            .samples
            .iter()
            .enumerate()
            .map(|(k, s)| s * Complex64::cis(2.0 * PI * doppler * k as f64 / fs))
            .collect();
        buf.resize(m, Complex64::new(0.0, 0.0));
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(self.spec_conj) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        self.lags
            .iter()
            .map(|&l| {
                let idx = if l >= 0 { l as usize } else { (m as i64 + l) as usize };
                buf[idx].norm() * self.scale
            })
            .collect()
    }
}

#[cfg(feature = "parallel")]
fn map_rows<F: Fn(f64) -> Vec<f64> + Sync>(axis: &[f64], f: F) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    axis.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_rows<F: Fn(f64) -> Vec<f64>>(axis: &[f64], f: F) -> Vec<Vec<f64>> {
    axis.iter().map(|&x| f(x)).collect()
}

/// `sin(x)/x`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Dirichlet kernel `sin(πNx) / (N sin(πx))`, continuous at integer `x`.
pub fn dirichlet(x: f64, n: usize) -> f64 {
    let nf = n as f64;
    let den = (PI * x).sin();
    if den.abs() < 1e-12 {
        (PI * nf * x).cos() / (PI * x).cos()
    } else {
        (PI * nf * x).sin() / (nf * den)
    }
}

/// Coherent pulse-train factor `(1/N)·Σ_n e^{j2π(σ(n)·δf·t + y·n·T_r)}`.
/// For the identity order its magnitude is `|D(δf·t + y·T_r)|`.
fn train_factor(spec: &WaveformSpec, t: f64, y: f64) -> Complex64 {
    let identity = spec.step_order.iter().enumerate().all(|(i, &s)| i == s);
    if identity {
        return Complex64::new(dirichlet(spec.delta_f_step * t + y * spec.pulse_repetition, spec.num_pulses), 0.0);
    }
    let n = spec.num_pulses as f64;
    spec.step_order
        .iter()
        .enumerate()
        .map(|(slot, &step)| {
            Complex64::cis(2.0 * PI * (step as f64 * spec.delta_f_step * t + y * slot as f64 * spec.pulse_repetition))
        })
        .sum::<Complex64>()
        / n
}

/// Two-tone pulse AF at `(t, f_D)`, unnormalized: co-frequency and both
/// cross-frequency terms, each with its own train factor.
fn two_tone_af(spec: &WaveformSpec, t: f64, fd: f64) -> f64 {
    let big_t = spec.pulse_duration;
    if t.abs() > big_t {
        return 0.0;
    }
    let w = big_t - t.abs();
    let df = spec.pulse_bandwidth();
    let co = (Complex64::cis(2.0 * PI * spec.f1 * t) + Complex64::cis(2.0 * PI * spec.f2 * t))
        * sinc(PI * fd * w)
        * train_factor(spec, t, fd);
    let cross = Complex64::cis(PI * (spec.f1 + spec.f2) * t)
        * (sinc(PI * (fd + df) * w) * train_factor(spec, t, fd + df)
            + sinc(PI * (fd - df) * w) * train_factor(spec, t, fd - df));
    w * (co + cross).norm()
}

fn expect(spec: &WaveformSpec, family: WaveformFamily) -> Result<()> {
    spec.validate()?;
    if spec.family != family {
        return Err(Error::InvalidSpec(format!("expected {family:?}, got {:?}", spec.family)));
    }
    Ok(())
}

/// Closed-form PTTW `|AF|`, normalized to 1 at the origin.
pub fn ambiguity_pttw_analytic(t: f64, fd: f64, spec: &WaveformSpec) -> Result<f64> {
    expect(spec, WaveformFamily::Pttw)?;
    Ok(two_tone_af(spec, t, fd) / two_tone_af(spec, 0.0, 0.0))
}

/// Closed-form SFW `|AF|`: single-tone pulse envelope times the Dirichlet
/// train factor, normalized to 1 at the origin.
pub fn ambiguity_sfw_analytic(t: f64, fd: f64, spec: &WaveformSpec) -> Result<f64> {
    expect(spec, WaveformFamily::Sfw)?;
    let big_t = spec.pulse_duration;
    if t.abs() > big_t {
        return Ok(0.0);
    }
    let w = big_t - t.abs();
    Ok(w * sinc(PI * fd * w).abs() * train_factor(spec, t, fd).norm() / big_t)
}

/// Closed-form TTSFW `|AF|`, normalized to 1 at the origin.
pub fn ambiguity_ttsfw_analytic(t: f64, fd: f64, spec: &WaveformSpec) -> Result<f64> {
    expect(spec, WaveformFamily::Ttsfw)?;
    Ok(two_tone_af(spec, t, fd) / two_tone_af(spec, 0.0, 0.0))
}

/// Closed-form surface for the spec's family on the given grid.
pub fn ambiguity_analytic(spec: &WaveformSpec, delay_axis: &[f64], doppler_axis: &[f64]) -> Result<AmbiguitySurface> {
    if delay_axis.is_empty() || doppler_axis.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let f = match spec.family {
        WaveformFamily::Pttw => ambiguity_pttw_analytic,
        WaveformFamily::Sfw => ambiguity_sfw_analytic,
        WaveformFamily::Ttsfw => ambiguity_ttsfw_analytic,
        WaveformFamily::Lfm => {
            return Err(Error::InvalidSpec("no closed-form ambiguity for LFM".into()));
        }
    };
    f(0.0, 0.0, spec)?;
    let magnitude = map_rows(doppler_axis, |fd| delay_axis.iter().map(|&t| f(t, fd, spec).unwrap_or(0.0)).collect());
    Ok(AmbiguitySurface {
        delay_axis: delay_axis.to_vec(),
        doppler_axis: doppler_axis.to_vec(),
        magnitude,
        source: SurfaceSource::Analytic,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LobeStatus {
    Retained,
    Notched,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeEntry {
    pub index: usize,
    /// s.
    pub delay: f64,
    pub status: LobeStatus,
    /// Zero-Doppler analytic `|AF|` at `delay`, normalized.
    pub magnitude: f64,
}

/// Classifies the PTTW lobe positions `k/Δf`, `0 ≤ k/Δf < T`, of a TTSFW:
/// lobes with `k mod N = 0` survive, the rest fall on Dirichlet nulls.
pub fn notch_report(spec: &WaveformSpec) -> Result<Vec<LobeEntry>> {
    expect(spec, WaveformFamily::Ttsfw)?;
    let df = spec.pulse_bandwidth();
    let count = (df * spec.pulse_duration).ceil() as usize;
    (0..count)
        .map(|k| k as f64 / df)
        .enumerate()
        .filter(|(_, t)| *t < spec.pulse_duration)
        .map(|(k, t)| {
            Ok(LobeEntry {
                index: k,
                delay: t,
                status: if k % spec.num_pulses == 0 { LobeStatus::Retained } else { LobeStatus::Notched },
                magnitude: ambiguity_ttsfw_analytic(t, 0.0, spec)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveforms::generate;

    #[test]
    fn dirichlet_limits() {
        assert!((dirichlet(0.0, 4) - 1.0).abs() < 1e-15);
        assert!((dirichlet(1.0, 4) + 1.0).abs() < 1e-12);
        assert!((dirichlet(1.0, 3) - 1.0).abs() < 1e-12);
        for k in 1..4 {
            assert!(dirichlet(k as f64 / 4.0, 4).abs() < 1e-15);
        }
        assert_eq!(dirichlet(0.37, 1), 1.0);
    }

    #[test]
    fn pttw_peak_and_lobes() {
        let spec = WaveformSpec::pttw(-2e6, 2e6, 50e-6);
        assert!((ambiguity_pttw_analytic(0.0, 0.0, &spec).unwrap() - 1.0).abs() < 1e-15);
        for n in 1..4 {
            let lobe = ambiguity_pttw_analytic(n as f64 / 4e6, 0.0, &spec).unwrap();
            let null = ambiguity_pttw_analytic((n as f64 + 0.5) / 4e6, 0.0, &spec).unwrap();
            let w = 1.0 - n as f64 / 4e6 / 50e-6;
            assert!((lobe - w).abs() < 0.01, "{lobe}");
            assert!(null < 0.05, "{null}");
        }
        assert_eq!(ambiguity_pttw_analytic(51e-6, 0.0, &spec).unwrap(), 0.0);
    }

    #[test]
    fn sfw_lobes_and_nulls() {
        let spec = WaveformSpec::sfw(0.0, 1e6, 4, 10e-6);
        let n = ambiguity_sfw_analytic(1.0 / 4e6, 0.0, &spec).unwrap();
        assert!(n < 1e-12);
        let lobe = ambiguity_sfw_analytic(1.0 / 1e6, 0.0, &spec).unwrap();
        assert!((lobe - 0.9).abs() < 1e-9);
        let single = WaveformSpec::sfw(0.0, 1e6, 1, 10e-6);
        let a = ambiguity_sfw_analytic(2e-6, 3e4, &single).unwrap();
        let w = 8e-6;
        assert!((a - w * sinc(PI * 3e4 * w).abs() / 10e-6).abs() < 1e-15);
    }

    #[test]
    fn ttsfw_single_pulse_equals_pttw() {
        let tt = WaveformSpec::ttsfw(-2e6, 2e6, 5e5, 1, 20e-6);
        let pt = WaveformSpec::pttw(-2e6, 2e6, 20e-6);
        for &(t, fd) in &[(0.0, 0.0), (1e-7, 1e4), (-3.3e-6, -7e4), (19e-6, 2e5)] {
            let a = ambiguity_ttsfw_analytic(t, fd, &tt).unwrap();
            let b = ambiguity_pttw_analytic(t, fd, &pt).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn ttsfw_two_pulse_notches_alternate_lobes() {
        let (step, pulse) = (2e6, 4e6);
        let spec = WaveformSpec::ttsfw_centered(pulse, step, 2, 25e-6);
        let notched = ambiguity_ttsfw_analytic(0.25e-6, 0.0, &spec).unwrap();
        let kept = ambiguity_ttsfw_analytic(0.5e-6, 0.0, &spec).unwrap();
        assert!(notched < 0.01, "{notched}");
        assert!(kept > 0.9, "{kept}");
    }

    #[test]
    fn notch_report_patterns() {
        let spec = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 250e-6);
        let rep = notch_report(&spec).unwrap();
        let first: Vec<LobeStatus> = rep.iter().take(5).map(|e| e.status).collect();
        use LobeStatus::*;
        assert_eq!(first, vec![Retained, Notched, Notched, Notched, Retained]);
        assert!((rep[1].delay - 0.25e-6).abs() < 1e-18);
        for e in &rep {
            if e.status == Notched {
                assert!(e.magnitude < 0.1);
            }
        }
        let one = WaveformSpec::ttsfw(-2e6, 2e6, 0.0, 1, 5e-6);
        assert!(notch_report(&one).unwrap().iter().all(|e| e.status == Retained));
        let two = WaveformSpec::ttsfw_centered(4e6, 2e6, 2, 5e-6);
        let st: Vec<_> = notch_report(&two).unwrap().iter().take(4).map(|e| e.status).collect();
        assert_eq!(st, vec![Retained, Notched, Retained, Notched]);
    }

    #[test]
    fn analytic_symmetry() {
        let spec = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 20e-6);
        for &(t, fd) in &[(1.3e-7, 2e4), (2.1e-6, -9e4), (7e-6, 5e3)] {
            let a = ambiguity_ttsfw_analytic(t, fd, &spec).unwrap();
            let b = ambiguity_ttsfw_analytic(-t, -fd, &spec).unwrap();
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn numeric_peak_is_one_at_origin() {
        let spec = WaveformSpec::ttsfw_centered(4e6, 1e6, 2, 8e-6);
        let sig = generate(&spec, 24e6).unwrap();
        let delays = aligned_delay_axis(20, 1, 24e6);
        let dopplers = linspace(-1e5, 1e5, 11);
        let s = ambiguity_numeric(&sig, &delays, &dopplers).unwrap();
        let (v, i, j) = s.peak();
        assert!((v - 1.0).abs() < 1e-12);
        assert_eq!((i, j), (5, 20));
    }

    #[test]
    fn numeric_snaps_delays_and_rejects_empty() {
        let spec = WaveformSpec::pttw(-2e6, 2e6, 4e-6);
        let sig = generate(&spec, 25e6).unwrap();
        let s = ambiguity_numeric(&sig, &[0.0, 1.01e-7], &[0.0]).unwrap();
        // 1.01e-7 s is 2.525 samples, snapped to 3
        assert!((s.delay_axis[1] - 3.0 / 25e6).abs() < 1e-20);
        assert!(matches!(ambiguity_numeric(&sig, &[], &[0.0]), Err(Error::EmptyGrid)));
        assert!(ambiguity_numeric(&sig, &[1.0], &[0.0]).is_err());
    }

    #[test]
    fn lfm_has_no_closed_form() {
        let spec = WaveformSpec::lfm(4e6, 10e-6);
        assert!(ambiguity_analytic(&spec, &[0.0], &[0.0]).is_err());
    }
}
