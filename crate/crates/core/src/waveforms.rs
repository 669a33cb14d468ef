//! Ranging waveform synthesis.
//!
//! Every family is built from rectangular pulses carrying one or two
//! complex tones. Tones are evaluated against absolute time (`e^{j2πft}`
//! with `t` measured from the first sample), so phase runs coherently
//! across pulse boundaries instead of restarting in each pulse.
//!
//! Pulse `n` of an `N`-pulse train occupies `[n·T_r, n·T_r + T)` and
//! carries frequency step `step_order[n]`, i.e. its tones are shifted by
//! `step_order[n]·δf`. Amplitudes are scaled by `1/√N` so total energy does
//! not depend on the pulse count.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bounds::scalability_params;
use crate::{ComplexSignal, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum WaveformFamily {
    Pttw,
    Sfw,
    Ttsfw,
    Lfm,
}

impl std::str::FromStr for WaveformFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pttw" => Ok(Self::Pttw),
            "sfw" => Ok(Self::Sfw),
            "ttsfw" => Ok(Self::Ttsfw),
            "lfm" => Ok(Self::Lfm),
            other => Err(Error::Parse(format!("unknown waveform family {other:?}"))),
        }
    }
}

/// Parametric description of one ranging waveform.
///
/// Frequencies are complex-baseband offsets in Hz; times are in seconds.
/// For [`WaveformFamily::Sfw`] only `f1` is used as the carrier of step 0.
/// For [`WaveformFamily::Lfm`] the chirp sweeps `f1 → f2` over one pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveformSpec {
    pub family: WaveformFamily,
    pub f1: f64,
    pub f2: f64,
    pub delta_f_step: f64,
    pub num_pulses: usize,
    pub pulse_duration: f64,
    pub pulse_repetition: f64,
    pub step_order: Vec<usize>,
    pub amplitude_norm: f64,
}

impl WaveformSpec {
    fn base(
        family: WaveformFamily,
        f1: f64,
        f2: f64,
        delta_f_step: f64,
        num_pulses: usize,
        pulse_duration: f64,
    ) -> Self {
        Self {
            family,
            f1,
            f2,
            delta_f_step,
            num_pulses,
            pulse_duration,
            pulse_repetition: 2.0 * pulse_duration,
            step_order: (0..num_pulses).collect(),
            amplitude_norm: 1.0 / (num_pulses.max(1) as f64).sqrt(),
        }
    }

    /// Single rectangular pulse carrying tones `f1` and `f2`.
    pub fn pttw(f1: f64, f2: f64, pulse_duration: f64) -> Self {
        Self::base(WaveformFamily::Pttw, f1, f2, 0.0, 1, pulse_duration)
    }

    /// `N` single-tone pulses stepped by `delta_f_step` from `carrier`.
    pub fn sfw(carrier: f64, delta_f_step: f64, num_pulses: usize, pulse_duration: f64) -> Self {
        Self::base(WaveformFamily::Sfw, carrier, carrier, delta_f_step, num_pulses, pulse_duration)
    }

    pub fn ttsfw(f1: f64, f2: f64, delta_f_step: f64, num_pulses: usize, pulse_duration: f64) -> Self {
        Self::base(WaveformFamily::Ttsfw, f1, f2, delta_f_step, num_pulses, pulse_duration)
    }

    /// TTSFW whose full tone set is centred on 0 Hz.
    pub fn ttsfw_centered(delta_f_pulse: f64, delta_f_step: f64, num_pulses: usize, pulse_duration: f64) -> Self {
        let span = delta_f_pulse + (num_pulses.max(1) - 1) as f64 * delta_f_step;
        let f1 = -span / 2.0;
        Self::ttsfw(f1, f1 + delta_f_pulse, delta_f_step, num_pulses, pulse_duration)
    }

    /// Centred TTSFW filling `total_bw` with `δf = BW/(2N−1)` and `Δf = N·δf`.
    pub fn ttsfw_scaled(total_bw: f64, num_pulses: usize, pulse_duration: f64) -> Self {
        let (step, pulse_bw) = scalability_params(total_bw, num_pulses.max(1));
        Self::ttsfw_centered(pulse_bw, step, num_pulses, pulse_duration)
    }

    /// Linear chirp over `[-bw/2, bw/2]`.
    pub fn lfm(bandwidth: f64, pulse_duration: f64) -> Self {
        Self::base(WaveformFamily::Lfm, -bandwidth / 2.0, bandwidth / 2.0, 0.0, 1, pulse_duration)
    }

    pub fn with_step_order(mut self, order: Vec<usize>) -> Self {
        self.step_order = order;
        self
    }

    /// Sets `T_r = T / duty`.
    pub fn with_duty_cycle(mut self, duty: f64) -> Self {
        self.pulse_repetition = self.pulse_duration / duty;
        self
    }

    pub fn with_pulse_repetition(mut self, t_r: f64) -> Self {
        self.pulse_repetition = t_r;
        self
    }

    /// Per-pulse tone separation Δf = f2 − f1.
    pub fn pulse_bandwidth(&self) -> f64 {
        self.f2 - self.f1
    }

    pub fn total_duration(&self) -> f64 {
        self.num_pulses as f64 * self.pulse_repetition
    }

    /// Sum of pulse on-times.
    pub fn integration_time(&self) -> f64 {
        self.num_pulses as f64 * self.pulse_duration
    }

    /// Tone offsets of step 0, before stepping.
    fn base_tones(&self) -> Vec<f64> {
        match self.family {
            WaveformFamily::Sfw => vec![self.f1],
            WaveformFamily::Lfm => vec![self.f1, self.f2],
            WaveformFamily::Pttw | WaveformFamily::Ttsfw => vec![self.f1, self.f2],
        }
    }

    /// Every distinct tone the waveform transmits, ascending.
    pub fn tone_set(&self) -> Vec<f64> {
        let mut tones: Vec<f64> = (0..self.num_pulses)
            .flat_map(|step| self.base_tones().into_iter().map(move |f| f + step as f64 * self.delta_f_step))
            .collect();
        tones.sort_by(|a, b| a.partial_cmp(b).unwrap());
        tones.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        tones
    }

    pub fn max_abs_tone(&self) -> f64 {
        self.tone_set().into_iter().fold(0.0, |m, f| m.max(f.abs()))
    }

    /// Checks the parameter invariants that do not depend on a sample rate.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        let finite = [self.f1, self.f2, self.delta_f_step, self.pulse_duration, self.pulse_repetition];
        if finite.iter().any(|v| !v.is_finite()) {
            return bad("non-finite parameter".into());
        }
        if self.num_pulses == 0 {
            return bad("num_pulses must be at least 1".into());
        }
        if self.family != WaveformFamily::Sfw && self.f2 <= self.f1 {
            return bad(format!("pulse bandwidth f2 - f1 = {} Hz must be positive", self.f2 - self.f1));
        }
        if !(self.pulse_duration > 0.0) {
            return bad("pulse_duration must be positive".into());
        }
        if self.pulse_repetition < self.pulse_duration {
            return bad("pulse_repetition must be at least pulse_duration".into());
        }
        if matches!(self.family, WaveformFamily::Pttw | WaveformFamily::Lfm)
            && (self.num_pulses != 1 || self.delta_f_step != 0.0)
        {
            return bad(format!("{:?} must have one pulse and no frequency step", self.family));
        }
        check_permutation(&self.step_order, self.num_pulses)?;
        let expected = 1.0 / (self.num_pulses as f64).sqrt();
        if (self.amplitude_norm - expected).abs() > 1e-12 {
            return bad(format!("amplitude_norm must be 1/sqrt(N) = {expected}"));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus sampling constraints at `sample_rate`.
    pub fn validate_for(&self, sample_rate: f64) -> Result<()> {
        self.validate()?;
        if !(sample_rate > 0.0) {
            return Err(Error::InvalidSpec("sample_rate must be positive".into()));
        }
        let nyquist = sample_rate / 2.0;
        let top = self.max_abs_tone();
        if top > nyquist * (1.0 + 1e-12) {
            return Err(Error::Aliasing { tone_hz: top, nyquist_hz: nyquist });
        }
        if self.pulse_duration * sample_rate < 2.0 {
            return Err(Error::DegenerateSignal(format!(
                "pulse of {} s spans fewer than two samples at {} Hz",
                self.pulse_duration, sample_rate
            )));
        }
        Ok(())
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidSpec(format!("step_order has {} entries, expected {n}", order.len())));
    }
    let mut seen = vec![false; n];
    for &s in order {
        if s >= n || seen[s] {
            return Err(Error::InvalidSpec(format!("step_order {order:?} is not a permutation of 0..{n}")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Gated multi-tone synthesis shared by the PTTW, SFW and TTSFW families.
fn synthesize(spec: &WaveformSpec, sample_rate: f64) -> ComplexSignal {
    let total = (spec.total_duration() * sample_rate).round() as usize;
    let pulse_len = (spec.pulse_duration * sample_rate).round() as usize;
    let tones = spec.base_tones();
    let mut samples = vec![Complex64::new(0.0, 0.0); total];
    for (slot, &step) in spec.step_order.iter().enumerate() {
        let start = (slot as f64 * spec.pulse_repetition * sample_rate).round() as usize;
        let shift = step as f64 * spec.delta_f_step;
        let end = (start + pulse_len).min(total);
        for (k, out) in samples.iter_mut().enumerate().take(end).skip(start) {
            let t = k as f64 / sample_rate;
            let mut acc = Complex64::new(0.0, 0.0);
            for &f in &tones {
                acc += Complex64::cis(2.0 * PI * (f + shift) * t);
            }
            *out = acc * spec.amplitude_norm;
        }
    }
    ComplexSignal::new(samples, sample_rate, 0.0)
}

fn expect_family(spec: &WaveformSpec, family: WaveformFamily) -> Result<()> {
    if spec.family != family {
        return Err(Error::InvalidSpec(format!("expected a {family:?} spec, got {:?}", spec.family)));
    }
    Ok(())
}

/// `rect(t/T)·(e^{j2πf₁t} + e^{j2πf₂t})` sampled on `[0, T_r)`.
pub fn generate_pttw(spec: &WaveformSpec, sample_rate: f64) -> Result<ComplexSignal> {
    expect_family(spec, WaveformFamily::Pttw)?;
    spec.validate_for(sample_rate)?;
    Ok(synthesize(spec, sample_rate))
}

pub fn generate_sfw(spec: &WaveformSpec, sample_rate: f64) -> Result<ComplexSignal> {
    expect_family(spec, WaveformFamily::Sfw)?;
    spec.validate_for(sample_rate)?;
    Ok(synthesize(spec, sample_rate))
}

pub fn generate_ttsfw(spec: &WaveformSpec, sample_rate: f64) -> Result<ComplexSignal> {
    expect_family(spec, WaveformFamily::Ttsfw)?;
    spec.validate_for(sample_rate)?;
    Ok(synthesize(spec, sample_rate))
}

/// Constant-amplitude chirp sweeping `[-bandwidth/2, bandwidth/2]` over
/// `duration`.
pub fn generate_lfm(bandwidth: f64, duration: f64, sample_rate: f64) -> Result<ComplexSignal> {
    if !(bandwidth >= 0.0) || !bandwidth.is_finite() {
        return Err(Error::InvalidSpec("bandwidth must be non-negative".into()));
    }
    if bandwidth > sample_rate {
        return Err(Error::Aliasing { tone_hz: bandwidth / 2.0, nyquist_hz: sample_rate / 2.0 });
    }
    if !(duration > 0.0) || duration * sample_rate < 2.0 {
        return Err(Error::DegenerateSignal(format!("chirp of {duration} s spans fewer than two samples")));
    }
    Ok(chirp(-bandwidth / 2.0, bandwidth / 2.0, duration, duration, sample_rate))
}

fn chirp(f_start: f64, f_stop: f64, duration: f64, total: f64, sample_rate: f64) -> ComplexSignal {
    let n_total = (total * sample_rate).round() as usize;
    let n_on = ((duration * sample_rate).round() as usize).min(n_total);
    let rate = (f_stop - f_start) / duration;
    let mut samples = vec![Complex64::new(0.0, 0.0); n_total];
    for (k, s) in samples.iter_mut().enumerate().take(n_on) {
        let t = k as f64 / sample_rate;
        *s = Complex64::cis(2.0 * PI * (f_start * t + 0.5 * rate * t * t));
    }
    ComplexSignal::new(samples, sample_rate, 0.0)
}

/// Dispatches on `spec.family`.
pub fn generate(spec: &WaveformSpec, sample_rate: f64) -> Result<ComplexSignal> {
    match spec.family {
        WaveformFamily::Pttw => generate_pttw(spec, sample_rate),
        WaveformFamily::Sfw => generate_sfw(spec, sample_rate),
        WaveformFamily::Ttsfw => generate_ttsfw(spec, sample_rate),
        WaveformFamily::Lfm => {
            spec.validate_for(sample_rate)?;
            Ok(chirp(spec.f1, spec.f2, spec.pulse_duration, spec.total_duration(), sample_rate))
        }
    }
}

/// Step order assigned to node pair `pair_index` sharing an `N`-pulse tone
/// set.
///
/// Pair 0 steps up, pair 1 steps down, and pairs 2.. use the identity order
/// cyclically shifted by the pair index. Reversal is orientation-reversing,
/// so for `N ≥ 3` it never coincides with a cyclic shift and all `N` orders
/// are distinct.
pub fn step_order_for_pair(num_pulses: usize, pair_index: usize) -> Result<Vec<usize>> {
    if pair_index >= num_pulses {
        return Err(Error::CapacityExceeded {
            requested: pair_index + 1,
            available: num_pulses,
            detail: format!("an {num_pulses}-pulse waveform supports {num_pulses} step orders"),
        });
    }
    Ok(match pair_index {
        0 => (0..num_pulses).collect(),
        1 => (0..num_pulses).rev().collect(),
        k => (0..num_pulses).map(|n| (n + k) % num_pulses).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    const FS: f64 = 25e6;

    fn spectrum(sig: &ComplexSignal, pad: usize) -> Vec<f64> {
        let n = sig.len() * pad;
        let mut buf = sig.samples.clone();
        buf.resize(n, Complex64::new(0.0, 0.0));
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        buf.iter().map(|c| c.norm()).collect()
    }

    fn bin_freq(k: usize, n: usize, fs: f64) -> f64 {
        let f = k as f64 * fs / n as f64;
        if f >= fs / 2.0 {
            f - fs
        } else {
            f
        }
    }

    /// Local maxima above `frac` of the global maximum.
    fn spectral_peaks(sig: &ComplexSignal, frac: f64) -> Vec<f64> {
        let mag = spectrum(sig, 4);
        let n = mag.len();
        let top = mag.iter().cloned().fold(0.0, f64::max);
        let mut peaks = Vec::new();
        for k in 0..n {
            let (l, r) = (mag[(k + n - 1) % n], mag[(k + 1) % n]);
            if mag[k] > frac * top && mag[k] >= l && mag[k] > r {
                peaks.push(bin_freq(k, n, sig.sample_rate));
            }
        }
        peaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        peaks
    }

    #[test]
    fn pttw_has_two_spectral_peaks() {
        let spec = WaveformSpec::pttw(1e6, 5e6, 1e-3);
        let sig = generate_pttw(&spec, FS).unwrap();
        let peaks = spectral_peaks(&sig, 0.5);
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        assert!((peaks[0] - 1e6).abs() < 100.0);
        assert!((peaks[1] - 5e6).abs() < 100.0);
    }

    #[test]
    fn pttw_peak_main_lobe_is_two_over_t() {
        // The DFT of the on-time alone: first nulls of each sinc at ±1/T.
        let t = 1e-3;
        let spec = WaveformSpec::pttw(1e6, 5e6, t).with_pulse_repetition(t);
        let sig = generate_pttw(&spec, FS).unwrap();
        let pad = 8;
        let mag = spectrum(&sig, pad);
        let n = mag.len();
        let bin_hz = FS / n as f64;
        let k0 = (1e6 / bin_hz).round() as usize;
        // walk right from the peak until the first local minimum
        let mut k = k0;
        while mag[k + 1] < mag[k] {
            k += 1;
        }
        let null_offset = (k - k0) as f64 * bin_hz;
        assert!((null_offset - 1.0 / t).abs() <= bin_hz, "{null_offset}");
    }

    #[test]
    fn zero_outside_pulse_support() {
        let spec = WaveformSpec::ttsfw(-2e6, 2e6, 1e6, 3, 40e-6);
        let sig = generate_ttsfw(&spec, FS).unwrap();
        let pulse = (40e-6 * FS).round() as usize;
        for (k, s) in sig.samples.iter().enumerate() {
            let in_slot = (k % (2 * pulse)) < pulse;
            if !in_slot {
                assert_eq!(*s, Complex64::new(0.0, 0.0), "sample {k}");
            }
        }
    }

    #[test]
    fn equal_tones_rejected() {
        let spec = WaveformSpec::pttw(1e6, 1e6, 1e-3);
        assert!(matches!(generate_pttw(&spec, FS), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn aliasing_and_degenerate_errors() {
        let spec = WaveformSpec::pttw(1e6, 13e6, 1e-3);
        assert!(matches!(generate_pttw(&spec, FS), Err(Error::Aliasing { .. })));
        let spec = WaveformSpec::pttw(1e6, 2e6, 1.0 / FS);
        assert!(matches!(generate_pttw(&spec, FS), Err(Error::DegenerateSignal(_))));
        // the stepped top tone counts too
        let spec = WaveformSpec::ttsfw(8e6, 10e6, 1e6, 4, 1e-4);
        assert!(matches!(generate_ttsfw(&spec, FS), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn wrong_family_rejected() {
        let spec = WaveformSpec::pttw(1e6, 2e6, 1e-4);
        assert!(generate_ttsfw(&spec, FS).is_err());
    }

    #[test]
    fn sfw_staircase_of_ascending_tones() {
        let t = 100e-6;
        let spec = WaveformSpec::sfw(1e6, 1e6, 4, t);
        let sig = generate_sfw(&spec, FS).unwrap();
        let pulse = (t * FS).round() as usize;
        for slot in 0..4 {
            let start = slot * 2 * pulse;
            let seg = ComplexSignal::new(sig.samples[start..start + pulse].to_vec(), FS, 0.0);
            let peaks = spectral_peaks(&seg, 0.5);
            assert_eq!(peaks.len(), 1);
            let expected = 1e6 + slot as f64 * 1e6;
            assert!((peaks[0] - expected).abs() < 2e3, "slot {slot}: {peaks:?}");
        }
    }

    #[test]
    fn sfw_single_pulse_ignores_step() {
        let a = generate_sfw(&WaveformSpec::sfw(1e6, 0.0, 1, 50e-6), FS).unwrap();
        let b = generate_sfw(&WaveformSpec::sfw(1e6, 3e6, 1, 50e-6), FS).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sfw_reversed_order_same_energy_and_slots() {
        let t = 20e-6;
        let up = WaveformSpec::sfw(1e6, 1e6, 4, t);
        let down = up.clone().with_step_order(vec![3, 2, 1, 0]);
        let a = generate_sfw(&up, FS).unwrap();
        let b = generate_sfw(&down, FS).unwrap();
        // energy by direct summation over both orders
        let ea: f64 = a.samples.iter().map(|s| s.norm_sqr()).sum();
        let eb: f64 = b.samples.iter().map(|s| s.norm_sqr()).sum();
        assert!((ea - eb).abs() < 1e-9 * ea);
        // per-slot magnitudes identical (unit-modulus tones)
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert!((x.norm() - y.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn ttsfw_single_pulse_is_pttw() {
        let p = WaveformSpec::pttw(-2e6, 2e6, 100e-6);
        let t = WaveformSpec::ttsfw(-2e6, 2e6, 1e6, 1, 100e-6);
        assert_eq!(generate_pttw(&p, FS).unwrap(), generate_ttsfw(&t, FS).unwrap());
    }

    #[test]
    fn ttsfw_two_pulse_tone_set() {
        let (f1, f2, step) = (-2e6, 2e6, 1e6);
        let spec = WaveformSpec::ttsfw(f1, f2, step, 2, 200e-6).with_pulse_repetition(200e-6);
        let sig = generate_ttsfw(&spec, FS).unwrap();
        let peaks = spectral_peaks(&sig, 0.3);
        let expected = [f1, f1 + step, f2, f2 + step];
        assert_eq!(peaks.len(), 4, "{peaks:?}");
        for (p, e) in peaks.iter().zip(expected) {
            assert!((p - e).abs() < 1e3, "{p} vs {e}");
        }
    }

    #[test]
    fn four_pulse_layout() {
        let spec = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 250e-6);
        spec.validate_for(FS).unwrap();
        assert_eq!(spec.total_duration(), 2e-3);
        let sig = generate_ttsfw(&spec, FS).unwrap();
        assert_eq!(sig.len(), 50_000);
        assert_eq!(spec.tone_set().len(), 8);
        assert!((spec.max_abs_tone() - 3.5e6).abs() < 1e-6);
    }

    #[test]
    fn ttsfw_is_sum_of_two_sfw() {
        let (f1, f2, step, n, t) = (-3e6, 1e6, 0.5e6, 4, 30e-6);
        let order = vec![2, 0, 3, 1];
        let tt = WaveformSpec::ttsfw(f1, f2, step, n, t).with_step_order(order.clone());
        let s1 = WaveformSpec::sfw(f1, step, n, t).with_step_order(order.clone());
        let s2 = WaveformSpec::sfw(f2, step, n, t).with_step_order(order);
        let a = generate_ttsfw(&tt, FS).unwrap();
        let b = generate_sfw(&s1, FS).unwrap();
        let c = generate_sfw(&s2, FS).unwrap();
        for k in 0..a.len() {
            assert!((a.samples[k] - (b.samples[k] + c.samples[k])).norm() < 1e-12);
        }
    }

    #[test]
    fn energy_independent_of_pulse_count() {
        let energies: Vec<f64> = [1usize, 2, 4, 5, 8]
            .iter()
            .map(|&n| {
                let spec = WaveformSpec::ttsfw_scaled(4e6, n, 100e-6);
                generate_ttsfw(&spec, FS).unwrap().energy()
            })
            .collect();
        for e in &energies {
            assert!((e - energies[0]).abs() < 1e-3 * energies[0], "{energies:?}");
        }
    }

    #[test]
    fn lfm_chirp_rate() {
        let sig = generate_lfm(4e6, 1e-3, FS).unwrap();
        // instantaneous frequency from phase differences at two instants
        let inst = |k: usize| (sig.samples[k + 1] * sig.samples[k].conj()).arg() * FS / (2.0 * PI);
        let (k1, k2) = (5_000, 20_000);
        let slope = (inst(k2) - inst(k1)) / ((k2 - k1) as f64 / FS);
        assert!((slope - 4e9).abs() < 1e6, "{slope}");
        for s in &sig.samples {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lfm_zero_bandwidth_is_tone() {
        let sig = generate_lfm(0.0, 1e-4, FS).unwrap();
        assert!(sig.samples.iter().all(|s| (*s - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        assert!(generate_lfm(30e6, 1e-4, FS).is_err());
    }

    #[test]
    fn step_orders() {
        assert_eq!(step_order_for_pair(4, 0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(step_order_for_pair(4, 1).unwrap(), vec![3, 2, 1, 0]);
        assert_eq!(step_order_for_pair(2, 1).unwrap(), vec![1, 0]);
        assert!(matches!(step_order_for_pair(4, 4), Err(Error::CapacityExceeded { .. })));
        for n in 1..10 {
            let orders: Vec<_> = (0..n).map(|p| step_order_for_pair(n, p).unwrap()).collect();
            for (i, a) in orders.iter().enumerate() {
                check_permutation(a, n).unwrap();
                for b in &orders[i + 1..] {
                    assert_ne!(a, b, "N={n}");
                }
            }
        }
    }

    #[test]
    fn spec_json_round_trip_and_unknown_fields() {
        let spec = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 250e-6).with_step_order(vec![3, 2, 1, 0]);
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"family\":\"TTSFW\""));
        let back: WaveformSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let bad = text.replacen('{', "{\"bogus\":1,", 1);
        assert!(serde_json::from_str::<WaveformSpec>(&bad).is_err());
    }

    #[test]
    fn invalid_permutation_rejected() {
        let spec = WaveformSpec::ttsfw(0.0, 1e6, 1e5, 3, 1e-4).with_step_order(vec![0, 0, 1]);
        assert!(spec.validate().is_err());
        let spec = WaveformSpec::ttsfw(0.0, 1e6, 1e5, 3, 1e-4).with_step_order(vec![0, 1]);
        assert!(spec.validate().is_err());
    }
}
