use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{ComplexSignal, Error, LinkType, Result};

/// Taps of the fractional-delay interpolator.
pub const DELAY_TAPS: usize = 64;
const KAISER_BETA: f64 = 8.6;

fn default_reference_range() -> f64 {
    1.0
}

/// One propagation link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkModel {
    /// m.
    pub true_range: f64,
    /// 4 for a passive reflector (round trip, `2r/c`), 2 for one leg to or
    /// from an active node (`r/c`).
    pub path_loss_exponent: u8,
    /// dB.
    #[serde(default)]
    pub retransmit_gain: f64,
    /// During-pulse SNR at the receiver input, dB. `None` adds no noise.
    pub snr_pre_db: Option<f64>,
    #[serde(default)]
    pub doppler_hz: f64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Range at which path loss is 0 dB, m. Closer ranges are not amplified.
    #[serde(default = "default_reference_range")]
    pub reference_range: f64,
    /// Static latency added to the propagation delay, s.
    #[serde(default)]
    pub fixed_delay_s: f64,
}

impl LinkModel {
    pub fn new(true_range: f64, path_loss_exponent: u8, snr_pre_db: Option<f64>) -> Self {
        Self {
            true_range,
            path_loss_exponent,
            retransmit_gain: 0.0,
            snr_pre_db,
            doppler_hz: 0.0,
            rng_seed: 0,
            reference_range: default_reference_range(),
            fixed_delay_s: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.true_range >= 0.0) || !self.true_range.is_finite() {
            return Err(Error::Domain("true_range must be finite and non-negative".into()));
        }
        if !matches!(self.path_loss_exponent, 2 | 4) {
            return Err(Error::Domain(format!("path_loss_exponent must be 2 or 4, got {}", self.path_loss_exponent)));
        }
        if !(self.reference_range > 0.0) {
            return Err(Error::Domain("reference_range must be positive".into()));
        }
        Ok(())
    }

    pub fn link_type(&self) -> LinkType {
        if self.path_loss_exponent == 4 {
            LinkType::TwoWay
        } else {
            LinkType::OneWay
        }
    }

    pub fn delay_s(&self) -> f64 {
        self.link_type().range_to_delay(self.true_range) + self.fixed_delay_s
    }

    /// Voltage gain: `(r_ref/r)^(n/2)·10^(G/20)`.
    pub fn amplitude(&self) -> f64 {
        path_amplitude(self.true_range, self.reference_range, self.path_loss_exponent)
            * db_to_amplitude(self.retransmit_gain)
    }

    pub fn to_channel(&self) -> Channel {
        Channel { delay_s: self.delay_s(), amplitude: self.amplitude(), doppler_hz: self.doppler_hz }
    }
}

pub fn path_amplitude(range: f64, reference_range: f64, exponent: u8) -> f64 {
    (reference_range / range.max(reference_range)).powf(exponent as f64 / 2.0)
}

pub fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

pub fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Deterministic part of a propagation path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    /// s.
    pub delay_s: f64,
    pub amplitude: f64,
    /// Hz.
    pub doppler_hz: f64,
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..64 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Kaiser-windowed sinc taps `h[j] = g(j − μ)`, `j = −31..=32`.
fn fractional_taps(mu: f64) -> [f64; DELAY_TAPS] {
    let half = (DELAY_TAPS / 2) as f64;
    let norm = bessel_i0(KAISER_BETA);
    let mut taps = [0.0; DELAY_TAPS];
    for (i, tap) in taps.iter_mut().enumerate() {
        let u = i as f64 - (half - 1.0) - mu;
        let r = u / half;
        if r.abs() >= 1.0 {
            continue;
        }
        let sinc = if u.abs() < 1e-12 { 1.0 } else { (PI * u).sin() / (PI * u) };
        *tap = sinc * bessel_i0(KAISER_BETA * (1.0 - r * r).sqrt()) / norm;
    }
    taps
}

/// Delays, scales and Doppler-shifts `signal` onto a `buffer_len`-sample
/// grid starting at `signal.t0`. Integer delays are exact copies;
/// fractional parts use a 64-tap Kaiser-windowed sinc.
pub fn apply_channel(signal: &ComplexSignal, channel: &Channel, buffer_len: usize) -> Result<ComplexSignal> {
    let fs = signal.sample_rate;
    let d = channel.delay_s * fs;
    if !(d >= 0.0) || !d.is_finite() {
        return Err(Error::Domain(format!("delay {} s must be non-negative", channel.delay_s)));
    }
    let whole = d.floor();
    let mut mu = d - whole;
    let mut whole = whole as usize;
    if mu > 1.0 - 1e-12 {
        whole += 1;
        mu = 0.0;
    }
    let needed = signal.len() + whole + if mu > 0.0 { DELAY_TAPS / 2 } else { 0 };
    if needed > buffer_len {
        return Err(Error::DelayOutOfBuffer { delay_samples: d, buffer: buffer_len });
    }
    let mut out = vec![Complex64::new(0.0, 0.0); buffer_len];
    if mu == 0.0 {
        out[whole..whole + signal.len()].copy_from_slice(&signal.samples);
    } else {
        // out[k] = Σ_j h[j]·x[k − whole − (j − 31)]
        let taps = fractional_taps(mu);
        let n = signal.len() as i64;
        for (k, o) in out.iter_mut().enumerate() {
            let base = k as i64 - whole as i64 + (DELAY_TAPS as i64 / 2 - 1);
            if base < 0 || base - (DELAY_TAPS as i64 - 1) >= n {
                continue;
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, h) in taps.iter().enumerate() {
                let idx = base - j as i64;
                if idx >= 0 && idx < n {
                    acc += signal.samples[idx as usize] * *h;
                }
            }
            *o = acc;
        }
    }
    for (k, o) in out.iter_mut().enumerate() {
        let mut v = *o * channel.amplitude;
        if channel.doppler_hz != 0.0 {
            let t = signal.t0 + k as f64 / fs;
            v *= Complex64::cis(2.0 * PI * channel.doppler_hz * t);
        }
        *o = v;
    }
    Ok(ComplexSignal::new(out, fs, signal.t0))
}

/// Circular complex white Gaussian noise of total variance `sigma2`.
pub fn add_noise<R: Rng>(signal: &mut ComplexSignal, sigma2: f64, rng: &mut R) {
    if !(sigma2 > 0.0) {
        return;
    }
    let s = (sigma2 / 2.0).sqrt();
    for v in &mut signal.samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(s * re, s * im);
    }
}

/// Noise variance that gives `snr_db` against a during-pulse power.
pub fn noise_variance(on_power: f64, snr_db: f64) -> f64 {
    on_power / db_to_power(snr_db)
}

/// Independent generator for trial `trial` of grid point `grid`.
pub fn trial_rng(master_seed: u64, grid: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream((grid << 32) | (trial & 0xffff_ffff));
    rng
}

/// Default receive buffer for a link: the signal, the delay, the
/// interpolator tail and a little slack.
pub fn buffer_len_for(signal: &ComplexSignal, delay_s: f64) -> usize {
    signal.len() + (delay_s.max(0.0) * signal.sample_rate).ceil() as usize + DELAY_TAPS
}

/// `s_r(t) = α·s(t − τ)·e^{j2πf_d t} + w(t)`, with `w` sized so the
/// during-pulse SNR at the receiver equals `link.snr_pre_db`.
pub fn propagate(signal: &ComplexSignal, link: &LinkModel) -> Result<ComplexSignal> {
    link.validate()?;
    let channel = link.to_channel();
    propagate_into(signal, link, buffer_len_for(signal, channel.delay_s))
}

/// [`propagate`] onto a caller-chosen buffer length.
pub fn propagate_into(signal: &ComplexSignal, link: &LinkModel, buffer_len: usize) -> Result<ComplexSignal> {
    link.validate()?;
    let channel = link.to_channel();
    let mut out = apply_channel(signal, &channel, buffer_len)?;
    if let Some(snr) = link.snr_pre_db {
        let sigma2 = noise_variance(signal.on_power() * channel.amplitude.powi(2), snr);
        add_noise(&mut out, sigma2, &mut ChaCha8Rng::seed_from_u64(link.rng_seed));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveforms::{generate, WaveformSpec};

    fn probe() -> ComplexSignal {
        generate(&WaveformSpec::ttsfw_centered(4e6, 1e6, 2, 20e-6), 25e6).unwrap()
    }

    #[test]
    fn identity_channel() {
        let s = probe();
        let link = LinkModel::new(0.0, 2, None);
        let out = propagate_into(&s, &link, s.len()).unwrap();
        assert_eq!(out.samples, s.samples);
    }

    #[test]
    fn path_loss_slopes() {
        let a = LinkModel::new(10.0, 4, None).amplitude();
        let b = LinkModel::new(20.0, 4, None).amplitude();
        assert!((20.0 * (a / b).log10() - 40.0 * 2f64.log10()).abs() < 1e-12);
        let a = LinkModel::new(10.0, 2, None).amplitude();
        let b = LinkModel::new(20.0, 2, None).amplitude();
        assert!((20.0 * (a / b).log10() - 20.0 * 2f64.log10()).abs() < 1e-12);
    }

    #[test]
    fn energy_preserved_at_reference_range() {
        let s = probe();
        let mut link = LinkModel::new(1.0, 2, None);
        link.reference_range = 1.0;
        let out = propagate(&s, &link).unwrap();
        assert!((out.energy() / s.energy() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn integer_delay_is_exact_shift() {
        let s = probe();
        let ch = Channel { delay_s: 40.0 / 25e6, amplitude: 1.0, doppler_hz: 0.0 };
        let out = apply_channel(&s, &ch, s.len() + 40).unwrap();
        assert_eq!(&out.samples[40..], &s.samples[..]);
    }

    #[test]
    fn fractional_delay_matches_analytic_tone() {
        let fs = 25e6;
        let f = 1.7e6;
        let n = 2000;
        let tone = ComplexSignal::new((0..n).map(|k| Complex64::cis(2.0 * PI * f * k as f64 / fs)).collect(), fs, 0.0);
        let d = 13.3 / fs;
        let out = apply_channel(&tone, &Channel { delay_s: d, amplitude: 1.0, doppler_hz: 0.0 }, n + 64).unwrap();
        for k in 200..1800 {
            let want = Complex64::cis(2.0 * PI * f * (k as f64 / fs - d));
            assert!((out.samples[k] - want).norm() < 1e-4, "k={k}");
        }
    }

    #[test]
    fn delay_beyond_buffer_errors() {
        let s = probe();
        let link = LinkModel::new(1e5, 4, None);
        assert!(matches!(propagate_into(&s, &link, s.len()), Err(Error::DelayOutOfBuffer { .. })));
    }

    #[test]
    fn noise_variance_calibrated() {
        let mut z = ComplexSignal::zeros(1_000_000, 1.0, 0.0);
        add_noise(&mut z, 0.37, &mut trial_rng(5, 0, 0));
        let v = z.sum_sq() / z.len() as f64;
        assert!((v / 0.37 - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn trial_streams_are_distinct_and_reproducible() {
        let a: u64 = trial_rng(1, 2, 3).random();
        let b: u64 = trial_rng(1, 2, 3).random();
        let c: u64 = trial_rng(1, 2, 4).random();
        let d: u64 = trial_rng(1, 3, 3).random();
        assert_eq!(a, b);
        assert!(a != c && a != d && c != d);
    }

    #[test]
    fn bad_exponent_rejected() {
        assert!(LinkModel::new(1.0, 3, None).validate().is_err());
        assert!(LinkModel::new(-1.0, 2, None).validate().is_err());
    }
}
