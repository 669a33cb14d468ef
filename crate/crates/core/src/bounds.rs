//! Cramér-Rao lower bounds on time-delay estimation.
//!
//! For a waveform with mean-square bandwidth `ζ²` and energy-normalized
//! squared mean frequency `μ²` (both in rad²/s²), the delay variance of any
//! unbiased estimator is bounded by
//!
//! ```text
//! var(τ̂ − τ) ≥ 1 / (2 · SNR · (ζ² − μ²))
//! ```
//!
//! where SNR is the post-matched-filter SNR: the pre-processing
//! (per-sample, during-pulse) SNR multiplied by the time-bandwidth
//! processing gain. Both values are echoed in [`CrlbReport`].
//!
//! The TTSFW closed form measures `ζ²` about the mid-band frequency of the
//! first step, `(f₁+f₂)/2`, and treats `μ²` as zero. The spectrum of a
//! stepped waveform is not symmetric about that reference, so
//! [`crlb_ttsfw_centered`] additionally reports the bound with the
//! mean-frequency term restored; that is what the numeric spectral moment
//! of a generated waveform converges to.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{ComplexSignal, Error, LinkType, Result};

/// Pre-processing SNR plus the integration parameters that set the
/// processing gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// dB, per sample during the pulse on-time.
    pub snr_db: f64,
    /// Hz.
    pub noise_bandwidth: f64,
    /// s, total pulse on-time integrated by the matched filter.
    pub integration_time: f64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, noise_bandwidth: f64, integration_time: f64) -> Self {
        Self { snr_db, noise_bandwidth, integration_time }
    }

    /// SNR already referenced to the matched-filter output (0 dB gain).
    pub fn post_processing(snr_db: f64) -> Self {
        Self::new(snr_db, 1.0, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.snr_db.is_finite() {
            return Err(Error::Domain("snr_db must be finite".into()));
        }
        if !(self.noise_bandwidth > 0.0) || !(self.integration_time > 0.0) {
            return Err(Error::Domain("noise bandwidth and integration time must be positive".into()));
        }
        if self.noise_bandwidth * self.integration_time < 1.0 - 1e-12 {
            return Err(Error::Domain("time-bandwidth product below 1 gives negative processing gain".into()));
        }
        Ok(())
    }

    pub fn processing_gain_db(&self) -> f64 {
        processing_gain_db(self.integration_time, self.noise_bandwidth)
    }

    pub fn post_snr_db(&self) -> f64 {
        self.snr_db + self.processing_gain_db()
    }

    pub fn post_snr_linear(&self) -> f64 {
        10f64.powf(self.post_snr_db() / 10.0)
    }
}

/// `10·log10(T·BW)`. Inputs must be positive.
pub fn processing_gain_db(integration_time: f64, noise_bandwidth: f64) -> f64 {
    10.0 * (integration_time * noise_bandwidth).log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbParams {
    pub num_pulses: usize,
    pub delta_f_pulse: f64,
    pub delta_f_step: f64,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrlbReport {
    /// ζ², rad²/s².
    pub mean_square_bandwidth: f64,
    /// μ², rad²/s², already divided by the signal energy.
    pub mean_frequency_sq: f64,
    /// Post-processing SNR, linear.
    pub snr_linear: f64,
    pub snr_pre_db: f64,
    pub snr_post_db: f64,
    /// s².
    pub variance_bound: f64,
    /// s.
    pub std_bound: f64,
    /// m, per `link_type`.
    pub range_std_bound: f64,
    pub link_type: LinkType,
    pub params_echo: CrlbParams,
}

impl CrlbReport {
    fn build(msbw: f64, mean_freq_sq: f64, params: CrlbParams) -> Result<Self> {
        params.noise.validate()?;
        let effective = msbw - mean_freq_sq;
        if !(effective > 0.0) || !effective.is_finite() {
            return Err(Error::Domain(format!("effective mean-square bandwidth {effective} must be positive")));
        }
        let snr_linear = params.noise.post_snr_linear();
        let variance_bound = 1.0 / (2.0 * snr_linear * effective);
        let std_bound = variance_bound.sqrt();
        let link_type = LinkType::TwoWay;
        Ok(Self {
            mean_square_bandwidth: msbw,
            mean_frequency_sq: mean_freq_sq,
            snr_linear,
            snr_pre_db: params.noise.snr_db,
            snr_post_db: params.noise.post_snr_db(),
            variance_bound,
            std_bound,
            range_std_bound: link_type.delay_to_range(std_bound),
            link_type,
            params_echo: params,
        })
    }

    /// Re-expresses the range bound for a different link geometry.
    pub fn with_link(mut self, link_type: LinkType) -> Self {
        self.link_type = link_type;
        self.range_std_bound = link_type.delay_to_range(self.std_bound);
        self
    }
}

/// Two tones separated by `delta_f`: `ζ² = π²Δf²`.
pub fn crlb_two_tone(delta_f: f64, noise: NoiseSpec) -> Result<CrlbReport> {
    if !(delta_f > 0.0) {
        return Err(Error::Domain(format!("tone separation {delta_f} Hz must be positive")));
    }
    CrlbReport::build(
        PI * PI * delta_f * delta_f,
        0.0,
        CrlbParams { num_pulses: 1, delta_f_pulse: delta_f, delta_f_step: 0.0, noise },
    )
}

/// `π²Δf² + ((2πδf)²/N)·Σ_{n<N} n²`.
pub fn ttsfw_msbw(num_pulses: usize, delta_f_pulse: f64, delta_f_step: f64) -> f64 {
    let n = num_pulses as f64;
    // Σ_{n=0}^{N-1} n² = (N−1)N(2N−1)/6
    let sum_sq = (n - 1.0) * n * (2.0 * n - 1.0) / 6.0;
    PI * PI * delta_f_pulse * delta_f_pulse + (2.0 * PI * delta_f_step).powi(2) / n * sum_sq
}

/// Squared mean frequency of a TTSFW relative to `(f₁+f₂)/2`: the steps
/// sit at `n·δf`, averaging `(N−1)δf/2`.
pub fn ttsfw_mean_frequency_sq(num_pulses: usize, delta_f_step: f64) -> f64 {
    (PI * delta_f_step * (num_pulses as f64 - 1.0)).powi(2)
}

/// TTSFW bound using the closed-form `ζ²` with the symmetric-spectrum
/// assumption (`μ² = 0`).
pub fn crlb_ttsfw(num_pulses: usize, delta_f_pulse: f64, delta_f_step: f64, noise: NoiseSpec) -> Result<CrlbReport> {
    check_ttsfw_args(num_pulses, delta_f_pulse)?;
    CrlbReport::build(
        ttsfw_msbw(num_pulses, delta_f_pulse, delta_f_step),
        0.0,
        CrlbParams { num_pulses, delta_f_pulse, delta_f_step, noise },
    )
}

/// TTSFW bound with the mean-frequency term included, i.e. using the
/// spectral spread about the true centroid:
/// `ζ² − μ² = π²Δf² + (2πδf)²·(N²−1)/12`.
pub fn crlb_ttsfw_centered(
    num_pulses: usize,
    delta_f_pulse: f64,
    delta_f_step: f64,
    noise: NoiseSpec,
) -> Result<CrlbReport> {
    check_ttsfw_args(num_pulses, delta_f_pulse)?;
    CrlbReport::build(
        ttsfw_msbw(num_pulses, delta_f_pulse, delta_f_step),
        ttsfw_mean_frequency_sq(num_pulses, delta_f_step),
        CrlbParams { num_pulses, delta_f_pulse, delta_f_step, noise },
    )
}

fn check_ttsfw_args(num_pulses: usize, delta_f_pulse: f64) -> Result<()> {
    if num_pulses == 0 {
        return Err(Error::Domain("TTSFW needs at least one pulse".into()));
    }
    if !(delta_f_pulse > 0.0) {
        return Err(Error::Domain("pulse bandwidth must be positive".into()));
    }
    Ok(())
}

/// Flat-spectrum chirp over `bandwidth`: `ζ² = (π·BW)²/3`.
pub fn crlb_lfm(bandwidth: f64, noise: NoiseSpec) -> Result<CrlbReport> {
    if !(bandwidth > 0.0) {
        return Err(Error::Domain("bandwidth must be positive".into()));
    }
    CrlbReport::build(
        (PI * bandwidth).powi(2) / 3.0,
        0.0,
        CrlbParams { num_pulses: 1, delta_f_pulse: bandwidth, delta_f_step: 0.0, noise },
    )
}

/// Splits `total_bw` into `δf = BW/(2N−1)` and `Δf = N·δf`, so the `2N`
/// tones sit on a uniform `δf` grid spanning exactly `BW`.
pub fn scalability_params(total_bw: f64, num_pulses: usize) -> (f64, f64) {
    let n = num_pulses as f64;
    let step = total_bw / (2.0 * n - 1.0);
    (step, n * step)
}

/// Closed-form TTSFW `ζ²` with [`scalability_params`] substituted.
pub fn scaled_ttsfw_msbw(total_bw: f64, num_pulses: usize) -> f64 {
    let (step, pulse) = scalability_params(total_bw, num_pulses);
    ttsfw_msbw(num_pulses, pulse, step)
}

/// The two large-`N` terms of the scaled TTSFW `ζ²`: the half-band two-tone
/// term `(πBW)²/4` and the flat-spectrum term `(πBW)²/3`.
pub fn crlb_limits(total_bw: f64) -> Result<(f64, f64)> {
    if !(total_bw > 0.0) {
        return Err(Error::Domain("bandwidth must be positive".into()));
    }
    let base = (PI * total_bw).powi(2);
    Ok((base / 4.0, base / 3.0))
}

/// First and second spectral moments of a sampled signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralMoments {
    /// Energy-weighted mean frequency, Hz.
    pub mean_frequency: f64,
    /// ζ² about the mean frequency, rad²/s².
    pub centered_msbw: f64,
    pub energy: f64,
}

impl SpectralMoments {
    /// ζ² about an arbitrary reference frequency (Hz).
    pub fn msbw_about(&self, reference_hz: f64) -> f64 {
        let offset = 2.0 * PI * (self.mean_frequency - reference_hz);
        self.centered_msbw + offset * offset
    }
}

/// Discrete spectral moments from the DFT over `[-fs/2, fs/2)`.
///
/// The DFT spans exactly the signal record, without zero padding: padding
/// would add artificial edges whose leakage inflates the second moment.
pub fn spectral_moments(signal: &ComplexSignal) -> Result<SpectralMoments> {
    let energy = signal.energy();
    if signal.is_empty() || !(energy > 0.0) {
        return Err(Error::Domain("spectral moments need a signal with positive energy".into()));
    }
    let n = signal.len();
    let mut buf: Vec<Complex64> = signal.samples.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let fs = signal.sample_rate;
    let freq = |k: usize| {
        let k = if k >= n / 2 { k as f64 - n as f64 } else { k as f64 };
        k * fs / n as f64
    };
    let power: Vec<f64> = buf.iter().map(|c| c.norm_sqr()).collect();
    let total: crate::stats::CompensatedSum = power.iter().copied().collect();
    let first: crate::stats::CompensatedSum = power.iter().enumerate().map(|(k, p)| freq(k) * p).collect();
    let mean_frequency = first.value() / total.value();
    let second: crate::stats::CompensatedSum = power
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let d = freq(k) - mean_frequency;
            d * d * p
        })
        .collect();
    Ok(SpectralMoments { mean_frequency, centered_msbw: (2.0 * PI).powi(2) * second.value() / total.value(), energy })
}

/// Energy-normalized second moment of the spectrum about its mean
/// frequency, rad²/s².
pub fn numeric_msbw(signal: &ComplexSignal) -> Result<f64> {
    Ok(spectral_moments(signal)?.centered_msbw)
}
