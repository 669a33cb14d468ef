use serde::{Deserialize, Serialize};

use super::channel::{add_noise, apply_channel, noise_variance, trial_rng, Channel, DELAY_TAPS};
use super::par_map;
use crate::bounds::{crlb_ttsfw, crlb_ttsfw_centered, NoiseSpec};
use crate::estimator::{estimate_delay, MatchedFilter, PeakConfig};
use crate::stats::{mean, rmse, sample_variance};
use crate::waveforms::{generate, WaveformSpec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NumPulses,
    Snr,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" | "num_pulses" => Ok(Self::NumPulses),
            "snr" => Ok(Self::Snr),
            other => Err(Error::Parse(format!("axis must be num_pulses or snr, got {other:?}"))),
        }
    }
}

/// Fixed parameters of a variance study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloBase {
    /// Hz, split by the scalability rule.
    pub total_bw: f64,
    /// Sum of pulse on-times, s. Each of `N` pulses lasts `integration_time/N`.
    pub integration_time: f64,
    /// `T/T_r`.
    pub duty_cycle: f64,
    pub sample_rate: f64,
    pub snr_pre_db: f64,
    pub num_pulses: usize,
    /// s.
    pub true_delay_s: f64,
    pub peak: PeakConfig,
}

impl Default for MonteCarloBase {
    fn default() -> Self {
        Self {
            total_bw: 4e6,
            integration_time: 500e-6,
            duty_cycle: 0.5,
            sample_rate: crate::DEFAULT_SAMPLE_RATE,
            snr_pre_db: 30.0,
            num_pulses: 4,
            // 100.05 samples at 25 MHz: off-grid, and clear of the
            // half-sample point where PTTW lobe picks could tie.
            true_delay_s: 4.002e-6,
            peak: PeakConfig::default(),
        }
    }
}

impl MonteCarloBase {
    pub fn waveform(&self, num_pulses: usize) -> Result<WaveformSpec> {
        if num_pulses == 0 {
            return Err(Error::Domain("num_pulses must be at least 1".into()));
        }
        let t = self.integration_time / num_pulses as f64;
        let spec = WaveformSpec::ttsfw_scaled(self.total_bw, num_pulses, t).with_duty_cycle(self.duty_cycle);
        spec.validate_for(self.sample_rate)?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloConfig {
    pub axis: SweepAxis,
    /// Pulse counts or pre-processing SNRs in dB.
    pub grid: Vec<f64>,
    pub base: MonteCarloBase,
    pub trials: usize,
    pub master_seed: u64,
}

impl MonteCarloConfig {
    pub fn new(axis: SweepAxis, grid: Vec<f64>, trials: usize) -> Self {
        Self { axis, grid, base: MonteCarloBase::default(), trials, master_seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloPoint {
    pub x: f64,
    pub num_pulses: usize,
    pub snr_pre_db: f64,
    pub snr_post_db: f64,
    /// s².
    pub variance_sim: f64,
    /// s.
    pub rmse: f64,
    /// s.
    pub mean_error: f64,
    /// Closed-form bound measured about the first step's mid-band, s².
    pub variance_crlb: f64,
    /// Bound with the mean-frequency term included, s².
    pub variance_crlb_centered: f64,
    /// Fewer than two trials: the variance is not meaningful.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloResult {
    pub config: MonteCarloConfig,
    pub trials: usize,
    pub points: Vec<MonteCarloPoint>,
    pub master_seed: u64,
    /// How per-trial generators derive from the master seed.
    pub seed_scheme: String,
}

/// Delay-variance study over pulse count or SNR.
///
/// Each grid point synthesizes the scaled TTSFW, delays it once by the
/// true delay, then runs `trials` noisy captures through the matched
/// filter and peak interpolator. Trial `t` of point `g` draws its noise
/// from its own counter-based stream, and moments are accumulated in trial
/// order with compensated sums, so results do not depend on thread count.
pub fn monte_carlo_variance(config: &MonteCarloConfig) -> Result<MonteCarloResult> {
    if config.grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if config.trials == 0 {
        return Err(Error::Domain("trials must be at least 1".into()));
    }
    let base = &config.base;
    let points = config
        .grid
        .iter()
        .enumerate()
        .map(|(g, &x)| {
            let (n, snr) = match config.axis {
                SweepAxis::NumPulses => {
                    if !(x >= 1.0) || x.fract() != 0.0 {
                        return Err(Error::Domain(format!("pulse count {x} must be a positive integer")));
                    }
                    (x as usize, base.snr_pre_db)
                }
                SweepAxis::Snr => (base.num_pulses, x),
            };
            run_point(config, g as u64, x, n, snr)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MonteCarloResult {
        config: config.clone(),
        trials: config.trials,
        points,
        master_seed: config.master_seed,
        seed_scheme: "ChaCha8(seed = master_seed, stream = grid_index << 32 | trial_index)".into(),
    })
}

fn run_point(config: &MonteCarloConfig, g: u64, x: f64, n: usize, snr_db: f64) -> Result<MonteCarloPoint> {
    let base = &config.base;
    let fs = base.sample_rate;
    let spec = base.waveform(n)?;
    let tx = generate(&spec, fs)?;
    let buffer_len = tx.len() + (base.true_delay_s * fs).ceil() as usize + DELAY_TAPS;
    let clean =
        apply_channel(&tx, &Channel { delay_s: base.true_delay_s, amplitude: 1.0, doppler_hz: 0.0 }, buffer_len)?;
    let sigma2 = noise_variance(tx.on_power(), snr_db);
    let filter = MatchedFilter::new(&tx, buffer_len)?;
    let errors = par_map(config.trials, |t| {
        let mut rx = clean.clone();
        add_noise(&mut rx, sigma2, &mut trial_rng(config.master_seed, g, t as u64));
        estimate_delay(&rx, &filter, base.peak).map(|p| p.delay_s - base.true_delay_s)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    // On-time samples set the matched-filter gain: T_int · fs.
    let noise = NoiseSpec::new(snr_db, fs, spec.integration_time());
    let literal = crlb_ttsfw(n, spec.pulse_bandwidth(), spec.delta_f_step, noise)?;
    let centered = crlb_ttsfw_centered(n, spec.pulse_bandwidth(), spec.delta_f_step, noise)?;
    Ok(MonteCarloPoint {
        x,
        num_pulses: n,
        snr_pre_db: snr_db,
        snr_post_db: literal.snr_post_db,
        variance_sim: sample_variance(&errors),
        rmse: rmse(&errors, 0.0),
        mean_error: mean(&errors),
        variance_crlb: literal.variance_bound,
        variance_crlb_centered: centered.variance_bound,
        degenerate: errors.len() < 2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(axis: SweepAxis, grid: Vec<f64>, trials: usize) -> MonteCarloConfig {
        let mut c = MonteCarloConfig::new(axis, grid, trials);
        c.base.integration_time = 40e-6;
        c
    }

    #[test]
    fn single_trial_is_flagged() {
        let r = monte_carlo_variance(&quick(SweepAxis::NumPulses, vec![2.0], 1)).unwrap();
        assert!(r.points[0].degenerate);
        assert_eq!(r.points[0].variance_sim, 0.0);
    }

    #[test]
    fn reproducible() {
        let c = quick(SweepAxis::Snr, vec![20.0, 30.0], 6);
        assert_eq!(monte_carlo_variance(&c).unwrap(), monte_carlo_variance(&c).unwrap());
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(monte_carlo_variance(&quick(SweepAxis::Snr, vec![], 3)), Err(Error::EmptyGrid)));
        assert!(monte_carlo_variance(&quick(SweepAxis::NumPulses, vec![2.5], 3)).is_err());
    }

    #[test]
    fn overlay_bounds_are_ordered() {
        let r = monte_carlo_variance(&quick(SweepAxis::NumPulses, vec![1.0, 4.0], 2)).unwrap();
        assert_eq!(r.points[0].variance_crlb, r.points[0].variance_crlb_centered);
        assert!(r.points[1].variance_crlb < r.points[1].variance_crlb_centered);
    }
}
