//! Receive-side processing: matched filter, sub-sample peak extraction,
//! capture averaging, static-offset calibration and subspace SNR
//! estimation.

mod correlate;
mod peak;
mod snr;

use serde::{Deserialize, Serialize};

pub use correlate::{matched_filter, matched_filter_direct, MatchedFilter};
pub use peak::{interpolate_peak, PeakConfig, PeakEstimate};
pub use snr::{estimate_snr_eigen, ObservationMatrix, SnrEstimate};

use crate::stats::{mean, sample_variance};
use crate::{ComplexSignal, Error, LinkType, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangingEstimate {
    /// s.
    pub delay_s: f64,
    /// m.
    pub range_m: f64,
    pub peak_magnitude: f64,
    pub interpolation_factor: usize,
    /// Absent when fewer than two captures were available.
    pub snr_db_est: Option<f64>,
    pub link_type: LinkType,
}

impl RangingEstimate {
    pub fn new(delay_s: f64, peak_magnitude: f64, interpolation_factor: usize, link_type: LinkType) -> Self {
        Self {
            delay_s,
            range_m: link_type.delay_to_range(delay_s),
            peak_magnitude,
            interpolation_factor,
            snr_db_est: None,
            link_type,
        }
    }
}

/// Matched filter followed by peak interpolation.
pub fn estimate_delay(received: &ComplexSignal, filter: &MatchedFilter, config: PeakConfig) -> Result<PeakEstimate> {
    interpolate_peak(&filter.apply(received)?, config)
}

/// Delay estimate from one or more captures of the same echo.
///
/// The reported delay is the mean over captures. With two or more captures
/// the SNR is estimated from the segment each capture holds under the first
/// pulse of `reference`, located at that mean delay; `pulse_len` is the
/// segment length in samples.
pub fn estimate_from_captures(
    captures: &[ComplexSignal],
    reference: &ComplexSignal,
    pulse_len: usize,
    config: PeakConfig,
    link_type: LinkType,
) -> Result<RangingEstimate> {
    let first = captures.first().ok_or_else(|| Error::Domain("no captures".into()))?;
    if captures.iter().any(|c| c.len() != first.len()) {
        return Err(Error::Domain("captures must have equal lengths".into()));
    }
    if captures.iter().any(|c| c.sample_rate != reference.sample_rate) {
        return Err(Error::SampleRateMismatch(first.sample_rate, reference.sample_rate));
    }
    let filter = MatchedFilter::new(reference, first.len())?;
    let peaks = captures.iter().map(|c| estimate_delay(c, &filter, config)).collect::<Result<Vec<_>>>()?;
    let delays: Vec<f64> = peaks.iter().map(|p| p.delay_s).collect();
    let magnitudes: Vec<f64> = peaks.iter().map(|p| p.peak_magnitude).collect();
    let delay = mean(&delays);
    let mut estimate = RangingEstimate::new(delay, mean(&magnitudes), config.factor, link_type);
    if captures.len() >= 2 {
        let fs = first.sample_rate;
        let start = ((delay + reference.t0 - first.t0) * fs).round();
        let l = captures.len().min(pulse_len);
        if start >= 0.0 && start as usize + pulse_len <= first.len() && l >= 2 {
            let start = start as usize;
            let cols = captures[..l].iter().map(|c| c.samples[start..start + pulse_len].to_vec()).collect();
            estimate.snr_db_est = Some(estimate_snr_eigen(&ObservationMatrix::new(cols)?)?.snr_db);
        }
    }
    Ok(estimate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakAverage {
    pub mean: f64,
    /// Unbiased sample variance; 0 for a single estimate.
    pub variance: f64,
    pub count: usize,
}

/// Mean and sample variance of repeated delay estimates.
pub fn average_peaks(estimates: &[f64]) -> Result<PeakAverage> {
    if estimates.is_empty() {
        return Err(Error::Domain("no estimates to average".into()));
    }
    Ok(PeakAverage { mean: mean(estimates), variance: sample_variance(estimates), count: estimates.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// `mean(measured − expected)`.
    pub offset: f64,
    /// `measured − offset`.
    pub calibrated: Vec<f64>,
}

/// Removes the average static offset between measured and expected values.
pub fn calibrate(measured: &[f64], expected: &[f64]) -> Result<Calibration> {
    if measured.len() != expected.len() {
        return Err(Error::LengthMismatch(measured.len(), expected.len()));
    }
    if measured.is_empty() {
        return Err(Error::Domain("calibration needs at least one point".into()));
    }
    let diffs: Vec<f64> = measured.iter().zip(expected).map(|(m, e)| m - e).collect();
    let offset = mean(&diffs);
    Ok(Calibration { offset, calibrated: measured.iter().map(|m| m - offset).collect() })
}
