//! High-accuracy inter-node ranging for coherent distributed arrays.
//!
//! The crate covers the whole chain used to design and evaluate
//! spectrally-sparse ranging waveforms:
//!
//! - [`waveforms`]: pulsed two-tone (PTTW), stepped-frequency (SFW),
//!   two-tone stepped-frequency (TTSFW) and LFM baseline synthesis.
//! - [`bounds`]: Cramér-Rao bounds on delay variance, closed-form and numeric.
//! - [`ambiguity`]: analytic and sampled delay-Doppler ambiguity surfaces.
//! - [`channelplan`]: frequency-domain multiplexing of node pairs.
//! - [`estimator`]: matched filter, spline peak refinement, calibration and
//!   eigenvalue SNR estimation.
//! - [`simulator`]: propagation, multi-node scenarios and Monte Carlo studies.
//!
//! All signals are complex baseband. RF carriers only appear as scenario
//! metadata.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambiguity;
pub mod bounds;
pub mod channelplan;
mod error;
pub mod estimator;
pub mod signal;
pub mod simulator;
pub mod stats;
pub mod waveforms;

pub use error::{Error, Result};
pub use signal::ComplexSignal;
pub use waveforms::{WaveformFamily, WaveformSpec};

pub use num_complex::Complex64;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default complex sample rate, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 25e6;

/// Propagation geometry of a delay measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    /// Transmitter and receiver at opposite ends: range = c·τ.
    OneWay,
    /// Reflected or repeated back to the transmitter: range = c·τ/2.
    TwoWay,
}

impl LinkType {
    pub fn delay_to_range(self, delay_s: f64) -> f64 {
        match self {
            LinkType::OneWay => SPEED_OF_LIGHT * delay_s,
            LinkType::TwoWay => SPEED_OF_LIGHT * delay_s / 2.0,
        }
    }

    pub fn range_to_delay(self, range_m: f64) -> f64 {
        match self {
            LinkType::OneWay => range_m / SPEED_OF_LIGHT,
            LinkType::TwoWay => 2.0 * range_m / SPEED_OF_LIGHT,
        }
    }
}
