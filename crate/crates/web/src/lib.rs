//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export returns a [`Curve`]: an x axis and one or two y series the
//! page draws on a canvas. The `*_curve` functions without bindings do the
//! work and are what native tests exercise.

use wasm_bindgen::prelude::*;

use ranging::ambiguity::ambiguity_analytic;
use ranging::ambiguity::linspace;
use ranging::bounds::{crlb_ttsfw, crlb_ttsfw_centered, scalability_params, NoiseSpec};
use ranging::estimator::matched_filter;
use ranging::waveforms::generate;
use ranging::{LinkType, WaveformSpec, DEFAULT_SAMPLE_RATE};

/// Sampled series for plotting.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    x: Vec<f64>,
    y: Vec<f64>,
    y2: Vec<f64>,
}

#[wasm_bindgen]
impl Curve {
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn y(&self) -> Vec<f64> {
        self.y.clone()
    }

    /// Second series, empty when there is none.
    #[wasm_bindgen(getter)]
    pub fn y2(&self) -> Vec<f64> {
        self.y2.clone()
    }
}

impl Curve {
    pub fn series(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.x, &self.y, &self.y2)
    }
}

fn centered_ttsfw(delta_f: f64, num_pulses: usize, pulse_us: f64) -> Result<WaveformSpec, String> {
    if num_pulses == 0 {
        return Err("need at least one pulse".into());
    }
    let spec = WaveformSpec::ttsfw_centered(delta_f, delta_f / num_pulses as f64, num_pulses, pulse_us * 1e-6);
    spec.validate_for(DEFAULT_SAMPLE_RATE).map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Analytic `|AF|` over delay in `[-T, T]` at one Doppler shift.
/// `x` is in microseconds.
pub fn ambiguity_curve(
    delta_f: f64,
    num_pulses: usize,
    pulse_us: f64,
    doppler_hz: f64,
    points: usize,
) -> Result<Curve, String> {
    let spec = centered_ttsfw(delta_f, num_pulses, pulse_us)?;
    let t = spec.pulse_duration;
    let delays = linspace(-t, t, points.max(2));
    let s = ambiguity_analytic(&spec, &delays, &[doppler_hz]).map_err(|e| e.to_string())?;
    Ok(Curve { x: delays.iter().map(|d| d * 1e6).collect(), y: s.magnitude[0].clone(), y2: Vec::new() })
}

/// Two-way range standard deviation bound (m) of the scaled TTSFW for
/// `N = 1..=max_pulses`: `y` about the lowest step, `y2` about the spectral
/// centroid.
pub fn bound_curve(total_bw: f64, snr_db: f64, integration_us: f64, max_pulses: usize) -> Result<Curve, String> {
    let noise = NoiseSpec::new(snr_db, DEFAULT_SAMPLE_RATE, integration_us * 1e-6);
    let mut c = Curve { x: Vec::new(), y: Vec::new(), y2: Vec::new() };
    for n in 1..=max_pulses.max(1) {
        let (step, pulse) = scalability_params(total_bw, n);
        let lit = crlb_ttsfw(n, pulse, step, noise).map_err(|e| e.to_string())?;
        let cen = crlb_ttsfw_centered(n, pulse, step, noise).map_err(|e| e.to_string())?;
        c.x.push(n as f64);
        c.y.push(lit.with_link(LinkType::TwoWay).range_std_bound);
        c.y2.push(cen.with_link(LinkType::TwoWay).range_std_bound);
    }
    Ok(c)
}

/// Normalized zero-Doppler matched-filter magnitude over one pulse at the
/// default sample rate: `y` for a TTSFW, `y2` for a PTTW with the same tone
/// separation and total on-time. `x` is in microseconds.
pub fn matched_filter_curve(delta_f: f64, num_pulses: usize, pulse_us: f64) -> Result<Curve, String> {
    let fs = DEFAULT_SAMPLE_RATE;
    let ttsfw = centered_ttsfw(delta_f, num_pulses, pulse_us)?;
    let pttw = WaveformSpec::pttw(-delta_f / 2.0, delta_f / 2.0, ttsfw.integration_time());
    let cut = |spec: &WaveformSpec, lags: usize| -> Result<Vec<f64>, String> {
        let sig = generate(spec, fs).map_err(|e| e.to_string())?;
        let mf = matched_filter(&sig, &sig).map_err(|e| e.to_string())?;
        let zero = sig.len() - 1;
        let e = sig.sum_sq();
        Ok((0..=lags).map(|k| mf.samples[zero + k].norm() / e).collect())
    };
    let lags = (ttsfw.pulse_duration * fs).round() as usize;
    Ok(Curve { x: (0..=lags).map(|k| k as f64 / fs * 1e6).collect(), y: cut(&ttsfw, lags)?, y2: cut(&pttw, lags)? })
}

#[wasm_bindgen(js_name = ambiguityCut)]
pub fn ambiguity_cut(
    delta_f: f64,
    num_pulses: usize,
    pulse_us: f64,
    doppler_hz: f64,
    points: usize,
) -> Result<Curve, JsError> {
    ambiguity_curve(delta_f, num_pulses, pulse_us, doppler_hz, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = boundCurve)]
pub fn bound_curve_js(total_bw: f64, snr_db: f64, integration_us: f64, max_pulses: usize) -> Result<Curve, JsError> {
    bound_curve(total_bw, snr_db, integration_us, max_pulses).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = matchedFilterCut)]
pub fn matched_filter_cut(delta_f: f64, num_pulses: usize, pulse_us: f64) -> Result<Curve, JsError> {
    matched_filter_curve(delta_f, num_pulses, pulse_us).map_err(|e| JsError::new(&e))
}
