use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use ranging::ambiguity::{ambiguity_analytic, ambiguity_numeric, default_grid, linspace};
use ranging::bounds::{crlb_ttsfw, crlb_ttsfw_centered, scalability_params, NoiseSpec};
use ranging::channelplan::{build_plan_with, Duplex, PlanOptions};
use ranging::estimator::{estimate_from_captures, PeakConfig};
use ranging::simulator::{
    monte_carlo_variance, run_pair_session, run_three_node_demo, MonteCarloConfig, NodeScenario, SweepAxis,
    ThreeNodeConfig,
};
use ranging::stats::{mean, sample_variance};
use ranging::waveforms::{generate, step_order_for_pair};
use ranging::{ComplexSignal, LinkType, WaveformFamily, WaveformSpec};

use crate::config::parse_grid;
use crate::output::{num, open, opt, write_csv, write_json, Format};
use crate::{Failure, Globals};

fn usage(e: ranging::Error) -> Failure {
    Failure::Usage(e.to_string())
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let file = File::open(path).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", path.display())))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct WaveArgs {
    /// Waveform JSON as written by `ranging waveform`; replaces the shape flags.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    #[arg(long, default_value = "ttsfw", value_parser = ["pttw", "sfw", "ttsfw", "lfm"])]
    pub family: String,
    /// Total occupied bandwidth, Hz. TTSFW splits it as δf = BW/(2N−1), Δf = N·δf.
    #[arg(long, default_value_t = 4e6)]
    pub bw: f64,
    /// Pulses (frequency steps).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Pulse on-time, s.
    #[arg(long, default_value_t = 125e-6)]
    pub pulse: f64,
    /// T/T_r.
    #[arg(long, default_value_t = 0.5)]
    pub duty: f64,
    /// Take the step order assigned to this pair.
    #[arg(long, default_value_t = 0)]
    pub pair: usize,
    /// Complex sample rate, Hz.
    #[arg(long, default_value_t = ranging::DEFAULT_SAMPLE_RATE)]
    pub fs: f64,
}

impl WaveArgs {
    pub fn spec(&self) -> Result<WaveformSpec, Failure> {
        let spec = match &self.spec {
            Some(path) => read_json(path)?,
            None => {
                let family: WaveformFamily = self.family.parse().map_err(usage)?;
                let (bw, n, t) = (self.bw, self.n, self.pulse);
                let spec = match family {
                    WaveformFamily::Pttw => WaveformSpec::pttw(-bw / 2.0, bw / 2.0, t),
                    WaveformFamily::Sfw => {
                        let step = bw / n.max(1) as f64;
                        WaveformSpec::sfw(-step * (n.max(1) - 1) as f64 / 2.0, step, n, t)
                    }
                    WaveformFamily::Ttsfw => WaveformSpec::ttsfw_scaled(bw, n, t),
                    WaveformFamily::Lfm => WaveformSpec::lfm(bw, t),
                };
                let spec = match family {
                    WaveformFamily::Sfw | WaveformFamily::Ttsfw => {
                        spec.with_step_order(step_order_for_pair(n, self.pair).map_err(usage)?)
                    }
                    _ => spec,
                };
                spec.with_duty_cycle(self.duty)
            }
        };
        spec.validate_for(self.fs).map_err(usage)?;
        Ok(spec)
    }
}

pub fn waveform(a: &WaveArgs, g: &Globals) -> Result<(), Failure> {
    let spec = a.spec()?;
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut w, &spec)?,
        Format::Csv => generate(&spec, a.fs)?.write_csv(&mut w)?,
    }
    Ok(w.flush()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Numeric,
    Analytic,
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct AmbiguityArgs {
    #[command(flatten)]
    pub wave: WaveArgs,
    #[arg(long, value_enum, default_value_t = Source::Numeric)]
    pub source: Source,
    /// Largest |delay|, s. Default: two step-lobes (or four tone-lobes) clipped to T.
    #[arg(long)]
    pub max_delay: Option<f64>,
    /// Largest |Doppler|, Hz. Default: 2/T.
    #[arg(long)]
    pub max_doppler: Option<f64>,
    #[arg(long, default_value_t = 201)]
    pub delays: usize,
    #[arg(long, default_value_t = 201)]
    pub dopplers: usize,
}

pub fn ambiguity(a: &AmbiguityArgs, g: &Globals) -> Result<(), Failure> {
    let spec = a.wave.spec()?;
    let (d0, f0) = default_grid(&spec);
    let span = |axis: &[f64]| axis.last().copied().unwrap_or(0.0);
    let delays = linspace(-a.max_delay.unwrap_or(span(&d0)), a.max_delay.unwrap_or(span(&d0)), a.delays);
    let dopplers = linspace(-a.max_doppler.unwrap_or(span(&f0)), a.max_doppler.unwrap_or(span(&f0)), a.dopplers);
    let surface = match a.source {
        Source::Numeric => ambiguity_numeric(&generate(&spec, a.wave.fs)?, &delays, &dopplers)?,
        Source::Analytic => ambiguity_analytic(&spec, &delays, &dopplers)?,
    };
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut w, &surface)?,
        Format::Csv => surface.write_csv(&mut w)?,
    }
    Ok(w.flush()?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Link {
    OneWay,
    TwoWay,
}

impl From<Link> for LinkType {
    fn from(l: Link) -> Self {
        match l {
            Link::OneWay => LinkType::OneWay,
            Link::TwoWay => LinkType::TwoWay,
        }
    }
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct CrlbArgs {
    /// Total bandwidth, Hz.
    #[arg(long, default_value_t = 4e6)]
    pub bw: f64,
    /// Pulse counts: `1..8`, `1,2,4` or `start:stop:step`.
    #[arg(long, default_value = "1..8")]
    pub n: String,
    /// Pre-processing SNR, dB.
    #[arg(long, default_value_t = 30.0)]
    pub snr: f64,
    /// Noise bandwidth (sample rate), Hz.
    #[arg(long, default_value_t = ranging::DEFAULT_SAMPLE_RATE)]
    pub fs: f64,
    /// Total on-time, s.
    #[arg(long, default_value_t = 500e-6)]
    pub tint: f64,
    /// Measure bandwidth about the waveform's spectral centroid.
    #[arg(long, default_value_t = false)]
    pub centered: bool,
    #[arg(long, value_enum, default_value_t = Link::TwoWay)]
    pub link: Link,
}

pub fn crlb(a: &CrlbArgs, g: &Globals) -> Result<(), Failure> {
    let grid = parse_grid(&a.n)?;
    let noise = NoiseSpec::new(a.snr, a.fs, a.tint);
    noise.validate().map_err(usage)?;
    let mut reports = Vec::with_capacity(grid.len());
    for &x in &grid {
        if !(x >= 1.0) || x.fract() != 0.0 {
            return Err(Failure::Usage(format!("pulse count {x} must be a positive integer")));
        }
        let n = x as usize;
        let (step, pulse) = scalability_params(a.bw, n);
        let r =
            if a.centered { crlb_ttsfw_centered(n, pulse, step, noise)? } else { crlb_ttsfw(n, pulse, step, noise)? };
        reports.push(r.with_link(a.link.into()));
    }
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut w, &reports)?,
        Format::Csv => write_csv(
            &mut w,
            &["N", "delta_f_step_hz", "delta_f_pulse_hz", "snr_db", "msbw", "variance_s2", "std_s", "range_std_m"],
            reports.iter().map(|r| {
                let p = &r.params_echo;
                vec![
                    p.num_pulses.to_string(),
                    num(p.delta_f_step),
                    num(p.delta_f_pulse),
                    num(r.snr_pre_db),
                    num(r.mean_square_bandwidth - r.mean_frequency_sq),
                    num(r.variance_bound),
                    num(r.std_bound),
                    num(r.range_std_bound),
                ]
            }),
        )?,
    }
    Ok(w.flush()?)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct PlanArgs {
    /// Total bandwidth, Hz.
    #[arg(long, default_value_t = 4e6)]
    pub bw: f64,
    #[arg(long, default_value_t = 2)]
    pub pairs: usize,
    /// Pulse on-time, s.
    #[arg(long, default_value_t = 125e-6)]
    pub pulse: f64,
    /// Update interval, s. Default: 2T.
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long, default_value = "half", value_parser = ["half", "full"])]
    pub duplex: String,
}

pub fn plan(a: &PlanArgs, g: &Globals) -> Result<(), Failure> {
    let opts = PlanOptions { update_interval: a.dt, duplex: a.duplex.parse::<Duplex>().map_err(usage)? };
    let plan = build_plan_with(a.bw, a.pairs, a.pulse, opts)?;
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut w, &plan)?,
        Format::Csv => write_csv(
            &mut w,
            &["pair_id", "lower_band_index", "upper_band_index", "f_lower_hz", "f_upper_hz"],
            plan.channels.iter().map(|c| {
                let (lo, hi) = plan.tones(c);
                vec![
                    c.pair_id.to_string(),
                    c.lower_band_index.to_string(),
                    c.upper_band_index.to_string(),
                    num(lo),
                    num(hi),
                ]
            }),
        )?,
    }
    Ok(w.flush()?)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct EstimateArgs {
    /// I/Q capture CSV (`# sample_rate=...` line, then `i,q` rows). Repeat
    /// for several captures of the same echo.
    #[arg(long, required = true, value_name = "PATH")]
    pub capture: Vec<PathBuf>,
    /// Transmitted waveform JSON.
    #[arg(long, value_name = "PATH")]
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Link::TwoWay)]
    pub link: Link,
    /// Spline upsampling factor; 1 keeps the coarse peak.
    #[arg(long, default_value_t = 8)]
    pub factor: usize,
}

pub fn estimate(a: &EstimateArgs, g: &Globals) -> Result<(), Failure> {
    let spec: WaveformSpec = read_json(&a.spec)?;
    let captures = a
        .capture
        .iter()
        .map(|p| {
            let f = File::open(p).map_err(|e| Failure::Usage(format!("cannot open {}: {e}", p.display())))?;
            ComplexSignal::read_csv(BufReader::new(f)).map_err(usage)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let fs = captures[0].sample_rate;
    spec.validate_for(fs)?;
    let reference = generate(&spec, fs)?;
    let pulse_len = (spec.pulse_duration * fs).round() as usize;
    let config = PeakConfig::with_factor(a.factor);
    let est = estimate_from_captures(&captures, &reference, pulse_len, config, a.link.into())?;
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&mut w, &est)?,
        Format::Csv => write_csv(
            &mut w,
            &["delay_s", "range_m", "peak_magnitude", "interpolation_factor", "snr_db_est", "captures"],
            [vec![
                num(est.delay_s),
                num(est.range_m),
                num(est.peak_magnitude),
                est.interpolation_factor.to_string(),
                opt(est.snr_db_est),
                captures.len().to_string(),
            ]],
        )?,
    }
    Ok(w.flush()?)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Scenario JSON. Without it, runs the two-slave repeater sweep.
    #[arg(long, value_name = "PATH")]
    pub scenario: Option<PathBuf>,
    /// Captures per pair (per position for the sweep).
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Sweep only: waveform JSON shared by both slaves (pair step orders are applied).
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Sweep only: end-to-end pre-processing SNR, dB.
    #[arg(long, default_value_t = 30.0)]
    pub snr: f64,
    /// Sweep only: repeater positions.
    #[arg(long, default_value_t = 10)]
    pub positions: usize,
}

pub fn three_node_config(a: &SimulateArgs, seed: Option<u64>) -> Result<ThreeNodeConfig, Failure> {
    let mut c = ThreeNodeConfig {
        trials: a.trials,
        snr_pre_db: Some(a.snr),
        positions: a.positions,
        ..ThreeNodeConfig::default()
    };
    if let Some(path) = &a.spec {
        c.waveform = read_json(path)?;
    }
    if let Some(s) = seed {
        c.seed = s;
    }
    Ok(c)
}

pub fn simulate(a: &SimulateArgs, g: &Globals) -> Result<(), Failure> {
    let mut w = open(g.out.as_deref())?;
    let format = g.format.unwrap_or(Format::Csv);
    if let Some(path) = &a.scenario {
        let mut scenario: NodeScenario = read_json(path)?;
        if let Some(s) = g.seed {
            scenario.seed = s;
        }
        scenario.validate().map_err(usage)?;
        let sessions = (0..scenario.pairs.len())
            .map(|p| run_pair_session(&scenario, p, a.trials))
            .collect::<Result<Vec<_>, _>>()?;
        match format {
            Format::Json => write_json(&mut w, &sessions)?,
            Format::Csv => write_csv(
                &mut w,
                &["pair_id", "slave_id", "range_true_m", "range_est_m", "variance_m2", "snr_db_est"],
                sessions.iter().map(|s| {
                    let r = s.ranges();
                    vec![
                        s.pair_id.to_string(),
                        scenario.pairs[s.pair_id].slave_id.clone(),
                        num(s.true_range_m),
                        num(mean(&r)),
                        num(sample_variance(&r)),
                        opt(s.snr.as_ref().map(|x| x.snr_db)),
                    ]
                }),
            )?,
        }
    } else {
        let result = run_three_node_demo(&three_node_config(a, g.seed)?)?;
        match format {
            Format::Json => write_json(&mut w, &result)?,
            Format::Csv => crate::figures::sweep_csv(&mut w, &result)?,
        }
    }
    Ok(w.flush()?)
}

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloArgs {
    #[arg(long, default_value = "num_pulses", value_parser = ["num_pulses", "n", "snr"])]
    pub axis: String,
    /// Grid values; defaults to 1,2,4,8 pulses or 20:40:5 dB.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 300)]
    pub trials: usize,
    /// Total bandwidth, Hz.
    #[arg(long, default_value_t = 4e6)]
    pub bw: f64,
    /// Total on-time, s, split evenly over the pulses.
    #[arg(long, default_value_t = 500e-6)]
    pub tint: f64,
    /// Pre-processing SNR for a pulse-count sweep, dB.
    #[arg(long, default_value_t = 30.0)]
    pub snr: f64,
    /// Pulse count for an SNR sweep.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub duty: f64,
    #[arg(long, default_value_t = ranging::DEFAULT_SAMPLE_RATE)]
    pub fs: f64,
    /// True delay, s.
    #[arg(long, default_value_t = 4.002e-6)]
    pub delay: f64,
}

impl MonteCarloArgs {
    pub fn config(&self, seed: Option<u64>) -> Result<MonteCarloConfig, Failure> {
        let axis: SweepAxis = self.axis.parse().map_err(usage)?;
        let grid = match (&self.grid, axis) {
            (Some(s), _) => parse_grid(s)?,
            (None, SweepAxis::NumPulses) => vec![1.0, 2.0, 4.0, 8.0],
            (None, SweepAxis::Snr) => parse_grid("20:40:5")?,
        };
        let mut c = MonteCarloConfig::new(axis, grid, self.trials);
        c.base.total_bw = self.bw;
        c.base.integration_time = self.tint;
        c.base.snr_pre_db = self.snr;
        c.base.num_pulses = self.n;
        c.base.duty_cycle = self.duty;
        c.base.sample_rate = self.fs;
        c.base.true_delay_s = self.delay;
        c.master_seed = seed.unwrap_or(0);
        Ok(c)
    }
}

pub fn montecarlo(a: &MonteCarloArgs, g: &Globals) -> Result<(), Failure> {
    let result = monte_carlo_variance(&a.config(g.seed)?)?;
    let mut w = open(g.out.as_deref())?;
    match g.format.unwrap_or(Format::Csv) {
        Format::Json => write_json(&mut w, &result)?,
        Format::Csv => crate::figures::montecarlo_csv(&mut w, &result)?,
    }
    Ok(w.flush()?)
}
