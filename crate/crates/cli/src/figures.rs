//! Canned data series: ambiguity surfaces, matched-filter cuts, bound
//! curves, variance studies and the repeater sweep, written into one
//! directory with a manifest.

use std::io::Write;
use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};

use ranging::ambiguity::{ambiguity_analytic, ambiguity_numeric, default_grid, notch_report, LobeStatus};
use ranging::bounds::{crlb_limits, crlb_ttsfw, crlb_ttsfw_centered, scalability_params, NoiseSpec};
use ranging::estimator::matched_filter;
use ranging::simulator::{
    monte_carlo_variance, run_three_node_demo, MonteCarloConfig, MonteCarloResult, SweepAxis, ThreeNodeConfig,
    ThreeNodeResult,
};
use ranging::waveforms::generate;
use ranging::{WaveformSpec, DEFAULT_SAMPLE_RATE};

use crate::output::{num, open, opt, write_csv, write_json};
use crate::{Failure, Globals};

#[derive(Args, Serialize, Deserialize, Debug, Clone)]
#[serde(deny_unknown_fields)]
pub struct FiguresArgs {
    /// Monte Carlo trials per grid point.
    #[arg(long, default_value_t = 300)]
    pub trials: usize,
    /// Captures per repeater position in the sweep.
    #[arg(long, default_value_t = 100)]
    pub sweep_trials: usize,
}

#[derive(Serialize)]
struct Entry {
    file: String,
    description: String,
}

pub fn montecarlo_csv(w: &mut dyn Write, r: &MonteCarloResult) -> Result<(), Failure> {
    write_csv(
        w,
        &[
            "x",
            "variance_sim",
            "variance_crlb",
            "variance_crlb_centered",
            "rmse_s",
            "mean_error_s",
            "num_pulses",
            "snr_pre_db",
            "snr_post_db",
        ],
        r.points.iter().map(|p| {
            vec![
                num(p.x),
                num(p.variance_sim),
                num(p.variance_crlb),
                num(p.variance_crlb_centered),
                num(p.rmse),
                num(p.mean_error),
                p.num_pulses.to_string(),
                num(p.snr_pre_db),
                num(p.snr_post_db),
            ]
        }),
    )
}

pub fn sweep_csv(w: &mut dyn Write, r: &ThreeNodeResult) -> Result<(), Failure> {
    write_csv(
        w,
        &[
            "slave",
            "position_index",
            "position_m",
            "range_true_m",
            "range_est_m",
            "range_calibrated_m",
            "variance_m2",
            "snr_db_est",
        ],
        r.rows.iter().map(|row| {
            vec![
                row.slave.clone(),
                row.position_index.to_string(),
                num(row.position_m),
                num(row.range_true_m),
                num(row.range_est_m),
                num(row.range_calibrated_m),
                num(row.variance_m2),
                opt(row.snr_db_est),
            ]
        }),
    )
}

struct Writer<'a> {
    dir: &'a Path,
    entries: Vec<Entry>,
}

impl Writer<'_> {
    fn file(
        &mut self,
        name: &str,
        description: &str,
        body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
    ) -> Result<(), Failure> {
        let mut w = open(Some(&self.dir.join(name)))?;
        body(&mut w)?;
        w.flush()?;
        self.entries.push(Entry { file: name.into(), description: description.into() });
        Ok(())
    }
}

/// Normalized zero-Doppler matched-filter magnitude at every sample lag in
/// `[0, T]`, numeric and analytic side by side.
fn mf_cut(w: &mut dyn Write, specs: &[(&str, WaveformSpec)], fs: f64) -> Result<(), Failure> {
    let t = specs[0].1.pulse_duration;
    let lags = (t * fs).round() as usize;
    let delays: Vec<f64> = (0..=lags).map(|k| k as f64 / fs).collect();
    let mut columns = Vec::new();
    let mut header = vec!["delay_s".to_string()];
    for (name, spec) in specs {
        let sig = generate(spec, fs)?;
        let mf = matched_filter(&sig, &sig)?;
        let zero = sig.len() - 1;
        let e = sig.sum_sq();
        columns.push((0..=lags).map(|k| mf.samples[zero + k].norm() / e).collect::<Vec<_>>());
        let ana = ambiguity_analytic(spec, &delays, &[0.0])?;
        columns.push(ana.magnitude[0].clone());
        header.push(format!("{name}_numeric"));
        header.push(format!("{name}_analytic"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(
        w,
        &header,
        (0..=lags).map(|k| std::iter::once(num(delays[k])).chain(columns.iter().map(|c| num(c[k]))).collect()),
    )
}

pub fn run(a: &FiguresArgs, g: &Globals) -> Result<(), Failure> {
    let dir = g.out.as_deref().ok_or_else(|| Failure::Usage("figures needs --out <directory>".into()))?;
    std::fs::create_dir_all(dir)?;
    let seed = g.seed.unwrap_or(0);
    let fs = DEFAULT_SAMPLE_RATE;
    let mut out = Writer { dir, entries: Vec::new() };

    let pttw = WaveformSpec::pttw(-2e6, 2e6, 50e-6);
    let ttsfw4 = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 50e-6);
    let ttsfw2 = WaveformSpec::ttsfw_centered(4e6, 2e6, 2, 50e-6);

    for (name, spec, what) in [
        ("ambiguity_pttw.csv", &pttw, "PTTW, 4 MHz tone separation, 50 us pulse"),
        ("ambiguity_ttsfw_n4.csv", &ttsfw4, "TTSFW, N=4, 4 MHz tone separation, 1 MHz steps, 50 us pulses"),
    ] {
        let (delays, dopplers) = default_grid(spec);
        let surface = ambiguity_numeric(&generate(spec, fs)?, &delays, &dopplers)?;
        out.file(name, &format!("Sampled ambiguity surface |AF|(delay, Doppler): {what}"), |w| {
            surface.write_csv(w).map_err(Into::into)
        })?;
    }

    out.file(
        "matched_filter_pttw_vs_ttsfw_n2.csv",
        "Zero-Doppler matched-filter magnitude over one pulse: PTTW against two-pulse TTSFW (alternate lobes notched)",
        |w| mf_cut(w, &[("pttw", pttw.clone()), ("ttsfw_n2", ttsfw2.clone())], fs),
    )?;
    out.file(
        "matched_filter_ttsfw_n4.csv",
        "Zero-Doppler matched-filter magnitude over one pulse: four-pulse TTSFW (three of every four lobes notched)",
        |w| mf_cut(w, &[("ttsfw_n4", ttsfw4.clone())], fs),
    )?;
    out.file(
        "notch_report_ttsfw_n4.csv",
        "Tone-lobe positions k/delta_f of the four-pulse TTSFW and whether each survives",
        |w| {
            let lobes = notch_report(&ttsfw4)?;
            write_csv(
                w,
                &["k", "delay_s", "status", "magnitude"],
                lobes.iter().map(|l| {
                    let status = match l.status {
                        LobeStatus::Retained => "retained",
                        LobeStatus::Notched => "notched",
                    };
                    vec![l.index.to_string(), num(l.delay), status.into(), num(l.magnitude)]
                }),
            )
        },
    )?;

    out.file(
        "crlb_vs_num_pulses.csv",
        "Delay-variance bound of the scaled TTSFW, 4 MHz total bandwidth, 500 us on-time, 30 dB pre-SNR, with LFM-equivalent limits",
        |w| {
            let noise = NoiseSpec::new(30.0, fs, 500e-6);
            let (t1, t2) = crlb_limits(4e6)?;
            let rows = [1usize, 2, 3, 4, 6, 8, 12, 16, 32, 64, 128, 256, 512, 1000]
                .into_iter()
                .map(|n| {
                    let (step, pulse) = scalability_params(4e6, n);
                    let lit = crlb_ttsfw(n, pulse, step, noise)?;
                    let cen = crlb_ttsfw_centered(n, pulse, step, noise)?;
                    Ok(vec![
                        n.to_string(),
                        num(lit.mean_square_bandwidth),
                        num(lit.variance_bound),
                        num(cen.variance_bound),
                        num(t1 + t2),
                    ])
                })
                .collect::<Result<Vec<_>, Failure>>()?;
            write_csv(w, &["N", "msbw", "variance_crlb", "variance_crlb_centered", "msbw_limit"], rows)
        },
    )?;

    let mut mc = MonteCarloConfig::new(SweepAxis::NumPulses, vec![1.0, 2.0, 4.0, 8.0], a.trials);
    mc.master_seed = seed;
    let r = monte_carlo_variance(&mc)?;
    out.file(
        "variance_vs_num_pulses.csv",
        "Simulated delay variance against the bound over pulse count: 4 MHz, 500 us on-time, 25 MHz sampling, 30 dB",
        |w| montecarlo_csv(w, &r),
    )?;
    let mut mc = MonteCarloConfig::new(SweepAxis::Snr, vec![20.0, 25.0, 30.0, 35.0, 40.0], a.trials);
    mc.master_seed = seed;
    let r = monte_carlo_variance(&mc)?;
    out.file(
        "variance_vs_snr.csv",
        "Simulated delay variance against the bound over pre-processing SNR, four pulses",
        |w| montecarlo_csv(w, &r),
    )?;

    let sweep = ThreeNodeConfig { trials: a.sweep_trials, seed, ..ThreeNodeConfig::default() };
    let r = run_three_node_demo(&sweep)?;
    out.file(
        "three_node_sweep.csv",
        "Two slaves ranging a repeater moved in 10 inch steps from 15 ft: estimated, true and calibrated range with per-position variance",
        |w| sweep_csv(w, &r),
    )?;
    out.file(
        "three_node_summary.csv",
        "Per-slave calibration offset and calibrated RMSE of the repeater sweep",
        |w| {
            write_csv(
                w,
                &["slave", "calibration_offset_m", "rmse_calibrated_m", "mean_residual_m"],
                r.summaries.iter().map(|s| {
                    vec![s.slave.clone(), num(s.calibration_offset_m), num(s.rmse_calibrated_m), num(s.mean_residual_m)]
                }),
            )
        },
    )?;

    let mut w = open(Some(&dir.join("manifest.json")))?;
    write_json(
        &mut w,
        &serde_json::json!({
            "seed": seed,
            "trials": a.trials,
            "sweep_trials": a.sweep_trials,
            "sample_rate_hz": fs,
            "files": out.entries,
        }),
    )?;
    Ok(w.flush()?)
}
