use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ranging::estimator::{estimate_delay, matched_filter, matched_filter_direct, MatchedFilter, PeakConfig};
use ranging::simulator::{
    add_noise, apply_channel, noise_variance, propagate, trial_rng, Channel, LinkModel, DELAY_TAPS,
};
use ranging::stats::{mean, sample_variance};
use ranging::waveforms::{generate, WaveformSpec};
use ranging::{ComplexSignal, LinkType};

const FS: f64 = 25e6;

fn ttsfw(n: usize, t: f64) -> ComplexSignal {
    generate(&WaveformSpec::ttsfw_scaled(4e6, n, t), FS).unwrap()
}

fn delayed(tx: &ComplexSignal, samples: f64) -> ComplexSignal {
    let len = tx.len() + samples.ceil() as usize + DELAY_TAPS;
    let ch = Channel { delay_s: samples / FS, amplitude: 1.0, doppler_hz: 0.0 };
    apply_channel(tx, &ch, len).unwrap()
}

#[test]
fn fft_correlation_matches_direct_sum() {
    let tx = ttsfw(2, 4e-6);
    let rx = delayed(&tx, 40.0);
    let fast = matched_filter(&rx, &tx).unwrap();
    let slow = matched_filter_direct(&rx, &tx).unwrap();
    assert_eq!(fast.len(), slow.len());
    assert_eq!(fast.t0, slow.t0);
    let scale = slow.magnitudes().into_iter().fold(0.0, f64::max);
    for (a, b) in fast.samples.iter().zip(&slow.samples) {
        assert!((a - b).norm() < 1e-9 * scale);
    }
    let mags = fast.magnitudes();
    let k = (0..mags.len()).max_by(|&i, &j| mags[i].total_cmp(&mags[j])).unwrap();
    assert!((fast.time(k) - 40.0 / FS).abs() < 1e-15);
}

#[test]
fn estimate_is_scale_invariant() {
    let tx = ttsfw(4, 8e-6);
    let rx = delayed(&tx, 37.41);
    let filter = MatchedFilter::new(&tx, rx.len()).unwrap();
    let a = estimate_delay(&rx, &filter, PeakConfig::default()).unwrap();
    let b = estimate_delay(&rx.clone().scaled(1e-3), &filter, PeakConfig::default()).unwrap();
    assert!((a.delay_s - b.delay_s).abs() < 1e-15);
    assert!((b.peak_magnitude / a.peak_magnitude - 1e-3).abs() < 1e-12);
}

#[test]
fn integer_shift_moves_estimate_by_same_amount() {
    let tx = ttsfw(4, 8e-6);
    let base = delayed(&tx, 20.3);
    let mut samples = vec![Complex64::new(0.0, 0.0); 7];
    samples.extend_from_slice(&base.samples);
    let shifted = ComplexSignal::new(samples, FS, 0.0);
    let a = estimate_delay(&base, &MatchedFilter::new(&tx, base.len()).unwrap(), PeakConfig::default()).unwrap();
    let b = estimate_delay(&shifted, &MatchedFilter::new(&tx, shifted.len()).unwrap(), PeakConfig::default()).unwrap();
    assert!((b.delay_s - a.delay_s - 7.0 / FS).abs() < 1e-13);
}

#[test]
fn fractional_delay_recovered_at_30_db_post_snr() {
    let tx = ttsfw(4, 10e-6);
    let rx = delayed(&tx, 13.3);
    let filter = MatchedFilter::new(&tx, rx.len()).unwrap();
    let post_gain_db = 10.0 * (tx.on_samples() as f64).log10();
    let sigma2 = noise_variance(tx.on_power(), 30.0 - post_gain_db);
    for seed in 0..20 {
        let mut noisy = rx.clone();
        add_noise(&mut noisy, sigma2, &mut ChaCha8Rng::seed_from_u64(seed));
        let est = estimate_delay(&noisy, &filter, PeakConfig::default()).unwrap();
        let err = (est.delay_s * FS - 13.3).abs();
        assert!(err <= 0.15, "seed {seed}: {err} samples");
    }
}

#[test]
fn estimator_is_nearly_unbiased() {
    let tx = ttsfw(4, 10e-6);
    let rx = delayed(&tx, 100.05);
    let filter = MatchedFilter::new(&tx, rx.len()).unwrap();
    let sigma2 = noise_variance(tx.on_power(), 10.0);
    let errs: Vec<f64> = (0..500)
        .map(|t| {
            let mut noisy = rx.clone();
            add_noise(&mut noisy, sigma2, &mut trial_rng(3, 0, t));
            estimate_delay(&noisy, &filter, PeakConfig::default()).unwrap().delay_s * FS - 100.05
        })
        .collect();
    let m = mean(&errs);
    let se = (sample_variance(&errs) / errs.len() as f64).sqrt();
    // Residual spline bias is a few thousandths of a sample.
    assert!(m.abs() < 3.0 * se + 0.01, "bias {m} samples, se {se}");
}

/// Fraction of trials whose estimate lands more than half a lobe spacing away.
fn outlier_rate(spec: &WaveformSpec, snr_db: f64) -> f64 {
    let tx = generate(spec, FS).unwrap();
    let rx = delayed(&tx, 60.2);
    let filter = MatchedFilter::new(&tx, rx.len()).unwrap();
    let sigma2 = noise_variance(tx.on_power(), snr_db);
    let half_lobe = 0.5 / spec.pulse_bandwidth();
    let bad = (0..300)
        .filter(|&t| {
            let mut noisy = rx.clone();
            add_noise(&mut noisy, sigma2, &mut trial_rng(5, 0, t));
            let est = estimate_delay(&noisy, &filter, PeakConfig::with_factor(1)).unwrap();
            (est.delay_s - 60.2 / FS).abs() > half_lobe
        })
        .count();
    bad as f64 / 300.0
}

#[test]
fn notches_suppress_lobe_ambiguity() {
    // Same tone separation and total on-time; only the stepping differs.
    let pttw = WaveformSpec::pttw(-2e6, 2e6, 40e-6);
    let ttsfw = WaveformSpec::ttsfw_centered(4e6, 1e6, 4, 10e-6);
    let snr = -18.0;
    let p = outlier_rate(&pttw, snr);
    let t = outlier_rate(&ttsfw, snr);
    assert!(p > 0.2, "PTTW outlier rate {p}");
    assert!(t < p / 2.0, "TTSFW {t} vs PTTW {p}");
}

#[test]
fn propagate_then_estimate_recovers_range() {
    let tx = ttsfw(4, 20e-6);
    let mut link = LinkModel::new(12.5, 4, Some(20.0));
    link.rng_seed = 9;
    let rx = propagate(&tx, &link).unwrap();
    let filter = MatchedFilter::new(&tx, rx.len()).unwrap();
    let est = estimate_delay(&rx, &filter, PeakConfig::default()).unwrap();
    let range = LinkType::TwoWay.delay_to_range(est.delay_s);
    assert_eq!(link.link_type(), LinkType::TwoWay);
    assert!((range - 12.5).abs() < 0.05, "{range}");
}
