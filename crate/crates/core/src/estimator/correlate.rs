use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::{ComplexSignal, Error, Result};

/// Full cross-correlation `y[l] = Σ_k r[k]·conj(ref[k − l])` computed by
/// fast convolution.
///
/// The output is a [`ComplexSignal`] over lag: sample `i` sits at lag
/// `time(i)` seconds, which already folds in the two inputs' time origins,
/// so a received copy delayed by `τ` peaks at `τ`.
pub fn matched_filter(received: &ComplexSignal, reference: &ComplexSignal) -> Result<ComplexSignal> {
    MatchedFilter::new(reference, received.len())?.apply(received)
}

/// Brute-force `O(n·m)` correlation with the same output layout as
/// [`matched_filter`]. Kept as a test oracle.
pub fn matched_filter_direct(received: &ComplexSignal, reference: &ComplexSignal) -> Result<ComplexSignal> {
    check_pair(received, reference)?;
    let (n, m) = (received.len(), reference.len());
    let out: Vec<Complex64> = (0..n + m - 1)
        .map(|i| {
            let lag = i as i64 - (m as i64 - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, r) in received.samples.iter().enumerate() {
                let j = k as i64 - lag;
                if j >= 0 && (j as usize) < m {
                    acc += r * reference.samples[j as usize].conj();
                }
            }
            acc
        })
        .collect();
    Ok(ComplexSignal::new(out, received.sample_rate, lag_origin(received, reference)))
}

fn lag_origin(received: &ComplexSignal, reference: &ComplexSignal) -> f64 {
    received.t0 - reference.t0 - (reference.len() as f64 - 1.0) / received.sample_rate
}

fn check_pair(received: &ComplexSignal, reference: &ComplexSignal) -> Result<()> {
    if received.is_empty() || reference.is_empty() {
        return Err(Error::Domain("matched filter inputs must be nonempty".into()));
    }
    let (a, b) = (received.sample_rate, reference.sample_rate);
    if (a - b).abs() > 1e-9 * a.abs().max(b.abs()) {
        return Err(Error::SampleRateMismatch(a, b));
    }
    Ok(())
}

/// A reference waveform with its conjugate spectrum precomputed for a fixed
/// received length, for repeated filtering of same-sized captures.
#[derive(Clone)]
pub struct MatchedFilter {
    reference: ComplexSignal,
    received_len: usize,
    ref_spectrum_conj: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for MatchedFilter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MatchedFilter")
            .field("reference_len", &self.reference.len())
            .field("received_len", &self.received_len)
            .field("fft_len", &self.ref_spectrum_conj.len())
            .finish()
    }
}

impl MatchedFilter {
    pub fn new(reference: &ComplexSignal, received_len: usize) -> Result<Self> {
        if reference.is_empty() || received_len == 0 {
            return Err(Error::Domain("matched filter inputs must be nonempty".into()));
        }
        let m = (received_len + reference.len() - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(m);
        let inv = planner.plan_fft_inverse(m);
        let mut spec = reference.samples.clone();
        spec.resize(m, Complex64::new(0.0, 0.0));
        fwd.process(&mut spec);
        let scale = 1.0 / m as f64;
        for v in &mut spec {
            *v = v.conj() * scale;
        }
        Ok(Self { reference: reference.clone(), received_len, ref_spectrum_conj: spec, fwd, inv })
    }

    pub fn reference(&self) -> &ComplexSignal {
        &self.reference
    }

    pub fn apply(&self, received: &ComplexSignal) -> Result<ComplexSignal> {
        check_pair(received, &self.reference)?;
        if received.len() != self.received_len {
            return Err(Error::LengthMismatch(received.len(), self.received_len));
        }
        let m = self.ref_spectrum_conj.len();
        let (n, r) = (received.len(), self.reference.len());
        let mut buf = received.samples.clone();
        buf.resize(m, Complex64::new(0.0, 0.0));
        self.fwd.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.ref_spectrum_conj) {
            *b *= s;
        }
        self.inv.process(&mut buf);
        // Circular index of lag l is l mod m; negative lags wrap to the tail.
        let mut out = Vec::with_capacity(n + r - 1);
        out.extend_from_slice(&buf[m - (r - 1)..]);
        out.extend_from_slice(&buf[..n]);
        Ok(ComplexSignal::new(out, received.sample_rate, lag_origin(received, &self.reference)))
    }
}
