//! Sampled complex-baseband signals and their CSV form.
//!
//! The CSV layout is a `#` metadata line carrying the sample rate and time
//! origin, an `i,q` column header, then one sample per line. Floats are
//! written with 17 significant digits so a write/read cycle is lossless.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSignal {
    pub samples: Vec<Complex64>,
    /// Hz.
    pub sample_rate: f64,
    /// Time of the first sample, s.
    pub t0: f64,
}

impl ComplexSignal {
    pub fn new(samples: Vec<Complex64>, sample_rate: f64, t0: f64) -> Self {
        Self { samples, sample_rate, t0 }
    }

    pub fn zeros(len: usize, sample_rate: f64, t0: f64) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate, t0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        1.0 / self.sample_rate
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sample_rate
    }

    /// Time of sample `k`.
    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 / self.sample_rate
    }

    /// Energy Σ|s|²/fs.
    pub fn energy(&self) -> f64 {
        self.sum_sq() / self.sample_rate
    }

    /// Σ|s|² without the 1/fs factor.
    pub fn sum_sq(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).collect::<crate::stats::CompensatedSum>().value()
    }

    /// Mean power over the samples that are exactly nonzero, i.e. the
    /// pulse on-time power of a clean gated waveform.
    pub fn on_power(&self) -> f64 {
        let mut n = 0usize;
        let mut acc = crate::stats::CompensatedSum::new();
        for s in &self.samples {
            let p = s.norm_sqr();
            if p > 0.0 {
                n += 1;
                acc.add(p);
            }
        }
        if n == 0 {
            0.0
        } else {
            acc.value() / n as f64
        }
    }

    /// Number of exactly nonzero samples.
    pub fn on_samples(&self) -> usize {
        self.samples.iter().filter(|s| s.norm_sqr() > 0.0).count()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm()).collect()
    }

    pub fn scaled(mut self, gain: f64) -> Self {
        for s in &mut self.samples {
            *s *= gain;
        }
        self
    }

    /// Adds `other` sample-by-sample on this signal's time grid. Both must
    /// share the sample rate; the time origins must be an integer number of
    /// samples apart.
    pub fn add_aligned(&mut self, other: &ComplexSignal) -> Result<()> {
        if (self.sample_rate - other.sample_rate).abs() > 1e-9 * self.sample_rate {
            return Err(Error::SampleRateMismatch(self.sample_rate, other.sample_rate));
        }
        let offset = ((other.t0 - self.t0) * self.sample_rate).round() as i64;
        for (k, s) in other.samples.iter().enumerate() {
            let idx = offset + k as i64;
            if idx >= 0 && (idx as usize) < self.samples.len() {
                self.samples[idx as usize] += *s;
            }
        }
        Ok(())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# sample_rate={:.16e},t0={:.16e}", self.sample_rate, self.t0)?;
        writeln!(w, "i,q")?;
        for s in &self.samples {
            writeln!(w, "{:.16e},{:.16e}", s.re, s.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut sample_rate = None;
        let mut t0 = 0.0;
        let mut samples = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(meta) = line.strip_prefix('#') {
                for kv in meta.split(',') {
                    let mut it = kv.trim().splitn(2, '=');
                    let key = it.next().unwrap_or("").trim();
                    let val = it.next().unwrap_or("").trim();
                    match key {
                        "sample_rate" => sample_rate = Some(parse_f64(val, lineno)?),
                        "t0" => t0 = parse_f64(val, lineno)?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.eq_ignore_ascii_case("i,q") {
                continue;
            }
            let mut cols = line.split(',');
            let (Some(i), Some(q), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(Error::Parse(format!("line {}: expected two columns", lineno + 1)));
            };
            samples.push(Complex64::new(parse_f64(i.trim(), lineno)?, parse_f64(q.trim(), lineno)?));
        }
        let sample_rate = sample_rate.ok_or_else(|| Error::Parse("missing sample_rate metadata line".into()))?;
        if !(sample_rate > 0.0) {
            return Err(Error::Parse("sample_rate must be positive".into()));
        }
        Ok(Self::new(samples, sample_rate, t0))
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {s:?}: {e}", lineno + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_lossless() {
        let sig = ComplexSignal::new(
            vec![
                Complex64::new(0.1, -0.2),
                Complex64::new(1.0 / 3.0, std::f64::consts::PI),
                Complex64::new(-1e-300, 7.0),
            ],
            25e6,
            -1.25e-6,
        );
        let mut buf = Vec::new();
        sig.write_csv(&mut buf).unwrap();
        let back = ComplexSignal::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, sig);
    }

    #[test]
    fn csv_requires_sample_rate() {
        let err = ComplexSignal::read_csv("i,q\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
    }

    #[test]
    fn csv_rejects_extra_columns() {
        let text = "# sample_rate=1e6,t0=0\ni,q\n1,2,3\n";
        assert!(ComplexSignal::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn energy_of_unit_samples() {
        let sig = ComplexSignal::new(vec![Complex64::new(1.0, 0.0); 100], 1e3, 0.0);
        assert!((sig.energy() - 0.1).abs() < 1e-15);
        assert_eq!(sig.on_samples(), 100);
        assert!((sig.on_power() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn add_aligned_offsets_by_time_origin() {
        let mut a = ComplexSignal::zeros(5, 1.0, 0.0);
        let b = ComplexSignal::new(vec![Complex64::new(1.0, 0.0); 2], 1.0, 3.0);
        a.add_aligned(&b).unwrap();
        let re: Vec<f64> = a.samples.iter().map(|s| s.re).collect();
        assert_eq!(re, vec![0.0, 0.0, 0.0, 1.0, 1.0]);
    }
}
