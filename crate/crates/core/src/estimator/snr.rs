use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `L` captures of `N` complex samples each: the columns of `X` (`N×L`).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationMatrix {
    columns: Vec<Vec<Complex64>>,
}

impl ObservationMatrix {
    pub fn new(columns: Vec<Vec<Complex64>>) -> Result<Self> {
        let l = columns.len();
        if l < 2 {
            return Err(Error::Domain(format!("need at least 2 observations, got {l}")));
        }
        let n = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(Error::LengthMismatch(c.len(), n));
        }
        if n < l {
            return Err(Error::Domain(format!("{n} samples per observation is fewer than the {l} observations")));
        }
        Ok(Self { columns })
    }

    pub fn num_observations(&self) -> usize {
        self.columns.len()
    }

    pub fn num_samples(&self) -> usize {
        self.columns[0].len()
    }

    /// `(1/N)·XᴴX`, `L×L` Hermitian.
    pub fn covariance(&self) -> DMatrix<Complex64> {
        let l = self.num_observations();
        let n = self.num_samples() as f64;
        let mut r = DMatrix::<Complex64>::zeros(l, l);
        for i in 0..l {
            for j in i..l {
                let v: Complex64 =
                    self.columns[i].iter().zip(&self.columns[j]).map(|(a, b)| a.conj() * b).sum::<Complex64>() / n;
                r[(i, j)] = v;
                r[(j, i)] = v.conj();
            }
        }
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrEstimate {
    /// `+inf` when the noise eigenvalues vanish, `-inf` when no signal
    /// eigenvalue stands above them.
    pub snr_db: f64,
    pub signal_power: f64,
    pub noise_power: f64,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `λ₁/γ²` does not clear the largest eigenvalue expected from noise
    /// alone, `(1 + √(L/N))²`; the estimate is then unreliable.
    pub low_confidence: bool,
    pub diagnostic: Option<String>,
}

/// Subspace SNR estimate. The covariance eigenvalues are sorted
/// descending; the mean of `λ₂…λ_L` is the noise power `γ²`, and the
/// excess of `λ₁` over it, spread across the `L` captures, is the signal
/// power.
pub fn estimate_snr_eigen(x: &ObservationMatrix) -> Result<SnrEstimate> {
    let l = x.num_observations();
    let mut eig: Vec<f64> = x.covariance().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    let noise_power = eig[1..].iter().sum::<f64>() / (l - 1) as f64;
    let lambda1 = eig[0];
    let signal_power = (lambda1 - noise_power) / l as f64;
    let edge = (1.0 + (l as f64 / x.num_samples() as f64).sqrt()).powi(2);
    let mut diagnostic = None;
    let snr_db = if noise_power <= 0.0 {
        f64::INFINITY
    } else if signal_power <= 0.0 {
        diagnostic =
            Some(format!("largest eigenvalue {lambda1:.6e} does not exceed the noise level {noise_power:.6e}"));
        f64::NEG_INFINITY
    } else {
        10.0 * (signal_power / noise_power).log10()
    };
    let low_confidence = noise_power > 0.0 && lambda1 / noise_power < edge;
    if low_confidence && diagnostic.is_none() {
        diagnostic =
            Some(format!("λ₁/γ² = {:.4} is inside the noise-only range (edge {edge:.4})", lambda1 / noise_power));
    }
    Ok(SnrEstimate { snr_db, signal_power, noise_power, eigenvalues: eig, low_confidence, diagnostic })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        let c = vec![Complex64::new(1.0, 0.0); 8];
        assert!(ObservationMatrix::new(vec![c.clone()]).is_err());
        assert!(ObservationMatrix::new(vec![c.clone(), vec![Complex64::new(0.0, 0.0); 3]]).is_err());
        let short = vec![Complex64::new(1.0, 0.0); 2];
        assert!(ObservationMatrix::new(vec![short.clone(), short.clone(), short]).is_err());
    }

    #[test]
    fn covariance_is_hermitian() {
        let cols: Vec<Vec<Complex64>> =
            (0..3).map(|j| (0..5).map(|k| Complex64::new(k as f64 + j as f64, (k * j) as f64)).collect()).collect();
        let r = ObservationMatrix::new(cols).unwrap().covariance();
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(i, j)] - r[(j, i)].conj()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_rank_one_is_very_high_snr() {
        let s: Vec<Complex64> = (0..256).map(|k| Complex64::cis(0.1 * k as f64)).collect();
        let cols: Vec<Vec<Complex64>> =
            (0..8).map(|j| s.iter().map(|v| v * Complex64::cis(j as f64)).collect()).collect();
        let est = estimate_snr_eigen(&ObservationMatrix::new(cols).unwrap()).unwrap();
        assert!(est.snr_db > 60.0, "{}", est.snr_db);
        assert!((est.eigenvalues[0] - 8.0).abs() < 1e-9);
    }
}
