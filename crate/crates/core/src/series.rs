//! Truncated Taylor series f_0 + f_1 z + … + f_N z^N.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub coeffs: Vec<Complex64>,
}

impl TaylorSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        TaylorSeries { coeffs }
    }
    pub fn from_real(c: &[f64]) -> Self {
        TaylorSeries { coeffs: c.iter().map(|&x| Complex64::new(x, 0.0)).collect() }
    }
    pub fn zero() -> Self {
        TaylorSeries { coeffs: vec![Complex64::new(0.0, 0.0)] }
    }
    /// z^k
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
        c[k] = Complex64::new(1.0, 0.0);
        TaylorSeries { coeffs: c }
    }

    /// Declared degree bound N (length − 1).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Index of the last nonzero coefficient, if any.
    pub fn effective_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    pub fn mul(&self, other: &TaylorSeries) -> TaylorSeries {
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TaylorSeries { coeffs: out }
    }

    /// z·f
    pub fn shift_up(&self) -> TaylorSeries {
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(Complex64::new(0.0, 0.0));
        c.extend_from_slice(&self.coeffs);
        TaylorSeries { coeffs: c }
    }

    pub fn truncate(&self, n: usize) -> TaylorSeries {
        TaylorSeries { coeffs: self.coeffs.iter().take(n + 1).copied().collect() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaylorFit {
    pub series: TaylorSeries,
    pub radius: f64,
    pub nodes: usize,
    /// r^{−N}·ε, the amplification of sampling error in f_N
    pub condition: f64,
}

/// Recover f_0..f_N from samples of f on |z| = r by the discrete Fourier
/// transform on 2^q ≥ 8(N+1) nodes.
pub fn taylor_of<F: Fn(Complex64) -> Complex64>(f: F, n: usize, r: f64) -> Result<TaylorFit> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Input("radius must lie in (0, 1)".into()));
    }
    let amp = r.powi(-(n as i32));
    if amp > 1e12 {
        return Err(Error::IllConditioned(amp));
    }
    let m = (8 * (n + 1)).next_power_of_two().max(64);
    let mut buf: Vec<Complex64> =
        (0..m).map(|j| f(Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / m as f64))).collect();
    if buf.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("evaluator returned a non-finite value on the sampling circle".into()));
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mut scale = 1.0 / m as f64;
    let mut coeffs = Vec::with_capacity(n + 1);
    for v in buf.iter().take(n + 1) {
        coeffs.push(v * scale);
        scale /= r;
    }
    Ok(TaylorFit { series: TaylorSeries::new(coeffs), radius: r, nodes: m, condition: amp * f64::EPSILON })
}
