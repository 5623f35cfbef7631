//! Weighted coefficient spaces H₂(M), H₂*(M), H₁*(M), the Cauchy pairing,
//! co-analytic Toeplitz action and rapid spectral decay.

use crate::error::{Error, Result};
use crate::moments::{moments_of_g, MomentSequence};
use crate::quad;
use crate::radial::RadialWeight;
use crate::series::TaylorSeries;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

fn check_degree(m: &MomentSequence, f: &TaylorSeries) -> Result<()> {
    let d = f.effective_degree().unwrap_or(0);
    if d > m.degree() {
        return Err(Error::DegreeMismatch { series: d, moments: m.degree() });
    }
    Ok(())
}

fn nonzero(f: &TaylorSeries) -> impl Iterator<Item = (usize, f64)> + '_ {
    f.coeffs.iter().enumerate().map(|(n, c)| (n, c.norm())).filter(|(_, a)| *a != 0.0)
}

/// (Σ M_n|f_n|²)^{1/2}
pub fn h2_norm(m: &MomentSequence, f: &TaylorSeries) -> Result<f64> {
    check_degree(m, f)?;
    Ok(nonzero(f).map(|(n, a)| m.values[n] * a * a).sum::<f64>().sqrt())
}

/// (Σ |f_n|²/M_n)^{1/2}
pub fn h2_star_norm(m: &MomentSequence, f: &TaylorSeries) -> Result<f64> {
    check_degree(m, f)?;
    Ok(nonzero(f).map(|(n, a)| a * a / m.values[n]).sum::<f64>().sqrt())
}

/// sup |f_n|/M_n
pub fn h1_star_norm(m: &MomentSequence, f: &TaylorSeries) -> Result<f64> {
    check_degree(m, f)?;
    Ok(nonzero(f).map(|(n, a)| a / m.values[n]).fold(0.0, f64::max))
}

/// ⟨f, g⟩ = Σ f_n·conj(g_n)
pub fn pairing(f: &TaylorSeries, g: &TaylorSeries) -> Complex64 {
    f.coeffs.iter().zip(&g.coeffs).map(|(a, b)| a * b.conj()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzResult {
    pub series: TaylorSeries,
    /// Σ|h_k| times the largest |f_m| among the last deg h + 1 coefficients
    pub tail_bound: f64,
}

/// (T_{h̄}f)_n = Σ_k conj(h_k) f_{n+k} for n = 0..=N_out.
pub fn toeplitz_coanalytic(h: &TaylorSeries, f: &TaylorSeries, n_out: usize) -> ToeplitzResult {
    let df = f.degree();
    let out =
        (0..=n_out).map(|n| h.coeffs.iter().enumerate().map(|(k, hk)| hk.conj() * f.coeff(n + k)).sum()).collect();
    let h1: f64 = h.coeffs.iter().map(|c| c.norm()).sum();
    let lo = df.saturating_sub(h.degree());
    let tail = f.coeffs[lo.min(df)..].iter().map(|c| c.norm()).fold(0.0, f64::max);
    ToeplitzResult { series: TaylorSeries::new(out), tail_bound: h1 * tail }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum RsdClass {
    Rsd,
    NotRsd,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsdVerdict {
    pub verdict: RsdClass,
    /// c of the fit −log E_n ≈ α + c√n + β log n, clamped at 0; ∞ for an all-zero tail
    pub fitted_c: f64,
    pub tail_window: [usize; 2],
    /// min over the window of −log|f_n|/√n
    pub min_proxy: f64,
    /// rms residual of the fit in log units
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RsdConfig {
    pub c_min: f64,
    pub min_window: usize,
    /// accepted rms residual: max(abs, rel·range of −log E_n)
    pub max_rms_abs: f64,
    pub max_rms_rel: f64,
}

impl Default for RsdConfig {
    fn default() -> Self {
        RsdConfig { c_min: 0.05, min_window: 16, max_rms_abs: 0.05, max_rms_rel: 0.02 }
    }
}

/// Default window: the top half of the available degrees.
pub fn default_window(f: &TaylorSeries) -> [usize; 2] {
    let d = f.degree();
    [d / 2, d]
}

pub fn rsd_classify(f: &TaylorSeries, window: [usize; 2], c_min: f64) -> Result<RsdVerdict> {
    rsd_classify_with(f, window, &RsdConfig { c_min, ..RsdConfig::default() })
}

pub fn rsd_classify_with(f: &TaylorSeries, window: [usize; 2], cfg: &RsdConfig) -> Result<RsdVerdict> {
    let [lo, hi] = window;
    if lo > hi || hi > f.degree() {
        return Err(Error::Input(format!("window [{lo}, {hi}] is not inside 0..={}", f.degree())));
    }
    let lo = lo.max(1);
    let abs: Vec<f64> = (lo..=hi).map(|n| f.coeff(n).norm()).collect();
    let min_proxy = abs
        .iter()
        .enumerate()
        .filter(|(_, a)| **a > 0.0)
        .map(|(i, a)| -a.ln() / ((lo + i) as f64).sqrt())
        .fold(f64::INFINITY, f64::min);
    let mut v =
        RsdVerdict { verdict: RsdClass::Inconclusive, fitted_c: 0.0, tail_window: [lo, hi], min_proxy, residual: 0.0 };
    if abs.iter().all(|a| *a == 0.0) {
        v.verdict = RsdClass::Rsd;
        v.fitted_c = f64::INFINITY;
        return Ok(v);
    }
    if hi + 1 - lo < cfg.min_window {
        return Ok(v);
    }
    // tail-sup envelope E_n = max_{n ≤ m ≤ hi} |f_m|
    let mut env = abs.clone();
    for i in (0..env.len() - 1).rev() {
        env[i] = env[i].max(env[i + 1]);
    }
    let pts: Vec<(f64, f64)> =
        env.iter().enumerate().filter(|(_, e)| **e > 0.0).map(|(i, e)| ((lo + i) as f64, -e.ln())).collect();
    let (c, rms) = fit_sqrt_log(&pts);
    let (ymin, ymax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    let allowed = cfg.max_rms_abs.max(cfg.max_rms_rel * (ymax - ymin));
    v.fitted_c = c.max(0.0);
    v.residual = rms;
    v.verdict = if c >= cfg.c_min && rms <= allowed { RsdClass::Rsd } else { RsdClass::NotRsd };
    Ok(v)
}

/// Least squares y ≈ α + c√n + β log n; returns (c, rms residual).
fn fit_sqrt_log(pts: &[(f64, f64)]) -> (f64, f64) {
    let basis = |n: f64| [1.0, n.sqrt(), n.ln()];
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for &(n, y) in pts {
        let phi = basis(n);
        for i in 0..3 {
            b[i] += phi[i] * y;
            for j in 0..3 {
                a[i][j] += phi[i] * phi[j];
            }
        }
    }
    let x = solve3(a, b);
    let ss: f64 = pts
        .iter()
        .map(|&(n, y)| {
            let phi = basis(n);
            let r = y - (x[0] * phi[0] + x[1] * phi[1] + x[2] * phi[2]);
            r * r
        })
        .sum();
    (x[1], (ss / pts.len() as f64).sqrt())
}

/// Gaussian elimination with partial pivoting on a 3×3 system.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let p = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..3 {
            let f = a[r][col] / a[col][col];
            let pivot = a[col];
            for (x, y) in a[r].iter_mut().zip(pivot).skip(col) {
                *x -= f * y;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormIdentity {
    pub quadrature: f64,
    pub coefficient_sum: f64,
    pub relative_error: f64,
}

/// ∫_𝔻 |f|² G(1 − |z|) dA/π by polar quadrature against Σ M_n|f_n|².
pub fn norm_identity_check(g: &RadialWeight, f: &TaylorSeries) -> Result<NormIdentity> {
    g.validate()?;
    let d = f.degree();
    let m = moments_of_g(g, d)?;
    let sum = h2_norm(&m, f)?.powi(2);
    // trapezoid in θ is exact for |f|² once there are more than 2d nodes
    let nt = (2 * d + 2).max(16);
    let ring = |r: f64| -> f64 {
        (0..nt).map(|j| f.eval(Complex64::from_polar(r, TAU * j as f64 / nt as f64)).norm_sqr()).sum::<f64>()
            / nt as f64
    };
    // u = 1 − r; dA/π = 2r dr dθ/2π
    let integrand = |u: f64| {
        let gv = g.g(u);
        if gv == 0.0 {
            0.0
        } else {
            2.0 * (1.0 - u) * gv * ring(1.0 - u)
        }
    };
    let mut breaks = vec![0.0];
    breaks.extend((0..=40).map(|k| 0.5f64.powi(40 - k)));
    let e = quad::integrate_pieces(&integrand, &breaks, 0.0, 1e-12, 20_000);
    let rel = if sum > 0.0 { (e.value - sum).abs() / sum } else { e.value.abs() };
    Ok(NormIdentity { quadrature: e.value, coefficient_sum: sum, relative_error: rel })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub p: f64,
    pub supported: bool,
    pub samples: usize,
    /// (Σ M_n^{2p−1})^{1/2}
    pub sum_bound: f64,
    /// max of ‖f‖_{H₂*(M)}/sum_bound over samples with ‖f‖_{H₁*(M^p)} = 1
    pub max_ratio_upper: f64,
    /// max of ‖f‖_{H₁*(M^{1/2})}/‖f‖_{H₂*(M)}
    pub max_ratio_lower: f64,
    pub holds: bool,
}

/// Random checks of H₁*(M^p) ⊂ H₂*(M) ⊂ H₁*(M^{1/2}).
pub fn embedding_check(m: &MomentSequence, p: f64, samples: usize, seed: u64) -> Result<EmbeddingReport> {
    let mut rep = EmbeddingReport {
        p,
        supported: p > 0.5,
        samples,
        sum_bound: f64::NAN,
        max_ratio_upper: f64::NAN,
        max_ratio_lower: f64::NAN,
        holds: false,
    };
    if !rep.supported {
        return Ok(rep);
    }
    let mp = m.powf(p)?;
    let mh = m.powf(0.5)?;
    rep.sum_bound = m.values.iter().map(|v| v.powf(2.0 * p - 1.0)).sum::<f64>().sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = m.len();
    let (mut up, mut low) = (0.0f64, 0.0f64);
    for s in 0..samples {
        let mut u: Vec<Complex64> =
            (0..n).map(|_| Complex64::from_polar(rng.random::<f64>(), TAU * rng.random::<f64>())).collect();
        // the first n samples are unit vectors, the rest random
        if s < n.min(samples / 2) {
            u = vec![Complex64::new(0.0, 0.0); n];
            u[s] = Complex64::new(1.0, 0.0);
        }
        let f = TaylorSeries::new(u.iter().zip(&mp.values).map(|(x, w)| x * w).collect());
        let scale = h1_star_norm(&mp, &f)?;
        if scale == 0.0 {
            continue;
        }
        let f = TaylorSeries::new(f.coeffs.iter().map(|c| c / scale).collect());
        let h2 = h2_star_norm(m, &f)?;
        up = up.max(h2 / rep.sum_bound);
        low = low.max(h1_star_norm(&mh, &f)? / h2);
    }
    rep.max_ratio_upper = up;
    rep.max_ratio_lower = low;
    rep.holds = up <= 1.0 + 1e-12 && low <= 1.0 + 1e-12;
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::CircleMeasure;
    use crate::series::taylor_of;
    use crate::transforms::{singular_inner, DiskPoint};

    fn linear_moments(n: usize) -> MomentSequence {
        MomentSequence::explicit((0..=n).map(|k| 1.0 / ((k as f64 + 1.0) * (2.0 * k as f64 + 3.0))).collect()).unwrap()
    }

    #[test]
    fn norms() {
        let m = linear_moments(10);
        let f = TaylorSeries::monomial(3);
        assert!((h2_norm(&m, &f).unwrap() - m.values[3].sqrt()).abs() < 1e-15);
        assert!((h2_star_norm(&m, &f).unwrap() - 1.0 / m.values[3].sqrt()).abs() < 1e-12);
        assert!((h1_star_norm(&m, &f).unwrap() - 1.0 / m.values[3]).abs() < 1e-12);
        assert_eq!(h2_norm(&m, &TaylorSeries::zero()).unwrap(), 0.0);
        let f = TaylorSeries::from_real(&[1.0, 1.0]);
        assert!((h2_norm(&m, &f).unwrap() - (1.0f64 / 3.0 + 0.1).sqrt()).abs() < 1e-15);
        let f = TaylorSeries::from_real(&m.values);
        assert!((h1_star_norm(&m, &f).unwrap() - 1.0).abs() < 1e-15);
        let s: f64 = m.values.iter().sum();
        assert!((h2_star_norm(&m, &f).unwrap().powi(2) - s).abs() < 1e-14);
        assert!(matches!(h2_norm(&m, &TaylorSeries::monomial(11)), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn pairing_and_toeplitz() {
        let one = TaylorSeries::from_real(&[1.0]);
        assert_eq!(pairing(&one, &one), Complex64::new(1.0, 0.0));
        assert_eq!(pairing(&TaylorSeries::monomial(1), &one), Complex64::new(0.0, 0.0));
        let f = TaylorSeries::from_real(&[1.0, 2.0]);
        assert_eq!(toeplitz_coanalytic(&one, &f, 1).series, f);
        let r = toeplitz_coanalytic(&TaylorSeries::monomial(1), &f, 0).series;
        assert_eq!(r.coeffs, vec![Complex64::new(2.0, 0.0)]);
        let ones = TaylorSeries::from_real(&[1.0; 20]);
        let r = toeplitz_coanalytic(&TaylorSeries::monomial(1), &ones, 18).series;
        assert!(r.coeffs.iter().all(|c| *c == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rsd_examples() {
        let model = TaylorSeries::from_real(&(0..=256).map(|n| (-2.0 * (n as f64).sqrt()).exp()).collect::<Vec<_>>());
        let v = rsd_classify(&model, [64, 256], 0.05).unwrap();
        assert_eq!(v.verdict, RsdClass::Rsd);
        assert!((v.fitted_c - 2.0).abs() < 1e-6);
        let poly = TaylorSeries::from_real(&(0..=256).map(|n| 1.0 / ((n as f64 + 1.0).powi(2))).collect::<Vec<_>>());
        assert_eq!(rsd_classify(&poly, [64, 256], 0.05).unwrap().verdict, RsdClass::NotRsd);
        let exp = TaylorSeries::from_real(&(0..=256).map(|n| (-(n as f64)).exp()).collect::<Vec<_>>());
        assert_eq!(rsd_classify(&exp, [64, 256], 0.05).unwrap().verdict, RsdClass::Rsd);
        let zero = TaylorSeries::from_real(&[1.0, 0.0, 0.0, 0.0]);
        let v = rsd_classify(&zero, [2, 3], 0.05).unwrap();
        assert_eq!(v.verdict, RsdClass::Rsd);
        assert!(v.fitted_c.is_infinite());
        assert_eq!(rsd_classify(&poly, [250, 256], 0.05).unwrap().verdict, RsdClass::Inconclusive);
    }

    #[test]
    fn rsd_singular_inner_is_not_rsd() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        let s = |z: Complex64| singular_inner(&d0, DiskPoint::from_complex(z).unwrap()).unwrap();
        let fit = taylor_of(s, 512, 0.97).unwrap();
        let v = rsd_classify(&fit.series, [128, 512], 0.05).unwrap();
        assert_eq!(v.verdict, RsdClass::NotRsd, "{v:?}");
    }

    #[test]
    fn rsd_closed_under_toeplitz() {
        let model = TaylorSeries::from_real(&(0..=300).map(|n| (-2.0 * (n as f64).sqrt()).exp()).collect::<Vec<_>>());
        let h = TaylorSeries::from_real(&[1.0, -0.5, 0.25]);
        let t = toeplitz_coanalytic(&h, &model, 256).series;
        assert_eq!(rsd_classify(&t, [64, 256], 0.05).unwrap().verdict, RsdClass::Rsd);
    }

    #[test]
    fn norm_identity() {
        let r = norm_identity_check(&RadialWeight::Linear, &TaylorSeries::from_real(&[1.0])).unwrap();
        assert!((r.quadrature - 1.0 / 3.0).abs() < 1e-12 && r.relative_error <= 1e-9);
        let f = TaylorSeries::from_real(&[1.0, 0.0, 3.0, 0.0, 0.0, 1.0]);
        assert!(norm_identity_check(&RadialWeight::t1(1.0, 1.0), &f).unwrap().relative_error <= 1e-6);
        for g in [RadialWeight::t1(2.0, 0.5), RadialWeight::t2(0.5, 1.0), RadialWeight::Linear] {
            let r = norm_identity_check(&g, &TaylorSeries::monomial(7)).unwrap();
            assert!(r.relative_error <= 1e-6, "{g:?} {r:?}");
        }
    }

    #[test]
    fn embeddings() {
        let m = moments_of_g(&RadialWeight::t1(1.0, 1.0), 40).unwrap();
        let r = embedding_check(&m, 1.0, 100, 7).unwrap();
        assert!(r.holds, "{r:?}");
        assert!((r.max_ratio_lower - 1.0).abs() < 1e-12);
        let r = embedding_check(&m, 0.5, 10, 7).unwrap();
        assert!(!r.supported && !r.holds);
    }
}
