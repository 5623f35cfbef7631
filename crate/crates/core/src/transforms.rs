//! Cauchy, Poisson and Herglotz integrals; inner, outer and Blaschke factors;
//! the Clark map ν ↦ b; symbols b of de Branges–Rovnyak spaces.

use crate::circle::{normalize, ArcSet};
use crate::error::{Error, Result};
use crate::measure::{CircleMeasure, DEFAULT_DEPTH};
use crate::quad;
use crate::series::TaylorSeries;
use crate::weight::{LogConfig, LogIntegral, Weight};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub use crate::series::{taylor_of, TaylorFit};

const TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskPoint {
    pub re: f64,
    pub im: f64,
}

impl DiskPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let r = re.hypot(im);
        if !(r <= 1.0 - 1e-12) {
            return Err(Error::Input(format!("point ({re}, {im}) is not inside the disk |z| ≤ 1 − 1e-12")));
        }
        Ok(DiskPoint { re, im })
    }
    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }
    pub fn polar(r: f64, theta: f64) -> Result<Self> {
        Self::from_complex(Complex64::from_polar(r, theta))
    }
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// Breakpoints concentrating quadrature where the Poisson kernel at z peaks.
pub(crate) fn peak_breaks(z: Complex64) -> Vec<f64> {
    let r = z.norm();
    if r < 0.5 {
        return vec![];
    }
    let c = z.arg();
    let w = 1.0 - r;
    let mut out = vec![normalize(c)];
    for k in [1.0, 4.0, 16.0, 64.0] {
        if k * w < 1.0 {
            out.push(normalize(c - k * w));
            out.push(normalize(c + k * w));
        }
    }
    out
}

fn integrate_kernel<K: Fn(f64) -> Complex64>(nu: &CircleMeasure, z: Complex64, k: K) -> Result<Complex64> {
    let (v, _) = nu.integrate_with_breaks(&k, DEFAULT_DEPTH, TOL, &peak_breaks(z))?;
    Ok(v)
}

/// C_ν(z) = ∫ dν(x)/(1 − x̄z).
pub fn cauchy_transform(nu: &CircleMeasure, z: DiskPoint) -> Result<Complex64> {
    let z = z.z();
    integrate_kernel(nu, z, |t| 1.0 / (1.0 - Complex64::from_polar(1.0, -t) * z))
}

/// ν_n = ∫ e^{−inθ} dν for n = 0..=N.
pub fn cauchy_coefficients(nu: &CircleMeasure, n: usize) -> Result<TaylorSeries> {
    Ok(TaylorSeries::new(nu.coefficients(n)?))
}

/// ∫ (1 − |z|²)/|x − z|² dν(x).
pub fn poisson_integral(nu: &CircleMeasure, z: DiskPoint) -> Result<Complex64> {
    let z = z.z();
    let a = 1.0 - z.norm_sqr();
    integrate_kernel(nu, z, |t| Complex64::new(a / (Complex64::from_polar(1.0, t) - z).norm_sqr(), 0.0))
}

/// ∫ (x + z)/(x − z) dν(x).
pub fn herglotz_integral(nu: &CircleMeasure, z: DiskPoint) -> Result<Complex64> {
    let z = z.z();
    integrate_kernel(nu, z, |t| {
        let x = Complex64::from_polar(1.0, t);
        (x + z) / (x - z)
    })
}

/// Euclidean distance from z to the closed support of the singular part.
fn distance_to_singular_support(nu: &CircleMeasure, z: Complex64) -> f64 {
    let mut d = f64::INFINITY;
    for a in &nu.atoms {
        d = d.min((Complex64::from_polar(1.0, a.angle) - z).norm());
    }
    for s in &nu.self_similar {
        let h = s.hull();
        if h.closed().contains(z.arg()) {
            d = d.min(1.0 - z.norm());
        }
        d = d.min((Complex64::from_polar(1.0, h.start.theta()) - z).norm());
        d = d.min((Complex64::from_polar(1.0, h.end()) - z).norm());
    }
    d
}

/// S_ν(z) = exp(−∫ (x + z)/(x − z) dν(x)).
pub fn singular_inner(nu: &CircleMeasure, z: DiskPoint) -> Result<Complex64> {
    if nu.has_density() {
        return Err(Error::RejectDensity);
    }
    if !nu.is_positive() {
        return Err(Error::Input("singular inner functions need a positive measure".into()));
    }
    let d = distance_to_singular_support(nu, z.z());
    if d < 1e-8 {
        return Err(Error::NearSingularSupport(d));
    }
    Ok((-herglotz_integral(nu, z)?).exp())
}

/// A real function φ on the circle given through a weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BoundaryFunction {
    /// φ = log w
    LogOf { weight: Weight },
    /// φ = w
    Values { weight: Weight },
}

/// exp(∫ (x + z)/(x − z) φ(x) dm(x)).
pub fn outer_from_log_modulus(phi: &BoundaryFunction, z: DiskPoint) -> Result<Complex64> {
    let zc = z.z();
    let kernel = |t: f64| {
        let x = Complex64::from_polar(1.0, t);
        (x + zc) / (x - zc)
    };
    let h = match phi {
        BoundaryFunction::Values { weight } => integrate_kernel(&CircleMeasure::density(weight.clone()), zc, kernel)?,
        BoundaryFunction::LogOf { weight } => {
            weight.validate()?;
            match weight.log_integral_between(0.0, TAU, &LogConfig::default())? {
                LogIntegral::Divergent => return Err(Error::DivergentLogModulus),
                LogIntegral::Finite { .. } => {}
            }
            let mut breaks = vec![0.0, TAU];
            breaks.extend(weight.singular_points());
            breaks.extend(peak_breaks(zc));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let f = |t: f64| {
                let l = weight.log_value(t);
                if l.is_finite() {
                    kernel(t) * l / TAU
                } else {
                    Complex64::new(0.0, 0.0)
                }
            };
            quad::integrate_pieces(&f, &breaks, TOL, 1e-12, 20_000).value
        }
    };
    Ok(h.exp())
}

/// Π (|a|/a)(a − z)/(1 − āz), with the factor z for a = 0.
pub fn blaschke(zeros: &[DiskPoint], z: DiskPoint) -> Complex64 {
    let z = z.z();
    let mut p = Complex64::new(1.0, 0.0);
    for a in zeros {
        let a = a.z();
        if a == Complex64::new(0.0, 0.0) {
            p *= z;
        } else {
            p *= (a.norm() / a) * (a - z) / (1.0 - a.conj() * z);
        }
    }
    p
}

/// b = (H_ν − 1)/(H_ν + 1) for a probability measure ν.
pub fn clark_to_b(nu: &CircleMeasure, z: DiskPoint) -> Result<Complex64> {
    if !nu.is_positive() {
        return Err(Error::Input("the Clark measure must be positive".into()));
    }
    let m = nu.total_mass()?;
    if (m.value - 1.0).abs() > 1e-10 {
        return Err(Error::MassNotOne(m.value));
    }
    let h = herglotz_integral(nu, z)?;
    Ok((h - 1.0) / (h + 1.0))
}

/// b = B·S_ν·U with |U| = √(1 − Δ_b²) on the circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSymbol {
    #[serde(default)]
    pub blaschke_zeros: Vec<DiskPoint>,
    #[serde(default)]
    pub singular: CircleMeasure,
    /// Δ_b = √(1 − |b|²) on the circle, with values in [0, 1]
    pub defect: Weight,
    /// arcs where |b| = 1 is declared
    #[serde(default)]
    pub unimodular: ArcSet,
}

impl BSymbol {
    pub fn validate(&self) -> Result<()> {
        self.defect.validate()?;
        if self.singular.has_density() || !self.singular.is_positive() {
            return Err(Error::Input("the singular factor needs a positive singular measure".into()));
        }
        Ok(())
    }

    /// Inner symbol: Δ_b ≡ 0.
    pub fn inner(zeros: Vec<DiskPoint>, singular: CircleMeasure) -> Self {
        BSymbol { blaschke_zeros: zeros, singular, defect: Weight::constant(0.0), unimodular: ArcSet::full() }
    }

    /// log|b| on the circle.
    pub fn log_modulus(&self, theta: f64) -> f64 {
        let d = self.defect.value(theta).min(1.0);
        0.5 * (-d * d).ln_1p()
    }

    pub fn eval(&self, z: DiskPoint) -> Result<Complex64> {
        let zc = z.z();
        let mut v = blaschke(&self.blaschke_zeros, z);
        if !self.singular.is_zero() {
            v *= singular_inner(&self.singular, z)?;
        }
        let mut breaks = vec![0.0, TAU];
        breaks.extend(self.defect.singular_points());
        breaks.extend(peak_breaks(zc));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let f = |t: f64| {
            let x = Complex64::from_polar(1.0, t);
            let l = self.log_modulus(t);
            if l.is_finite() {
                (x + zc) / (x - zc) * l / TAU
            } else {
                Complex64::new(0.0, 0.0)
            }
        };
        let h = quad::integrate_pieces(&f, &breaks, TOL, 1e-12, 20_000).value;
        Ok(v * h.exp())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn p(re: f64, im: f64) -> DiskPoint {
        DiskPoint::new(re, im).unwrap()
    }

    #[test]
    fn cauchy_examples() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        let z = p(0.3, 0.4);
        assert!((cauchy_transform(&d0, z).unwrap() - 1.0 / (1.0 - z.z())).norm() < 1e-14);
        let lm = CircleMeasure::lebesgue();
        assert!((cauchy_transform(&lm, z).unwrap() - 1.0).norm() < 1e-12);
        let c = cauchy_coefficients(&d0, 10).unwrap();
        assert!(c.coeffs.iter().all(|x| (x - 1.0).norm() < 1e-14));
        let c = cauchy_coefficients(&lm, 10).unwrap();
        assert!((c.coeffs[0] - 1.0).norm() < 1e-14);
        assert!(c.coeffs[1..].iter().all(|x| x.norm() < 1e-14));
    }

    #[test]
    fn phased_density_coefficients() {
        let m = CircleMeasure::phased(Weight::constant(1.0), -1);
        assert!(cauchy_coefficients(&m, 8).unwrap().coeffs.iter().all(|c| c.norm() < 1e-14));
        let m = CircleMeasure::phased(Weight::constant(1.0), 1);
        let c = cauchy_coefficients(&m, 8).unwrap();
        assert!((c.coeffs[1] - 1.0).norm() < 1e-14 && c.coeffs[0].norm() < 1e-14);
        // quadrature oracle for the e^{−iθ} case
        let v = cauchy_transform(&CircleMeasure::phased(Weight::constant(1.0), -1), p(0.5, 0.1)).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn poisson_examples() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        assert!((poisson_integral(&d0, p(0.0, 0.0)).unwrap().re - 1.0).abs() < 1e-15);
        assert!((poisson_integral(&d0, p(0.5, 0.0)).unwrap().re - 3.0).abs() < 1e-13);
        let v = poisson_integral(&CircleMeasure::lebesgue(), p(-0.6, 0.7)).unwrap();
        assert!((v.re - 1.0).abs() < 1e-11, "{v}");
    }

    #[test]
    fn herglotz_examples() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        let z = p(0.2, -0.5);
        assert!((herglotz_integral(&d0, z).unwrap() - (1.0 + z.z()) / (1.0 - z.z())).norm() < 1e-13);
        let v = herglotz_integral(&CircleMeasure::lebesgue(), z).unwrap();
        assert!((v - 1.0).norm() < 1e-11);
        let s = CircleMeasure::atoms(&[(1.0, 0.7), (4.0, 1.8)]);
        assert!((herglotz_integral(&s, p(0.0, 0.0)).unwrap() - 2.5).norm() < 1e-14);
    }

    #[test]
    fn inner_examples() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        assert!((singular_inner(&d0, p(0.0, 0.0)).unwrap() - (-1f64).exp()).norm() < 1e-15);
        let r: f64 = 0.6;
        let want = (-(1.0 + r) / (1.0 - r)).exp();
        assert!((singular_inner(&d0, p(r, 0.0)).unwrap() - want).norm() < 1e-15);
        assert!(matches!(singular_inner(&CircleMeasure::lebesgue(), p(0.1, 0.0)), Err(Error::RejectDensity)));
        let t = 1.0 - 1e-6;
        let v = singular_inner(&d0, DiskPoint::polar(t, PI).unwrap()).unwrap();
        assert!(v.norm() >= 1.0 - 1e-6);
        assert!(matches!(singular_inner(&d0, p(1.0 - 1e-9, 0.0)), Err(Error::NearSingularSupport(_))));
    }

    #[test]
    fn outer_examples() {
        let z = p(0.3, 0.3);
        let one = outer_from_log_modulus(&BoundaryFunction::LogOf { weight: Weight::constant(1.0) }, z).unwrap();
        assert!((one - 1.0).norm() < 1e-14);
        let two = outer_from_log_modulus(&BoundaryFunction::LogOf { weight: Weight::constant(2.0) }, z).unwrap();
        assert!((two - 2.0).norm() < 1e-12);
        let f = Weight::indicator(vec![[0.5, 1.5]]);
        let v = outer_from_log_modulus(&BoundaryFunction::Values { weight: f }, p(0.0, 0.0)).unwrap();
        assert!((v - (1.0f64 / TAU).exp()).norm() < 1e-12);
        let bad = BoundaryFunction::LogOf { weight: Weight::exp_dist(1.0, 1.0, vec![0.0]) };
        assert!(matches!(outer_from_log_modulus(&bad, z), Err(Error::DivergentLogModulus)));
        // log|U| is the Poisson integral of φ, here for a power weight
        let w = Weight::power(0.0, 2.0);
        let u = outer_from_log_modulus(&BoundaryFunction::LogOf { weight: w }, z).unwrap();
        // |x − 1|² = |1 − z|² extended: the outer function is (1 − z)²
        assert!((u - (1.0 - z.z()) * (1.0 - z.z())).norm() < 1e-10, "{u}");
    }

    #[test]
    fn blaschke_examples() {
        let z = p(0.1, 0.7);
        assert!((blaschke(&[p(0.0, 0.0)], z) - z.z()).norm() < 1e-15);
        assert!(blaschke(&[p(0.5, 0.0)], p(0.5, 0.0)).norm() < 1e-15);
        let b = blaschke(&[p(0.5, 0.0), p(-0.5, 0.0)], p(0.0, 0.0));
        assert!((b.norm() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn clark_examples() {
        let d0 = CircleMeasure::atom(0.0, 1.0);
        for i in 0..100 {
            let z = DiskPoint::polar(0.9 * (i as f64 + 0.5) / 100.0, 0.7 * i as f64).unwrap();
            assert!((clark_to_b(&d0, z).unwrap() - z.z()).norm() < 1e-12);
        }
        let b = clark_to_b(&CircleMeasure::lebesgue(), p(0.4, -0.2)).unwrap();
        assert!(b.norm() < 1e-11);
        assert!(matches!(clark_to_b(&CircleMeasure::atom(0.0, 2.0), p(0.1, 0.0)), Err(Error::MassNotOne(_))));
    }

    #[test]
    fn symbol_modulus_bounded() {
        let b = BSymbol {
            blaschke_zeros: vec![p(0.3, 0.0)],
            singular: CircleMeasure::atom(PI, 1.0),
            defect: Weight::exp_dist(1.0, 1.0, vec![0.0]).scaled(0.5),
            unimodular: ArcSet::empty(),
        };
        for i in 0..20 {
            let z = DiskPoint::polar(0.9, i as f64 * 0.3).unwrap();
            assert!(b.eval(z).unwrap().norm() <= 1.0);
        }
        assert!(b.eval(p(0.3, 0.0)).unwrap().norm() < 1e-15);
    }
}
