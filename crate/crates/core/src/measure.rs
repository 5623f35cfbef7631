//! Measures on the circle: atoms, a density with respect to dm, and
//! self-similar singular continuous parts.

use crate::circle::{normalize, wrap_pm_pi, Arc, ArcSet};
use crate::error::{Error, Result};
use crate::quad;
use crate::weight::{FatCantor, Preset, Weight};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub angle: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// g = w ≥ 0
    Real { weight: Weight },
    /// g = w·e^{ikθ}
    Phased { modulus: Weight, frequency: i64 },
    /// samples of g at 2πj/N, interpolated piecewise linearly
    ComplexGrid { re: Vec<f64>, im: Vec<f64> },
}

/// Self-similar measure: `arity` equally spaced children of relative length
/// `ratio` inside `base`, mass split equally, optionally restricted to `window`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilar {
    pub ratio: f64,
    pub arity: usize,
    /// [start, length] in radians
    pub base: [f64; 2],
    pub mass: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<ArcSet>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CircleMeasure {
    #[serde(default)]
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Density>,
    #[serde(default, rename = "cantor")]
    pub self_similar: Vec<SelfSimilar>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub value: f64,
    pub error: f64,
}

pub const DEFAULT_DEPTH: u32 = 24;

impl SelfSimilar {
    pub fn middle_thirds(start: f64, length: f64, mass: f64) -> Self {
        SelfSimilar { ratio: 1.0 / 3.0, arity: 2, base: [start, length], mass, window: None }
    }

    fn step(&self, len: f64) -> f64 {
        len * (1.0 - self.ratio) / (self.arity - 1) as f64
    }

    /// Mass of the part inside `set`, resolved to `depth` levels.
    pub fn mass_in(&self, set: &ArcSet, depth: u32) -> Mass {
        let set = match &self.window {
            Some(w) => set.intersect(w),
            None => set.clone(),
        };
        let iv = set.intervals();
        let mut m = Mass { value: 0.0, error: 0.0 };
        self.mass_rec(&iv, self.base[0], self.base[1], self.mass, 0, depth, &mut m);
        m
    }

    #[allow(clippy::too_many_arguments)]
    fn mass_rec(&self, iv: &[(f64, f64)], a: f64, len: f64, mass: f64, level: u32, depth: u32, out: &mut Mass) {
        match overlap(iv, a, a + len) {
            Overlap::Inside => out.value += mass,
            Overlap::Outside => {}
            Overlap::Partial => {
                if level >= depth {
                    out.value += 0.5 * mass;
                    out.error += 0.5 * mass;
                    return;
                }
                let child = len * self.ratio;
                let step = self.step(len);
                let cm = mass / self.arity as f64;
                for j in 0..self.arity {
                    self.mass_rec(iv, a + j as f64 * step, child, cm, level + 1, depth, out);
                }
            }
        }
    }

    /// ∫ e^{−inθ} dν over the part (exact product when unrestricted).
    pub fn fourier(&self, n: i64, depth: u32) -> Complex64 {
        if self.window.is_some() {
            let e = self.integrate(&|t| Complex64::from_polar(1.0, -(n as f64) * t), depth, 1e-14);
            return e.0;
        }
        let nf = n as f64;
        let mut p = Complex64::from_polar(self.mass, -nf * self.base[0]);
        let mut len = self.base[1];
        for _ in 0..200 {
            let s = self.step(len);
            if (nf * s).abs() < 1e-17 {
                break;
            }
            let mut f = Complex64::new(0.0, 0.0);
            for j in 0..self.arity {
                f += Complex64::from_polar(1.0, -nf * j as f64 * s);
            }
            p *= f / self.arity as f64;
            len *= self.ratio;
        }
        p
    }

    /// ∫ K dν by adaptive refinement of cells; returns (value, error bound).
    pub fn integrate<K: Fn(f64) -> Complex64>(&self, k: &K, depth: u32, tol: f64) -> (Complex64, f64) {
        let iv = self.window.as_ref().map(|w| w.intervals());
        let mut acc = (Complex64::new(0.0, 0.0), 0.0);
        self.int_rec(k, iv.as_deref(), self.base[0], self.base[1], self.mass, 0, depth, tol, &mut acc);
        acc
    }

    #[allow(clippy::too_many_arguments)]
    fn int_rec<K: Fn(f64) -> Complex64>(
        &self,
        k: &K,
        iv: Option<&[(f64, f64)]>,
        a: f64,
        len: f64,
        mass: f64,
        level: u32,
        depth: u32,
        tol: f64,
        acc: &mut (Complex64, f64),
    ) {
        let status = iv.map_or(Overlap::Inside, |iv| overlap(iv, a, a + len));
        if matches!(status, Overlap::Outside) {
            return;
        }
        let c = k(a + 0.5 * len);
        let var = (k(a) - c).norm().max((k(a + len) - c).norm());
        let refine = level < depth && (matches!(status, Overlap::Partial) || mass * var > tol);
        if refine {
            let child = len * self.ratio;
            let step = self.step(len);
            let cm = mass / self.arity as f64;
            for j in 0..self.arity {
                self.int_rec(k, iv, a + j as f64 * step, child, cm, level + 1, depth, tol, acc);
            }
            return;
        }
        if matches!(status, Overlap::Partial) {
            // unresolved straddling cell: count half with a full error bar
            acc.0 += c * (0.5 * mass);
            acc.1 += 0.5 * mass * (c.norm() + var);
        } else {
            acc.0 += c * mass;
            acc.1 += mass * var;
        }
    }

    pub fn total(&self) -> Mass {
        match &self.window {
            None => Mass { value: self.mass, error: 0.0 },
            Some(_) => self.mass_in(&ArcSet::full(), DEFAULT_DEPTH),
        }
    }

    /// Closed arc containing the support.
    pub fn hull(&self) -> Arc {
        Arc::new(self.base[0], self.base[1]).closed()
    }
}

enum Overlap {
    Inside,
    Outside,
    Partial,
}

/// Relation of the closed cell [a, b] (unwrapped, b − a ≤ 2π) to a union of
/// intervals split at angle 0.
fn overlap(iv: &[(f64, f64)], a: f64, b: f64) -> Overlap {
    let a0 = normalize(a);
    let b0 = a0 + (b - a);
    let pieces: Vec<(f64, f64)> = if b0 <= TAU { vec![(a0, b0)] } else { vec![(a0, TAU), (0.0, b0 - TAU)] };
    let mut any_in = false;
    let mut all_in = true;
    for (lo, hi) in pieces {
        let mut covered = 0.0;
        for &(x, y) in iv {
            let l = lo.max(x);
            let h = hi.min(y);
            if h > l {
                covered += h - l;
            }
        }
        if covered > 0.0 {
            any_in = true;
        }
        if covered < (hi - lo) * (1.0 - 1e-12) {
            all_in = false;
        }
    }
    if all_in {
        Overlap::Inside
    } else if any_in {
        Overlap::Partial
    } else {
        Overlap::Outside
    }
}

impl CircleMeasure {
    pub fn atom(angle: f64, mass: f64) -> Self {
        CircleMeasure { atoms: vec![Atom { angle: normalize(angle), mass }], ..Default::default() }
    }
    pub fn atoms(list: &[(f64, f64)]) -> Self {
        CircleMeasure {
            atoms: list.iter().map(|&(a, m)| Atom { angle: normalize(a), mass: m }).collect(),
            ..Default::default()
        }
    }
    pub fn lebesgue() -> Self {
        Self::density(Weight::constant(1.0))
    }
    pub fn density(w: Weight) -> Self {
        CircleMeasure { density: Some(Density::Real { weight: w }), ..Default::default() }
    }
    pub fn phased(modulus: Weight, frequency: i64) -> Self {
        CircleMeasure { density: Some(Density::Phased { modulus, frequency }), ..Default::default() }
    }
    pub fn with_self_similar(mut self, s: SelfSimilar) -> Self {
        self.self_similar.push(s);
        self
    }
    pub fn zero() -> Self {
        CircleMeasure::default()
    }
    pub fn scaled(&self, c: f64) -> Self {
        let mut m = self.clone();
        for a in &mut m.atoms {
            a.mass *= c;
        }
        for s in &mut m.self_similar {
            s.mass *= c;
        }
        m.density = m.density.map(|d| match d {
            Density::Real { weight } => Density::Real { weight: weight.scaled(c) },
            Density::Phased { modulus, frequency } => Density::Phased { modulus: modulus.scaled(c), frequency },
            Density::ComplexGrid { re, im } => {
                Density::ComplexGrid { re: re.iter().map(|x| x * c).collect(), im: im.iter().map(|x| x * c).collect() }
            }
        });
        m
    }
    pub fn plus(&self, other: &CircleMeasure) -> Result<Self> {
        if self.density.is_some() && other.density.is_some() {
            return Err(Error::Input("sum of two densities is not representable".into()));
        }
        let mut m = self.clone();
        m.atoms.extend_from_slice(&other.atoms);
        m.self_similar.extend(other.self_similar.iter().cloned());
        if m.density.is_none() {
            m.density = other.density.clone();
        }
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for a in &self.atoms {
            if !(a.mass > 0.0 && a.mass.is_finite() && a.angle.is_finite()) {
                return Err(Error::Input("atom masses must be positive and finite".into()));
            }
        }
        for s in &self.self_similar {
            if !(s.ratio > 0.0 && s.arity >= 2 && s.ratio * (s.arity as f64) < 1.0) {
                return Err(Error::Input("self-similar part needs arity ≥ 2 and arity·ratio < 1".into()));
            }
            if !(s.mass > 0.0 && s.base[1] > 0.0 && s.base[1] <= TAU) {
                return Err(Error::Input("self-similar part needs positive mass and base length in (0, 2π]".into()));
            }
        }
        match &self.density {
            Some(Density::Real { weight }) => weight.validate()?,
            Some(Density::Phased { modulus, .. }) => modulus.validate()?,
            Some(Density::ComplexGrid { re, im }) if re.len() != im.len() || re.len() < 2 => {
                return Err(Error::Input("complex grid needs matching re/im arrays".into()));
            }
            Some(Density::ComplexGrid { .. }) => {}
            None => {}
        }
        Ok(())
    }

    pub fn has_density(&self) -> bool {
        self.density.is_some()
    }
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.density.is_none() && self.self_similar.is_empty()
    }
    /// Positive measure check for atoms/self-similar/real densities.
    pub fn is_positive(&self) -> bool {
        !matches!(self.density, Some(Density::Phased { frequency, .. }) if frequency != 0)
            && !matches!(self.density, Some(Density::ComplexGrid { .. }))
    }

    /// Variation |ν|(set); self-similar parts resolved to `depth`.
    pub fn mass(&self, set: &ArcSet, depth: u32) -> Result<Mass> {
        let mut m = Mass { value: 0.0, error: 0.0 };
        for a in &self.atoms {
            if set.contains(a.angle) {
                m.value += a.mass;
            }
        }
        for s in &self.self_similar {
            let x = s.mass_in(set, depth);
            m.value += x.value;
            m.error += x.error;
        }
        if let Some(d) = &self.density {
            let (v, e) = match d {
                Density::Real { weight } => weight.integral_over(set)?,
                Density::Phased { modulus, .. } => modulus.integral_over(set)?,
                Density::ComplexGrid { re, im } => {
                    let modulus: Vec<f64> = re.iter().zip(im).map(|(a, b)| a.hypot(*b)).collect();
                    Weight::grid(modulus, vec![]).integral_over(set)?
                }
            };
            if !v.is_finite() {
                return Err(Error::DivergentDensity);
            }
            m.value += v;
            m.error += e;
        }
        Ok(m)
    }

    pub fn total_mass(&self) -> Result<Mass> {
        self.mass(&ArcSet::full(), DEFAULT_DEPTH)
    }

    /// Atoms of the measure lying on the boundary of `set` (within 1e-12).
    pub fn atoms_on_boundary(&self, set: &ArcSet) -> Vec<Atom> {
        self.atoms.iter().copied().filter(|a| set.classify(a.angle) == crate::circle::Membership::Boundary).collect()
    }

    /// The measure restricted to `set` (density restriction unsupported).
    pub fn restrict(&self, set: &ArcSet) -> Result<CircleMeasure> {
        if self.density.is_some() {
            return Err(Error::RejectDensity);
        }
        let atoms = self.atoms.iter().copied().filter(|a| set.contains(a.angle)).collect();
        let mut parts = Vec::new();
        for s in &self.self_similar {
            let w = match &s.window {
                Some(w) => w.intersect(set),
                None => set.clone(),
            };
            if w.intersect(&ArcSet::from_arc(s.hull())).is_empty() {
                continue;
            }
            let mut t = s.clone();
            t.window = Some(w);
            parts.push(t);
        }
        Ok(CircleMeasure { atoms, density: None, self_similar: parts })
    }

    /// Angles (and hull arcs) where the measure is singular.
    pub fn singular_support(&self) -> (Vec<f64>, Vec<Arc>) {
        let pts = self.atoms.iter().map(|a| a.angle).collect();
        let arcs = self.self_similar.iter().map(|s| s.hull()).collect();
        (pts, arcs)
    }

    /// ∫ K dν with an error bound; densities by adaptive quadrature.
    pub fn integrate<K: Fn(f64) -> Complex64>(&self, k: &K, depth: u32, tol: f64) -> Result<(Complex64, f64)> {
        self.integrate_with_breaks(k, depth, tol, &[])
    }

    /// As [`CircleMeasure::integrate`], with extra quadrature breakpoints
    /// for kernels peaked at known angles.
    pub fn integrate_with_breaks<K: Fn(f64) -> Complex64>(
        &self,
        k: &K,
        depth: u32,
        tol: f64,
        extra: &[f64],
    ) -> Result<(Complex64, f64)> {
        let mut v = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for a in &self.atoms {
            v += k(a.angle) * a.mass;
        }
        for s in &self.self_similar {
            let (x, y) = s.integrate(k, depth, tol);
            v += x;
            e += y;
        }
        if let Some(d) = &self.density {
            let (x, y) = integrate_density(d, k, tol, extra)?;
            v += x;
            e += y;
        }
        Ok((v, e))
    }

    /// Fourier coefficients ν̂_n = ∫ e^{−inθ} dν for n = 0..=N.
    pub fn coefficients(&self, n_max: usize) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); n_max + 1];
        for a in &self.atoms {
            for (n, c) in out.iter_mut().enumerate() {
                *c += Complex64::from_polar(a.mass, -(n as f64) * a.angle);
            }
        }
        for s in &self.self_similar {
            for (n, c) in out.iter_mut().enumerate() {
                *c += s.fourier(n as i64, DEFAULT_DEPTH);
            }
        }
        if let Some(d) = &self.density {
            let dc = density_coefficients(d, n_max)?;
            for (c, x) in out.iter_mut().zip(dc) {
                *c += x;
            }
        }
        Ok(out)
    }
}

fn density_breaks(w: &Weight) -> Vec<f64> {
    let mut b = w.singular_points();
    if let Weight::Preset(p) = w {
        collect_arc_ends(p, &mut b);
    }
    b
}

fn collect_arc_ends(p: &Preset, out: &mut Vec<f64>) {
    match p {
        Preset::Indicator { arcs } | Preset::ExpDist { arcs, .. } => {
            for a in arcs {
                out.push(normalize(a[0]));
                out.push(normalize(a[1]));
            }
        }
        Preset::Power { center, .. } => out.push(normalize(*center)),
        Preset::Product { factors } => factors.iter().for_each(|f| collect_arc_ends(f, out)),
        _ => {}
    }
}

fn integrate_density<K: Fn(f64) -> Complex64>(d: &Density, k: &K, tol: f64, extra: &[f64]) -> Result<(Complex64, f64)> {
    let (w, freq) = match d {
        Density::Real { weight } => (weight.clone(), 0),
        Density::Phased { modulus, frequency } => (modulus.clone(), *frequency),
        Density::ComplexGrid { re, im } => {
            let n = re.len();
            let h = TAU / n as f64;
            let g = |t: f64| {
                let x = normalize(t) / h;
                let i = x.floor() as usize % n;
                let j = (i + 1) % n;
                let f = x - x.floor();
                Complex64::new(re[i] + f * (re[j] - re[i]), im[i] + f * (im[j] - im[i]))
            };
            let mut breaks: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
            breaks.extend(extra.iter().map(|t| normalize(*t)));
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            let e = quad::integrate_pieces(&|t: f64| g(t) * k(t) / TAU, &breaks, tol, 1e-12, 20 * n + 2000);
            return Ok((e.value, e.error));
        }
    };
    if let Weight::Preset(Preset::FatCantor { rho }) = &w {
        let cover = FatCantor::new(*rho).cover(14);
        let mut v = Complex64::new(0.0, 0.0);
        let mut e = 0.0;
        for (a, b) in cover.intervals() {
            let r = quad::integrate(|t: f64| k(t), a, b, 1e-16, 1e-12);
            v += r.value / TAU;
            e += r.error / TAU;
        }
        // cover overshoots E by the remaining gaps
        let over = cover.measure() - rho;
        return Ok((v, e + over));
    }
    let mut breaks = vec![0.0, TAU];
    breaks.extend(density_breaks(&w));
    breaks.extend(extra.iter().map(|t| normalize(*t)));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let f = |t: f64| {
        let lw = w.log_value(t);
        if lw == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            k(t) * Complex64::from_polar(lw.exp(), freq as f64 * t) / TAU
        }
    };
    let e = quad::integrate_pieces(&f, &breaks, tol, 1e-12, 20000);
    Ok((e.value, e.error))
}

/// ŵ_n for n in −M/2..M/2 via FFT of samples on M = 2^q ≥ 8N points.
fn sampled_coefficients(w: &Weight, n_max: usize) -> Vec<Complex64> {
    let mut m = 4096usize;
    while m < 8 * (n_max + 1) {
        m *= 2;
    }
    let mut buf: Vec<Complex64> = (0..m).map(|j| Complex64::new(w.value(TAU * j as f64 / m as f64), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter().map(|c| c / m as f64).collect()
}

fn weight_coefficient_fn(w: &Weight, n_max: usize) -> Box<dyn Fn(i64) -> Complex64> {
    match w {
        Weight::Preset(Preset::Constant { value }) => {
            let v = *value;
            Box::new(move |n| if n == 0 { Complex64::new(v, 0.0) } else { Complex64::new(0.0, 0.0) })
        }
        Weight::Preset(Preset::FatCantor { rho }) => {
            let e = FatCantor::new(*rho);
            Box::new(move |n| e.fourier(n))
        }
        Weight::Preset(Preset::Indicator { arcs }) => {
            let set = ArcSet::from_arcs(arcs.iter().map(|a| Arc::between(a[0], a[1])).collect());
            let iv = set.intervals();
            Box::new(move |n| {
                let mut s = Complex64::new(0.0, 0.0);
                for &(a, b) in &iv {
                    if n == 0 {
                        s += (b - a) / TAU;
                    } else {
                        let nf = n as f64;
                        s += (Complex64::from_polar(1.0, -nf * b) - Complex64::from_polar(1.0, -nf * a))
                            / Complex64::new(0.0, -nf * TAU);
                    }
                }
                s
            })
        }
        Weight::Grid(g) => {
            // exact for the periodic piecewise-linear interpolant
            let m = g.samples.len();
            let mut buf: Vec<Complex64> =
                (0..m).map(|j| Complex64::new(if g.samples[j] <= g.floor { 0.0 } else { g.samples[j] }, 0.0)).collect();
            FftPlanner::new().plan_fft_forward(m).process(&mut buf);
            Box::new(move |n| {
                let k = n.rem_euclid(m as i64) as usize;
                let x = std::f64::consts::PI * n as f64 / m as f64;
                let s = if n == 0 { 1.0 } else { (x.sin() / x).powi(2) };
                buf[k] / m as f64 * s
            })
        }
        _ => {
            let c = sampled_coefficients(w, n_max + 64);
            let m = c.len() as i64;
            Box::new(move |n| c[n.rem_euclid(m) as usize])
        }
    }
}

fn density_coefficients(d: &Density, n_max: usize) -> Result<Vec<Complex64>> {
    match d {
        Density::Real { weight } => {
            let f = weight_coefficient_fn(weight, n_max);
            Ok((0..=n_max as i64).map(f).collect())
        }
        Density::Phased { modulus, frequency } => {
            let f = weight_coefficient_fn(modulus, n_max + frequency.unsigned_abs() as usize);
            Ok((0..=n_max as i64).map(|n| f(n - frequency)).collect())
        }
        Density::ComplexGrid { re, im } => {
            let m = re.len();
            let mut buf: Vec<Complex64> = re.iter().zip(im).map(|(a, b)| Complex64::new(*a, *b)).collect();
            FftPlanner::new().plan_fft_forward(m).process(&mut buf);
            Ok((0..=n_max as i64)
                .map(|n| {
                    let k = n.rem_euclid(m as i64) as usize;
                    let x = std::f64::consts::PI * n as f64 / m as f64;
                    let s = if n == 0 { 1.0 } else { (x.sin() / x).powi(2) };
                    buf[k] / m as f64 * s
                })
                .collect())
        }
    }
}

/// Smallest angular distance from θ to the singular support of ν.
pub fn distance_to_support(nu: &CircleMeasure, theta: f64) -> f64 {
    let mut d = f64::INFINITY;
    for a in &nu.atoms {
        d = d.min(wrap_pm_pi(theta - a.angle).abs());
    }
    for s in &nu.self_similar {
        let h = s.hull();
        if h.contains(theta) {
            return 0.0;
        }
        d = d.min(wrap_pm_pi(theta - h.start.theta()).abs()).min(wrap_pm_pi(theta - h.end()).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn atom_containment() {
        let nu = CircleMeasure::atom(0.0, 1.0);
        let m = nu.mass(&ArcSet::from_arc(Arc::between(-0.1, 0.1)), 24).unwrap();
        assert_eq!(m, Mass { value: 1.0, error: 0.0 });
        let m = nu.mass(&ArcSet::from_arc(Arc::between(1.0, 2.0)), 24).unwrap();
        assert_eq!(m.value, 0.0);
    }

    #[test]
    fn middle_thirds_left_third() {
        let nu = CircleMeasure::zero().with_self_similar(SelfSimilar::middle_thirds(0.0, TAU, 1.0));
        let set = ArcSet::from_arc(Arc::between(0.0, TAU / 3.0));
        let m = nu.mass(&set, 24).unwrap();
        assert!((m.value - 0.5).abs() <= m.error + 1e-15);
        // explicit depth-10 recursion: 2^10 cells of mass 2^-10, left half inside
        let mut count = 0;
        for j in 0..1024u32 {
            let mut a = 0.0;
            let mut len = TAU;
            for l in (0..10).rev() {
                let bit = (j >> l) & 1;
                a += bit as f64 * len * 2.0 / 3.0;
                len /= 3.0;
            }
            if a + len <= TAU / 3.0 + 1e-12 {
                count += 1;
            }
        }
        assert_eq!(count, 512);
    }

    #[test]
    fn straddling_cell_error_bar() {
        let nu = CircleMeasure::zero().with_self_similar(SelfSimilar::middle_thirds(0.0, TAU, 1.0));
        // 1/4 lies in the middle-thirds set, so the cut straddles cells at every level
        let set = ArcSet::from_arc(Arc::between(0.0, TAU / 4.0));
        let coarse = nu.mass(&set, 4).unwrap();
        let fine = nu.mass(&set, 20).unwrap();
        assert!(fine.error < coarse.error);
        assert!((fine.value - coarse.value).abs() <= coarse.error + fine.error);
    }

    #[test]
    fn total_mass_exact_for_atoms_and_density() {
        let nu = CircleMeasure::atoms(&[(0.0, 0.5), (PI, 0.25)]).plus(&CircleMeasure::lebesgue()).unwrap();
        let m = nu.total_mass().unwrap();
        assert!((m.value - 1.75).abs() < 1e-15);
    }

    #[test]
    fn self_similar_fourier_matches_cells() {
        let s = SelfSimilar { ratio: 0.25, arity: 3, base: [0.5, 2.0], mass: 2.0, window: None };
        for n in [1i64, 2, 5, 11] {
            let a = s.fourier(n, 24);
            let (b, e) = s.integrate(&|t| Complex64::from_polar(1.0, -(n as f64) * t), 30, 1e-13);
            assert!((a - b).norm() <= e + 1e-12, "n={n}");
        }
    }

    #[test]
    fn restriction_to_window() {
        let nu =
            CircleMeasure::atoms(&[(0.0, 1.0), (PI, 1.0)]).with_self_similar(SelfSimilar::middle_thirds(0.0, TAU, 1.0));
        let half = ArcSet::from_arc(Arc::between(0.5, TAU / 3.0));
        let r = nu.restrict(&half).unwrap();
        assert!(r.atoms.is_empty());
        let m = r.total_mass().unwrap();
        let direct = nu.self_similar[0].mass_in(&half, 24);
        assert!((m.value - direct.value).abs() <= m.error + direct.error);
    }

    #[test]
    fn coefficients_of_phased_density_vanish() {
        // e^{−iθ} dm has no nonnegative frequencies; e^{iθ} dm has ν̂_1 = 1
        let nu = CircleMeasure::phased(Weight::constant(1.0), -1);
        assert!(nu.coefficients(8).unwrap().iter().all(|x| x.norm() < 1e-15));
        let c = CircleMeasure::phased(Weight::constant(1.0), 1).coefficients(8).unwrap();
        assert!((c[1] - 1.0).norm() < 1e-15);
        assert!(c.iter().enumerate().all(|(n, x)| n == 1 || x.norm() < 1e-15));
    }
}
