//! Dyadic obstacle-constrained approximation of a singular measure by
//! functions 0 ≤ f ≤ log⁺(1/w), their outer lifts, and the cyclicity witness.

use crate::circle::{normalize, Arc, ArcSet};
use crate::coreset::{core_set, CoreReport, Tri};
use crate::error::{Error, Result};
use crate::measure::{CircleMeasure, DEFAULT_DEPTH};
use crate::oracle::is_cyclic;
use crate::par;
use crate::quad;
use crate::transforms::{peak_breaks, singular_inner, DiskPoint};
use crate::weight::Weight;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const MASS_TOL: f64 = 1e-10;
const BISECT: usize = 60;
const QTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "camelCase")]
pub enum ValueRule {
    /// f = value on the support, where w = 0
    Constant { value: f64 },
    /// f = log⁺(1/w) where log w > log_cutoff, 0 elsewhere
    LogInvW { log_cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub cell: usize,
    /// chosen non-core point of the cell
    pub point: f64,
    /// unwrapped [lo, hi] intervals
    pub support: Vec<[f64; 2]>,
    pub rule: ValueRule,
    /// ∫ f dm over the piece
    pub mass: f64,
    /// target ν(d_j)
    pub target: f64,
    /// points where the integrand jumps or peaks
    #[serde(default)]
    pub breaks: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleFunction {
    pub level: u32,
    pub weight: Weight,
    pub pieces: Vec<Piece>,
    pub total_mass: f64,
    /// mass of ν not resolved into cells by the self-similar recursion
    pub unresolved_mass: f64,
}

fn log_inv(w: &Weight, t: f64) -> f64 {
    (-w.log_value(normalize(t))).max(0.0)
}

impl Piece {
    fn value_at(&self, w: &Weight, t: f64) -> f64 {
        match self.rule {
            ValueRule::Constant { value } => value,
            ValueRule::LogInvW { log_cutoff } => {
                let l = w.log_value(normalize(t));
                if l > log_cutoff {
                    (-l).max(0.0)
                } else {
                    0.0
                }
            }
        }
    }

    fn contains(&self, t: f64) -> bool {
        self.support.iter().any(|&[a, b]| {
            let o = normalize(t - a);
            o <= b - a
        })
    }

    /// ∫ K f dm over the piece.
    fn integrate<K: Fn(f64) -> Complex64>(&self, w: &Weight, k: &K, extra: &[f64]) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for &[a, b] in &self.support {
            let mut pts = self.breaks.clone();
            pts.extend(extra.iter().flat_map(|&e| [e, e + TAU, e - TAU]));
            let br = graded_breaks(a, b, &pts);
            let f = |t: f64| k(t) * (self.value_at(w, t) / TAU);
            total += quad::integrate_pieces(&f, &br, QTOL, 1e-13, 50_000).value;
        }
        total
    }
}

impl ObstacleFunction {
    pub fn eval(&self, theta: f64) -> f64 {
        self.pieces.iter().find(|p| p.contains(theta)).map_or(0.0, |p| p.value_at(&self.weight, theta))
    }

    /// ∫ K f dm
    pub fn integrate<K: Fn(f64) -> Complex64>(&self, k: &K, extra: &[f64]) -> Complex64 {
        self.pieces.iter().map(|p| p.integrate(&self.weight, k, extra)).sum()
    }

    /// H_f(z) = ∫ (x + z)/(x − z) f(x) dm(x)
    pub fn herglotz(&self, z: DiskPoint) -> Complex64 {
        let zc = z.z();
        self.integrate(
            &|t| {
                let x = Complex64::from_polar(1.0, t);
                (x + zc) / (x - zc)
            },
            &peak_breaks(zc),
        )
    }
}

/// [a, b] split at the given points and refined geometrically toward them.
fn graded_breaks(a: f64, b: f64, pts: &[f64]) -> Vec<f64> {
    let mut br = vec![a, b];
    let len = b - a;
    for &p in pts.iter().chain([a, b].iter()) {
        if p < a || p > b {
            continue;
        }
        br.push(p);
        let mut d = 0.5 * len;
        while d > 1e-15 * (1.0 + p.abs()) {
            for q in [p - d, p + d] {
                if q > a && q < b {
                    br.push(q);
                }
            }
            d *= 0.5;
        }
    }
    br.sort_by(f64::total_cmp);
    br.dedup();
    br
}

/// Sample points of [a, b]: uniform plus geometric clusters at singular points and ends.
fn sample_grid(a: f64, b: f64, sing: &[f64]) -> Vec<f64> {
    let n = 1024;
    let mut g: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    g.extend(graded_breaks(a, b, sing));
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Maximal sub-intervals of the grid range where pred holds, edges refined by bisection.
fn runs<P: Fn(f64) -> bool>(grid: &[f64], pred: P) -> Vec<(f64, f64)> {
    let refine = |mut lo: f64, mut hi: f64, lo_val: bool| {
        for _ in 0..BISECT {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if pred(m) == lo_val {
                lo = m;
            } else {
                hi = m;
            }
        }
        0.5 * (lo + hi)
    };
    let vals: Vec<bool> = grid.iter().map(|&t| pred(t)).collect();
    let mut out = Vec::new();
    let mut start: Option<f64> = if vals[0] { Some(grid[0]) } else { None };
    for i in 1..grid.len() {
        if vals[i] != vals[i - 1] {
            let x = refine(grid[i - 1], grid[i], vals[i - 1]);
            if vals[i] {
                start = Some(x);
            } else if let Some(s) = start.take() {
                out.push((s, x));
            }
        }
    }
    if let Some(s) = start {
        out.push((s, *grid.last().unwrap()));
    }
    out.retain(|(a, b)| b > a);
    out
}

fn log_inv_integral(w: &Weight, a: f64, b: f64, pts: &[f64]) -> f64 {
    if b <= a {
        return 0.0;
    }
    let br = graded_breaks(a, b, pts);
    quad::integrate_pieces(&|t: f64| log_inv(w, t) / TAU, &br, QTOL, 1e-13, 50_000).value
}

/// Declared singular points of w, unwrapped near [a, b].
fn singular_near(w: &Weight, a: f64, b: f64) -> Vec<f64> {
    w.singular_points().into_iter().flat_map(|s| [s - TAU, s, s + TAU]).filter(|&s| s >= a && s <= b).collect()
}

struct CellInput {
    cell: usize,
    lo: f64,
    hi: f64,
    target: f64,
}

fn cell_masses(nu: &CircleMeasure, level: u32) -> (Vec<CellInput>, f64) {
    let n = 1usize << level;
    let h = TAU / n as f64;
    let mut mass = vec![0.0; n];
    let mut unresolved = 0.0;
    for a in &nu.atoms {
        let j = ((normalize(a.angle) / h).floor() as usize).min(n - 1);
        mass[j] += a.mass;
    }
    for s in &nu.self_similar {
        let hull = s.hull();
        let (a, b) = hull.interval();
        let j0 = (a / h).floor() as i64;
        let j1 = (b / h).ceil() as i64;
        for j in j0..j1 {
            let jj = j.rem_euclid(n as i64) as usize;
            let m = s.mass_in(&ArcSet::from_arc(Arc::between(jj as f64 * h, (jj + 1) as f64 * h)), DEFAULT_DEPTH);
            mass[jj] += m.value;
            unresolved += m.error;
        }
    }
    let cells = mass
        .into_iter()
        .enumerate()
        .filter(|(_, m)| *m > 0.0)
        .map(|(j, m)| CellInput { cell: j, lo: j as f64 * h, hi: (j + 1) as f64 * h, target: m })
        .collect();
    (cells, unresolved)
}

/// Non-core points of the cell: (x, [lo, hi] = cell ∩ excluded component).
fn obstacle_interval(c: &CellInput, core: &CoreReport, w: &Weight) -> Option<(f64, f64, f64)> {
    let cell = ArcSet::from_arc(Arc::between(c.lo, c.hi).closed());
    let centre = 0.5 * (c.lo + c.hi);
    let sing = singular_near(w, c.lo, c.hi);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for comp in core.excluded.arcs() {
        for (a, b) in ArcSet::from_arc(*comp).intersect(&cell).intervals() {
            // unwrap into the cell's range
            let (a, b) = if a < c.lo - 1e-12 { (a + TAU, b + TAU) } else { (a, b) };
            let x = sing.iter().copied().find(|&s| s >= a && s <= b).unwrap_or_else(|| centre.clamp(a, b));
            let rank = if sing.iter().any(|&s| s >= a && s <= b) { 0.0 } else { 1.0 } + (x - centre).abs() / TAU;
            if best.is_none_or(|bst| rank < bst.3) {
                best = Some((x, a.max(c.lo), b.min(c.hi), rank));
            }
        }
    }
    best.map(|(x, a, b, _)| (x, a, b))
}

fn build_piece(c: &CellInput, core: &CoreReport, w: &Weight, mass_tol: f64) -> Result<Piece> {
    let (x, mut a, mut b) = obstacle_interval(c, core, w)
        .ok_or(Error::NoObstaclePoint { level: (TAU / (c.hi - c.lo)).log2().round() as u32, cell: c.cell })?;
    let fail = |r: f64| Error::MassMatchFailure { cell: c.cell, residual: r };
    let mut sing = singular_near(w, c.lo, c.hi);
    // zero set A ⊆ I of positive measure: constant rule
    let zero_runs = |a: f64, b: f64| {
        let mut r = runs(&sample_grid(a, b, &sing), |t| w.log_value(normalize(t)) == f64::NEG_INFINITY);
        // isolated zeros show up as runs of bisection width
        r.retain(|(p, q)| q - p > 1e-12 * (b - a));
        r
    };
    let mut zeros = zero_runs(a, b);
    let total_g = |a: f64, b: f64| log_inv_integral(w, a, b, &sing);
    if zeros.is_empty() && total_g(a, b) <= c.target + mass_tol {
        // widen I to the whole cell
        a = c.lo;
        b = c.hi;
        zeros = zero_runs(a, b);
    }
    if !zeros.is_empty() {
        let m: f64 = zeros.iter().map(|(p, q)| q - p).sum::<f64>() / TAU;
        let value = c.target / m;
        return Ok(Piece {
            cell: c.cell,
            point: normalize(x),
            support: zeros.iter().map(|&(p, q)| [p, q]).collect(),
            rule: ValueRule::Constant { value },
            mass: c.target,
            target: c.target,
            breaks: vec![],
        });
    }
    sing.push(x);
    let grid = sample_grid(a, b, &sing);
    let above = |lc: f64| runs(&grid, |t| w.log_value(normalize(t)) > lc);
    let mass_above = |lc: f64| -> f64 { above(lc).iter().map(|&(p, q)| log_inv_integral(w, p, q, &sing)).sum() };
    // log c = −e^u; bisection on u for the largest c with mass > target
    let (mut ulo, mut uhi) = (-40.0f64, 700.0f64);
    if mass_above(-uhi.exp()) <= c.target + mass_tol {
        return Err(fail(c.target - mass_above(-uhi.exp())));
    }
    if mass_above(-ulo.exp()) > c.target + mass_tol {
        uhi = ulo;
    } else {
        for _ in 0..BISECT {
            let u = 0.5 * (ulo + uhi);
            if mass_above(-u.exp()) > c.target + mass_tol {
                uhi = u;
            } else {
                ulo = u;
            }
        }
    }
    let log_cutoff = -uhi.exp();
    let segs = above(log_cutoff);
    // grow B from the left endpoint
    let g_cut = |t: f64| {
        let l = w.log_value(normalize(t));
        if l > log_cutoff {
            (-l).max(0.0) / TAU
        } else {
            0.0
        }
    };
    let mut pts: Vec<f64> = segs.iter().flat_map(|&(p, q)| [p, q]).collect();
    pts.extend(sing.iter().copied());
    let left = segs[0].0;
    let mut acc = 0.0;
    let mut end = None;
    for &(p, q) in &segs {
        let m = log_inv_integral(w, p, q, &pts);
        if acc + m >= c.target {
            let (mut lo, mut hi) = (p, q);
            for _ in 0..BISECT {
                let e = 0.5 * (lo + hi);
                if e <= lo || e >= hi {
                    break;
                }
                let me = log_inv_integral(w, p, e, &pts);
                if acc + me < c.target {
                    lo = e;
                } else {
                    hi = e;
                }
            }
            end = Some(0.5 * (lo + hi));
            break;
        }
        acc += m;
    }
    let e = end.ok_or_else(|| fail(c.target - acc))?;
    let mut breaks: Vec<f64> = pts.into_iter().filter(|&t| t >= left && t <= e).collect();
    breaks.push(e);
    let mass = quad::integrate_pieces(&g_cut, &graded_breaks(left, e, &breaks), QTOL, 1e-13, 50_000).value;
    if (mass - c.target).abs() > mass_tol {
        return Err(fail(mass - c.target));
    }
    Ok(Piece {
        cell: c.cell,
        point: normalize(x),
        support: vec![[left, e]],
        rule: ValueRule::LogInvW { log_cutoff },
        mass,
        target: c.target,
        breaks,
    })
}

/// f_n for the level-n dyadic partition, with core(w) resolved at level K.
pub fn build_obstacle_sequence(
    nu: &CircleMeasure,
    w: &Weight,
    level: u32,
    core_level: u32,
    mass_tol: f64,
) -> Result<ObstacleFunction> {
    let core = core_set(w, core_level)?;
    build_with_core(nu, w, level, &core, mass_tol)
}

fn build_with_core(
    nu: &CircleMeasure,
    w: &Weight,
    level: u32,
    core: &CoreReport,
    mass_tol: f64,
) -> Result<ObstacleFunction> {
    nu.validate()?;
    if nu.has_density() || !nu.is_positive() {
        return Err(Error::Precondition("ν must be a positive singular measure".into()));
    }
    if !(1..=30).contains(&level) {
        return Err(Error::Input("level must be in 1..=30".into()));
    }
    let (cells, unresolved) = cell_masses(nu, level);
    let pieces = par::map(&cells, |c| build_piece(c, core, w, mass_tol));
    let pieces = pieces.into_iter().collect::<Result<Vec<_>>>()?;
    let total_mass = pieces.iter().map(|p| p.mass).sum();
    Ok(ObstacleFunction { level, weight: w.clone(), pieces, total_mass, unresolved_mass: unresolved })
}

/// f_n for each level, sharing one core computation.
pub fn build_levels(
    nu: &CircleMeasure,
    w: &Weight,
    levels: &[u32],
    core_level: u32,
    mass_tol: f64,
) -> Result<Vec<ObstacleFunction>> {
    let core = core_set(w, core_level)?;
    levels.iter().map(|&n| build_with_core(nu, w, n, &core, mass_tol)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakStarRow {
    pub level: u32,
    /// |∫ f_n dm − ν(𝕋)|
    pub mass_error: f64,
    /// max over |k| ≤ D of |∫ e^{ikθ} f_n dm − ∫ e^{ikθ} dν|
    pub max_error: f64,
}

pub fn weak_star_error(seq: &[ObstacleFunction], nu: &CircleMeasure, degree: usize) -> Result<Vec<WeakStarRow>> {
    if nu.has_density() {
        return Err(Error::Precondition("ν must be singular".into()));
    }
    if seq.windows(2).any(|p| p[1].level <= p[0].level) {
        return Err(Error::Input("levels must increase".into()));
    }
    let target: Vec<Complex64> = (0..=degree)
        .map(|k| nu.integrate(&|t| Complex64::from_polar(1.0, k as f64 * t), DEFAULT_DEPTH, 1e-14).map(|r| r.0))
        .collect::<Result<_>>()?;
    Ok(par::map(seq, |f| {
        let errs: Vec<f64> = (0..=degree)
            .map(|k| (f.integrate(&|t| Complex64::from_polar(1.0, k as f64 * t), &[]) - target[k]).norm())
            .collect();
        // f and ν are real, so k and −k give conjugate errors
        WeakStarRow { level: f.level, mass_error: errs[0], max_error: errs.iter().copied().fold(0.0, f64::max) }
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftPoint {
    pub z: DiskPoint,
    pub value: Complex64,
    /// exp(s/(1 − |z|))
    pub bound: f64,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterLift {
    pub mass: f64,
    pub points: Vec<LiftPoint>,
    /// boundary samples checked against |h| ≤ √max(1, 1/w)
    pub boundary_samples: usize,
    pub boundary_ok: bool,
    pub interior_ok: bool,
}

/// h(z) = exp(H_f(z)/2) with both certificates.
pub fn outer_lift(f: &ObstacleFunction, zs: &[DiskPoint]) -> OuterLift {
    let s = f.total_mass;
    let points: Vec<LiftPoint> = par::map(zs, |&z| {
        let value = (0.5 * f.herglotz(z)).exp();
        let bound = (s / (1.0 - z.z().norm())).exp();
        LiftPoint { z, value, bound, within_bound: value.norm() <= bound * (1.0 + 1e-12) }
    });
    // boundary values of |h| are exp(f/2) at continuity points of f
    let mut samples = 0;
    let mut ok = true;
    for p in &f.pieces {
        for &[a, b] in &p.support {
            for i in 1..256 {
                let t = a + (b - a) * i as f64 / 256.0;
                let lw = f.weight.log_value(normalize(t));
                if lw == f64::NEG_INFINITY {
                    continue;
                }
                samples += 1;
                let h = (0.5 * p.value_at(&f.weight, t)).exp();
                ok &= h <= (0.5 * (-lw).max(0.0)).exp() * (1.0 + 1e-12);
            }
        }
    }
    let interior_ok = points.iter().all(|p| p.within_bound);
    OuterLift { mass: s, points, boundary_samples: samples, boundary_ok: ok, interior_ok }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessRow {
    pub level: u32,
    /// |h_n(z)·S_ν(z) − 1| per sample point
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessTable {
    pub z: Vec<DiskPoint>,
    pub rows: Vec<WitnessRow>,
}

/// Lifts of f_n → 2ν against 1/S_ν.
pub fn cyclic_witness(
    nu: &CircleMeasure,
    w: &Weight,
    levels: &[u32],
    core_level: u32,
    zs: &[DiskPoint],
) -> Result<WitnessTable> {
    let v = is_cyclic(nu, w, core_level, MASS_TOL)?;
    if v.verdict != Tri::Yes {
        return Err(Error::Precondition(format!(
            "ν(core(w)) = {:e} ± {:e}: S_ν is not certified cyclic",
            v.mass_on_core.value, v.mass_on_core.error
        )));
    }
    let s: Vec<Complex64> = zs.iter().map(|&z| singular_inner(nu, z)).collect::<Result<_>>()?;
    let seq = build_levels(&nu.scaled(2.0), w, levels, core_level, MASS_TOL)?;
    let rows = seq
        .iter()
        .map(|f| {
            let lift = outer_lift(f, zs);
            WitnessRow {
                level: f.level,
                errors: lift.points.iter().zip(&s).map(|(p, s)| (p.value * s - 1.0).norm()).collect(),
            }
        })
        .collect();
    Ok(WitnessTable { z: zs.to_vec(), rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::SelfSimilar;
    use std::f64::consts::PI;

    fn w15() -> Weight {
        Weight::exp_dist(1.0, 1.0, vec![0.0])
    }

    #[test]
    fn atom_example() {
        let f = build_obstacle_sequence(&CircleMeasure::atom(0.0, 1.0), &w15(), 6, 14, MASS_TOL).unwrap();
        assert_eq!(f.pieces.len(), 1);
        assert!((f.total_mass - 1.0).abs() <= MASS_TOL);
        let p = &f.pieces[0];
        assert_eq!(p.cell, 0);
        assert!(p.support[0][1] < 2e-4);
        // obstacle at random support points
        for i in 0..1000 {
            let t = p.support[0][0] + (p.support[0][1] - p.support[0][0]) * (i as f64 + 0.5) / 1000.0;
            let v = f.eval(t);
            assert!(v >= 0.0 && v <= log_inv(&w15(), t) + 1e-9, "{t} {v} {} {:?}", log_inv(&w15(), t), p.support);
        }
        let r = build_obstacle_sequence(&CircleMeasure::atom(PI, 1.0), &w15(), 6, 14, MASS_TOL);
        assert!(matches!(r, Err(Error::NoObstaclePoint { .. })));
    }

    #[test]
    fn zero_set_example() {
        let w = Weight::indicator(vec![[0.2, TAU - 0.2]]);
        let h = TAU / 256.0;
        let cantor = SelfSimilar::middle_thirds(3.0 * h + 0.002, 0.02, 0.5);
        let nu = CircleMeasure::atom(0.0, 0.5).with_self_similar(cantor);
        let f = build_obstacle_sequence(&nu, &w, 8, 12, MASS_TOL).unwrap();
        assert_eq!(f.pieces.len(), 2);
        for p in &f.pieces {
            assert!((p.mass - 0.5).abs() < 1e-12);
            assert!(matches!(p.rule, ValueRule::Constant { .. }));
        }
        assert_eq!(f.pieces[1].cell, 3);
        let e = f.integrate(&|_| Complex64::new(1.0, 0.0), &[]);
        assert!((e.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weak_star_atom() {
        let nu = CircleMeasure::atom(0.0, 1.0);
        let seq = build_levels(&nu, &w15(), &[4, 8, 12], 14, MASS_TOL).unwrap();
        let rows = weak_star_error(&seq, &nu, 8).unwrap();
        for r in &rows {
            assert!(r.mass_error <= MASS_TOL);
        }
        assert!(rows[2].max_error <= rows[0].max_error);
        assert!(rows[2].max_error <= TAU * 8.0 / 4096.0 + MASS_TOL);
        assert!(matches!(weak_star_error(&seq, &CircleMeasure::lebesgue(), 2), Err(Error::Precondition(_))));
    }

    #[test]
    fn lift_certificates() {
        let f = build_obstacle_sequence(&CircleMeasure::atom(0.0, 2.0), &w15(), 8, 14, MASS_TOL).unwrap();
        let zs = [DiskPoint::new(0.0, 0.0).unwrap(), DiskPoint::new(0.9, 0.0).unwrap()];
        let l = outer_lift(&f, &zs);
        assert!((l.points[0].value - 1f64.exp()).norm() < 1e-9);
        assert!(l.interior_ok && l.boundary_ok && l.boundary_samples > 0);
        let empty = build_obstacle_sequence(&CircleMeasure::zero(), &w15(), 8, 14, MASS_TOL).unwrap();
        assert_eq!(outer_lift(&empty, &zs).points[1].value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn witness_small_atom() {
        let nu = CircleMeasure::atom(0.0, 0.05);
        let zs = [DiskPoint::new(0.0, 0.0).unwrap(), DiskPoint::new(0.5, 0.0).unwrap()];
        let t = cyclic_witness(&nu, &w15(), &[6, 10, 14], 14, &zs).unwrap();
        for r in &t.rows {
            assert!(r.errors[0] < 1e-9, "{r:?}");
        }
        assert!(t.rows.last().unwrap().errors[1] <= 1e-3);
        let on_core = CircleMeasure::atom(PI, 0.05);
        assert!(matches!(cyclic_witness(&on_core, &w15(), &[6], 14, &zs), Err(Error::Precondition(_))));
    }
}
