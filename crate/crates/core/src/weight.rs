//! Boundary weights and their log-integral oracle.

use crate::circle::{chordal, normalize, wrap_pm_pi, Arc, ArcSet};
use crate::error::{Error, Result};
use crate::quad;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Divergence threshold and maximal dyadic depth for adaptive log-integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogConfig {
    pub t_div: f64,
    pub max_depth: u32,
}

impl Default for LogConfig {
    fn default() -> Self {
        LogConfig { t_div: 1e6, max_depth: 40 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum LogIntegral {
    Finite { value: f64, error: f64 },
    Divergent,
}

impl LogIntegral {
    pub fn is_finite(&self) -> bool {
        matches!(self, LogIntegral::Finite { .. })
    }
    pub fn value(&self) -> Option<f64> {
        match self {
            LogIntegral::Finite { value, .. } => Some(*value),
            LogIntegral::Divergent => None,
        }
    }
    fn add(self, other: LogIntegral) -> LogIntegral {
        match (self, other) {
            (LogIntegral::Finite { value: a, error: e }, LogIntegral::Finite { value: b, error: f }) => {
                LogIntegral::Finite { value: a + b, error: e + f }
            }
            _ => LogIntegral::Divergent,
        }
    }
}

/// Parametric weight families. Arcs are closed, given as `[a, b]` counterclockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "params", rename_all = "snake_case")]
pub enum Preset {
    Constant {
        value: f64,
    },
    /// |x − e^{i·center}|^gamma
    Power {
        center: f64,
        gamma: f64,
    },
    /// exp(−s / dist(x, E)^gamma), E = points ∪ arcs
    ExpDist {
        s: f64,
        gamma: f64,
        #[serde(default)]
        points: Vec<f64>,
        #[serde(default)]
        arcs: Vec<[f64; 2]>,
    },
    /// 1_E for a finite union of closed arcs
    Indicator {
        arcs: Vec<[f64; 2]>,
    },
    /// 1_E for the fat Cantor set of normalized measure rho
    FatCantor {
        rho: f64,
    },
    Product {
        factors: Vec<Preset>,
    },
}

/// Uniform samples w(2πi/N), interpolated piecewise linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridWeight {
    pub samples: Vec<f64>,
    #[serde(default)]
    pub singular_points: Vec<f64>,
    #[serde(default = "default_floor")]
    pub floor: f64,
}

fn default_floor() -> f64 {
    f64::MIN_POSITIVE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Preset(Preset),
    Grid(GridWeight),
}

fn arcset_of(arcs: &[[f64; 2]]) -> ArcSet {
    ArcSet::from_arcs(arcs.iter().map(|a| Arc::between(a[0], a[1]).closed()).collect())
}

impl Weight {
    pub fn constant(c: f64) -> Self {
        Weight::Preset(Preset::Constant { value: c })
    }
    pub fn power(center: f64, gamma: f64) -> Self {
        Weight::Preset(Preset::Power { center, gamma })
    }
    /// exp(−s/dist(x, {points})^gamma)
    pub fn exp_dist(s: f64, gamma: f64, points: Vec<f64>) -> Self {
        Weight::Preset(Preset::ExpDist { s, gamma, points, arcs: vec![] })
    }
    pub fn indicator(arcs: Vec<[f64; 2]>) -> Self {
        Weight::Preset(Preset::Indicator { arcs })
    }
    pub fn fat_cantor(rho: f64) -> Self {
        Weight::Preset(Preset::FatCantor { rho })
    }
    pub fn grid(samples: Vec<f64>, singular_points: Vec<f64>) -> Self {
        Weight::Grid(GridWeight { samples, singular_points, floor: default_floor() })
    }

    /// Reject parameter combinations outside the supported families or
    /// weights that are not integrable.
    pub fn validate(&self) -> Result<()> {
        match self {
            Weight::Preset(p) => p.validate(),
            Weight::Grid(g) => {
                if g.samples.len() < 2 {
                    return Err(Error::Input("grid weight needs at least 2 samples".into()));
                }
                if g.samples.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::Input("grid samples must be finite and ≥ 0".into()));
                }
                if !(g.floor >= 0.0) {
                    return Err(Error::Input("floor must be ≥ 0".into()));
                }
                Ok(())
            }
        }
    }

    /// c·w
    pub fn scaled(&self, c: f64) -> Weight {
        match self {
            Weight::Preset(p) => {
                Weight::Preset(Preset::Product { factors: vec![Preset::Constant { value: c }, p.clone()] })
            }
            Weight::Grid(g) => Weight::Grid(GridWeight {
                samples: g.samples.iter().map(|v| v * c).collect(),
                singular_points: g.singular_points.clone(),
                floor: g.floor * c,
            }),
        }
    }

    /// w^p for p > 0
    pub fn powf(&self, p: f64) -> Weight {
        match self {
            Weight::Preset(q) => Weight::Preset(q.powf(p)),
            Weight::Grid(g) => Weight::Grid(GridWeight {
                samples: g.samples.iter().map(|v| v.powf(p)).collect(),
                singular_points: g.singular_points.clone(),
                floor: g.floor.powf(p),
            }),
        }
    }

    /// log w(θ); −∞ on the zero set.
    pub fn log_value(&self, theta: f64) -> f64 {
        match self {
            Weight::Preset(p) => p.log_value(theta),
            Weight::Grid(g) => {
                let v = g.interp(theta);
                if v <= g.floor {
                    f64::NEG_INFINITY
                } else {
                    v.ln()
                }
            }
        }
    }

    pub fn value(&self, theta: f64) -> f64 {
        self.log_value(theta).exp()
    }

    /// ∫_I log w dm over the arc.
    pub fn log_integral(&self, arc: &Arc, cfg: &LogConfig) -> Result<LogIntegral> {
        let (lo, hi) = arc.interval();
        self.log_integral_between(lo, hi, cfg)
    }

    /// ∫_lo^hi log w dθ/2π for lo < hi ≤ lo + 2π.
    pub fn log_integral_between(&self, lo: f64, hi: f64, cfg: &LogConfig) -> Result<LogIntegral> {
        if hi <= lo {
            return Err(Error::Input("empty arc".into()));
        }
        match self {
            Weight::Preset(p) => p.log_integral(lo, hi, cfg),
            Weight::Grid(g) => g.log_integral(lo, hi, cfg),
        }
    }

    /// ∫_lo^hi w dθ/2π with an error bound.
    pub fn integral_between(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        if hi <= lo {
            return Ok((0.0, 0.0));
        }
        match self {
            Weight::Preset(p) => p.integral(lo, hi),
            Weight::Grid(g) => Ok((g.integral(lo, hi), 1e-15 * (hi - lo))),
        }
    }

    pub fn integral_over(&self, set: &ArcSet) -> Result<(f64, f64)> {
        let mut v = 0.0;
        let mut e = 0.0;
        for (a, b) in set.intervals() {
            let (x, y) = self.integral_between(a, b)?;
            v += x;
            e += y;
        }
        Ok((v, e))
    }

    /// {w > 0} up to a null set, at dyadic resolution K where the set is not a
    /// finite union of arcs.
    pub fn carrier(&self, level: u32) -> ArcSet {
        match self {
            Weight::Preset(p) => p.carrier(level),
            Weight::Grid(g) => g.carrier(),
        }
    }

    /// True when the weight is declared to vanish identically.
    pub fn is_zero(&self) -> bool {
        match self {
            Weight::Preset(p) => p.is_zero(),
            Weight::Grid(g) => g.samples.iter().all(|v| *v <= g.floor),
        }
    }

    /// Angles where w may vanish to infinite log-order.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            Weight::Preset(p) => {
                let mut out = Vec::new();
                p.collect_singular(&mut out);
                out
            }
            Weight::Grid(g) => g.singular_points.iter().map(|t| normalize(*t)).collect(),
        }
    }
}

impl Preset {
    fn validate(&self) -> Result<()> {
        match self {
            Preset::Constant { value } => {
                if !(value.is_finite() && *value >= 0.0) {
                    return Err(Error::Input("constant weight must be finite and ≥ 0".into()));
                }
            }
            Preset::Power { gamma, center } => {
                if !(gamma.is_finite() && *gamma > -1.0 && center.is_finite()) {
                    return Err(Error::Input("power weight needs gamma > −1 to be integrable".into()));
                }
            }
            Preset::ExpDist { s, gamma, points, arcs } => {
                if !(*s > 0.0 && *gamma > 0.0 && s.is_finite() && gamma.is_finite()) {
                    return Err(Error::Input("exp_dist needs s > 0 and gamma > 0".into()));
                }
                if points.is_empty() && arcs.is_empty() {
                    return Err(Error::Input("exp_dist needs a nonempty set E".into()));
                }
            }
            Preset::Indicator { arcs } => {
                if arcs.iter().any(|a| !(a[1] > a[0])) {
                    return Err(Error::Input("indicator arcs must satisfy a < b".into()));
                }
            }
            Preset::FatCantor { rho } => {
                if !(*rho > 0.0 && *rho < 1.0) {
                    return Err(Error::Input("fat Cantor measure must lie in (0, 1)".into()));
                }
            }
            Preset::Product { factors } => {
                let mut powers = 0.0;
                for f in factors {
                    f.validate()?;
                    if let Preset::Power { gamma, .. } = f {
                        powers += gamma.min(0.0);
                    }
                }
                if powers <= -1.0 {
                    return Err(Error::Input("product of powers is not integrable".into()));
                }
            }
        }
        Ok(())
    }

    fn powf(&self, p: f64) -> Preset {
        match self {
            Preset::Constant { value } => Preset::Constant { value: value.powf(p) },
            Preset::Power { center, gamma } => Preset::Power { center: *center, gamma: gamma * p },
            Preset::ExpDist { s, gamma, points, arcs } => {
                Preset::ExpDist { s: s * p, gamma: *gamma, points: points.clone(), arcs: arcs.clone() }
            }
            Preset::Indicator { .. } | Preset::FatCantor { .. } => self.clone(),
            Preset::Product { factors } => Preset::Product { factors: factors.iter().map(|f| f.powf(p)).collect() },
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Preset::Constant { value } => *value == 0.0,
            Preset::Indicator { arcs } => arcset_of(arcs).is_empty(),
            Preset::ExpDist { arcs, .. } => arcset_of(arcs).is_full(),
            Preset::Product { factors } => factors.iter().any(|f| f.is_zero()),
            _ => false,
        }
    }

    fn collect_singular(&self, out: &mut Vec<f64>) {
        match self {
            Preset::ExpDist { points, arcs, .. } => {
                out.extend(points.iter().map(|t| normalize(*t)));
                for a in arcs {
                    out.push(normalize(a[0]));
                    out.push(normalize(a[1]));
                }
            }
            Preset::Product { factors } => factors.iter().for_each(|f| f.collect_singular(out)),
            _ => {}
        }
    }

    fn log_value(&self, theta: f64) -> f64 {
        match self {
            Preset::Constant { value } => value.ln(),
            Preset::Power { center, gamma } => {
                let d = chordal(theta, *center);
                if d == 0.0 {
                    if *gamma > 0.0 {
                        f64::NEG_INFINITY
                    } else if *gamma < 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    }
                } else {
                    gamma * d.ln()
                }
            }
            Preset::ExpDist { s, gamma, points, arcs } => {
                let d = dist_to_set(theta, points, arcs);
                if d == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    -s / d.powf(*gamma)
                }
            }
            Preset::Indicator { arcs } => {
                if arcset_of(arcs).contains(theta) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Preset::FatCantor { rho } => {
                if FatCantor::new(*rho).contains(theta) {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Preset::Product { factors } => {
                let mut s = 0.0;
                for f in factors {
                    let v = f.log_value(theta);
                    if v == f64::NEG_INFINITY {
                        return v;
                    }
                    s += v;
                }
                s
            }
        }
    }

    fn log_integral(&self, lo: f64, hi: f64, cfg: &LogConfig) -> Result<LogIntegral> {
        let m = (hi - lo) / TAU;
        match self {
            Preset::Constant { value } => Ok(if *value > 0.0 {
                LogIntegral::Finite { value: m * value.ln(), error: 0.0 }
            } else {
                LogIntegral::Divergent
            }),
            Preset::Power { center, gamma } => {
                let v = gamma * (clausen2(lo - center) - clausen2(hi - center)) / TAU;
                Ok(LogIntegral::Finite { value: v, error: 1e-14 * (1.0 + v.abs()) })
            }
            Preset::ExpDist { s, gamma, points, arcs } => exp_dist_log_integral(*s, *gamma, points, arcs, lo, hi, cfg),
            Preset::Indicator { arcs } => {
                let i = ArcSet::from_arc(Arc::between(lo, hi));
                Ok(if i.difference(&arcset_of(arcs)).length() <= 1e-14 {
                    LogIntegral::Finite { value: 0.0, error: 0.0 }
                } else {
                    LogIntegral::Divergent
                })
            }
            // nowhere dense: every arc of positive length meets a gap
            Preset::FatCantor { .. } => Ok(LogIntegral::Divergent),
            Preset::Product { factors } => {
                let mut acc = LogIntegral::Finite { value: 0.0, error: 0.0 };
                for f in factors {
                    acc = acc.add(f.log_integral(lo, hi, cfg)?);
                    if !acc.is_finite() {
                        break;
                    }
                }
                Ok(acc)
            }
        }
    }

    fn zero_arcs(&self, level: u32, out: &mut Vec<ArcSet>) {
        match self {
            Preset::Constant { value } if *value == 0.0 => out.push(ArcSet::full()),
            Preset::ExpDist { arcs, .. } => out.push(arcset_of(arcs)),
            Preset::Indicator { arcs } => out.push(arcset_of(arcs).complement()),
            Preset::FatCantor { rho } => out.push(FatCantor::new(*rho).cover(level).complement()),
            Preset::Product { factors } => factors.iter().for_each(|f| f.zero_arcs(level, out)),
            _ => {}
        }
    }

    fn carrier(&self, level: u32) -> ArcSet {
        let mut zs = Vec::new();
        self.zero_arcs(level, &mut zs);
        let mut c = ArcSet::full();
        for z in zs {
            c = c.difference(&z);
        }
        c
    }

    fn integral(&self, lo: f64, hi: f64) -> Result<(f64, f64)> {
        let m = (hi - lo) / TAU;
        match self {
            Preset::Constant { value } => return Ok((value * m, 0.0)),
            Preset::Indicator { arcs } => {
                let i = ArcSet::from_arc(Arc::between(lo, hi));
                return Ok((i.intersect(&arcset_of(arcs)).measure(), 1e-15));
            }
            Preset::FatCantor { rho } => {
                return Ok((FatCantor::new(*rho).measure_between(lo, hi), 1e-15));
            }
            Preset::Product { factors } => {
                let mut c = 1.0;
                let mut rest = Vec::new();
                for f in factors {
                    match f {
                        Preset::Constant { value } => c *= value,
                        Preset::Product { .. } => rest.push(f),
                        _ => rest.push(f),
                    }
                }
                if rest.len() == 1 {
                    let (v, e) = rest[0].integral(lo, hi)?;
                    return Ok((c * v, c * e));
                }
                if rest.iter().any(|f| matches!(f, Preset::FatCantor { .. })) {
                    return Err(Error::Input("integral of a fat-Cantor product is not supported".into()));
                }
            }
            _ => {}
        }
        let mut breaks = vec![lo, hi];
        let mut sing = Vec::new();
        self.collect_breaks(&mut sing);
        for t in sing {
            let u = lo + normalize(t - lo);
            if u > lo && u < hi {
                breaks.push(u);
            }
        }
        breaks.sort_by(f64::total_cmp);
        let e = quad::integrate_pieces(&|t: f64| self.log_value(t).exp() / TAU, &breaks, 1e-15, 1e-12, 4000);
        Ok((e.value, e.error))
    }

    fn collect_breaks(&self, out: &mut Vec<f64>) {
        match self {
            Preset::Power { center, .. } => out.push(*center),
            Preset::ExpDist { points, arcs, .. } => {
                out.extend(points);
                for a in arcs {
                    out.push(a[0]);
                    out.push(a[1]);
                }
            }
            Preset::Indicator { arcs } => {
                for a in arcs {
                    out.push(a[0]);
                    out.push(a[1]);
                }
            }
            Preset::Product { factors } => factors.iter().for_each(|f| f.collect_breaks(out)),
            _ => {}
        }
    }
}

/// Chordal distance from e^{iθ} to points ∪ closed arcs.
pub fn dist_to_set(theta: f64, points: &[f64], arcs: &[[f64; 2]]) -> f64 {
    let mut d = f64::INFINITY;
    for p in points {
        d = d.min(chordal(theta, *p));
    }
    for a in arcs {
        let arc = Arc::between(a[0], a[1]).closed();
        if arc.contains(theta) {
            return 0.0;
        }
        d = d.min(chordal(theta, a[0])).min(chordal(theta, a[1]));
    }
    d
}

/// Clausen function Cl₂(θ) = −∫_0^θ log|2 sin(t/2)| dt.
pub fn clausen2(theta: f64) -> f64 {
    let t = wrap_pm_pi(theta);
    if t == 0.0 {
        return 0.0;
    }
    let sign = t.signum();
    let x = t.abs();
    // Cl₂(x) = x − x log x + Σ_{n≥1} 2ζ(2n) x^{2n+1} / ((2π)^{2n} 2n (2n+1))
    let mut sum = x - x * x.ln();
    let r = (x / TAU) * (x / TAU);
    let mut pow = x * r;
    for n in 1..60 {
        let k = 2 * n;
        let term = 2.0 * zeta_even(n) * pow / (k as f64 * (k + 1) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
        pow *= r;
    }
    sign * sum
}

fn zeta_even(n: usize) -> f64 {
    match n {
        1 => PI * PI / 6.0,
        2 => PI.powi(4) / 90.0,
        _ => {
            let s = 2 * n as i32;
            let mut z = 0.0;
            for k in (1..=40).rev() {
                z += (k as f64).powi(-s);
            }
            // Euler–Maclaurin tail beyond k = 40
            z + 40f64.powi(1 - s) / (s - 1) as f64 - 0.5 * 40f64.powi(-s)
        }
    }
}

/// ∫ dθ / (2 sin(u/2))^γ over u ∈ [u1, u2] ⊂ [0, π], with u1 possibly 0.
fn chord_power_integral(gamma: f64, u1: f64, u2: f64, cfg: &LogConfig, scale: f64) -> Result<LogIntegral> {
    if u2 <= u1 {
        return Ok(LogIntegral::Finite { value: 0.0, error: 0.0 });
    }
    if gamma == 1.0 {
        if u1 == 0.0 {
            return Ok(LogIntegral::Divergent);
        }
        let v = (0.25 * u2).tan().ln() - (0.25 * u1).tan().ln();
        return Ok(LogIntegral::Finite { value: v, error: 1e-15 * (1.0 + v.abs()) });
    }
    let f = |u: f64| (2.0 * (0.5 * u).sin()).powf(-gamma);
    if u1 > 0.0 {
        let e = quad::integrate(f, u1, u2, 1e-15, 1e-13);
        return Ok(LogIntegral::Finite { value: e.value, error: e.error });
    }
    if gamma >= 1.0 {
        return Ok(LogIntegral::Divergent);
    }
    // dyadic shells toward the singular end with an explicit tail bound
    let mut total = 0.0;
    let mut err = 0.0;
    let mut hi = u2;
    for _ in 0..cfg.max_depth {
        let lo = 0.5 * hi;
        let e = quad::integrate(f, lo, hi, 1e-16, 1e-13);
        total += e.value;
        err += e.error;
        if scale * total > cfg.t_div {
            return Ok(LogIntegral::Divergent);
        }
        hi = lo;
    }
    // u(1 − u²/24) ≤ 2 sin(u/2) ≤ u, so the tail is hi^{1−γ}/(1−γ) to relative O(hi²)
    let tail = hi.powf(1.0 - gamma) / (1.0 - gamma);
    Ok(LogIntegral::Finite { value: total + tail, error: err + tail * hi * hi })
}

fn exp_dist_log_integral(
    s: f64,
    gamma: f64,
    points: &[f64],
    arcs: &[[f64; 2]],
    lo: f64,
    hi: f64,
    cfg: &LogConfig,
) -> Result<LogIntegral> {
    let i = ArcSet::from_arc(Arc::between(lo, hi));
    if i.intersect(&arcset_of(arcs)).length() > 0.0 {
        return Ok(LogIntegral::Divergent);
    }
    // anchors: the points of E that can be nearest
    let mut anchors: Vec<f64> = points.iter().map(|p| normalize(*p)).collect();
    for a in arcs {
        anchors.push(normalize(a[0]));
        anchors.push(normalize(a[1]));
    }
    anchors.sort_by(f64::total_cmp);
    anchors.dedup();
    // touching the closure is divergent for gamma ≥ 1
    for &e in &anchors {
        let u = lo + normalize(e - lo);
        let touches = u <= hi || (hi - lo >= TAU - 1e-15);
        if touches && gamma >= 1.0 {
            return Ok(LogIntegral::Divergent);
        }
    }
    // cut (lo, hi) at anchors and at midpoints between neighbours
    let n = anchors.len();
    let mut cuts = vec![lo, hi];
    for k in 0..n {
        let a = anchors[k];
        let b = if k + 1 < n { anchors[k + 1] } else { anchors[0] + TAU };
        for t in [a, 0.5 * (a + b)] {
            let mut u = lo + normalize(t - lo);
            while u < hi {
                if u > lo {
                    cuts.push(u);
                }
                u += TAU;
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    let mut acc = LogIntegral::Finite { value: 0.0, error: 0.0 };
    for w in cuts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let near = anchors.iter().copied().min_by(|x, y| chordal(mid, *x).total_cmp(&chordal(mid, *y))).unwrap();
        let d0 = wrap_pm_pi(w[0] - near).abs();
        let d1 = wrap_pm_pi(w[1] - near).abs();
        let (u1, u2) = if d0 <= d1 { (d0, d1) } else { (d1, d0) };
        let piece = chord_power_integral(gamma, u1, u2, cfg, s / TAU)?;
        let piece = match piece {
            LogIntegral::Finite { value, error } => {
                LogIntegral::Finite { value: -s * value / TAU, error: s * error / TAU }
            }
            d => d,
        };
        acc = acc.add(piece);
        if !acc.is_finite() {
            return Ok(acc);
        }
    }
    Ok(acc)
}

impl GridWeight {
    fn n(&self) -> usize {
        self.samples.len()
    }
    fn h(&self) -> f64 {
        TAU / self.n() as f64
    }
    fn sample(&self, i: i64) -> f64 {
        let v = self.samples[i.rem_euclid(self.n() as i64) as usize];
        if v <= self.floor {
            0.0
        } else {
            v
        }
    }
    pub fn interp(&self, theta: f64) -> f64 {
        let x = normalize(theta) / self.h();
        let i = x.floor();
        let f = x - i;
        let i = i as i64;
        let (a, b) = (self.sample(i), self.sample(i + 1));
        if f == 0.0 {
            a
        } else {
            a + f * (b - a)
        }
    }

    fn log_integral(&self, lo: f64, hi: f64, cfg: &LogConfig) -> Result<LogIntegral> {
        let inconclusive = Error::InconclusiveAtDepth { start: normalize(lo), depth: cfg.max_depth };
        let i = Arc::between(lo, hi).closed();
        for &s in &self.singular_points {
            if i.contains(s) {
                return if self.interp(s) <= 0.0 { Ok(LogIntegral::Divergent) } else { Err(inconclusive) };
            }
        }
        let h = self.h();
        let k0 = (lo / h).floor() as i64;
        let k1 = (hi / h).ceil() as i64;
        let mut total = 0.0;
        for k in k0..k1 {
            let (x0, x1) = (k as f64 * h, (k + 1) as f64 * h);
            let (a, b) = (x0.max(lo), x1.min(hi));
            if b <= a {
                continue;
            }
            let (s0, s1) = (self.sample(k), self.sample(k + 1));
            if s0 == 0.0 && s1 == 0.0 {
                return Ok(LogIntegral::Divergent);
            }
            let pa = s0 + (a - x0) / h * (s1 - s0);
            let pb = s0 + (b - x0) / h * (s1 - s0);
            if pa <= 0.0 || pb <= 0.0 {
                // isolated zero of the interpolant inside the closed arc
                return Err(inconclusive);
            }
            total += (b - a) * log_mean_linear(pa, pb);
        }
        let value = total / TAU;
        Ok(LogIntegral::Finite { value, error: 1e-13 * (1.0 + value.abs()) })
    }

    fn integral(&self, lo: f64, hi: f64) -> f64 {
        let h = self.h();
        let k0 = (lo / h).floor() as i64;
        let k1 = (hi / h).ceil() as i64;
        let mut total = 0.0;
        for k in k0..k1 {
            let (x0, x1) = (k as f64 * h, (k + 1) as f64 * h);
            let (a, b) = (x0.max(lo), x1.min(hi));
            if b <= a {
                continue;
            }
            let (s0, s1) = (self.sample(k), self.sample(k + 1));
            let pa = s0 + (a - x0) / h * (s1 - s0);
            let pb = s0 + (b - x0) / h * (s1 - s0);
            total += 0.5 * (b - a) * (pa + pb);
        }
        total / TAU
    }

    fn carrier(&self) -> ArcSet {
        let h = self.h();
        let mut iv = Vec::new();
        for k in 0..self.n() as i64 {
            if self.sample(k) > 0.0 || self.sample(k + 1) > 0.0 {
                let a = k as f64 * h;
                iv.push((a, a + h, false));
            }
        }
        ArcSet::from_intervals(iv)
    }
}

/// Mean of log over a linear function running from a to b (both > 0).
fn log_mean_linear(a: f64, b: f64) -> f64 {
    let d = b - a;
    if d.abs() <= 1e-6 * a.max(b) {
        let m = 0.5 * (a + b);
        let r = d / m;
        return m.ln() - r * r / 24.0;
    }
    (b * b.ln() - a * a.ln()) / d - 1.0
}

/// Fat Cantor set on [0, 2π): at step k the middle gap 2(1−ρ)·2π·4^{−k} is
/// removed from each of the 2^{k−1} remaining intervals.
#[derive(Debug, Clone, Copy)]
pub struct FatCantor {
    pub rho: f64,
}

const FC_DEPTH: usize = 64;

impl FatCantor {
    pub fn new(rho: f64) -> Self {
        FatCantor { rho }
    }
    /// Interval lengths ℓ_0 = 2π, ℓ_1, ….
    pub fn lengths(&self) -> Vec<f64> {
        let mut l = vec![TAU];
        for k in 1..=FC_DEPTH {
            let gap = 2.0 * (1.0 - self.rho) * TAU * 4f64.powi(-(k as i32));
            let prev = l[k - 1];
            l.push(0.5 * (prev - gap));
        }
        l
    }
    pub fn contains(&self, theta: f64) -> bool {
        let l = self.lengths();
        let mut x = normalize(theta);
        for k in 1..=FC_DEPTH {
            if x <= l[k] {
                continue;
            }
            let right = l[k - 1] - l[k];
            if x >= right {
                x -= right;
                continue;
            }
            return false;
        }
        true
    }
    /// Normalized measure of E ∩ [lo, hi] (unwrapped).
    pub fn measure_between(&self, lo: f64, hi: f64) -> f64 {
        let l = self.lengths();
        let mut total = 0.0;
        let mut a = lo;
        while a < hi {
            let base = (a / TAU).floor() * TAU;
            let b = hi.min(base + TAU);
            total += self.rec(&l, 0, base, a, b);
            a = b;
        }
        total
    }
    fn rec(&self, l: &[f64], k: usize, s: f64, lo: f64, hi: f64) -> f64 {
        let e = s + l[k];
        if hi <= s || lo >= e {
            return 0.0;
        }
        let full = self.rho / 2f64.powi(k as i32);
        if lo <= s && hi >= e {
            return full;
        }
        if k == FC_DEPTH {
            return full * ((hi.min(e) - lo.max(s)) / l[k]);
        }
        let d = l[k] - l[k + 1];
        self.rec(l, k + 1, s, lo, hi) + self.rec(l, k + 1, s + d, lo, hi)
    }
    /// Union of the 2^k level-k intervals, with k the first level whose
    /// intervals are shorter than 2π·2^{−K}.
    pub fn cover(&self, level: u32) -> ArcSet {
        let l = self.lengths();
        let target = TAU * 2f64.powi(-(level as i32));
        let k = (1..=FC_DEPTH).find(|&k| l[k] < target).unwrap_or(FC_DEPTH).min(20);
        let mut starts = vec![0.0];
        for j in 1..=k {
            let d = l[j - 1] - l[j];
            let mut next = Vec::with_capacity(starts.len() * 2);
            for s in &starts {
                next.push(*s);
                next.push(s + d);
            }
            starts = next;
        }
        ArcSet::from_intervals(starts.into_iter().map(|s| (s, s + l[k], true)).collect())
    }
    /// ∫_E e^{−inθ} dm as the exact infinite product.
    pub fn fourier(&self, n: i64) -> num_complex::Complex64 {
        let l = self.lengths();
        let mut p = num_complex::Complex64::new(self.rho, 0.0);
        for k in 1..=FC_DEPTH {
            let d = l[k - 1] - l[k];
            let ph = -(n as f64) * d;
            p *= num_complex::Complex64::new(1.0 + ph.cos(), ph.sin()) * 0.5;
            if (n as f64 * d).abs() < 1e-18 {
                break;
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> LogConfig {
        LogConfig::default()
    }

    fn fin(r: Result<LogIntegral>) -> f64 {
        r.unwrap().value().expect("finite")
    }

    #[test]
    fn clausen_values() {
        // Cl₂(π/2) is Catalan's constant
        assert!((clausen2(PI / 2.0) - 0.915_965_594_177_219).abs() < 1e-14);
        assert!(clausen2(PI).abs() < 1e-14);
        assert!((clausen2(PI / 3.0) - 1.014_941_606_409_653_6).abs() < 1e-14);
        assert!((clausen2(-1.0) + clausen2(1.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_one_is_zero() {
        let w = Weight::constant(1.0);
        let v = fin(w.log_integral(&Arc::between(0.3, 2.0), &cfg()));
        assert_eq!(v, 0.0);
    }

    #[test]
    fn example_1_5_diverges_across_zero() {
        let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
        let r = w.log_integral(&Arc::between(-0.5, 0.5), &cfg()).unwrap();
        assert_eq!(r, LogIntegral::Divergent);
        let r = w.log_integral(&Arc::between(0.1, 0.5), &cfg()).unwrap();
        assert!(r.is_finite());
    }

    #[test]
    fn power_matches_quadrature_oracle() {
        let w = Weight::power(0.0, 2.0);
        let v = fin(w.log_integral(&Arc::between(-0.5, 0.5), &cfg()));
        let oracle = quad::integrate(|t: f64| 2.0 * (2.0 * (0.5 * t).sin()).abs().ln() / TAU, -0.5, 0.0, 1e-15, 1e-14)
            .value
            + quad::integrate(|t: f64| 2.0 * (2.0 * (0.5 * t).sin()).abs().ln() / TAU, 0.0, 0.5, 1e-15, 1e-14).value;
        assert!((v - oracle).abs() < 1e-11, "{v} {oracle}");
    }

    #[test]
    fn exp_dist_closed_form_matches_quadrature() {
        let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
        let v = fin(w.log_integral(&Arc::between(0.2, 2.5), &cfg()));
        let oracle = quad::integrate(|t: f64| -1.0 / chordal(t, 0.0) / TAU, 0.2, 2.5, 1e-15, 1e-14).value;
        assert!((v - oracle).abs() < 1e-12);
        // gamma < 1 touching the point is finite
        let w = Weight::exp_dist(1.0, 0.5, vec![0.0]);
        let v = fin(w.log_integral(&Arc::between(0.0, 1.0), &cfg()));
        let oracle =
            -(1.0 / TAU) * quad::integrate(|t: f64| (2.0 * (0.5 * t).sin()).powf(-0.5), 0.0, 1.0, 1e-14, 1e-12).value;
        assert!((v - oracle).abs() < 1e-8, "{v} {oracle}");
    }

    #[test]
    fn scaling_adds_log_c() {
        let w = Weight::power(1.0, 1.5);
        let a = Arc::between(0.4, 3.0);
        let base = fin(w.log_integral(&a, &cfg()));
        let sc = fin(w.scaled(10.0).log_integral(&a, &cfg()));
        assert!((sc - base - a.length / TAU * 10f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn indicator_arc() {
        let w = Weight::indicator(vec![[1.0, 2.0]]);
        assert!(fin(w.log_integral(&Arc::between(1.2, 1.8), &cfg())) == 0.0);
        assert_eq!(w.log_integral(&Arc::between(0.9, 1.5), &cfg()).unwrap(), LogIntegral::Divergent);
    }

    #[test]
    fn fat_cantor_structure() {
        let e = FatCantor::new(0.5);
        assert!((e.measure_between(0.0, TAU) - 0.5).abs() < 1e-15);
        let l = e.lengths();
        assert!((l[1] - 0.75 * PI).abs() < 1e-15);
        assert!(e.contains(0.0));
        assert!(!e.contains(PI));
        assert!((e.fourier(0).re - 0.5).abs() < 1e-15);
        // left half of the circle carries half the mass by symmetry
        assert!((e.measure_between(0.0, PI) - 0.25).abs() < 1e-14);
        let c = e.cover(10);
        assert!(c.measure() > 0.5 && c.measure() < 0.5 + 1e-3);
    }

    #[test]
    fn fat_cantor_fourier_matches_cover_quadrature() {
        let e = FatCantor::new(0.5);
        let cover = e.cover(16);
        for n in [1i64, 3, 7] {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for (a, b) in cover.intervals() {
                let f = |t: f64| num_complex::Complex64::new(0.0, -(n as f64) * t).exp();
                acc += (f(b) - f(a)) / num_complex::Complex64::new(0.0, -(n as f64)) / TAU;
            }
            // the cover overshoots E by measure 2^{-17}
            assert!((acc - e.fourier(n)).norm() < 2e-5, "{n}");
        }
    }

    #[test]
    fn grid_log_integral_exact_for_linear_pieces() {
        let n = 64;
        let samples: Vec<f64> = (0..n).map(|i| 2.0 + (i as f64 * TAU / n as f64).cos()).collect();
        let w = Weight::grid(samples, vec![]);
        let v = fin(w.log_integral_between(0.0, TAU, &cfg()));
        // log of the true weight integrates to log((2+√3)/2)
        assert!((v - ((2.0 + 3f64.sqrt()) / 2.0).ln()).abs() < 1e-3);
    }

    #[test]
    fn grid_zero_rules() {
        let mut s = vec![1.0; 32];
        s[0] = 0.0;
        let w = Weight::grid(s.clone(), vec![]);
        assert!(matches!(w.log_integral_between(-0.1, 0.1, &cfg()), Err(Error::InconclusiveAtDepth { .. })));
        let w = Weight::grid(s.clone(), vec![0.0]);
        assert_eq!(w.log_integral_between(-0.1, 0.1, &cfg()).unwrap(), LogIntegral::Divergent);
        s[1] = 0.0;
        let w = Weight::grid(s, vec![]);
        assert_eq!(w.log_integral_between(0.0, 0.5, &cfg()).unwrap(), LogIntegral::Divergent);
        assert!(w.log_integral_between(1.0, 2.0, &cfg()).unwrap().is_finite());
    }

    #[test]
    fn json_roundtrip() {
        let w = Weight::Preset(Preset::Product {
            factors: vec![
                Preset::Constant { value: 0.5 },
                Preset::ExpDist { s: 1.0, gamma: 1.0, points: vec![0.0], arcs: vec![] },
            ],
        });
        let s = serde_json::to_string(&w).unwrap();
        let back: Weight = serde_json::from_str(&s).unwrap();
        assert_eq!(w, back);
        let g: Weight = serde_json::from_str(r#"{"kind":"grid","samples":[1,2,3]}"#).unwrap();
        assert!(matches!(g, Weight::Grid(_)));
    }
}
