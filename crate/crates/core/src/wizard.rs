//! Wizard-hat profiles built from a majorant, the L¹(ω) series certificate,
//! the Beurling–Ahlfors bound and walk-on-spheres harmonic measure.

use crate::error::{Error, Result};
use crate::moments::{log_f_upper_integral, Majorant};
use crate::par;
use crate::quad;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Head length of the γ sums; the rest is covered by the ∫ log F certificate.
const HEAD: usize = 64;
/// Knots kept in a profile.
pub const KNOTS: usize = 64;
/// γ_n are summed up to this index for the tail sums behind t_n.
const GAMMA_TERMS: usize = 1000;

fn alpha(n: usize, n0: u32) -> f64 {
    0.5f64.powi((n as i32) + n0 as i32)
}

fn gamma(f: &Majorant, n: usize, n0: u32) -> f64 {
    let a = alpha(n, n0);
    a * f.log_eval(a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N0Certificate {
    pub n0: u32,
    /// Σ_{n ≤ HEAD} γ_n
    pub head: f64,
    /// 2∫_0^{α_HEAD} log F ≥ Σ_{n > HEAD} γ_n
    pub tail_bound: f64,
    pub epsilon: f64,
}

/// Smallest n₀ with Σ γ_n < ε, certified by head sum plus integral tail.
pub fn choose_n0(f: &Majorant, eps: f64) -> Result<N0Certificate> {
    f.certify()?;
    if !(eps > 0.0) {
        return Err(Error::Input("ε must be positive".into()));
    }
    for n0 in 0..200u32 {
        if alpha(1, n0) > f.d {
            continue;
        }
        if f.log_eval(alpha(1, n0)) <= 0.0 {
            continue;
        }
        let head: f64 = (1..=HEAD).map(|n| gamma(f, n, n0)).sum();
        let tail_bound = 2.0 * log_f_upper_integral(f, alpha(HEAD, n0))?;
        if head + tail_bound < eps {
            return Ok(N0Certificate { n0, head, tail_bound, epsilon: eps });
        }
    }
    Err(Error::NotAMajorant("no n₀ ≤ 200 makes Σ γ_n < ε".into()))
}

/// ψ₁(x) = Σ_{k≥0} 1/(x + k)² for x ≥ 1.
pub fn trigamma(x: f64) -> f64 {
    let mut s = 0.0;
    let mut y = x;
    while y < 20.0 {
        s += 1.0 / (y * y);
        y += 1.0;
    }
    let y2 = 1.0 / (y * y);
    s + 1.0 / y + 0.5 * y2 + (1.0 / y) * y2 * (1.0 / 6.0 - y2 * (1.0 / 30.0 - y2 * (1.0 / 42.0 - y2 / 30.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WizardProfile {
    /// I = (a, b); the construction is normalised to (0, 2)
    pub interval: [f64; 2],
    pub n0: u32,
    /// α_n, n = 1..=KNOTS
    pub alphas: Vec<f64>,
    /// γ_n, n = 1..=KNOTS + 1
    pub gammas: Vec<f64>,
    /// Δt_n, n = 1..=KNOTS
    pub deltas: Vec<f64>,
    /// t_n, n = 1..=KNOTS + 1
    pub knots: Vec<f64>,
    #[serde(rename = "A")]
    pub a_const: f64,
    /// Σ_{n≥1} γ_n (head plus certified tail)
    pub gamma_sum: f64,
}

impl WizardProfile {
    /// p(x): log-log interpolation through (t_n, α_n), power-law continuation below
    /// the last knot and constant α₁ beyond t₁.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let (t, al) = (&self.knots, &self.alphas);
        if x >= t[0] {
            return al[0];
        }
        let m = al.len();
        // knots decrease: find n with t[n+1] ≤ x < t[n]
        let n = match t[..m].iter().position(|&tk| tk <= x) {
            Some(i) => i - 1,
            None => m - 2,
        };
        let s = self.slope(n);
        al[n] * (x / t[n]).powf(s)
    }

    /// log-log slope on [t_{n+1}, t_n] (0-based n)
    fn slope(&self, n: usize) -> f64 {
        (self.alphas[n] / self.alphas[n + 1]).ln() / (self.knots[n] / self.knots[n + 1]).ln()
    }

    fn deriv(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.knots[0] {
            return 0.0;
        }
        let m = self.alphas.len();
        let n = match self.knots[..m].iter().position(|&tk| tk <= x) {
            Some(i) => i - 1,
            None => m - 2,
        };
        self.slope(n) * self.eval(x) / x
    }
}

/// Δt_{n−1} = A/n² + (2/π)γ_{n+1} with A fixed by Σ Δt = 1.
pub fn build_profile(f: &Majorant, eps: f64) -> Result<WizardProfile> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::Input("the construction needs 0 < ε ≤ 1/2".into()));
    }
    let cert = choose_n0(f, eps)?;
    let n0 = cert.n0;
    let g: Vec<f64> = (1..=GAMMA_TERMS).map(|n| gamma(f, n, n0)).collect();
    // suffix[k] = Σ_{m ≥ k+1} γ_m (1-based m), summed from the small end
    let mut suffix = vec![0.0; GAMMA_TERMS + 1];
    for k in (0..GAMMA_TERMS).rev() {
        suffix[k] = suffix[k + 1] + g[k];
    }
    let gamma_sum = suffix[0];
    if !(gamma_sum < 0.5) {
        return Err(Error::Precondition("Σ γ_n ≥ 1/2".into()));
    }
    let tail = |k: usize| if (1..=GAMMA_TERMS).contains(&k) { suffix[k - 1] } else { 0.0 };
    let a_const = (1.0 - 2.0 / PI * tail(3)) / (PI * PI / 6.0 - 1.0);
    if !(a_const > 0.0) {
        return Err(Error::Precondition("A ≤ 0".into()));
    }
    let alphas: Vec<f64> = (1..=KNOTS).map(|n| alpha(n, n0)).collect();
    let gammas = g[..=KNOTS].to_vec();
    // Δt_n = A/(n+1)² + (2/π)γ_{n+2}
    let deltas: Vec<f64> = (1..=KNOTS).map(|n| a_const / ((n + 1) * (n + 1)) as f64 + 2.0 / PI * g[n + 1]).collect();
    // t_n = Σ_{k≥n} Δt_k = A·ψ₁(n+1) + (2/π)Σ_{m≥n+2} γ_m
    let mut knots: Vec<f64> =
        (1..=KNOTS + 1).map(|n| a_const * trigamma(n as f64 + 1.0) + 2.0 / PI * tail(n + 2)).collect();
    knots[0] = 1.0;
    Ok(WizardProfile { interval: [0.0, 2.0], n0, alphas, gammas, deltas, knots, a_const, gamma_sum })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileChecks {
    /// |Σ_{n ≤ KNOTS} Δt_n + t_{KNOTS+1} − 1|
    pub delta_sum_error: f64,
    /// max over 2 ≤ n ≤ KNOTS of |γ_{n+1} − (π/2)Δt_{n−1} + (Aπ/2)/n²|
    pub identity_error: f64,
    pub knots_decreasing: bool,
    pub interpolates: bool,
}

pub fn check_profile(p: &WizardProfile) -> ProfileChecks {
    let sum: f64 = p.deltas.iter().sum::<f64>() + p.knots[KNOTS];
    let identity_error = (2..=KNOTS)
        .map(|n| (p.gammas[n] - FRAC_PI_2 * p.deltas[n - 2] + p.a_const * FRAC_PI_2 / (n * n) as f64).abs())
        .fold(0.0, f64::max);
    ProfileChecks {
        delta_sum_error: (sum - 1.0).abs(),
        identity_error,
        knots_decreasing: p.knots.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0),
        interpolates: p.knots[..KNOTS].iter().zip(&p.alphas).all(|(&t, &a)| (p.eval(t) - a).abs() <= 1e-14 * a),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesBound {
    /// (8/π) exp(−(Aπ/2)·2^{n+1+n₀}/n²), n = 2..
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub tail_bound: f64,
    /// first n from which the terms decrease
    pub monotone_from: usize,
    pub total_bound: f64,
    pub finite: bool,
}

pub fn hat_boundary_integral_bound(p: &WizardProfile) -> SeriesBound {
    let a = p.a_const;
    let term =
        |n: usize| 8.0 / PI * (-(a * FRAC_PI_2) * 2f64.powi((n + 1) as i32 + p.n0 as i32) / (n * n) as f64).exp();
    let nmax = 60;
    let terms: Vec<f64> = (2..=nmax).map(term).collect();
    let mut partial_sums = Vec::with_capacity(terms.len());
    let mut s = 0.0;
    for t in &terms {
        s += t;
        partial_sums.push(s);
    }
    let monotone_from =
        (0..terms.len() - 1).rev().take_while(|&i| terms[i + 1] <= terms[i]).last().map_or(nmax, |i| i + 2);
    // beyond nmax the ratio is below 1/2, so the tail is at most the last term
    let last = *terms.last().unwrap();
    let ratio = term(nmax + 1) / last.max(f64::MIN_POSITIVE);
    let tail_bound = if last == 0.0 { 0.0 } else { last * ratio / (1.0 - ratio.min(0.5)) };
    SeriesBound {
        total_bound: s + tail_bound,
        finite: (s + tail_bound).is_finite(),
        terms,
        partial_sums,
        tail_bound,
        monotone_from,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// p(x) = x^q
    Power {
        q: f64,
    },
    /// p ≡ h: the hat is a rectangle
    Constant {
        h: f64,
    },
    Wizard(WizardProfile),
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Power { q } => {
                if x <= 0.0 {
                    0.0
                } else {
                    x.powf(*q)
                }
            }
            Profile::Constant { h } => *h,
            Profile::Wizard(w) => w.eval(x),
        }
    }

    /// max |p'| on [u, v] ∩ (0, ∞)
    fn max_slope(&self, u: f64, v: f64) -> f64 {
        let u = u.max(0.0);
        if v <= u {
            return 0.0;
        }
        match self {
            Profile::Power { q } => {
                let d = |x: f64| {
                    if x <= 0.0 {
                        if *q < 1.0 {
                            f64::INFINITY
                        } else if *q == 1.0 {
                            1.0
                        } else {
                            0.0
                        }
                    } else {
                        q * x.powf(q - 1.0)
                    }
                };
                d(u).max(d(v))
            }
            Profile::Constant { .. } => 0.0,
            Profile::Wizard(w) => {
                let mut m = w.deriv(u).max(w.deriv(v));
                for (i, &t) in w.knots[..w.alphas.len()].iter().enumerate() {
                    if t >= u && t <= v {
                        // both one-sided derivatives at the knot
                        m = m.max(w.deriv(t));
                        if i + 1 < w.alphas.len() {
                            m = m.max(w.slope(i) * w.alphas[i] / t);
                        }
                    }
                }
                m
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hat {
    pub a: f64,
    pub b: f64,
    pub profile: Profile,
}

impl Hat {
    pub fn new(a: f64, b: f64, profile: Profile) -> Result<Self> {
        if !(b > a) {
            return Err(Error::Input("hat interval needs a < b".into()));
        }
        Ok(Hat { a, b, profile })
    }
    pub fn top(&self, x: f64) -> f64 {
        self.profile.eval(x - self.a).min(self.profile.eval(self.b - x))
    }
    fn max_top_slope(&self, lo: f64, hi: f64) -> f64 {
        let mid = 0.5 * (self.b - self.a);
        let left = self.profile.max_slope(lo - self.a, (hi - self.a).min(mid));
        let right = self.profile.max_slope(self.b - hi, (self.b - lo).min(mid));
        left.max(right)
    }
    pub fn contains(&self, x: f64, y: f64) -> bool {
        x > self.a && x < self.b && y > 0.0 && y < self.top(x)
    }
}

/// (8/π)exp(−2π ∫_t^{x₀} dx/p(x − a))
pub fn beurling_ahlfors_bound(hat: &Hat, t: f64, x0: f64) -> Result<f64> {
    if !(t >= hat.a && t < x0) {
        return Err(Error::Precondition(format!("need a ≤ t < Re z₀, got t = {t}, Re z₀ = {x0}")));
    }
    let f = |x: f64| {
        let p = hat.profile.eval(x - hat.a);
        if p > 0.0 {
            1.0 / p
        } else {
            f64::INFINITY
        }
    };
    let mut br = vec![t, x0];
    if let Profile::Wizard(w) = &hat.profile {
        br.extend(w.knots.iter().map(|k| k + hat.a).filter(|&k| k > t && k < x0));
    }
    // geometric grading toward the cusp side
    let mut d = 0.5 * (x0 - t);
    while d > 1e-12 * (x0 - t) {
        br.push(t + d);
        d *= 0.5;
    }
    br.sort_by(f64::total_cmp);
    br.dedup();
    let e = quad::integrate_pieces(&f, &br, 1e-12, 1e-12, 20_000);
    if !e.value.is_finite() {
        return Ok(0.0);
    }
    Ok(8.0 / PI * (-TAU * e.value).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Disk,
    Rectangle { x0: f64, x1: f64, y0: f64, y1: f64 },
    Hat(Hat),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "piece", rename_all = "snake_case")]
pub enum BoundaryPiece {
    /// counterclockwise angles in [from, to] on the unit circle
    DiskArc {
        from: f64,
        to: f64,
    },
    Left,
    Right,
    Bottom,
    Top,
    /// left side and top curve over a < x < t
    Bt {
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Exit {
    side: Side,
    x: f64,
    y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub walks: u64,
    pub seed: u64,
    pub workers: usize,
    /// capture layer relative to the domain diameter
    pub capture: f64,
    pub max_steps: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { walks: 100_000, seed: 42, workers: 1, capture: 1e-6, max_steps: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicMeasureEstimate {
    pub value: f64,
    pub std_error: f64,
    pub walks: u64,
    pub failed: u64,
    pub step_rule: String,
}

impl Domain {
    fn diameter(&self) -> f64 {
        match self {
            Domain::Disk => 2.0,
            Domain::Rectangle { x0, x1, y0, y1 } => (x1 - x0).hypot(y1 - y0),
            Domain::Hat(h) => (h.b - h.a).hypot(h.top(0.5 * (h.a + h.b))),
        }
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        match self {
            Domain::Disk => x.hypot(y) < 1.0,
            Domain::Rectangle { x0, x1, y0, y1 } => x > *x0 && x < *x1 && y > *y0 && y < *y1,
            Domain::Hat(h) => h.contains(x, y),
        }
    }

    /// Lower bound for the distance to the boundary and the nearest side.
    fn distance(&self, x: f64, y: f64) -> (f64, Side) {
        let pick =
            |c: [(f64, Side); 4]| c.into_iter().fold((f64::INFINITY, Side::Left), |m, v| if v.0 < m.0 { v } else { m });
        match self {
            Domain::Disk => (1.0 - x.hypot(y), Side::Circle),
            Domain::Rectangle { x0, x1, y0, y1 } => {
                pick([(x - x0, Side::Left), (x1 - x, Side::Right), (y - y0, Side::Bottom), (y1 - y, Side::Top)])
            }
            Domain::Hat(h) => {
                let gap = h.top(x) - y;
                let l = h.max_top_slope(x - gap, x + gap);
                let top = gap / (1.0 + l * l).sqrt();
                pick([(x - h.a, Side::Left), (h.b - x, Side::Right), (y, Side::Bottom), (top, Side::Top)])
            }
        }
    }

    fn walk(&self, x: f64, y: f64, cap: f64, max_steps: u64, rng: &mut ChaCha8Rng) -> Option<Exit> {
        let (mut x, mut y) = (x, y);
        for _ in 0..max_steps {
            let (r, side) = self.distance(x, y);
            if r < cap {
                return Some(Exit { side, x, y });
            }
            let phi = TAU * rng.random::<f64>();
            x += r * phi.cos();
            y += r * phi.sin();
        }
        None
    }
}

fn in_piece(domain: &Domain, piece: &BoundaryPiece, e: &Exit) -> bool {
    match piece {
        BoundaryPiece::DiskArc { from, to } => {
            let th = crate::circle::normalize(e.y.atan2(e.x) - from);
            th <= crate::circle::normalize(to - from)
        }
        BoundaryPiece::Left => e.side == Side::Left,
        BoundaryPiece::Right => e.side == Side::Right,
        BoundaryPiece::Bottom => e.side == Side::Bottom,
        BoundaryPiece::Top => e.side == Side::Top,
        BoundaryPiece::Bt { t } => match domain {
            Domain::Hat(_) | Domain::Rectangle { .. } => e.side == Side::Left || (e.side == Side::Top && e.x < *t),
            Domain::Disk => false,
        },
    }
}

/// Exit points of cfg.walks walks from z₀, split across workers with
/// ChaCha8 streams (seed, worker index).
fn exits(domain: &Domain, z0: (f64, f64), cfg: &McConfig) -> Result<(Vec<Exit>, u64)> {
    if !domain.contains(z0.0, z0.1) {
        return Err(Error::Input(format!("z₀ = ({}, {}) is not inside the domain", z0.0, z0.1)));
    }
    if cfg.walks == 0 || cfg.workers == 0 {
        return Err(Error::Input("walks and workers must be positive".into()));
    }
    let cap = cfg.capture * domain.diameter();
    let workers: Vec<u64> = (0..cfg.workers as u64).collect();
    let per = cfg.walks / cfg.workers as u64;
    let extra = cfg.walks % cfg.workers as u64;
    let chunks = par::map(&workers, |&w| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(w);
        let n = per + u64::from(w < extra);
        let mut out = Vec::with_capacity(n as usize);
        let mut failed = 0;
        for _ in 0..n {
            match domain.walk(z0.0, z0.1, cap, cfg.max_steps, &mut rng) {
                Some(e) => out.push(e),
                None => failed += 1,
            }
        }
        (out, failed)
    });
    let failed: u64 = chunks.iter().map(|c| c.1).sum();
    if failed as f64 > 1e-3 * cfg.walks as f64 {
        return Err(Error::NonConvergedWalks { failed, walks: cfg.walks });
    }
    Ok((chunks.into_iter().flat_map(|c| c.0).collect(), failed))
}

fn estimate(
    domain: &Domain,
    piece: &BoundaryPiece,
    ex: &[Exit],
    cfg: &McConfig,
    failed: u64,
) -> HarmonicMeasureEstimate {
    let n = cfg.walks as f64;
    let hits = ex.iter().filter(|e| in_piece(domain, piece, e)).count() as f64;
    let p = hits / n;
    HarmonicMeasureEstimate {
        value: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        walks: cfg.walks,
        failed,
        step_rule: format!("walk on spheres, capture layer {:e}·diam, {} step budget", cfg.capture, cfg.max_steps),
    }
}

pub fn harmonic_measure_mc(
    domain: &Domain,
    z0: (f64, f64),
    piece: &BoundaryPiece,
    cfg: &McConfig,
) -> Result<HarmonicMeasureEstimate> {
    let (ex, failed) = exits(domain, z0, cfg)?;
    Ok(estimate(domain, piece, &ex, cfg, failed))
}

/// Estimates for several pieces from one set of walks.
pub fn harmonic_measure_pieces(
    domain: &Domain,
    z0: (f64, f64),
    pieces: &[BoundaryPiece],
    cfg: &McConfig,
) -> Result<Vec<HarmonicMeasureEstimate>> {
    let (ex, failed) = exits(domain, z0, cfg)?;
    Ok(pieces.iter().map(|p| estimate(domain, p, &ex, cfg, failed)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BtRow {
    pub t: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub bound: f64,
    pub pass: bool,
}

/// ω(z₀, B_t, W) against (8/π)exp(−2π ∫_t^{Re z₀} dx/p(x − a)).
pub fn verify_bt_bound(hat: &Hat, ts: &[f64], z0: (f64, f64), cfg: &McConfig) -> Result<Vec<BtRow>> {
    let bounds = ts.iter().map(|&t| beurling_ahlfors_bound(hat, t, z0.0)).collect::<Result<Vec<_>>>()?;
    let domain = Domain::Hat(hat.clone());
    let pieces: Vec<BoundaryPiece> = ts.iter().map(|&t| BoundaryPiece::Bt { t }).collect();
    let est = harmonic_measure_pieces(&domain, z0, &pieces, cfg)?;
    Ok(ts
        .iter()
        .zip(bounds)
        .zip(est)
        .map(|((&t, bound), e)| BtRow {
            t,
            estimate: e.value,
            std_error: e.std_error,
            bound,
            pass: e.value - 3.0 * e.std_error <= bound,
        })
        .collect())
}

/// ω(z, left side) of (0, L)×(0, h) by separation of variables.
pub fn rectangle_left_side(l: f64, h: f64, x: f64, y: f64) -> f64 {
    let mut s = 0.0;
    for k in (1..20_000).step_by(2) {
        let k = k as f64;
        let a = k * PI * (l - x) / h;
        let b = k * PI * l / h;
        // sinh(a)/sinh(b) without overflow
        let r = (a - b).exp() * (-(-2.0 * a).exp()).ln_1p().exp() / (1.0 - (-2.0 * b).exp());
        let term = 4.0 / (k * PI) * (k * PI * y / h).sin() * r;
        s += term;
        if r < 1e-18 {
            break;
        }
    }
    s
}
