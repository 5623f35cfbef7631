//! Moment functions P_G, moment sequences, admissibility, growth classes
//! and majorants.

use crate::error::{Error, Result};
use crate::legendre::{PiecewiseLinear, Tail};
use crate::par;
use crate::quad;
use crate::radial::RadialWeight;
use serde::{Deserialize, Serialize};

pub use crate::legendre::d_beta_c;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moment {
    pub value: f64,
    pub error: f64,
}

/// Breakpoints on (0, 1): geometric toward both ends down to 1e-12.
fn moment_breaks() -> Vec<f64> {
    let n = 280;
    let ratio = (0.5f64 / 1e-12).powf(1.0 / n as f64);
    let left: Vec<f64> = (0..=n).map(|i| 1e-12 * ratio.powi(i)).collect();
    let mut b = vec![0.0];
    b.extend(left.iter().copied());
    b.extend(left.iter().rev().skip(1).map(|u| 1.0 - u));
    b.push(1.0);
    b
}

/// P_G(x) = ∫_0^1 G(u)(1 − u)^x du with a certified error bound.
pub fn moment_function(g: &RadialWeight, x: f64) -> Result<Moment> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Input("moment order must be a finite x ≥ 0".into()));
    }
    let h = |u: f64| {
        let lg = g.log_g(u);
        if x == 0.0 {
            lg
        } else {
            lg + x * (-u).ln_1p()
        }
    };
    let breaks = moment_breaks();
    let peak = breaks.iter().map(|&u| h(u)).filter(|v| !v.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    // refine the peak between samples so the scaled integrand stays ≤ ~1
    let i = breaks.iter().position(|&u| h(u) == peak).unwrap_or(1);
    let (lo, hi) = (breaks[i.saturating_sub(1)], breaks[(i + 1).min(breaks.len() - 1)]);
    let peak = (0..=64).map(|k| h(lo + (hi - lo) * k as f64 / 64.0)).fold(peak, f64::max);
    if !peak.is_finite() {
        return Ok(Moment { value: 0.0, error: 0.0 });
    }
    let f = |u: f64| {
        let v = h(u) - peak;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let est = quad::integrate_pieces(&f, &breaks, 0.0, 1e-11, 20_000);
    let s = peak.exp();
    Ok(Moment { value: est.value * s, error: est.error * s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum Provenance {
    FromG { g: RadialWeight },
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    #[serde(default)]
    pub errors: Vec<f64>,
    pub provenance: Provenance,
}

impl MomentSequence {
    /// Explicit data M_0..M_N; must be positive and decreasing.
    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        check_sequence(&values)?;
        Ok(MomentSequence { errors: vec![0.0; values.len()], values, provenance: Provenance::Explicit })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
    pub fn degree(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// M^p, entrywise.
    pub fn powf(&self, p: f64) -> Result<MomentSequence> {
        MomentSequence::explicit(self.values.iter().map(|m| m.powf(p)).collect())
    }

    /// exp(−n/(log n + 1)^p) for n ≥ 1, M_0 = 1, with the finite head where
    /// the formula still increases replaced by its running minimum.
    pub fn log_power_family(p: f64, n: usize) -> Self {
        let mut v = vec![1.0];
        for k in 1..=n {
            let m = (-(k as f64) / ((k as f64).ln() + 1.0).powf(p)).exp();
            v.push(m.min(*v.last().unwrap()));
        }
        MomentSequence::explicit(v).expect("running minimum is decreasing")
    }

    /// exp(−d√n)
    pub fn exp_sqrt(d: f64, n: usize) -> Self {
        MomentSequence::explicit((0..=n).map(|k| (-d * (k as f64).sqrt()).exp()).collect())
            .expect("family is decreasing")
    }
}

fn check_sequence(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::Input("moment sequence is empty".into()));
    }
    if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::Input("moments must be positive and finite".into()));
    }
    if let Some(i) = values.windows(2).position(|w| w[1] > w[0]) {
        return Err(Error::Input(format!("moment sequence increases at n = {}", i + 1)));
    }
    Ok(())
}

/// M_n = 2·P_G(2n + 1) for n = 0..=N.
pub fn moments_of_g(g: &RadialWeight, n: usize) -> Result<MomentSequence> {
    g.validate()?;
    let idx: Vec<usize> = (0..=n).collect();
    let ms = par::map(&idx, |&k| moment_function(g, 2.0 * k as f64 + 1.0));
    let mut values = Vec::with_capacity(n + 1);
    let mut errors = Vec::with_capacity(n + 1);
    for m in ms {
        let m = m?;
        values.push(2.0 * m.value);
        errors.push(2.0 * m.error);
    }
    check_sequence(&values)?;
    Ok(MomentSequence { values, errors, provenance: Provenance::FromG { g: g.clone() } })
}

/// Lower envelope of m(y) = c/y^β, where G = exp(−m).
pub fn t1_lower_envelope(beta: f64, c: f64, x: f64) -> f64 {
    d_beta_c(beta, c) * x.powf(beta / (beta + 1.0))
}

/// (exp(−m_*(2x))/(4x), P_G(x), exp(−m_*(x))) for a T1 weight.
pub fn t1_sandwich(beta: f64, c: f64, x: f64) -> Result<(f64, Moment, f64)> {
    let g = RadialWeight::t1(beta, c);
    g.validate()?;
    let p = moment_function(&g, x)?;
    let lo = (-t1_lower_envelope(beta, c, 2.0 * x)).exp() / (4.0 * x);
    let hi = (-t1_lower_envelope(beta, c, x)).exp();
    Ok((lo, p, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvexTail {
    pub holds: bool,
    /// first index from which M_n² ≤ M_{n−1}M_{n+1} on the available data
    pub from_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqrtDecay {
    pub holds: bool,
    pub fitted_d: f64,
    pub window: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailSum {
    pub holds: bool,
    /// Σ_{n ≤ N} log(1/M_n)/(1 + n²)
    pub partial_sum: f64,
    /// decay exponent of the condensed terms; None for analytic verdicts
    pub fitted_p: Option<f64>,
    pub analytic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub log_convex_tail: ConvexTail,
    pub sqrt_decay: SqrtDecay,
    pub tail_sum: TailSum,
    pub admissible: bool,
    /// number of available moments; verdicts hold up to this index
    pub resolution: usize,
}

pub const D_MIN: f64 = 1e-3;

/// Definition of admissibility checked on finite data.
pub fn is_admissible(m: &MomentSequence) -> Result<AdmissibilityReport> {
    let n = m.degree();
    if n < 20 {
        return Err(Error::Precondition("at least 21 moments are needed for a tail verdict".into()));
    }
    check_sequence(&m.values)?;
    let v = &m.values;
    let lv: Vec<f64> = v.iter().map(|x| x.ln()).collect();

    let mut from = None;
    for k in (1..n).rev() {
        if 2.0 * lv[k] <= lv[k - 1] + lv[k + 1] + 1e-12 * lv[k].abs().max(1.0) {
            from = Some(k);
        } else {
            break;
        }
    }
    let convex = ConvexTail { holds: from.is_some_and(|k| k <= n / 2), from_index: from };

    let lo = (n / 2).max(1);
    let fitted_d = (lo..=n).map(|k| -lv[k] / (k as f64).sqrt()).fold(f64::INFINITY, f64::min);
    let sqrt = SqrtDecay { holds: fitted_d >= D_MIN, fitted_d, window: (lo, n) };

    let partial_sum: f64 = (0..=n).map(|k| -lv[k] / (1.0 + (k * k) as f64)).sum();
    let tail = match &m.provenance {
        Provenance::FromG { g } if g.is_preset() => {
            // log(1/M_n) grows like √n for T1/T2 and like log n for G(t) = t
            TailSum { holds: true, partial_sum, fitted_p: None, analytic: true }
        }
        _ => {
            let p = condensed_exponent(&lv);
            TailSum { holds: p.is_some_and(|p| p > 1.05), partial_sum, fitted_p: p, analytic: false }
        }
    };
    let admissible = convex.holds && sqrt.holds && tail.holds;
    Ok(AdmissibilityReport { log_convex_tail: convex, sqrt_decay: sqrt, tail_sum: tail, admissible, resolution: n })
}

/// Fit t_k ≈ C·(k ln 2 + 1)^{−p} to the condensed terms
/// t_k = 2^k log(1/M_{2^k})/(1 + 4^k).
fn condensed_exponent(lv: &[f64]) -> Option<f64> {
    let mut pts = Vec::new();
    let mut k = 1;
    while (1usize << k) < lv.len() {
        let nk = (1usize << k) as f64;
        let t = nk * (-lv[1 << k]) / (1.0 + nk * nk);
        if t > 0.0 {
            pts.push(((k as f64 * std::f64::consts::LN_2 + 1.0).ln(), t.ln()));
        }
        k += 1;
    }
    // drop the first points, where the asymptotic regime has not started
    let pts: Vec<(f64, f64)> = pts.into_iter().skip(2).collect();
    if pts.len() < 3 {
        return None;
    }
    let nn = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nn;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nn;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationRow {
    pub n: usize,
    pub p_g: f64,
    pub m_n: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleG {
    pub g: RadialWeight,
    pub table: Vec<VerificationRow>,
    /// first n from which P_G(2n+1) ≤ M_n holds on the whole table
    pub threshold: Option<usize>,
}

/// G = exp(−k^*) for the concave interpolant k of (2n + 1, log 1/M_n).
pub fn admissible_to_g(m: &MomentSequence, acknowledge_unverified: bool) -> Result<AdmissibleG> {
    check_sequence(&m.values)?;
    if !acknowledge_unverified {
        let rep = is_admissible(m)?;
        if !rep.admissible {
            return Err(Error::NotAdmissible("the sequence fails the admissibility check".into()));
        }
    }
    let xs: Vec<f64> = (0..m.len()).map(|n| 2.0 * n as f64 + 1.0).collect();
    let ys: Vec<f64> = m.values.iter().map(|v| -v.ln()).collect();
    let k = PiecewiseLinear::new(xs, ys, Tail::Linear, Tail::Sqrt)?;
    let s = k.slopes();
    if s.iter().any(|v| *v <= 0.0) {
        return Err(Error::NotAdmissible("log 1/M_n is not strictly increasing".into()));
    }
    if let Some(i) = s.windows(2).position(|w| w[1] > w[0] * (1.0 + 1e-12)) {
        return Err(Error::NotAdmissible(format!("slopes of the interpolant increase at n = {}", i + 1)));
    }
    let g = RadialWeight::Envelope { k };
    let idx: Vec<usize> = (0..m.len()).collect();
    let rows = par::map(&idx, |&n| -> Result<VerificationRow> {
        let p = moment_function(&g, 2.0 * n as f64 + 1.0)?;
        Ok(VerificationRow { n, p_g: p.value, m_n: m.values[n], holds: p.value <= m.values[n] })
    });
    let table = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let threshold = match table.iter().rposition(|r| !r.holds) {
        None => Some(0),
        Some(i) if i + 1 < table.len() => Some(i + 1),
        Some(_) => None,
    };
    Ok(AdmissibleG { g, table, threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthFlag {
    pub holds: bool,
    pub analytic: bool,
    /// the numeric proxy used when not analytic
    pub proxy: Option<f64>,
}

impl GrowthFlag {
    fn analytic(holds: bool) -> Self {
        GrowthFlag { holds, analytic: true, proxy: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthClass {
    pub exp_dec: GrowthFlag,
    pub log_log_int: GrowthFlag,
    pub log_int: GrowthFlag,
    /// numeric proxies are evaluated down to t = 2^{−level}
    pub level: u32,
}

const GROWTH_LEVEL: u32 = 40;

/// The (ExpDec), (LogLogInt) and (LogInt) tags.
pub fn growth_class(g: &RadialWeight) -> Result<GrowthClass> {
    g.validate()?;
    let level = GROWTH_LEVEL;
    Ok(match g {
        RadialWeight::T1 { .. } | RadialWeight::T2 { .. } => GrowthClass {
            exp_dec: GrowthFlag::analytic(true),
            log_log_int: GrowthFlag::analytic(true),
            log_int: GrowthFlag::analytic(false),
            level,
        },
        RadialWeight::Linear => GrowthClass {
            exp_dec: GrowthFlag::analytic(false),
            log_log_int: GrowthFlag::analytic(true),
            log_int: GrowthFlag::analytic(true),
            level,
        },
        _ => {
            let exp_dec = (20..=level)
                .map(|j| {
                    let x = 0.5f64.powi(j as i32);
                    -x * g.log_g(x)
                })
                .fold(f64::INFINITY, f64::min);
            let ll = shell_decay(|t| g.log_log_inv(t), level);
            let l = shell_decay(|t| -g.log_g(t), level);
            GrowthClass {
                exp_dec: GrowthFlag { holds: exp_dec >= 1e-6, analytic: false, proxy: Some(exp_dec) },
                log_log_int: GrowthFlag { holds: ll < 1e-3, analytic: false, proxy: Some(ll) },
                log_int: GrowthFlag { holds: l < 1e-3, analytic: false, proxy: Some(l) },
                level,
            }
        }
    })
}

/// Ratio of the deepest dyadic shell integral of |f| to the largest one.
fn shell_decay(f: impl Fn(f64) -> f64, level: u32) -> f64 {
    let shells: Vec<f64> = (4..=level)
        .map(|j| {
            let a = 0.5f64.powi(j as i32 + 1);
            let e = quad::integrate(|t| f(t).abs(), a, 2.0 * a, 0.0, 1e-8);
            e.value
        })
        .collect();
    let max = shells.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 || shells.iter().any(|s| !s.is_finite()) {
        return f64::INFINITY;
    }
    shells.last().unwrap() / max
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MajorantKind {
    /// F(t) = 1/t
    Inverse,
    /// F(t) = log(8/t³) + ½ log(1/G(t/2))
    FromG { g: RadialWeight },
    /// F ≡ value (never a majorant)
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Majorant {
    #[serde(flatten)]
    pub kind: MajorantKind,
    pub d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MajorantCertificate {
    pub decreasing: bool,
    pub blow_up_ratio: f64,
    /// upper bound for ∫_0^d log F dt
    pub log_integral_bound: f64,
}

impl Majorant {
    pub fn inverse() -> Self {
        Majorant { kind: MajorantKind::Inverse, d: 1.0 }
    }

    /// log F(t), evaluated without overflow.
    pub fn log_eval(&self, t: f64) -> f64 {
        match &self.kind {
            MajorantKind::Inverse => -t.ln(),
            MajorantKind::Constant { value } => value.ln(),
            MajorantKind::FromG { g } => {
                let a = 8f64.ln() - 3.0 * t.ln();
                let ll = g.log_log_inv(0.5 * t);
                if ll.is_nan() {
                    return (a + 0.5 * (-g.log_g(0.5 * t))).ln();
                }
                // log(a + ½e^{ll})
                let b = ll + 0.5f64.ln();
                if b > a.ln() {
                    b + (a * (-b).exp()).ln_1p()
                } else {
                    a.ln() + ((b - a.ln()).exp()).ln_1p()
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.log_eval(t).exp()
    }

    /// Verify monotonicity, blow-up at 0 and a finite bound for ∫_0^d log F.
    pub fn certify(&self) -> Result<MajorantCertificate> {
        if !(self.d > 0.0 && self.d <= 1.0) {
            return Err(Error::NotAMajorant("d must lie in (0, 1]".into()));
        }
        let grid: Vec<f64> = (0..=600).map(|i| self.d * 0.5f64.powf(i as f64 / 10.0)).collect();
        let lf: Vec<f64> = grid.iter().map(|&t| self.log_eval(t)).collect();
        if lf.iter().any(|v| v.is_nan()) {
            return Err(Error::NotAMajorant("F is not positive on (0, d)".into()));
        }
        let decreasing = lf.windows(2).all(|w| w[1] >= w[0] - 1e-12 * w[0].abs());
        if !decreasing {
            return Err(Error::NotAMajorant("F is not decreasing on (0, d)".into()));
        }
        let blow_up_ratio = (lf[lf.len() - 1] - lf[0]).exp();
        if !(blow_up_ratio >= 10.0) {
            return Err(Error::NotAMajorant("F does not tend to infinity at 0".into()));
        }
        let bound = log_f_upper_integral(self, self.d)?;
        Ok(MajorantCertificate { decreasing, blow_up_ratio, log_integral_bound: bound })
    }
}

/// Upper Riemann sum of ∫_0^a log⁺F over dyadic shells plus a geometric tail.
pub fn log_f_upper_integral(f: &Majorant, a: f64) -> Result<f64> {
    let mut sum = 0.0;
    let mut prev = f64::NAN;
    let mut last = 0.0;
    let shells = 200;
    for j in 0..shells {
        let lo = a * 0.5f64.powi(j + 1);
        let term = lo * f.log_eval(lo).max(0.0);
        sum += term;
        prev = last;
        last = term;
    }
    let r = if prev > 0.0 { last / prev } else { 0.0 };
    if !(r < 0.9) || !sum.is_finite() {
        return Err(Error::NotAMajorant("∫ log F could not be certified finite".into()));
    }
    Ok(sum + last * r / (1.0 - r))
}

/// The majorant bounding point evaluations for G(1 − |z|) dA.
pub fn majorant_from_g(g: &RadialWeight) -> Result<Majorant> {
    let gc = growth_class(g)?;
    if !gc.log_log_int.holds {
        return Err(Error::NotAMajorant("G fails (LogLogInt)".into()));
    }
    let f = Majorant { kind: MajorantKind::FromG { g: g.clone() }, d: 0.5 };
    f.certify()?;
    Ok(f)
}
