//! Legendre envelopes on (0, ∞):
//! lower m_*(x) = inf_{y>0} m(y) + xy and upper k^*(x) = sup_{y>0} k(y) − xy.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Behaviour of a piecewise-linear function beyond its outer knots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    /// continue with the end slope
    Linear,
    /// right tail k_N + 2s_N√x_N(√x − √x_N), matching the end slope
    Sqrt,
    /// undefined outside the knots (+∞ for m, −∞ for k)
    Wall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub left: Tail,
    pub right: Tail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeFunction {
    /// m(x) = c / x^β
    InversePower {
        c: f64,
        beta: f64,
    },
    /// k(x) = d √x
    Sqrt {
        d: f64,
    },
    /// k(x) = a x
    Linear {
        a: f64,
    },
    Constant {
        value: f64,
    },
    Knots(PiecewiseLinear),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// decreasing convex, argument of the lower envelope
    DecreasingConvex,
    /// increasing concave, argument of the upper envelope
    IncreasingConcave,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, left: Tail, right: Tail) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(Error::Input("knot arrays must be nonempty and of equal length".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs[0] <= 0.0 {
            return Err(Error::Input("knots must be positive and strictly increasing".into()));
        }
        if xs.len() == 1 && (left != Tail::Wall || right != Tail::Wall) {
            return Err(Error::Input("a single knot has no slope to extend".into()));
        }
        Ok(PiecewiseLinear { xs, ys, left, right })
    }

    /// Interpolant of (xs, ys) on (0, ∞) with linear tails.
    pub fn linear_tails(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(xs, ys, Tail::Linear, Tail::Linear)
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.xs.windows(2).zip(self.ys.windows(2)).map(|(x, y)| (y[1] - y[0]) / (x[1] - x[0])).collect()
    }

    fn first_slope(&self) -> f64 {
        (self.ys[1] - self.ys[0]) / (self.xs[1] - self.xs[0])
    }
    fn last_slope(&self) -> f64 {
        let n = self.xs.len();
        (self.ys[n - 1] - self.ys[n - 2]) / (self.xs[n - 1] - self.xs[n - 2])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            return match self.left {
                Tail::Linear => self.ys[0] + (x - self.xs[0]) * self.first_slope(),
                _ => f64::NAN,
            };
        }
        if x > self.xs[n - 1] {
            let s = self.last_slope();
            return match self.right {
                Tail::Linear => self.ys[n - 1] + (x - self.xs[n - 1]) * s,
                Tail::Sqrt => self.ys[n - 1] + 2.0 * s * self.xs[n - 1].sqrt() * (x.sqrt() - self.xs[n - 1].sqrt()),
                Tail::Wall => f64::NAN,
            };
        }
        let i = self.xs.partition_point(|&t| t <= x).clamp(1, n - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        y0 + (x - x0) / (x1 - x0) * (y1 - y0)
    }

    /// sup_{y>0} k(y) − xy for concave knots, by binary search on the slopes.
    pub fn conjugate_at(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            return self.ys[0] - x * self.xs[0];
        }
        let s = self.slopes();
        let j = s.partition_point(|&v| v > x);
        let mut v = self.ys[j] - x * self.xs[j];
        let (s0, sn) = (s[0], s[n - 2]);
        if self.left == Tail::Linear && s0 < x {
            v = v.max(self.ys[0] - s0 * self.xs[0]);
        }
        match self.right {
            Tail::Linear if sn > x => v = f64::INFINITY,
            Tail::Sqrt if x < sn => {
                let xn = self.xs[n - 1];
                v = v.max(self.ys[n - 1] - 2.0 * sn * xn + xn * sn * sn / x);
            }
            _ => {}
        }
        v
    }
}

impl EnvelopeFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            EnvelopeFunction::InversePower { c, beta } => c / x.powf(*beta),
            EnvelopeFunction::Sqrt { d } => d * x.sqrt(),
            EnvelopeFunction::Linear { a } => a * x,
            EnvelopeFunction::Constant { value } => *value,
            EnvelopeFunction::Knots(p) => p.eval(x),
        }
    }

    /// Verify the declared monotonicity and convexity on the knots.
    pub fn check(&self, shape: Shape) -> Result<()> {
        let bad = |m: &str| Err(Error::Domain(m.into()));
        match (self, shape) {
            (EnvelopeFunction::InversePower { c, beta }, Shape::DecreasingConvex) => {
                if *c > 0.0 && *beta > 0.0 {
                    Ok(())
                } else {
                    bad("c/x^β needs c > 0 and β > 0")
                }
            }
            (EnvelopeFunction::Constant { value }, Shape::DecreasingConvex) if *value >= 0.0 => Ok(()),
            (EnvelopeFunction::Sqrt { d }, Shape::IncreasingConcave) => {
                if *d > 0.0 {
                    Ok(())
                } else {
                    bad("d√x must increase to ∞ (d > 0)")
                }
            }
            (EnvelopeFunction::Linear { a }, Shape::IncreasingConcave) => {
                if *a > 0.0 {
                    Ok(())
                } else {
                    bad("a·x must increase to ∞ (a > 0)")
                }
            }
            (EnvelopeFunction::Knots(p), Shape::DecreasingConvex) => {
                let s = p.slopes();
                if s.iter().any(|v| *v > 1e-15) {
                    return bad("knots are not decreasing");
                }
                if s.windows(2).any(|w| w[1] < w[0] - 1e-12 * w[0].abs().max(1.0)) {
                    return bad("knots are not convex");
                }
                if p.right == Tail::Sqrt {
                    return bad("a square-root tail is increasing");
                }
                Ok(())
            }
            (EnvelopeFunction::Knots(p), Shape::IncreasingConcave) => {
                let s = p.slopes();
                if s.iter().any(|v| *v <= 0.0) {
                    return bad("knots are not increasing");
                }
                if s.windows(2).any(|w| w[1] > w[0] + 1e-12 * w[0].abs().max(1.0)) {
                    return bad("slopes are not decreasing (not concave)");
                }
                Ok(())
            }
            _ => bad("function kind does not have the required shape"),
        }
    }
}

/// m_*(x) for each x (x > 0).
pub fn lower_envelope(m: &EnvelopeFunction, xs: &[f64]) -> Result<Vec<f64>> {
    m.check(Shape::DecreasingConvex)?;
    match m {
        EnvelopeFunction::InversePower { c, beta } => {
            Ok(xs.iter().map(|&x| d_beta_c(*beta, *c) * x.powf(beta / (beta + 1.0))).collect())
        }
        EnvelopeFunction::Constant { value } => Ok(vec![*value; xs.len()]),
        EnvelopeFunction::Knots(p) => Ok(march(xs, |order, out| lower_pl(p, order, xs, out))),
        _ => unreachable!(),
    }
}

/// k^*(x) for each x (x > 0); +∞ where the supremum is unbounded.
pub fn upper_envelope(k: &EnvelopeFunction, xs: &[f64]) -> Result<Vec<f64>> {
    k.check(Shape::IncreasingConcave)?;
    match k {
        EnvelopeFunction::Sqrt { d } => Ok(xs.iter().map(|&x| d * d / (4.0 * x)).collect()),
        EnvelopeFunction::Linear { a } => Ok(xs.iter().map(|&x| if x >= *a { 0.0 } else { f64::INFINITY }).collect()),
        EnvelopeFunction::Knots(p) => Ok(march(xs, |order, out| upper_pl(p, order, xs, out))),
        _ => unreachable!(),
    }
}

fn march(xs: &[f64], f: impl FnOnce(&[usize], &mut [f64])) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut out = vec![0.0; xs.len()];
    f(&order, &mut out);
    out
}

/// Marching over knots: as x grows the minimizing knot index moves left.
fn lower_pl(p: &PiecewiseLinear, order: &[usize], xs: &[f64], out: &mut [f64]) {
    let n = p.xs.len();
    let g = |j: usize, x: f64| p.ys[j] + x * p.xs[j];
    let mut j = n - 1;
    for &q in order {
        let x = xs[q];
        while j > 0 && g(j - 1, x) <= g(j, x) {
            j -= 1;
        }
        let mut v = g(j, x);
        if n >= 2 {
            if p.left == Tail::Linear && p.first_slope() + x > 0.0 {
                v = v.min(p.ys[0] - p.first_slope() * p.xs[0]);
            }
            if p.right == Tail::Linear && p.last_slope() + x < 0.0 {
                v = f64::NEG_INFINITY;
            }
        }
        out[q] = v;
    }
}

fn upper_pl(p: &PiecewiseLinear, order: &[usize], xs: &[f64], out: &mut [f64]) {
    let n = p.xs.len();
    let g = |j: usize, x: f64| p.ys[j] - x * p.xs[j];
    let mut j = n - 1;
    for &q in order {
        let x = xs[q];
        while j > 0 && g(j - 1, x) >= g(j, x) {
            j -= 1;
        }
        let mut v = g(j, x);
        if n >= 2 {
            let s0 = p.first_slope();
            let sn = p.last_slope();
            if p.left == Tail::Linear && s0 - x < 0.0 {
                v = v.max(p.ys[0] - s0 * p.xs[0]);
            }
            match p.right {
                Tail::Linear if sn - x > 0.0 => v = f64::INFINITY,
                Tail::Sqrt if x < sn => {
                    let xn = p.xs[n - 1];
                    let y = xn * sn * sn / (x * x);
                    v = v.max(p.ys[n - 1] + 2.0 * sn * xn.sqrt() * (y.sqrt() - xn.sqrt()) - x * y);
                }
                _ => {}
            }
        }
        out[q] = v;
    }
}

/// d(β, c) = c^{1/(β+1)}(β^{−β/(β+1)} + β^{1/(β+1)}): the lower envelope of
/// c/x^β is d(β, c)·x^{β/(β+1)}.
pub fn d_beta_c(beta: f64, c: f64) -> f64 {
    let e = 1.0 / (beta + 1.0);
    c.powf(e) * (beta.powf(-beta * e) + beta.powf(e))
}

/// The upper envelope k^* of a piecewise-linear concave k, itself
/// piecewise linear with knots at the slopes of k.
pub fn conjugate_knots(p: &PiecewiseLinear) -> Result<PiecewiseLinear> {
    EnvelopeFunction::Knots(p.clone()).check(Shape::IncreasingConcave)?;
    let mut ss = p.slopes();
    ss.reverse();
    ss.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    let ys = upper_envelope(&EnvelopeFunction::Knots(p.clone()), &ss)?;
    let right = if p.left == Tail::Linear { Tail::Linear } else { Tail::Wall };
    if ss.len() == 1 {
        return Err(Error::Domain("k is linear; its conjugate is a single point".into()));
    }
    PiecewiseLinear::new(ss, ys, Tail::Wall, right)
}

/// sup over the grid of |(k^*)_*(x) − k(x)|.
pub fn inversion_check(k: &EnvelopeFunction, grid: &[f64]) -> Result<f64> {
    k.check(Shape::IncreasingConcave)?;
    let back: Vec<f64> = match k {
        EnvelopeFunction::Sqrt { d } => {
            // k^*(y) = d²/(4y) = c/y with c = d²/4; lower envelope 2√(c x) = d√x
            lower_envelope(&EnvelopeFunction::InversePower { c: d * d / 4.0, beta: 1.0 }, grid)?
        }
        EnvelopeFunction::Knots(p) => {
            let q = conjugate_knots(p)?;
            // the conjugate is convex decreasing on [s_N, ∞) with a flat right tail
            let q = flatten_right(q);
            lower_pl_any(&q, grid)
        }
        EnvelopeFunction::Linear { a } => {
            // k^* = 0 on [a, ∞): (k^*)_*(x) = inf_{y ≥ a} xy = a x
            grid.iter().map(|x| a * x).collect()
        }
        _ => unreachable!(),
    };
    Ok(grid.iter().zip(back).map(|(x, v)| (v - k.eval(*x)).abs()).fold(0.0, f64::max))
}

fn flatten_right(mut q: PiecewiseLinear) -> PiecewiseLinear {
    if q.right == Tail::Linear {
        let n = q.xs.len();
        let last = q.xs[n - 1];
        q.xs.push(last * 2.0 + 1.0);
        q.ys.push(q.ys[n - 1]);
    }
    q.right = Tail::Wall;
    q
}

fn lower_pl_any(p: &PiecewiseLinear, xs: &[f64]) -> Vec<f64> {
    march(xs, |order, out| lower_pl(p, order, xs, out))
}
