//! Radial weights G on [0, 1]: increasing, G(0) = 0, G > 0 on (0, 1].

use crate::error::{Error, Result};
use crate::legendre::{EnvelopeFunction, PiecewiseLinear, Shape};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWeight {
    /// exp(−c/t^β), β ≥ 1
    T1 { beta: f64, c: f64 },
    /// exp(−c·exp(t^{−α})), 0 < α < 1
    T2 { alpha: f64, c: f64 },
    /// G(t) = t
    Linear,
    /// log G interpolated linearly in log t through (ts, gs); below the
    /// first knot the first log-log slope is continued.
    Tabulated { ts: Vec<f64>, gs: Vec<f64> },
    /// G = exp(−k^*) for a concave piecewise-linear k.
    Envelope { k: PiecewiseLinear },
}

impl RadialWeight {
    pub fn t1(beta: f64, c: f64) -> Self {
        RadialWeight::T1 { beta, c }
    }
    pub fn t2(alpha: f64, c: f64) -> Self {
        RadialWeight::T2 { alpha, c }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialWeight::T1 { beta, c } => {
                if !(*beta >= 1.0 && *c > 0.0 && beta.is_finite() && c.is_finite()) {
                    return Err(Error::Input("T1 needs β ≥ 1 and c > 0".into()));
                }
            }
            RadialWeight::T2 { alpha, c } => {
                if !(*alpha > 0.0 && *alpha < 1.0 && *c > 0.0 && c.is_finite()) {
                    return Err(Error::Input("T2 needs 0 < α < 1 and c > 0".into()));
                }
            }
            RadialWeight::Linear => {}
            RadialWeight::Tabulated { ts, gs } => {
                if ts.len() < 2 || ts.len() != gs.len() {
                    return Err(Error::Input("tabulated G needs at least two (t, G) pairs".into()));
                }
                if ts[0] <= 0.0 || *ts.last().unwrap() > 1.0 || ts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Input("tabulated t must be strictly increasing in (0, 1]".into()));
                }
                if gs[0] <= 0.0 || gs.windows(2).any(|w| w[1] < w[0]) {
                    return Err(Error::Input("tabulated G must be positive and increasing".into()));
                }
            }
            RadialWeight::Envelope { k } => {
                EnvelopeFunction::Knots(k.clone()).check(Shape::IncreasingConcave)?;
                if k.right == crate::legendre::Tail::Linear {
                    return Err(Error::Input("a linear right tail makes k^* infinite near 0".into()));
                }
            }
        }
        Ok(())
    }

    /// log G(t) for t in (0, 1]; −∞ at t = 0.
    pub fn log_g(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            RadialWeight::T1 { beta, c } => -c / t.powf(*beta),
            RadialWeight::T2 { alpha, c } => -c * t.powf(-alpha).exp(),
            RadialWeight::Linear => t.ln(),
            RadialWeight::Tabulated { ts, gs } => {
                let lt = t.ln();
                let i = ts.partition_point(|&u| u <= t).clamp(1, ts.len() - 1);
                let (x0, x1) = (ts[i - 1].ln(), ts[i].ln());
                let (y0, y1) = (gs[i - 1].ln(), gs[i].ln());
                y0 + (lt - x0) * (y1 - y0) / (x1 - x0)
            }
            RadialWeight::Envelope { k } => -k.conjugate_at(t),
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        self.log_g(t).exp()
    }

    /// log log(1/G(t)), finite even where 1/G overflows; NaN where G ≥ 1.
    pub fn log_log_inv(&self, t: f64) -> f64 {
        match self {
            RadialWeight::T1 { beta, c } => c.ln() - beta * t.ln(),
            RadialWeight::T2 { alpha, c } => c.ln() + t.powf(-alpha),
            _ => {
                let v = -self.log_g(t);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NAN
                }
            }
        }
    }

    pub fn is_preset(&self) -> bool {
        matches!(self, RadialWeight::T1 { .. } | RadialWeight::T2 { .. } | RadialWeight::Linear)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_values() {
        assert!((RadialWeight::t1(1.0, 1.0).g(0.5) - (-2f64).exp()).abs() < 1e-15);
        assert!((RadialWeight::Linear.g(0.3) - 0.3).abs() < 1e-15);
        let t2 = RadialWeight::t2(0.5, 1.0);
        assert!((t2.log_g(0.25) + 2f64.exp()).abs() < 1e-12);
        assert!((t2.log_log_inv(1e-6) - 1000.0).abs() < 1e-9);
        assert_eq!(RadialWeight::Linear.g(0.0), 0.0);
    }

    #[test]
    fn validation() {
        assert!(RadialWeight::t1(0.5, 1.0).validate().is_err());
        assert!(RadialWeight::t2(1.0, 1.0).validate().is_err());
        let tab = RadialWeight::Tabulated { ts: vec![0.1, 0.5, 1.0], gs: vec![0.01, 0.2, 0.1] };
        assert!(tab.validate().is_err());
    }

    #[test]
    fn tabulated_interpolates_power_exactly() {
        let ts: Vec<f64> = vec![0.01, 0.1, 1.0];
        let gs: Vec<f64> = ts.iter().map(|t| t * t).collect();
        let g = RadialWeight::Tabulated { ts, gs };
        g.validate().unwrap();
        for t in [0.001, 0.05, 0.7] {
            assert!((g.g(t) - t * t).abs() < 1e-14 * (1.0 + t * t));
        }
    }
}
