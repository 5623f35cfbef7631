//! core(w), res(w) and the carrier test at dyadic resolution K.

use crate::circle::{Arc, ArcSet};
use crate::error::{Error, Result};
use crate::par;
use crate::weight::{LogConfig, LogIntegral, Weight};
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

pub const DEFAULT_LEVEL: u32 = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreReport {
    pub core: ArcSet,
    /// complement of core ∪ inconclusive: points where every level-K arc diverges
    pub excluded: ArcSet,
    /// one representative per excluded component (a declared singular
    /// point of w when the component contains one)
    pub singular_points: Vec<f64>,
    pub level: u32,
    pub inconclusive: ArcSet,
}

enum Verdict {
    Finite,
    Divergent,
    Inconclusive,
}

impl Tri {
    /// Process exit status for a verdict: 3 when withheld.
    pub fn exit_code(self) -> i32 {
        match self {
            Tri::Inconclusive => 3,
            _ => 0,
        }
    }
}

/// Level-K arcs of the two staggered dyadic grids.
fn grid_arcs(level: u32) -> Vec<(f64, f64)> {
    let n = 1usize << level;
    let h = TAU / n as f64;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        out.push((j as f64 * h, (j + 1) as f64 * h));
        out.push(((j as f64 + 0.5) * h, (j as f64 + 1.5) * h));
    }
    out
}

pub fn core_set(w: &Weight, level: u32) -> Result<CoreReport> {
    core_set_with(w, level, &LogConfig::default())
}

pub fn core_set_with(w: &Weight, level: u32, cfg: &LogConfig) -> Result<CoreReport> {
    if level < 3 {
        return Err(Error::Input("resolution level must be at least 3".into()));
    }
    if level > 24 {
        return Err(Error::Input("resolution level above 24 is not supported".into()));
    }
    w.validate()?;
    let arcs = grid_arcs(level);
    let verdicts = par::map(&arcs, |&(lo, hi)| match w.log_integral_between(lo, hi, cfg) {
        Ok(LogIntegral::Finite { .. }) => Ok(Verdict::Finite),
        Ok(LogIntegral::Divergent) => Ok(Verdict::Divergent),
        Err(Error::InconclusiveAtDepth { .. }) => Ok(Verdict::Inconclusive),
        Err(e) => Err(e),
    });
    let mut fin = Vec::new();
    let mut inc = Vec::new();
    for (v, &(lo, hi)) in verdicts.into_iter().zip(&arcs) {
        match v? {
            Verdict::Finite => fin.push(Arc::between(lo, hi)),
            Verdict::Inconclusive => inc.push(Arc::between(lo, hi).closed()),
            Verdict::Divergent => {}
        }
    }
    let core = ArcSet::from_arcs(fin);
    let inconclusive = ArcSet::from_arcs(inc).difference(&core);
    let excluded = core.union(&inconclusive).complement();
    let declared = w.singular_points();
    let singular_points = excluded
        .arcs()
        .iter()
        .map(|a| declared.iter().copied().find(|&t| a.closed().contains(t)).unwrap_or_else(|| a.midpoint()))
        .collect();
    Ok(CoreReport { core, excluded, singular_points, level, inconclusive })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: ArcSet,
    pub measure: f64,
    /// singular points of the core report lying in the carrier
    pub points: Vec<f64>,
    pub level: u32,
}

/// carrier(w) ∖ core(w) at resolution K.
pub fn residual_set(w: &Weight, level: u32) -> Result<(CoreReport, ResidualReport)> {
    let rep = core_set(w, level)?;
    let carrier = w.carrier(level);
    let residual = carrier.difference(&rep.core);
    assert!(residual.intersect(&rep.core).length() <= 1e-12, "res(w) ∩ core(w) must be empty");
    let points = rep
        .singular_points
        .iter()
        .copied()
        .filter(|&t| carrier.classify(t) != crate::circle::Membership::Outside)
        .collect();
    let r = ResidualReport { measure: residual.measure(), residual, points, level };
    Ok((rep, r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierReport {
    pub verdict: Tri,
    /// ∫ w dm over the complement of core
    pub complement_integral: f64,
    pub complement_error: f64,
    /// ∫ w dm over the inconclusive arcs
    pub inconclusive_integral: f64,
    pub residual_measure: f64,
    pub core: CoreReport,
}

/// Whether core(w) carries w, up to `tol` in ∫ w dm.
pub fn is_core_carrier(w: &Weight, level: u32, tol: f64) -> Result<CarrierReport> {
    if !(tol > 0.0) {
        return Err(Error::Input("tol must be positive".into()));
    }
    let (core, res) = residual_set(w, level)?;
    let (ci, ce) = w.integral_over(&core.excluded)?;
    let (ii, ie) = w.integral_over(&core.inconclusive)?;
    let verdict = if ii + ie > tol {
        Tri::Inconclusive
    } else if ci + ce <= tol {
        Tri::Yes
    } else if ci - ce > tol {
        Tri::No
    } else {
        Tri::Inconclusive
    };
    Ok(CarrierReport {
        verdict,
        complement_integral: ci,
        complement_error: ce,
        inconclusive_integral: ii,
        residual_measure: res.measure,
        core,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn example_one_five_core() {
        let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
        let r = core_set(&w, 14).unwrap();
        let h = TAU / (1u32 << 14) as f64;
        assert_eq!(r.excluded.arcs().len(), 1);
        assert!((r.excluded.length() - h).abs() < 1e-12);
        assert!(r.excluded.contains(0.0));
        assert_eq!(r.singular_points, vec![0.0]);
        assert!(r.core.contains(PI) && !r.core.contains(0.0));
        assert!(r.inconclusive.is_empty());
    }

    #[test]
    fn trivial_and_indicator() {
        let r = core_set(&Weight::constant(1.0), 10).unwrap();
        assert!(r.core.is_full() && r.singular_points.is_empty());
        let w = Weight::indicator(vec![[1.0, 2.0]]);
        let r = core_set(&w, 12).unwrap();
        assert!(r.core.is_subset_of(&ArcSet::from_arc(Arc::between(1.0, 2.0)), 0.0));
        let h = TAU / 4096.0;
        assert!(r.core.length() >= 1.0 - 2.0 * h);
        let r = core_set(&Weight::constant(0.0), 8).unwrap();
        assert!(r.core.is_empty());
    }

    #[test]
    fn residuals() {
        let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
        let (_, r) = residual_set(&w, 14).unwrap();
        assert!(r.measure <= 1.0 / 16384.0 + 1e-15);
        let (c, r) = residual_set(&Weight::fat_cantor(0.5), 8).unwrap();
        assert!(c.core.is_empty());
        // the level-8 cover of E has measure slightly above 1/2
        assert!(r.measure >= 0.5 && r.measure < 0.51, "{}", r.measure);
        let (c, r) = residual_set(&Weight::constant(0.0), 8).unwrap();
        assert!(c.core.is_empty() && r.residual.is_empty());
    }

    #[test]
    fn carrier_verdicts() {
        let w = Weight::exp_dist(1.0, 1.0, vec![0.0]);
        assert_eq!(is_core_carrier(&w, 14, 1e-8).unwrap().verdict, Tri::Yes);
        let r = is_core_carrier(&Weight::fat_cantor(0.5), 10, 1e-8).unwrap();
        assert_eq!(r.verdict, Tri::No);
        assert!((r.complement_integral - 0.5).abs() < 1e-9);
        assert_eq!(is_core_carrier(&Weight::constant(1.0), 10, 1e-8).unwrap().verdict, Tri::Yes);
    }
}
