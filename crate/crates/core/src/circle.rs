//! Points, arcs and finite unions of arcs on the unit circle.
//!
//! Lengths are in radians; [`ArcSet::measure`] returns the normalized
//! Lebesgue measure (full circle = 1).

use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

const EDGE_TOL: f64 = 1e-12;

/// Reduce an angle to [0, 2π).
pub fn normalize(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Signed angular offset in (−π, π]; values already in range are returned as is.
pub fn wrap_pm_pi(d: f64) -> f64 {
    if d > -PI && d <= PI {
        return d;
    }
    let t = d.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

/// Angular distance in [0, π].
pub fn angular_distance(a: f64, b: f64) -> f64 {
    wrap_pm_pi(a - b).abs()
}

/// Euclidean distance between e^{ia} and e^{ib}.
pub fn chordal(a: f64, b: f64) -> f64 {
    2.0 * (0.5 * angular_distance(a, b)).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn new(theta: f64) -> Self {
        Angle(normalize(theta))
    }
    pub fn theta(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start: Angle,
    pub length: f64,
    #[serde(default)]
    pub closed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Inside,
    Outside,
    Boundary,
}

impl Arc {
    /// Open arc from `start` counterclockwise over `length` radians (clamped to 2π).
    pub fn new(start: f64, length: f64) -> Self {
        Arc { start: Angle::new(start), length: length.min(TAU), closed: false }
    }
    /// Open arc (a, b) for a < b, measured counterclockwise.
    pub fn between(a: f64, b: f64) -> Self {
        Arc::new(a, b - a)
    }
    pub fn closed(mut self) -> Self {
        self.closed = true;
        self
    }
    pub fn full() -> Self {
        Arc::new(0.0, TAU)
    }
    pub fn is_full(&self) -> bool {
        self.length >= TAU
    }
    pub fn end(&self) -> f64 {
        self.start.0 + self.length
    }
    pub fn midpoint(&self) -> f64 {
        normalize(self.start.0 + 0.5 * self.length)
    }
    /// Offset of `theta` from the start, in [0, 2π).
    pub fn offset(&self, theta: f64) -> f64 {
        normalize(theta - self.start.0)
    }
    pub fn classify(&self, theta: f64) -> Membership {
        if self.is_full() {
            return Membership::Inside;
        }
        let o = self.offset(theta);
        let near_start = o < EDGE_TOL || TAU - o < EDGE_TOL;
        let near_end = (o - self.length).abs() < EDGE_TOL;
        if near_start || near_end {
            return Membership::Boundary;
        }
        if o < self.length {
            Membership::Inside
        } else {
            Membership::Outside
        }
    }
    pub fn contains(&self, theta: f64) -> bool {
        match self.classify(theta) {
            Membership::Inside => true,
            Membership::Boundary => self.closed,
            Membership::Outside => false,
        }
    }
    /// Unwrapped interval [lo, hi] with lo in [0, 2π).
    pub fn interval(&self) -> (f64, f64) {
        (self.start.0, self.end())
    }
}

/// Finite union of pairwise-disjoint arcs, sorted by start.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ArcSet {
    arcs: Vec<Arc>,
}

impl ArcSet {
    pub fn empty() -> Self {
        ArcSet { arcs: Vec::new() }
    }
    pub fn full() -> Self {
        ArcSet { arcs: vec![Arc::full()] }
    }
    pub fn from_arc(a: Arc) -> Self {
        Self::from_arcs(vec![a])
    }
    pub fn from_arcs(arcs: Vec<Arc>) -> Self {
        let mut iv = Vec::new();
        for a in arcs {
            split_into(&a, &mut iv);
        }
        Self::from_intervals(iv)
    }

    /// Build from intervals [lo, hi] inside [0, 2π]; overlapping or touching
    /// intervals are merged.
    pub fn from_intervals(mut iv: Vec<(f64, f64, bool)>) -> Self {
        iv.retain(|&(a, b, _)| b - a > 0.0);
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64, bool)> = Vec::new();
        for (a, b, c) in iv {
            if let Some(last) = merged.last_mut() {
                if a <= last.1 + EDGE_TOL {
                    if b > last.1 {
                        last.1 = b;
                    }
                    last.2 &= c;
                    continue;
                }
            }
            merged.push((a, b, c));
        }
        if merged.len() == 1 && merged[0].1 - merged[0].0 >= TAU - EDGE_TOL {
            return ArcSet::full();
        }
        // rejoin across the cut at angle 0
        if merged.len() >= 2 {
            let first = merged[0];
            let last = *merged.last().unwrap();
            if first.0 <= EDGE_TOL && last.1 >= TAU - EDGE_TOL {
                merged.pop();
                merged[0] = (last.0, TAU + first.1, first.2 && last.2);
            }
        }
        let mut arcs: Vec<Arc> = merged
            .into_iter()
            .map(|(a, b, c)| Arc { start: Angle::new(a), length: (b - a).min(TAU), closed: c })
            .collect();
        arcs.sort_by(|x, y| x.start.0.total_cmp(&y.start.0));
        ArcSet { arcs }
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }
    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
    pub fn is_full(&self) -> bool {
        self.arcs.len() == 1 && self.arcs[0].is_full()
    }
    /// Total length in radians.
    pub fn length(&self) -> f64 {
        self.arcs.iter().map(|a| a.length).sum()
    }
    /// Normalized Lebesgue measure, in [0, 1].
    pub fn measure(&self) -> f64 {
        (self.length() / TAU).min(1.0)
    }
    /// Disjoint intervals [lo, hi] covering the set, split at angle 0.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut iv = Vec::new();
        for a in &self.arcs {
            split_into(a, &mut iv);
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        iv.into_iter().map(|(a, b, _)| (a, b)).collect()
    }
    pub fn classify(&self, theta: f64) -> Membership {
        let mut boundary = false;
        for a in &self.arcs {
            match a.classify(theta) {
                Membership::Inside => return Membership::Inside,
                Membership::Boundary => boundary = true,
                Membership::Outside => {}
            }
        }
        if boundary {
            Membership::Boundary
        } else {
            Membership::Outside
        }
    }
    pub fn contains(&self, theta: f64) -> bool {
        self.arcs.iter().any(|a| a.contains(theta))
    }
    pub fn union(&self, other: &ArcSet) -> ArcSet {
        let mut arcs = self.arcs.clone();
        arcs.extend_from_slice(&other.arcs);
        ArcSet::from_arcs(arcs)
    }
    pub fn complement(&self) -> ArcSet {
        if self.is_empty() {
            return ArcSet::full();
        }
        let iv = self.intervals();
        let mut out = Vec::new();
        let mut cur = 0.0;
        for (a, b) in iv {
            if a > cur {
                out.push((cur, a, true));
            }
            cur = cur.max(b);
        }
        if cur < TAU {
            out.push((cur, TAU, true));
        }
        ArcSet::from_intervals(out)
    }
    pub fn intersect(&self, other: &ArcSet) -> ArcSet {
        let a = self.intervals();
        let b = other.intervals();
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if hi > lo {
                out.push((lo, hi, false));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        ArcSet::from_intervals(out)
    }
    pub fn difference(&self, other: &ArcSet) -> ArcSet {
        self.intersect(&other.complement())
    }
    pub fn is_subset_of(&self, other: &ArcSet, tol: f64) -> bool {
        self.difference(other).length() <= tol
    }
}

fn split_into(a: &Arc, out: &mut Vec<(f64, f64, bool)>) {
    let (lo, hi) = a.interval();
    if hi <= TAU {
        out.push((lo, hi, a.closed));
    } else {
        out.push((lo, TAU, a.closed));
        out.push((0.0, hi - TAU, a.closed));
    }
}

/// Normalized Lebesgue measure of a set of arcs.
pub fn arc_measure(set: &ArcSet) -> f64 {
    set.measure()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measure_examples() {
        assert_eq!(arc_measure(&ArcSet::full()), 1.0);
        assert_eq!(arc_measure(&ArcSet::empty()), 0.0);
        let s = ArcSet::from_arcs(vec![Arc::new(0.0, PI / 2.0), Arc::new(PI, PI / 2.0)]);
        assert!((arc_measure(&s) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn wraps_across_zero() {
        let s = ArcSet::from_arc(Arc::between(-0.5, 0.5));
        assert_eq!(s.arcs().len(), 1);
        assert!(s.contains(0.0));
        assert!(s.contains(TAU - 0.1));
        assert!(!s.contains(1.0));
        assert!((s.length() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complement_and_intersection() {
        let s = ArcSet::from_arc(Arc::between(-0.5, 0.5));
        let c = s.complement();
        assert!((c.length() - (TAU - 1.0)).abs() < 1e-13);
        assert!(s.intersect(&c).is_empty());
        assert!(s.union(&c).is_full());
    }

    #[test]
    fn touching_arcs_merge() {
        let s = ArcSet::from_arcs(vec![Arc::between(0.0, 1.0), Arc::between(1.0, 2.0)]);
        assert_eq!(s.arcs().len(), 1);
    }

    #[test]
    fn boundary_points() {
        let a = Arc::between(1.0, 2.0);
        assert_eq!(a.classify(1.0), Membership::Boundary);
        assert!(!a.contains(1.0));
        assert!(a.closed().contains(1.0));
    }

    #[test]
    fn wrap_keeps_small_offsets_exact() {
        assert_eq!(wrap_pm_pi(1e-300), 1e-300);
        assert!((wrap_pm_pi(TAU - 0.25) + 0.25).abs() < 1e-15);
        assert!((chordal(0.0, PI) - 2.0).abs() < 1e-15);
    }
}
