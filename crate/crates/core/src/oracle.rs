//! Decision procedures for cyclicity, permanence, invariant subspaces,
//! de Branges–Rovnyak existence and density, and the rapid-decay checker.

use crate::circle::{Arc, ArcSet};
use crate::coreset::{core_set, is_core_carrier, CarrierReport, CoreReport, Tri};
use crate::error::{Error, Result};
use crate::measure::{Atom, CircleMeasure, Density, Mass, DEFAULT_DEPTH};
use crate::seqspace::{default_window, rsd_classify, RsdClass, RsdVerdict};
use crate::transforms::{cauchy_coefficients, BSymbol, DiskPoint};
use crate::weight::Weight;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub core: CoreReport,
    pub atoms_in_core: Vec<Atom>,
    pub atoms_off_core: Vec<Atom>,
    /// atoms on a core boundary or inside an inconclusive arc
    pub undecided_atoms: Vec<Atom>,
    /// self-similar hulls meeting the complement of core
    pub offending_arcs: Vec<Arc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub verdict: Tri,
    /// error includes any mass on inconclusive arcs
    pub mass_on_core: Mass,
    pub mass_off_core: Mass,
    pub evidence: Evidence,
}

fn check_singular(nu: &CircleMeasure) -> Result<()> {
    nu.validate()?;
    if nu.has_density() {
        return Err(Error::RejectDensity);
    }
    if !nu.is_positive() {
        return Err(Error::Input("the measure must be positive".into()));
    }
    Ok(())
}

fn split_masses(nu: &CircleMeasure, w: &Weight, level: u32) -> Result<(Mass, Mass, Evidence)> {
    check_singular(nu)?;
    let core = core_set(w, level)?;
    let on = nu.mass(&core.core, DEFAULT_DEPTH)?;
    let off = nu.mass(&core.excluded, DEFAULT_DEPTH)?;
    let inc = nu.mass(&core.inconclusive, DEFAULT_DEPTH)?;
    let undecided = |a: &Atom| {
        core.inconclusive.contains(a.angle) || core.core.classify(a.angle) == crate::circle::Membership::Boundary
    };
    let evidence = Evidence {
        atoms_in_core: nu.atoms.iter().copied().filter(|a| core.core.contains(a.angle)).collect(),
        atoms_off_core: nu.atoms.iter().copied().filter(|a| core.excluded.contains(a.angle) && !undecided(a)).collect(),
        undecided_atoms: nu.atoms.iter().copied().filter(undecided).collect(),
        offending_arcs: nu
            .self_similar
            .iter()
            .map(|s| s.hull())
            .filter(|h| !ArcSet::from_arc(*h).intersect(&core.core.complement()).is_empty())
            .collect(),
        core,
    };
    let on_edge: f64 =
        evidence.undecided_atoms.iter().filter(|a| !evidence.core.inconclusive.contains(a.angle)).map(|a| a.mass).sum();
    let spread = inc.value + inc.error + on_edge;
    Ok((
        Mass { value: on.value, error: on.error + spread },
        Mass { value: off.value, error: off.error + spread },
        evidence,
    ))
}

/// yes when m is clearly ≤ tol, no when clearly above.
fn decide_small(m: Mass, tol: f64) -> Tri {
    if m.value + m.error <= tol {
        Tri::Yes
    } else if m.value - m.error > tol {
        Tri::No
    } else {
        Tri::Inconclusive
    }
}

/// ν(core(w)) = 0: S_ν is cyclic in 𝒫²(μ).
pub fn is_cyclic(nu: &CircleMeasure, w: &Weight, level: u32, tol: f64) -> Result<OracleVerdict> {
    let (on, off, evidence) = split_masses(nu, w, level)?;
    Ok(OracleVerdict { verdict: decide_small(on, tol), mass_on_core: on, mass_off_core: off, evidence })
}

/// ν(𝕋) = ν(core(w)): permanence of [S_ν].
pub fn has_permanence(nu: &CircleMeasure, w: &Weight, level: u32, tol: f64) -> Result<OracleVerdict> {
    let (on, off, evidence) = split_masses(nu, w, level)?;
    Ok(OracleVerdict { verdict: decide_small(off, tol), mass_on_core: on, mass_off_core: off, evidence })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceClass {
    /// [h] = [B·S_{ν_w}]
    pub blaschke_zeros: Vec<DiskPoint>,
    pub restricted: CircleMeasure,
    pub restricted_mass: Mass,
    pub undecided_atoms: Vec<Atom>,
    pub core: CoreReport,
}

/// ν_w = ν restricted to core(w).
pub fn classify_invariant_subspace(
    zeros: &[DiskPoint],
    nu: &CircleMeasure,
    w: &Weight,
    level: u32,
) -> Result<SubspaceClass> {
    let (on, _, ev) = split_masses(nu, w, level)?;
    let restricted = nu.restrict(&ev.core.core)?;
    Ok(SubspaceClass {
        blaschke_zeros: zeros.to_vec(),
        restricted,
        restricted_mass: on,
        undecided_atoms: ev.undecided_atoms,
        core: ev.core,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub verdict: Tri,
    pub vanishes: bool,
    /// an arc of core(Δ_b), where ∫ log Δ_b dm > −∞
    pub witness: Option<Arc>,
    pub core: Option<CoreReport>,
}

/// Nonzero polynomially-approximable functions in H(b) exist.
pub fn hb_existence(b: &BSymbol, level: u32) -> Result<ExistenceReport> {
    b.validate()?;
    if !b.blaschke_zeros.is_empty() {
        return Ok(ExistenceReport { verdict: Tri::Yes, vanishes: true, witness: None, core: None });
    }
    let core = core_set(&b.defect, level)?;
    let (verdict, witness) = if let Some(a) = core.core.arcs().first() {
        (Tri::Yes, Some(*a))
    } else if !core.inconclusive.is_empty() {
        (Tri::Inconclusive, None)
    } else {
        (Tri::No, None)
    };
    Ok(ExistenceReport { verdict, vanishes: false, witness, core: Some(core) })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityReport {
    pub verdict: Tri,
    pub carrier: CarrierReport,
    /// ν(𝕋 ∖ core(Δ_b)), inconclusive arcs counted in the error
    pub singular_off_core: Mass,
    pub singular_verdict: Tri,
}

/// Polynomials are dense in H(b).
pub fn hb_density(b: &BSymbol, level: u32, tol: f64) -> Result<DensityReport> {
    b.validate()?;
    let carrier = is_core_carrier(&b.defect, level, tol)?;
    let core = &carrier.core;
    let off = b.singular.mass(&core.excluded, DEFAULT_DEPTH)?;
    let inc = b.singular.mass(&core.inconclusive, DEFAULT_DEPTH)?;
    let off = Mass { value: off.value, error: off.error + inc.value + inc.error };
    let sv = decide_small(off, tol);
    let verdict = if b.defect.is_zero() && b.singular.is_zero() {
        Tri::Inconclusive
    } else {
        match (carrier.verdict, sv) {
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            _ => Tri::Inconclusive,
        }
    };
    Ok(DensityReport { verdict, carrier, singular_off_core: off, singular_verdict: sv })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Consistency {
    Consistent,
    Violation,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCReport {
    pub status: Consistency,
    pub rsd: RsdVerdict,
    pub carrier: CarrierReport,
}

/// |g| as a weight.
pub fn density_modulus(d: &Density) -> Weight {
    match d {
        Density::Real { weight } => weight.clone(),
        Density::Phased { modulus, .. } => modulus.clone(),
        Density::ComplexGrid { re, im } => Weight::grid(re.iter().zip(im).map(|(a, b)| a.hypot(*b)).collect(), vec![]),
    }
}

/// Rapid decay of the Cauchy coefficients of g dm forces core(|g|) to carry |g|.
pub fn theorem_c_check(g: &CircleMeasure, n: usize, level: u32, tol: f64) -> Result<TheoremCReport> {
    let d = match (&g.density, g.atoms.is_empty() && g.self_similar.is_empty()) {
        (Some(d), true) => d,
        _ => return Err(Error::Input("the measure must be a density with no singular part".into())),
    };
    g.validate()?;
    let coeffs = cauchy_coefficients(g, n)?;
    let rsd = rsd_classify(&coeffs, default_window(&coeffs), crate::seqspace::RsdConfig::default().c_min)?;
    let carrier = is_core_carrier(&density_modulus(d), level, tol)?;
    let status = match (rsd.verdict, carrier.verdict) {
        (RsdClass::Rsd, Tri::No) => Consistency::Violation,
        (RsdClass::NotRsd, _) | (_, Tri::Yes) => Consistency::Consistent,
        _ => Consistency::Inconclusive,
    };
    Ok(TheoremCReport { status, rsd, carrier })
}
