//! Three operations for the static demo page. Each returns a JSON string.

use disclab_core::coreset::core_set;
use disclab_core::measure::CircleMeasure;
use disclab_core::moments::Majorant;
use disclab_core::oracle::{has_permanence, is_cyclic};
use disclab_core::weight::Weight;
use disclab_core::wizard::{build_profile, check_profile, hat_boundary_integral_bound};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn parse_points(points: &str) -> Result<Vec<f64>, String> {
    points
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("{s}: {e}")))
        .collect()
}

/// w = exp(−s/dist(·, E)^γ) for the angles in `points`.
fn weight(points: &str, s: f64) -> Result<Weight, String> {
    let w = Weight::exp_dist(s, 1.0, parse_points(points)?);
    w.validate().map_err(|e| e.to_string())?;
    Ok(w)
}

/// Verdicts of the cyclicity and permanence oracles for an atom of mass 1.
pub fn cyclicity_report(angle: f64, points: &str, s: f64, level: u32) -> Result<String, String> {
    if !(4..=16).contains(&level) {
        return Err("level must be in 4..=16".into());
    }
    let w = weight(points, s)?;
    let nu = CircleMeasure::atom(angle, 1.0);
    let c = is_cyclic(&nu, &w, level, 1e-8).map_err(|e| e.to_string())?;
    let p = has_permanence(&nu, &w, level, 1e-8).map_err(|e| e.to_string())?;
    Ok(json!({
        "angle": angle,
        "cyclic": c.verdict,
        "permanent": p.verdict,
        "mass_on_core": c.mass_on_core,
        "excluded": c.evidence.core.excluded.intervals(),
    })
    .to_string())
}

/// Excluded and inconclusive arcs of core(w) as [start, end) pairs in radians.
pub fn core_arcs(points: &str, s: f64, level: u32) -> Result<String, String> {
    if !(4..=16).contains(&level) {
        return Err("level must be in 4..=16".into());
    }
    let rep = core_set(&weight(points, s)?, level).map_err(|e| e.to_string())?;
    Ok(json!({
        "level": level,
        "core_measure": rep.core.measure(),
        "excluded": rep.excluded.intervals(),
        "inconclusive": rep.inconclusive.intervals(),
    })
    .to_string())
}

/// Wizard-hat profile for F(t) = 1/t, sampled for plotting.
pub fn wizard_profile(eps: f64, samples: usize) -> Result<String, String> {
    let p = build_profile(&Majorant::inverse(), eps).map_err(|e| e.to_string())?;
    let n = samples.clamp(2, 4000);
    let curve: Vec<[f64; 2]> = (0..n)
        .map(|i| {
            let x = 2.0 * i as f64 / (n - 1) as f64;
            [x, p.eval(x).min(p.eval(2.0 - x))]
        })
        .collect();
    Ok(json!({
        "n0": p.n0,
        "A": p.a_const,
        "knots": &p.knots[..12],
        "checks": check_profile(&p),
        "series_bound": hat_boundary_integral_bound(&p).total_bound,
        "curve": curve,
    })
    .to_string())
}

#[wasm_bindgen]
pub fn cyclicity(angle: f64, points: &str, s: f64, level: u32) -> Result<String, JsValue> {
    cyclicity_report(angle, points, s, level).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn core(points: &str, s: f64, level: u32) -> Result<String, JsValue> {
    core_arcs(points, s, level).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn profile(eps: f64, samples: usize) -> Result<String, JsValue> {
    wizard_profile(eps, samples).map_err(|e| JsValue::from_str(&e))
}
