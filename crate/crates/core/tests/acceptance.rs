//! Acceptance run: one PASS/FAIL line per criterion.

use disclab_core::circle::ArcSet;
use disclab_core::coreset::Tri;
use disclab_core::legendre::{inversion_check, EnvelopeFunction, PiecewiseLinear, Tail};
use disclab_core::measure::CircleMeasure;
use disclab_core::moments::{is_admissible, moments_of_g, t1_sandwich, Majorant, MomentSequence};
use disclab_core::obstacle::{build_levels, cyclic_witness, weak_star_error, MASS_TOL};
use disclab_core::oracle::{hb_density, hb_existence, is_cyclic, theorem_c_check, Consistency};
use disclab_core::radial::RadialWeight;
use disclab_core::seqspace::{default_window, norm_identity_check, rsd_classify, RsdClass};
use disclab_core::series::{taylor_of, TaylorSeries};
use disclab_core::transforms::{singular_inner, BSymbol, DiskPoint};
use disclab_core::weight::Weight;
use disclab_core::wizard::{
    beurling_ahlfors_bound, build_profile, choose_n0, harmonic_measure_mc, verify_bt_bound, BoundaryPiece, Domain, Hat,
    McConfig, Profile,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{LN_2, PI};
use std::time::Instant;

type Outcome = Result<(bool, String), disclab_core::Error>;

fn w15() -> Weight {
    Weight::exp_dist(1.0, 1.0, vec![0.0])
}

fn c1() -> Outcome {
    let t = Instant::now();
    let a = is_cyclic(&CircleMeasure::atom(0.0, 1.0), &w15(), 14, 1e-8)?.verdict;
    let b = is_cyclic(&CircleMeasure::atom(PI, 1.0), &w15(), 14, 1e-8)?.verdict;
    let s = t.elapsed().as_secs_f64();
    Ok((a == Tri::Yes && b == Tri::No && s < 10.0, format!("angle 0: {a:?}, angle π: {b:?}, {s:.2}s")))
}

fn c2() -> Outcome {
    let t = Instant::now();
    let d = 2.0;
    let mut ok = true;
    let mut worst_rel = 0f64;
    let mut worst_margin = f64::INFINITY;
    for n in 50..=500 {
        let nf = n as f64;
        let (_, p, _) = t1_sandwich(1.0, 1.0, 2.0 * nf + 1.0)?;
        let m = 2.0 * p.value;
        let lo = 2.0 * (-d * (4.0 * nf + 2.0).sqrt() - (8.0 * nf + 4.0).ln()).exp();
        let hi = 2.0 * (-d * (2.0 * nf + 1.0).sqrt()).exp();
        let rel = p.error / p.value;
        worst_rel = worst_rel.max(rel);
        worst_margin = worst_margin.min((m / lo).ln().min((hi / m).ln()));
        ok &= lo <= m && m <= hi && rel <= 1e-6;
    }
    let s = t.elapsed().as_secs_f64();
    Ok((ok && s < 60.0, format!("min log-margin {worst_margin:.3}, max rel err {worst_rel:.1e}, {s:.2}s")))
}

fn knots_of(m: &[f64]) -> EnvelopeFunction {
    let xs: Vec<f64> = (0..m.len()).map(|n| 2.0 * n as f64 + 1.0).collect();
    let ys: Vec<f64> = m.iter().map(|v| -v.ln()).collect();
    EnvelopeFunction::Knots(PiecewiseLinear::new(xs, ys, Tail::Linear, Tail::Sqrt).unwrap())
}

fn c3() -> Outcome {
    let grid: Vec<f64> = (0..=60).map(|i| 0.25 * 1.1f64.powi(i)).collect();
    let mut worst = inversion_check(&EnvelopeFunction::Sqrt { d: 2.0 }, &grid)?;
    let mut sets = 0;
    for d in [0.5, 1.0, 2.0, 3.0, 5.0] {
        let m = MomentSequence::exp_sqrt(d, 60);
        let k = knots_of(&m.values);
        let xs: Vec<f64> = (0..=60).map(|n| 2.0 * n as f64 + 1.0).collect();
        worst = worst.max(inversion_check(&k, &xs)?);
        sets += 1;
    }
    for (d, a) in [(1.0, 0.5), (1.0, 2.0), (2.0, 1.0), (0.5, 3.0), (3.0, 0.25)] {
        let m: Vec<f64> = (0..=60).map(|n| (-d * (n as f64).sqrt() - a * (n as f64 + 1.0).ln()).exp()).collect();
        let k = knots_of(&m);
        let xs: Vec<f64> = (0..=60).map(|n| 2.0 * n as f64 + 1.0).collect();
        worst = worst.max(inversion_check(&k, &xs)?);
        sets += 1;
    }
    Ok((worst <= 1e-9, format!("2√x and {sets} datasets, max error {worst:.1e}")))
}

fn c4() -> Outcome {
    let m = moments_of_g(&RadialWeight::Linear, 100)?;
    let worst = m
        .values
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let exact = 1.0 / ((n as f64 + 1.0) * (2.0 * n as f64 + 3.0));
            (v - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    Ok((worst <= 1e-10, format!("max rel err {worst:.1e} for n ≤ 100")))
}

fn c5() -> Outcome {
    let p2 = is_admissible(&MomentSequence::log_power_family(2.0, 1000))?.admissible;
    let p1 = is_admissible(&MomentSequence::log_power_family(1.0, 1000))?.admissible;
    // exp(−n) underflows past n ≈ 745
    let e = MomentSequence::explicit((0..=700).map(|n| (-(n as f64)).exp()).collect())?;
    let ex = is_admissible(&e)?.admissible;
    Ok((p2 && !p1 && !ex, format!("p = 2: {p2}, p = 1: {p1}, exp(−n): {ex}")))
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0f64;
    for _ in 0..20 {
        let deg = rng.random_range(0..=16usize);
        let c: Vec<Complex64> =
            (0..=deg).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let f = TaylorSeries::new(c);
        for g in [RadialWeight::t1(1.0, 1.0), RadialWeight::Linear] {
            worst = worst.max(norm_identity_check(&g, &f)?.relative_error);
        }
    }
    Ok((worst <= 1e-6, format!("20 polynomials × 2 weights, max rel err {worst:.1e}")))
}

fn c7() -> Outcome {
    let t = Instant::now();
    let nu = CircleMeasure::atom(0.0, 1.0);
    let w = w15();
    let levels: Vec<u32> = (4..=14).collect();
    let seq = build_levels(&nu, &w, &levels, 14, MASS_TOL)?;
    let rows = weak_star_error(&seq, &nu, 8)?;
    let mass_ok = rows.iter().all(|r| r.mass_error <= 1e-10);
    let max_mass = rows.iter().map(|r| r.mass_error).fold(0.0, f64::max);
    let ws = rows.last().unwrap().max_error;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut bound_ok = true;
    let mut samples = 0;
    for f in &seq {
        for _ in 0..10_000 / seq.len() + 1 {
            let p = &f.pieces[rng.random_range(0..f.pieces.len())];
            let [a, b] = p.support[rng.random_range(0..p.support.len())];
            let x = rng.random_range(a..b);
            let v = f.eval(x);
            let cap = (-w.log_value(x)).max(0.0);
            bound_ok &= v >= 0.0 && v <= cap * (1.0 + 1e-12) + 1e-12;
            samples += 1;
        }
    }

    let zs = [DiskPoint::new(0.0, 0.0)?, DiskPoint::new(0.5, 0.0)?, DiskPoint::new(0.0, 0.5)?];
    let wt = cyclic_witness(&nu, &w, &[14], 14, &zs)?;
    let wit = wt.rows[0].errors.iter().copied().fold(0.0, f64::max);
    let s = t.elapsed().as_secs_f64();
    Ok((
        mass_ok && bound_ok && ws <= 1e-2 && wit <= 1e-3 && s < 120.0,
        format!(
            "mass err ≤ {max_mass:.1e}, obstacle bound at {samples} samples: {bound_ok}, weak-star {ws:.1e}, witness {wit:.1e}, {s:.1}s"
        ),
    ))
}

fn c8() -> Outcome {
    let t = Instant::now();
    let cfg = McConfig { walks: 1_000_000, seed: 42, workers: 4, ..McConfig::default() };
    let hat = Hat::new(0.0, 2.0, Profile::Power { q: 2.0 })?;
    let mut rows = verify_bt_bound(&hat, &[0.5, 0.9], (1.0, 0.5), &cfg)?;
    let rect = Hat::new(0.0, 2.0, Profile::Constant { h: 0.2 })?;
    rows.extend(verify_bt_bound(&rect, &[0.0], (1.0, 0.1), &cfg)?);
    let disk = harmonic_measure_mc(&Domain::Disk, (0.0, 0.0), &BoundaryPiece::DiskArc { from: 0.0, to: PI }, &cfg)?;
    let sq = Domain::Rectangle { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    let side = harmonic_measure_mc(&sq, (0.5, 0.5), &BoundaryPiece::Left, &cfg)?;
    let disk_ok = (disk.value - 0.5).abs() <= 3.0 * disk.std_error;
    let sq_ok = (side.value - 0.25).abs() <= 3.0 * side.std_error;
    let s = t.elapsed().as_secs_f64();
    let mut detail: Vec<String> = ["x² t=0.5", "x² t=0.9", "rectangle"]
        .iter()
        .zip(&rows)
        .map(|(name, r)| {
            format!(
                "{name}: {:.2e}±{:.1e} vs {:.2e} {}",
                r.estimate,
                r.std_error,
                r.bound,
                if r.pass { "ok" } else { "VIOLATED" }
            )
        })
        .collect();
    detail.push(format!("disk {:.4}, square {:.4}, {s:.0}s", disk.value, side.value));
    let ok = rows.iter().all(|r| r.pass) && disk_ok && sq_ok && s < 300.0;
    // the rectangle bound itself, for the record
    let _ = beurling_ahlfors_bound(&rect, 0.0, 1.0)?;
    Ok((ok, detail.join("; ")))
}

fn c9() -> Outcome {
    let f = Majorant::inverse();
    let n0 = choose_n0(&f, 0.5)?.n0;
    let p = build_profile(&f, 0.5)?;
    let sum: f64 = p.deltas.iter().sum::<f64>() + p.knots[p.deltas.len()];
    // γ_n = α_n log(1/α_n) = 2^{−n−n₀}(n + n₀) log 2
    let gamma = |n: usize| 0.5f64.powi((n as u32 + n0) as i32) * (n as f64 + n0 as f64) * LN_2;
    let ident = (2..=40)
        .map(|n| (gamma(n + 1) - PI / 2.0 * p.deltas[n - 2] + p.a_const * PI / 2.0 / (n * n) as f64).abs())
        .fold(0.0, f64::max);
    let sum_err = (sum - 1.0).abs();
    Ok((
        n0 == 3 && sum_err <= 1e-12 && ident <= 1e-12,
        format!("n₀ = {n0}, |ΣΔt − 1| = {sum_err:.1e}, identity err {ident:.1e}"),
    ))
}

fn c10() -> Outcome {
    let b = |atom: Option<f64>, defect: Weight| BSymbol {
        blaschke_zeros: vec![],
        singular: atom.map_or_else(CircleMeasure::zero, |a| CircleMeasure::atom(a, 1.0)),
        defect,
        unimodular: ArcSet::empty(),
    };
    let cases = [
        ("atom at excluded point", b(Some(0.0), w15().scaled(0.5)), Tri::No),
        ("atom moved off", b(Some(PI), w15().scaled(0.5)), Tri::Yes),
        ("non-extreme b", b(None, Weight::constant(0.5)), Tri::Yes),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, sym, want) in &cases {
        let e = hb_existence(sym, 14)?;
        let d = hb_density(sym, 14, 1e-10)?;
        ok &= d.verdict == *want && e.verdict == Tri::Yes && d.verdict.exit_code() == 0;
        detail.push(format!("{name}: density {:?} (exit {})", d.verdict, d.verdict.exit_code()));
    }
    // no defect and no singular part: the verdict is withheld
    let inner = BSymbol::inner(vec![], CircleMeasure::zero());
    let w = hb_density(&inner, 10, 1e-10)?.verdict;
    ok &= w == Tri::Inconclusive && w.exit_code() == 3;
    detail.push(format!("b ≡ inner constant: {w:?} (exit {})", w.exit_code()));
    Ok((ok, detail.join("; ")))
}

fn c11() -> Outcome {
    let fat = theorem_c_check(&CircleMeasure::density(Weight::fat_cantor(0.5)), 512, 10, 1e-8)?;
    let one = theorem_c_check(&CircleMeasure::lebesgue(), 512, 10, 1e-8)?;
    let ex = theorem_c_check(&CircleMeasure::density(w15()), 512, 12, 1e-8)?;
    let all = [&fat, &one, &ex].iter().all(|r| r.status == Consistency::Consistent);
    Ok((
        all && fat.rsd.verdict == RsdClass::NotRsd,
        format!(
            "fat-Cantor {:?}/{:?}, g ≡ 1 {:?}, Example 1.5 modulus {:?}",
            fat.status, fat.rsd.verdict, one.status, ex.status
        ),
    ))
}

fn c12() -> Outcome {
    let d0 = CircleMeasure::atom(0.0, 1.0);
    let fit = taylor_of(|z| singular_inner(&d0, DiskPoint::from_complex(z).unwrap()).unwrap(), 512, 0.97)?;
    let s = rsd_classify(&fit.series, default_window(&fit.series), 0.05)?;
    let model = TaylorSeries::from_real(&(0..=512).map(|n| (-2.0 * (n as f64).sqrt()).exp()).collect::<Vec<_>>());
    let m = rsd_classify(&model, default_window(&model), 0.05)?;
    Ok((
        s.verdict == RsdClass::NotRsd && m.verdict == RsdClass::Rsd && (1.8..=2.2).contains(&m.fitted_c),
        format!("S_δ₀ {:?}, model {:?} with c = {:.4}", s.verdict, m.verdict, m.fitted_c),
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("Example 1.5 cyclicity", c1),
        ("T1(1,1) moment sandwich", c2),
        ("Legendre inversion", c3),
        ("closed-form moments of G(t) = t", c4),
        ("admissibility table", c5),
        ("norm identity", c6),
        ("obstacle suite", c7),
        ("Beurling–Ahlfors Monte Carlo", c8),
        ("profile bookkeeping", c9),
        ("H(b) oracles", c10),
        ("Theorem C consistency", c11),
        ("RSD stack", c12),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
