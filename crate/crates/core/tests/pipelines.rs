use disclab_core::coreset::{core_set, is_core_carrier, Tri};
use disclab_core::measure::CircleMeasure;
use disclab_core::moments::{admissible_to_g, majorant_from_g, moments_of_g, MomentSequence};
use disclab_core::obstacle::cyclic_witness;
use disclab_core::oracle::{classify_invariant_subspace, is_cyclic};
use disclab_core::radial::RadialWeight;
use disclab_core::seqspace::{h2_norm, norm_identity_check};
use disclab_core::series::TaylorSeries;
use disclab_core::transforms::DiskPoint;
use disclab_core::weight::Weight;
use disclab_core::wizard::{build_profile, hat_boundary_integral_bound, verify_bt_bound, Hat, McConfig, Profile};
use std::f64::consts::{PI, TAU};

fn w15() -> Weight {
    Weight::exp_dist(1.0, 1.0, vec![0.0])
}

#[test]
fn example_core_feeds_oracles() {
    let rep = core_set(&w15(), 14).unwrap();
    let h = TAU / 16384.0;
    assert!(rep.excluded.measure() * TAU <= 2.0 * h + 1e-15);
    assert!(rep.core.contains(PI) && !rep.core.contains(0.0));
    assert_eq!(is_core_carrier(&w15(), 14, 1e-8).unwrap().verdict, Tri::Yes);

    let nu = CircleMeasure::atoms(&[(0.0, 1.0), (PI, 1.0)]);
    let c = classify_invariant_subspace(&[], &nu, &w15(), 14).unwrap();
    assert_eq!(c.restricted.atoms.len(), 1);
    assert_eq!(is_cyclic(&CircleMeasure::atom(0.0, 0.3), &w15(), 14, 1e-10).unwrap().verdict, Tri::Yes);
}

#[test]
fn witness_improves_with_core_resolution() {
    let zs = [DiskPoint::new(0.5, 0.0).unwrap(), DiskPoint::new(0.0, 0.5).unwrap()];
    let nu = CircleMeasure::atom(0.0, 0.5);
    let worst = |k: u32| {
        let t = cyclic_witness(&nu, &w15(), &[4, 8], k, &zs).unwrap();
        t.rows.iter().flat_map(|r| r.errors.iter().copied()).fold(0.0, f64::max)
    };
    let (coarse, fine) = (worst(8), worst(14));
    assert!(fine < coarse && fine <= 1e-3, "{coarse} {fine}");
}

#[test]
fn admissible_sequence_round_trip() {
    // M → G → moments of G stay below M from the threshold on
    let m = MomentSequence::exp_sqrt(2.0, 40);
    let g = admissible_to_g(&m, false).unwrap();
    let from = g.threshold.expect("bound eventually holds");
    let mg = moments_of_g(&g.g, 40).unwrap();
    for n in from..=40 {
        assert!(mg.values[n] <= 2.0 * m.values[n] * (1.0 + 1e-9));
    }
    let f = TaylorSeries::from_real(&[1.0, -2.0, 0.5]);
    let r = norm_identity_check(&RadialWeight::t1(1.0, 1.0), &f).unwrap();
    let direct = h2_norm(&moments_of_g(&RadialWeight::t1(1.0, 1.0), 2).unwrap(), &f).unwrap();
    assert!((r.coefficient_sum - direct * direct).abs() < 1e-14);
}

#[test]
fn majorant_to_hat() {
    let f = majorant_from_g(&RadialWeight::t1(1.0, 1.0)).unwrap();
    let p = build_profile(&f, 0.5).unwrap();
    let s = hat_boundary_integral_bound(&p);
    assert!(s.finite && s.total_bound > 0.0);
    let hat = Hat::new(0.0, 2.0, Profile::Wizard(p)).unwrap();
    let cfg = McConfig { walks: 4_000, seed: 5, workers: 2, ..McConfig::default() };
    let y0 = 0.5 * hat.top(1.0);
    let rows = verify_bt_bound(&hat, &[0.9, 0.99], (1.0, y0), &cfg).unwrap();
    assert!(rows[0].bound <= rows[1].bound);
    assert!(rows.iter().all(|r| r.estimate >= 0.0 && r.estimate <= 1.0));
}
