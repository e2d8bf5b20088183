use proptest::prelude::*;

use qtran_core::ground_state::{ground_state_closed_form, ground_state_density, occupation_bounds, DEFAULT_EPS_MIN};
use qtran_core::linalg::{hermiticity_defect, max_diff};
use qtran_core::model::{build_chain, build_single_site, BiasKind, BiasProfile, InducedFockRule};
use qtran_core::propagator::{run, DissipatorKind, RunOptions};
use qtran_core::steady::{steady_current, transmission_wbl};
use qtran_core::units::natural_to_microamp;

fn benchmark_bias() -> BiasProfile<f64> {
    BiasProfile::new(BiasKind::Zero, BiasKind::smooth_step(-2.0, 0.1)).unwrap()
}

#[test]
fn transient_settles_to_landauer_on_a_chain() {
    let m = build_chain(3, 0.2, -0.6, 0.15, 0.1, 0.0).unwrap();
    let b = BiasProfile::new(BiasKind::smooth_step(0.4, 0.5), BiasKind::smooth_step(-0.4, 0.5)).unwrap();
    let rule = InducedFockRule::HalfSum;
    let rec = run(&m, &b, &rule, RunOptions::new(120.0, 0.02, DissipatorKind::WblAdiabatic)).unwrap();
    let want = steady_current(&m, (0.4, -0.4), &rule).unwrap();
    let (jl, jr) = rec.tail_mean(5.0);
    let l = natural_to_microamp(want.j_left);
    let r = natural_to_microamp(want.j_right);
    assert!((jl - l).abs() < 1e-3 * l.abs(), "{jl} vs {l}");
    assert!((jr - r).abs() < 1e-3 * r.abs(), "{jr} vs {r}");
}

#[test]
fn f32_run_tracks_f64() {
    let m64 = build_single_site(0.05, 0.1, 0.1, 0.0).unwrap();
    let m32 = build_single_site(0.05f32, 0.1, 0.1, 0.0).unwrap();
    let b64 = benchmark_bias();
    let b32 = BiasProfile::new(BiasKind::Zero, BiasKind::smooth_step(-2.0f32, 0.1)).unwrap();
    let r64 = run(&m64, &b64, &InducedFockRule::None, RunOptions::new(5.0, 0.02, DissipatorKind::WblAdiabatic)).unwrap();
    let r32 = run(
        &m32,
        &b32,
        &InducedFockRule::None,
        RunOptions { eps_min: -1000.0f32, ..RunOptions::new(5.0f32, 0.02, DissipatorKind::WblAdiabatic) },
    )
    .unwrap();
    assert_eq!(r64.len(), r32.len());
    let peak = r64.j_r.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    for (a, b) in r64.j_r.iter().zip(&r32.j_r) {
        assert!((a - *b as f64).abs() < 1e-3 * peak, "{a} {b}");
    }
}

#[test]
fn exact_closure_run_keeps_invariants() {
    let m = build_chain(2, 0.1, 0.5, 0.1, 0.1, 0.0).unwrap();
    let rec = run(&m, &benchmark_bias(), &InducedFockRule::HalfSum, RunOptions::new(3.0, 0.01, DissipatorKind::WblExact)).unwrap();
    assert!(rec.diagnostics.max_drift <= 1e-12);
    assert!(rec.diagnostics.max_step_continuity < 1e-9);
    assert!(rec.diagnostics.min_eigenvalue > -1e-6 && rec.diagnostics.max_eigenvalue < 2.0 + 1e-6);
}

#[test]
fn transmission_peaks_at_the_shifted_level() {
    let m = build_single_site(0.3, 0.1, 0.1, 0.0).unwrap();
    let on = transmission_wbl(&m, 1.3f64, 1.0).unwrap();
    let off = transmission_wbl(&m, 0.3, 1.0).unwrap();
    assert!((on.standard - 1.0).abs() < 1e-12);
    let lorentzian = 4.0 * 0.1 * 0.1 / (1.0 + 0.2 * 0.2);
    assert!((off.standard - lorentzian).abs() < 1e-12, "{}", off.standard);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ground_state_is_physical(n in 1usize..5, eps in -1.0f64..1.0, hop in -1.0f64..1.0,
                                ll in 0.01f64..0.5, lr in 0.01f64..0.5) {
        let m = build_chain(n, eps, hop, ll, lr, 0.0).unwrap();
        let closed = ground_state_closed_form(&m, DEFAULT_EPS_MIN).unwrap();
        let quad = ground_state_density(&m, DEFAULT_EPS_MIN, 16).unwrap();
        prop_assert!(hermiticity_defect(&closed.sigma0) <= 1e-12);
        prop_assert!(max_diff(&closed.sigma0, &quad.sigma0) < 1e-8);
        let (lo, hi) = occupation_bounds(&closed.sigma0);
        prop_assert!(lo >= -1e-12 && hi <= 2.0 + 1e-12);
    }

    #[test]
    fn short_runs_keep_structure(n in 1usize..4, eps in -0.5f64..0.5, hop in 0.2f64..1.0,
                                 lam in 0.05f64..0.3, v in -2.0f64..2.0) {
        let m = build_chain(n, eps, hop, lam, lam, 0.0).unwrap();
        let b = BiasProfile::new(BiasKind::smooth_step(0.5 * v, 0.2), BiasKind::smooth_step(-0.5 * v, 0.2)).unwrap();
        let rec = run(&m, &b, &InducedFockRule::HalfSum, RunOptions::new(2.0, 0.02, DissipatorKind::WblAdiabatic)).unwrap();
        let d = &rec.diagnostics;
        prop_assert!(d.max_drift <= 1e-12);
        prop_assert!(d.max_step_continuity < 1e-9);
        prop_assert!(d.max_k_defect <= 1e-12);
        prop_assert!(d.min_eigenvalue >= -1e-6 && d.max_eigenvalue <= 2.0 + 1e-6);
    }

    #[test]
    fn steady_current_is_conserved(eps in -1.0f64..1.0, ll in 0.02f64..0.3, lr in 0.02f64..0.3, v in -3.0f64..3.0) {
        let m = build_single_site(eps, ll, lr, 0.0).unwrap();
        let s = steady_current(&m, (0.5 * v, -0.5 * v), &InducedFockRule::HalfSum).unwrap();
        prop_assert!((s.j_left + s.j_right).abs() <= 1e-12 * (1.0 + s.j_left.abs()));
    }
}
