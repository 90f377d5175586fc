mod common;

use coldplasma::experiments::*;
use coldplasma::models::{linear_dispersion, DispersiveModel, EllipticSolveParams, ModelKind};
use coldplasma::{Field, PeriodicGrid};
use common::*;

#[test]
fn shift_is_an_isometry() {
    let g = PeriodicGrid::standard(128).unwrap();
    let f = random_poly(&mut rng(21), 30, 1.0).sample(&g);
    for t in [0.3, 1.0, 7.7] {
        let s = far_field_shift(&f, t).unwrap();
        assert!((s.max_abs() - f.max_abs()).abs() < 1e-2 * f.max_abs());
        assert!((quad(&s, &s) - quad(&f, &f)).abs() < 1e-12);
    }
}

#[test]
fn shift_matches_translated_oracle() {
    let g = PeriodicGrid::standard(64).unwrap();
    let p = random_poly(&mut rng(22), 10, 1.0);
    let t = 0.9;
    let want = Field::from_fn(&g, |x| p.eval(x - t));
    assert!(
        far_field_shift(&p.sample(&g), t)
            .unwrap()
            .max_abs_diff(&want)
            < 1e-13
    );
}

#[test]
fn boussinesq_sweep_is_third_order() {
    let g = PeriodicGrid::standard(64).unwrap();
    let p = Field::from_fn(&g, f64::sin);
    let cfg = ConsistencyConfig {
        model: ReducedModel::Boussinesq,
        t_cmp: 0.5,
        dt: 0.01,
        elliptic: EllipticSolveParams::default(),
    };
    let r = run_consistency(&p, &[0.1, 0.05, 0.025], &cfg).unwrap();
    assert!(r.monotone);
    assert!(r.fitted_order.unwrap() > 2.5, "{:?}", r.fitted_order);
    assert_eq!(r.cells.len(), 3);
    assert!(r.cells.iter().all(|c| c.status == CellStatus::Ok));
}

#[test]
fn sweep_rejects_bad_lists() {
    let g = PeriodicGrid::standard(32).unwrap();
    let p = Field::from_fn(&g, f64::sin);
    let cfg = ConsistencyConfig {
        model: ReducedModel::BiWave,
        t_cmp: 0.5,
        dt: 0.05,
        elliptic: EllipticSolveParams::default(),
    };
    assert!(run_consistency(&p, &[0.1, 0.1], &cfg).is_err());
    assert!(run_consistency(&p, &[0.05, 0.1], &cfg).is_err());
    assert!(run_consistency(&p, &[0.7], &cfg).is_err());
    let late = ConsistencyConfig { t_cmp: 2.0, ..cfg };
    assert!(run_consistency(&p, &[0.1], &late).is_err());
    let single = run_consistency(&p, &[0.1], &cfg).unwrap();
    assert_eq!(single.errors.len(), 1);
    assert!(single.fitted_order.is_none());
}

#[test]
fn breakdown_in_a_cell_is_reported_not_raised() {
    let g = PeriodicGrid::standard(32).unwrap();
    let p = Field::from_fn(&g, |x| 4.0 * x.sin());
    let cfg = ConsistencyConfig {
        model: ReducedModel::Boussinesq,
        t_cmp: 0.5,
        dt: 0.05,
        elliptic: EllipticSolveParams::default(),
    };
    // 0.5 * 4 sin x reaches N = -2: vacuum in the full system
    let r = run_consistency(&p, &[0.5, 0.01], &cfg).unwrap();
    assert_eq!(r.cells[0].status, CellStatus::Failed);
    assert!(r.cells[0]
        .detail
        .as_deref()
        .unwrap()
        .contains("full system"));
    assert_eq!(r.cells[1].status, CellStatus::Ok);
}

#[test]
fn well_prepared_states_share_the_profile() {
    let g = PeriodicGrid::standard(32).unwrap();
    let d = WellPreparedData::new(0.1, Field::from_fn(&g, f64::cos)).unwrap();
    for kind in [
        ModelKind::Full,
        ModelKind::Boussinesq,
        ModelKind::BiWave,
        ModelKind::Uni,
    ] {
        let s = d.state(kind).unwrap();
        assert!(
            s.primary()
                .max_abs_diff(&Field::from_fn(&g, |x| 0.1 * x.cos()))
                < 1e-16
        );
    }
}

#[test]
fn dispersion_k_zero_and_guards() {
    let g = PeriodicGrid::standard(32).unwrap();
    assert_eq!(
        measure_dispersion(DispersiveModel::BiWave, 0, 1e-6, &g, 1e-2).unwrap(),
        0.0
    );
    assert!(measure_dispersion(DispersiveModel::BiWave, 1, 1e-2, &g, 1e-2).is_err());
    assert!(measure_dispersion(DispersiveModel::Uni, 20, 1e-6, &g, 1e-2).is_err());
}

#[test]
fn dispersion_measured_on_coarse_grid() {
    let g = PeriodicGrid::standard(32).unwrap();
    for k in [1, 3] {
        let w = measure_dispersion(DispersiveModel::BiWave, k, 1e-6, &g, 1e-2).unwrap();
        assert!((w - linear_dispersion(DispersiveModel::BiWave, k as f64)).abs() < 1e-6);
    }
}

#[test]
fn gentle_probe_stays_smooth() {
    let mut cfg = BreakingProbeConfig::new(0.01, 64, 1e-2);
    cfg.t_max = Some(5.0);
    let r = run_breaking_probe(&cfg).unwrap();
    assert!(!r.breakdown_detected);
    assert!(r.t_b_detected.is_none());
    assert!(r.linfty_bound_satisfied);
    assert!(!r.slope_hypothesis_met);
    assert_eq!(r.slope_trace.last().unwrap().0, 5.0);
}

#[test]
fn steep_probe_breaks_near_the_riccati_time() {
    let r = run_breaking_probe(&BreakingProbeConfig::new(10.0, 256, 1e-4)).unwrap();
    assert!(r.breakdown_detected);
    assert!((r.m0 + 10.0).abs() < 1e-12);
    assert!((r.riccati_bound_time - 0.1).abs() < 1e-14);
    assert!(r.within_twice_riccati);
    assert!(r.slope_hypothesis_met);
    assert!(r.linfty_bound_satisfied && r.linfty_lower_min_slack >= -1e-6);
}
