use coldplasma::diagnostics::inner;
use coldplasma::experiments::far_field_shift;
use coldplasma::models::*;
use coldplasma::spectral::{dealias, integrate};
use coldplasma::{Field, MultiplierKind as M, PeriodicGrid};
use proptest::prelude::*;

const N: usize = 64;

fn field_from(coeffs: &[(f64, f64)]) -> Field {
    let g = PeriodicGrid::standard(N).unwrap();
    Field::from_fn(&g, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let k = (i + 1) as f64;
                (a * (k * x).cos() + b * (k * x).sin()) / k
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-0.3..0.3f64, -0.3..0.3f64), 1..12)
}

proptest! {
    #[test]
    fn odd_multipliers_are_skew(a in coeffs(), b in coeffs()) {
        let (f, g) = (field_from(&a), field_from(&b));
        for kind in [M::N, M::Dx] {
            let lhs = inner(&f, &g.apply(kind).unwrap());
            let rhs = inner(&g, &f.apply(kind).unwrap());
            prop_assert!((lhs + rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn even_multipliers_are_symmetric(a in coeffs(), b in coeffs()) {
        let (f, g) = (field_from(&a), field_from(&b));
        for kind in [M::L, M::Q, M::SqrtL, M::SqrtQ] {
            let lhs = inner(&f, &g.apply(kind).unwrap());
            let rhs = inner(&g, &f.apply(kind).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn field_is_orthogonal_to_its_n_image(a in coeffs()) {
        let h = field_from(&a);
        prop_assert!(inner(&h, &h.apply(M::N).unwrap()).abs() < 1e-13);
    }

    #[test]
    fn shifts_compose(a in coeffs(), s in -10.0..10.0f64, t in -10.0..10.0f64) {
        let h = field_from(&a);
        let two = far_field_shift(&far_field_shift(&h, s).unwrap(), t).unwrap();
        let one = far_field_shift(&h, s + t).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
    }

    #[test]
    fn dealias_is_idempotent(a in coeffs()) {
        let h = field_from(&a).square().unwrap();
        prop_assert!(dealias(&dealias(&h)).max_abs_diff(&dealias(&h)) < 1e-15);
    }

    #[test]
    fn reduced_tendencies_have_zero_mean(a in coeffs(), b in coeffs()) {
        let (h, v) = (field_from(&a), field_from(&b));
        let bous = boussinesq_rhs(&BoussinesqState { h: h.clone(), v: v.clone() }).unwrap();
        prop_assert!(integrate(&bous.h).abs() < 1e-14);
        prop_assert!(integrate(&bous.v).abs() < 1e-14);
        let uni = uni_rhs(&UniState { h: h.clone() }, UniForm::Conservation).unwrap();
        prop_assert!(integrate(&uni.h).abs() < 1e-14);
        let bi = biwave_rhs(&BiWaveState { h, g: v }).unwrap();
        prop_assert!(integrate(&bi.g).abs() < 1e-14);
    }

    #[test]
    fn uni_tendency_is_energy_neutral(a in coeffs()) {
        // dE/dt = int (dE/dh) h_t = 1/2 int g g_x = 0
        let h = field_from(&a);
        let grad = coldplasma::diagnostics::variational_gradient_uni(&h).unwrap();
        let rhs = uni_rhs(&UniState { h }, UniForm::Conservation).unwrap();
        prop_assert!(inner(&grad, &rhs.h).abs() < 1e-13);
    }
}
