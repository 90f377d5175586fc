//! Conserved quantities, Hamiltonians and breaking monitors.
//!
//! All integrals are spectral quadratures (the mode-0 coefficient of the
//! integrand times the period), so conservation-form invariants are exact to
//! round-off on the discrete level.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{ModelKind, ModelState};
use crate::spectral::{integrate, Field, MultiplierKind as M};

/// Snapshot of invariants and monitors. Quantities that a model does not
/// define are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Integral of the primary field (`h`, or `N` for the full system).
    pub mass_h: f64,
    /// Integral of the velocity (`v`, or `U` for the full system).
    pub mass_v: Option<f64>,
    pub l2_h: f64,
    pub energy: Option<f64>,
    /// `int h v`, Boussinesq only.
    pub cross_i: Option<f64>,
    /// `int (h_t + (h^2)_x)`, bidirectional only.
    pub momentum_bi: Option<f64>,
    pub min_slope: f64,
    /// Sup norm of the slope, the integrand of the blow-up monitor.
    pub max_abs_slope: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub max_abs_h: f64,
    /// Running trapezoid integral of `||h_x||_inf` in time.
    pub bmo_proxy_accum: f64,
}

/// Time integral of `||h_x(t)||_inf`, accumulated by the trapezoid rule over
/// the recorded snapshots. An L-infinity stand-in for the BMO criterion.
#[derive(Debug, Clone, Default)]
pub struct BlowupAccumulator {
    last: Option<(f64, f64)>,
    integral: f64,
}

impl BlowupAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn update(&mut self, t: f64, slope_sup: f64) -> f64 {
        if let Some((t0, s0)) = self.last {
            self.integral += 0.5 * (t - t0) * (s0 + slope_sup);
        }
        self.last = Some((t, slope_sup));
        self.integral
    }

    pub fn value(&self) -> f64 {
        self.integral
    }
}

/// `int f g dx`.
pub fn inner(f: &Field, g: &Field) -> f64 {
    let length = f.grid().length();
    let n = f.samples().len() as f64;
    length
        * f.samples()
            .iter()
            .zip(g.samples())
            .map(|(a, b)| a * b)
            .sum::<f64>()
        / n
}

/// `E(h, v) = 1/2 int (v^2 (1 + h) + (B h)^2 + h (N h)^2)` with `B^2 = Q`.
pub fn energy_boussinesq(h: &Field, v: &Field) -> Result<f64> {
    h.check_grid(v)?;
    let h_hat = h.spectrum()?;
    let bh = h_hat.multiply(M::SqrtQ).to_field();
    let nh = h_hat.multiply(M::N).to_field();
    let v_sq = v.square()?;
    let kinetic = integrate(&v_sq) + inner(&v_sq, h);
    let potential = inner(&bh, &bh) + inner(h, &nh.square()?);
    Ok(0.5 * (kinetic + potential))
}

/// `E(h) = 1/2 int (h^2 - h^3 + (B h)^2 + h (N h)^2)`.
pub fn energy_uni(h: &Field) -> Result<f64> {
    let h_hat = h.spectrum()?;
    let bh = h_hat.multiply(M::SqrtQ).to_field();
    let nh = h_hat.multiply(M::N).to_field();
    let cubic = inner(h, &h.square()?);
    Ok(0.5 * (inner(h, h) - cubic + inner(&bh, &bh) + inner(h, &nh.square()?)))
}

/// `dE/dh = h - 3/2 h^2 + Q h + 1/2 (N h)^2 - N(h N h)`.
pub fn variational_gradient_uni(h: &Field) -> Result<Field> {
    let h_hat = h.spectrum()?;
    let nh = h_hat.multiply(M::N).to_field();
    let grad = h_hat
        .axpy(-1.5, &h.product_spectrum(h)?)
        .axpy(1.0, &h_hat.multiply(M::Q))
        .axpy(0.5, &nh.product_spectrum(&nh)?)
        .axpy(-1.0, &h.product_spectrum(&nh)?.multiply(M::N));
    Ok(grad.to_field())
}

/// `int (g + d_x h^2) dx`; the derivative term integrates to zero on the period.
pub fn momentum_biwave(h: &Field, g: &Field) -> Result<f64> {
    h.check_grid(g)?;
    if !g.is_finite() {
        return Err(Error::NonFiniteField);
    }
    Ok(integrate(g) + integrate(&h.square()?.dx()?))
}

/// Fills every quantity the model defines and advances the blow-up monitor.
pub fn record(
    model: ModelKind,
    state: &ModelState,
    t: f64,
    acc: &mut BlowupAccumulator,
) -> Result<DiagnosticsRecord> {
    if state.kind() != model {
        return Err(Error::ModelMismatch {
            model: model.name(),
        });
    }
    let h = state.primary();
    let slope = h.dx()?;
    let max_abs_slope = slope.max_abs();
    let (mass_v, energy, cross_i, momentum_bi) = match state {
        ModelState::Full(s) => (Some(integrate(&s.velocity)), None, None, None),
        ModelState::Boussinesq(s) => (
            Some(integrate(&s.v)),
            Some(energy_boussinesq(&s.h, &s.v)?),
            Some(inner(&s.h, &s.v)),
            None,
        ),
        ModelState::BiWave(s) => (None, None, None, Some(momentum_biwave(&s.h, &s.g)?)),
        ModelState::Uni(s) => (None, Some(energy_uni(&s.h)?), None, None),
    };
    Ok(DiagnosticsRecord {
        t,
        mass_h: integrate(h),
        mass_v,
        l2_h: inner(h, h),
        energy,
        cross_i,
        momentum_bi,
        min_slope: slope.min(),
        max_abs_slope,
        min_h: h.min(),
        max_h: h.max(),
        max_abs_h: h.max_abs(),
        bmo_proxy_accum: acc.update(t, max_abs_slope),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use std::f64::consts::PI;

    #[test]
    fn zero_state_records_zero() {
        let g = PeriodicGrid::standard(32).unwrap();
        for kind in [
            ModelKind::Full,
            ModelKind::Boussinesq,
            ModelKind::BiWave,
            ModelKind::Uni,
        ] {
            let mut acc = BlowupAccumulator::new();
            let r = record(kind, &ModelState::zeros(kind, &g), 0.0, &mut acc).unwrap();
            assert_eq!(r.mass_h, 0.0);
            assert_eq!(r.l2_h, 0.0);
            assert_eq!(r.min_slope, 0.0);
            assert_eq!(r.max_abs_h, 0.0);
            assert_eq!(r.bmo_proxy_accum, 0.0);
            for q in [r.mass_v, r.energy, r.cross_i, r.momentum_bi]
                .into_iter()
                .flatten()
            {
                assert_eq!(q, 0.0);
            }
        }
    }

    #[test]
    fn applicable_fields_per_model() {
        let g = PeriodicGrid::standard(32).unwrap();
        let mut acc = BlowupAccumulator::new();
        let r = record(
            ModelKind::BiWave,
            &ModelState::zeros(ModelKind::BiWave, &g),
            0.0,
            &mut acc,
        )
        .unwrap();
        assert!(r.momentum_bi.is_some() && r.mass_v.is_none() && r.energy.is_none());
        let r = record(
            ModelKind::Uni,
            &ModelState::zeros(ModelKind::Uni, &g),
            0.0,
            &mut acc,
        )
        .unwrap();
        assert!(r.energy.is_some() && r.cross_i.is_none() && r.mass_v.is_none());
        let err = record(
            ModelKind::Uni,
            &ModelState::zeros(ModelKind::Full, &g),
            0.0,
            &mut acc,
        )
        .unwrap_err();
        assert_eq!(err, Error::ModelMismatch { model: "uni" });
    }

    #[test]
    fn min_slope_of_negative_sine() {
        let g = PeriodicGrid::standard(64).unwrap();
        let a = 3.0;
        let h = Field::from_fn(&g, |x| -a * x.sin());
        let state = ModelState::from_fields(ModelKind::Uni, vec![h]).unwrap();
        let r = record(ModelKind::Uni, &state, 0.0, &mut BlowupAccumulator::new()).unwrap();
        assert!((r.min_slope + a).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_accumulation() {
        let mut acc = BlowupAccumulator::new();
        acc.update(0.0, 2.5);
        assert_eq!(acc.update(1.0, 2.5), 2.5);
    }

    #[test]
    fn energy_examples() {
        let g = PeriodicGrid::standard(64).unwrap();
        let z = Field::zeros(&g);
        assert_eq!(energy_boussinesq(&z, &z).unwrap(), 0.0);
        assert_eq!(energy_uni(&z).unwrap(), 0.0);
        let s = Field::from_fn(&g, f64::sin);
        assert!((energy_boussinesq(&z, &s).unwrap() - PI / 2.0).abs() < 1e-14);
        assert_eq!(variational_gradient_uni(&z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn biwave_momentum_examples() {
        let g = PeriodicGrid::standard(64).unwrap();
        let h = Field::from_fn(&g, |x| 0.3 * x.cos());
        assert!(momentum_biwave(&h, &Field::zeros(&g)).unwrap().abs() < 1e-15);
        assert!(
            momentum_biwave(&h, &Field::from_fn(&g, f64::cos))
                .unwrap()
                .abs()
                < 1e-14
        );
        assert!((momentum_biwave(&h, &Field::constant(&g, 1.0)).unwrap() - 2.0 * PI).abs() < 1e-14);
    }
}
