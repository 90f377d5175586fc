//! Right-hand sides of the four systems, the magnetic-field elliptic solve and
//! the analytic linear dispersion relations.
//!
//! Amplitude scaling is a data-preparation concern; every evaluator here works
//! with the small parameter set to one. Nonlinear terms are assembled as
//! x-derivatives of dealiased fluxes wherever the system has a conservation
//! form, so the mean of the corresponding tendency is zero in spectral space.
//! For fields band-limited to `|j| <= n/3` this is the same discrete operator as
//! the advective form (`v v_x` against `1/2 d_x v^2`).

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{
    commutator_l_nh, forward_transform, CommutatorForm, Field, MultiplierKind as M, PeriodicGrid,
    Spectrum,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Full,
    Boussinesq,
    #[serde(alias = "bidirectional")]
    BiWave,
    #[serde(alias = "unidirectional")]
    Uni,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Full => "full",
            ModelKind::Boussinesq => "boussinesq",
            ModelKind::BiWave => "biwave",
            ModelKind::Uni => "uni",
        }
    }

    /// Names of the state fields, in storage order.
    pub fn field_names(self) -> &'static [&'static str] {
        match self {
            ModelKind::Full => &["N", "U"],
            ModelKind::Boussinesq => &["h", "v"],
            ModelKind::BiWave => &["h", "g"],
            ModelKind::Uni => &["h"],
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Density perturbation `N = n - 1` and velocity `U = u`.
#[derive(Debug, Clone)]
pub struct FullPlasmaState {
    pub density: Field,
    pub velocity: Field,
}

#[derive(Debug, Clone)]
pub struct BoussinesqState {
    pub h: Field,
    pub v: Field,
}

/// Bidirectional wave equation as a first-order system, `g = h_t`.
#[derive(Debug, Clone)]
pub struct BiWaveState {
    pub h: Field,
    pub g: Field,
}

#[derive(Debug, Clone)]
pub struct UniState {
    pub h: Field,
}

#[derive(Debug, Clone)]
pub enum ModelState {
    Full(FullPlasmaState),
    Boussinesq(BoussinesqState),
    BiWave(BiWaveState),
    Uni(UniState),
}

impl ModelState {
    pub fn zeros(kind: ModelKind, grid: &Arc<PeriodicGrid>) -> Self {
        let z = || Field::zeros(grid);
        match kind {
            ModelKind::Full => ModelState::Full(FullPlasmaState {
                density: z(),
                velocity: z(),
            }),
            ModelKind::Boussinesq => ModelState::Boussinesq(BoussinesqState { h: z(), v: z() }),
            ModelKind::BiWave => ModelState::BiWave(BiWaveState { h: z(), g: z() }),
            ModelKind::Uni => ModelState::Uni(UniState { h: z() }),
        }
    }

    /// Builds a state from fields given in [`ModelKind::field_names`] order.
    pub fn from_fields(kind: ModelKind, mut fields: Vec<Field>) -> Result<Self> {
        let expected = kind.field_names().len();
        if fields.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "{kind} state needs {expected} fields, got {}",
                fields.len()
            )));
        }
        for f in &fields[1..] {
            fields[0].check_grid(f)?;
        }
        let mut it = fields.drain(..);
        let mut next = || it.next().expect("length checked");
        Ok(match kind {
            ModelKind::Full => ModelState::Full(FullPlasmaState {
                density: next(),
                velocity: next(),
            }),
            ModelKind::Boussinesq => ModelState::Boussinesq(BoussinesqState {
                h: next(),
                v: next(),
            }),
            ModelKind::BiWave => ModelState::BiWave(BiWaveState {
                h: next(),
                g: next(),
            }),
            ModelKind::Uni => ModelState::Uni(UniState { h: next() }),
        })
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            ModelState::Full(_) => ModelKind::Full,
            ModelState::Boussinesq(_) => ModelKind::Boussinesq,
            ModelState::BiWave(_) => ModelKind::BiWave,
            ModelState::Uni(_) => ModelKind::Uni,
        }
    }

    /// The wave profile: `N` for the full system, `h` otherwise.
    pub fn primary(&self) -> &Field {
        match self {
            ModelState::Full(s) => &s.density,
            ModelState::Boussinesq(s) => &s.h,
            ModelState::BiWave(s) => &s.h,
            ModelState::Uni(s) => &s.h,
        }
    }

    pub fn fields(&self) -> Vec<&Field> {
        match self {
            ModelState::Full(s) => vec![&s.density, &s.velocity],
            ModelState::Boussinesq(s) => vec![&s.h, &s.v],
            ModelState::BiWave(s) => vec![&s.h, &s.g],
            ModelState::Uni(s) => vec![&s.h],
        }
    }

    pub fn named_fields(&self) -> Vec<(&'static str, &Field)> {
        self.kind()
            .field_names()
            .iter()
            .copied()
            .zip(self.fields())
            .collect()
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        self.primary().grid()
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }

    /// `self + alpha * x`; both states must belong to the same model.
    pub fn axpy(&self, alpha: f64, x: &ModelState) -> ModelState {
        match (self, x) {
            (ModelState::Full(a), ModelState::Full(b)) => ModelState::Full(FullPlasmaState {
                density: a.density.axpy(alpha, &b.density),
                velocity: a.velocity.axpy(alpha, &b.velocity),
            }),
            (ModelState::Boussinesq(a), ModelState::Boussinesq(b)) => {
                ModelState::Boussinesq(BoussinesqState {
                    h: a.h.axpy(alpha, &b.h),
                    v: a.v.axpy(alpha, &b.v),
                })
            }
            (ModelState::BiWave(a), ModelState::BiWave(b)) => ModelState::BiWave(BiWaveState {
                h: a.h.axpy(alpha, &b.h),
                g: a.g.axpy(alpha, &b.g),
            }),
            (ModelState::Uni(a), ModelState::Uni(b)) => ModelState::Uni(UniState {
                h: a.h.axpy(alpha, &b.h),
            }),
            (a, b) => panic!("axpy between {} and {} states", a.kind(), b.kind()),
        }
    }

    /// Largest sup-norm difference over all fields.
    pub fn max_abs_diff(&self, other: &ModelState) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields())
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

/// Picard iteration controls for the magnetic-field constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EllipticSolveParams {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for EllipticSolveParams {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iters: 100,
        }
    }
}

impl EllipticSolveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "elliptic tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument(
                "elliptic max_iters must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Converged magnetic perturbation `B` (with `b = 1 + B`).
#[derive(Debug, Clone)]
pub struct MagneticField {
    pub field: Field,
    /// Picard updates applied after the initial guess `Q N`.
    pub iterations: usize,
    /// Sup norm of `B - N - d_x(B_x / (1 + N))` at the returned `B`.
    pub residual: f64,
}

/// `1/(1+N) - 1`, the deviation of the inverse density from equilibrium.
fn inverse_density_deviation(density: &Field) -> Result<Field> {
    let min_density = 1.0 + density.min();
    if !(min_density > 0.0) {
        return Err(Error::VacuumDensity { min_density });
    }
    Ok(density.map(|n| 1.0 / (1.0 + n) - 1.0))
}

fn dealiased_spectrum(grid: &Arc<PeriodicGrid>, samples: Vec<f64>) -> Result<Spectrum> {
    Ok(forward_transform(&Field::new(Arc::clone(grid), samples)?)?.dealiased())
}

/// Residual spectrum `(1 - d_xx) B - N - d_x P(r B_x)`.
fn elliptic_residual_spectrum(
    b_hat: &Spectrum,
    n_hat: &Spectrum,
    r: &Field,
) -> Result<(Spectrum, Spectrum)> {
    let b_x = b_hat.multiply(M::Dx).to_field();
    let flux_hat = r.product_spectrum(&b_x)?;
    let div_flux = flux_hat.multiply(M::Dx);
    let residual = b_hat
        .axpy(-1.0, &b_hat.multiply(M::Dxx))
        .axpy(-1.0, n_hat)
        .axpy(-1.0, &div_flux);
    Ok((residual, div_flux))
}

/// Solves `B - N - d_x(B_x / (1 + N)) = 0` by the Picard iteration
/// `B <- Q[N + d_x(B_x (1/(1+N) - 1))]` started from `B = Q N`.
pub fn solve_magnetic_field(
    density: &Field,
    params: &EllipticSolveParams,
) -> Result<MagneticField> {
    params.validate()?;
    let r = inverse_density_deviation(density)?;
    let n_hat = forward_transform(density)?;
    let mut b_hat = n_hat.multiply(M::Q);
    let mut residual = f64::INFINITY;
    for iterations in 0..=params.max_iters {
        let (res_hat, div_flux) = elliptic_residual_spectrum(&b_hat, &n_hat, &r)?;
        residual = res_hat.to_field().max_abs();
        if !residual.is_finite() {
            break;
        }
        if residual <= params.tol {
            return Ok(MagneticField {
                field: b_hat.to_field(),
                iterations,
                residual,
            });
        }
        if iterations == params.max_iters {
            break;
        }
        b_hat = n_hat.axpy(1.0, &div_flux).multiply(M::Q);
    }
    Err(Error::EllipticNoConvergence {
        iterations: params.max_iters,
        residual,
    })
}

/// Sup norm of the constraint residual for a given `B`, by re-substitution.
pub fn elliptic_residual(magnetic: &Field, density: &Field) -> Result<f64> {
    let r = inverse_density_deviation(density)?;
    let (res_hat, _) = elliptic_residual_spectrum(
        &forward_transform(magnetic)?,
        &forward_transform(density)?,
        &r,
    )?;
    Ok(res_hat.to_field().max_abs())
}

/// `N_t = -(U N)_x - U_x`, `U_t = -U U_x - (1 + B) B_x / (1 + N)`.
pub fn full_rhs(s: &FullPlasmaState, params: &EllipticSolveParams) -> Result<FullPlasmaState> {
    let FullPlasmaState { density, velocity } = s;
    density.check_grid(velocity)?;
    let grid = density.grid();
    let b = solve_magnetic_field(density, params)?.field;
    let b_x = b.dx()?;
    let u_hat = forward_transform(velocity)?;

    let mass_flux = velocity.product_spectrum(density)?.axpy(1.0, &u_hat);
    let density_dot = mass_flux.multiply(M::Dx).scale(-1.0).to_field();

    let u_x = u_hat.multiply(M::Dx).to_field();
    let advection = velocity.product_spectrum(&u_x)?;
    let lorentz: Vec<f64> = b
        .samples()
        .iter()
        .zip(b_x.samples())
        .zip(density.samples())
        .map(|((bb, bx), n)| (1.0 + bb) * bx / (1.0 + n))
        .collect();
    let lorentz = dealiased_spectrum(grid, lorentz)?;
    let velocity_dot = advection.axpy(1.0, &lorentz).scale(-1.0).to_field();

    Ok(FullPlasmaState {
        density: density_dot,
        velocity: velocity_dot,
    })
}

/// Dealiased spectra of `h N h` and `(N h)^2`, shared by the nonlocal fluxes.
struct NonlocalProducts {
    h_hat: Spectrum,
    h_nh: Spectrum,
    nh_sq: Spectrum,
}

fn nonlocal_products(h: &Field) -> Result<NonlocalProducts> {
    let h_hat = forward_transform(h)?;
    let nh = h_hat.multiply(M::N).to_field();
    Ok(NonlocalProducts {
        h_nh: h.product_spectrum(&nh)?,
        nh_sq: nh.product_spectrum(&nh)?,
        h_hat,
    })
}

/// `h_t = -(h v)_x - v_x`, `v_t = -v v_x - [L, N h] h - N h`, evaluated through
/// the flux `v^2/2 - N(h N h) + (N h)^2 / 2 + Q h`.
pub fn boussinesq_rhs(s: &BoussinesqState) -> Result<BoussinesqState> {
    let BoussinesqState { h, v } = s;
    h.check_grid(v)?;
    let v_hat = forward_transform(v)?;
    let p = nonlocal_products(h)?;

    let h_flux = h.product_spectrum(v)?.axpy(1.0, &v_hat);
    let v_flux = v
        .product_spectrum(v)?
        .scale(0.5)
        .axpy(-1.0, &p.h_nh.multiply(M::N))
        .axpy(0.5, &p.nh_sq)
        .axpy(1.0, &p.h_hat.multiply(M::Q));

    Ok(BoussinesqState {
        h: h_flux.multiply(M::Dx).scale(-1.0).to_field(),
        v: v_flux.multiply(M::Dx).scale(-1.0).to_field(),
    })
}

/// `h_t = g`, `g_t = -L h + (h h_x + [L, N h] h)_x - 2 (h g)_x`, written as
/// `g_t = d_x[N h + d_x(h^2/2 - N(h N h) + (N h)^2/2) - 2 h g]`.
pub fn biwave_rhs(s: &BiWaveState) -> Result<BiWaveState> {
    let BiWaveState { h, g } = s;
    h.check_grid(g)?;
    g.spectrum()?;
    let p = nonlocal_products(h)?;
    let inner = h
        .product_spectrum(h)?
        .scale(0.5)
        .axpy(-1.0, &p.h_nh.multiply(M::N))
        .axpy(0.5, &p.nh_sq)
        .multiply(M::Dx);
    let flux = p
        .h_hat
        .multiply(M::N)
        .axpy(1.0, &inner)
        .axpy(-2.0, &h.product_spectrum(g)?);
    Ok(BiWaveState {
        h: g.clone(),
        g: flux.multiply(M::Dx).to_field(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UniForm {
    /// `h_t = -1/2 (3 h h_x - [L, N h] h - N h - h_x)`
    Standard,
    /// `h_t = -d_x(3/4 h^2 + 1/2 N(h N h) - 1/4 (N h)^2 - 1/2 Q h - 1/2 h)`
    #[default]
    Conservation,
}

pub fn uni_rhs(s: &UniState, form: UniForm) -> Result<UniState> {
    let h = &s.h;
    let h_hat = forward_transform(h)?;
    let h_dot = match form {
        UniForm::Standard => {
            let h_x = h_hat.multiply(M::Dx).to_field();
            let commutator = forward_transform(&commutator_l_nh(h, CommutatorForm::Conservation)?)?;
            h.product_spectrum(&h_x)?
                .scale(3.0)
                .axpy(-1.0, &commutator)
                .axpy(-1.0, &h_hat.multiply(M::N))
                .axpy(-1.0, &h_hat.multiply(M::Dx))
                .scale(-0.5)
        }
        UniForm::Conservation => {
            let p = nonlocal_products(h)?;
            h.product_spectrum(h)?
                .scale(0.75)
                .axpy(0.5, &p.h_nh.multiply(M::N))
                .axpy(-0.25, &p.nh_sq)
                .axpy(-0.5, &h_hat.multiply(M::Q))
                .axpy(-0.5, &h_hat)
                .multiply(M::Dx)
                .scale(-1.0)
        }
    };
    Ok(UniState {
        h: h_dot.to_field(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DispersiveModel {
    #[serde(alias = "bidirectional")]
    BiWave,
    #[serde(alias = "unidirectional")]
    Uni,
}

impl DispersiveModel {
    pub fn name(self) -> &'static str {
        match self {
            DispersiveModel::BiWave => "biwave",
            DispersiveModel::Uni => "uni",
        }
    }
}

/// Linear frequency for the plane wave `exp(i(k x - omega t))`. The
/// bidirectional model returns its positive branch.
pub fn linear_dispersion(model: DispersiveModel, k: f64) -> f64 {
    match model {
        DispersiveModel::BiWave => k.abs() / (1.0 + k * k).sqrt(),
        DispersiveModel::Uni => -0.5 * k * (1.0 + 1.0 / (1.0 + k * k)),
    }
}

/// A system together with any parameters its right-hand side needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Full(EllipticSolveParams),
    Boussinesq,
    BiWave,
    Uni(UniForm),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Full(_) => ModelKind::Full,
            Model::Boussinesq => ModelKind::Boussinesq,
            Model::BiWave => ModelKind::BiWave,
            Model::Uni(_) => ModelKind::Uni,
        }
    }

    /// Default-parameter model of the given kind.
    pub fn of_kind(kind: ModelKind) -> Self {
        match kind {
            ModelKind::Full => Model::Full(EllipticSolveParams::default()),
            ModelKind::Boussinesq => Model::Boussinesq,
            ModelKind::BiWave => Model::BiWave,
            ModelKind::Uni => Model::Uni(UniForm::default()),
        }
    }

    pub fn rhs(&self, state: &ModelState) -> Result<ModelState> {
        match (self, state) {
            (Model::Full(p), ModelState::Full(s)) => Ok(ModelState::Full(full_rhs(s, p)?)),
            (Model::Boussinesq, ModelState::Boussinesq(s)) => {
                Ok(ModelState::Boussinesq(boussinesq_rhs(s)?))
            }
            (Model::BiWave, ModelState::BiWave(s)) => Ok(ModelState::BiWave(biwave_rhs(s)?)),
            (Model::Uni(form), ModelState::Uni(s)) => Ok(ModelState::Uni(uni_rhs(s, *form)?)),
            _ => Err(Error::ModelMismatch {
                model: self.kind().name(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::integrate;

    fn grid(n: usize) -> Arc<PeriodicGrid> {
        PeriodicGrid::standard(n).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point_of_every_model() {
        let g = grid(64);
        for kind in [
            ModelKind::Full,
            ModelKind::Boussinesq,
            ModelKind::BiWave,
            ModelKind::Uni,
        ] {
            let zero = ModelState::zeros(kind, &g);
            let rhs = Model::of_kind(kind).rhs(&zero).unwrap();
            for f in rhs.fields() {
                assert_eq!(f.max_abs(), 0.0, "{kind}");
            }
        }
        assert!(
            uni_rhs(
                &UniState {
                    h: Field::zeros(&g)
                },
                UniForm::Standard
            )
            .unwrap()
            .h
            .max_abs()
                == 0.0
        );
    }

    #[test]
    fn zero_density_gives_zero_field() {
        let g = grid(32);
        let b = solve_magnetic_field(&Field::zeros(&g), &EllipticSolveParams::default()).unwrap();
        assert_eq!(b.field.max_abs(), 0.0);
        assert_eq!(b.iterations, 0);
    }

    #[test]
    fn vacuum_density_rejected() {
        let g = grid(32);
        let n = Field::from_fn(&g, |x| 1.5 * x.cos());
        assert!(matches!(
            solve_magnetic_field(&n, &EllipticSolveParams::default()),
            Err(Error::VacuumDensity { .. })
        ));
    }

    #[test]
    fn elliptic_iteration_cap_reported() {
        let g = grid(64);
        let n = Field::from_fn(&g, |x| 0.5 * x.cos());
        let params = EllipticSolveParams {
            tol: 1e-14,
            max_iters: 2,
        };
        assert!(matches!(
            solve_magnetic_field(&n, &params),
            Err(Error::EllipticNoConvergence { iterations: 2, .. })
        ));
        assert!(EllipticSolveParams {
            tol: 0.0,
            max_iters: 5
        }
        .validate()
        .is_err());
    }

    #[test]
    fn moderate_density_converges_and_resubstitutes() {
        let g = grid(128);
        let n = Field::from_fn(&g, |x| 0.1 * x.cos());
        let b = solve_magnetic_field(&n, &EllipticSolveParams::default()).unwrap();
        assert!(b.residual <= 1e-12);
        assert!(b.iterations <= 50);
        assert!(elliptic_residual(&b.field, &n).unwrap() <= 1e-12);
    }

    #[test]
    fn density_tendency_has_zero_mean() {
        let g = grid(64);
        let s = FullPlasmaState {
            density: Field::from_fn(&g, |x| 0.1 * x.sin() + 0.05 * (2.0 * x).cos()),
            velocity: Field::from_fn(&g, |x| 0.2 * x.cos() + 0.03),
        };
        let d = full_rhs(&s, &EllipticSolveParams::default()).unwrap();
        assert!(integrate(&d.density).abs() < 1e-15);
    }

    #[test]
    fn reduced_tendencies_have_zero_mean() {
        let g = grid(64);
        let h = Field::from_fn(&g, |x| 0.3 * x.sin() + 0.1 * (3.0 * x).cos() + 0.2);
        let v = Field::from_fn(&g, |x| 0.2 * (2.0 * x).sin() - 0.1);
        let b = boussinesq_rhs(&BoussinesqState {
            h: h.clone(),
            v: v.clone(),
        })
        .unwrap();
        assert!(integrate(&b.h).abs() < 1e-15);
        assert!(integrate(&b.v).abs() < 1e-15);
        let w = biwave_rhs(&BiWaveState { h: h.clone(), g: v }).unwrap();
        assert!(integrate(&w.g).abs() < 1e-15);
        for form in [UniForm::Standard, UniForm::Conservation] {
            let u = uni_rhs(&UniState { h: h.clone() }, form).unwrap();
            assert!(integrate(&u.h).abs() < 1e-14);
        }
    }

    #[test]
    fn biwave_linearization_at_unit_wavenumber() {
        let g = grid(64);
        let eps = 1e-6;
        let h = Field::from_fn(&g, |x| eps * x.cos());
        let w = biwave_rhs(&BiWaveState {
            h,
            g: Field::zeros(&g),
        })
        .unwrap();
        let expected = Field::from_fn(&g, |x| -0.5 * eps * x.cos());
        assert!(w.g.max_abs_diff(&expected) < 10.0 * eps * eps);
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(linear_dispersion(DispersiveModel::BiWave, 0.0), 0.0);
        assert!((linear_dispersion(DispersiveModel::BiWave, 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((linear_dispersion(DispersiveModel::Uni, 1.0) + 0.75).abs() < 1e-16);
    }

    #[test]
    fn mismatched_state_rejected() {
        let g = grid(16);
        let err = Model::Boussinesq
            .rhs(&ModelState::zeros(ModelKind::Uni, &g))
            .unwrap_err();
        assert_eq!(
            err,
            Error::ModelMismatch {
                model: "boussinesq"
            }
        );
    }
}
