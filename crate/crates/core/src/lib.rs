//! Periodic pseudospectral engine for the cold-plasma model hierarchy: the
//! full hyperbolic-hyperbolic-elliptic system, its nonlocal Boussinesq
//! reduction, the bidirectional nonlocal wave equation and the unidirectional
//! Fornberg-Whitham-type equation.
//!
//! Layout:
//! - [`spectral`]: grids, transforms, multiplier operators, dealiasing, quadrature.
//! - [`models`]: right-hand sides, the magnetic-field elliptic solve, linear dispersion.
//! - [`integrator`]: fixed-step RK4 with breakdown detection.
//! - [`diagnostics`]: conserved quantities, Hamiltonians and monitors.
//! - [`experiments`]: consistency sweeps, dispersion measurement, breaking probe.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod models;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Field, MultiplierKind, PeriodicGrid, Spectrum};
