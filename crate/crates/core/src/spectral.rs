//! Periodic grids, Fourier transforms and the nonlocal multiplier operators.
//!
//! Spectral coefficients are indexed by the integer mode `j` with
//! `f(x_i) = sum_j c_j exp(i k_j x_i)`, `k_j = 2 pi j / length`, on the sample
//! points `x_i = -length/2 + i length / n`. They are stored in FFT order: slot
//! `idx` holds mode `j = idx` for `idx <= n/2` and `j = idx - n` above that.
//!
//! Every pointwise product is followed by the 2/3-rule projection, so for
//! inputs band-limited to `|j| <= n/3` quadratic products are exact
//! truncations and integration by parts holds to round-off.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid together with its FFT plans.
pub struct PeriodicGrid {
    n_points: usize,
    length: f64,
    wavenumbers: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .finish()
    }
}

impl PeriodicGrid {
    pub fn new(n_points: usize, length: f64) -> Result<Arc<Self>> {
        if n_points < 8 || n_points % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even and >= 8, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let scale = 2.0 * PI / length;
        let wavenumbers = (0..n_points)
            .map(|idx| mode_of_slot(idx, n_points) as f64 * scale)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Arc::new(Self {
            n_points,
            length,
            wavenumbers,
            fft_forward: planner.plan_fft_forward(n_points),
            fft_inverse: planner.plan_fft_inverse(n_points),
        }))
    }

    /// Grid on `[-pi, pi)`.
    pub fn standard(n_points: usize) -> Result<Arc<Self>> {
        Self::new(n_points, 2.0 * PI)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        -0.5 * self.length + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// Wavenumbers in FFT storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Integer mode index held in storage slot `idx`.
    pub fn mode_index(&self, idx: usize) -> i64 {
        mode_of_slot(idx, self.n_points)
    }

    /// Storage slot of mode `j`, if the grid resolves it.
    pub fn slot_of_mode(&self, j: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if j > half || j <= -half {
            return None;
        }
        Some(if j >= 0 {
            j as usize
        } else {
            (j + self.n_points as i64) as usize
        })
    }

    /// Largest mode kept by the 2/3 rule.
    pub fn max_dealiased_mode(&self) -> usize {
        self.n_points / 3
    }

    fn keeps_mode(&self, j: i64) -> bool {
        3 * j.unsigned_abs() as usize <= self.n_points
    }

    fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n_points / 2
    }
}

fn mode_of_slot(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn same_grid(a: &Arc<PeriodicGrid>, b: &Arc<PeriodicGrid>) -> bool {
    Arc::ptr_eq(a, b) || (a.n_points == b.n_points && a.length == b.length)
}

/// The multiplier operators acting diagonally on Fourier modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MultiplierKind {
    /// `xi^2 / (1 + xi^2)`
    L,
    /// `i xi / (1 + xi^2)`
    N,
    /// `1 / (1 + xi^2)`, the Helmholtz inverse `(1 - d_xx)^-1`.
    Q,
    SqrtL,
    SqrtQ,
    Dx,
    Dxx,
}

impl MultiplierKind {
    pub const ALL: [MultiplierKind; 7] = [
        MultiplierKind::L,
        MultiplierKind::N,
        MultiplierKind::Q,
        MultiplierKind::SqrtL,
        MultiplierKind::SqrtQ,
        MultiplierKind::Dx,
        MultiplierKind::Dxx,
    ];

    /// Odd symbols have no real value at the Nyquist mode; that mode is dropped.
    pub fn is_odd(self) -> bool {
        matches!(self, MultiplierKind::N | MultiplierKind::Dx)
    }
}

pub fn symbol_eval(kind: MultiplierKind, xi: f64) -> Complex64 {
    let denom = 1.0 + xi * xi;
    match kind {
        MultiplierKind::L => Complex64::new(xi * xi / denom, 0.0),
        MultiplierKind::N => Complex64::new(0.0, xi / denom),
        MultiplierKind::Q => Complex64::new(1.0 / denom, 0.0),
        MultiplierKind::SqrtL => Complex64::new(xi.abs() / denom.sqrt(), 0.0),
        MultiplierKind::SqrtQ => Complex64::new(1.0 / denom.sqrt(), 0.0),
        MultiplierKind::Dx => Complex64::new(0.0, xi),
        MultiplierKind::Dxx => Complex64::new(-xi * xi, 0.0),
    }
}

/// Real scalar field sampled on a periodic grid.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<PeriodicGrid>,
    samples: Vec<f64>,
}

/// Spectral coefficients of a real field, in FFT storage order.
#[derive(Debug, Clone)]
pub struct Spectrum {
    grid: Arc<PeriodicGrid>,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: Arc<PeriodicGrid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                got: samples.len(),
            });
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            samples: vec![0.0; grid.n_points],
            grid: Arc::clone(grid),
        }
    }

    pub fn constant(grid: &Arc<PeriodicGrid>, value: f64) -> Self {
        Self {
            samples: vec![value; grid.n_points],
            grid: Arc::clone(grid),
        }
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(f64) -> f64) -> Self {
        Self {
            samples: (0..grid.n_points).map(|i| f(grid.point(i))).collect(),
            grid: Arc::clone(grid),
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sup-norm distance to `other`.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        forward_transform(self)
    }

    pub fn apply(&self, kind: MultiplierKind) -> Result<Field> {
        apply_multiplier(kind, self)
    }

    pub fn dx(&self) -> Result<Field> {
        apply_multiplier(MultiplierKind::Dx, self)
    }

    /// Dealiased pointwise product.
    pub fn product(&self, other: &Field) -> Result<Field> {
        Ok(self.product_spectrum(other)?.to_field())
    }

    /// Spectrum of the dealiased pointwise product.
    pub fn product_spectrum(&self, other: &Field) -> Result<Spectrum> {
        self.check_grid(other)?;
        let samples: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a * b)
            .collect();
        let raw = Field {
            grid: Arc::clone(&self.grid),
            samples,
        };
        Ok(forward_transform(&raw)?.dealiased())
    }

    pub fn square(&self) -> Result<Field> {
        self.product(self)
    }

    /// Zero-mean projection.
    pub fn mean_zero(&self) -> Field {
        let m = self.mean();
        self.map(|v| v - m)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Field {
        self.map(|v| alpha * v)
    }

    /// `self + alpha * x`.
    pub fn axpy(&self, alpha: f64, x: &Field) -> Field {
        assert!(same_grid(&self.grid, &x.grid), "axpy on mismatched grids");
        Field {
            grid: Arc::clone(&self.grid),
            samples: self
                .samples
                .iter()
                .zip(&x.samples)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Field {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Field) -> Field {
        self.axpy(-1.0, other)
    }

    pub fn check_grid(&self, other: &Field) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

impl Spectrum {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n_points],
            grid: Arc::clone(grid),
        }
    }

    pub fn from_coeffs(grid: Arc<PeriodicGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points {
            return Err(Error::LengthMismatch {
                expected: grid.n_points,
                got: coeffs.len(),
            });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    /// Coefficients in FFT storage order.
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of mode `j`; zero for modes the grid does not carry.
    pub fn mode(&self, j: i64) -> Complex64 {
        self.grid
            .slot_of_mode(j)
            .map_or(Complex64::new(0.0, 0.0), |idx| self.coeffs[idx])
    }

    /// Sets mode `j` and its Hermitian partner `-j`.
    pub fn set_mode(&mut self, j: i64, value: Complex64) {
        if let Some(idx) = self.grid.slot_of_mode(j) {
            self.coeffs[idx] = value;
        }
        if let Some(idx) = self.grid.slot_of_mode(-j) {
            self.coeffs[idx] = if j == 0 { value } else { value.conj() };
        }
    }

    pub fn multiply(&self, kind: MultiplierKind) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&self.grid.wavenumbers)
            .enumerate()
            .map(|(idx, (c, &k))| {
                if kind.is_odd() && self.grid.is_nyquist(idx) {
                    Complex64::new(0.0, 0.0)
                } else {
                    c * symbol_eval(kind, k)
                }
            })
            .collect();
        Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    /// 2/3-rule projection: zeroes every mode with `3|j| > n`.
    pub fn dealiased(mut self) -> Spectrum {
        let n = self.grid.n_points;
        for idx in 0..n {
            if !self.grid.keeps_mode(mode_of_slot(idx, n)) {
                self.coeffs[idx] = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    /// Spectrum of `x -> f(x - shift)`: mode `j` picks up `exp(-i k_j shift)`.
    /// The Nyquist coefficient keeps only the real part of its phase factor.
    pub fn translated(&self, shift: f64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&self.grid.wavenumbers)
            .enumerate()
            .map(|(idx, (c, &k))| {
                if self.grid.is_nyquist(idx) {
                    c * (k * shift).cos()
                } else {
                    c * Complex64::from_polar(1.0, -k * shift)
                }
            })
            .collect();
        Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs,
        }
    }

    pub fn axpy(&self, alpha: f64, x: &Spectrum) -> Spectrum {
        Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&x.coeffs)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn scale(&self, alpha: f64) -> Spectrum {
        Spectrum {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().map(|c| c * alpha).collect(),
        }
    }

    pub fn to_field(&self) -> Field {
        inverse_transform(self)
    }

    /// Sum of `|c_j|^2` over the modes `j` and `-j`.
    pub fn mode_energy(&self, j: i64) -> f64 {
        if j == 0 {
            self.mode(0).norm_sqr()
        } else {
            self.mode(j).norm_sqr() + self.mode(-j).norm_sqr()
        }
    }
}

#[inline]
fn slot_sign(idx: usize) -> f64 {
    if idx % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

pub fn forward_transform(f: &Field) -> Result<Spectrum> {
    if !f.is_finite() {
        return Err(Error::NonFiniteField);
    }
    let grid = &f.grid;
    let n = grid.n_points;
    let mut buf: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.fft_forward.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    // x_0 = -length/2 contributes the phase (-1)^j.
    for (idx, c) in buf.iter_mut().enumerate() {
        *c *= slot_sign(idx) * inv_n;
    }
    Ok(Spectrum {
        grid: Arc::clone(grid),
        coeffs: buf,
    })
}

pub fn inverse_transform(s: &Spectrum) -> Field {
    let grid = &s.grid;
    let mut buf: Vec<Complex64> = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(idx, c)| c * slot_sign(idx))
        .collect();
    grid.fft_inverse.process(&mut buf);
    Field {
        grid: Arc::clone(grid),
        samples: buf.into_iter().map(|c| c.re).collect(),
    }
}

pub fn apply_multiplier(kind: MultiplierKind, f: &Field) -> Result<Field> {
    Ok(forward_transform(f)?.multiply(kind).to_field())
}

pub fn dealias(f: &Field) -> Field {
    let n = f.grid.n_points;
    let mut buf: Vec<Complex64> = f.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    f.grid.fft_forward.process(&mut buf);
    for (idx, c) in buf.iter_mut().enumerate() {
        if !f.grid.keeps_mode(mode_of_slot(idx, n)) {
            *c = Complex64::new(0.0, 0.0);
        }
    }
    f.grid.fft_inverse.process(&mut buf);
    let inv_n = 1.0 / n as f64;
    Field {
        grid: Arc::clone(&f.grid),
        samples: buf.into_iter().map(|c| c.re * inv_n).collect(),
    }
}

/// Exact integral of the trigonometric interpolant over one period,
/// `length * c_0`.
pub fn integrate(f: &Field) -> f64 {
    f.grid.length * f.mean()
}

/// Which algebraic route evaluates `[L, N h] h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommutatorForm {
    /// `L(h N h) - (N h)(L h)`
    Raw,
    /// `L(h N h) + 1/2 d_x (N h)^2`
    Conservation,
}

/// The commutator `[L, N h] h = L(h N h) - (N h) L h`.
pub fn commutator_l_nh(h: &Field, form: CommutatorForm) -> Result<Field> {
    let h_hat = forward_transform(h)?;
    let nh = h_hat.multiply(MultiplierKind::N).to_field();
    let l_term = h.product_spectrum(&nh)?.multiply(MultiplierKind::L);
    let out = match form {
        CommutatorForm::Raw => {
            let lh = h_hat.multiply(MultiplierKind::L).to_field();
            l_term.axpy(-1.0, &nh.product_spectrum(&lh)?)
        }
        CommutatorForm::Conservation => {
            let nh_sq = nh.product_spectrum(&nh)?.multiply(MultiplierKind::Dx);
            l_term.axpy(0.5, &nh_sq)
        }
    };
    Ok(out.to_field())
}
