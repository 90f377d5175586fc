//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use coldplasma::{Field, PeriodicGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Real trigonometric polynomial `c0 + sum Re(C_k e^{i k x})` on `[-pi, pi)`.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    pub c0: f64,
    pub terms: Vec<(u32, Complex64)>,
}

impl TrigPoly {
    pub fn eval(&self, x: f64) -> f64 {
        self.c0
            + self
                .terms
                .iter()
                .map(|&(k, c)| (c * Complex64::from_polar(1.0, k as f64 * x)).re)
                .sum::<f64>()
    }

    pub fn sample(&self, grid: &Arc<PeriodicGrid>) -> Field {
        Field::from_fn(grid, |x| self.eval(x))
    }

    /// Applies the symbol `m`, assumed to satisfy `m(-k) = conj(m(k))`.
    pub fn apply(&self, m: impl Fn(f64) -> Complex64) -> TrigPoly {
        TrigPoly {
            c0: (m(0.0) * self.c0).re,
            terms: self
                .terms
                .iter()
                .map(|&(k, c)| (k, m(k as f64) * c))
                .collect(),
        }
    }

    pub fn max_mode(&self) -> u32 {
        self.terms.iter().map(|t| t.0).max().unwrap_or(0)
    }
}

/// Random mean-zero polynomial with modes `1..=kmax` and decaying amplitudes,
/// scaled so the sum of moduli is `amplitude`.
pub fn random_poly(rng: &mut ChaCha8Rng, kmax: u32, amplitude: f64) -> TrigPoly {
    let mut terms: Vec<(u32, Complex64)> = (1..=kmax)
        .map(|k| {
            let r: f64 = rng.gen_range(0.2..1.0) / k as f64;
            let phase: f64 = rng.gen_range(0.0..2.0 * PI);
            (k, Complex64::from_polar(r, phase))
        })
        .collect();
    let total: f64 = terms.iter().map(|t| t.1.norm()).sum();
    for t in &mut terms {
        t.1 *= amplitude / total;
    }
    TrigPoly { c0: 0.0, terms }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// Symbols written out independently of the library.
pub fn sym_l(k: f64) -> Complex64 {
    Complex64::new(k * k / (1.0 + k * k), 0.0)
}
pub fn sym_n(k: f64) -> Complex64 {
    Complex64::new(0.0, k / (1.0 + k * k))
}
pub fn sym_q(k: f64) -> Complex64 {
    Complex64::new(1.0 / (1.0 + k * k), 0.0)
}
pub fn sym_dx(k: f64) -> Complex64 {
    Complex64::new(0.0, k)
}

/// `(1/n) sum_i f(x_i) e^{-i k x_i}` by direct summation.
pub fn direct_dft(f: &Field, k: i64) -> Complex64 {
    let grid = f.grid();
    let n = grid.n_points();
    (0..n)
        .map(|i| f.samples()[i] * Complex64::from_polar(1.0, -(k as f64) * grid.point(i)))
        .sum::<Complex64>()
        / n as f64
}

/// Trapezoid quadrature `int f g` on the periodic grid, by explicit loop.
pub fn quad(f: &Field, g: &Field) -> f64 {
    let dx = f.grid().dx();
    f.samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b * dx)
        .sum()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn sup(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_m`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for j in 2..=m {
                    let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `(Q f)(x) = int_R e^{-|x-y|}/2 f(y) dy` for `L`-periodic `f`, via the
/// kernel periodized over `|m| <= images` and composite Gauss-Legendre on
/// `[x, x + L]`, where the periodized kernel is smooth.
pub fn helmholtz_by_kernel(
    f: &TrigPoly,
    x: f64,
    length: f64,
    images: i32,
    panels: usize,
    rule: &[(f64, f64)],
) -> f64 {
    let kernel = |z: f64| -> f64 {
        (-images..=images)
            .map(|m| 0.5 * (-(z + m as f64 * length).abs()).exp())
            .sum()
    };
    let h = length / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = x + p as f64 * h;
        for &(t, w) in rule {
            let y = a + 0.5 * h * (t + 1.0);
            total += 0.5 * h * w * kernel(x - y) * f.eval(y);
        }
    }
    total
}
