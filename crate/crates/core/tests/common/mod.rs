//! Oracles shared by the integration tests. Nothing here calls the solvers
//! under test except to read operator actions.
#![allow(dead_code)]

use std::sync::Arc;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tfpauli::field::VectorPotential;
use tfpauli::grid::BoxGrid;
use tfpauli::operator::OperatorHandle;

pub fn unit_grid(n: usize) -> Arc<BoxGrid> {
    Arc::new(BoxGrid::cube(n, 1.0).unwrap())
}

pub fn random_field(grid: &Arc<BoxGrid>, band: usize, rms: f64, seed: u64) -> VectorPotential {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    VectorPotential::random_band_limited(grid.clone(), band, rms, &mut rng).unwrap()
}

/// TF screening function by shooting in `x` from the small-`x` series
/// `1 + s x + (4/3)x^{3/2} + (2s/5)x^{5/2} + x³/3`, RK4 with steps graded
/// near the origin, bisection on orbit fate, Richardson over two step sizes.
/// Returns `(χ'(0), χ(10))`.
pub fn tf_shooting_oracle() -> (f64, f64) {
    fn rhs(x: f64, c: f64, y: f64) -> (f64, f64) {
        (y, c.max(0.0).powf(1.5) / x.sqrt())
    }
    fn run(s: f64, h: f64, x_stop: f64) -> (f64, Option<bool>) {
        let x0: f64 = 1e-4;
        let r = x0.sqrt();
        let mut c = 1.0 + s * x0 + 4.0 / 3.0 * x0 * r + 0.4 * s * x0 * x0 * r + x0.powi(3) / 3.0;
        let mut y = s + 2.0 * r + s * x0 * r + x0 * x0;
        let mut x = x0;
        let mut at10 = f64::NAN;
        while x < x_stop {
            let mut dx = h * (x / 0.05).min(1.0);
            if x < 10.0 && x + dx > 10.0 {
                dx = 10.0 - x;
            }
            let (a1, b1) = rhs(x, c, y);
            let (a2, b2) = rhs(x + dx / 2.0, c + dx / 2.0 * a1, y + dx / 2.0 * b1);
            let (a3, b3) = rhs(x + dx / 2.0, c + dx / 2.0 * a2, y + dx / 2.0 * b2);
            let (a4, b4) = rhs(x + dx, c + dx * a3, y + dx * b3);
            c += dx / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            y += dx / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            x += dx;
            if x == 10.0 {
                at10 = c;
            }
            if c < 0.0 {
                return (at10, Some(true));
            }
            if y > 0.0 {
                return (at10, Some(false));
            }
        }
        (at10, None)
    }
    let solve = |h: f64| {
        let (mut lo, mut hi) = (-1.7, -1.5);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            match run(mid, h, 60.0).1 {
                Some(true) => lo = mid,
                Some(false) => hi = mid,
                None => break,
            }
        }
        let s = 0.5 * (lo + hi);
        (s, run(s, h, 10.0).0)
    };
    let (s1, c1) = solve(2e-3);
    let (s2, c2) = solve(1e-3);
    ((16.0 * s2 - s1) / 15.0, (16.0 * c2 - c1) / 15.0)
}

/// Dense matrix of the complex action, column by column.
pub fn dense_complex(op: &OperatorHandle) -> Mat<Complex64> {
    let n = op.complex_dim();
    let mut m = Mat::<Complex64>::zeros(n, n);
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        op.apply_complex(&e, &mut y);
        for i in 0..n {
            m[(i, j)] = y[i];
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    m
}

/// Full spectrum of the complex action by dense Hermitian diagonalisation.
pub fn dense_spectrum(op: &OperatorHandle) -> Vec<f64> {
    let m = dense_complex(op);
    let eig = m.self_adjoint_eigen(Side::Lower).unwrap();
    let s = eig.S().column_vector();
    let mut v: Vec<f64> = (0..m.nrows()).map(|i| s[i].re).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Largest entry of `|M - M^H|`.
pub fn hermitian_defect(m: &Mat<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Sum of the negative entries.
pub fn negative_sum(values: &[f64]) -> f64 {
    values.iter().filter(|&&v| v < 0.0).sum()
}

/// Continuum Dirichlet eigenvalues `π²(a² + b² + c²)/L² · h² - V0` of the
/// cube, all of them below `cut`.
pub fn cube_levels(side: f64, h: f64, v0: f64, cut: f64) -> Vec<f64> {
    let k = std::f64::consts::PI * h / side;
    let mut out = Vec::new();
    let max = ((cut + v0) / (k * k)).sqrt().ceil() as usize + 1;
    for a in 1..=max {
        for b in 1..=max {
            for c in 1..=max {
                let e = k * k * (a * a + b * b + c * c) as f64 - v0;
                if e < cut {
                    out.push(e);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}
