//! Radial Coulomb machinery: quadrature on a log-spaced radial grid, the
//! Coulomb quadratic form `D(f, g)`, Newton potentials and the screened
//! mean-field potential of a spherically symmetric density.
//!
//! All radial integrals are trapezoid sums in `t = ln r`. For a node set
//! `r_i = r_0 e^{i Δt}` the weight of node `i` is `4π r_i^3 Δt` (halved at the
//! two ends), so `Σ w_i f(r_i)` approximates `∫ f(|x|) dx` over R^3.
//!
//! The Newton kernel uses the exact angular average
//! `∫ dΩ/(4π|x-y|) = 1/max(|x|, |y|)`, so no angular quadrature is involved.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{ensure_finite, invalid, Error, Result};

/// Log-spaced radial nodes and trapezoid weights for `∫ 4π r² f(r) dr`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_step: f64,
}

impl RadialGrid {
    pub const DEFAULT_MIN: f64 = 1e-6;
    pub const DEFAULT_MAX: f64 = 1e3;
    pub const DEFAULT_NODES: usize = 4000;

    pub fn log_spaced(r_min: f64, r_max: f64, n: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(invalid(format!(
                "radial grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        if n < 3 {
            return Err(invalid("radial grid needs at least 3 nodes"));
        }
        let t0 = r_min.ln();
        let dt = (r_max.ln() - t0) / (n - 1) as f64;
        let nodes: Vec<f64> = (0..n).map(|i| (t0 + i as f64 * dt).exp()).collect();
        let weights = trapezoid_weights(&nodes, dt);
        Ok(Self {
            nodes,
            weights,
            log_step: dt,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    /// The grid with every radius multiplied by `factor`. Weights scale as
    /// `factor³`, so quadratures on the scaled grid are exact images of the
    /// originals under `x -> factor·x`.
    pub fn scaled(&self, factor: f64) -> Self {
        let f3 = factor * factor * factor;
        Self {
            nodes: self.nodes.iter().map(|r| r * factor).collect(),
            weights: self.weights.iter().map(|w| w * f3).collect(),
            log_step: self.log_step,
        }
    }

    /// `∫ f(|x|) dx` over R^3.
    ///
    /// Adds the ball `|x| < r_0` analytically, assuming `f` follows the power
    /// law through the first two nodes there (TF densities go like `r^{-3/2}`).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let bulk: f64 = self
            .weights
            .iter()
            .zip(values)
            .map(|(w, f)| w * f)
            .sum();
        bulk + self.origin_piece(values)
    }

    fn origin_piece(&self, values: &[f64]) -> f64 {
        let (f0, f1) = (values[0], values[1]);
        if f0 == 0.0 {
            return 0.0;
        }
        let p = if f0 * f1 > 0.0 {
            ((f1 / f0).ln() / self.log_step).clamp(-2.9, 10.0)
        } else {
            0.0
        };
        let r0 = self.nodes[0];
        4.0 * PI * f0 * r0 * r0 * r0 / (p + 3.0)
    }
}

impl Default for RadialGrid {
    fn default() -> Self {
        Self::log_spaced(Self::DEFAULT_MIN, Self::DEFAULT_MAX, Self::DEFAULT_NODES)
            .expect("default radial grid parameters are valid")
    }
}

fn trapezoid_weights(nodes: &[f64], dt: f64) -> Vec<f64> {
    let last = nodes.len() - 1;
    nodes
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let w = 4.0 * PI * r * r * r * dt;
            if i == 0 || i == last {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

/// Samples of a radial function on a shared grid.
#[derive(Clone, Debug)]
pub struct RadialFunction {
    grid: Arc<RadialGrid>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        ensure_finite(&values, "radial function")?;
        Ok(Self { grid, values })
    }

    /// Like [`RadialFunction::new`] but also rejects negative samples.
    pub fn density(grid: Arc<RadialGrid>, values: Vec<f64>) -> Result<Self> {
        let f = Self::new(grid, values)?;
        f.ensure_density()?;
        Ok(f)
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// `∫ f dx` (total charge for a density).
    pub fn charge(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&r, &v)| f(r, v))
            .collect();
        Self::new(self.grid.clone(), values)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    fn ensure_density(&self) -> Result<()> {
        match self.values.iter().position(|&v| v < 0.0) {
            Some(i) => Err(invalid(format!(
                "density is negative ({:e}) at r = {:e}",
                self.values[i],
                self.grid.nodes()[i]
            ))),
            None => Ok(()),
        }
    }
}

/// Discrete Newton potential `φ_i = Σ_j w_j ρ_j / max(r_i, r_j)` computed with
/// running sums in O(n).
fn newton_values(grid: &RadialGrid, rho: &[f64]) -> Vec<f64> {
    let r = grid.nodes();
    let w = grid.weights();
    let n = r.len();
    let mut outer = vec![0.0; n];
    let mut acc = 0.0;
    for i in (0..n).rev() {
        outer[i] = acc;
        acc += w[i] * rho[i] / r[i];
    }
    let mut inner = 0.0;
    (0..n)
        .map(|i| {
            inner += w[i] * rho[i];
            inner / r[i] + outer[i]
        })
        .collect()
}

/// `D(f, g) = ½ ∬ f(x) g(y) / |x - y| dx dy` for radial `f`, `g`.
pub fn coulomb_energy(f: &RadialFunction, g: &RadialFunction) -> Result<f64> {
    if !f.same_grid(g) {
        return Err(Error::GridMismatch(
            "coulomb_energy needs both functions on the same grid".into(),
        ));
    }
    let phi = newton_values(&f.grid, &g.values);
    Ok(0.5
        * f.grid
            .weights()
            .iter()
            .zip(&f.values)
            .zip(&phi)
            .map(|((w, a), p)| w * a * p)
            .sum::<f64>())
}

/// `(ρ * |x|^{-1})(r) = (1/r) ∫_{s<r} ρ + ∫_{s>r} ρ(s)/s`.
pub fn newton_potential(rho: &RadialFunction) -> Result<RadialFunction> {
    rho.ensure_density()?;
    let values = newton_values(&rho.grid, &rho.values);
    RadialFunction::new(rho.grid.clone(), values)
}

/// Screened mean-field potential `(1-ε)^{-1} [ -Z/r + (ρ * |x|^{-1})(r) ]`.
pub fn tf_mean_field(rho: &RadialFunction, z: f64, eps: f64) -> Result<RadialFunction> {
    if !(0.0..1.0).contains(&eps) {
        return Err(invalid(format!("ε must lie in [0, 1), got {eps}")));
    }
    if !z.is_finite() {
        return Err(invalid("nuclear charge must be finite"));
    }
    let phi = newton_potential(rho)?;
    let pre = 1.0 / (1.0 - eps);
    phi.map(|r, p| pre * (p - z / r))
}
