//! TF density, energy functional and the constant `c_TF`.
//!
//! Units: kinetic operator `-Δ` and two spin states. The TF relation is
//! `ρ = (3π²)^{-1} [-W]_+^{3/2}` and the kinetic energy density is
//! `(3/5)(3π²)^{2/3} ρ^{5/3}`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::coulomb::{coulomb_energy, newton_potential, RadialFunction, RadialGrid};
use crate::error::{invalid, Error, Result};
use crate::tf::ode::TFScreeningFunction;

/// Semiclassical constant `2/(15π²)` (two spin states).
pub const C_SC: f64 = 2.0 / (15.0 * PI * PI);

/// `(3/5)(3π²)^{2/3}`.
pub fn kinetic_constant() -> f64 {
    0.6 * (3.0 * PI * PI).powf(2.0 / 3.0)
}

/// Length scale `b = (3π/4)^{2/3} Z^{-1/3}` relating `r = b x`.
pub fn length_scale(z: f64) -> f64 {
    (0.75 * PI).powf(2.0 / 3.0) * z.powf(-1.0 / 3.0)
}

/// Radial TF density together with its nuclear charge.
#[derive(Clone, Debug)]
pub struct TFDensity {
    pub radial: RadialFunction,
    pub z: f64,
}

impl TFDensity {
    pub fn new(radial: RadialFunction, z: f64) -> Result<Self> {
        if !(z > 0.0 && z.is_finite()) {
            return Err(invalid(format!("nuclear charge must be positive, got {z}")));
        }
        if radial.values().iter().any(|&v| v < 0.0) {
            return Err(invalid("TF density must be non-negative"));
        }
        Ok(Self { radial, z })
    }

    pub fn charge(&self) -> f64 {
        self.radial.charge()
    }

    /// `|∫ρ - Z| / Z`.
    pub fn charge_residual(&self) -> f64 {
        (self.charge() - self.z).abs() / self.z
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.radial.scale(factor), self.z)
    }
}

/// `ρ(r) = (3π²)^{-1} (Z χ(r/b) / r)^{3/2}` on the default radial grid.
pub fn tf_density_from_screening(chi: &TFScreeningFunction, z: f64) -> Result<TFDensity> {
    tf_density_on_grid(chi, z, Arc::new(RadialGrid::default()))
}

pub fn tf_density_on_grid(
    chi: &TFScreeningFunction,
    z: f64,
    grid: Arc<RadialGrid>,
) -> Result<TFDensity> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid(format!("nuclear charge must be positive, got {z}")));
    }
    let b = length_scale(z);
    let pre = 1.0 / (3.0 * PI * PI);
    let radial = RadialFunction::from_fn(grid, |r| {
        let w = z * chi.eval(r / b) / r;
        pre * w.max(0.0).powf(1.5)
    })?;
    TFDensity::new(radial, z)
}

/// The three terms of the TF functional.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TFEnergyTerms {
    /// `(3/5)(3π²)^{2/3} ∫ρ^{5/3}`
    pub kinetic: f64,
    /// `Z ∫ρ/|x|`
    pub attraction: f64,
    /// `D(ρ, ρ)`
    pub repulsion: f64,
}

impl TFEnergyTerms {
    pub fn total(&self) -> f64 {
        self.kinetic - self.attraction + self.repulsion
    }

    /// `d/dλ E(λ³ρ(λ·))` at `λ = 1`; vanishes at the minimizer.
    pub fn virial(&self) -> f64 {
        2.0 * self.kinetic - self.attraction + self.repulsion
    }
}

pub fn tf_energy_terms(rho: &TFDensity) -> Result<TFEnergyTerms> {
    let grid = rho.radial.grid();
    let v = rho.radial.values();
    let kin: Vec<f64> = v.iter().map(|p| p.powf(5.0 / 3.0)).collect();
    let att: Vec<f64> = v.iter().zip(grid.nodes()).map(|(p, r)| p / r).collect();
    Ok(TFEnergyTerms {
        kinetic: kinetic_constant() * grid.integrate(&kin),
        attraction: rho.z * grid.integrate(&att),
        repulsion: coulomb_energy(&rho.radial, &rho.radial)?,
    })
}

/// `E_TF(ρ) = (3/5)(3π²)^{2/3}∫ρ^{5/3} - Z∫ρ/|x| + D(ρ,ρ)`.
pub fn tf_functional_energy(rho: &TFDensity) -> Result<f64> {
    Ok(tf_energy_terms(rho)?.total())
}

/// `D(ρ,ρ) + C_sc ∫[-1/|X| + ρ*|X|^{-1}]_-^{5/2}` for a charge-one density.
pub fn compute_c_tf(rho: &TFDensity) -> Result<f64> {
    if (rho.z - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("c_TF is defined at Z = 1, got Z = {}", rho.z)));
    }
    c_tf_functional(&rho.radial)
}

/// The `c_TF` expression for an arbitrary trial density at unit charge.
pub fn c_tf_functional(rho: &RadialFunction) -> Result<f64> {
    let phi = newton_potential(rho)?;
    let neg: Vec<f64> = phi
        .values()
        .iter()
        .zip(rho.grid().nodes())
        .map(|(p, r)| (1.0 / r - p).max(0.0).powf(2.5))
        .collect();
    Ok(coulomb_energy(rho, rho)? + C_SC * rho.grid().integrate(&neg))
}

/// The closed form `3.678 (3π²)^{-2/3}` in these units.
pub fn c_tf_closed_form() -> f64 {
    3.678 * (3.0 * PI * PI).powf(-2.0 / 3.0)
}

/// The same constant with the exponent sign flipped, `3.678 (3π²)^{2/3}`.
pub fn c_tf_closed_form_flipped() -> f64 {
    3.678 * (3.0 * PI * PI).powf(2.0 / 3.0)
}

/// Options for [`minimize_tf_functional`].
#[derive(Clone, Copy, Debug)]
pub struct TfMinimizeOptions {
    pub max_iters: usize,
    /// Stop when the relative energy decrease of an iteration drops below this.
    pub rel_tol: f64,
}

impl Default for TfMinimizeOptions {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            rel_tol: 1e-13,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TfMinimizeResult {
    pub density: TFDensity,
    pub energy: f64,
    pub iterations: usize,
}

/// Discrete TF energy `Σ w (c_K ρ^{5/3} - Zρ/r + ½ρφ)` used by the minimizer.
fn discrete_energy(grid: &RadialGrid, z: f64, rho: &[f64]) -> (f64, Vec<f64>) {
    let ck = kinetic_constant();
    let f = RadialFunction::new(Arc::new(grid.clone()), rho.to_vec()).expect("finite");
    let phi = newton_potential(&f).expect("non-negative").into_values();
    let e = grid
        .weights()
        .iter()
        .zip(grid.nodes())
        .zip(rho.iter().zip(&phi))
        .map(|((w, r), (p, ph))| w * (ck * p.powf(5.0 / 3.0) - z * p / r + 0.5 * p * ph))
        .sum();
    (e, phi)
}

/// Projection onto `{ρ ≥ 0, Σ w ρ = Z}` in the metric `diag(w / m)`:
/// `ρ_i = max(y_i - ν m_i, 0)` with `ν` fixed by the charge.
fn project(y: &[f64], m: &[f64], w: &[f64], z: f64) -> Vec<f64> {
    let charge = |nu: f64| -> f64 {
        y.iter()
            .zip(m)
            .zip(w)
            .map(|((y, m), w)| w * (y - nu * m).max(0.0))
            .sum()
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while charge(lo) < z {
        lo *= 2.0;
    }
    while charge(hi) > z {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if charge(mid) > z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = 0.5 * (lo + hi);
    y.iter()
        .zip(m)
        .map(|(y, m)| (y - nu * m).max(0.0))
        .collect()
}

/// Minimizes the TF functional over `{ρ ≥ 0, ∫ρ = Z}` on `grid` by projected
/// gradient descent with a diagonal preconditioner (inverse of the local
/// kinetic Hessian) and Armijo backtracking.
pub fn minimize_tf_functional(
    grid: Arc<RadialGrid>,
    z: f64,
    start: &RadialFunction,
    opts: TfMinimizeOptions,
) -> Result<TfMinimizeResult> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(invalid(format!("nuclear charge must be positive, got {z}")));
    }
    if !start.same_grid(&RadialFunction::zeros(grid.clone())) {
        return Err(Error::GridMismatch("start density must live on the target grid".into()));
    }
    let ck = kinetic_constant();
    let w = grid.weights().to_vec();
    let r = grid.nodes().to_vec();
    let ones = vec![1.0; w.len()];
    let mut rho = project(&start.values().iter().map(|v| v.max(0.0)).collect::<Vec<_>>(), &ones, &w, z);
    let (mut e, mut phi) = discrete_energy(&grid, z, &rho);
    let mut tau = 1.0;
    let mut iterations = 0;
    for it in 0..opts.max_iters {
        iterations = it + 1;
        // Pointwise gradient (per unit weight) and preconditioner.
        let g: Vec<f64> = (0..w.len())
            .map(|i| 5.0 / 3.0 * ck * rho[i].powf(2.0 / 3.0) - z / r[i] + phi[i])
            .collect();
        let m: Vec<f64> = rho
            .iter()
            .map(|&p| 1.0 / (10.0 / 9.0 * ck * p.max(1e-300).powf(-1.0 / 3.0) + 1e-12))
            .collect();
        let mut accepted = false;
        let mut new_e = e;
        while tau > 1e-12 {
            let y: Vec<f64> = (0..w.len()).map(|i| rho[i] - tau * m[i] * g[i]).collect();
            let trial = project(&y, &m, &w, z);
            let decrease: f64 = (0..w.len())
                .map(|i| w[i] * g[i] * (trial[i] - rho[i]))
                .sum();
            let (te, tphi) = discrete_energy(&grid, z, &trial);
            if te <= e + 1e-4 * decrease {
                rho = trial;
                phi = tphi;
                new_e = te;
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if !accepted {
            break;
        }
        let rel = (e - new_e).abs() / new_e.abs();
        e = new_e;
        tau = (tau * 2.0).min(1.0);
        if rel < opts.rel_tol {
            break;
        }
    }
    let density = TFDensity::new(RadialFunction::new(grid, rho)?, z)?;
    let energy = tf_functional_energy(&density)?;
    Ok(TfMinimizeResult {
        density,
        energy,
        iterations,
    })
}
