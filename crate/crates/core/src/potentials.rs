//! Named potential families (well depths `V`, applied as `-V`).

use std::sync::Arc;

use crate::coulomb::{tf_mean_field, RadialGrid};
use crate::error::{invalid, Result};
use crate::grid::{BoxGrid, ScalarField};
use crate::tf::{solve_tf_ode, tf_density_from_screening};

fn distance(p: [f64; 3], c: [f64; 3]) -> f64 {
    ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2) + (p[2] - c[2]).powi(2)).sqrt()
}

/// `depth · exp(1 - 1/(1 - s²))` for `s = |x - x₀|/radius < 1`, else 0.
/// Smooth and compactly supported, peak `depth` at the box centre.
pub fn smooth_bump(grid: &Arc<BoxGrid>, depth: f64, radius: f64) -> Result<ScalarField> {
    if !(radius > 0.0) || !depth.is_finite() {
        return Err(invalid("smooth-bump needs a positive radius and finite depth"));
    }
    let c = grid.center();
    ScalarField::from_fn(grid.clone(), |p| {
        let s2 = (distance(p, c) / radius).powi(2);
        if s2 < 1.0 {
            depth * (1.0 - 1.0 / (1.0 - s2)).exp()
        } else {
            0.0
        }
    })
}

/// `charge / max(|x - x₀|, core)` inside `|x - x₀| < cutoff`, 0 outside.
pub fn truncated_coulomb(grid: &Arc<BoxGrid>, charge: f64, core: f64, cutoff: f64) -> Result<ScalarField> {
    if !(core > 0.0 && cutoff > core) {
        return Err(invalid("truncated-coulomb needs 0 < core < cutoff"));
    }
    let c = grid.center();
    ScalarField::from_fn(grid.clone(), |p| {
        let r = distance(p, c);
        if r < cutoff {
            charge / r.max(core)
        } else {
            0.0
        }
    })
}

pub fn constant_well(grid: &Arc<BoxGrid>, depth: f64) -> Result<ScalarField> {
    ScalarField::constant(grid.clone(), depth)
}

/// `-W̃(|x - x₀|)` for the neutral TF atom at `Z = 1`, with
/// `W̃ = -1/|X| + ρ_TF * |X|^{-1}`, the radius clamped below at `core`.
pub fn tf_mean_field_well(grid: &Arc<BoxGrid>, core: f64) -> Result<ScalarField> {
    if !(core > 0.0) {
        return Err(invalid("tf-mean-field needs a positive core radius"));
    }
    let chi = solve_tf_ode(1e-8)?;
    let rho = tf_density_from_screening(&chi, 1.0)?;
    let w = tf_mean_field(&rho.radial, 1.0, 0.0)?;
    let rg: &RadialGrid = w.grid();
    let (nodes, vals) = (rg.nodes().to_vec(), w.values().to_vec());
    let c = grid.center();
    ScalarField::from_fn(grid.clone(), |p| {
        let r = distance(p, c).max(core).max(nodes[0]);
        // linear interpolation in ln r
        let t = ((r / nodes[0]).ln() / rg.log_step()).min((nodes.len() - 1) as f64);
        let i = (t.floor() as usize).min(nodes.len() - 2);
        let s = t - i as f64;
        -((1.0 - s) * vals[i] + s * vals[i + 1])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn families_have_expected_shapes() {
        let g = Arc::new(BoxGrid::cube(21, 1.0).unwrap());
        let b = smooth_bump(&g, 10.0, 0.45).unwrap();
        assert!((b.sup_bound() - 10.0).abs() < 1e-12);
        assert_eq!(b.values()[g.index(1, 1, 1)], 0.0);
        let c = truncated_coulomb(&g, 2.0, 0.05, 0.4).unwrap();
        assert!((c.sup_bound() - 40.0).abs() < 1e-12);
        let t = tf_mean_field_well(&g, 0.05).unwrap();
        let mid = g.index(10, 10, 10);
        assert!(t.values()[mid] > 0.0 && t.values()[mid] < 1.0 / 0.05);
        assert!(t.values().iter().all(|&v| v > 0.0));
        assert!(smooth_bump(&g, 1.0, 0.0).is_err());
    }
}
