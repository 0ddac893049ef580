//! Weyl estimate of `Tr[-h²Δ - V]_-` and the semiclassical error shape.

use crate::grid::ScalarField;
use crate::tf::C_SC;

/// `-C_sc (multiplicity/2) h^{-3} ∫ V_+^{5/2}` with `C_sc = 2/(15π²)`.
///
/// `V` is the well depth, so `V_+` is the part that binds. The integral runs
/// over the closure of the domain with product trapezoid weights.
pub fn weyl_estimate(v: &ScalarField, h: f64, multiplicity: usize) -> f64 {
    let integral = v.integrate_over_domain(|x| x.max(0.0).powf(2.5));
    -C_SC * 0.5 * multiplicity as f64 * integral / (h * h * h)
}

/// Weyl estimate of the number of eigenvalues below zero,
/// `(multiplicity/2)·(1/(3π²)) h^{-3} ∫ V_+^{3/2}`. Used to size eigensolver
/// blocks.
pub fn weyl_count(v: &ScalarField, h: f64, multiplicity: usize) -> f64 {
    let integral = v.integrate_over_domain(|x| x.max(0.0).powf(1.5));
    0.5 * multiplicity as f64 * integral / (3.0 * std::f64::consts::PI.powi(2) * h * h * h)
}

/// `C h^{-3} K^{5/2} |Ω_√h| · s(1 + s)` with `s = (h K^{3/2})^{1/2}`.
/// `C` is not known; the value is only a trend comparator.
pub fn semiclassical_error_bound(h: f64, k: f64, vol_neighborhood: f64, c: f64) -> f64 {
    let s = (h * k.powf(1.5)).sqrt();
    c * k.powf(2.5) * vol_neighborhood * s * (1.0 + s) / (h * h * h)
}

/// Volume of the set of grid points within distance `radius` of the support
/// of `V_+` (one cell per node), from an exact Euclidean distance transform.
pub fn support_neighborhood_volume(v: &ScalarField, radius: f64) -> f64 {
    let g = v.grid();
    let n = g.n();
    let d = g.spacing();
    let inf = f64::INFINITY;
    let mut dist: Vec<f64> = v.values().iter().map(|&x| if x > 0.0 { 0.0 } else { inf }).collect();
    for axis in 0..3 {
        let stride = g.stride(axis);
        let len = n[axis];
        let mut line = vec![0.0; len];
        for start in 0..dist.len() {
            if !(start / stride).is_multiple_of(len) {
                continue;
            }
            for (q, l) in line.iter_mut().enumerate() {
                *l = dist[start + q * stride];
            }
            let out = edt_1d(&line, d[axis]);
            for (q, o) in out.iter().enumerate() {
                dist[start + q * stride] = *o;
            }
        }
    }
    let r2 = radius * radius;
    dist.iter().filter(|&&s| s <= r2).count() as f64 * g.cell_volume()
}

/// Squared distance transform along one line (lower envelope of parabolas)
/// for sample spacing `d`; `f` holds squared distances so far.
fn edt_1d(f: &[f64], d: f64) -> Vec<f64> {
    let n = f.len();
    let pos = |q: usize| q as f64 * d;
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(i) => i,
        None => return vec![f64::INFINITY; n],
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let s = loop {
            let p = v[k];
            let s = ((f[q] + pos(q).powi(2)) - (f[p] + pos(p).powi(2))) / (2.0 * (pos(q) - pos(p)));
            // z[0] = -inf, so k never underflows
            if s <= z[k] {
                k -= 1;
            } else {
                break s;
            }
        };
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut out = vec![0.0; n];
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < pos(q) {
            k += 1;
        }
        *o = (pos(q) - pos(v[k])).powi(2) + f[v[k]];
    }
    out
}
