//! Vector potentials on the staggered (edge) lattice of a [`BoxGrid`].
//!
//! Component `c` of a vector potential is stored per node: `A_c[node]` is
//! the value on the edge from `node` to `node + e_c`, i.e. the line integral
//! along that edge divided by its length. Entries whose own-axis index is
//! `n_c - 1` have no edge inside the box and are kept as periodic copies.
//!
//! For spectral operations the box is read as a torus with `n_c - 1` points
//! per axis (node `n_c - 1` identified with node `0`). Periodic fields are
//! those whose last layers duplicate the first ones; [`VectorPotential::from_torus`]
//! produces them.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::grid::BoxGrid;

/// Three torus-indexed component arrays.
pub type TorusField = [Vec<f64>; 3];

#[derive(Clone, Debug)]
pub struct VectorPotential {
    grid: Arc<BoxGrid>,
    comps: [Vec<f64>; 3],
    div_free: bool,
}

/// Torus shape `(n_c - 1)` of a grid.
pub fn torus_shape(grid: &BoxGrid) -> [usize; 3] {
    grid.n().map(|m| m - 1)
}

#[inline]
fn tidx(m: [usize; 3], i: usize, j: usize, k: usize) -> usize {
    (i * m[1] + j) * m[2] + k
}

impl VectorPotential {
    pub fn zeros(grid: Arc<BoxGrid>) -> Self {
        let n = grid.num_nodes();
        Self {
            grid,
            comps: [vec![0.0; n], vec![0.0; n], vec![0.0; n]],
            div_free: true,
        }
    }

    pub fn from_components(grid: Arc<BoxGrid>, comps: [Vec<f64>; 3]) -> Result<Self> {
        for (c, v) in comps.iter().enumerate() {
            if v.len() != grid.num_nodes() {
                return Err(Error::GridMismatch(format!(
                    "component {c} has {} entries for {} nodes",
                    v.len(),
                    grid.num_nodes()
                )));
            }
            ensure_finite(v, "vector potential")?;
        }
        Ok(Self {
            grid,
            comps,
            div_free: false,
        })
    }

    /// Samples `f(c, x)` at the midpoint `x` of every `c`-edge.
    pub fn from_fn(grid: Arc<BoxGrid>, f: impl Fn(usize, [f64; 3]) -> f64) -> Result<Self> {
        let d = grid.spacing();
        let comps = [0, 1, 2].map(|c| {
            (0..grid.num_nodes())
                .map(|idx| {
                    let mut p = grid.position(idx);
                    p[c] += 0.5 * d[c];
                    f(c, p)
                })
                .collect::<Vec<f64>>()
        });
        Self::from_components(grid, comps)
    }

    /// Builds a periodic field from torus arrays (not certified; see
    /// [`VectorPotential::certify`]).
    pub fn from_torus(grid: Arc<BoxGrid>, torus: &TorusField) -> Self {
        let m = torus_shape(&grid);
        let n = grid.n();
        let comps = [0, 1, 2].map(|c| {
            let mut out = vec![0.0; grid.num_nodes()];
            for i in 0..n[0] {
                for j in 0..n[1] {
                    for k in 0..n[2] {
                        out[grid.index(i, j, k)] = torus[c][tidx(m, i % m[0], j % m[1], k % m[2])];
                    }
                }
            }
            out
        });
        Self {
            grid,
            comps,
            div_free: false,
        }
    }

    /// Sets the divergence-free certificate if `max|∇·A| ≤ 1e-10 ‖A‖_∞`.
    pub fn certify(mut self) -> Self {
        let norm = self.norm_max();
        self.div_free = norm == 0.0 || self.max_divergence() <= 1e-10 * norm;
        self
    }

    /// The torus part (indices `0..n_c-1` on every axis).
    pub fn to_torus(&self) -> TorusField {
        let m = torus_shape(&self.grid);
        [0, 1, 2].map(|c| {
            let mut out = vec![0.0; m[0] * m[1] * m[2]];
            for i in 0..m[0] {
                for j in 0..m[1] {
                    for k in 0..m[2] {
                        out[tidx(m, i, j, k)] = self.comps[c][self.grid.index(i, j, k)];
                    }
                }
            }
            out
        })
    }

    pub fn grid(&self) -> &Arc<BoxGrid> {
        &self.grid
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.comps[c]
    }

    /// Value on the `c`-edge leaving `node`.
    #[inline]
    pub fn edge(&self, c: usize, node: usize) -> f64 {
        self.comps[c][node]
    }

    /// True when the field was produced by a projection and certified.
    pub fn is_div_free(&self) -> bool {
        self.div_free
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|v| v.iter().all(|&x| x == 0.0))
    }

    pub fn norm_max(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|v| v.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Max-norm of the periodic discrete divergence at torus nodes.
    pub fn max_divergence(&self) -> f64 {
        let t = self.to_torus();
        divergence_torus(&self.grid, &t)
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Divergence-free part via the exact discrete Fourier projector.
    pub fn helmholtz_project(&self) -> VectorPotential {
        let mut t = self.to_torus();
        project_torus(&self.grid, &mut t);
        VectorPotential::from_torus(self.grid.clone(), &t).certify()
    }

    /// Keeps only Fourier modes with `|k_c| ≤ m` on every axis.
    pub fn band_limit(&self, m: usize) -> VectorPotential {
        let mut t = self.to_torus();
        band_limit_torus(&self.grid, &mut t, m);
        let out = VectorPotential::from_torus(self.grid.clone(), &t);
        if self.div_free {
            out.certify()
        } else {
            out
        }
    }

    /// Random divergence-free field with modes `|k_c| ≤ m` and the given
    /// root-mean-square edge value.
    pub fn random_band_limited(grid: Arc<BoxGrid>, m: usize, rms: f64, rng: &mut impl Rng) -> Result<Self> {
        let shape = torus_shape(&grid);
        if m == 0 || shape.iter().any(|&s| 2 * m >= s) {
            return Err(invalid(format!("band limit {m} does not fit torus {shape:?}")));
        }
        let len = shape[0] * shape[1] * shape[2];
        let mut hat: [Vec<Complex64>; 3] = [0, 1, 2].map(|_| vec![Complex64::new(0.0, 0.0); len]);
        let wrap = |k: i64, s: usize| k.rem_euclid(s as i64) as usize;
        let mm = m as i64;
        for a in -mm..=mm {
            for b in -mm..=mm {
                for c in -mm..=mm {
                    let at = tidx(shape, wrap(a, shape[0]), wrap(b, shape[1]), wrap(c, shape[2]));
                    for comp in hat.iter_mut() {
                        comp[at] = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    }
                }
            }
        }
        let mut fft = Fft3::new(shape);
        let mut t: TorusField = [0, 1, 2].map(|_| Vec::new());
        for c in 0..3 {
            fft.inverse(&mut hat[c]);
            t[c] = hat[c].iter().map(|z| z.re).collect();
        }
        project_torus(&grid, &mut t);
        let norm = (t.iter().flat_map(|v| v.iter()).map(|x| x * x).sum::<f64>() / (3 * len) as f64).sqrt();
        if norm == 0.0 {
            return Err(Error::Numerical("random field vanished after projection".into()));
        }
        for v in t.iter_mut() {
            v.iter_mut().for_each(|x| *x *= rms / norm);
        }
        Ok(VectorPotential::from_torus(grid, &t).certify())
    }

    /// `A + ∇φ` with `φ` given at every node; edges leaving the box are kept.
    pub fn gauge_shift(&self, phi: &[f64]) -> Result<VectorPotential> {
        if phi.len() != self.grid.num_nodes() {
            return Err(Error::GridMismatch("gauge function must have one value per node".into()));
        }
        let g = &self.grid;
        let n = g.n();
        let d = g.spacing();
        let mut comps = self.comps.clone();
        for (c, comp) in comps.iter_mut().enumerate() {
            let s = g.stride(c);
            for (idx, a) in comp.iter_mut().enumerate() {
                if g.coords(idx)[c] < n[c] - 1 {
                    *a += (phi[idx + s] - phi[idx]) / d[c];
                }
            }
        }
        VectorPotential::from_components(g.clone(), comps)
    }

    pub fn scaled(&self, s: f64) -> VectorPotential {
        VectorPotential {
            grid: self.grid.clone(),
            comps: self.comps.clone().map(|v| v.into_iter().map(|x| x * s).collect()),
            div_free: self.div_free,
        }
    }

    /// `B = ∇×A` at every interior node, averaging the four surrounding face
    /// circulations. Face nodes get zero.
    pub fn curl_at_nodes(&self) -> [Vec<f64>; 3] {
        let g = &self.grid;
        let n = g.n();
        let d = g.spacing();
        let mut out = [0, 1, 2].map(|_| vec![0.0; g.num_nodes()]);
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            let (sb, sc) = (g.stride(b), g.stride(c));
            // face value with lower corner `idx`
            let face = |idx: usize| {
                (self.comps[c][idx + sb] - self.comps[c][idx]) / d[b]
                    - (self.comps[b][idx + sc] - self.comps[b][idx]) / d[c]
            };
            for idx in 0..g.num_nodes() {
                let p = g.coords(idx);
                if (0..3).any(|x| p[x] == 0 || p[x] == n[x] - 1) {
                    continue;
                }
                out[a][idx] = 0.25 * (face(idx) + face(idx - sb) + face(idx - sc) + face(idx - sb - sc));
            }
        }
        out
    }
}

/// `grad_energy = ∫|∇⊗A|²` and `b_energy = ∫|∇×A|²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldEnergy {
    pub grad_energy: f64,
    pub b_energy: f64,
}

fn axis_weight(g: &BoxGrid, axis: usize, i: usize) -> f64 {
    let d = g.spacing()[axis];
    if i == 0 || i == g.n()[axis] - 1 {
        0.5 * d
    } else {
        d
    }
}

/// Both field energies on the box. Curls and off-diagonal partials are
/// forward differences inside the box; diagonal partials wrap periodically
/// at the node, which is what makes the two energies differ exactly by
/// `∫(∇·A)²` for periodic fields.
pub fn field_energy(a: &VectorPotential) -> FieldEnergy {
    let g = &a.grid;
    let n = g.n();
    let d = g.spacing();
    let mut b_energy = 0.0;
    let mut grad_energy = 0.0;
    for (ax, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        let (sb, sc) = (g.stride(b), g.stride(c));
        for idx in 0..g.num_nodes() {
            let p = g.coords(idx);
            let wa = axis_weight(g, ax, p[ax]);
            // faces of B_ax and the mixed partials ∂_b A_c, ∂_c A_b share
            // midpoint positions along b and c
            if p[b] < n[b] - 1 && p[c] < n[c] - 1 {
                let dbc = (a.comps[c][idx + sb] - a.comps[c][idx]) / d[b];
                let dcb = (a.comps[b][idx + sc] - a.comps[b][idx]) / d[c];
                let w = wa * d[b] * d[c];
                b_energy += w * (dbc - dcb).powi(2);
                grad_energy += w * (dbc * dbc + dcb * dcb);
            }
        }
    }
    for c in 0..3 {
        let s = g.stride(c);
        let (t1, t2) = ((c + 1) % 3, (c + 2) % 3);
        for idx in 0..g.num_nodes() {
            let p = g.coords(idx);
            if p[c] == n[c] - 1 {
                continue;
            }
            let prev = if p[c] == 0 { idx + (n[c] - 2) * s } else { idx - s };
            let dcc = (a.comps[c][idx] - a.comps[c][prev]) / d[c];
            let w = d[c] * axis_weight(g, t1, p[t1]) * axis_weight(g, t2, p[t2]);
            grad_energy += w * dcc * dcc;
        }
    }
    FieldEnergy {
        grad_energy,
        b_energy,
    }
}

/// Periodic backward-difference divergence at torus nodes.
pub fn divergence_torus(grid: &BoxGrid, t: &TorusField) -> Vec<f64> {
    let m = torus_shape(grid);
    let d = grid.spacing();
    let len = m[0] * m[1] * m[2];
    let mut out = vec![0.0; len];
    for i in 0..m[0] {
        for j in 0..m[1] {
            for k in 0..m[2] {
                let at = tidx(m, i, j, k);
                let back = [
                    tidx(m, (i + m[0] - 1) % m[0], j, k),
                    tidx(m, i, (j + m[1] - 1) % m[1], k),
                    tidx(m, i, j, (k + m[2] - 1) % m[2]),
                ];
                out[at] = (0..3).map(|c| (t[c][at] - t[c][back[c]]) / d[c]).sum();
            }
        }
    }
    out
}

fn shift(m: [usize; 3], at: [usize; 3], axis: usize, forward: bool) -> usize {
    let mut p = at;
    p[axis] = if forward {
        (p[axis] + 1) % m[axis]
    } else {
        (p[axis] + m[axis] - 1) % m[axis]
    };
    tidx(m, p[0], p[1], p[2])
}

/// Periodic face curl: `B_a = D_b A_c - D_c A_b` with forward differences.
pub fn curl_torus(grid: &BoxGrid, t: &TorusField) -> TorusField {
    let m = torus_shape(grid);
    let d = grid.spacing();
    let len = m[0] * m[1] * m[2];
    let mut out: TorusField = [0, 1, 2].map(|_| vec![0.0; len]);
    for i in 0..m[0] {
        for j in 0..m[1] {
            for k in 0..m[2] {
                let p = [i, j, k];
                let at = tidx(m, i, j, k);
                for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                    out[a][at] = (t[c][shift(m, p, b, true)] - t[c][at]) / d[b]
                        - (t[b][shift(m, p, c, true)] - t[b][at]) / d[c];
                }
            }
        }
    }
    out
}

/// Transpose of [`curl_torus`] in the plain ℓ² pairing.
pub fn curl_transpose_torus(grid: &BoxGrid, f: &TorusField) -> TorusField {
    let m = torus_shape(grid);
    let d = grid.spacing();
    let len = m[0] * m[1] * m[2];
    let mut out: TorusField = [0, 1, 2].map(|_| vec![0.0; len]);
    for i in 0..m[0] {
        for j in 0..m[1] {
            for k in 0..m[2] {
                let p = [i, j, k];
                let at = tidx(m, i, j, k);
                for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                    // D_b^T g = (g[x - e_b] - g[x]) / d_b
                    out[c][at] += (f[a][shift(m, p, b, false)] - f[a][at]) / d[b];
                    out[b][at] -= (f[a][shift(m, p, c, false)] - f[a][at]) / d[c];
                }
            }
        }
    }
    out
}

/// `Cᵀ C A` on the torus, the discrete `∇×∇×A`.
pub fn curl_curl_torus(grid: &BoxGrid, t: &TorusField) -> TorusField {
    curl_transpose_torus(grid, &curl_torus(grid, t))
}

/// Cached 3D complex FFT on a torus.
pub struct Fft3 {
    shape: [usize; 3],
    fwd: [Arc<dyn rustfft::Fft<f64>>; 3],
    inv: [Arc<dyn rustfft::Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(shape: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            shape,
            fwd: shape.map(|s| planner.plan_fft_forward(s)),
            inv: shape.map(|s| planner.plan_fft_inverse(s)),
        }
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let m = self.shape;
        let plans = if inverse { &self.inv } else { &self.fwd };
        let mut line = Vec::new();
        for axis in 0..3 {
            let stride = match axis {
                0 => m[1] * m[2],
                1 => m[2],
                _ => 1,
            };
            let len = m[axis];
            line.resize(len, Complex64::new(0.0, 0.0));
            for start in 0..data.len() {
                // first element of each line along `axis`
                if (start / stride) % len != 0 {
                    continue;
                }
                for (q, v) in line.iter_mut().enumerate() {
                    *v = data[start + q * stride];
                }
                plans[axis].process(&mut line);
                for (q, v) in line.iter().enumerate() {
                    data[start + q * stride] = *v;
                }
            }
        }
        if inverse {
            let s = 1.0 / data.len() as f64;
            data.iter_mut().for_each(|z| *z *= s);
        }
    }

    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.run(data, false);
    }

    /// Normalized inverse.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.run(data, true);
    }
}

fn to_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

/// In-place ℓ²-orthogonal projection onto discretely divergence-free fields.
/// The mean (k = 0) mode is kept.
pub fn project_torus(grid: &BoxGrid, t: &mut TorusField) {
    let m = torus_shape(grid);
    let d = grid.spacing();
    let mut fft = Fft3::new(m);
    let mut hat = [0, 1, 2].map(|c| to_complex(&t[c]));
    for s in hat.iter_mut() {
        fft.forward(s);
    }
    let phase = |axis: usize, q: usize| {
        let kappa = 2.0 * PI * q as f64 / m[axis] as f64;
        (Complex64::new(0.0, kappa).exp() - 1.0) / d[axis]
    };
    for i in 0..m[0] {
        for j in 0..m[1] {
            for k in 0..m[2] {
                let gv = [phase(0, i), phase(1, j), phase(2, k)];
                let g2: f64 = gv.iter().map(|z| z.norm_sqr()).sum();
                if g2 < 1e-300 {
                    continue;
                }
                let at = tidx(m, i, j, k);
                let dot: Complex64 = (0..3).map(|c| gv[c].conj() * hat[c][at]).sum();
                for c in 0..3 {
                    hat[c][at] -= gv[c] * dot / g2;
                }
            }
        }
    }
    for c in 0..3 {
        fft.inverse(&mut hat[c]);
        t[c] = hat[c].iter().map(|z| z.re).collect();
    }
}

/// Zeroes every Fourier mode with some `|k_c| > m`.
pub fn band_limit_torus(grid: &BoxGrid, t: &mut TorusField, m: usize) {
    let shape = torus_shape(grid);
    let mut fft = Fft3::new(shape);
    let keep = |q: usize, s: usize| q <= m || s - q <= m;
    for comp in t.iter_mut() {
        let mut z = to_complex(comp);
        fft.forward(&mut z);
        for i in 0..shape[0] {
            for j in 0..shape[1] {
                for k in 0..shape[2] {
                    if !(keep(i, shape[0]) && keep(j, shape[1]) && keep(k, shape[2])) {
                        z[tidx(shape, i, j, k)] = Complex64::new(0.0, 0.0);
                    }
                }
            }
        }
        fft.inverse(&mut z);
        *comp = z.iter().map(|v| v.re).collect();
    }
}

/// Divides every Fourier mode by `|g(k)|² + shift`, the symbol of the
/// discrete `-Δ + shift`. Commutes with the projection.
pub fn inverse_laplacian_torus(grid: &BoxGrid, t: &mut TorusField, shift: f64) {
    let m = torus_shape(grid);
    let d = grid.spacing();
    let mut fft = Fft3::new(m);
    let sym = |axis: usize, q: usize| (2.0 * (PI * q as f64 / m[axis] as f64).sin() / d[axis]).powi(2);
    for comp in t.iter_mut() {
        let mut z = to_complex(comp);
        fft.forward(&mut z);
        for i in 0..m[0] {
            for j in 0..m[1] {
                for k in 0..m[2] {
                    z[tidx(m, i, j, k)] /= sym(0, i) + sym(1, j) + sym(2, k) + shift;
                }
            }
        }
        fft.inverse(&mut z);
        *comp = z.iter().map(|v| v.re).collect();
    }
}

/// `Σ_c Σ_e f_c g_c · cell volume`, the discrete L² pairing on the torus.
pub fn torus_dot(grid: &BoxGrid, f: &TorusField, g: &TorusField) -> f64 {
    let s: f64 = (0..3)
        .map(|c| f[c].iter().zip(&g[c]).map(|(a, b)| a * b).sum::<f64>())
        .sum();
    s * grid.cell_volume()
}
