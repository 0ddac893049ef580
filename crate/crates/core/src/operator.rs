//! Matrix-free Dirichlet, magnetic Schrödinger and Pauli operators.
//!
//! On the domain nodes of a [`BoxGrid`] the operators are
//!
//! * `-h²Δ - V` with the 7-point Laplacian (hard wall outside the mask);
//! * `(hp + A)² - V` with Peierls links: the hopping from `x` to `x + e_c`
//!   carries `-(h²/d²) e^{iθ}` with `θ = d A_c(x) / h`;
//! * the Pauli operator `(hp + A)² + h σ·B - V` on two-spinors, `B` being the
//!   discrete curl averaged onto nodes. This is `[σ·(hp + A)]² - V`.
//!
//! Real vectors are used whenever `A = 0`; a Pauli operator then has every
//! eigenvalue twice and the real path reports both copies.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigen::{negative_eigenpairs, EigenOptions, Eigenpairs, HermitianOperator, SpectralResult};
use crate::error::{invalid, Error, Result};
use crate::field::VectorPotential;
use crate::grid::{BoxGrid, ScalarField, NONE};
use crate::par::{self, Exec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Dirichlet,
    MagneticSchrodinger,
    Pauli,
}

#[derive(Clone, Debug)]
pub struct OperatorHandle {
    kind: OperatorKind,
    h: f64,
    grid: Arc<BoxGrid>,
    /// Well depth at each unknown.
    well: Vec<f64>,
    /// Forward neighbour along each axis (unknown index or NONE).
    fwd: Vec<[usize; 3]>,
    /// Backward neighbour along each axis.
    bwd: Vec<[usize; 3]>,
    /// `h² / d_c²`.
    hop: [f64; 3],
    /// Link phase `e^{iθ}` on the forward edge of each unknown.
    links: Option<Vec<[Complex64; 3]>>,
    /// `h B` at each unknown (Pauli only).
    zeeman: Option<Vec<[f64; 3]>>,
    exec: Exec,
}

fn neighbours(grid: &BoxGrid) -> (Vec<[usize; 3]>, Vec<[usize; 3]>) {
    let fwd = grid
        .unknowns()
        .iter()
        .map(|&node| [0, 1, 2].map(|c| grid.unknown_of(node + grid.stride(c))))
        .collect();
    let bwd = grid
        .unknowns()
        .iter()
        .map(|&node| [0, 1, 2].map(|c| grid.unknown_of(node - grid.stride(c))))
        .collect();
    (fwd, bwd)
}

fn check_grid(v: &ScalarField, grid: &Arc<BoxGrid>) -> Result<()> {
    if !v.grid().same_as(grid) {
        return Err(Error::GridMismatch("potential lives on a different grid".into()));
    }
    Ok(())
}

/// `-h²Δ - V` with homogeneous Dirichlet conditions outside the mask.
pub fn build_dirichlet_hamiltonian(h: f64, v: &ScalarField, grid: &Arc<BoxGrid>) -> Result<OperatorHandle> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("h must be positive, got {h}")));
    }
    check_grid(v, grid)?;
    if grid.num_unknowns() == 0 {
        return Err(invalid("domain mask is empty"));
    }
    let (fwd, bwd) = neighbours(grid);
    let d = grid.spacing();
    Ok(OperatorHandle {
        kind: OperatorKind::Dirichlet,
        h,
        grid: grid.clone(),
        well: v.on_unknowns(),
        fwd,
        bwd,
        hop: d.map(|dc| h * h / (dc * dc)),
        links: None,
        zeeman: None,
        exec: Exec::default(),
    })
}

/// `(hp + A)² - V`, or the Pauli operator when `pauli` is set.
pub fn build_magnetic_hamiltonian(
    h: f64,
    a: &VectorPotential,
    v: &ScalarField,
    grid: &Arc<BoxGrid>,
    pauli: bool,
) -> Result<OperatorHandle> {
    if !a.grid().same_as(grid) {
        return Err(Error::GridMismatch("vector potential lives on a different grid".into()));
    }
    let mut op = build_dirichlet_hamiltonian(h, v, grid)?;
    op.kind = if pauli {
        OperatorKind::Pauli
    } else {
        OperatorKind::MagneticSchrodinger
    };
    if a.is_zero() {
        return Ok(op);
    }
    let d = grid.spacing();
    op.links = Some(
        grid.unknowns()
            .iter()
            .map(|&node| [0, 1, 2].map(|c| Complex64::from_polar(1.0, d[c] * a.edge(c, node) / h)))
            .collect(),
    );
    if pauli {
        let b = a.curl_at_nodes();
        op.zeeman = Some(
            grid.unknowns()
                .iter()
                .map(|&node| [0, 1, 2].map(|c| h * b[c][node]))
                .collect(),
        );
    }
    Ok(op)
}

impl OperatorHandle {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn grid(&self) -> &Arc<BoxGrid> {
        &self.grid
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// True when the operator is real symmetric on scalar fields.
    pub fn is_real(&self) -> bool {
        self.links.is_none()
    }

    pub fn num_sites(&self) -> usize {
        self.well.len()
    }

    /// Dimension of the complex representation (twice the sites for Pauli).
    pub fn complex_dim(&self) -> usize {
        match self.kind {
            OperatorKind::Pauli => 2 * self.well.len(),
            _ => self.well.len(),
        }
    }

    fn zeeman_max(&self) -> f64 {
        self.zeeman.as_ref().map_or(0.0, |z| {
            z.iter()
                .map(|b| (b[0] * b[0] + b[1] * b[1] + b[2] * b[2]).sqrt())
                .fold(0.0, f64::max)
        })
    }

    /// Gershgorin-type bounds on the spectrum.
    pub fn bounds(&self) -> (f64, f64) {
        let kin: f64 = self.hop.iter().map(|t| 4.0 * t).sum();
        let vmax = self.well.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let vmin = self.well.iter().cloned().fold(f64::INFINITY, f64::min);
        let z = self.zeeman_max();
        (-vmax - z, kin - vmin + z)
    }

    /// Scalar operator on real vectors. Ignores the magnetic field.
    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        let diag: f64 = self.hop.iter().map(|t| 2.0 * t).sum();
        par::for_each_chunk_mut(self.exec, y, par::CHUNK, |off, chunk| {
            for (i, out) in chunk.iter_mut().enumerate() {
                let u = off + i;
                let mut s = (diag - self.well[u]) * x[u];
                for c in 0..3 {
                    let (f, b) = (self.fwd[u][c], self.bwd[u][c]);
                    if f != NONE {
                        s -= self.hop[c] * x[f];
                    }
                    if b != NONE {
                        s -= self.hop[c] * x[b];
                    }
                }
                *out = s;
            }
        });
    }

    /// Kinetic plus potential part on one scalar component.
    #[inline]
    fn scalar_row(&self, x: &[Complex64], u: usize, diag: f64) -> Complex64 {
        let mut s = x[u] * (diag - self.well[u]);
        for c in 0..3 {
            let (f, b) = (self.fwd[u][c], self.bwd[u][c]);
            match &self.links {
                Some(l) => {
                    if f != NONE {
                        s -= l[u][c] * x[f] * self.hop[c];
                    }
                    if b != NONE {
                        s -= l[b][c].conj() * x[b] * self.hop[c];
                    }
                }
                None => {
                    if f != NONE {
                        s -= x[f] * self.hop[c];
                    }
                    if b != NONE {
                        s -= x[b] * self.hop[c];
                    }
                }
            }
        }
        s
    }

    /// Full operator on complex vectors; Pauli vectors are `[up; down]`.
    pub fn apply_complex(&self, x: &[Complex64], y: &mut [Complex64]) {
        let diag: f64 = self.hop.iter().map(|t| 2.0 * t).sum();
        let n = self.well.len();
        match self.kind {
            OperatorKind::Pauli => {
                let (xu, xd) = x.split_at(n);
                par::for_each_chunk_mut(self.exec, y, par::CHUNK, |off, chunk| {
                    for (i, out) in chunk.iter_mut().enumerate() {
                        let g = off + i;
                        let (u, up) = if g < n { (g, true) } else { (g - n, false) };
                        let mut s = if up {
                            self.scalar_row(xu, u, diag)
                        } else {
                            self.scalar_row(xd, u, diag)
                        };
                        if let Some(z) = &self.zeeman {
                            let [bx, by, bz] = z[u];
                            // σ·B = [[Bz, Bx - iBy], [Bx + iBy, -Bz]]
                            s += if up {
                                xu[u] * bz + xd[u] * Complex64::new(bx, -by)
                            } else {
                                xu[u] * Complex64::new(bx, by) - xd[u] * bz
                            };
                        }
                        *out = s;
                    }
                });
            }
            _ => {
                par::for_each_chunk_mut(self.exec, y, par::CHUNK, |off, chunk| {
                    for (i, out) in chunk.iter_mut().enumerate() {
                        *out = self.scalar_row(x, off + i, diag);
                    }
                });
            }
        }
    }

    /// Link phase on the forward `c`-edge of unknown `u` (1 without a field).
    pub fn link(&self, u: usize, c: usize) -> Complex64 {
        self.links.as_ref().map_or(Complex64::new(1.0, 0.0), |l| l[u][c])
    }

    pub fn forward_neighbour(&self, u: usize, c: usize) -> usize {
        self.fwd[u][c]
    }

    pub fn hopping(&self) -> [f64; 3] {
        self.hop
    }
}

/// Real view of an operator (scalar part only).
pub struct RealView<'a>(pub &'a OperatorHandle);

impl HermitianOperator<f64> for RealView<'_> {
    fn dim(&self) -> usize {
        self.0.num_sites()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.0.apply_real(x, y)
    }
    fn spectral_bounds(&self) -> (f64, f64) {
        self.0.bounds()
    }
}

/// Complex view (spinors for Pauli).
pub struct ComplexView<'a>(pub &'a OperatorHandle);

impl HermitianOperator<Complex64> for ComplexView<'_> {
    fn dim(&self) -> usize {
        self.0.complex_dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.0.apply_complex(x, y)
    }
    fn spectral_bounds(&self) -> (f64, f64) {
        self.0.bounds()
    }
}

/// Negative eigenpairs in whichever representation the operator needs.
#[derive(Clone, Debug)]
pub enum Spectrum {
    /// Scalar real eigenpairs; `spin_copies` is 2 for a field-free Pauli
    /// operator, whose spectrum is the scalar one doubled.
    Real { pairs: Eigenpairs<f64>, spin_copies: usize },
    Complex(Eigenpairs<Complex64>),
}

impl Spectrum {
    /// Spectral summary with each eigenvalue repeated `multiplicity` times.
    pub fn result(&self, multiplicity: usize) -> SpectralResult {
        match self {
            Spectrum::Real { pairs, spin_copies } => pairs.to_result(multiplicity * spin_copies),
            Spectrum::Complex(p) => p.to_result(multiplicity),
        }
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Spectrum::Real { pairs, .. } => &pairs.values,
            Spectrum::Complex(p) => &p.values,
        }
    }

    pub fn next_value(&self) -> f64 {
        match self {
            Spectrum::Real { pairs, .. } => pairs.next_value,
            Spectrum::Complex(p) => p.next_value,
        }
    }
}

pub fn solve_spectrum(op: &OperatorHandle, opts: &EigenOptions, warm: Option<&Spectrum>) -> Result<Spectrum> {
    if op.is_real() {
        let w = match warm {
            Some(Spectrum::Real { pairs, .. }) => Some(&pairs.vectors),
            _ => None,
        };
        let pairs = negative_eigenpairs(&RealView(op), opts, w)?;
        let spin_copies = if op.kind() == OperatorKind::Pauli { 2 } else { 1 };
        Ok(Spectrum::Real { pairs, spin_copies })
    } else {
        let w = match warm {
            Some(Spectrum::Complex(p)) => Some(&p.vectors),
            _ => None,
        };
        Ok(Spectrum::Complex(negative_eigenpairs(&ComplexView(op), opts, w)?))
    }
}

/// `Tr[op]_-` times `multiplicity` (1 or 2; Pauli operators carry spin
/// explicitly and should use 1).
pub fn neg_trace(op: &OperatorHandle, multiplicity: usize) -> Result<SpectralResult> {
    neg_trace_with(op, multiplicity, &EigenOptions::default())
}

pub fn neg_trace_with(op: &OperatorHandle, multiplicity: usize, opts: &EigenOptions) -> Result<SpectralResult> {
    if !(1..=2).contains(&multiplicity) {
        return Err(invalid(format!("multiplicity must be 1 or 2, got {multiplicity}")));
    }
    Ok(solve_spectrum(op, opts, None)?.result(multiplicity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit(n: usize) -> Arc<BoxGrid> {
        Arc::new(BoxGrid::cube(n, 1.0).unwrap())
    }

    fn rand_c(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn hermitian_on_random_pairs() {
        let g = unit(9);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v = ScalarField::from_fn(g.clone(), |p| 5.0 * p[0] * p[1]).unwrap();
        let a = VectorPotential::random_band_limited(g.clone(), 2, 2.0, &mut rng).unwrap();
        for pauli in [false, true] {
            let op = build_magnetic_hamiltonian(0.3, &a, &v, &g, pauli).unwrap();
            let n = op.complex_dim();
            for _ in 0..10 {
                let (x, y) = (rand_c(n, &mut rng), rand_c(n, &mut rng));
                let (mut ox, mut oy) = (vec![Complex64::default(); n], vec![Complex64::default(); n]);
                op.apply_complex(&x, &mut ox);
                op.apply_complex(&y, &mut oy);
                let (l, r) = (inner(&x, &oy), inner(&ox, &y));
                assert!((l - r).norm() <= 1e-12 * l.norm().max(1.0));
            }
        }
    }

    #[test]
    fn zero_field_reduces_to_dirichlet() {
        let g = unit(8);
        let v = ScalarField::from_fn(g.clone(), |p| 10.0 * p[2]).unwrap();
        let d = build_dirichlet_hamiltonian(0.5, &v, &g).unwrap();
        let m = build_magnetic_hamiltonian(0.5, &VectorPotential::zeros(g.clone()), &v, &g, false).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = rand_c(d.num_sites(), &mut rng);
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let mut y1 = vec![0.0; re.len()];
        d.apply_real(&re, &mut y1);
        let xr: Vec<Complex64> = re.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        let mut y2 = vec![Complex64::default(); re.len()];
        m.apply_complex(&xr, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b.re).abs() <= 1e-14 * a.abs().max(1.0) && b.im == 0.0);
        }
    }

    #[test]
    fn free_box_ground_state() {
        // continuum value h²·3π², discretization error O(d²)
        let g = unit(20);
        let op = build_dirichlet_hamiltonian(1.0, &ScalarField::constant(g.clone(), 35.0).unwrap(), &g).unwrap();
        let s = neg_trace(&op, 1).unwrap();
        let d = 1.0 / 19.0;
        let exact_discrete = 3.0 * 4.0 / (d * d) * (PI * d / 2.0).sin().powi(2) - 35.0;
        assert_eq!(s.count, 1);
        assert!((s.neg_trace - exact_discrete).abs() < 1e-8, "{} vs {exact_discrete}", s.neg_trace);
    }

    #[test]
    fn positive_operator_has_no_negative_part() {
        let g = unit(10);
        let op = build_dirichlet_hamiltonian(0.7, &ScalarField::zeros(g.clone()), &g).unwrap();
        let s = neg_trace(&op, 2).unwrap();
        assert_eq!(s.count, 0);
        assert_eq!(s.neg_trace, 0.0);
        assert!(neg_trace(&op, 3).is_err());
        assert!(build_dirichlet_hamiltonian(0.0, &ScalarField::zeros(g.clone()), &g).is_err());
        let other = unit(11);
        assert!(build_dirichlet_hamiltonian(1.0, &ScalarField::zeros(other), &g).is_err());
    }

    #[test]
    fn pauli_without_field_doubles_the_spectrum() {
        let g = unit(9);
        let v = ScalarField::constant(g.clone(), 40.0).unwrap();
        let s = build_dirichlet_hamiltonian(1.0, &v, &g).unwrap();
        let p = build_magnetic_hamiltonian(1.0, &VectorPotential::zeros(g.clone()), &v, &g, true).unwrap();
        let (rs, rp) = (neg_trace(&s, 2).unwrap(), neg_trace(&p, 1).unwrap());
        assert_eq!(rs.negative_eigenvalues, rp.negative_eigenvalues);
    }
}
