//! Lowest eigenpairs of Hermitian grid operators below zero.
//!
//! Large problems use Chebyshev-filtered subspace iteration: a scaled
//! Chebyshev polynomial of the operator damps the unwanted part of the
//! spectrum `[a, b]`, then a Rayleigh-Ritz step on the orthonormalized block
//! extracts Ritz pairs. The block grows whenever it holds no non-negative Ritz
//! value. The iteration stops when every negative Ritz pair has residual
//! below `tol`, and the first non-negative one has residual below `√tol` and
//! satisfies `θ - ‖r‖ ≥ 0`, i.e. the spectrum is certified to cross zero
//! there.
//! Small problems are solved densely.

use faer::traits::ComplexField;
use faer::{Mat, Side};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Field of matrix entries: `f64` or `Complex64`.
pub trait Scalar:
    ComplexField<Real = f64>
    + Copy
    + Send
    + Sync
    + std::fmt::Debug
    + 'static
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
    + std::ops::AddAssign
{
    const IS_COMPLEX: bool;
    fn from_parts(re: f64, im: f64) -> Self;
    fn re_part(self) -> f64;
    fn conjugate(self) -> Self;
    fn norm2(self) -> f64;
    fn scale(self, s: f64) -> Self;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;
    #[inline]
    fn from_parts(re: f64, _im: f64) -> Self {
        re
    }
    #[inline]
    fn re_part(self) -> f64 {
        self
    }
    #[inline]
    fn conjugate(self) -> Self {
        self
    }
    #[inline]
    fn norm2(self) -> f64 {
        self * self
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;
    #[inline]
    fn from_parts(re: f64, im: f64) -> Self {
        Complex64::new(re, im)
    }
    #[inline]
    fn re_part(self) -> f64 {
        self.re
    }
    #[inline]
    fn conjugate(self) -> Self {
        self.conj()
    }
    #[inline]
    fn norm2(self) -> f64 {
        self.norm_sqr()
    }
    #[inline]
    fn scale(self, s: f64) -> Self {
        self * s
    }
}

/// Matrix-free Hermitian operator.
pub trait HermitianOperator<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], y: &mut [T]);
    /// Guaranteed `(lower, upper)` bounds on the spectrum.
    fn spectral_bounds(&self) -> (f64, f64);
}

/// Negative part of the spectrum of one operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Ascending; every eigenvalue is repeated `multiplicity` times.
    pub negative_eigenvalues: Vec<f64>,
    /// Sum of `negative_eigenvalues`.
    pub neg_trace: f64,
    pub count: usize,
    pub multiplicity: usize,
    pub converged: bool,
    /// Largest residual norm among the certified pairs.
    pub residual_bound: f64,
    /// First non-negative Ritz value, if one was resolved.
    pub next_eigenvalue: Option<f64>,
    pub iterations: usize,
}

impl SpectralResult {
    pub fn from_values(values: &[f64], multiplicity: usize, converged: bool, residual_bound: f64, next: Option<f64>, iterations: usize) -> Self {
        let mut negative_eigenvalues: Vec<f64> = values
            .iter()
            .filter(|&&v| v < 0.0)
            .flat_map(|&v| std::iter::repeat_n(v, multiplicity))
            .collect();
        negative_eigenvalues.sort_by(f64::total_cmp);
        let neg_trace = negative_eigenvalues.iter().sum();
        Self {
            count: negative_eigenvalues.len(),
            negative_eigenvalues,
            neg_trace,
            multiplicity,
            converged,
            residual_bound,
            next_eigenvalue: next,
            iterations,
        }
    }
}

/// Eigenpairs below zero (plus the certifying next Ritz value).
#[derive(Clone, Debug)]
pub struct Eigenpairs<T: Scalar> {
    /// Ascending negative eigenvalues.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one column per value.
    pub vectors: Mat<T>,
    pub residuals: Vec<f64>,
    /// First non-negative Ritz value (`+∞` if the whole space was negative).
    pub next_value: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl<T: Scalar> Eigenpairs<T> {
    pub fn residual_bound(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m: f64, r| m.max(*r))
    }

    pub fn to_result(&self, multiplicity: usize) -> SpectralResult {
        let next = self.next_value.is_finite().then_some(self.next_value);
        SpectralResult::from_values(&self.values, multiplicity, self.converged, self.residual_bound(), next, self.iterations)
    }
}

#[derive(Clone, Debug)]
pub struct EigenOptions {
    /// Residual tolerance relative to `max(|lower|, |upper|)` of the spectrum.
    pub tol: f64,
    pub max_iters: usize,
    pub degree: usize,
    /// Expected number of negative eigenvalues (sizes the first block).
    pub count_hint: Option<usize>,
    /// Problems of at most this dimension are solved densely.
    pub dense_threshold: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 400,
            degree: 12,
            count_hint: None,
            dense_threshold: 12 * 12 * 12,
            seed: 0x5eed,
            exec: Exec::default(),
        }
    }
}

fn apply_block<T: Scalar, O: HermitianOperator<T> + ?Sized>(op: &O, x: &Mat<T>) -> Mat<T> {
    let mut y = Mat::<T>::zeros(x.nrows(), x.ncols());
    for j in 0..x.ncols() {
        op.apply(x.col_as_slice(j), y.col_as_slice_mut(j));
    }
    y
}

fn random_block<T: Scalar>(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Mat<T> {
    let mut m = Mat::<T>::zeros(n, k);
    for j in 0..k {
        for v in m.col_as_slice_mut(j) {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = if T::IS_COMPLEX { StandardNormal.sample(rng) } else { 0.0 };
            *v = T::from_parts(re, im);
        }
    }
    m
}

fn hstack<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let k = a.ncols();
    Mat::from_fn(a.nrows(), k + b.ncols(), |i, j| if j < k { a[(i, j)] } else { b[(i, j - k)] })
}

fn orthonormalize<T: Scalar>(x: &Mat<T>) -> Mat<T> {
    x.qr().compute_thin_Q()
}

/// Rayleigh-Ritz on the span of orthonormal `q`: Ritz values, vectors and
/// the operator applied to them.
fn rayleigh_ritz<T: Scalar, O: HermitianOperator<T> + ?Sized>(op: &O, q: &Mat<T>) -> Result<(Vec<f64>, Mat<T>, Mat<T>)> {
    let hq = apply_block(op, q);
    let g = q.adjoint() * &hq;
    let k = g.nrows();
    let g = Mat::from_fn(k, k, |i, j| (g[(i, j)] + g[(j, i)].conjugate()).scale(0.5));
    let eig = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Rayleigh-Ritz eigensolve failed: {e:?}")))?;
    let s = eig.S().column_vector();
    let theta: Vec<f64> = (0..k).map(|i| s[i].re_part()).collect();
    let x = q.as_ref() * eig.U();
    let hx = hq.as_ref() * eig.U();
    Ok((theta, x, hx))
}

fn column_residuals<T: Scalar>(theta: &[f64], x: &Mat<T>, hx: &Mat<T>) -> Vec<f64> {
    (0..x.ncols())
        .map(|j| {
            let (a, b) = (x.col_as_slice(j), hx.col_as_slice(j));
            a.iter()
                .zip(b)
                .map(|(&xi, &yi)| (yi - xi.scale(theta[j])).norm2())
                .sum::<f64>()
                .sqrt()
        })
        .collect()
}

/// Scaled Chebyshev filter of degree `m` damping `[a, b]`, normalized at `a0`.
fn chebyshev_filter<T: Scalar, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    x: &Mat<T>,
    m: usize,
    a: f64,
    b: f64,
    a0: f64,
    exec: Exec,
) -> Mat<T> {
    let n = x.nrows();
    let e = 0.5 * (b - a);
    let c = 0.5 * (b + a);
    let sigma1 = e / (a0 - c);
    let mut out = Mat::<T>::zeros(n, x.ncols());
    let mut hy = vec![T::from_parts(0.0, 0.0); n];
    for j in 0..x.ncols() {
        let mut prev: Vec<T> = x.col_as_slice(j).to_vec();
        let mut sigma = sigma1;
        op.apply(&prev, &mut hy);
        let mut cur: Vec<T> = prev
            .iter()
            .zip(&hy)
            .map(|(&p, &h)| (h - p.scale(c)).scale(sigma1 / e))
            .collect();
        let tau = 2.0 / sigma1;
        for _ in 2..=m {
            let sigma_new = 1.0 / (tau - sigma);
            op.apply(&cur, &mut hy);
            let (f1, f2) = (2.0 * sigma_new / e, sigma * sigma_new);
            par::for_each_chunk_mut(exec, &mut prev, par::CHUNK, |off, chunk| {
                for (i, p) in chunk.iter_mut().enumerate() {
                    let g = off + i;
                    *p = (hy[g] - cur[g].scale(c)).scale(f1) - p.scale(f2);
                }
            });
            std::mem::swap(&mut prev, &mut cur);
            sigma = sigma_new;
        }
        out.col_as_slice_mut(j).copy_from_slice(&cur);
    }
    out
}

fn dense_solve<T: Scalar, O: HermitianOperator<T> + ?Sized>(op: &O, fixed: Option<usize>) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    let mut id = Mat::<T>::zeros(n, n);
    for i in 0..n {
        id[(i, i)] = T::from_parts(1.0, 0.0);
    }
    let (theta, x, hx) = rayleigh_ritz(op, &id)?;
    let nneg = fixed.unwrap_or_else(|| theta.iter().take_while(|&&t| t < 0.0).count());
    let res = column_residuals(&theta, &x, &hx);
    let vectors = Mat::from_fn(n, nneg, |i, j| x[(i, j)]);
    Ok(Eigenpairs {
        values: theta[..nneg].to_vec(),
        vectors,
        residuals: res[..nneg].to_vec(),
        next_value: theta.get(nneg).copied().unwrap_or(f64::INFINITY),
        converged: true,
        iterations: 1,
    })
}

/// All eigenpairs below zero. `warm` seeds the block (e.g. the previous
/// solution of a nearby operator).
pub fn negative_eigenpairs<T: Scalar, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    opts: &EigenOptions,
    warm: Option<&Mat<T>>,
) -> Result<Eigenpairs<T>> {
    subspace_iteration(op, opts, warm, None)
}

/// The `k` lowest eigenpairs (whatever their sign). `next_value` is the
/// `(k+1)`-th Ritz value.
pub fn lowest_eigenpairs<T: Scalar, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    k: usize,
    opts: &EigenOptions,
    warm: Option<&Mat<T>>,
) -> Result<Eigenpairs<T>> {
    if k == 0 || k >= op.dim() {
        return Err(Error::InvalidInput(format!("cannot take {k} of {} eigenpairs", op.dim())));
    }
    subspace_iteration(op, &EigenOptions { count_hint: Some(k), ..opts.clone() }, warm, Some(k))
}

fn subspace_iteration<T: Scalar, O: HermitianOperator<T> + ?Sized>(
    op: &O,
    opts: &EigenOptions,
    warm: Option<&Mat<T>>,
    fixed: Option<usize>,
) -> Result<Eigenpairs<T>> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidInput("operator has dimension zero".into()));
    }
    let (lower, upper) = op.spectral_bounds();
    if fixed.is_none() && lower >= 0.0 {
        // positive operator: nothing below zero
        return Ok(Eigenpairs {
            values: Vec::new(),
            vectors: Mat::zeros(n, 0),
            residuals: Vec::new(),
            next_value: lower,
            converged: true,
            iterations: 0,
        });
    }
    if n <= opts.dense_threshold {
        return dense_solve(op, fixed);
    }
    let scale = lower.abs().max(upper.abs());
    let tol = opts.tol * scale;
    let loose = opts.tol.sqrt().max(opts.tol) * scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let hint = opts.count_hint.unwrap_or(4).max(warm.map_or(0, |w| w.ncols()));
    let buffer = |k: usize| (k / 4).max(6);
    let mut k = (hint + buffer(hint)).min(n);
    let mut x = match warm {
        Some(w) if w.nrows() == n && w.ncols() > 0 => {
            let extra = k.saturating_sub(w.ncols()).max(buffer(w.ncols()).min(n - w.ncols().min(n)));
            let r = random_block::<T>(n, extra, &mut rng);
            k = w.ncols() + extra;
            hstack(w, &r)
        }
        _ => random_block::<T>(n, k, &mut rng),
    };
    x = orthonormalize(&x);
    let mut last: Option<(Vec<f64>, Mat<T>, Vec<f64>)> = None;
    let mut checkpoint = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        let (theta, xr, hx) = rayleigh_ritz(op, &x)?;
        let res = column_residuals(&theta, &xr, &hx);
        let nneg = fixed.unwrap_or_else(|| theta.iter().take_while(|&&t| t < 0.0).count());
        if nneg + 1 + buffer(nneg) / 2 > k && k < n {
            // block too small to see the zero crossing: grow it
            let new_k = (nneg + 1 + buffer(nneg + 1)).max(k * 3 / 2).min(n);
            let r = random_block::<T>(n, new_k - k, &mut rng);
            x = orthonormalize(&hstack(&xr, &r));
            k = new_k;
            last = Some((theta, xr, res));
            continue;
        }
        // the first non-negative Ritz pair only has to settle enough to
        // certify its sign
        let certified = nneg < k
            && res[..nneg].iter().all(|&r| r <= tol)
            && res[nneg] <= loose
            && (fixed.is_some() || theta[nneg] - res[nneg] >= 0.0);
        if certified || (k == n && res.iter().all(|&r| r <= tol)) {
            let vectors = Mat::from_fn(n, nneg, |i, j| xr[(i, j)]);
            return Ok(Eigenpairs {
                values: theta[..nneg].to_vec(),
                vectors,
                residuals: res[..nneg].to_vec(),
                next_value: theta.get(nneg).copied().unwrap_or(f64::INFINITY),
                converged: true,
                iterations: iter,
            });
        }
        if iter % 10 == 0 && k < n {
            // a cluster straddling the block edge stalls the filter: widen
            let worst = res[..=nneg].iter().fold(0.0f64, |m, r| m.max(*r));
            if worst > 0.5 * checkpoint {
                let new_k = (k + buffer(k)).min(n);
                let r = random_block::<T>(n, new_k - k, &mut rng);
                x = orthonormalize(&hstack(&xr, &r));
                k = new_k;
                checkpoint = f64::INFINITY;
                last = Some((theta, xr, res));
                continue;
            }
            checkpoint = worst;
        }
        let a = theta[k - 1].max(theta[nneg.min(k - 1)]) + 1e-12 * scale;
        if a >= upper {
            return dense_solve(op, fixed);
        }
        let a0 = theta[0].min(a - 1e-6 * scale);
        let filtered = chebyshev_filter(op, &xr, opts.degree, a, upper, a0, opts.exec);
        x = orthonormalize(&filtered);
        last = Some((theta, xr, res));
    }
    let (theta, _, res) = last.expect("at least one iteration ran");
    let nneg = fixed.unwrap_or_else(|| theta.iter().take_while(|&&t| t < 0.0).count()).min(theta.len());
    let worst = res[..=nneg.min(res.len() - 1)].iter().fold(0.0f64, |m, r| m.max(*r));
    let partial = SpectralResult::from_values(&theta[..nneg], 1, false, worst, theta.get(nneg).copied(), opts.max_iters);
    Err(Error::NotConverged {
        iterations: opts.max_iters,
        residual: worst,
        partial: Box::new(partial),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Diagonal test operator with a known spectrum.
    struct Diag(Vec<f64>);

    impl HermitianOperator<f64> for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply(&self, x: &[f64], y: &mut [f64]) {
            for i in 0..x.len() {
                y[i] = self.0[i] * x[i];
            }
        }
        fn spectral_bounds(&self) -> (f64, f64) {
            let lo = self.0.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = self.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    }

    /// 1D Dirichlet chain `-Δ - v` with complex hopping phases.
    struct Chain {
        n: usize,
        v: f64,
        phase: f64,
    }

    impl HermitianOperator<Complex64> for Chain {
        fn dim(&self) -> usize {
            self.n
        }
        fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
            let u = Complex64::from_polar(1.0, self.phase);
            for i in 0..self.n {
                let mut s = x[i] * (2.0 - self.v);
                if i + 1 < self.n {
                    s -= u * x[i + 1];
                }
                if i > 0 {
                    s -= u.conj() * x[i - 1];
                }
                y[i] = s;
            }
        }
        fn spectral_bounds(&self) -> (f64, f64) {
            (-self.v, 4.0 - self.v)
        }
    }

    #[test]
    fn diagonal_spectrum_is_recovered_iteratively() {
        let n = 5000;
        let vals: Vec<f64> = (0..n).map(|i| -3.0 + 0.01 * i as f64 + 1e-3 * ((i * 7919) % 13) as f64).collect();
        let op = Diag(vals.clone());
        let opts = EigenOptions { dense_threshold: 10, ..Default::default() };
        let r = negative_eigenpairs(&op, &opts, None).unwrap();
        let mut want: Vec<f64> = vals.into_iter().filter(|&v| v < 0.0).collect();
        want.sort_by(f64::total_cmp);
        assert_eq!(r.values.len(), want.len());
        for (a, b) in r.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(r.converged && r.next_value >= 0.0);
    }

    #[test]
    fn complex_chain_matches_dense() {
        let op = Chain { n: 3000, v: 0.05, phase: 0.3 };
        let opts = EigenOptions { dense_threshold: 10, ..Default::default() };
        let r = negative_eigenpairs(&op, &opts, None).unwrap();
        // phases on an open chain are a gauge: spectrum is 2 - 2cos(kπ/(n+1)) - v
        let want: Vec<f64> = (1..=3000)
            .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / 3001.0).cos() - 0.05)
            .filter(|&v| v < 0.0)
            .collect();
        assert_eq!(r.values.len(), want.len());
        for (a, b) in r.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-9, "{a} {b}");
        }
    }

    #[test]
    fn lowest_pairs_of_a_positive_operator() {
        let op = Diag((0..3000).map(|i| 1.0 + (i as f64).sqrt()).collect());
        let opts = EigenOptions { dense_threshold: 10, ..Default::default() };
        let r = lowest_eigenpairs(&op, 3, &opts, None).unwrap();
        assert_eq!(r.values.len(), 3);
        for (i, v) in r.values.iter().enumerate() {
            assert!((v - (1.0 + (i as f64).sqrt())).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_and_positive_paths() {
        let op = Diag(vec![-2.0, 1.0, -1.0, 3.0]);
        let r = negative_eigenpairs(&op, &EigenOptions::default(), None).unwrap();
        assert_eq!(r.values, vec![-2.0, -1.0]);
        assert_eq!(r.next_value, 1.0);
        let s = r.to_result(2);
        assert_eq!(s.negative_eigenvalues, vec![-2.0, -2.0, -1.0, -1.0]);
        assert_eq!(s.neg_trace, -6.0);
        let pos = Diag(vec![1.0, 2.0]);
        let r = negative_eigenpairs(&pos, &EigenOptions::default(), None).unwrap();
        assert!(r.values.is_empty() && r.converged);
    }

    #[test]
    fn exhausted_iterations_report_partial_results() {
        let op = Diag((0..4000).map(|i| -1.0 + 1e-4 * i as f64).collect());
        let opts = EigenOptions { dense_threshold: 10, max_iters: 2, degree: 2, ..Default::default() };
        match negative_eigenpairs(&op, &opts, None) {
            Err(Error::NotConverged { partial, .. }) => assert!(!partial.converged),
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
