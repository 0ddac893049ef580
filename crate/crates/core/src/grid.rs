//! Uniform 3D box grids with a Dirichlet domain mask, and scalar fields on
//! them.
//!
//! A grid has `n[c]` nodes along axis `c` spanning `[0, extent[c]]`, so the
//! spacing is `extent[c] / (n[c] - 1)`. Nodes on the faces of the box are
//! never part of the domain: they carry the homogeneous Dirichlet condition.
//! Node `(i, j, k)` has linear index `(i * n[1] + j) * n[2] + k`.

use std::sync::Arc;

use crate::error::{ensure_finite, invalid, Error, Result};

pub const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct BoxGrid {
    extent: [f64; 3],
    n: [usize; 3],
    spacing: [f64; 3],
    mask: Vec<bool>,
    /// Node index of every unknown (masked-in node), ascending.
    unknowns: Vec<usize>,
    /// Unknown index of every node, or [`NONE`].
    unknown_of: Vec<usize>,
}

impl PartialEq for BoxGrid {
    fn eq(&self, other: &Self) -> bool {
        self.extent == other.extent && self.n == other.n && self.mask == other.mask
    }
}

impl BoxGrid {
    /// Box with every interior node in the domain.
    pub fn new(n: [usize; 3], extent: [f64; 3]) -> Result<Self> {
        Self::with_mask(n, extent, |_| true)
    }

    /// `n³` nodes on the cube `[0, side]³`.
    pub fn cube(n: usize, side: f64) -> Result<Self> {
        Self::new([n; 3], [side; 3])
    }

    /// Interior nodes whose position satisfies `inside` form the domain.
    pub fn with_mask(n: [usize; 3], extent: [f64; 3], inside: impl Fn([f64; 3]) -> bool) -> Result<Self> {
        if n.iter().any(|&m| m < 3) {
            return Err(invalid(format!("grid needs at least 3 nodes per axis, got {n:?}")));
        }
        if extent.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(invalid(format!("box extents must be positive, got {extent:?}")));
        }
        let spacing = [0, 1, 2].map(|c| extent[c] / (n[c] - 1) as f64);
        let total = n[0] * n[1] * n[2];
        let mut mask = vec![false; total];
        for i in 1..n[0] - 1 {
            for j in 1..n[1] - 1 {
                for k in 1..n[2] - 1 {
                    let p = [i as f64 * spacing[0], j as f64 * spacing[1], k as f64 * spacing[2]];
                    mask[(i * n[1] + j) * n[2] + k] = inside(p);
                }
            }
        }
        Self::from_mask(n, extent, mask)
    }

    /// Uses an explicit per-node mask; face nodes are cleared.
    pub fn from_mask(n: [usize; 3], extent: [f64; 3], mut mask: Vec<bool>) -> Result<Self> {
        if n.iter().any(|&m| m < 3) {
            return Err(invalid(format!("grid needs at least 3 nodes per axis, got {n:?}")));
        }
        let total = n[0] * n[1] * n[2];
        if mask.len() != total {
            return Err(Error::GridMismatch(format!("mask of {} entries for {total} nodes", mask.len())));
        }
        let spacing = [0, 1, 2].map(|c| extent[c] / (n[c] - 1) as f64);
        for (idx, m) in mask.iter_mut().enumerate() {
            let (i, j, k) = (idx / (n[1] * n[2]), (idx / n[2]) % n[1], idx % n[2]);
            if i == 0 || j == 0 || k == 0 || i == n[0] - 1 || j == n[1] - 1 || k == n[2] - 1 {
                *m = false;
            }
        }
        let unknowns: Vec<usize> = (0..total).filter(|&i| mask[i]).collect();
        if unknowns.is_empty() {
            return Err(invalid("domain mask is empty"));
        }
        let mut unknown_of = vec![NONE; total];
        for (u, &node) in unknowns.iter().enumerate() {
            unknown_of[node] = u;
        }
        Ok(Self {
            extent,
            n,
            spacing,
            mask,
            unknowns,
            unknown_of,
        })
    }

    pub fn extent(&self) -> [f64; 3] {
        self.extent
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn num_nodes(&self) -> usize {
        self.mask.len()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn num_unknowns(&self) -> usize {
        self.unknowns.len()
    }

    pub fn unknowns(&self) -> &[usize] {
        &self.unknowns
    }

    pub fn unknown_of(&self, node: usize) -> usize {
        self.unknown_of[node]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n[1] + j) * self.n[2] + k
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let (n1, n2) = (self.n[1], self.n[2]);
        [idx / (n1 * n2), (idx / n2) % n1, idx % n2]
    }

    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        [0, 1, 2].map(|a| c[a] as f64 * self.spacing[a])
    }

    /// Linear-index stride of axis `c`.
    #[inline]
    pub fn stride(&self, c: usize) -> usize {
        match c {
            0 => self.n[1] * self.n[2],
            1 => self.n[2],
            _ => 1,
        }
    }

    pub fn center(&self) -> [f64; 3] {
        self.extent.map(|e| 0.5 * e)
    }

    /// Product trapezoid weight of a node over the full box.
    pub fn trapezoid_weight(&self, idx: usize) -> f64 {
        let c = self.coords(idx);
        (0..3)
            .map(|a| {
                if c[a] == 0 || c[a] == self.n[a] - 1 {
                    0.5 * self.spacing[a]
                } else {
                    self.spacing[a]
                }
            })
            .product()
    }

    /// Nodes in the domain or touching it (26-neighbourhood), i.e. the
    /// support of piecewise-linear functions living on the domain.
    pub fn closure(&self) -> Vec<bool> {
        let mut out = vec![false; self.num_nodes()];
        for &node in &self.unknowns {
            let [i, j, k] = self.coords(node);
            for a in i - 1..=i + 1 {
                for b in j - 1..=j + 1 {
                    for c in k - 1..=k + 1 {
                        out[self.index(a, b, c)] = true;
                    }
                }
            }
        }
        out
    }

    /// Volume of the domain counted as one cell per unknown.
    pub fn domain_volume(&self) -> f64 {
        self.num_unknowns() as f64 * self.cell_volume()
    }

    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// One scalar per grid node. For potentials the stored value is the well
/// depth `V` (positive where particles are attracted); operators apply `-V`.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<BoxGrid>,
    values: Vec<f64>,
    sup_bound: f64,
}

impl ScalarField {
    pub fn new(grid: Arc<BoxGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::GridMismatch(format!(
                "{} samples for {} grid nodes",
                values.len(),
                grid.num_nodes()
            )));
        }
        ensure_finite(&values, "scalar field")?;
        let sup_bound = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(Self {
            grid,
            values,
            sup_bound,
        })
    }

    pub fn from_fn(grid: Arc<BoxGrid>, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let values = (0..grid.num_nodes()).map(|i| f(grid.position(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<BoxGrid>, v: f64) -> Result<Self> {
        let n = grid.num_nodes();
        Self::new(grid, vec![v; n])
    }

    pub fn zeros(grid: Arc<BoxGrid>) -> Self {
        let n = grid.num_nodes();
        Self {
            grid,
            values: vec![0.0; n],
            sup_bound: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<BoxGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `K = ‖V‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn shifted(&self, dv: f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|v| v + dv).collect())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// `∫ f(V)` over the closure of the domain with product trapezoid weights.
    pub fn integrate_over_domain(&self, f: impl Fn(f64) -> f64) -> f64 {
        let closure = self.grid.closure();
        (0..self.values.len())
            .filter(|&i| closure[i])
            .map(|i| self.grid.trapezoid_weight(i) * f(self.values[i]))
            .sum()
    }

    /// Values at the unknowns, in unknown order.
    pub fn on_unknowns(&self) -> Vec<f64> {
        self.grid.unknowns().iter().map(|&i| self.values[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_layout() {
        let g = BoxGrid::cube(5, 1.0).unwrap();
        assert_eq!(g.spacing(), [0.25; 3]);
        assert_eq!(g.num_unknowns(), 27);
        assert!(g.unknowns().iter().all(|&u| {
            let c = g.coords(u);
            c.iter().all(|&x| (1..4).contains(&x))
        }));
        let idx = g.index(1, 2, 3);
        assert_eq!(g.coords(idx), [1, 2, 3]);
        assert_eq!(g.position(idx), [0.25, 0.5, 0.75]);
        let total: f64 = (0..g.num_nodes()).map(|i| g.trapezoid_weight(i)).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn masks_and_errors() {
        let g = BoxGrid::with_mask([9, 9, 9], [2.0; 3], |p| (p[0] - 1.0).abs() < 0.3).unwrap();
        assert!(g.num_unknowns() < 7 * 7 * 7);
        assert!(BoxGrid::with_mask([9; 3], [1.0; 3], |_| false).is_err());
        assert!(BoxGrid::cube(2, 1.0).is_err());
        assert!(BoxGrid::cube(5, -1.0).is_err());
        let full = vec![true; 125];
        let g = BoxGrid::from_mask([5; 3], [1.0; 3], full).unwrap();
        assert_eq!(g.num_unknowns(), 27);
    }

    #[test]
    fn constant_integrates_to_volume() {
        let g = Arc::new(BoxGrid::cube(11, 1.0).unwrap());
        let v = ScalarField::constant(g, 1.0).unwrap();
        assert!((v.integrate_over_domain(|x| x.powf(2.5)) - 1.0).abs() < 1e-13);
        assert_eq!(v.sup_bound(), 1.0);
    }
}
