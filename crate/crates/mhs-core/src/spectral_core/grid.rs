//! Grids on the torus T² and the slab T²×[0,L], and the real fields sampled on them.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{MhsError, Result};

/// Uniform grid on T² with `n_x` by `n_y` nodes over the period 2π.
///
/// Node `(i, j)` sits at `(2πi/n_x, 2πj/n_y)`; storage is row-major with `x` fastest,
/// so the flat index of node `(i, j)` is `j * n_x + i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid2 {
    pub n_x: usize,
    pub n_y: usize,
}

impl TorusGrid2 {
    /// Builds a grid after checking that both sizes are even and at least 4.
    pub fn new(n_x: usize, n_y: usize) -> Result<Self> {
        for (name, n) in [("n_x", n_x), ("n_y", n_y)] {
            if n < 4 || n % 2 != 0 {
                return Err(MhsError::InvalidGrid(format!(
                    "{name} = {n} must be even and at least 4"
                )));
            }
        }
        Ok(Self { n_x, n_y })
    }

    /// Square grid shorthand.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.n_x * self.n_y
    }

    /// Always false for a validated grid; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid spacing in x.
    pub fn dx(&self) -> f64 {
        2.0 * PI / self.n_x as f64
    }

    /// Grid spacing in y.
    pub fn dy(&self) -> f64 {
        2.0 * PI / self.n_y as f64
    }

    /// Coordinate of x-node `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.dx() * i as f64
    }

    /// Coordinate of y-node `j`.
    pub fn y(&self, j: usize) -> f64 {
        self.dy() * j as f64
    }

    /// Flat index of node `(i, j)`.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n_x + i
    }

    /// Coordinates of the node with flat index `k`.
    pub fn coords(&self, k: usize) -> (f64, f64) {
        (self.x(k % self.n_x), self.y(k / self.n_x))
    }

    /// Signed wavenumber stored at FFT position `k` along x (Nyquist maps to `-n_x/2`).
    pub fn mode_x(&self, k: usize) -> i64 {
        signed_mode(k, self.n_x)
    }

    /// Signed wavenumber stored at FFT position `k` along y.
    pub fn mode_y(&self, k: usize) -> i64 {
        signed_mode(k, self.n_y)
    }

    /// Signed lattice mode `(m, n)` stored at flat spectral index `k`.
    pub fn mode(&self, k: usize) -> (i64, i64) {
        (self.mode_x(k % self.n_x), self.mode_y(k / self.n_x))
    }

    /// Flat spectral index of the lattice mode `(m, n)`, if representable.
    pub fn mode_index(&self, m: i64, n: i64) -> Option<usize> {
        let kx = mode_position(m, self.n_x)?;
        let ky = mode_position(n, self.n_y)?;
        Some(ky * self.n_x + kx)
    }

    /// True when the mode at flat index `k` is a Nyquist mode in either direction.
    pub fn is_nyquist(&self, k: usize) -> bool {
        k % self.n_x == self.n_x / 2 || k / self.n_x == self.n_y / 2
    }

    /// Quadrature weight of a single node for integrals over T².
    pub fn cell_area(&self) -> f64 {
        self.dx() * self.dy()
    }
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn mode_position(m: i64, n: usize) -> Option<usize> {
    let half = (n / 2) as i64;
    if m < -half || m >= half {
        return None;
    }
    Some(if m >= 0 { m as usize } else { (m + n as i64) as usize })
}

/// Uniform grid on the slab T²×[0,L] with `n_z` intervals (`n_z + 1` nodes, both faces included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlabGrid3 {
    pub base: TorusGrid2,
    pub n_z: usize,
    pub l: f64,
}

impl SlabGrid3 {
    /// Builds a slab grid after checking `n_z ≥ 1` and `L > 0`.
    pub fn new(base: TorusGrid2, n_z: usize, l: f64) -> Result<Self> {
        if n_z < 1 {
            return Err(MhsError::InvalidGrid("n_z must be at least 1".into()));
        }
        if !(l > 0.0 && l.is_finite()) {
            return Err(MhsError::InvalidGrid(format!("L = {l} must be positive")));
        }
        Ok(Self { base, n_z, l })
    }

    /// Number of z-nodes.
    pub fn nz_nodes(&self) -> usize {
        self.n_z + 1
    }

    /// Vertical spacing.
    pub fn dz(&self) -> f64 {
        self.l / self.n_z as f64
    }

    /// Height of z-node `k`.
    pub fn z(&self, k: usize) -> f64 {
        self.dz() * k as f64
    }

    /// Nodes per horizontal slice.
    pub fn slice_len(&self) -> usize {
        self.base.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.base.len() * self.nz_nodes()
    }

    /// Always false for a validated grid.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Real scalar field on T².
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2 {
    pub grid: TorusGrid2,
    pub values: Vec<f64>,
}

impl ScalarField2 {
    /// Zero field.
    pub fn zeros(grid: TorusGrid2) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x, y)` on every node.
    pub fn from_fn(grid: TorusGrid2, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let (x, y) = grid.coords(k);
                f(x, y)
            })
            .collect();
        Self { grid, values }
    }

    /// Wraps existing node values, checking the length.
    pub fn from_values(grid: TorusGrid2, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MhsError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Grid mean ⟨f⟩ = (1/(2π)²)∫f.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Maximum absolute node value.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// True if all values are finite.
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Pointwise linear combination `a*self + c*other`.
    pub fn axpby(&self, a: f64, other: &Self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| a * u + c * v)
                .collect(),
        }
    }

    /// Multiplies every value by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u * v)
                .collect(),
        }
    }

    /// Mean-free part f̃ = f − ⟨f⟩.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }
}

/// Real vector field on T² with a fixed number of components.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField2 {
    pub grid: TorusGrid2,
    pub comps: Vec<ScalarField2>,
}

impl VectorField2 {
    /// Zero field with `n_comp` components.
    pub fn zeros(grid: TorusGrid2, n_comp: usize) -> Self {
        Self {
            grid,
            comps: vec![ScalarField2::zeros(grid); n_comp],
        }
    }

    /// Assembles components, checking that they share the grid.
    pub fn from_comps(comps: Vec<ScalarField2>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| MhsError::GridMismatch("vector field needs components".into()))?
            .grid;
        if comps.iter().any(|c| c.grid != grid) {
            return Err(MhsError::GridMismatch("components on different grids".into()));
        }
        Ok(Self { grid, comps })
    }

    /// Maximum absolute value over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}

/// Real scalar field on the slab; slice `k` holds the nodes at height `z_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField3 {
    pub grid: SlabGrid3,
    pub values: Vec<f64>,
}

impl ScalarField3 {
    /// Zero field.
    pub fn zeros(grid: SlabGrid3) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x, y, z)` on every node.
    pub fn from_fn(grid: SlabGrid3, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for k in 0..grid.nz_nodes() {
            let z = grid.z(k);
            for p in 0..grid.base.len() {
                let (x, y) = grid.base.coords(p);
                values.push(f(x, y, z));
            }
        }
        Self { grid, values }
    }

    /// Wraps existing values, checking the length.
    pub fn from_values(grid: SlabGrid3, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(MhsError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Builds the field by stacking horizontal slices.
    pub fn from_slices(grid: SlabGrid3, slices: &[ScalarField2]) -> Result<Self> {
        if slices.len() != grid.nz_nodes() {
            return Err(MhsError::GridMismatch(format!(
                "expected {} slices, got {}",
                grid.nz_nodes(),
                slices.len()
            )));
        }
        let mut values = Vec::with_capacity(grid.len());
        for s in slices {
            if s.grid != grid.base {
                return Err(MhsError::GridMismatch("slice grid differs from base".into()));
            }
            values.extend_from_slice(&s.values);
        }
        Ok(Self { grid, values })
    }

    /// Node values of slice `k`.
    pub fn slice_values(&self, k: usize) -> &[f64] {
        let n = self.grid.slice_len();
        &self.values[k * n..(k + 1) * n]
    }

    /// Mutable node values of slice `k`.
    pub fn slice_values_mut(&mut self, k: usize) -> &mut [f64] {
        let n = self.grid.slice_len();
        &mut self.values[k * n..(k + 1) * n]
    }

    /// Copy of slice `k` as a surface field.
    pub fn slice(&self, k: usize) -> ScalarField2 {
        ScalarField2 {
            grid: self.grid.base,
            values: self.slice_values(k).to_vec(),
        }
    }

    /// Maximum absolute value.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// Extends a surface field as constant in z.
    pub fn extend_constant(grid: SlabGrid3, s: &ScalarField2) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for _ in 0..grid.nz_nodes() {
            values.extend_from_slice(&s.values);
        }
        Self { grid, values }
    }
}

/// Real vector field on the slab.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField3 {
    pub grid: SlabGrid3,
    pub comps: Vec<ScalarField3>,
}

impl VectorField3 {
    /// Zero field with `n_comp` components.
    pub fn zeros(grid: SlabGrid3, n_comp: usize) -> Self {
        Self {
            grid,
            comps: vec![ScalarField3::zeros(grid); n_comp],
        }
    }

    /// Assembles components, checking that they share the grid.
    pub fn from_comps(comps: Vec<ScalarField3>) -> Result<Self> {
        let grid = comps
            .first()
            .ok_or_else(|| MhsError::GridMismatch("vector field needs components".into()))?
            .grid;
        if comps.iter().any(|c| c.grid != grid) {
            return Err(MhsError::GridMismatch("components on different grids".into()));
        }
        Ok(Self { grid, comps })
    }

    /// Samples a closure returning all components at once.
    pub fn from_fn<const C: usize>(grid: SlabGrid3, f: impl Fn(f64, f64, f64) -> [f64; C]) -> Self {
        let mut comps = vec![Vec::with_capacity(grid.len()); C];
        for k in 0..grid.nz_nodes() {
            let z = grid.z(k);
            for p in 0..grid.base.len() {
                let (x, y) = grid.base.coords(p);
                let v = f(x, y, z);
                for c in 0..C {
                    comps[c].push(v[c]);
                }
            }
        }
        Self {
            grid,
            comps: comps
                .into_iter()
                .map(|values| ScalarField3 { grid, values })
                .collect(),
        }
    }

    /// Maximum absolute value over all components.
    pub fn max_abs(&self) -> f64 {
        self.comps.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Maximum componentwise difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| max_abs_diff(&a.values, &b.values))
            .fold(0.0, f64::max)
    }

    /// Horizontal slice `k` of every component.
    pub fn slice(&self, k: usize) -> VectorField2 {
        VectorField2 {
            grid: self.grid.base,
            comps: self.comps.iter().map(|c| c.slice(k)).collect(),
        }
    }
}

/// Maximum absolute entry of a slice (0 for an empty slice).
pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Maximum absolute entrywise difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(TorusGrid2::new(5, 8).is_err());
        assert!(TorusGrid2::new(2, 8).is_err());
        assert!(TorusGrid2::new(8, 8).is_ok());
    }

    #[test]
    fn mode_index_round_trip() {
        let g = TorusGrid2::new(8, 6).unwrap();
        for k in 0..g.len() {
            let (m, n) = g.mode(k);
            assert_eq!(g.mode_index(m, n), Some(k));
        }
        assert_eq!(g.mode_index(4, 0), None);
        assert_eq!(g.mode(g.mode_index(-4, 0).unwrap()), (-4, 0));
    }

    #[test]
    fn slab_nodes_include_both_faces() {
        let g = SlabGrid3::new(TorusGrid2::square(4).unwrap(), 8, 2.0).unwrap();
        assert_eq!(g.nz_nodes(), 9);
        assert_eq!(g.z(0), 0.0);
        assert!((g.z(8) - 2.0).abs() < 1e-15);
        assert!(SlabGrid3::new(g.base, 4, -1.0).is_err());
    }
}
