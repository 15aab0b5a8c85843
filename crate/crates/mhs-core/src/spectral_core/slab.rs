//! Operations along z on the uniform slab grid: local Lagrange interpolation,
//! finite-difference derivatives, and product integration of a smooth kernel
//! against sampled data.
//!
//! Data sampled on the z-nodes are represented on each interval by the
//! Lagrange polynomial through [`STENCIL`] nearby nodes. Integrals
//! `∫ K(s) u(s) ds` are then `Σ_k W_k u(z_k)` with weights obtained by
//! Gauss–Legendre quadrature of `K` times the Lagrange basis on every interval.

use gauss_quad::GaussLegendre;

use super::grid::SlabGrid3;
use crate::error::{MhsError, Result};

/// Nodes per interpolation stencil.
pub const STENCIL: usize = 8;

/// Nodes per finite-difference stencil.
pub const FD_STENCIL: usize = 9;

/// Fornberg weights for the derivatives of order `0..=order` at `x0` of the
/// polynomial interpolating data at `xs`. Returns `w[d][j]`.
pub fn fornberg(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// One quadrature point inside an interval with its Lagrange basis values.
#[derive(Debug, Clone)]
struct QuadPoint {
    s: f64,
    w: f64,
    basis: Vec<f64>,
}

/// Quadrature data of one z-interval.
#[derive(Debug, Clone)]
struct IntervalQuad {
    start: usize,
    points: Vec<QuadPoint>,
}

/// Precomputed z-direction operators for one slab grid.
#[derive(Debug, Clone)]
pub struct ZOps {
    pub grid: SlabGrid3,
    z: Vec<f64>,
    intervals: Vec<IntervalQuad>,
    deriv: Vec<(usize, Vec<f64>)>,
    mid: Vec<(usize, Vec<f64>)>,
}

impl ZOps {
    /// Builds the operators with `n_s` Gauss–Legendre nodes on each of `n_quad_z`
    /// sub-intervals of every grid interval.
    pub fn new(grid: SlabGrid3, n_s: usize, n_quad_z: usize) -> Result<Self> {
        if n_s < 1 || n_quad_z < 1 {
            return Err(MhsError::InvalidConfig(
                "n_s and n_quad_z must be positive".into(),
            ));
        }
        let nn = grid.nz_nodes();
        let z: Vec<f64> = (0..nn).map(|k| grid.z(k)).collect();
        let p = STENCIL.min(nn);
        let stencil_start = |a: usize| -> usize {
            let lo = a.saturating_sub(p / 2 - 1);
            lo.min(nn - p)
        };
        let gl = GaussLegendre::new(
            n_s.try_into()
                .map_err(|_| MhsError::InvalidConfig("n_s must be at least 2".into()))?,
        );
        let gl: Vec<(f64, f64)> = gl.iter().map(|(x, w)| (*x, *w)).collect();
        let h = grid.dz();
        let sub = h / n_quad_z as f64;
        let mut intervals = Vec::with_capacity(grid.n_z);
        let mut mid = Vec::with_capacity(grid.n_z);
        for a in 0..grid.n_z {
            let start = stencil_start(a);
            let xs = &z[start..start + p];
            let mut points = Vec::with_capacity(n_s * n_quad_z);
            for q in 0..n_quad_z {
                let lo = z[a] + q as f64 * sub;
                for &(x, w) in &gl {
                    let s = lo + 0.5 * sub * (x + 1.0);
                    let basis = fornberg(s, xs, 0).swap_remove(0);
                    points.push(QuadPoint {
                        s,
                        w: 0.5 * sub * w,
                        basis,
                    });
                }
            }
            intervals.push(IntervalQuad { start, points });
            mid.push((start, fornberg(z[a] + 0.5 * h, xs, 0).swap_remove(0)));
        }
        let pd = FD_STENCIL.min(nn);
        let deriv = (0..nn)
            .map(|i| {
                let start = i.saturating_sub(pd / 2).min(nn - pd);
                let w = fornberg(z[i], &z[start..start + pd], 1).swap_remove(1);
                (start, w)
            })
            .collect();
        Ok(Self {
            grid,
            z,
            intervals,
            deriv,
            mid,
        })
    }

    /// Heights of the z-nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    /// Weights `W_k` with `∫₀^L K(a, s) u(s) ds ≈ Σ_k W_k u(z_k)`, where `a` is
    /// the index of the interval containing `s`.
    pub fn product_weights(&self, kernel: impl Fn(usize, f64) -> f64) -> Vec<f64> {
        let mut w = vec![0.0; self.z.len()];
        for (a, iq) in self.intervals.iter().enumerate() {
            for pt in &iq.points {
                let kw = kernel(a, pt.s) * pt.w;
                for (j, b) in pt.basis.iter().enumerate() {
                    w[iq.start + j] += kw * b;
                }
            }
        }
        w
    }

    /// Cumulative integrals `∫₀^{z_i} u` at every node.
    pub fn cumulative_integral(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.z.len()];
        for (a, iq) in self.intervals.iter().enumerate() {
            let mut acc = 0.0;
            for pt in &iq.points {
                let v: f64 = pt.basis.iter().enumerate().map(|(j, b)| b * u[iq.start + j]).sum();
                acc += pt.w * v;
            }
            out[a + 1] = out[a] + acc;
        }
        out
    }

    /// `∂_z u` at node `i` by the local finite-difference stencil.
    pub fn derivative_at(&self, u: impl Fn(usize) -> f64, i: usize) -> f64 {
        let (start, w) = &self.deriv[i];
        w.iter().enumerate().map(|(j, c)| c * u(start + j)).sum()
    }

    /// Stencil `(start, weights)` of the z-derivative at node `i`.
    pub fn derivative_stencil(&self, i: usize) -> (usize, &[f64]) {
        (self.deriv[i].0, &self.deriv[i].1)
    }

    /// Stencil `(start, weights)` of the value at the midpoint of interval `a`.
    pub fn midpoint_stencil(&self, a: usize) -> (usize, &[f64]) {
        (self.mid[a].0, &self.mid[a].1)
    }

    /// Stencil `(start, weights)` of the value at an arbitrary height `z`.
    pub fn value_stencil(&self, z: f64) -> (usize, Vec<f64>) {
        let nn = self.z.len();
        let a = ((z / self.grid.dz()).floor().max(0.0) as usize).min(self.grid.n_z - 1);
        let start = self.intervals[a].start;
        let p = STENCIL.min(nn);
        (start, fornberg(z, &self.z[start..start + p], 0).swap_remove(0))
    }
}
