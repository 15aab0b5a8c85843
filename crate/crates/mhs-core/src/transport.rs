//! Characteristics of `B = e₃ + b` through the slab and the transport of the
//! current along them.
//!
//! Each surface node `η` starts the characteristic `Ψ_z(η) = (X, Y)` with
//! `dX/dz = b₁/(1+b₃)`, `dY/dz = b₂/(1+b₃)`. Along it the fundamental matrix
//! `P` of `dP/dz = A(b)P`, `a_{ℓk} = ∂_k b_ℓ/(1+b₃)`, `P(0) = I` is carried, so
//! the transported current is `w = P j₀` and `j = w∘Ψ_z⁻¹`. Both ODEs are
//! integrated with classical RK4 on the z-grid; `b` is evaluated off-grid by
//! its trigonometric interpolant in `(x, y)` and by local Lagrange
//! interpolation of its Fourier coefficients in `z`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cli_io::config::SolverConfig;
use crate::current_equation::CurrentBoundary;
use crate::error::{MhsError, Result};
use crate::spectral_core::{
    to_spectral, PointBasis, ScalarField2, ScalarField3, SlabGrid3, SpectralField2,
    TrigInterpolator, VectorField3, ZOps,
};

/// Largest admissible `|b₃|`; beyond it the characteristics are considered unreliable.
pub const B3_LIMIT: f64 = 0.9;

/// Characteristics map, its inverse, the deviations `Λ` and `Θ`, and the
/// fundamental matrix of the current transport.
#[derive(Debug, Clone)]
pub struct FlowData {
    pub grid: SlabGrid3,
    /// `Λ = Ψ_z(η) − η` at every node (2 components).
    pub lambda: VectorField3,
    /// `Θ = det(I + ∇Λ) − 1` at every node.
    pub theta: ScalarField3,
    /// `Ψ_z⁻¹(r) − r` at every node (2 components).
    pub psi_inv: VectorField3,
    /// Row-major 3×3 fundamental matrix at every node, `prop[9·node + 3ℓ + k]`.
    pub prop: Vec<f64>,
    /// Largest Newton residual met while inverting the flow.
    pub inversion_residual: f64,
}

impl FlowData {
    /// Flat storage index of surface node `p` on layer `k`.
    fn node(&self, k: usize, p: usize) -> usize {
        k * self.grid.slice_len() + p
    }

    /// `Ψ_z(η)` for layer `k` and surface node `p` (not wrapped to the torus).
    pub fn psi(&self, k: usize, p: usize) -> (f64, f64) {
        let (x, y) = self.grid.base.coords(p);
        let i = self.node(k, p);
        (x + self.lambda.comps[0].values[i], y + self.lambda.comps[1].values[i])
    }

    /// `Ψ_z⁻¹(r)` for layer `k` and surface node `p` (not wrapped to the torus).
    pub fn psi_inverse(&self, k: usize, p: usize) -> (f64, f64) {
        let (x, y) = self.grid.base.coords(p);
        let i = self.node(k, p);
        (x + self.psi_inv.comps[0].values[i], y + self.psi_inv.comps[1].values[i])
    }

    /// Fundamental matrix at layer `k`, surface node `p`.
    pub fn propagator(&self, k: usize, p: usize) -> [f64; 9] {
        let i = 9 * self.node(k, p);
        let mut out = [0.0; 9];
        out.copy_from_slice(&self.prop[i..i + 9]);
        out
    }

    /// Flow of `b ≡ 0`.
    pub fn identity(grid: SlabGrid3) -> Self {
        let mut prop = vec![0.0; 9 * grid.len()];
        for chunk in prop.chunks_exact_mut(9) {
            chunk[0] = 1.0;
            chunk[4] = 1.0;
            chunk[8] = 1.0;
        }
        Self {
            grid,
            lambda: VectorField3::zeros(grid, 2),
            theta: ScalarField3::zeros(grid),
            psi_inv: VectorField3::zeros(grid, 2),
            prop,
            inversion_residual: 0.0,
        }
    }

    /// Evaluates the fields given on each layer (node values over `η`) at the
    /// points `Ψ_z⁻¹(r)` of that layer. `fields(k)` returns the components on layer `k`.
    pub fn pull_back(&self, fields: impl Fn(usize) -> Vec<Vec<f64>> + Sync) -> Vec<ScalarField3> {
        let g = self.grid;
        let n = g.slice_len();
        let layers: Vec<Vec<Vec<f64>>> = (0..g.nz_nodes())
            .into_par_iter()
            .map(|k| {
                let comps = fields(k);
                let interps: Vec<TrigInterpolator> = comps
                    .iter()
                    .map(|v| TrigInterpolator::new(&SpectralField2::from_real(g.base, v)))
                    .collect();
                let mut out = vec![vec![0.0; n]; comps.len()];
                for p in 0..n {
                    let (x, y) = self.psi_inverse(k, p);
                    let basis = PointBasis::new(g.base, x, y);
                    for (c, it) in interps.iter().enumerate() {
                        out[c][p] = it.eval(&basis);
                    }
                }
                out
            })
            .collect();
        let n_comp = layers.first().map_or(0, |l| l.len());
        (0..n_comp)
            .map(|c| {
                let mut values = Vec::with_capacity(g.len());
                for layer in &layers {
                    values.extend_from_slice(&layer[c]);
                }
                ScalarField3 { grid: g, values }
            })
            .collect()
    }

    /// Pullback `u∘Ψ_z⁻¹` of a z-independent surface field.
    pub fn pull_back_surface(&self, u: &ScalarField2) -> ScalarField3 {
        let it = TrigInterpolator::new(&to_spectral(u));
        let g = self.grid;
        let n = g.slice_len();
        let layers: Vec<Vec<f64>> = (0..g.nz_nodes())
            .into_par_iter()
            .map(|k| {
                (0..n)
                    .map(|p| {
                        let (x, y) = self.psi_inverse(k, p);
                        it.eval(&PointBasis::new(g.base, x, y))
                    })
                    .collect()
            })
            .collect();
        ScalarField3 {
            grid: g,
            values: layers.concat(),
        }
    }

    /// `(P − I) v` on every layer for a surface vector `v = (v¹, v², v³)`,
    /// returned per layer as three node arrays.
    fn deviation_on_layer(&self, k: usize, v: [&[f64]; 3], full: bool) -> Vec<Vec<f64>> {
        let n = self.grid.slice_len();
        let mut out = vec![vec![0.0; n]; 3];
        for p in 0..n {
            let m = self.propagator(k, p);
            let x = [v[0][p], v[1][p], v[2][p]];
            for l in 0..3 {
                let mut s = 0.0;
                for c in 0..3 {
                    let e = if full || l != c { m[3 * l + c] } else { m[3 * l + c] - 1.0 };
                    s += e * x[c];
                }
                out[l][p] = s;
            }
        }
        out
    }
}

/// Fourier data of `b` and `∂₃b` on node layers and interval midpoints.
struct FieldLevels {
    /// `levels[2k]` is node `k`, `levels[2k+1]` the midpoint of interval `k`;
    /// each entry holds interpolants of `b₁, b₂, b₃, ∂₃b₁, ∂₃b₂, ∂₃b₃`.
    levels: Vec<[TrigInterpolator; 6]>,
}

impl FieldLevels {
    fn new(b: &VectorField3, zops: &ZOps) -> Self {
        let g = b.grid;
        let nn = g.nz_nodes();
        let n = g.slice_len();
        // Node spectra of b and of ∂₃b (finite differences along z).
        let spectra: Vec<[SpectralField2; 6]> = (0..nn)
            .into_par_iter()
            .map(|k| {
                let mut dz = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
                let (start, w) = zops.derivative_stencil(k);
                for c in 0..3 {
                    let vals = &b.comps[c].values;
                    for (j, wj) in w.iter().enumerate() {
                        let off = (start + j) * n;
                        for p in 0..n {
                            dz[c][p] += wj * vals[off + p];
                        }
                    }
                }
                let s = |v: &[f64]| SpectralField2::from_real(g.base, v);
                [
                    s(b.comps[0].slice_values(k)),
                    s(b.comps[1].slice_values(k)),
                    s(b.comps[2].slice_values(k)),
                    s(&dz[0]),
                    s(&dz[1]),
                    s(&dz[2]),
                ]
            })
            .collect();
        let mut levels = Vec::with_capacity(2 * nn - 1);
        for k in 0..nn {
            levels.push(spectra[k].clone().map(|s| TrigInterpolator::new(&s)));
            if k + 1 < nn {
                let (start, w) = zops.midpoint_stencil(k);
                let mid: [SpectralField2; 6] = std::array::from_fn(|c| {
                    let mut acc = SpectralField2::zeros(g.base);
                    for (j, wj) in w.iter().enumerate() {
                        for (a, v) in acc.coeffs.iter_mut().zip(&spectra[start + j][c].coeffs) {
                            *a += v * *wj;
                        }
                    }
                    acc
                });
                levels.push(mid.map(|s| TrigInterpolator::new(&s)));
            }
        }
        Self { levels }
    }

    /// Right-hand side of the characteristic and propagator ODEs.
    fn rhs(&self, level: usize, state: &[f64; 11]) -> Result<[f64; 11]> {
        let it = &self.levels[level];
        let g = it[0].grid();
        let basis = PointBasis::new(g, state[0], state[1]);
        let (b1, b1x, b1y) = it[0].eval_grad(&basis);
        let (b2, b2x, b2y) = it[1].eval_grad(&basis);
        let (b3, b3x, b3y) = it[2].eval_grad(&basis);
        let dz = [it[3].eval(&basis), it[4].eval(&basis), it[5].eval(&basis)];
        let denom = 1.0 + b3;
        if !(denom > 1.0 - B3_LIMIT) {
            return Err(MhsError::FieldTooLarge {
                max_b3: b3.abs(),
                limit: B3_LIMIT,
            });
        }
        let inv = 1.0 / denom;
        let a = [
            [b1x * inv, b1y * inv, dz[0] * inv],
            [b2x * inv, b2y * inv, dz[1] * inv],
            [b3x * inv, b3y * inv, dz[2] * inv],
        ];
        let mut out = [0.0; 11];
        out[0] = b1 * inv;
        out[1] = b2 * inv;
        for l in 0..3 {
            for c in 0..3 {
                out[2 + 3 * l + c] = (0..3).map(|q| a[l][q] * state[2 + 3 * q + c]).sum();
            }
        }
        Ok(out)
    }
}

fn axpy(s: &[f64; 11], h: f64, d: &[f64; 11]) -> [f64; 11] {
    std::array::from_fn(|i| s[i] + h * d[i])
}

/// Integrates the characteristics and the fundamental matrix; `psi_inv` is left empty.
pub fn integrate_flow(b: &VectorField3, zops: &ZOps) -> Result<FlowData> {
    let g = b.grid;
    if b.comps.len() != 3 {
        return Err(MhsError::GridMismatch("b must have three components".into()));
    }
    let max_b3 = b.comps[2].max_abs();
    if max_b3 >= B3_LIMIT {
        return Err(MhsError::FieldTooLarge {
            max_b3,
            limit: B3_LIMIT,
        });
    }
    if !b.comps.iter().all(|c| c.values.iter().all(|v| v.is_finite())) {
        return Err(MhsError::StepFailure {
            node: 0,
            reason: "non-finite b".into(),
        });
    }
    let fl = FieldLevels::new(b, zops);
    let n = g.slice_len();
    let nn = g.nz_nodes();
    let h = g.dz();
    let paths: Vec<Vec<[f64; 11]>> = (0..n)
        .into_par_iter()
        .map(|p| -> Result<Vec<[f64; 11]>> {
            let (x, y) = g.base.coords(p);
            let mut s = [0.0; 11];
            s[0] = x;
            s[1] = y;
            s[2] = 1.0;
            s[6] = 1.0;
            s[10] = 1.0;
            let mut path = Vec::with_capacity(nn);
            path.push(s);
            for a in 0..g.n_z {
                let k1 = fl.rhs(2 * a, &s)?;
                let k2 = fl.rhs(2 * a + 1, &axpy(&s, 0.5 * h, &k1))?;
                let k3 = fl.rhs(2 * a + 1, &axpy(&s, 0.5 * h, &k2))?;
                let k4 = fl.rhs(2 * a + 2, &axpy(&s, h, &k3))?;
                for i in 0..11 {
                    s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                if s.iter().any(|v| !v.is_finite()) {
                    return Err(MhsError::StepFailure {
                        node: a + 1,
                        reason: format!("non-finite state on the characteristic from node {p}"),
                    });
                }
                path.push(s);
            }
            Ok(path)
        })
        .collect::<Result<_>>()?;
    let mut flow = FlowData::identity(g);
    for (p, path) in paths.iter().enumerate() {
        let (x, y) = g.base.coords(p);
        for (k, s) in path.iter().enumerate() {
            let i = k * n + p;
            flow.lambda.comps[0].values[i] = s[0] - x;
            flow.lambda.comps[1].values[i] = s[1] - y;
            flow.prop[9 * i..9 * i + 9].copy_from_slice(&s[2..]);
        }
    }
    // Θ = det(I + ∇Λ) − 1 by spectral differentiation of Λ on each layer.
    let thetas: Vec<Vec<f64>> = (0..nn)
        .into_par_iter()
        .map(|k| {
            let l1 = SpectralField2::from_real(g.base, flow.lambda.comps[0].slice_values(k));
            let l2 = SpectralField2::from_real(g.base, flow.lambda.comps[1].slice_values(k));
            let (a, bb) = (l1.dx().to_real().values, l1.dy().to_real().values);
            let (c, d) = (l2.dx().to_real().values, l2.dy().to_real().values);
            (0..n)
                .map(|p| (1.0 + a[p]) * (1.0 + d[p]) - bb[p] * c[p] - 1.0)
                .collect()
        })
        .collect();
    flow.theta.values = thetas.concat();
    Ok(flow)
}

/// Fills `psi_inv` by Newton iteration on `η + Λ(η) = r` for every node `r`.
pub fn invert_flow(flow: &mut FlowData, config: &SolverConfig) -> Result<()> {
    let g = flow.grid;
    let n = g.slice_len();
    let layers: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..g.nz_nodes())
        .into_par_iter()
        .map(|k| -> Result<(Vec<f64>, Vec<f64>, f64)> {
            let l1 = TrigInterpolator::new(&SpectralField2::from_real(
                g.base,
                flow.lambda.comps[0].slice_values(k),
            ));
            let l2 = TrigInterpolator::new(&SpectralField2::from_real(
                g.base,
                flow.lambda.comps[1].slice_values(k),
            ));
            let lam1 = flow.lambda.comps[0].slice_values(k);
            let lam2 = flow.lambda.comps[1].slice_values(k);
            let mut d1 = vec![0.0; n];
            let mut d2 = vec![0.0; n];
            let mut worst = 0.0f64;
            for p in 0..n {
                let (x, y) = g.base.coords(p);
                let (mut ex, mut ey) = (x - lam1[p], y - lam2[p]);
                let mut converged = false;
                let mut res = f64::INFINITY;
                for _ in 0..config.max_newton {
                    let basis = PointBasis::new(g.base, ex, ey);
                    let (a, ax, ay) = l1.eval_grad(&basis);
                    let (c, cx, cy) = l2.eval_grad(&basis);
                    let rx = ex + a - x;
                    let ry = ey + c - y;
                    res = rx.hypot(ry);
                    if res < config.flow_tol {
                        converged = true;
                        break;
                    }
                    let (j11, j12, j21, j22) = (1.0 + ax, ay, cx, 1.0 + cy);
                    let det = j11 * j22 - j12 * j21;
                    if !(det.abs() > 1e-12) || !det.is_finite() {
                        break;
                    }
                    ex -= (j22 * rx - j12 * ry) / det;
                    ey -= (-j21 * rx + j11 * ry) / det;
                }
                if !converged {
                    return Err(MhsError::InversionFailure {
                        node: k,
                        residual: res,
                        iterations: config.max_newton,
                    });
                }
                worst = worst.max(res);
                d1[p] = ex - x;
                d2[p] = ey - y;
            }
            Ok((d1, d2, worst))
        })
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for (k, (d1, d2, w)) in layers.into_iter().enumerate() {
        flow.psi_inv.comps[0].slice_values_mut(k).copy_from_slice(&d1);
        flow.psi_inv.comps[1].slice_values_mut(k).copy_from_slice(&d2);
        worst = worst.max(w);
    }
    flow.inversion_residual = worst;
    Ok(())
}

/// Characteristics, deviations and inverse flow of `b`.
pub fn compute_flow(b: &VectorField3, zops: &ZOps, config: &SolverConfig) -> Result<FlowData> {
    let mut flow = integrate_flow(b, zops)?;
    invert_flow(&mut flow, config)?;
    Ok(flow)
}

fn j0_arrays(j0: &CurrentBoundary) -> [&[f64]; 3] {
    [&j0.j0_1.values, &j0.j0_2.values, &j0.j0_3.values]
}

/// `w = P j₀` on every layer, indexed by the starting node `η`.
pub fn transport_w(flow: &FlowData, j0: &CurrentBoundary) -> VectorField3 {
    let g = flow.grid;
    let v = j0_arrays(j0);
    let layers: Vec<Vec<Vec<f64>>> = (0..g.nz_nodes())
        .map(|k| flow.deviation_on_layer(k, v, true))
        .collect();
    let comps = (0..3)
        .map(|c| ScalarField3 {
            grid: g,
            values: layers.iter().flat_map(|l| l[c].iter().copied()).collect(),
        })
        .collect();
    VectorField3 { grid: g, comps }
}

/// Full transported current `j = (P j₀)∘Ψ_z⁻¹`.
pub fn transport_solve(flow: &FlowData, j0: &CurrentBoundary) -> VectorField3 {
    let v = j0_arrays(j0);
    let comps = flow.pull_back(|k| flow.deviation_on_layer(k, v, true));
    VectorField3 {
        grid: flow.grid,
        comps,
    }
}

/// Deviation `δj = ((P − I) j₀)∘Ψ_z⁻¹` from the pure pullback `j̄ = j₀∘Ψ_z⁻¹`.
pub fn transport_delta(flow: &FlowData, j0: &CurrentBoundary) -> VectorField3 {
    let v = j0_arrays(j0);
    let comps = flow.pull_back(|k| flow.deviation_on_layer(k, v, false));
    VectorField3 {
        grid: flow.grid,
        comps,
    }
}

/// First two components of `δj` for the initial data `(u¹, u², u³)`.
pub fn transport_delta_horizontal(flow: &FlowData, u: [&[f64]; 3]) -> [ScalarField3; 2] {
    let mut comps = flow.pull_back(|k| {
        let mut d = flow.deviation_on_layer(k, u, false);
        d.truncate(2);
        d
    });
    let second = comps.pop().expect("two components");
    let first = comps.pop().expect("two components");
    [first, second]
}

/// Horizontal divergence plus `∂₃` of a volume field on every layer.
pub fn divergence(v: &VectorField3, zops: &ZOps) -> ScalarField3 {
    let g = v.grid;
    let n = g.slice_len();
    let layers: Vec<Vec<f64>> = (0..g.nz_nodes())
        .into_par_iter()
        .map(|k| {
            let s = SpectralField2::from_real(g.base, v.comps[0].slice_values(k))
                .dx()
                .add(&SpectralField2::from_real(g.base, v.comps[1].slice_values(k)).dy());
            let mut d = s.to_real().values;
            let (start, w) = zops.derivative_stencil(k);
            for (j, wj) in w.iter().enumerate() {
                let vals = v.comps[2].slice_values(start + j);
                for p in 0..n {
                    d[p] += wj * vals[p];
                }
            }
            d
        })
        .collect();
    ScalarField3 {
        grid: g,
        values: layers.concat(),
    }
}

/// `max_z ‖div j‖∞` with spectral horizontal and finite-difference vertical derivatives.
pub fn check_div_transport(j: &VectorField3, zops: &ZOps) -> f64 {
    divergence(j, zops).max_abs()
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap(x: f64) -> f64 {
    x.rem_euclid(2.0 * PI)
}

/// Largest distance on the torus between `Ψ_z⁻¹(Ψ_z(η))` and `η` over all nodes.
pub fn composition_residual(flow: &FlowData) -> f64 {
    let g = flow.grid;
    let n = g.slice_len();
    (0..g.nz_nodes())
        .into_par_iter()
        .map(|k| {
            let d1 = TrigInterpolator::new(&SpectralField2::from_real(
                g.base,
                flow.psi_inv.comps[0].slice_values(k),
            ));
            let d2 = TrigInterpolator::new(&SpectralField2::from_real(
                g.base,
                flow.psi_inv.comps[1].slice_values(k),
            ));
            let mut worst = 0.0f64;
            for p in 0..n {
                let (x, y) = g.base.coords(p);
                let (px, py) = flow.psi(k, p);
                let basis = PointBasis::new(g.base, px, py);
                let qx = px + d1.eval(&basis);
                let qy = py + d2.eval(&basis);
                let ang = |a: f64| {
                    let r = a.rem_euclid(2.0 * PI);
                    r.min(2.0 * PI - r)
                };
                worst = worst.max(ang(qx - x).hypot(ang(qy - y)));
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

/// Complex helper used by kernel construction: `e^{−iξ·Λ}` for one node.
pub(crate) fn phase(m: i64, n: i64, l1: f64, l2: f64) -> Complex64 {
    Complex64::from_polar(1.0, -(m as f64 * l1 + n as f64 * l2))
}
