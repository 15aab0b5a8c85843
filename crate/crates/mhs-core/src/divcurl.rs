//! Div-curl problem `∇×W = j`, `∇·W = 0`, `W₃ = f` on both faces, with
//! prescribed horizontal fluxes, solved through a vector potential `Z`.
//!
//! For every horizontal mode `ξ` the components `Ẑ₁, Ẑ₂` solve
//! `(|ξ|² − ∂₃²)Ẑ_ℓ = ĵ_ℓ` with face values `ĥ_ℓ^±`. With the Dirichlet Green
//! function `𝔊(z, s) = sinh(|ξ|z_<) sinh(|ξ|(L − z_>))/(|ξ| sinh(|ξ|L))`,
//!
//! `Ẑ_ℓ(z) = ∫ 𝔊(z, s) ĵ_ℓ(s) ds + ĥ_ℓ⁻ S⁻(z) + ĥ_ℓ⁺ S⁺(z)`,
//!
//! `S⁻ = sinh(|ξ|(L−z))/sinh(|ξ|L)`, `S⁺ = sinh(|ξ|z)/sinh(|ξ|L)`. The third
//! component follows from the vertical curl equation,
//! `|ξ|²Ẑ₃ = ĵ₃ − im∂₃Ẑ₁ − in∂₃Ẑ₂`, and the zero mode carries the flux terms
//! `zJ₁/(2πL)` in `Z₁` and `−zJ₂/(2πL)` in `Z₂`. Then
//! `W = ∇×Z + ⟨f⟩e₃`, whose flux of `W₂` through `{y = 0}` is `J₁` and flux of
//! `W₁` through `{x = 0}` is `J₂`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{BoundaryData, DerivedBoundary};
use crate::error::{MhsError, Result};
use crate::spectral_core::{
    to_spectral, ScalarField3, SlabGrid3, SpectralField2, TorusGrid2, VectorField3, ZOps,
};

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Horizontal fluxes: `J₁` of `W₂` through `{y = 0}`, `J₂` of `W₁` through `{x = 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Fluxes {
    #[serde(rename = "J1")]
    pub j1: f64,
    #[serde(rename = "J2")]
    pub j2: f64,
}

/// Vector potential `Z` together with the exact z-derivatives of `Z₁, Z₂`.
#[derive(Debug, Clone)]
pub struct VectorPotential {
    pub z: VectorField3,
    /// `(∂₃Z₁, ∂₃Z₂)`.
    pub dz: VectorField3,
}

/// `e^{a+b−c}(1 − e^{−2a})(1 − e^{−2b})/(2(1 − e^{−2c}))` = `sinh a sinh b / sinh c`.
fn ss_over_s(a: f64, b: f64, c: f64) -> f64 {
    (a + b - c).exp() * (-(-2.0 * a).exp_m1()) * (-(-2.0 * b).exp_m1()) / (-2.0 * (-2.0 * c).exp_m1())
}

/// `sinh a cosh b / sinh c`.
fn sc_over_s(a: f64, b: f64, c: f64) -> f64 {
    (a + b - c).exp() * (-(-2.0 * a).exp_m1()) * (1.0 + (-2.0 * b).exp()) / (-2.0 * (-2.0 * c).exp_m1())
}

/// z-weights of one radial wavenumber `k = |ξ|`.
#[derive(Debug, Clone)]
pub struct ModeWeights {
    /// `g[i·nn + s]`: weight of `ĵ(z_s)` in `∫𝔊(z_i, ·)ĵ`.
    pub g: Vec<f64>,
    /// `dg[i·nn + s]`: weight of `ĵ(z_s)` in `∫∂_z𝔊(z_i, ·)ĵ`.
    pub dg: Vec<f64>,
    /// Weights of `∫ e^{−ks} u(s) ds`.
    pub we: Vec<f64>,
    /// Weights of `∫ M(k, s) u(s) ds`, `M = e^{−2kL}(e^{ks} − e^{−ks})/(1 − e^{−2kL})`.
    pub wm: Vec<f64>,
    /// `S⁻, S⁺` and their z-derivatives at every node.
    pub s_minus: Vec<f64>,
    pub s_plus: Vec<f64>,
    pub ds_minus: Vec<f64>,
    pub ds_plus: Vec<f64>,
}

impl ModeWeights {
    /// Weights of `𝒜`: `∫ sinh(k(L − s))/sinh(kL) u(s) ds`, i.e. row `z = 0` of `dg`.
    pub fn a_weights(&self) -> &[f64] {
        let nn = self.s_minus.len();
        &self.dg[..nn]
    }

    fn new(k: f64, zops: &ZOps) -> Self {
        let l = zops.grid.l;
        let z = zops.nodes();
        let nn = z.len();
        let mut g = vec![0.0; nn * nn];
        let mut dg = vec![0.0; nn * nn];
        for i in 0..nn {
            let zi = z[i];
            let (row_g, row_dg) = if k == 0.0 {
                (
                    zops.product_weights(|a, s| if a < i { s * (l - zi) / l } else { zi * (l - s) / l }),
                    zops.product_weights(|a, s| if a < i { -s / l } else { (l - s) / l }),
                )
            } else {
                (
                    zops.product_weights(|a, s| {
                        if a < i {
                            ss_over_s(k * s, k * (l - zi), k * l) / k
                        } else {
                            ss_over_s(k * zi, k * (l - s), k * l) / k
                        }
                    }),
                    zops.product_weights(|a, s| {
                        if a < i {
                            -sc_over_s(k * s, k * (l - zi), k * l)
                        } else {
                            sc_over_s(k * (l - s), k * zi, k * l)
                        }
                    }),
                )
            };
            g[i * nn..(i + 1) * nn].copy_from_slice(&row_g);
            dg[i * nn..(i + 1) * nn].copy_from_slice(&row_dg);
        }
        let we = zops.product_weights(|_, s| (-k * s).exp());
        let wm = zops.product_weights(|_, s| {
            if k == 0.0 {
                s / l
            } else {
                (k * s - 2.0 * k * l).exp() * (-(-2.0 * k * s).exp_m1()) / (-(-2.0 * k * l).exp_m1())
            }
        });
        let mut s_minus = vec![0.0; nn];
        let mut s_plus = vec![0.0; nn];
        let mut ds_minus = vec![0.0; nn];
        let mut ds_plus = vec![0.0; nn];
        for (i, &zi) in z.iter().enumerate() {
            if k == 0.0 {
                s_minus[i] = (l - zi) / l;
                s_plus[i] = zi / l;
                ds_minus[i] = -1.0 / l;
                ds_plus[i] = 1.0 / l;
            } else {
                let e = |a: f64| (a - k * l).exp() * (-(-2.0 * a).exp_m1()) / (-(-2.0 * k * l).exp_m1());
                let c = |a: f64| (a - k * l).exp() * (1.0 + (-2.0 * a).exp()) / (-(-2.0 * k * l).exp_m1());
                s_minus[i] = e(k * (l - zi));
                s_plus[i] = e(k * zi);
                ds_minus[i] = -k * c(k * (l - zi));
                ds_plus[i] = k * c(k * zi);
            }
        }
        Self {
            g,
            dg,
            we,
            wm,
            s_minus,
            s_plus,
            ds_minus,
            ds_plus,
        }
    }
}

/// Mode weights for every distinct `|ξ|²` of a grid.
#[derive(Debug, Clone)]
pub struct GreenTable {
    pub zops: ZOps,
    by_k2: HashMap<i64, ModeWeights>,
}

impl GreenTable {
    /// Precomputes the weights of all non-Nyquist modes of the grid.
    pub fn new(zops: ZOps) -> Self {
        let base = zops.grid.base;
        let mut k2s: Vec<i64> = (0..base.len())
            .filter(|&k| !base.is_nyquist(k))
            .map(|k| {
                let (m, n) = base.mode(k);
                m * m + n * n
            })
            .collect();
        k2s.sort_unstable();
        k2s.dedup();
        let by_k2 = k2s
            .par_iter()
            .map(|&k2| (k2, ModeWeights::new((k2 as f64).sqrt(), &zops)))
            .collect();
        Self { zops, by_k2 }
    }

    /// Weights for the mode `(m, n)`.
    pub fn mode(&self, m: i64, n: i64) -> &ModeWeights {
        &self.by_k2[&(m * m + n * n)]
    }

    /// Slab grid.
    pub fn grid(&self) -> SlabGrid3 {
        self.zops.grid
    }
}

/// Per-layer spectra of a scalar volume field, `out[k][mode]`.
pub fn layer_spectra(f: &ScalarField3) -> Vec<Vec<Complex64>> {
    (0..f.grid.nz_nodes())
        .into_par_iter()
        .map(|k| SpectralField2::from_real(f.grid.base, f.slice_values(k)).coeffs)
        .collect()
}

/// Assembles a volume field from per-layer spectra known to be real.
pub fn from_layer_spectra(grid: SlabGrid3, spec: &[Vec<Complex64>]) -> ScalarField3 {
    let layers: Vec<Vec<f64>> = spec
        .par_iter()
        .map(|c| {
            SpectralField2 {
                grid: grid.base,
                coeffs: c.clone(),
            }
            .to_real()
            .values
        })
        .collect();
    ScalarField3 {
        grid,
        values: layers.concat(),
    }
}

/// Tolerance of the slice-mean check on `j₃`.
pub fn slice_mean_tol(j_max: f64) -> f64 {
    1e-6 * j_max + 1e-14
}

/// Builds `Z` for the current `j`, the face functions in `derived`, and the fluxes.
pub fn solve_vector_potential(
    j: &VectorField3,
    derived: &DerivedBoundary,
    flux: Fluxes,
    table: &GreenTable,
) -> Result<VectorPotential> {
    let g = table.grid();
    if j.grid != g || j.comps.len() != 3 {
        return Err(MhsError::GridMismatch("current does not match the slab grid".into()));
    }
    let tol = slice_mean_tol(j.max_abs());
    for k in 0..g.nz_nodes() {
        let s = j.comps[2].slice_values(k);
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        if mean.abs() > tol {
            return Err(MhsError::SliceMeanViolation { node: k, value: mean });
        }
    }
    let spec: Vec<Vec<Vec<Complex64>>> = j.comps.iter().map(layer_spectra).collect();
    let h1m = to_spectral(&derived.h1_minus);
    let h1p = to_spectral(&derived.h1_plus);
    let h2m = to_spectral(&derived.h2_minus);
    let h2p = to_spectral(&derived.h2_plus);
    let base = g.base;
    let nn = g.nz_nodes();
    let l = g.l;
    // Per mode: Z1, Z2, Z3, dZ1, dZ2 over all layers.
    let per_mode: Vec<[Vec<Complex64>; 5]> = (0..base.len())
        .into_par_iter()
        .map(|q| {
            let zero = Complex64::new(0.0, 0.0);
            let mut out: [Vec<Complex64>; 5] = std::array::from_fn(|_| vec![zero; nn]);
            if base.is_nyquist(q) {
                return out;
            }
            let (m, n) = base.mode(q);
            let w = table.mode(m, n);
            let col = |c: usize| -> Vec<Complex64> { (0..nn).map(|k| spec[c][k][q]).collect() };
            let (j1, j2, j3) = (col(0), col(1), col(2));
            for i in 0..nn {
                let rg = &w.g[i * nn..(i + 1) * nn];
                let rd = &w.dg[i * nn..(i + 1) * nn];
                let (mut z1, mut z2, mut d1, mut d2) = (zero, zero, zero, zero);
                for s in 0..nn {
                    z1 += j1[s] * rg[s];
                    z2 += j2[s] * rg[s];
                    d1 += j1[s] * rd[s];
                    d2 += j2[s] * rd[s];
                }
                z1 += h1m.coeffs[q] * w.s_minus[i] + h1p.coeffs[q] * w.s_plus[i];
                z2 += h2m.coeffs[q] * w.s_minus[i] + h2p.coeffs[q] * w.s_plus[i];
                d1 += h1m.coeffs[q] * w.ds_minus[i] + h1p.coeffs[q] * w.ds_plus[i];
                d2 += h2m.coeffs[q] * w.ds_minus[i] + h2p.coeffs[q] * w.ds_plus[i];
                if m == 0 && n == 0 {
                    let zi = g.z(i);
                    let a1 = FOUR_PI2 * flux.j1 / (2.0 * PI * l);
                    let a2 = FOUR_PI2 * flux.j2 / (2.0 * PI * l);
                    z1 += a1 * zi;
                    d1 += a1;
                    z2 -= a2 * zi;
                    d2 -= a2;
                } else {
                    let k2 = (m * m + n * n) as f64;
                    let im = Complex64::new(0.0, m as f64);
                    let inn = Complex64::new(0.0, n as f64);
                    out[2][i] = (j3[i] - im * d1 - inn * d2) / k2;
                }
                out[0][i] = z1;
                out[1][i] = z2;
                out[3][i] = d1;
                out[4][i] = d2;
            }
            out
        })
        .collect();
    let field = |c: usize| -> ScalarField3 {
        let spec: Vec<Vec<Complex64>> = (0..nn)
            .map(|k| per_mode.iter().map(|pm| pm[c][k]).collect())
            .collect();
        from_layer_spectra(g, &spec)
    };
    Ok(VectorPotential {
        z: VectorField3 {
            grid: g,
            comps: vec![field(0), field(1), field(2)],
        },
        dz: VectorField3 {
            grid: g,
            comps: vec![field(3), field(4)],
        },
    })
}

/// `W = ∇×Z + f_mean·e₃`, horizontal derivatives spectral, `∂₃Z₁, ∂₃Z₂` exact.
pub fn assemble_field(pot: &VectorPotential, f_mean: f64) -> VectorField3 {
    let g = pot.z.grid;
    let layers: Vec<[Vec<f64>; 3]> = (0..g.nz_nodes())
        .into_par_iter()
        .map(|k| {
            let s = |f: &ScalarField3| SpectralField2::from_real(g.base, f.slice_values(k));
            let (z1, z2, z3) = (s(&pot.z.comps[0]), s(&pot.z.comps[1]), s(&pot.z.comps[2]));
            let d1 = pot.dz.comps[0].slice_values(k);
            let d2 = pot.dz.comps[1].slice_values(k);
            let z3y = z3.dy().to_real().values;
            let z3x = z3.dx().to_real().values;
            let w3 = z2.dx().axpby(1.0, &z1.dy(), -1.0).to_real().values;
            [
                z3y.iter().zip(d2).map(|(a, b)| a - b).collect(),
                d1.iter().zip(&z3x).map(|(a, b)| a - b).collect(),
                w3.iter().map(|v| v + f_mean).collect(),
            ]
        })
        .collect();
    let comps = (0..3)
        .map(|c| ScalarField3 {
            grid: g,
            values: layers.iter().flat_map(|l| l[c].iter().copied()).collect(),
        })
        .collect();
    VectorField3 { grid: g, comps }
}

/// Residuals of a div-curl solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DivCurlReport {
    /// `‖∇×W − j‖∞`.
    pub curl: f64,
    /// `‖∇·W‖∞`.
    pub div: f64,
    /// `‖W₃(z=0) − f_minus‖∞`.
    pub bn_minus: f64,
    /// `‖W₃(z=L) − f_plus‖∞`.
    pub bn_plus: f64,
    /// Measured fluxes.
    pub flux: Fluxes,
}

/// `∇×W` with spectral horizontal and finite-difference vertical derivatives.
pub fn curl(w: &VectorField3, zops: &ZOps) -> VectorField3 {
    let g = w.grid;
    let n = g.slice_len();
    let dz = |c: usize, k: usize| -> Vec<f64> {
        let (start, wts) = zops.derivative_stencil(k);
        let mut out = vec![0.0; n];
        for (j, wj) in wts.iter().enumerate() {
            for (o, v) in out.iter_mut().zip(w.comps[c].slice_values(start + j)) {
                *o += wj * v;
            }
        }
        out
    };
    let layers: Vec<[Vec<f64>; 3]> = (0..g.nz_nodes())
        .into_par_iter()
        .map(|k| {
            let s = |c: usize| SpectralField2::from_real(g.base, w.comps[c].slice_values(k));
            let (w1, w2, w3) = (s(0), s(1), s(2));
            let w3y = w3.dy().to_real().values;
            let w3x = w3.dx().to_real().values;
            let h = w2.dx().axpby(1.0, &w1.dy(), -1.0).to_real().values;
            let d1 = dz(0, k);
            let d2 = dz(1, k);
            [
                w3y.iter().zip(&d2).map(|(a, b)| a - b).collect(),
                d1.iter().zip(&w3x).map(|(a, b)| a - b).collect(),
                h,
            ]
        })
        .collect();
    let comps = (0..3)
        .map(|c| ScalarField3 {
            grid: g,
            values: layers.iter().flat_map(|l| l[c].iter().copied()).collect(),
        })
        .collect();
    VectorField3 { grid: g, comps }
}

/// Fluxes of `W₂` through `{y = 0}` and of `W₁` through `{x = 0}`.
pub fn measure_fluxes(w: &VectorField3, zops: &ZOps) -> Fluxes {
    let g = w.grid;
    let base: TorusGrid2 = g.base;
    let nn = g.nz_nodes();
    let line_x: Vec<f64> = (0..nn)
        .map(|k| {
            let s = w.comps[1].slice_values(k);
            (0..base.n_x).map(|i| s[base.idx(i, 0)]).sum::<f64>() * base.dx()
        })
        .collect();
    let line_y: Vec<f64> = (0..nn)
        .map(|k| {
            let s = w.comps[0].slice_values(k);
            (0..base.n_y).map(|j| s[base.idx(0, j)]).sum::<f64>() * base.dy()
        })
        .collect();
    Fluxes {
        j1: zops.cumulative_integral(&line_x)[nn - 1],
        j2: zops.cumulative_integral(&line_y)[nn - 1],
    }
}

/// Residuals of `W` against `j` and the normal data.
pub fn divcurl_report(w: &VectorField3, j: &VectorField3, data: &BoundaryData, zops: &ZOps) -> DivCurlReport {
    let g = w.grid;
    let c = curl(w, zops);
    let top = g.nz_nodes() - 1;
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    DivCurlReport {
        curl: c.max_abs_diff(j),
        div: crate::transport::divergence(w, zops).max_abs(),
        bn_minus: diff(w.comps[2].slice_values(0), &data.f_minus.values),
        bn_plus: diff(w.comps[2].slice_values(top), &data.f_plus.values),
        flux: measure_fluxes(w, zops),
    }
}

/// Full div-curl solve: checks compatibility, builds `Z`, assembles `W`, reports residuals.
pub fn divcurl_solve(
    j: &VectorField3,
    data: &BoundaryData,
    derived: &DerivedBoundary,
    flux: Fluxes,
    table: &GreenTable,
) -> Result<(VectorField3, DivCurlReport)> {
    let (mm, mp) = (data.f_minus.mean(), data.f_plus.mean());
    if (mm - mp).abs() > crate::boundary_data::COMPATIBILITY_TOL {
        return Err(MhsError::CompatibilityViolation {
            mean_minus: mm,
            mean_plus: mp,
        });
    }
    let pot = solve_vector_potential(j, derived, flux, table)?;
    let w = assemble_field(&pot, derived.f_mean);
    let report = divcurl_report(&w, j, data, &table.zops);
    Ok((w, report))
}
