//! Nonlocal equation for the inflow current `j₀ = (j₀¹, j₀², j₀³)`.
//!
//! The tangential trace `(W₁, W₂)|_{z=0} = g` of the div-curl solution depends
//! on `j` through `∂₃Ẑ_ℓ(0) = 𝒜ĵ_ℓ + Ĥ_ℓ`, where
//! `𝒜θ(ξ) = ∫₀^L sinh(|ξ|(L−s))/sinh(|ξ|L) θ̂(ξ, s) ds`. Writing the transported
//! current as `j = j₀∘Ψ⁻¹ + δj`, the change of variables `r = Ψ_s(η)` gives
//! `𝒜[u∘Ψ⁻¹] = 𝒯₀u + Σ_κ 𝒯_κu` with `𝒯₀ = 𝔪(ξ)` and four flow-dependent
//! operators whose Fourier coefficients are
//!
//! `(𝒯_κu)^(ξ) = ∫ a^κ_ξ(η) e^{−iξ·η} u(η) dη`,
//!
//! * `a¹ = ∫ e^{−|ξ|s}(e^{−iξ·Λ} − 1)(1 + Θ) ds`, `a² = ∫ e^{−|ξ|s} Θ ds`,
//! * `a³ = −∫ M(ξ, s)(e^{−iξ·Λ} − 1)(1 + Θ) ds`, `a⁴ = −∫ M(ξ, s) Θ ds`.
//!
//! Combining the trace with the divergence constraint at `z = 0` yields the
//! linear fixed-point equation `u = 𝒢 + Υu` for `u = (j₀¹, j₀²)`, solved by
//! damped iteration (a Neumann series). Inside it `ℛ_aℛ_b` denotes the real
//! symbol `ξ_aξ_b/|ξ|²` and `ℛ_a² − id` the symbol `ξ_a²/|ξ|² − 1` (`−1` at `ξ = 0`).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{BoundaryData, DerivedBoundary};
use crate::cli_io::config::SolverConfig;
use crate::divcurl::{layer_spectra, Fluxes, GreenTable};
use crate::error::{MhsError, Result};
use crate::spectral_core::multipliers::{bracket_xx, bracket_yy, m_symbol, norm, proj};
use crate::spectral_core::{
    to_spectral, ScalarField2, ScalarField3, SpectralField2, TorusGrid2, VectorField3, ZOps,
};
use crate::transport::{phase, transport_delta, transport_delta_horizontal, FlowData};

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Inflow current on the face `z = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurrentBoundary {
    pub j0_1: ScalarField2,
    pub j0_2: ScalarField2,
    pub j0_3: ScalarField2,
}

impl CurrentBoundary {
    /// Zero current.
    pub fn zeros(grid: TorusGrid2) -> Self {
        Self {
            j0_1: ScalarField2::zeros(grid),
            j0_2: ScalarField2::zeros(grid),
            j0_3: ScalarField2::zeros(grid),
        }
    }

    /// Largest absolute value over the three components.
    pub fn max_abs(&self) -> f64 {
        self.j0_1.max_abs().max(self.j0_2.max_abs()).max(self.j0_3.max_abs())
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            (&self.j0_1, &other.j0_1),
            (&self.j0_2, &other.j0_2),
            (&self.j0_3, &other.j0_3),
        ]
        .iter()
        .map(|(a, b)| crate::spectral_core::max_abs_diff(&a.values, &b.values))
        .fold(0.0, f64::max)
    }
}

/// Fourier coefficients of the four flow-dependent operators `𝒯_κ`.
#[derive(Debug, Clone)]
pub struct KernelCoeffs {
    pub grid: TorusGrid2,
    pub l: f64,
    /// `c[κ−1][q·N + p] = (2π)²/N · a^κ_{ξ_q}(η_p) e^{−iξ_q·η_p}`, `N = n_x n_y`.
    c: [Vec<Complex64>; 4],
}

impl KernelCoeffs {
    /// Integrates the four kernels over `s` for every mode and surface node.
    pub fn build(flow: &FlowData, table: &GreenTable) -> Self {
        let g = flow.grid;
        let base = g.base;
        let nsurf = base.len();
        let nn = g.nz_nodes();
        let scale = FOUR_PI2 / nsurf as f64;
        let lam1 = &flow.lambda.comps[0].values;
        let lam2 = &flow.lambda.comps[1].values;
        let theta = &flow.theta.values;
        let rows: Vec<[Vec<Complex64>; 4]> = (0..nsurf)
            .into_par_iter()
            .map(|q| {
                let zero = Complex64::new(0.0, 0.0);
                let mut out: [Vec<Complex64>; 4] = std::array::from_fn(|_| vec![zero; nsurf]);
                if base.is_nyquist(q) {
                    return out;
                }
                let (m, n) = base.mode(q);
                let w = table.mode(m, n);
                for p in 0..nsurf {
                    let (x, y) = base.coords(p);
                    let (mut a1, mut a2, mut a3, mut a4) = (zero, 0.0, zero, 0.0);
                    for k in 0..nn {
                        let i = k * nsurf + p;
                        let th = theta[i];
                        let e = (phase(m, n, lam1[i], lam2[i]) - 1.0) * (1.0 + th);
                        a1 += e * w.we[k];
                        a2 += th * w.we[k];
                        a3 -= e * w.wm[k];
                        a4 -= th * w.wm[k];
                    }
                    let ph = Complex64::from_polar(scale, -(m as f64 * x + n as f64 * y));
                    out[0][p] = a1 * ph;
                    out[1][p] = ph * a2;
                    out[2][p] = a3 * ph;
                    out[3][p] = ph * a4;
                }
                out
            })
            .collect();
        let c = std::array::from_fn(|kappa| {
            let mut v = Vec::with_capacity(nsurf * nsurf);
            for r in &rows {
                v.extend_from_slice(&r[kappa]);
            }
            v
        });
        Self { grid: base, l: g.l, c }
    }

    /// `𝒯_κu` (coefficients, without `𝒯₀⁻¹`) for the kernels selected by `kappas`.
    fn apply_raw(&self, kappas: &[usize], u: &[f64]) -> SpectralField2 {
        let nsurf = self.grid.len();
        let coeffs = (0..nsurf)
            .into_par_iter()
            .map(|q| {
                let mut s = Complex64::new(0.0, 0.0);
                for &kappa in kappas {
                    let row = &self.c[kappa - 1][q * nsurf..(q + 1) * nsurf];
                    for (c, v) in row.iter().zip(u) {
                        s += c * v;
                    }
                }
                s
            })
            .collect();
        SpectralField2 {
            grid: self.grid,
            coeffs,
        }
    }

    /// Raw coefficient `a^κ_ξ(η)` (without the phase and quadrature factor).
    pub fn coefficient(&self, kappa: usize, m: i64, n: i64, p: usize) -> Complex64 {
        let q = self.grid.mode_index(m, n).expect("mode in range");
        let nsurf = self.grid.len();
        let (x, y) = self.grid.coords(p);
        let ph = Complex64::from_polar(FOUR_PI2 / nsurf as f64, -(m as f64 * x + n as f64 * y));
        self.c[kappa - 1][q * nsurf + p] / ph
    }

    /// `𝒯_κu` for one `κ ∈ 1..=4`, as coefficients.
    pub fn t_kappa_raw(&self, kappa: usize, u: &ScalarField2) -> SpectralField2 {
        self.apply_raw(&[kappa], &u.values)
    }

    /// `Σ_κ 𝒯_κu`, as coefficients.
    pub fn t_sum_raw(&self, u: &ScalarField2) -> SpectralField2 {
        self.apply_raw(&[1, 2, 3, 4], &u.values)
    }

    /// `Σ_κ 𝖳_κu = 𝒯₀⁻¹Σ_κ𝒯_κu`, as coefficients.
    pub fn t_sum(&self, u: &ScalarField2) -> SpectralField2 {
        self.t_sum_raw(u).t0_inverse(self.l)
    }
}

/// `𝖳_κu = 𝒯₀⁻¹𝒯_κu` for `κ ∈ 1..=4`.
pub fn t_kappa_apply(kappa: usize, kc: &KernelCoeffs, u: &ScalarField2) -> Result<ScalarField2> {
    if !(1..=4).contains(&kappa) {
        return Err(MhsError::InvalidConfig(format!("kernel index {kappa} must be 1..=4")));
    }
    Ok(kc.t_kappa_raw(kappa, u).t0_inverse(kc.l).to_real())
}

/// Coefficients of `𝒜θ`: `Σ_k W_k(|ξ|) θ̂(ξ, z_k)` with the `𝒜` product weights.
pub fn op_a_spectral(theta: &ScalarField3, table: &GreenTable) -> SpectralField2 {
    let spec = layer_spectra(theta);
    let base = theta.grid.base;
    let coeffs = (0..base.len())
        .map(|q| {
            if base.is_nyquist(q) {
                return Complex64::new(0.0, 0.0);
            }
            let (m, n) = base.mode(q);
            let w = table.mode(m, n).a_weights();
            spec.iter().zip(w).map(|(s, wk)| s[q] * wk).sum()
        })
        .collect();
    SpectralField2 { grid: base, coeffs }
}

/// `𝒜θ` as a surface field.
pub fn op_a_apply(theta: &ScalarField3, table: &GreenTable) -> ScalarField2 {
    op_a_spectral(theta, table).to_real()
}

/// `(𝖲₁, 𝖲₂)` from the coefficients of `𝒜δj¹` and `𝒜δj²`.
pub fn op_s_from_a(a1: &SpectralField2, a2: &SpectralField2, l: f64) -> (SpectralField2, SpectralField2) {
    let g = a1.grid;
    let mut s1 = SpectralField2::zeros(g);
    let mut s2 = SpectralField2::zeros(g);
    for q in 0..g.len() {
        if g.is_nyquist(q) {
            continue;
        }
        let (m, n) = g.mode(q);
        let inv = 1.0 / m_symbol(norm(m, n), l);
        let pxy = proj(m, n, m, n);
        s1.coeffs[q] = (a1.coeffs[q] * pxy + a2.coeffs[q] * bracket_yy(m, n)) * inv;
        s2.coeffs[q] = (a1.coeffs[q] * bracket_xx(m, n) + a2.coeffs[q] * pxy) * inv;
    }
    (s1, s2)
}

/// `(𝖲₁, 𝖲₂)` of a deviation current.
pub fn op_s(delta_j: &VectorField3, table: &GreenTable) -> (ScalarField2, ScalarField2) {
    let a1 = op_a_spectral(&delta_j.comps[0], table);
    let a2 = op_a_spectral(&delta_j.comps[1], table);
    let (s1, s2) = op_s_from_a(&a1, &a2, delta_j.grid.l);
    (s1.to_real(), s2.to_real())
}

/// Trace of `b` and of the derivatives of `b₃` on the face `z = 0`.
#[derive(Debug, Clone)]
pub struct SurfaceB {
    pub b1: ScalarField2,
    pub b2: ScalarField2,
    pub b3: ScalarField2,
    pub b3x: ScalarField2,
    pub b3y: ScalarField2,
    pub b3z: ScalarField2,
}

impl SurfaceB {
    /// Extracts the face values; `∂₃b₃` uses the one-sided z-stencil.
    pub fn new(b: &VectorField3, zops: &ZOps) -> Self {
        let g = b.grid.base;
        let s = |c: usize| ScalarField2 {
            grid: g,
            values: b.comps[c].slice_values(0).to_vec(),
        };
        let b3 = s(2);
        let b3s = to_spectral(&b3);
        let n = g.len();
        let (start, w) = zops.derivative_stencil(0);
        let mut dz = vec![0.0; n];
        for (j, wj) in w.iter().enumerate() {
            for (d, v) in dz.iter_mut().zip(b.comps[2].slice_values(start + j)) {
                *d += wj * v;
            }
        }
        Self {
            b1: s(0),
            b2: s(1),
            b3x: b3s.dx().to_real(),
            b3y: b3s.dy().to_real(),
            b3,
            b3z: ScalarField2 { grid: g, values: dz },
        }
    }

    /// Face values of `b ≡ 0`.
    pub fn zeros(grid: TorusGrid2) -> Self {
        let z = ScalarField2::zeros(grid);
        Self {
            b1: z.clone(),
            b2: z.clone(),
            b3: z.clone(),
            b3x: z.clone(),
            b3y: z.clone(),
            b3z: z,
        }
    }

    /// `−∂₁b₃u¹ − ∂₂b₃u² − b₃∂₁u¹ − b₃∂₂u²`.
    fn h_core(&self, u1: &ScalarField2, u2: &ScalarField2) -> SpectralField2 {
        let d1 = to_spectral(u1).dx().to_real();
        let d2 = to_spectral(u2).dy().to_real();
        let v: Vec<f64> = (0..u1.values.len())
            .map(|p| {
                -self.b3x.values[p] * u1.values[p] - self.b3y.values[p] * u2.values[p]
                    - self.b3.values[p] * (d1.values[p] + d2.values[p])
            })
            .collect();
        SpectralField2::from_real(u1.grid, &v)
    }

    /// `b₁∂₁j₀³ + b₂∂₂j₀³ − ∂₃b₃j₀³`.
    fn j3_core(&self, j3: &ScalarField2) -> SpectralField2 {
        let s = to_spectral(j3);
        let (dx, dy) = (s.dx().to_real(), s.dy().to_real());
        let v: Vec<f64> = (0..j3.values.len())
            .map(|p| {
                self.b1.values[p] * dx.values[p] + self.b2.values[p] * dy.values[p]
                    - self.b3z.values[p] * j3.values[p]
            })
            .collect();
        SpectralField2::from_real(j3.grid, &v)
    }

    /// Residual of the divergence constraint at `z = 0`:
    /// `(1+b₃)(∂₁j₀¹ + ∂₂j₀²) + ∂_ℓb₃ j₀^ℓ − b₁∂₁j₀³ − b₂∂₂j₀³`.
    pub fn constraint_residual(&self, j0: &CurrentBoundary) -> ScalarField2 {
        let d = to_spectral(&j0.j0_1).dx().add(&to_spectral(&j0.j0_2).dy()).to_real();
        let h = self.h_core(&j0.j0_1, &j0.j0_2).to_real();
        let c = self.j3_core(&j0.j0_3).to_real();
        ScalarField2 {
            grid: d.grid,
            values: (0..d.values.len())
                .map(|p| d.values[p] - h.values[p] - c.values[p])
                .collect(),
        }
    }
}

/// `(𝖧₁^⋆, 𝖧₂^⋆)` with `𝖧₁^⋆ = ℬ_y(−∂₁b₃u¹ − ∂₂b₃u² − b₃∂₁u¹ − b₃∂₂u²)` and `𝖧₂^⋆` the same with `ℬ_x`.
pub fn op_h_star(sb: &SurfaceB, j0: &CurrentBoundary) -> (ScalarField2, ScalarField2) {
    let core = sb.h_core(&j0.j0_1, &j0.j0_2);
    (core.op_b_y().to_real(), core.op_b_x().to_real())
}

/// Projects `(j₀¹, j₀²)` so that the divergence constraint at `z = 0` holds for
/// the given face trace of `b` and `j₀³`, keeping the solenoidal part of `seed`.
pub fn enforce_divergence_constraint(
    sb: &SurfaceB,
    j0_3: &ScalarField2,
    seed_1: &ScalarField2,
    seed_2: &ScalarField2,
    tol: f64,
    max_iter: usize,
) -> Result<CurrentBoundary> {
    let (s1, s2) = (to_spectral(seed_1), to_spectral(seed_2));
    // Solenoidal part of the seed: remove its gradient component.
    let phi_seed = s1.dx().add(&s2.dy()).apply_real_multiplier(|m, n| {
        if m == 0 && n == 0 {
            0.0
        } else {
            1.0 / (m * m + n * n) as f64
        }
    });
    let base1 = s1.add(&phi_seed.dx());
    let base2 = s2.add(&phi_seed.dy());
    let c = sb.j3_core(j0_3);
    let mut u = CurrentBoundary {
        j0_1: base1.to_real(),
        j0_2: base2.to_real(),
        j0_3: j0_3.clone(),
    };
    let mut delta = f64::NAN;
    for _ in 0..max_iter {
        // div u = h_core(u) + j3_core, solved for the gradient part.
        let rhs = sb.h_core(&u.j0_1, &u.j0_2).add(&c);
        let phi = rhs.apply_real_multiplier(|m, n| {
            if m == 0 && n == 0 {
                0.0
            } else {
                -1.0 / (m * m + n * n) as f64
            }
        });
        let next = CurrentBoundary {
            j0_1: base1.add(&phi.dx()).to_real(),
            j0_2: base2.add(&phi.dy()).to_real(),
            j0_3: j0_3.clone(),
        };
        delta = next.max_abs_diff(&u);
        u = next;
        if delta < tol {
            return Ok(u);
        }
    }
    Err(MhsError::NeumannDivergence {
        iterations: max_iter,
        last_increment: delta,
    })
}

/// Statistics of the Neumann iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NeumannStats {
    pub iterations: usize,
    pub last_increment: f64,
    /// Ratio of the last two increments (0 when fewer than two steps were taken).
    pub contraction: f64,
}

/// Everything the current equation needs for one perturbation `b`.
pub struct CurrentOperator<'a> {
    pub flow: &'a FlowData,
    pub kc: &'a KernelCoeffs,
    pub table: &'a GreenTable,
    pub sb: SurfaceB,
    pub f_minus: ScalarField2,
    pub j0_3: ScalarField2,
}

impl<'a> CurrentOperator<'a> {
    /// Prepares the operator for `b` with its flow and kernel coefficients.
    pub fn new(
        b: &VectorField3,
        flow: &'a FlowData,
        kc: &'a KernelCoeffs,
        table: &'a GreenTable,
        data: &BoundaryData,
        derived: &DerivedBoundary,
    ) -> Self {
        Self {
            flow,
            kc,
            table,
            sb: SurfaceB::new(b, &table.zops),
            f_minus: data.f_minus.clone(),
            j0_3: derived.j0_3.clone(),
        }
    }

    fn l(&self) -> f64 {
        self.table.grid().l
    }

    /// `(𝖲₁, 𝖲₂)` coefficients of `δj` for the initial data `(u¹, u², u³)`.
    fn s_of(&self, u: [&[f64]; 3]) -> (SpectralField2, SpectralField2) {
        let [d1, d2] = transport_delta_horizontal(self.flow, u);
        let a1 = op_a_spectral(&d1, self.table);
        let a2 = op_a_spectral(&d2, self.table);
        op_s_from_a(&a1, &a2, self.l())
    }

    /// `𝒢 = (𝒢₁, 𝒢₂)` as coefficients.
    pub fn rhs(&self, derived: &DerivedBoundary, data: &BoundaryData) -> (SpectralField2, SpectralField2) {
        let grid = self.j0_3.grid;
        let gg1 = to_spectral(&derived.g1);
        let gg2 = to_spectral(&derived.g2);
        let q = self.sb.j3_core(&self.j0_3);
        let zero = vec![0.0; grid.len()];
        let (s1, s2) = self.s_of([&zero, &zero, &self.j0_3.values]);
        let (bx, by) = (q.op_b_x(), q.op_b_y());
        let mut r1 = SpectralField2::zeros(grid);
        let mut r2 = SpectralField2::zeros(grid);
        for k in 0..grid.len() {
            if grid.is_nyquist(k) {
                continue;
            }
            let (m, n) = grid.mode(k);
            let (pxx, pxy, pyy) = (proj(m, m, m, n), proj(m, n, m, n), proj(n, n, m, n));
            r1.coeffs[k] = gg2.coeffs[k] * pyy + gg1.coeffs[k] * pxy + bx.coeffs[k];
            r2.coeffs[k] = -gg1.coeffs[k] * pxx - gg2.coeffs[k] * pxy + by.coeffs[k];
        }
        let r1 = r1.add(&s2.mean_free());
        let r2 = r2.add(&s1.mean_free());
        let m1 = self.j0_3.mul(data.g1()).mean();
        let m2 = self.j0_3.mul(data.g2()).mean();
        let mut r1 = r1;
        let mut r2 = r2;
        r1.coeffs[0] += FOUR_PI2 * m1;
        r2.coeffs[0] += FOUR_PI2 * m2;
        (r1, r2)
    }

    /// `Υu` as coefficients.
    pub fn upsilon_apply(&self, u1: &ScalarField2, u2: &ScalarField2) -> (SpectralField2, SpectralField2) {
        let grid = u1.grid;
        let t1 = self.kc.t_sum(u1);
        let t2 = self.kc.t_sum(u2);
        let zero = vec![0.0; grid.len()];
        let (s1, s2) = self.s_of([&u1.values, &u2.values, &zero]);
        let hcore = self.sb.h_core(u1, u2);
        let (h1s, h2s) = (hcore.op_b_y(), hcore.op_b_x());
        let mut o1 = SpectralField2::zeros(grid);
        let mut o2 = SpectralField2::zeros(grid);
        for k in 1..grid.len() {
            if grid.is_nyquist(k) {
                continue;
            }
            let (m, n) = grid.mode(k);
            let pxy = proj(m, n, m, n);
            o1.coeffs[k] = t1.coeffs[k] * bracket_xx(m, n) + t2.coeffs[k] * pxy;
            o2.coeffs[k] = t1.coeffs[k] * pxy + t2.coeffs[k] * bracket_yy(m, n);
        }
        let mut o1 = o1.add(&s2.mean_free()).add(&h2s);
        let mut o2 = o2.add(&s1.mean_free()).add(&h1s);
        o1.coeffs[0] = Complex64::new(-FOUR_PI2 * u1.mul(&self.f_minus).mean(), 0.0);
        o2.coeffs[0] = Complex64::new(-FOUR_PI2 * u2.mul(&self.f_minus).mean(), 0.0);
        (o1, o2)
    }

    /// Solves `u = 𝒢 + Υu` by damped fixed-point iteration from `u₀ = 𝒢`.
    pub fn solve_j0(
        &self,
        rhs: &(SpectralField2, SpectralField2),
        config: &SolverConfig,
    ) -> Result<(CurrentBoundary, NeumannStats)> {
        let r1 = rhs.0.to_real();
        let r2 = rhs.1.to_real();
        let mut u1 = r1.clone();
        let mut u2 = r2.clone();
        let d = config.damping;
        let mut stats = NeumannStats::default();
        let mut prev_inc = f64::INFINITY;
        let mut growth = 0;
        for it in 1..=config.max_neumann {
            let (y1, y2) = self.upsilon_apply(&u1, &u2);
            let n1 = r1.axpby(1.0, &y1.to_real(), 1.0);
            let n2 = r2.axpby(1.0, &y2.to_real(), 1.0);
            let n1 = u1.axpby(1.0 - d, &n1, d);
            let n2 = u2.axpby(1.0 - d, &n2, d);
            let inc = crate::spectral_core::max_abs_diff(&n1.values, &u1.values)
                .max(crate::spectral_core::max_abs_diff(&n2.values, &u2.values));
            if !inc.is_finite() {
                return Err(MhsError::NeumannDivergence {
                    iterations: it,
                    last_increment: inc,
                });
            }
            stats.contraction = if prev_inc.is_finite() && prev_inc > 0.0 { inc / prev_inc } else { 0.0 };
            growth = if inc > prev_inc { growth + 1 } else { 0 };
            u1 = n1;
            u2 = n2;
            stats.iterations = it;
            stats.last_increment = inc;
            if inc < config.j0_tol {
                return Ok((
                    CurrentBoundary {
                        j0_1: u1,
                        j0_2: u2,
                        j0_3: self.j0_3.clone(),
                    },
                    stats,
                ));
            }
            if growth >= 3 {
                return Err(MhsError::NeumannDivergence {
                    iterations: it,
                    last_increment: inc,
                });
            }
            prev_inc = inc;
        }
        Err(MhsError::NeumannDivergence {
            iterations: config.max_neumann,
            last_increment: stats.last_increment,
        })
    }

    /// Power-iteration estimate of the spectral radius of `Υ` in the max norm.
    pub fn contraction_estimate(&self, iterations: usize, seed: u64) -> f64 {
        let grid = self.j0_3.grid;
        let mut u1 = ScalarField2::from_fn(grid, |x, y| {
            (x + 0.3 * seed as f64).sin() * (2.0 * y).cos() + 0.5 * (x - y).cos()
        });
        let mut u2 = ScalarField2::from_fn(grid, |x, y| (2.0 * x).cos() * (y + 0.7).sin() - 0.25);
        let mut ratio = 0.0;
        for _ in 0..iterations {
            let norm = u1.max_abs().max(u2.max_abs());
            if norm == 0.0 {
                return 0.0;
            }
            let (y1, y2) = self.upsilon_apply(&u1, &u2);
            let (y1, y2) = (y1.to_real(), y2.to_real());
            let next = y1.max_abs().max(y2.max_abs());
            ratio = next / norm;
            if next == 0.0 {
                return 0.0;
            }
            u1 = y1.scaled(1.0 / next);
            u2 = y2.scaled(1.0 / next);
        }
        ratio
    }

    /// Flux constants that make the tangential trace hold in the zero mode.
    pub fn fluxes(&self, derived: &DerivedBoundary, j0: &CurrentBoundary) -> Fluxes {
        let l = self.l();
        let m0 = l / 2.0;
        let delta = transport_delta(self.flow, j0);
        let ad1 = op_a_spectral(&delta.comps[0], self.table).mean() / m0;
        let ad2 = op_a_spectral(&delta.comps[1], self.table).mean() / m0;
        let t1 = self.kc.t_sum(&j0.j0_1).mean();
        let t2 = self.kc.t_sum(&j0.j0_2).mean();
        let c = PI * l * l;
        Fluxes {
            j1: c * (derived.g2.mean() - j0.j0_1.mean() - t1 - ad1),
            j2: c * (derived.g1.mean() + j0.j0_2.mean() + t2 + ad2),
        }
    }
}

/// Assembled `(𝒢₁, 𝒢₂)` as surface fields.
pub fn build_rhs(op: &CurrentOperator<'_>, data: &BoundaryData, derived: &DerivedBoundary) -> (ScalarField2, ScalarField2) {
    let (r1, r2) = op.rhs(derived, data);
    (r1.to_real(), r2.to_real())
}

/// Converged `j₀` and the iteration statistics.
pub fn solve_j0(
    op: &CurrentOperator<'_>,
    data: &BoundaryData,
    derived: &DerivedBoundary,
    config: &SolverConfig,
) -> Result<(CurrentBoundary, NeumannStats)> {
    let rhs = op.rhs(derived, data);
    op.solve_j0(&rhs, config)
}
