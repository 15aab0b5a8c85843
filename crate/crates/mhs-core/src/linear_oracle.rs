//! Closed-form solution of the problem linearized about `B = e₃`.
//!
//! With `b = 0` the current is constant along vertical lines, `j = j₀`, and
//! every horizontal mode of the vector potential solves a constant-coefficient
//! ODE in `z`. For `k = |ξ| > 0` and `ℓ = 1, 2`
//!
//! `Ẑ_ℓ(z) = ĵ_ℓ (sinh kL − sinh kz − sinh k(L−z))/(k² sinh kL)
//!          + ĥ_ℓ⁻ sinh k(L−z)/sinh kL + ĥ_ℓ⁺ sinh kz/sinh kL`,
//!
//! while the zero mode is `ĵ_ℓ z(L−z)/2` plus the linear interpolation of the
//! face values plus the flux terms. `Ẑ₃` follows from
//! `k²Ẑ₃ = ĵ₃ − im∂₃Ẑ₁ − in∂₃Ẑ₂`, and the perturbation is `b = ∇×Z + ⟨f⟩e₃`.
//!
//! The inflow current is read off mode by mode from `𝖦`:
//! `ĵ₀¹ = (mnĜ₁ + n²Ĝ₂)/k²`, `ĵ₀² = −(m²Ĝ₁ + mnĜ₂)/k²`, `j₀³ = ∂₁g₂ − ∂₂g₁`,
//! with zero means, and the fluxes are `J₁ = πL²⟨𝖦₂⟩`, `J₂ = πL²⟨𝖦₁⟩`.
//!
//! Hyperbolic functions are evaluated directly, so this module stays
//! independent of the multiplier code used by the nonlinear pipeline.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::boundary_data::{BoundaryData, DerivedBoundary};
use crate::current_equation::CurrentBoundary;
use crate::divcurl::Fluxes;
use crate::error::{MhsError, Result};
use crate::spectral_core::{ScalarField2, ScalarField3, SlabGrid3, SpectralField2, TorusGrid2, VectorField3};

/// Largest `|ξ|L` for which `sinh(|ξ|L)` is evaluated without overflow.
const MAX_KL: f64 = 700.0;

/// Solution of the linearized problem.
#[derive(Debug, Clone)]
pub struct LinearSolution {
    pub j0: CurrentBoundary,
    /// Vector potential `Z`.
    pub z: VectorField3,
    /// Perturbation `b = B − e₃`.
    pub b: VectorField3,
    pub flux: Fluxes,
}

fn spectrum(f: &ScalarField2) -> Vec<Complex64> {
    SpectralField2::from_real(f.grid, &f.values).coeffs
}

fn real(grid: TorusGrid2, coeffs: Vec<Complex64>) -> ScalarField2 {
    SpectralField2 { grid, coeffs }.to_real()
}

/// Fluxes of the linearized problem.
pub fn linear_fluxes(derived: &DerivedBoundary) -> Fluxes {
    let c = PI * derived.l * derived.l;
    Fluxes {
        j1: c * derived.g2.mean(),
        j2: c * derived.g1.mean(),
    }
}

/// Inflow current of the linearized problem.
pub fn linear_j0(data: &BoundaryData, derived: &DerivedBoundary) -> CurrentBoundary {
    let grid = data.grid();
    let (gg1, gg2) = (spectrum(&derived.g1), spectrum(&derived.g2));
    let (g1, g2) = (spectrum(data.g1()), spectrum(data.g2()));
    let mut u1 = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut u2 = u1.clone();
    let mut u3 = u1.clone();
    for k in 0..grid.len() {
        let (m, n) = grid.mode(k);
        if grid.is_nyquist(k) || (m == 0 && n == 0) {
            continue;
        }
        let (mf, nf) = (m as f64, n as f64);
        let k2 = mf * mf + nf * nf;
        u1[k] = (gg1[k] * (mf * nf) + gg2[k] * (nf * nf)) / k2;
        u2[k] = -(gg1[k] * (mf * mf) + gg2[k] * (mf * nf)) / k2;
        u3[k] = Complex64::i() * (g2[k] * mf - g1[k] * nf);
    }
    CurrentBoundary {
        j0_1: real(grid, u1),
        j0_2: real(grid, u2),
        j0_3: real(grid, u3),
    }
}

/// Per-mode profile of `Ẑ_ℓ` and `∂₃Ẑ_ℓ` at height `z`.
fn profile(k: f64, l: f64, z: f64, j: Complex64, hm: Complex64, hp: Complex64) -> (Complex64, Complex64) {
    if k == 0.0 {
        let v = j * (z * (l - z) / 2.0) + hm * ((l - z) / l) + hp * (z / l);
        let d = j * (l / 2.0 - z) + (hp - hm) / l;
        return (v, d);
    }
    let s = (k * l).sinh();
    let v = j * (((k * l).sinh() - (k * z).sinh() - (k * (l - z)).sinh()) / (k * k * s))
        + hm * ((k * (l - z)).sinh() / s)
        + hp * ((k * z).sinh() / s);
    let d = j * (((k * (l - z)).cosh() - (k * z).cosh()) / (k * s)) - hm * (k * (k * (l - z)).cosh() / s)
        + hp * (k * (k * z).cosh() / s);
    (v, d)
}

/// Potential and perturbation field generated by a z-independent current `j₀`.
pub fn linear_field(
    j0: &CurrentBoundary,
    derived: &DerivedBoundary,
    flux: Fluxes,
    grid: SlabGrid3,
) -> Result<(VectorField3, VectorField3)> {
    let base = grid.base;
    let l = grid.l;
    let k_max = ((base.n_x * base.n_x + base.n_y * base.n_y) as f64).sqrt() / 2.0;
    if k_max * l > MAX_KL {
        return Err(MhsError::InvalidConfig(format!(
            "slab too tall for the closed-form solver: |ξ|L up to {}",
            k_max * l
        )));
    }
    let (j1, j2, j3) = (spectrum(&j0.j0_1), spectrum(&j0.j0_2), spectrum(&j0.j0_3));
    let (h1m, h1p) = (spectrum(&derived.h1_minus), spectrum(&derived.h1_plus));
    let (h2m, h2p) = (spectrum(&derived.h2_minus), spectrum(&derived.h2_plus));
    let four_pi2 = 4.0 * PI * PI;
    let zero = Complex64::new(0.0, 0.0);
    let nn = grid.nz_nodes();
    let mut zc: [Vec<ScalarField2>; 3] = Default::default();
    let mut bc: [Vec<ScalarField2>; 3] = Default::default();
    for kz in 0..nn {
        let z = grid.z(kz);
        let mut s = [vec![zero; base.len()], vec![zero; base.len()], vec![zero; base.len()]];
        let mut w = s.clone();
        for p in 0..base.len() {
            if base.is_nyquist(p) {
                continue;
            }
            let (m, n) = base.mode(p);
            let (mf, nf) = (m as f64, n as f64);
            let k = (mf * mf + nf * nf).sqrt();
            let (mut v1, mut d1) = profile(k, l, z, j1[p], h1m[p], h1p[p]);
            let (mut v2, mut d2) = profile(k, l, z, j2[p], h2m[p], h2p[p]);
            let v3 = if k == 0.0 {
                v1 += four_pi2 * flux.j1 * z / (2.0 * PI * l);
                d1 += four_pi2 * flux.j1 / (2.0 * PI * l);
                v2 -= four_pi2 * flux.j2 * z / (2.0 * PI * l);
                d2 -= four_pi2 * flux.j2 / (2.0 * PI * l);
                zero
            } else {
                (j3[p] - Complex64::i() * (d1 * mf + d2 * nf)) / (k * k)
            };
            let im = Complex64::new(0.0, mf);
            let in_ = Complex64::new(0.0, nf);
            s[0][p] = v1;
            s[1][p] = v2;
            s[2][p] = v3;
            w[0][p] = in_ * v3 - d2;
            w[1][p] = d1 - im * v3;
            w[2][p] = im * v2 - in_ * v1;
        }
        w[2][0] += four_pi2 * derived.f_mean;
        for c in 0..3 {
            zc[c].push(real(base, std::mem::take(&mut s[c])));
            bc[c].push(real(base, std::mem::take(&mut w[c])));
        }
    }
    let assemble = |layers: [Vec<ScalarField2>; 3]| -> Result<VectorField3> {
        let comps = layers
            .into_iter()
            .map(|l| ScalarField3::from_slices(grid, &l))
            .collect::<Result<Vec<_>>>()?;
        VectorField3::from_comps(comps)
    };
    Ok((assemble(zc)?, assemble(bc)?))
}

/// Full closed-form solution for the given data.
pub fn linear_solve(data: &BoundaryData, grid: SlabGrid3) -> Result<LinearSolution> {
    if data.grid() != grid.base {
        return Err(MhsError::GridMismatch(format!(
            "data grid {}x{} vs slab base {}x{}",
            data.grid().n_x,
            data.grid().n_y,
            grid.base.n_x,
            grid.base.n_y
        )));
    }
    let derived = DerivedBoundary::build(data, grid.l);
    let j0 = linear_j0(data, &derived);
    let flux = linear_fluxes(&derived);
    let (z, b) = linear_field(&j0, &derived, flux, grid)?;
    Ok(LinearSolution { j0, z, b, flux })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transport::divergence;
    use crate::spectral_core::ZOps;

    fn slab(n: usize, n_z: usize, l: f64) -> SlabGrid3 {
        SlabGrid3::new(TorusGrid2::square(n).unwrap(), n_z, l).unwrap()
    }

    fn sample(grid: TorusGrid2, eps: f64) -> BoundaryData {
        let f = ScalarField2::from_fn(grid, |x, y| eps * (x.cos() + 0.5 * (x + 2.0 * y).sin()));
        BoundaryData::new(
            f.clone(),
            f,
            ScalarField2::from_fn(grid, |_, y| eps * (y.sin() + 0.3)),
            ScalarField2::from_fn(grid, |x, y| eps * (x.sin() - 0.2 * (x - y).cos())),
        )
        .unwrap()
    }

    #[test]
    fn zero_data_give_zero_solution() {
        let g = slab(8, 8, 1.0);
        let sol = linear_solve(&BoundaryData::zeros(g.base), g).unwrap();
        assert_eq!(sol.b.max_abs(), 0.0);
        assert_eq!(sol.j0.max_abs(), 0.0);
        assert_eq!(sol.flux, Fluxes::default());
    }

    #[test]
    fn constant_g2_flux() {
        let g = slab(8, 8, 1.3);
        let mut der = DerivedBoundary::build(&BoundaryData::zeros(g.base), g.l);
        der.g2 = ScalarField2::from_fn(g.base, |_, _| 0.25);
        let fl = linear_fluxes(&der);
        assert!((fl.j1 - PI * 1.69 * 0.25).abs() < 1e-14);
        assert_eq!(fl.j2, 0.0);
    }

    #[test]
    fn inflow_current_is_divergence_free_per_mode() {
        let g = slab(16, 8, 1.0);
        let data = sample(g.base, 1e-2);
        let der = DerivedBoundary::build(&data, g.l);
        let j0 = linear_j0(&data, &der);
        let (u1, u2) = (spectrum(&j0.j0_1), spectrum(&j0.j0_2));
        for p in 0..g.base.len() {
            let (m, n) = g.base.mode(p);
            let d = u1[p] * m as f64 + u2[p] * n as f64;
            assert!(d.norm() < 1e-14, "mode ({m},{n}): {d}");
        }
        assert!(j0.j0_1.mean().abs() < 1e-16 && j0.j0_2.mean().abs() < 1e-16);
    }

    #[test]
    fn potential_bracket_matches_scalar_formula() {
        let g = slab(8, 16, 1.0);
        let der = DerivedBoundary::build(&BoundaryData::zeros(g.base), g.l);
        let mut j0 = CurrentBoundary::zeros(g.base);
        j0.j0_2 = ScalarField2::from_fn(g.base, |x, _| (2.0 * x).cos());
        let (z, _) = linear_field(&j0, &der, Fluxes::default(), g).unwrap();
        let k: f64 = 2.0;
        for kz in 0..g.nz_nodes() {
            let zz = g.z(kz);
            let br = (k.sinh() - (k * zz).sinh() - (k * (1.0 - zz)).sinh()) / (k * k * k.sinh());
            for (p, v) in z.comps[1].slice_values(kz).iter().enumerate() {
                let (x, _) = g.base.coords(p);
                assert!((v - br * (2.0 * x).cos()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn field_satisfies_linear_boundary_value_problem() {
        let g = slab(16, 32, 1.0);
        let data = sample(g.base, 1e-2);
        let sol = linear_solve(&data, g).unwrap();
        let zops = ZOps::new(g, 8, 1).unwrap();
        let top = g.nz_nodes() - 1;
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        assert!(diff(sol.b.comps[2].slice_values(0), &data.f_minus.values) < 1e-13);
        assert!(diff(sol.b.comps[2].slice_values(top), &data.f_plus.values) < 1e-13);
        assert!(diff(sol.b.comps[0].slice_values(0), &data.g1().values) < 1e-12);
        assert!(diff(sol.b.comps[1].slice_values(0), &data.g2().values) < 1e-12);
        assert!(divergence(&sol.b, &zops).max_abs() < 1e-9);
        let c = crate::divcurl::curl(&sol.b, &zops);
        for kz in 0..g.nz_nodes() {
            assert!(diff(c.comps[0].slice_values(kz), &sol.j0.j0_1.values) < 1e-9);
            assert!(diff(c.comps[1].slice_values(kz), &sol.j0.j0_2.values) < 1e-9);
            assert!(diff(c.comps[2].slice_values(kz), &sol.j0.j0_3.values) < 1e-12);
        }
    }
}
