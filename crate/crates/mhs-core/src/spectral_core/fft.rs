//! Real fields ↔ Fourier coefficients on `T²` and multiplier operators.
//!
//! Coefficients are stored in FFT order: flat index `k = ky·n_x + kx`, with the
//! signed mode of each axis given by [`TorusGrid2::mode`]. The discrete forward
//! transform is the DFT scaled by `(2π)²/(n_x n_y)`, which is the node-rule
//! quadrature of `∫ f e^{−iξ·r} dr`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::{ScalarField2, TorusGrid2};
use super::multipliers;
use crate::error::{MhsError, Result};

const FOUR_PI2: f64 = 4.0 * PI * PI;

/// Relative imaginary residue above which a reconstruction is rejected as non-real.
pub const SYMMETRY_TOL: f64 = 1e-10;

struct Plan2 {
    fx: Arc<dyn Fft<f64>>,
    fy: Arc<dyn Fft<f64>>,
    ix: Arc<dyn Fft<f64>>,
    iy: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<(usize, usize), Arc<Plan2>>> = RefCell::new(HashMap::new());
}

fn plan(grid: TorusGrid2) -> Arc<Plan2> {
    PLANS.with(|p| {
        p.borrow_mut()
            .entry((grid.n_x, grid.n_y))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Plan2 {
                    fx: planner.plan_fft_forward(grid.n_x),
                    fy: planner.plan_fft_forward(grid.n_y),
                    ix: planner.plan_fft_inverse(grid.n_x),
                    iy: planner.plan_fft_inverse(grid.n_y),
                })
            })
            .clone()
    })
}

/// Unnormalized 2D FFT in place (forward: `e^{−i}`, inverse: `e^{+i}`).
pub(crate) fn fft2_in_place(grid: TorusGrid2, data: &mut [Complex64], inverse: bool) {
    let p = plan(grid);
    let (fx, fy) = if inverse { (&p.ix, &p.iy) } else { (&p.fx, &p.fy) };
    for row in data.chunks_exact_mut(grid.n_x) {
        fx.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); grid.n_y];
    for i in 0..grid.n_x {
        for j in 0..grid.n_y {
            col[j] = data[j * grid.n_x + i];
        }
        fy.process(&mut col);
        for j in 0..grid.n_y {
            data[j * grid.n_x + i] = col[j];
        }
    }
}

/// Fourier coefficients `f̂(ξ)` of a field on `T²`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField2 {
    pub grid: TorusGrid2,
    pub coeffs: Vec<Complex64>,
}

/// Forward transform with the `(2π)²/(n_x n_y)` scaling.
pub fn to_spectral(field: &ScalarField2) -> SpectralField2 {
    SpectralField2::from_real(field.grid, &field.values)
}

/// Inverse transform; fails if the coefficients do not describe a real field.
pub fn from_spectral(s: &SpectralField2) -> Result<ScalarField2> {
    let (re, im_max) = s.inverse_parts();
    let scale = re.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if im_max > SYMMETRY_TOL * scale {
        return Err(MhsError::SymmetryViolation {
            residue: im_max / scale,
        });
    }
    Ok(ScalarField2 {
        grid: s.grid,
        values: re,
    })
}

impl SpectralField2 {
    /// All-zero coefficients.
    pub fn zeros(grid: TorusGrid2) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Transforms raw node values.
    pub fn from_real(grid: TorusGrid2, values: &[f64]) -> Self {
        let mut coeffs: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft2_in_place(grid, &mut coeffs, false);
        let scale = FOUR_PI2 / grid.len() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        Self { grid, coeffs }
    }

    /// Real part of the inverse transform and the largest imaginary residue.
    fn inverse_parts(&self) -> (Vec<f64>, f64) {
        let mut data = self.coeffs.clone();
        fft2_in_place(self.grid, &mut data, true);
        let scale = 1.0 / FOUR_PI2;
        let im_max = data.iter().fold(0.0f64, |m, c| m.max((c.im * scale).abs()));
        (data.iter().map(|c| c.re * scale).collect(), im_max)
    }

    /// Inverse transform keeping the real part; for coefficients known to be
    /// conjugate-symmetric by construction.
    pub fn to_real(&self) -> ScalarField2 {
        ScalarField2 {
            grid: self.grid,
            values: self.inverse_parts().0,
        }
    }

    /// Coefficient of the lattice mode `(m, n)` (zero if not representable).
    pub fn coeff(&self, m: i64, n: i64) -> Complex64 {
        self.grid
            .mode_index(m, n)
            .map_or(Complex64::new(0.0, 0.0), |k| self.coeffs[k])
    }

    /// Mean ⟨f⟩ read from the zero mode.
    pub fn mean(&self) -> f64 {
        self.coeffs[0].re / FOUR_PI2
    }

    /// Multiplies mode `ξ` by `μ(ξ)` and zeroes the Nyquist modes.
    pub fn apply_multiplier(&self, mu: impl Fn(i64, i64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                if self.grid.is_nyquist(k) {
                    Complex64::new(0.0, 0.0)
                } else {
                    let (m, n) = self.grid.mode(k);
                    mu(m, n) * c
                }
            })
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Real-valued multiplier shorthand.
    pub fn apply_real_multiplier(&self, mu: impl Fn(i64, i64) -> f64) -> Self {
        self.apply_multiplier(|m, n| Complex64::new(mu(m, n), 0.0))
    }

    /// Riesz transform `ℛ_x`: symbol `−im/|ξ|`, zero at `ξ = 0`.
    pub fn riesz_x(&self) -> Self {
        self.apply_multiplier(multipliers::riesz_x)
    }

    /// Riesz transform `ℛ_y`: symbol `−in/|ξ|`, zero at `ξ = 0`.
    pub fn riesz_y(&self) -> Self {
        self.apply_multiplier(multipliers::riesz_y)
    }

    /// `ℬ_x`: symbol `−im/|ξ|²`, zero at `ξ = 0`.
    pub fn op_b_x(&self) -> Self {
        self.apply_multiplier(multipliers::op_b_x)
    }

    /// `ℬ_y`: symbol `−in/|ξ|²`, zero at `ξ = 0`.
    pub fn op_b_y(&self) -> Self {
        self.apply_multiplier(multipliers::op_b_y)
    }

    /// `𝒯₀`: multiplication by `𝔪(ξ)`.
    pub fn t0_apply(&self, l: f64) -> Self {
        self.apply_real_multiplier(|m, n| multipliers::m_symbol(multipliers::norm(m, n), l))
    }

    /// `𝒯₀⁻¹`: division by `𝔪(ξ)`.
    pub fn t0_inverse(&self, l: f64) -> Self {
        self.apply_real_multiplier(|m, n| 1.0 / multipliers::m_symbol(multipliers::norm(m, n), l))
    }

    /// Spectral `∂₁`.
    pub fn dx(&self) -> Self {
        self.apply_multiplier(|m, _| Complex64::new(0.0, m as f64))
    }

    /// Spectral `∂₂`.
    pub fn dy(&self) -> Self {
        self.apply_multiplier(|_, n| Complex64::new(0.0, n as f64))
    }

    /// Drops the zero mode (mean-free part `f̃`).
    pub fn mean_free(&self) -> Self {
        let mut out = self.clone();
        out.coeffs[0] = Complex64::new(0.0, 0.0);
        out
    }

    /// `a·self + c·other`.
    pub fn axpby(&self, a: f64, other: &Self, c: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(u, v)| u * a + v * c)
                .collect(),
        }
    }

    /// `self + other`.
    pub fn add(&self, other: &Self) -> Self {
        self.axpby(1.0, other, 1.0)
    }

    /// Multiplies every coefficient by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            grid: self.grid,
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// Sum of `|f̂|²/(2π)²`, which equals `∫ f²` by Parseval.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() / FOUR_PI2
    }

    /// Largest `|f̂(ξ) − conj f̂(−ξ)|` relative to the largest coefficient.
    pub fn symmetry_residue(&self) -> f64 {
        let g = self.grid;
        let scale = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.norm())).max(1e-300);
        let mut worst = 0.0f64;
        for k in 0..g.len() {
            let (m, n) = g.mode(k);
            if let Some(kk) = g.mode_index(-m, -n) {
                worst = worst.max((self.coeffs[k] - self.coeffs[kk].conj()).norm());
            }
        }
        worst / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_maps_to_zero_mode() {
        let g = TorusGrid2::square(8).unwrap();
        let s = to_spectral(&ScalarField2::from_fn(g, |_, _| 3.0));
        assert!((s.coeffs[0].re - FOUR_PI2 * 3.0).abs() < 1e-12);
        assert!(s.coeffs[1..].iter().all(|c| c.norm() < 1e-12));
    }

    #[test]
    fn cosine_maps_to_pair() {
        let g = TorusGrid2::square(8).unwrap();
        let s = to_spectral(&ScalarField2::from_fn(g, |x, _| x.cos()));
        for (m, n) in [(1, 0), (-1, 0)] {
            assert!((s.coeff(m, n).re - FOUR_PI2 / 2.0).abs() < 1e-12);
        }
        assert!(s.coeff(0, 1).norm() < 1e-12);
    }

    #[test]
    fn asymmetric_coefficients_rejected() {
        let g = TorusGrid2::square(8).unwrap();
        let mut s = SpectralField2::zeros(g);
        let k = g.mode_index(1, 0).unwrap();
        s.coeffs[k] = Complex64::new(1.0, 0.0);
        assert!(matches!(from_spectral(&s), Err(MhsError::SymmetryViolation { .. })));
    }

    #[test]
    fn derivative_of_sine_is_exact() {
        let g = TorusGrid2::square(16).unwrap();
        let f = ScalarField2::from_fn(g, |x, _| (3.0 * x).sin());
        let d = to_spectral(&f).dx().to_real();
        for (k, v) in d.values.iter().enumerate() {
            let (x, _) = g.coords(k);
            assert!((v - 3.0 * (3.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn riesz_x_maps_cos_to_sin() {
        let g = TorusGrid2::square(8).unwrap();
        let r = to_spectral(&ScalarField2::from_fn(g, |x, _| x.cos())).riesz_x().to_real();
        for (k, v) in r.values.iter().enumerate() {
            let (x, _) = g.coords(k);
            assert!((v - x.sin()).abs() < 1e-12);
        }
    }
}
