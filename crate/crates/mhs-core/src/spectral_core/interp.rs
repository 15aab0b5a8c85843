//! Off-grid evaluation of real fields on `T²` by their trigonometric interpolant.
//!
//! A real field is evaluated from the half spectrum `m ≥ 0`:
//! `f(x, y) = (2π)⁻² Re Σ_{m≥0} w_m e^{imx} Σ_n f̂(m, n) e^{iny}` with `w_0 = 1`
//! and `w_m = 2` otherwise. Nyquist modes are dropped.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::SpectralField2;
use super::grid::TorusGrid2;

/// Exponentials `e^{imx}` (for `0 ≤ m < n_x/2`) and `e^{iny}` (FFT order) at one point.
#[derive(Debug, Clone)]
pub struct PointBasis {
    ex: Vec<Complex64>,
    ey: Vec<Complex64>,
}

impl PointBasis {
    /// Builds the exponentials at `(x, y)`.
    pub fn new(grid: TorusGrid2, x: f64, y: f64) -> Self {
        let hx = grid.n_x / 2;
        let ex = (0..hx)
            .map(|m| Complex64::from_polar(1.0, m as f64 * x))
            .collect();
        let ey = (0..grid.n_y)
            .map(|k| {
                if k == grid.n_y / 2 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::from_polar(1.0, grid.mode_y(k) as f64 * y)
                }
            })
            .collect();
        Self { ex, ey }
    }
}

/// Half-spectrum copy of a real field, ready for repeated point evaluation.
#[derive(Debug, Clone)]
pub struct TrigInterpolator {
    grid: TorusGrid2,
    /// `c[m·n_y + ky]` for `0 ≤ m < n_x/2`, already divided by `(2π)²` and weighted by `w_m`.
    c: Vec<Complex64>,
    /// `n` for each FFT position `ky` (zero at Nyquist).
    ny_modes: Vec<f64>,
}

impl TrigInterpolator {
    /// Prepares the interpolant of the field with coefficients `s`.
    pub fn new(s: &SpectralField2) -> Self {
        let g = s.grid;
        let hx = g.n_x / 2;
        let mut c = vec![Complex64::new(0.0, 0.0); hx * g.n_y];
        let scale = 1.0 / (4.0 * PI * PI);
        for m in 0..hx {
            let w = if m == 0 { 1.0 } else { 2.0 };
            for ky in 0..g.n_y {
                if ky == g.n_y / 2 {
                    continue;
                }
                c[m * g.n_y + ky] = s.coeffs[ky * g.n_x + m] * (w * scale);
            }
        }
        let ny_modes = (0..g.n_y)
            .map(|k| if k == g.n_y / 2 { 0.0 } else { g.mode_y(k) as f64 })
            .collect();
        Self { grid: g, c, ny_modes }
    }

    /// Grid of the underlying field.
    pub fn grid(&self) -> TorusGrid2 {
        self.grid
    }

    /// Field value at the point described by `basis`.
    pub fn eval(&self, basis: &PointBasis) -> f64 {
        let ny = self.grid.n_y;
        let mut acc = 0.0;
        for (m, e) in basis.ex.iter().enumerate() {
            let row = &self.c[m * ny..(m + 1) * ny];
            let mut s = Complex64::new(0.0, 0.0);
            for (c, ey) in row.iter().zip(&basis.ey) {
                s += c * ey;
            }
            acc += (e * s).re;
        }
        acc
    }

    /// Value and gradient `(f, ∂₁f, ∂₂f)` at the point described by `basis`.
    pub fn eval_grad(&self, basis: &PointBasis) -> (f64, f64, f64) {
        let ny = self.grid.n_y;
        let (mut f, mut fx, mut fy) = (0.0, 0.0, 0.0);
        for (m, e) in basis.ex.iter().enumerate() {
            let row = &self.c[m * ny..(m + 1) * ny];
            let mut s = Complex64::new(0.0, 0.0);
            let mut sy = Complex64::new(0.0, 0.0);
            for ((c, ey), n) in row.iter().zip(&basis.ey).zip(&self.ny_modes) {
                let t = c * ey;
                s += t;
                sy += t * n;
            }
            let es = e * s;
            f += es.re;
            fx -= m as f64 * es.im;
            fy -= (e * sy).im;
        }
        (f, fx, fy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral_core::{to_spectral, ScalarField2};

    #[test]
    fn reproduces_band_limited_field_off_grid() {
        let g = TorusGrid2::new(16, 12).unwrap();
        let f = |x: f64, y: f64| 0.3 + (2.0 * x).sin() * (y - 0.4).cos() + 0.2 * (x + 3.0 * y).cos();
        let it = TrigInterpolator::new(&to_spectral(&ScalarField2::from_fn(g, f)));
        for &(x, y) in &[(0.123, 4.5), (6.0, 0.01), (3.3, 2.2)] {
            let b = PointBasis::new(g, x, y);
            let (v, vx, vy) = it.eval_grad(&b);
            assert!((v - f(x, y)).abs() < 1e-13);
            assert!((it.eval(&b) - v).abs() < 1e-14);
            let h = 1e-6;
            let fxn = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
            let fyn = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
            assert!((vx - fxn).abs() < 1e-8 && (vy - fyn).abs() < 1e-8);
        }
    }
}
