//! Boundary data `(f, g)` and the surface functions derived from them.
//!
//! `f` is the normal perturbation on each face (`B₃ = 1 + f`), `g = (g₁, g₂)`
//! the tangential field on the inflow face `z = 0`. From them we build the
//! boundary values `h_ℓ^±` of the vector potential, their harmonic-extension
//! corrections `𝒵_ℓ`, the rescaled data `𝖦_ℓ = 𝒯₀⁻¹(g_ℓ − 𝒵_ℓ)`, and the
//! inflow vertical current `j₀³ = ∂₁g₂ − ∂₂g₁`.

pub mod csv;
pub mod expr;

use num_complex::Complex64;

use crate::cli_io::config::SolverConfig;
use crate::error::{MhsError, Result};
use crate::spectral_core::multipliers::{bracket_xx, bracket_yy, k_coth, k_csch, norm, proj};
use crate::spectral_core::{
    holder_norm_estimate, to_spectral, HolderOptions, ScalarField2, SpectralField2, TorusGrid2,
    VectorField2,
};

/// Absolute tolerance on `mean(f_minus) − mean(f_plus)`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

/// Normal data on both faces and tangential data on the inflow face.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub f_minus: ScalarField2,
    pub f_plus: ScalarField2,
    pub g: VectorField2,
}

impl BoundaryData {
    /// Assembles data after checking grids and component count.
    pub fn new(f_minus: ScalarField2, f_plus: ScalarField2, g1: ScalarField2, g2: ScalarField2) -> Result<Self> {
        let grid = f_minus.grid;
        if [&f_plus, &g1, &g2].iter().any(|s| s.grid != grid) {
            return Err(MhsError::GridMismatch("boundary fields on different grids".into()));
        }
        Ok(Self {
            f_minus,
            f_plus,
            g: VectorField2::from_comps(vec![g1, g2])?,
        })
    }

    /// All-zero data.
    pub fn zeros(grid: TorusGrid2) -> Self {
        Self {
            f_minus: ScalarField2::zeros(grid),
            f_plus: ScalarField2::zeros(grid),
            g: VectorField2::zeros(grid, 2),
        }
    }

    /// Surface grid.
    pub fn grid(&self) -> TorusGrid2 {
        self.f_minus.grid
    }

    /// `g₁`.
    pub fn g1(&self) -> &ScalarField2 {
        &self.g.comps[0]
    }

    /// `g₂`.
    pub fn g2(&self) -> &ScalarField2 {
        &self.g.comps[1]
    }

    /// Multiplies every field by `a`.
    pub fn scaled(&self, a: f64) -> Self {
        Self {
            f_minus: self.f_minus.scaled(a),
            f_plus: self.f_plus.scaled(a),
            g: VectorField2 {
                grid: self.g.grid,
                comps: self.g.comps.iter().map(|c| c.scaled(a)).collect(),
            },
        }
    }

    /// Sum of the `C^{2,α}` estimates of `f_minus`, `f_plus`, `g₁`, `g₂`.
    pub fn smallness_estimate(&self, alpha: f64) -> Result<f64> {
        let o = HolderOptions::default();
        let mut total = 0.0;
        for f in [&self.f_minus, &self.f_plus, self.g1(), self.g2()] {
            total += holder_norm_estimate(f, 2, alpha, o)?;
        }
        Ok(total)
    }
}

/// Checks grids, finiteness, the flux compatibility and the smallness bound.
pub fn validate(data: &BoundaryData, config: &SolverConfig) -> Result<()> {
    let grid = data.grid();
    if grid != config.torus()? {
        return Err(MhsError::GridMismatch(format!(
            "data grid {}x{} differs from configured {}x{}",
            grid.n_x, grid.n_y, config.n_x, config.n_y
        )));
    }
    let fields = [&data.f_minus, &data.f_plus, data.g1(), data.g2()];
    if fields.iter().any(|f| f.grid != grid) || data.g.comps.len() != 2 {
        return Err(MhsError::GridMismatch("boundary fields on different grids".into()));
    }
    if fields.iter().any(|f| !f.is_finite()) {
        return Err(MhsError::Parse("boundary data contain non-finite values".into()));
    }
    let (mm, mp) = (data.f_minus.mean(), data.f_plus.mean());
    if (mm - mp).abs() > COMPATIBILITY_TOL {
        return Err(MhsError::CompatibilityViolation {
            mean_minus: mm,
            mean_plus: mp,
        });
    }
    let estimate = data.smallness_estimate(config.alpha)?;
    if estimate > config.m_max {
        return Err(MhsError::SmallnessViolation {
            field: "f and g",
            estimate,
            limit: config.m_max,
        });
    }
    Ok(())
}

/// Spectra of `h₁` and `h₂` with `∂₁h₂ − ∂₂h₁ = f − ⟨f⟩`, `h₁(x, 0) = 0`, `h₂(0, y) = 0`.
///
/// `h₂(x, y) = ∫₀ˣ f(s, y) ds − (x/2π)∫₀^{2π} f(s, y) ds` and
/// `h₁(x, y) = −∫₀^y (⟨f(·, t)⟩_x − ⟨f⟩) dt`.
pub fn h_spectra(f: &ScalarField2) -> (SpectralField2, SpectralField2) {
    let g = f.grid;
    let fs = to_spectral(f);
    let mut h1 = SpectralField2::zeros(g);
    let mut h2 = SpectralField2::zeros(g);
    for k in 0..g.len() {
        if g.is_nyquist(k) {
            continue;
        }
        let (m, n) = g.mode(k);
        let c = fs.coeffs[k];
        if m != 0 {
            let a = c / Complex64::new(0.0, m as f64);
            h2.coeffs[k] += a;
            let k0 = g.mode_index(0, n).expect("n is representable");
            h2.coeffs[k0] -= a;
        } else if n != 0 {
            let a = c / Complex64::new(0.0, n as f64);
            h1.coeffs[k] -= a;
            h1.coeffs[0] += a;
        }
    }
    (h1, h2)
}

/// `h₁^±, h₂^±` as node fields, in the order `(h1_minus, h1_plus, h2_minus, h2_plus)`.
pub fn build_h(data: &BoundaryData) -> (ScalarField2, ScalarField2, ScalarField2, ScalarField2) {
    let (h1m, h2m) = h_spectra(&data.f_minus);
    let (h1p, h2p) = h_spectra(&data.f_plus);
    (h1m.to_real(), h1p.to_real(), h2m.to_real(), h2p.to_real())
}

/// `Ĥ_ℓ = −ĥ_ℓ⁻ |ξ|coth(|ξ|L) + ĥ_ℓ⁺ |ξ|/sinh(|ξ|L)`: z-derivative at `z = 0` of the
/// harmonic extension of the face values `h_ℓ^±`.
pub fn harmonic_slope(h_minus: &SpectralField2, h_plus: &SpectralField2, l: f64) -> SpectralField2 {
    let g = h_minus.grid;
    let mut out = SpectralField2::zeros(g);
    for k in 0..g.len() {
        if g.is_nyquist(k) {
            continue;
        }
        let (m, n) = g.mode(k);
        let kk = norm(m, n);
        out.coeffs[k] = -h_minus.coeffs[k] * k_coth(kk, l) + h_plus.coeffs[k] * k_csch(kk, l);
    }
    out
}

/// `𝒵₁, 𝒵₂` from the four face functions.
pub fn build_z_script(
    h1_minus: &ScalarField2,
    h1_plus: &ScalarField2,
    h2_minus: &ScalarField2,
    h2_plus: &ScalarField2,
    l: f64,
) -> (ScalarField2, ScalarField2) {
    let hh1 = harmonic_slope(&to_spectral(h1_minus), &to_spectral(h1_plus), l);
    let hh2 = harmonic_slope(&to_spectral(h2_minus), &to_spectral(h2_plus), l);
    let (z1, z2) = z_script_spectra(&hh1, &hh2);
    (z1.to_real(), z2.to_real())
}

/// Spectral form of `𝒵_ℓ` given `Ĥ₁, Ĥ₂`.
pub fn z_script_spectra(hh1: &SpectralField2, hh2: &SpectralField2) -> (SpectralField2, SpectralField2) {
    let g = hh1.grid;
    let mut z1 = SpectralField2::zeros(g);
    let mut z2 = SpectralField2::zeros(g);
    for k in 0..g.len() {
        if g.is_nyquist(k) {
            continue;
        }
        let (m, n) = g.mode(k);
        let pxy = proj(m, n, m, n);
        z1.coeffs[k] = hh1.coeffs[k] * pxy + hh2.coeffs[k] * bracket_yy(m, n);
        z2.coeffs[k] = -hh1.coeffs[k] * bracket_xx(m, n) - hh2.coeffs[k] * pxy;
    }
    (z1, z2)
}

/// `𝖦_ℓ = 𝒯₀⁻¹(g_ℓ − 𝒵_ℓ)`.
pub fn build_g(data: &BoundaryData, z1: &ScalarField2, z2: &ScalarField2, l: f64) -> (ScalarField2, ScalarField2) {
    let gg1 = to_spectral(&data.g1().axpby(1.0, z1, -1.0)).t0_inverse(l);
    let gg2 = to_spectral(&data.g2().axpby(1.0, z2, -1.0)).t0_inverse(l);
    (gg1.to_real(), gg2.to_real())
}

/// `j₀³ = ∂₁g₂ − ∂₂g₁`.
pub fn j0_third(g: &VectorField2) -> ScalarField2 {
    let s = to_spectral(&g.comps[1])
        .dx()
        .axpby(1.0, &to_spectral(&g.comps[0]).dy(), -1.0);
    s.to_real()
}

/// Surface functions derived from the boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedBoundary {
    pub h1_minus: ScalarField2,
    pub h1_plus: ScalarField2,
    pub h2_minus: ScalarField2,
    pub h2_plus: ScalarField2,
    pub z1_script: ScalarField2,
    pub z2_script: ScalarField2,
    pub g1: ScalarField2,
    pub g2: ScalarField2,
    pub j0_3: ScalarField2,
    /// Mean of `f` (equal on both faces), the vertical flux constant.
    pub f_mean: f64,
    pub l: f64,
}

impl DerivedBoundary {
    /// Builds every derived function for slab height `l`.
    pub fn build(data: &BoundaryData, l: f64) -> Self {
        let (h1_minus, h1_plus, h2_minus, h2_plus) = build_h(data);
        let (z1_script, z2_script) = build_z_script(&h1_minus, &h1_plus, &h2_minus, &h2_plus, l);
        let (g1, g2) = build_g(data, &z1_script, &z2_script, l);
        Self {
            j0_3: j0_third(&data.g),
            f_mean: 0.5 * (data.f_minus.mean() + data.f_plus.mean()),
            h1_minus,
            h1_plus,
            h2_minus,
            h2_plus,
            z1_script,
            z2_script,
            g1,
            g2,
            l,
        }
    }
}
