//! Outer iteration `b ↦ Γ[b]`, pressure reconstruction and residual checks.
//!
//! One step of `Γ` integrates the characteristics of `B = e₃ + b`, solves the
//! current equation for `j₀`, transports `j₀` through the slab, fixes the
//! fluxes and returns the perturbation of the div-curl solution. The iteration
//! starts from `b = 0` and stops once `‖Γ[b] − b‖∞ < fp_tol`.
//!
//! The pressure integrates `F = j×B` along `x` on `{y = 0, z = 0}`, then along
//! `y` on `{z = 0}`, then along `z`. Horizontal antiderivatives are spectral and
//! drop the mean, which is reported as the periodicity defect.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary_data::{validate, BoundaryData, DerivedBoundary};
use crate::cli_io::config::SolverConfig;
use crate::current_equation::{CurrentBoundary, CurrentOperator, KernelCoeffs, NeumannStats};
use crate::divcurl::{curl, divcurl_solve, DivCurlReport, Fluxes, GreenTable};
use crate::error::{MhsError, Result};
use crate::spectral_core::{
    holder_norm_estimate3, HolderOptions, ScalarField2, ScalarField3, SpectralField2, VectorField3, ZOps,
};
use crate::transport::{compute_flow, divergence, transport_solve};

/// Residuals and norms of a solver state.
///
/// The residual and norm entries are functions of the stored fields and are
/// recomputed by [`verify`]; `contraction_estimate`, `iterate_delta` and the
/// inner-solver statistics describe the iteration that produced the state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    /// `‖∇×B − j‖∞`.
    pub residual_curl: f64,
    /// `‖∇·B‖∞`.
    pub residual_div: f64,
    /// Largest deviation of `B₃` from `1 + f` on the two faces.
    pub residual_bn: f64,
    /// `‖(B₁, B₂)|_{z=0} − g‖∞`.
    pub residual_btau: f64,
    /// `‖j×B − ∇p‖∞`.
    pub residual_force: f64,
    /// `(|⟨(j×B)₁⟩|, |⟨(j×B)₂⟩|)` on `z = 0`.
    pub pressure_mean_defect: (f64, f64),
    /// `‖∇×(j×B)‖∞`.
    pub pressure_curl: f64,
    /// Lipschitz quotient of `Γ` on the last two iterates (0 after one step).
    pub contraction_estimate: f64,
    /// `‖b_{n+1} − b_n‖∞` of the last step.
    pub iterate_delta: f64,
    pub norms: OperatorNorms,
}

/// Norms of the fields and statistics of the inner solvers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OperatorNorms {
    /// `‖b‖∞`.
    pub b_max: f64,
    /// Largest `C^{2,α}` estimate over the components of `b`.
    pub b_holder: f64,
    /// `‖j‖∞`.
    pub j_max: f64,
    /// `‖j₀‖∞`.
    pub j0_max: f64,
    /// Iterations of the last current-equation solve.
    pub neumann_iterations: usize,
    /// Ratio of the last two Neumann increments.
    pub neumann_contraction: f64,
    /// Largest residual of the inverse characteristic map.
    pub flow_inversion_residual: f64,
}

impl DiagnosticsReport {
    /// Every scalar entry with its JSON key, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let n = &self.norms;
        vec![
            ("residual_curl", self.residual_curl),
            ("residual_div", self.residual_div),
            ("residual_bn", self.residual_bn),
            ("residual_btau", self.residual_btau),
            ("residual_force", self.residual_force),
            ("pressure_mean_defect_x", self.pressure_mean_defect.0),
            ("pressure_mean_defect_y", self.pressure_mean_defect.1),
            ("pressure_curl", self.pressure_curl),
            ("contraction_estimate", self.contraction_estimate),
            ("iterate_delta", self.iterate_delta),
            ("b_max", n.b_max),
            ("b_holder", n.b_holder),
            ("j_max", n.j_max),
            ("j0_max", n.j0_max),
            ("neumann_iterations", n.neumann_iterations as f64),
            ("neumann_contraction", n.neumann_contraction),
            ("flow_inversion_residual", n.flow_inversion_residual),
        ]
    }

    /// True when every entry is finite and non-negative.
    pub fn is_valid(&self) -> bool {
        self.entries().iter().all(|(_, v)| v.is_finite() && *v >= 0.0)
    }
}

/// Result of a solve: the perturbation, current, fluxes and pressure.
#[derive(Debug, Clone)]
pub struct SolverState {
    /// Perturbation, `B = e₃ + b`.
    pub b: VectorField3,
    pub j: VectorField3,
    pub j0: CurrentBoundary,
    pub flux: Fluxes,
    pub p: ScalarField3,
    /// Number of applications of `Γ`.
    pub iterate: usize,
    pub diagnostics: DiagnosticsReport,
}

/// Everything one application of `Γ` produces.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub b_next: VectorField3,
    pub j: VectorField3,
    pub j0: CurrentBoundary,
    pub flux: Fluxes,
    pub neumann: NeumannStats,
    pub flow_inversion_residual: f64,
    pub divcurl: DivCurlReport,
}

/// Data-dependent precomputations shared by all steps of a solve.
pub struct GammaContext<'a> {
    pub data: &'a BoundaryData,
    pub config: &'a SolverConfig,
    pub derived: DerivedBoundary,
    pub table: GreenTable,
}

impl<'a> GammaContext<'a> {
    /// Builds the Green table and the `b`-independent boundary quantities.
    pub fn new(data: &'a BoundaryData, config: &'a SolverConfig) -> Result<Self> {
        config.validate()?;
        let table = GreenTable::new(config.zops()?);
        Ok(Self {
            data,
            config,
            derived: DerivedBoundary::build(data, config.l),
            table,
        })
    }

    /// z-operators of the slab.
    pub fn zops(&self) -> &ZOps {
        &self.table.zops
    }

    /// One application of `Γ`.
    pub fn step(&self, b: &VectorField3) -> Result<StepOutput> {
        if b.grid != self.table.grid() || b.comps.len() != 3 {
            return Err(MhsError::GridMismatch("perturbation does not match the slab grid".into()));
        }
        let flow = compute_flow(b, self.zops(), self.config)?;
        let kc = KernelCoeffs::build(&flow, &self.table);
        let op = CurrentOperator::new(b, &flow, &kc, &self.table, self.data, &self.derived);
        let rhs = op.rhs(&self.derived, self.data);
        let (j0, neumann) = op.solve_j0(&rhs, self.config)?;
        let j = transport_solve(&flow, &j0);
        let flux = op.fluxes(&self.derived, &j0);
        let (b_next, divcurl) = divcurl_solve(&j, self.data, &self.derived, flux, &self.table)?;
        log::debug!(
            "step: neumann {} its (last increment {:.3e}), J = ({:.6e}, {:.6e}), div-curl residual {:.3e}",
            neumann.iterations,
            neumann.last_increment,
            flux.j1,
            flux.j2,
            divcurl.curl
        );
        Ok(StepOutput {
            b_next,
            j,
            j0,
            flux,
            neumann,
            flow_inversion_residual: flow.inversion_residual,
            divcurl,
        })
    }

    /// Power-iteration estimate of the norm of `Υ` at `b`, started from a
    /// vector drawn with `seed`.
    pub fn upsilon_contraction(&self, b: &VectorField3, iterations: usize, seed: u64) -> Result<f64> {
        let flow = compute_flow(b, self.zops(), self.config)?;
        let kc = KernelCoeffs::build(&flow, &self.table);
        let op = CurrentOperator::new(b, &flow, &kc, &self.table, self.data, &self.derived);
        Ok(op.contraction_estimate(iterations, seed))
    }

    /// State with pressure and diagnostics for the output of a step.
    pub fn finish(&self, out: StepOutput, iterate: usize, iterate_delta: f64, contraction: f64) -> SolverState {
        let pressure = pressure_parts(&out.b_next, &out.j, self.zops());
        let mut state = SolverState {
            b: out.b_next,
            j: out.j,
            j0: out.j0,
            flux: out.flux,
            p: pressure.p,
            iterate,
            diagnostics: DiagnosticsReport {
                contraction_estimate: contraction,
                iterate_delta,
                norms: OperatorNorms {
                    neumann_iterations: out.neumann.iterations,
                    neumann_contraction: out.neumann.contraction.abs(),
                    flow_inversion_residual: out.flow_inversion_residual,
                    ..Default::default()
                },
                ..Default::default()
            },
        };
        state.diagnostics = verify(&state, self.data, self.zops(), self.config.alpha);
        state
    }
}

/// One application of `Γ` to `b`, with the resulting state.
pub fn gamma_step(b: &VectorField3, data: &BoundaryData, config: &SolverConfig) -> Result<(VectorField3, SolverState)> {
    let ctx = GammaContext::new(data, config)?;
    let out = ctx.step(b)?;
    let delta = out.b_next.max_abs_diff(b);
    let state = ctx.finish(out, 1, delta, 0.0);
    Ok((state.b.clone(), state))
}

fn is_divergence_symptom(e: &MhsError) -> bool {
    matches!(
        e,
        MhsError::NeumannDivergence { .. }
            | MhsError::FieldTooLarge { .. }
            | MhsError::InversionFailure { .. }
            | MhsError::StepFailure { .. }
            | MhsError::SliceMeanViolation { .. }
    )
}

/// Iterates `Γ` from `b = 0` until the update falls below `fp_tol`.
pub fn solve(data: &BoundaryData, config: &SolverConfig) -> Result<SolverState> {
    config.validate()?;
    validate(data, config)?;
    let ctx = GammaContext::new(data, config)?;
    let mut b = VectorField3::zeros(config.slab()?, 3);
    let mut prev_delta = f64::NAN;
    let mut contraction = 0.0;
    for it in 1..=config.max_outer {
        let out = match ctx.step(&b) {
            Ok(out) => out,
            Err(e) if is_divergence_symptom(&e) => {
                log::warn!("outer iteration {it}: {e}");
                return Err(MhsError::NonConvergence {
                    iterations: it,
                    delta: prev_delta,
                    contraction,
                });
            }
            Err(e) => return Err(e),
        };
        let delta = out.b_next.max_abs_diff(&b);
        if prev_delta > 0.0 {
            contraction = delta / prev_delta;
        }
        log::info!("outer iteration {it}: |b_next - b| = {delta:.3e}, quotient {contraction:.3e}");
        if !delta.is_finite() {
            return Err(MhsError::NonConvergence {
                iterations: it,
                delta,
                contraction,
            });
        }
        let b_max = out.b_next.max_abs();
        if b_max > config.m_max {
            log::warn!("outer iteration {it}: |b| = {b_max:.3e} left the ball of radius M_max = {}", config.m_max);
            return Err(MhsError::NonConvergence {
                iterations: it,
                delta,
                contraction,
            });
        }
        if delta < config.fp_tol {
            return Ok(ctx.finish(out, it, delta, contraction));
        }
        b = out.b_next;
        prev_delta = delta;
    }
    Err(MhsError::NonConvergence {
        iterations: config.max_outer,
        delta: prev_delta,
        contraction,
    })
}

/// Pressure with the quantities that decide whether it is well defined.
#[derive(Debug, Clone)]
pub struct PressureField {
    pub p: ScalarField3,
    /// `‖∇×F‖∞`.
    pub curl: f64,
    /// `|⟨F₁⟩|` on `z = 0`.
    pub defect_x: f64,
    /// `|⟨F₂⟩|` on `z = 0`.
    pub defect_y: f64,
}

/// Limits of [`pressure_reconstruct`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureTolerance {
    pub curl: f64,
    pub defect: f64,
}

impl Default for PressureTolerance {
    fn default() -> Self {
        Self { curl: 1e-6, defect: 1e-9 }
    }
}

/// `F = j×B` for `B = e₃ + b`.
pub fn lorentz_force(b: &VectorField3, j: &VectorField3) -> VectorField3 {
    let n = b.grid.len();
    let mut f = VectorField3::zeros(b.grid, 3);
    for p in 0..n {
        let (b1, b2, b3) = (b.comps[0].values[p], b.comps[1].values[p], 1.0 + b.comps[2].values[p]);
        let (j1, j2, j3) = (j.comps[0].values[p], j.comps[1].values[p], j.comps[2].values[p]);
        f.comps[0].values[p] = j2 * b3 - j3 * b2;
        f.comps[1].values[p] = j3 * b1 - j1 * b3;
        f.comps[2].values[p] = j1 * b2 - j2 * b1;
    }
    f
}

/// Spectral antiderivative along `x` (`along_x`) or `y`, mean dropped.
fn antiderivative(f: &ScalarField2, along_x: bool) -> ScalarField2 {
    SpectralField2::from_real(f.grid, &f.values)
        .apply_multiplier(|m, n| {
            let q = if along_x { m } else { n };
            if q == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -1.0 / q as f64)
            }
        })
        .to_real()
}

/// Pressure along the `x → y → z` path together with its consistency measures.
pub fn pressure_parts(b: &VectorField3, j: &VectorField3, zops: &ZOps) -> PressureField {
    let g = b.grid;
    let base = g.base;
    let f = lorentz_force(b, j);
    let f1 = f.comps[0].slice(0);
    let f2 = f.comps[1].slice(0);
    let row = ScalarField2::from_values(
        base,
        (0..base.len()).map(|p| f1.values[base.idx(p % base.n_x, 0)]).collect(),
    )
    .expect("row has the grid size");
    let px = antiderivative(&row, true);
    let py = antiderivative(&f2, false);
    let nn = g.nz_nodes();
    let n = base.len();
    let mut p = vec![0.0; g.len()];
    for q in 0..n {
        let i = q % base.n_x;
        let surface = (px.values[q] - px.values[0]) + (py.values[q] - py.values[base.idx(i, 0)]);
        let column: Vec<f64> = (0..nn).map(|k| f.comps[2].values[k * n + q]).collect();
        let up = zops.cumulative_integral(&column);
        for k in 0..nn {
            p[k * n + q] = surface + up[k];
        }
    }
    PressureField {
        p: ScalarField3 { grid: g, values: p },
        curl: curl(&f, zops).max_abs(),
        defect_x: f1.mean().abs(),
        defect_y: f2.mean().abs(),
    }
}

/// Pressure of `B = e₃ + b` and `j`, with `p(0, 0, 0) = 0`.
pub fn pressure_reconstruct(
    b: &VectorField3,
    j: &VectorField3,
    zops: &ZOps,
    tol: PressureTolerance,
) -> Result<ScalarField3> {
    let pf = pressure_parts(b, j, zops);
    if pf.curl > tol.curl || pf.defect_x > tol.defect || pf.defect_y > tol.defect {
        return Err(MhsError::PathDependence {
            curl: pf.curl,
            defect_x: pf.defect_x,
            defect_y: pf.defect_y,
        });
    }
    Ok(pf.p)
}

/// `∇p` with spectral horizontal and finite-difference vertical derivatives.
pub fn gradient(p: &ScalarField3, zops: &ZOps) -> VectorField3 {
    let g = p.grid;
    let n = g.slice_len();
    let mut out = VectorField3::zeros(g, 3);
    for k in 0..g.nz_nodes() {
        let s = SpectralField2::from_real(g.base, p.slice_values(k));
        out.comps[0].slice_values_mut(k).copy_from_slice(&s.dx().to_real().values);
        out.comps[1].slice_values_mut(k).copy_from_slice(&s.dy().to_real().values);
        let (start, w) = zops.derivative_stencil(k);
        let dz = out.comps[2].slice_values_mut(k);
        for (jj, wj) in w.iter().enumerate() {
            let layer = &p.values[(start + jj) * n..(start + jj + 1) * n];
            for (d, v) in dz.iter_mut().zip(layer) {
                *d += wj * v;
            }
        }
    }
    out
}

/// Recomputes every field residual of `state`; iteration statistics are copied.
pub fn verify(state: &SolverState, data: &BoundaryData, zops: &ZOps, alpha: f64) -> DiagnosticsReport {
    let b = &state.b;
    let g = b.grid;
    let top = g.nz_nodes() - 1;
    let diff = |a: &[f64], c: &[f64]| a.iter().zip(c).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let pf = pressure_parts(b, &state.j, zops);
    let force = lorentz_force(b, &state.j);
    let grad = gradient(&state.p, zops);
    let holder = b
        .comps
        .iter()
        .map(|c| holder_norm_estimate3(c, 2, alpha, zops, HolderOptions::default()).unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let prior = state.diagnostics;
    DiagnosticsReport {
        residual_curl: curl(b, zops).max_abs_diff(&state.j),
        residual_div: divergence(b, zops).max_abs(),
        residual_bn: diff(b.comps[2].slice_values(0), &data.f_minus.values)
            .max(diff(b.comps[2].slice_values(top), &data.f_plus.values)),
        residual_btau: diff(b.comps[0].slice_values(0), &data.g1().values)
            .max(diff(b.comps[1].slice_values(0), &data.g2().values)),
        residual_force: force.max_abs_diff(&grad),
        pressure_mean_defect: (pf.defect_x, pf.defect_y),
        pressure_curl: pf.curl,
        contraction_estimate: prior.contraction_estimate,
        iterate_delta: prior.iterate_delta,
        norms: OperatorNorms {
            b_max: b.max_abs(),
            b_holder: holder,
            j_max: state.j.max_abs(),
            j0_max: state.j0.max_abs(),
            ..prior.norms
        },
    }
}
