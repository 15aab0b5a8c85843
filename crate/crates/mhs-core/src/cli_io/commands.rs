//! The `solve`, `verify` and `linear` commands.
//!
//! Each command returns the process exit code and reports failures on stderr.

use std::path::{Path, PathBuf};

use crate::boundary_data::csv::field_to_csv;
use crate::boundary_data::{validate, BoundaryData};
use crate::cli_io::config::SolverConfig;
use crate::cli_io::data_spec::DataSpec;
use crate::cli_io::field_io::{current_from_file, current_to_file, FieldFile};
use crate::cli_io::report::{
    now, summary, LinearReport, LinearResiduals, OracleComparison, SolveReport, REPORT_VERSION,
};
use crate::divcurl::curl;
use crate::error::{MhsError, Result};
use crate::fixed_point::{self, GammaContext, SolverState};
use crate::linear_oracle::linear_solve;
use crate::spectral_core::{ScalarField2, VectorField3, ZOps};
use crate::transport::divergence;

/// Converged run, or a command that completed its checks.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration, data or input files.
pub const EXIT_VALIDATION: i32 = 1;
/// The fixed-point iteration did not converge.
pub const EXIT_NONCONVERGENCE: i32 = 2;
/// Stored and recomputed diagnostics disagree, or a stored file is unreadable.
pub const EXIT_MISMATCH: i32 = 3;

/// Allowed disagreement between stored and recomputed diagnostics, relative
/// to `max(1, |stored|)`.
pub const VERIFY_TOL: f64 = 1e-12;

/// Power iterations behind the reported contraction estimate of the current
/// equation.
const UPSILON_ITERATIONS: usize = 20;

/// Output file names.
pub mod files {
    pub const CONFIG: &str = "config.txt";
    pub const BOUNDARY: &str = "boundary.mhsf";
    pub const B: &str = "b.mhsf";
    pub const J: &str = "j.mhsf";
    pub const J0: &str = "j0.mhsf";
    pub const P: &str = "p.mhsf";
    pub const DIAGNOSTICS: &str = "diagnostics.json";
    pub const SUMMARY: &str = "summary.txt";
    pub const LINEAR_B: &str = "linear_b.mhsf";
    pub const LINEAR_J0: &str = "linear_j0.mhsf";
    pub const LINEAR_REPORT: &str = "linear.json";
}

/// Inputs shared by `solve` and `linear`.
#[derive(Debug, Clone)]
pub struct RunInputs {
    pub config: PathBuf,
    pub data: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    /// Also write `z = 0` and `z = L` slices of `b` as CSV tables.
    pub slices: bool,
}

/// Exit code for an error raised while preparing or running a solve.
pub fn exit_code(e: &MhsError) -> i32 {
    match e {
        MhsError::NonConvergence { .. }
        | MhsError::NeumannDivergence { .. }
        | MhsError::FieldTooLarge { .. }
        | MhsError::InversionFailure { .. }
        | MhsError::StepFailure { .. }
        | MhsError::SliceMeanViolation { .. }
        | MhsError::PathDependence { .. } => EXIT_NONCONVERGENCE,
        _ => EXIT_VALIDATION,
    }
}

fn load_inputs(inputs: &RunInputs) -> Result<(SolverConfig, BoundaryData)> {
    let config = SolverConfig::from_file(&inputs.config)?;
    let grid = config.torus()?;
    let data = match &inputs.data {
        Some(path) => DataSpec::from_file(path)?.build(grid)?,
        None => BoundaryData::zeros(grid),
    };
    Ok((config, data))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| MhsError::Format(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

fn boundary_file(data: &BoundaryData) -> Result<FieldFile> {
    FieldFile::from_surface(&[&data.f_minus, &data.f_plus, data.g1(), data.g2()])
}

fn boundary_from_file(file: FieldFile) -> Result<BoundaryData> {
    let mut c = file.into_surface(4)?.into_iter();
    let mut next = || c.next().expect("four components");
    BoundaryData::new(next(), next(), next(), next())
}

fn write_slices(b: &VectorField3, out: &Path, prefix: &str) -> Result<()> {
    let top = b.grid.nz_nodes() - 1;
    for (layer, tag) in [(0, "z0"), (top, "zL")] {
        for (c, comp) in b.comps.iter().enumerate() {
            let slice = ScalarField2::from_values(b.grid.base, comp.slice_values(layer).to_vec())?;
            std::fs::write(out.join(format!("{prefix}{}_{tag}.csv", c + 1)), field_to_csv(&slice))?;
        }
    }
    Ok(())
}

fn write_state(state: &SolverState, config: &SolverConfig, data: &BoundaryData, out: &Path) -> Result<()> {
    std::fs::write(out.join(files::CONFIG), config.to_text())?;
    boundary_file(data)?.save(&out.join(files::BOUNDARY))?;
    FieldFile::from_volume(&state.b).save(&out.join(files::B))?;
    FieldFile::from_volume(&state.j).save(&out.join(files::J))?;
    current_to_file(&state.j0)?.save(&out.join(files::J0))?;
    let p = VectorField3::from_comps(vec![state.p.clone()])?;
    FieldFile::from_volume(&p).save(&out.join(files::P))?;
    Ok(())
}

fn solve_report(
    state: Option<&SolverState>,
    iterations: usize,
    upsilon: Option<f64>,
    seed: u64,
    error: Option<String>,
) -> SolveReport {
    SolveReport {
        version: REPORT_VERSION,
        converged: state.is_some(),
        iterations,
        flux: state.map(|s| s.flux),
        diagnostics: state.map(|s| s.diagnostics),
        upsilon_contraction: upsilon,
        seed,
        error,
        timestamp: now(),
    }
}

/// Runs the fixed-point solver and writes fields, diagnostics and a summary.
pub fn cmd_solve(inputs: &RunInputs) -> i32 {
    match run_solve(inputs) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_solve(inputs: &RunInputs) -> Result<i32> {
    let (config, data) = load_inputs(inputs)?;
    validate(&data, &config)?;
    std::fs::create_dir_all(&inputs.out)?;
    let out = inputs.out.as_path();
    match fixed_point::solve(&data, &config) {
        Ok(state) => {
            let ctx = GammaContext::new(&data, &config)?;
            let upsilon = match ctx.upsilon_contraction(&state.b, UPSILON_ITERATIONS, inputs.seed) {
                Ok(u) => Some(u),
                Err(e) => {
                    log::warn!("contraction estimate of the current equation failed: {e}");
                    None
                }
            };
            write_state(&state, &config, &data, out)?;
            if inputs.slices {
                write_slices(&state.b, out, "b")?;
            }
            let report = solve_report(Some(&state), state.iterate, upsilon, inputs.seed, None);
            write_json(&out.join(files::DIAGNOSTICS), &report)?;
            let text = summary(&report);
            std::fs::write(out.join(files::SUMMARY), &text)?;
            print!("{text}");
            Ok(EXIT_OK)
        }
        Err(e @ MhsError::NonConvergence { iterations, .. }) => {
            eprintln!("error: {e}");
            std::fs::write(out.join(files::CONFIG), config.to_text())?;
            let report = solve_report(None, iterations, None, inputs.seed, Some(e.to_string()));
            write_json(&out.join(files::DIAGNOSTICS), &report)?;
            let text = summary(&report);
            std::fs::write(out.join(files::SUMMARY), &text)?;
            print!("{text}");
            Ok(EXIT_NONCONVERGENCE)
        }
        Err(e) => Err(e),
    }
}

/// Stored and recomputed value of one diagnostics entry.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyRow {
    pub name: &'static str,
    pub stored: f64,
    pub recomputed: f64,
}

impl VerifyRow {
    /// True when the two values agree within [`VERIFY_TOL`].
    pub fn matches(&self) -> bool {
        (self.stored - self.recomputed).abs() <= VERIFY_TOL * self.stored.abs().max(1.0)
    }
}

/// Recomputes the diagnostics of a solution directory from its field files.
pub fn verify_dir(dir: &Path) -> Result<Vec<VerifyRow>> {
    let config = SolverConfig::from_file(&dir.join(files::CONFIG))?;
    let text = std::fs::read_to_string(dir.join(files::DIAGNOSTICS))?;
    let report: SolveReport = serde_json::from_str(&text).map_err(|e| MhsError::Format(e.to_string()))?;
    let (Some(stored), Some(flux)) = (report.diagnostics, report.flux) else {
        return Err(MhsError::Format("diagnostics of an unconverged run cannot be verified".into()));
    };
    let data = boundary_from_file(FieldFile::load(&dir.join(files::BOUNDARY))?)?;
    let b = FieldFile::load(&dir.join(files::B))?.into_volume(3)?;
    let j = FieldFile::load(&dir.join(files::J))?.into_volume(3)?;
    let j0 = current_from_file(FieldFile::load(&dir.join(files::J0))?)?;
    let p = FieldFile::load(&dir.join(files::P))?.into_volume(1)?;
    let slab = config.slab()?;
    if b.grid != slab || j.grid != slab || p.grid != slab || j0.j0_1.grid != slab.base || data.grid() != slab.base {
        return Err(MhsError::GridMismatch("stored fields do not match the stored configuration".into()));
    }
    let zops = ZOps::new(slab, config.n_s, config.n_quad_z)?;
    let state = SolverState {
        b,
        j,
        j0,
        flux,
        p: p.comps.into_iter().next().expect("one component"),
        iterate: report.iterations,
        diagnostics: stored,
    };
    let recomputed = fixed_point::verify(&state, &data, &zops, config.alpha);
    Ok(stored
        .entries()
        .into_iter()
        .zip(recomputed.entries())
        .map(|((name, s), (_, r))| VerifyRow {
            name,
            stored: s,
            recomputed: r,
        })
        .collect())
}

/// Recomputes every diagnostics entry of a solution directory and compares it
/// with the stored value.
pub fn cmd_verify(dir: &Path) -> i32 {
    let rows = match verify_dir(dir) {
        Ok(rows) => rows,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_MISMATCH;
        }
    };
    println!("{:<26}{:>16}{:>16}{:>12}  status", "entry", "stored", "recomputed", "|diff|");
    let mut ok = true;
    for r in &rows {
        let good = r.matches();
        ok &= good;
        println!(
            "{:<26}{:>16.6e}{:>16.6e}{:>12.3e}  {}",
            r.name,
            r.stored,
            r.recomputed,
            (r.stored - r.recomputed).abs(),
            if good { "ok" } else { "MISMATCH" }
        );
    }
    if ok {
        EXIT_OK
    } else {
        eprintln!("error: stored diagnostics do not match the field files");
        EXIT_MISMATCH
    }
}

/// Runs the closed-form solver, and compares with a nonlinear solution found
/// in the output directory.
pub fn cmd_linear(inputs: &RunInputs) -> i32 {
    match run_linear(inputs) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn run_linear(inputs: &RunInputs) -> Result<i32> {
    let (config, data) = load_inputs(inputs)?;
    validate(&data, &config)?;
    let slab = config.slab()?;
    let zops = config.zops()?;
    let sol = linear_solve(&data, slab)?;
    let top = slab.nz_nodes() - 1;
    let diff = |a: &[f64], c: &[f64]| a.iter().zip(c).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let c = curl(&sol.b, &zops);
    let j0 = [&sol.j0.j0_1, &sol.j0.j0_2, &sol.j0.j0_3];
    let curl_res = (0..slab.nz_nodes())
        .flat_map(|k| (0..3).map(move |i| (k, i)))
        .map(|(k, i)| diff(c.comps[i].slice_values(k), &j0[i].values))
        .fold(0.0, f64::max);
    let residuals = LinearResiduals {
        curl: curl_res,
        div: divergence(&sol.b, &zops).max_abs(),
        bn: diff(sol.b.comps[2].slice_values(0), &data.f_minus.values)
            .max(diff(sol.b.comps[2].slice_values(top), &data.f_plus.values)),
        btau: diff(sol.b.comps[0].slice_values(0), &data.g1().values)
            .max(diff(sol.b.comps[1].slice_values(0), &data.g2().values)),
    };

    let out = inputs.out.as_path();
    std::fs::create_dir_all(out)?;
    let comparison = if out.join(files::B).exists() && out.join(files::J0).exists() {
        let b = FieldFile::load(&out.join(files::B))?.into_volume(3)?;
        let j0n = current_from_file(FieldFile::load(&out.join(files::J0))?)?;
        if b.grid != slab || j0n.j0_1.grid != slab.base {
            return Err(MhsError::GridMismatch("nonlinear solution in the output directory uses another grid".into()));
        }
        Some(OracleComparison {
            gap_b: b.max_abs_diff(&sol.b),
            gap_j0: j0n.max_abs_diff(&sol.j0),
            linear_scale: sol.b.max_abs(),
        })
    } else {
        None
    };

    FieldFile::from_volume(&sol.b).save(&out.join(files::LINEAR_B))?;
    current_to_file(&sol.j0)?.save(&out.join(files::LINEAR_J0))?;
    if inputs.slices {
        write_slices(&sol.b, out, "linear_b")?;
    }
    let report = LinearReport {
        version: REPORT_VERSION,
        flux: sol.flux,
        residuals,
        comparison,
        timestamp: now(),
    };
    write_json(&out.join(files::LINEAR_REPORT), &report)?;
    println!("fluxes: J1 = {:.12e}, J2 = {:.12e}", sol.flux.j1, sol.flux.j2);
    println!("{:<26}{:.6e}", "residual_curl", residuals.curl);
    println!("{:<26}{:.6e}", "residual_div", residuals.div);
    println!("{:<26}{:.6e}", "residual_bn", residuals.bn);
    println!("{:<26}{:.6e}", "residual_btau", residuals.btau);
    if let Some(c) = comparison {
        println!("{:<26}{:.6e}", "gap_b", c.gap_b);
        println!("{:<26}{:.6e}", "gap_j0", c.gap_j0);
        println!("{:<26}{:.6e}", "linear_scale", c.linear_scale);
    }
    Ok(EXIT_OK)
}

