//! Run reports: the diagnostics JSON and the plain-text summary.

use serde::{Deserialize, Serialize};

use crate::divcurl::Fluxes;
use crate::fixed_point::DiagnosticsReport;

/// Report format version.
pub const REPORT_VERSION: u32 = 1;

/// Contents of `diagnostics.json` written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub version: u32,
    pub converged: bool,
    pub iterations: usize,
    pub flux: Option<Fluxes>,
    pub diagnostics: Option<DiagnosticsReport>,
    /// Power-iteration estimate of the contraction factor of the current
    /// equation at the final field, started from a seeded vector.
    pub upsilon_contraction: Option<f64>,
    pub seed: u64,
    pub error: Option<String>,
    /// Seconds since the Unix epoch when the report was written.
    pub timestamp: u64,
}

/// Residuals of the closed-form solution.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinearResiduals {
    /// `‖∇×b − j₀‖∞`.
    pub curl: f64,
    /// `‖∇·b‖∞`.
    pub div: f64,
    /// Largest deviation of `b₃` from `f` on the two faces.
    pub bn: f64,
    /// `‖(b₁, b₂)|_{z=0} − g‖∞`.
    pub btau: f64,
}

/// Gaps between the closed-form and a nonlinear solution on the same data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OracleComparison {
    /// `‖b − b_lin‖∞`.
    pub gap_b: f64,
    /// `‖j₀ − j₀_lin‖∞`.
    pub gap_j0: f64,
    /// `‖b_lin‖∞`, the size of the linear response.
    pub linear_scale: f64,
}

/// Contents of `linear.json` written by `linear`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearReport {
    pub version: u32,
    pub flux: Fluxes,
    pub residuals: LinearResiduals,
    pub comparison: Option<OracleComparison>,
    pub timestamp: u64,
}

/// Seconds since the Unix epoch.
pub fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Human-readable summary of a solve.
pub fn summary(report: &SolveReport) -> String {
    let mut s = String::new();
    if report.converged {
        s.push_str(&format!("converged after {} iterations\n", report.iterations));
    } else {
        s.push_str(&format!("not converged after {} iterations\n", report.iterations));
    }
    if let Some(e) = &report.error {
        s.push_str(&format!("error: {e}\n"));
    }
    if let Some(f) = report.flux {
        s.push_str(&format!("fluxes: J1 = {:.12e}, J2 = {:.12e}\n", f.j1, f.j2));
    }
    if let Some(d) = &report.diagnostics {
        s.push_str(&diagnostics_table(d));
    }
    if let Some(u) = report.upsilon_contraction {
        s.push_str(&format!("{:<26}{:.6e}\n", "upsilon_contraction", u));
    }
    s
}

/// One `name value` line per diagnostics entry.
pub fn diagnostics_table(d: &DiagnosticsReport) -> String {
    d.entries()
        .iter()
        .map(|(k, v)| format!("{k:<26}{v:.6e}\n"))
        .collect()
}
