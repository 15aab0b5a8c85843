//! Error type shared by every solver stage.

use thiserror::Error;

/// Failures reported by the solver and its I/O layer.
#[derive(Debug, Error)]
pub enum MhsError {
    /// Grid dimensions are unusable (odd, too small, or mismatched).
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields that must share a grid do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Spectral coefficients do not describe a real field.
    #[error("conjugate symmetry violated: relative imaginary residue {residue:.3e}")]
    SymmetryViolation { residue: f64 },

    /// The normal data at the two faces carry different fluxes.
    #[error("compatibility violated: mean(f_minus) = {mean_minus:.6e}, mean(f_plus) = {mean_plus:.6e}")]
    CompatibilityViolation { mean_minus: f64, mean_plus: f64 },

    /// Boundary data exceed the configured smallness bound.
    #[error("smallness violated: {field} has Hölder estimate {estimate:.6e} > {limit:.6e}")]
    SmallnessViolation {
        field: &'static str,
        estimate: f64,
        limit: f64,
    },

    /// The vertical perturbation is too close to -1 for the characteristics to stay transversal.
    #[error("field too large: max |b3| = {max_b3:.6e} exceeds {limit:.6e}")]
    FieldTooLarge { max_b3: f64, limit: f64 },

    /// An ODE step produced a non-finite state.
    #[error("integration step failed at z-node {node}: {reason}")]
    StepFailure { node: usize, reason: String },

    /// Newton inversion of the flow map did not reach the tolerance.
    #[error("flow inversion failed at z-node {node}: residual {residual:.3e} after {iterations} steps")]
    InversionFailure {
        node: usize,
        residual: f64,
        iterations: usize,
    },

    /// The horizontal mean of the vertical current is not zero on some slice.
    #[error("slice mean of j3 is {value:.3e} at z-node {node}")]
    SliceMeanViolation { node: usize, value: f64 },

    /// The Neumann iteration for the inflow current diverged.
    #[error("Neumann iteration diverged after {iterations} steps (last increment {last_increment:.3e})")]
    NeumannDivergence {
        iterations: usize,
        last_increment: f64,
    },

    /// The outer fixed-point iteration did not converge.
    #[error("fixed point not reached after {iterations} iterations: last delta {delta:.3e}, contraction estimate {contraction:.3e}")]
    NonConvergence {
        iterations: usize,
        delta: f64,
        contraction: f64,
    },

    /// The force field is not a gradient of a single-valued pressure.
    #[error("pressure path dependence: curl residual {curl:.3e}, mean defects ({defect_x:.3e}, {defect_y:.3e})")]
    PathDependence {
        curl: f64,
        defect_x: f64,
        defect_y: f64,
    },

    /// Configuration value out of range or unknown key.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Malformed boundary-data expression or table.
    #[error("parse error: {0}")]
    Parse(String),

    /// Malformed field file.
    #[error("field file format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, MhsError>;
