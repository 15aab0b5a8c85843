//! Pseudo-spectral fixed-point solver for magneto-hydrostatic equilibria
//! `j×B = ∇p`, `∇×B = j`, `∇·B = 0` on the periodic slab `T²×[0,L]`.
//!
//! The field is written `B = e₃ + b`. Boundary data prescribe the normal
//! component `B·n = 1 + f` on both faces and the tangential components
//! `(B₁,B₂) = g` on the inflow face `z = 0`. The solver iterates
//!
//! 1. characteristics of `b` and the transport of the current along them
//!    ([`transport`]);
//! 2. the nonlocal integral equation for the inflow current `j₀`
//!    ([`current_equation`]);
//! 3. the div-curl problem that returns the next perturbation ([`divcurl`]);
//!
//! until `b` stops changing ([`fixed_point`]). A closed-form solver for the
//! linearized problem ([`linear_oracle`]) provides an independent reference.
//!
//! Fourier convention on `T²`: `f̂(ξ) = ∫ f(r) e^{−iξ·r} dr` and
//! `f(r) = (2π)⁻² Σ f̂(ξ) e^{iξ·r}`, so the zero mode equals `(2π)²⟨f⟩`.

pub mod boundary_data;
pub mod cli_io;
pub mod current_equation;
pub mod divcurl;
pub mod error;
pub mod fixed_point;
pub mod linear_oracle;
pub mod spectral_core;
pub mod transport;

pub use boundary_data::{BoundaryData, DerivedBoundary};
pub use cli_io::config::SolverConfig;
pub use current_equation::{CurrentBoundary, KernelCoeffs};
pub use divcurl::{Fluxes, VectorPotential};
pub use error::{MhsError, Result};
pub use fixed_point::{DiagnosticsReport, SolverState};
pub use linear_oracle::LinearSolution;
pub use spectral_core::{
    ScalarField2, ScalarField3, SlabGrid3, SpectralField2, TorusGrid2, VectorField2,
    VectorField3,
};
pub use transport::FlowData;
