//! Grids, transforms between node values and Fourier coefficients on `T²`,
//! Fourier multipliers, z-direction quadrature on the slab, off-grid
//! interpolation, and Hölder-norm estimates.

pub mod fft;
pub mod grid;
pub mod holder;
pub mod interp;
pub mod multipliers;
pub mod slab;

pub use fft::{from_spectral, to_spectral, SpectralField2};
pub use grid::{
    max_abs, max_abs_diff, ScalarField2, ScalarField3, SlabGrid3, TorusGrid2, VectorField2,
    VectorField3,
};
pub use holder::{holder_norm_estimate, holder_norm_estimate3, HolderOptions};
pub use interp::{PointBasis, TrigInterpolator};
pub use slab::ZOps;

pub use num_complex::Complex64;
