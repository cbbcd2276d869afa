//! Grids, singular-kernel quadrature, weighted norms and Fourier multipliers.

pub mod fft;
pub mod geometry;
pub mod grid;
pub mod kernel;
pub mod norm;
pub mod potential;
pub mod transform;

pub use grid::{FieldSamples, GridSpec};
pub use kernel::{kernel_regularity_check, riesz_constant, KernelRegularityReport, KernelSpec};
pub use norm::{weighted_norm_closed, weighted_norm_samples, ClosedNormOptions, Domain};
pub use potential::{potential_on_grid, riesz_potential, Source, SourceNodes};
pub use transform::{riesz_transform, spectral_derivative};
