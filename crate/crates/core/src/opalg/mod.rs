//! Homogeneous constant-coefficient operators: symbols, structural
//! properties and the projection maps behind the L¹ duality estimate.

pub mod multi_index;
pub mod operator;
pub mod projection;
pub mod properties;
pub mod sampling;
pub mod subspace;

pub use multi_index::MultiIndex;
pub use operator::{Builtin, CMatrix, HomogeneousOperator, OperatorSpec};
pub use projection::{eval_h_symbol, solve_projection_maps, tphi_constant, tphi_eval, ProjectionMaps, TphiValue};
pub use properties::{canceling_check, cocanceling_check, ellipticity_check, PropertyReport, Verdict, Witness};
pub use subspace::SubspaceBasis;

/// Default sample count for the sampled checks: 64 low-discrepancy plus 64
/// random directions.
pub const DEFAULT_SAMPLES: usize = 128;
