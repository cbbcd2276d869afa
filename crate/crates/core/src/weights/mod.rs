//! Power and radial weights, Stein–Weiss admissibility and the weighted
//! conditions (pointwise, Hardy, testing, bump).

pub mod conditions;
pub mod params;
pub mod radial;
pub mod report;
pub mod testing;
pub mod weight;

pub use conditions::{bump_u3, hardy_constant, pesopeso_condition, pointwise_condition, BallTailReport, HardyVariant};
pub use params::{sw_admissible, Admissibility, Regime, SWParams, Violation};
pub use report::{fit_growth, relative_spread, ConditionReport, GrowthLaw, LawKind, Truncation};
pub use testing::{bump_condition, sawyer_testing, Ball, BallFamily};
pub use weight::{PowerWeight, RadialWeight, Weight};
