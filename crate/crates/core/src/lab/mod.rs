//! Scale-invariance sweeps, counterexample and necessity probes, and the
//! duality bound check.

pub mod lemma31;
pub mod probes;
pub mod ratio;
pub mod trend;

pub use lemma31::{kernel_field, lemma31_check, Lemma31Report, PairResult};
pub use probes::{
    claim_convergence_probe, counterexample_alpha1_probe, counterexample_scalar_probe, mollifier_limit_probe,
    necessity_probe, scalar_annulus_masses, scalar_eps_sweep, ClaimReport, DivfreeProbeSpec, RadialSource,
    ScalarProbeSpec,
};
pub use ratio::{
    constant_estimator, inequality_ratio, scale_invariance_suite, Constraint, EstimatorReport, GridPolicy, RatioReport,
    CONSTRAINT_TOL,
};
pub use trend::{classify, FittedLaw, TrendPolicy, TrendReport, TrendVerdict};
