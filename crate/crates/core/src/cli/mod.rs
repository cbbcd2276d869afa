//! Job configuration, dispatch and run records behind the `swlab` binary.

mod config;
mod record;
mod run;

pub use config::{
    ConditionKind, ConfigError, ExperimentSpec, FamilySpec, JobConfig, JobKind, MergeSpec, OpCheckSpec, PotentialSpec,
    ProbeKind, WeightJobSpec,
};
pub use record::{config_hash, report_merge, MergeSummary, RunRecord, RunStatus, TOOL_VERSION};
pub use run::{
    merge_to, run, run_config, CliError, RunOptions, SweepRow, DEFAULT_OUT_DIR, EXIT_EXECUTION, EXIT_MALFORMED,
    EXIT_MISSING_FILE, EXIT_OK, EXIT_UNKNOWN_KIND, EXIT_USAGE, OUT_DIR_ENV,
};
