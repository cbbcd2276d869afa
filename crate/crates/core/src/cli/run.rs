//! Job dispatch and artifact writing.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{
    ConditionKind, ConfigError, ExperimentSpec, JobConfig, JobKind, OpCheckSpec, PotentialSpec, ProbeKind,
    WeightJobSpec,
};
use super::record::{config_hash, report_merge, RunRecord, RunStatus, TOOL_VERSION};
use crate::error::Error;
use crate::lab::{
    claim_convergence_probe, counterexample_alpha1_probe, counterexample_scalar_probe, inequality_ratio, lemma31_check,
    mollifier_limit_probe, necessity_probe, scalar_eps_sweep, scale_invariance_suite, Constraint, DivfreeProbeSpec,
    FittedLaw, ScalarProbeSpec, TrendReport,
};
use crate::opalg::{
    canceling_check, cocanceling_check, ellipticity_check, solve_projection_maps, tphi_constant, HomogeneousOperator,
    OperatorSpec,
};
use crate::quad::{
    kernel_regularity_check, potential_on_grid, riesz_potential, FieldSamples, GridSpec, KernelSpec, Source,
};
use crate::weights::{
    bump_condition, bump_u3, hardy_constant, pesopeso_condition, pointwise_condition, sawyer_testing, sw_admissible,
    BallFamily, ConditionReport, GrowthLaw, HardyVariant, Regime, SWParams,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SWLAB_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "swlab-out";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNKNOWN_KIND: i32 = 3;
pub const EXIT_MALFORMED: i32 = 4;
pub const EXIT_MISSING_FILE: i32 = 5;
pub const EXIT_EXECUTION: i32 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::MissingFile(_) => EXIT_MISSING_FILE,
            ConfigError::UnknownKind(_) => EXIT_UNKNOWN_KIND,
            ConfigError::Malformed { .. } => EXIT_MALFORMED,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => EXIT_MISSING_FILE,
            Error::Config { .. }
            | Error::Format(_)
            | Error::Inadmissible(_)
            | Error::InvalidArgument(_)
            | Error::MalformedOperator(_)
            | Error::UnsupportedBuiltin { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotIntegrable { .. }
            | Error::OutsideGrid { .. } => EXIT_MALFORMED,
            _ => EXIT_EXECUTION,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Output directory; overrides the config's `out` and the environment.
    pub out: Option<PathBuf>,
    /// Overrides the config's `seed`.
    pub seed: Option<u64>,
    /// Kind the invoking subcommand runs.
    pub expect: Option<JobKind>,
}

/// One row of `sweep.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub fitted_law: String,
    pub r2: Option<f64>,
}

#[derive(Default)]
struct JobOutput {
    result: Value,
    verdicts: BTreeMap<String, String>,
    key_constant: Option<f64>,
    sweep: Vec<SweepRow>,
    field: Option<FieldSamples>,
}

type JobResult = std::result::Result<JobOutput, Error>;

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn cfg_err(key: &str, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

fn out_dir(opts: &RunOptions, cfg: &JobConfig, base: &Path) -> PathBuf {
    if let Some(o) = &opts.out {
        return o.clone();
    }
    if let Some(o) = &cfg.out {
        return base.join(o);
    }
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

/// Runs the job in `config_path`, writing `report.json`, `sweep.csv`
/// (for sweeps), `potential.bin` (for potentials) and `record.json` to the
/// output directory. Merge jobs write `summary.json` and `summary.csv`.
pub fn run(config_path: &Path, opts: &RunOptions) -> std::result::Result<RunRecord, CliError> {
    let mut cfg = JobConfig::load(config_path)?;
    if let Some(k) = opts.expect {
        if k != cfg.kind {
            return Err(CliError {
                code: EXIT_MALFORMED,
                message: format!(
                    "malformed config at `kind`: subcommand `{}` runs `{}`, config has `{}` (use `{}`)",
                    k.subcommand(),
                    k.as_str(),
                    cfg.kind.as_str(),
                    cfg.kind.subcommand()
                ),
            });
        }
    }
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = out_dir(opts, &cfg, &base);
    if cfg.kind == JobKind::ReportMerge {
        let inputs: Vec<PathBuf> = cfg
            .merge
            .as_ref()
            .expect("checked")
            .inputs
            .iter()
            .map(|p| base.join(p))
            .collect();
        return merge_to(&inputs, &out);
    }
    run_config(&cfg, &out)
}

fn write_file(path: &Path, bytes: &[u8]) -> std::result::Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::from(Error::io(path, e)))
}

/// Runs an already parsed configuration into `out`.
pub fn run_config(cfg: &JobConfig, out: &Path) -> std::result::Result<RunRecord, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::from(Error::io(out, e)))?;
    let canonical = cfg.canonical_json();
    let hash = config_hash(&canonical);
    let start = Instant::now();
    let outcome = dispatch(cfg);
    let wall = start.elapsed().as_secs_f64();
    let mut record = RunRecord {
        config_hash: hash.clone(),
        tool_version: TOOL_VERSION.to_string(),
        kind: cfg.kind.as_str().to_string(),
        seed: cfg.seed,
        status: RunStatus::Completed,
        wall_time_s: wall,
        verdicts: BTreeMap::new(),
        key_constant: None,
        artifacts: Vec::new(),
        error: None,
    };
    let output = match outcome {
        Ok(o) => o,
        Err(e) => {
            record.status = RunStatus::Failed;
            record.error = Some(e.to_string());
            record.artifacts.push("record.json".into());
            let text = serde_json::to_string_pretty(&record).expect("record renders");
            write_file(&out.join("record.json"), text.as_bytes())?;
            return Err(e.into());
        }
    };
    let report = json!({
        "tool_version": TOOL_VERSION,
        "kind": cfg.kind.as_str(),
        "seed": cfg.seed,
        "config_hash": hash,
        "config": canonical,
        "verdicts": output.verdicts,
        "key_constant": output.key_constant,
        "result": output.result,
    });
    write_file(
        &out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("renders").as_bytes(),
    )?;
    record.artifacts.push("report.json".into());
    if !output.sweep.is_empty() {
        let path = out.join("sweep.csv");
        write_sweep(&path, &output.sweep).map_err(CliError::from)?;
        record.artifacts.push("sweep.csv".into());
    }
    if let Some(f) = &output.field {
        f.save(out.join("potential.bin")).map_err(CliError::from)?;
        record.artifacts.push("potential.bin".into());
    }
    record.artifacts.push("record.json".into());
    record.verdicts = output.verdicts;
    record.key_constant = output.key_constant;
    let text = serde_json::to_string_pretty(&record).expect("record renders");
    write_file(&out.join("record.json"), text.as_bytes())?;
    Ok(record)
}

/// Merges records under `inputs` into `out/summary.json` and `out/summary.csv`.
pub fn merge_to(inputs: &[PathBuf], out: &Path) -> std::result::Result<RunRecord, CliError> {
    let start = Instant::now();
    let summary = report_merge(inputs)?;
    std::fs::create_dir_all(out).map_err(|e| CliError::from(Error::io(out, e)))?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let text = serde_json::to_string_pretty(&summary).expect("summary renders");
    write_file(&out.join("summary.json"), text.as_bytes())?;
    summary.write_csv(&out.join("summary.csv"))?;
    let failed = summary.rows.iter().filter(|r| r.status == RunStatus::Failed).count();
    let mut verdicts = BTreeMap::new();
    verdicts.insert("rows".into(), summary.rows.len().to_string());
    verdicts.insert("failed_rows".into(), failed.to_string());
    Ok(RunRecord {
        config_hash: config_hash(&to_json(
            &summary.rows.iter().map(|r| &r.config_hash).collect::<Vec<_>>(),
        )),
        tool_version: TOOL_VERSION.to_string(),
        kind: JobKind::ReportMerge.as_str().to_string(),
        seed: 0,
        status: RunStatus::Completed,
        wall_time_s: start.elapsed().as_secs_f64(),
        verdicts,
        key_constant: None,
        artifacts: vec!["summary.json".into(), "summary.csv".into()],
        error: None,
    })
}

fn write_sweep(path: &Path, rows: &[SweepRow]) -> crate::error::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn dispatch(cfg: &JobConfig) -> JobResult {
    match cfg.kind {
        JobKind::OpCheck => op_check(
            cfg.operator.as_ref().expect("checked"),
            &cfg.op_check.clone().unwrap_or_default(),
            cfg.seed,
        ),
        JobKind::WeightCheck => weight_check(cfg.weights.as_ref().expect("checked")),
        JobKind::PotentialEval => potential_eval(cfg.potential.as_ref().expect("checked"), cfg.seed),
        JobKind::Experiment => experiment(cfg.experiment.as_ref().expect("checked"), cfg),
        JobKind::ReportMerge => Err(cfg_err("kind", "report-merge runs through merge_to")),
    }
}

fn op_check(spec: &OperatorSpec, checks: &OpCheckSpec, seed: u64) -> JobResult {
    let op = HomogeneousOperator::from_spec(spec)?;
    let mut out = JobOutput::default();
    let mut result = serde_json::Map::new();
    result.insert("operator".into(), to_json(&op.to_spec()));
    for check in &checks.checks {
        match check.as_str() {
            "cocanceling" => {
                let r = cocanceling_check(&op);
                out.verdicts.insert("cocanceling".into(), r.verdict.as_str().into());
                result.insert("cocanceling".into(), to_json(&r));
            }
            "canceling" => {
                let r = canceling_check(&op, checks.samples, checks.tol, seed);
                out.verdicts.insert("canceling".into(), r.verdict.as_str().into());
                result.insert("canceling".into(), to_json(&r));
            }
            "elliptic" => {
                let r = ellipticity_check(&op, checks.samples, true, checks.tol, seed);
                out.verdicts.insert("elliptic".into(), r.verdict.as_str().into());
                result.insert("elliptic".into(), to_json(&r));
            }
            "projection" => match solve_projection_maps(&op) {
                Ok(k) => {
                    let c = tphi_constant(&op, &k);
                    out.verdicts.insert("projection".into(), "solved".into());
                    out.key_constant = Some(c);
                    result.insert(
                        "projection".into(),
                        json!({ "residual": k.residual, "norm_sum": k.norm_sum(), "tphi_constant": c }),
                    );
                }
                Err(Error::NoIdentity { residual }) => {
                    out.verdicts.insert("projection".into(), "no_identity".into());
                    result.insert("projection".into(), json!({ "residual": residual }));
                }
                Err(e) => return Err(e),
            },
            other => return Err(cfg_err("op_check.checks", format!("unknown check `{other}`"))),
        }
    }
    out.result = Value::Object(result);
    Ok(out)
}

fn law_label(law: Option<&GrowthLaw>) -> (String, Option<f64>) {
    match law {
        Some(l) => (
            format!("{}:{:.6}", to_json(&l.kind).as_str().unwrap_or(""), l.slope),
            Some(l.r2),
        ),
        None => (String::new(), None),
    }
}

fn condition_output(report: ConditionReport) -> JobOutput {
    let mut out = JobOutput::default();
    out.verdicts.insert(
        report.condition.clone(),
        if report.finite { "finite" } else { "infinite" }.into(),
    );
    out.key_constant = report.constant;
    let (label, r2) = law_label(report.divergence_law.as_ref());
    out.sweep = report
        .samples
        .iter()
        .map(|&(p, v)| SweepRow {
            param: p,
            lhs: Some(v),
            rhs: None,
            ratio: None,
            fitted_law: label.clone(),
            r2,
        })
        .collect();
    out.result = to_json(&report);
    out
}

fn weight_check(spec: &WeightJobSpec) -> JobResult {
    let v = || {
        spec.v
            .as_ref()
            .ok_or_else(|| cfg_err("weights.v", "this condition needs a second weight"))
    };
    let radii = || {
        if spec.radii.is_empty() {
            Err(cfg_err("weights.radii", "at least one radius is required"))
        } else {
            Ok(spec.radii.as_slice())
        }
    };
    let family = || -> crate::error::Result<BallFamily> {
        Ok(spec.balls.clone().unwrap_or_else(|| BallFamily::standard(spec.dim)))
    };
    let params = || SWParams::new(spec.dim, spec.p, spec.q, spec.ell, spec.alpha, spec.beta);
    let (d, ell, q, t) = (spec.dim, spec.ell, spec.q, spec.truncation);
    match spec.condition {
        ConditionKind::Admissibility => {
            let p = params()?;
            let regime = spec
                .regime
                .unwrap_or(if p.p > 1.0 { Regime::PGt1 } else { Regime::PEq1 });
            let a = sw_admissible(&p, regime);
            let mut out = JobOutput::default();
            out.verdicts
                .insert("admissible".into(), if a.pass { "pass" } else { "fail" }.into());
            out.result = json!({ "params": p, "admissibility": a });
            Ok(out)
        }
        ConditionKind::Pointwise => Ok(condition_output(pointwise_condition(
            &spec.u,
            v()?,
            d,
            ell,
            q,
            radii()?,
            t,
        )?)),
        ConditionKind::HardyW2 | ConditionKind::HardyW4 => {
            let variant = if spec.condition == ConditionKind::HardyW2 {
                HardyVariant::W2
            } else {
                HardyVariant::W4
            };
            Ok(condition_output(hardy_constant(
                &spec.u,
                v()?,
                d,
                q,
                variant,
                radii()?,
                t,
            )?))
        }
        ConditionKind::Tail => Ok(condition_output(pesopeso_condition(
            &spec.u,
            v()?,
            d,
            ell,
            q,
            radii()?,
            t,
        )?)),
        ConditionKind::Sawyer => Ok(condition_output(sawyer_testing(&spec.u, v()?, &params()?, &family()?)?)),
        ConditionKind::Bump => {
            let r = spec
                .bump_r
                .ok_or_else(|| cfg_err("weights.bump_r", "bump exponent required"))?;
            Ok(condition_output(bump_condition(
                &spec.u,
                v()?,
                &params()?,
                r,
                &family()?,
            )?))
        }
        ConditionKind::BallTail => {
            let r = bump_u3(&spec.u, spec.p, d, ell, q, &family()?, radii()?, t)?;
            let mut out = condition_output(r.ball.clone());
            out.verdicts
                .insert("chain".into(), if r.chain_holds { "holds" } else { "fails" }.into());
            out.result = to_json(&r);
            Ok(out)
        }
    }
}

fn potential_eval(spec: &PotentialSpec, seed: u64) -> JobResult {
    let field = spec.field.build(spec.dim, seed)?;
    let kernel = KernelSpec::riesz(spec.dim, spec.ell)?;
    let half = match spec.half_width {
        Some(h) => h,
        None => crate::lab::GridPolicy::default().half_width(&field)?,
    };
    let grid = GridSpec::new(spec.dim, half, spec.n)?;
    let samples = FieldSamples::sample(grid, &field)?;
    let pot = potential_on_grid(&samples, &kernel)?;
    let direct = if spec.points.is_empty() {
        Vec::new()
    } else {
        riesz_potential(Source::Samples(&samples), &kernel, &spec.points)?
    };
    let mut out = JobOutput::default();
    let max = pot.max_abs();
    out.key_constant = Some(max);
    out.verdicts.insert("potential".into(), "evaluated".into());
    let mut result = json!({
        "field_id": field.id,
        "grid": grid,
        "kernel_gamma": kernel.gamma(),
        "max_abs": max,
        "points": spec.points,
        "direct_values": direct,
    });
    if spec.regularity_pairs > 0 {
        let r = kernel_regularity_check(&kernel, spec.regularity_pairs, seed)?;
        out.verdicts
            .insert("kernel_regularity".into(), if r.pass { "pass" } else { "fail" }.into());
        result["kernel_regularity"] = to_json(&r);
    }
    out.sweep = spec
        .points
        .iter()
        .zip(&direct)
        .map(|(x, v)| SweepRow {
            param: x.iter().map(|t| t * t).sum::<f64>().sqrt(),
            lhs: Some(v.iter().map(|t| t * t).sum::<f64>().sqrt()),
            rhs: None,
            ratio: None,
            fitted_law: String::new(),
            r2: None,
        })
        .collect();
    out.result = result;
    out.field = Some(pot);
    Ok(out)
}

fn trend_label(law: Option<&FittedLaw>) -> (String, Option<f64>) {
    match law {
        Some(l) => (
            format!("{}:{:.6}", to_json(&l.kind).as_str().unwrap_or(""), l.slope),
            Some(l.r2),
        ),
        None => (String::new(), None),
    }
}

fn trend_output(report: TrendReport) -> JobOutput {
    let mut out = JobOutput::default();
    out.verdicts
        .insert("trend".into(), to_json(&report.verdict).as_str().unwrap_or("").into());
    if report.degenerate {
        out.verdicts.insert("degenerate".into(), "true".into());
    }
    out.key_constant = report
        .law
        .as_ref()
        .map(|l| if l.slope == 0.0 { l.intercept } else { l.slope });
    let (label, r2) = trend_label(report.law.as_ref());
    let param = ["a", "eps", "lambda"]
        .iter()
        .find_map(|k| report.series(k))
        .unwrap_or(&report.params)
        .to_vec();
    let lhs = report.series("lhs").map(<[f64]>::to_vec);
    let rhs = report.series("rhs").map(<[f64]>::to_vec);
    let ratio = report.series("ratio").map(<[f64]>::to_vec);
    out.sweep = param
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let l = lhs.as_ref().map(|v| v[i]);
            let r = rhs.as_ref().map(|v| v[i]);
            SweepRow {
                param: p,
                lhs: l,
                rhs: r,
                ratio: ratio.as_ref().map(|v| v[i]).or(match (l, r) {
                    (Some(a), Some(b)) if b != 0.0 => Some(a / b),
                    _ => None,
                }),
                fitted_law: label.clone(),
                r2,
            }
        })
        .collect();
    out.result = to_json(&report);
    out
}

fn need<'a, T>(v: &'a [T], key: &str) -> crate::error::Result<&'a [T]> {
    if v.is_empty() {
        Err(cfg_err(&format!("experiment.{key}"), "must not be empty"))
    } else {
        Ok(v)
    }
}

fn experiment(spec: &ExperimentSpec, cfg: &JobConfig) -> JobResult {
    let policy = &cfg.trend;
    let seed = cfg.seed;
    let operator = || -> crate::error::Result<HomogeneousOperator> {
        spec.operator
            .as_ref()
            .ok_or_else(|| cfg_err("experiment.operator", "this probe needs an operator"))
            .and_then(HomogeneousOperator::from_spec)
    };
    let field = || {
        spec.field
            .as_ref()
            .ok_or_else(|| cfg_err("experiment.field", "this probe needs a field"))
    };
    let normalize = || {
        spec.normalize
            .ok_or_else(|| cfg_err("experiment.normalize", "pin the mollifier normalization"))
    };
    let p_eq_1 = || SWParams::p_eq_1(spec.dim, spec.ell, spec.alpha, spec.beta);
    match spec.probe {
        ProbeKind::Ratio => {
            let params = p_eq_1()?;
            let op = spec.operator.as_ref().map(HomogeneousOperator::from_spec).transpose()?;
            let constraint = op.as_ref().map_or(Constraint::Scalar, Constraint::Kernel);
            let f = field()?.build(spec.dim, seed)?;
            let r = inequality_ratio(&f, constraint, &params, &spec.grid)?;
            let mut out = JobOutput::default();
            out.verdicts.insert(
                "ratio".into(),
                if r.degenerate { "degenerate" } else { "computed" }.into(),
            );
            out.key_constant = r.ratio;
            out.sweep = vec![SweepRow {
                param: 1.0,
                lhs: Some(r.lhs),
                rhs: Some(r.rhs),
                ratio: r.ratio,
                fitted_law: String::new(),
                r2: None,
            }];
            out.result = to_json(&r);
            Ok(out)
        }
        ProbeKind::ScaleInvariance => {
            let params = p_eq_1()?;
            let op = spec.operator.as_ref().map(HomogeneousOperator::from_spec).transpose()?;
            let constraint = op.as_ref().map_or(Constraint::Scalar, Constraint::Kernel);
            let fam = field()?.clone();
            fam.at_eps(1.0)?;
            let (trend, reports) = scale_invariance_suite(
                |e| fam.at_eps(e)?.build(spec.dim, seed),
                need(&spec.eps, "eps")?,
                constraint,
                &params,
                &spec.grid,
                policy,
            )?;
            let mut out = trend_output(trend);
            out.result = json!({ "trend": out.result, "ratios": reports });
            Ok(out)
        }
        ProbeKind::CounterexampleScalar => {
            let params = p_eq_1()?;
            let eps = need(&spec.eps, "eps")?;
            if eps.len() != 1 {
                return Err(cfg_err(
                    "experiment.eps",
                    "the annulus sweep takes a single mollifier scale",
                ));
            }
            let s = ScalarProbeSpec {
                a_list: need(&spec.a, "a")?.to_vec(),
                eps: eps[0],
                normalize: normalize()?,
            };
            Ok(trend_output(counterexample_scalar_probe(&params, &s, policy)?))
        }
        ProbeKind::ScalarEpsSweep => {
            let params = p_eq_1()?;
            let a = need(&spec.a, "a")?;
            Ok(trend_output(scalar_eps_sweep(
                &params,
                a[0],
                need(&spec.eps, "eps")?,
                normalize()?,
                policy,
            )?))
        }
        ProbeKind::CounterexampleAlpha1 => {
            let params = p_eq_1()?;
            let d = DivfreeProbeSpec::default();
            let s = DivfreeProbeSpec {
                eps_list: need(&spec.eps, "eps")?.to_vec(),
                kappa: spec.kappa.unwrap_or(d.kappa),
                normalize: normalize()?,
                n: spec.n.unwrap_or(d.n),
            };
            Ok(trend_output(counterexample_alpha1_probe(&params, &s, policy)?))
        }
        ProbeKind::Necessity => {
            let params = p_eq_1()?;
            Ok(trend_output(necessity_probe(
                &operator()?,
                &params,
                need(&spec.lambdas, "lambdas")?,
                policy,
            )?))
        }
        ProbeKind::ClaimConvergence => {
            let c = claim_convergence_probe(
                spec.dim,
                spec.ell,
                need(&spec.lambdas, "lambdas")?,
                need(&spec.radii, "radii")?,
            )?;
            let mut out = JobOutput::default();
            out.verdicts
                .insert("trend".into(), to_json(&c.verdict).as_str().unwrap_or("").into());
            out.verdicts.insert("monotone".into(), c.monotone.to_string());
            out.key_constant = c.curves.first().and_then(|k| k.2);
            for (r, errs, slope) in &c.curves {
                let label = slope.map_or(String::new(), |s| format!("power:{s:.6}@{r}"));
                out.sweep.extend(c.lambdas.iter().zip(errs).map(|(&l, &e)| SweepRow {
                    param: l,
                    lhs: Some(e),
                    rhs: None,
                    ratio: None,
                    fitted_law: label.clone(),
                    r2: None,
                }));
            }
            out.result = to_json(&c);
            Ok(out)
        }
        ProbeKind::MollifierLimit => {
            let radius = need(&spec.radii, "radii")?[0];
            Ok(trend_output(mollifier_limit_probe(
                spec.dim,
                spec.ell,
                need(&spec.eps, "eps")?,
                radius,
                normalize()?,
            )?))
        }
        ProbeKind::Lemma31 => {
            let op = operator()?;
            let n = spec.n.unwrap_or(if spec.dim <= 2 { 96 } else { 24 });
            let r = lemma31_check(&op, spec.count.unwrap_or(100), seed, n)?;
            let mut out = JobOutput::default();
            out.verdicts.insert(
                "lemma31".into(),
                if r.violations == 0 { "holds" } else { "violated" }.into(),
            );
            out.key_constant = Some(r.max_ratio);
            out.sweep = r
                .pairs
                .iter()
                .enumerate()
                .map(|(i, p)| SweepRow {
                    param: i as f64,
                    lhs: Some(p.lhs),
                    rhs: Some(p.rhs),
                    ratio: Some(p.lhs / p.rhs),
                    fitted_law: String::new(),
                    r2: None,
                })
                .collect();
            out.result = to_json(&r);
            Ok(out)
        }
    }
}
