use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use swlab::cli::{
    config_hash, JobConfig, EXIT_MALFORMED, EXIT_MISSING_FILE, EXIT_UNKNOWN_KIND, EXIT_USAGE, OUT_DIR_ENV,
};

fn swlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swlab"))
        .args(args)
        .env_remove(OUT_DIR_ENV)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(sub: &str, config: &Path, out: &Path) -> Value {
    let o = swlab(&[
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

const DIVERGENCE: &str = r#"
kind = "op-check"
seed = 7

[operator]
builtin = "divergence"
dim = 3
"#;

const ALPHA1: &str = r#"
kind = "experiment"

[experiment]
probe = "counterexample_alpha1"
dim = 2
ell = 1.0
alpha = 1.0
beta = -0.5
eps = [1e-3, 1e-4, 1e-5, 1e-6]
normalize = false
"#;

#[test]
fn op_check_confirms_divergence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "div.toml", DIVERGENCE);
    let report = run_ok("op", &cfg, &dir.path().join("out"));
    assert_eq!(report["verdicts"]["cocanceling"], "confirmed");
    assert_eq!(report["seed"], 7);
    let record: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/record.json")).unwrap()).unwrap();
    assert_eq!(record["status"], "completed");
    assert_eq!(record["config_hash"], report["config_hash"]);
}

#[test]
fn alpha_one_experiment_writes_a_divergent_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a1.toml", ALPHA1);
    let report = run_ok("experiment", &cfg, &dir.path().join("out"));
    assert_eq!(report["verdicts"]["trend"], "divergent");
    let series = report["result"]["observed"].as_array().unwrap();
    assert!(series.iter().any(|s| s[0] == "lhs_q"));
    let mut rd = csv::Reader::from_path(dir.path().join("out/sweep.csv")).unwrap();
    let headers: Vec<String> = rd.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers, ["param", "lhs", "rhs", "ratio", "fitted_law", "r2"]);
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0][4].starts_with("log:"));
    let lhs: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(lhs.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn reports_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "a1.toml", ALPHA1);
    let mut outs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = swlab(&[
            "experiment",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert!(o.status.success());
        outs.push(out);
    }
    for f in ["report.json", "sweep.csv"] {
        assert_eq!(
            std::fs::read(outs[0].join(f)).unwrap(),
            std::fs::read(outs[1].join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn errors_have_distinct_exit_codes_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    let unknown = write(dir.path(), "k.toml", "kind = \"bogus\"\n");
    let r = swlab(&["op", "--config", unknown.to_str().unwrap(), "--out", o]);
    assert_eq!(r.status.code(), Some(EXIT_UNKNOWN_KIND));
    assert!(String::from_utf8_lossy(&r.stderr).contains("`kind`"));

    let malformed = write(
        dir.path(),
        "m.toml",
        "kind = \"op-check\"\n[operator]\nbuiltin = \"divergence\"\ndim = \"x\"\n",
    );
    let r = swlab(&["op", "--config", malformed.to_str().unwrap(), "--out", o]);
    assert_eq!(r.status.code(), Some(EXIT_MALFORMED));
    assert!(String::from_utf8_lossy(&r.stderr).contains("operator.dim"));

    let r = swlab(&[
        "op",
        "--config",
        dir.path().join("absent.toml").to_str().unwrap(),
        "--out",
        o,
    ]);
    assert_eq!(r.status.code(), Some(EXIT_MISSING_FILE));

    let r = swlab(&["frobnicate"]);
    assert_eq!(r.status.code(), Some(EXIT_USAGE));
}

#[test]
fn ell_outside_the_admissible_range_fails_with_the_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "kind = \"experiment\"\n[experiment]\nprobe = \"ratio\"\ndim = 2\nell = 2.0\nfield = { family = \"bump\" }\n",
    );
    let out = dir.path().join("out");
    let r = swlab(&[
        "experiment",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stderr).contains("0 < ell < N"));
    let record: Value = serde_json::from_str(&std::fs::read_to_string(out.join("record.json")).unwrap()).unwrap();
    assert_eq!(record["status"], "failed");
}

#[test]
fn out_dir_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "div.toml", DIVERGENCE);
    let env_out = dir.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_swlab"))
        .args(["op", "--config", cfg.to_str().unwrap()])
        .env(OUT_DIR_ENV, &env_out)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(env_out.join("report.json").exists());
}

#[test]
fn seed_flag_overrides_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "div.toml", DIVERGENCE);
    let out = dir.path().join("out");
    let o = swlab(&[
        "op",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--seed",
        "99",
    ]);
    assert!(o.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 99);
    assert_eq!(report["config"]["seed"], 99);
}

#[test]
fn config_hash_ignores_key_order() {
    let a = JobConfig::parse("kind = \"op-check\"\nseed = 3\n[operator]\nbuiltin = \"curl\"\ndim = 3\n").unwrap();
    let b = JobConfig::parse("seed = 3\nkind = \"op-check\"\n[operator]\ndim = 3\nbuiltin = \"curl\"\n").unwrap();
    assert_eq!(config_hash(&a.canonical_json()), config_hash(&b.canonical_json()));
}

#[test]
fn merge_is_sorted_idempotent_and_flags_failures() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    let div = write(dir.path(), "div.toml", DIVERGENCE);
    let curl = write(dir.path(), "curl.toml", &DIVERGENCE.replace("divergence", "curl"));
    run_ok("op", &div, &runs.join("div"));
    run_ok("op", &curl, &runs.join("curl"));
    let bad = write(
        dir.path(),
        "bad.toml",
        "kind = \"experiment\"\n[experiment]\nprobe = \"ratio\"\ndim = 2\nell = 2.0\nfield = { family = \"bump\" }\n",
    );
    swlab(&[
        "experiment",
        "--config",
        bad.to_str().unwrap(),
        "--out",
        runs.join("bad").to_str().unwrap(),
    ]);

    let m1 = dir.path().join("m1");
    let o = swlab(&["merge", runs.to_str().unwrap(), "--out", m1.to_str().unwrap()]);
    assert!(o.status.success());
    let summary = std::fs::read_to_string(m1.join("summary.csv")).unwrap();
    let mut rd = csv::Reader::from_reader(summary.as_bytes());
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    let hashes: Vec<&str> = rows.iter().map(|r| r.get(0).unwrap()).collect();
    let mut sorted = hashes.clone();
    sorted.sort();
    assert_eq!(hashes, sorted);
    assert_eq!(rows.iter().filter(|r| &r[3] == "true").count(), 1);

    // merging the merged summary together with the originals changes nothing
    let m2 = dir.path().join("m2");
    let o = swlab(&[
        "merge",
        runs.to_str().unwrap(),
        m1.to_str().unwrap(),
        "--out",
        m2.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(summary, std::fs::read_to_string(m2.join("summary.csv")).unwrap());

    // a single record merges to itself
    let m3 = dir.path().join("m3");
    swlab(&[
        "merge",
        runs.join("div").to_str().unwrap(),
        "--out",
        m3.to_str().unwrap(),
    ]);
    let one: Value = serde_json::from_str(&std::fs::read_to_string(m3.join("summary.json")).unwrap()).unwrap();
    let rec: Value = serde_json::from_str(&std::fs::read_to_string(runs.join("div/record.json")).unwrap()).unwrap();
    assert_eq!(one["rows"][0], rec);
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for e in std::fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "toml") {
            JobConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 5);
}
