//! Runs a TOML job configuration and prints its record.
//!
//! cargo run --example run_config -- configs/op_divergence.toml [out-dir]

use std::path::PathBuf;

use swlab::cli::{run, RunOptions};

fn main() {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().unwrap_or_else(|| "configs/op_divergence.toml".into()));
    let opts = RunOptions {
        out: args.next().map(PathBuf::from),
        ..RunOptions::default()
    };
    match run(&config, &opts) {
        Ok(record) => println!("{}", serde_json::to_string_pretty(&record).unwrap()),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.code);
        }
    }
}
