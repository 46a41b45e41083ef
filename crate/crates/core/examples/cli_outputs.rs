//! Writes the null, sim, compare and detect tables for a scenario into a
//! directory, the same files the `flsim` binary produces.
//!
//! cargo run --release --example cli_outputs -- [scenario.toml] [out_dir]

use std::path::PathBuf;

use flsim::runner::{run_compare, run_detect, run_null, run_sim, Overrides};
use flsim::scenario::load_scenario;

fn main() -> flsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario2.toml")));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("flsim-example"));
    let s = Overrides {
        pings: Some(2),
        ..Overrides::default()
    }
    .apply(&load_scenario(&scenario)?)?;

    let mut files = run_null(&s, &out)?.tables;
    files.extend(run_sim(&s, &out)?.tables);
    let (cmp, w) = run_compare(&s, &out)?;
    files.extend(w.tables);
    files.extend(run_detect(&s, &out)?.1.tables);
    for f in &files {
        println!("{}", f.display());
    }
    println!("comparison {}", if cmp.passed() { "passed" } else { "failed" });
    Ok(())
}
