//! The full command-line pipeline (synth → run → analyze → report) driven
//! from Rust through the same argument parser as the `mpdhp` binary.
//!
//! ```text
//! cargo run --release --example cli_pipeline
//! ```

use std::path::Path;

use mpdhp::cli::run_from;

/// Runs the pipeline in `dir` and returns the aggregated Table-1 CSV.
pub fn pipeline(dir: &Path) -> mpdhp::Result<String> {
    let p = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let manifest = dir.join("experiment.toml");
    std::fs::write(
        &manifest,
        "seed = 5\n\n[run]\nkernel = \"minute\"\ntheta0 = 0.01\nr = 1.0\nalpha_samples = 300\n",
    )?;
    let scenario = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/null.toml");
    run_from(["mpdhp", "synth", "--scenario", scenario, "--out", &p("docs.jsonl"), "--labels", &p("labels.csv")])?;
    let config = manifest.to_string_lossy().into_owned();
    run_from(["mpdhp", "--config", &config, "run", "--input", &p("docs.jsonl"), "--output", &p("run")])?;
    run_from(["mpdhp", "analyze", "--run", &p("run")])?;
    run_from(["mpdhp", "report", "--runs", &p("run"), "--out", &p("report")])?;
    Ok(std::fs::read_to_string(dir.join("report").join("table1.csv"))?)
}

pub fn run_example() -> mpdhp::Result<String> {
    mpdhp::cli::init_logging();
    let dir = tempfile::tempdir()?;
    let table = pipeline(dir.path())?;
    print!("{table}");
    Ok(table)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
