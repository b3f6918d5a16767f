//! A small kernel × θ₀ × r grid over one stream, assembled into Table-style
//! CSVs.
//!
//! ```text
//! cargo run --release --example experiment_grid
//! ```

use mpdhp::cli::{grid, synth, GridOptions, SeedPolicy};
use mpdhp::synthgen::Scenario;

/// Returns the aggregated Table-1 CSV; one row per cell.
pub fn run_example() -> mpdhp::Result<String> {
    let dir = tempfile::tempdir()?;
    let docs = dir.path().join("docs.jsonl");
    let mut scenario = Scenario::five_topics();
    scenario.horizon = 300.0;
    synth(&scenario, 1, &docs, &dir.path().join("labels.csv"))?;
    let opts = GridOptions {
        input: docs,
        output: dir.path().join("grid"),
        kernels: vec!["minute".into(), "hour".into()],
        theta0: vec![0.001, 0.01],
        r: vec![0.0, 1.0],
        particles: 4,
        alpha_samples: 100,
        seed: 1,
        seed_policy: SeedPolicy::Shared,
        top: 5,
        bins: 10,
    };
    let outcomes = grid(&opts)?;
    println!("{} cells, {} failed", outcomes.len(), outcomes.iter().filter(|o| o.error.is_some()).count());
    let table = std::fs::read_to_string(opts.output.join("table1.csv"))?;
    print!("{table}");
    Ok(table)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
