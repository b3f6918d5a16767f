//! Effective interactions, strength statistics and the per-entry range of a
//! hand-built two-topic history.
//!
//! ```text
//! cargo run --example interaction_report
//! ```

use mpdhp::analytics::{effective_interaction, interaction_range, log_histogram, strength_report};
use mpdhp::temporal::{preset, AlphaTensor, EventHistory};

/// Returns the per-entry interaction range.
pub fn run_example() -> mpdhp::Result<Vec<f64>> {
    let (kernel, lambda0) = preset("minute")?;
    let history = EventHistory::new(vec![
        vec![0.0, 21.0, 39.0, 62.0, 80.0],
        vec![5.0, 15.0, 33.0, 70.0],
    ])?;
    let mut alpha = AlphaTensor::zeros(2, kernel.len());
    alpha.set(0, 0, vec![0.1, 0.1, 0.9, 0.1, 0.1, 0.0, 0.0, 0.0, 0.0])?;
    alpha.set(1, 0, vec![0.6, 0.6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    alpha.set(0, 1, vec![0.2; 9])?;

    let w = effective_interaction(&alpha, &history, &kernel, lambda0)?;
    for ((target, source), row) in w.rows() {
        println!("W[{target} <- {source}] = {:.5?}", row);
    }
    let report = strength_report(&alpha, &w)?;
    println!("{report:#?}");
    let range = interaction_range(&w);
    println!("range per entry: {range:.5?}");
    for bin in log_histogram(&w.nonzero_values(), 4) {
        println!("  [{:.2e}, {:.2e}) {}", bin.low, bin.high, bin.count);
    }
    Ok(range)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
