//! Estimate the excitation weights of one self-exciting topic by importance
//! sampling.
//!
//! ```text
//! cargo run --release --example alpha_estimation
//! ```

use mpdhp::inference::{estimate_alpha, AlphaSampling};
use mpdhp::synthgen::{simulate_events, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the estimated weight vector (truth: 0.8 on the third entry).
pub fn run_example() -> mpdhp::Result<Vec<f64>> {
    let scenario = Scenario::from_toml(include_str!("../configs/single_pair.toml"))?;
    let truth = scenario.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let times: Vec<f64> = simulate_events(&truth, &mut rng)?.iter().map(|e| e.time).collect();
    let (kernel, lambda0) = (&truth.kernel, scenario.background_rate);
    let alpha = estimate_alpha(&times, &times, kernel, lambda0, &AlphaSampling::with_samples(4000), &mut rng);
    println!("{} events", times.len());
    for (l, (m, a)) in kernel.means().iter().zip(&alpha).enumerate() {
        println!("  entry {} (lag {m:>3} min): α = {a:.3}", l + 1);
    }
    Ok(alpha)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
