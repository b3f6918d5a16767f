//! Generate a ground-truth stream from a scenario and compare its size with
//! the branching-ratio prediction.
//!
//! ```text
//! cargo run --example synthetic_stream
//! ```

use mpdhp::synthgen::{generate, Scenario};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns (events generated, events predicted by `μT / (1 − ρ)`).
pub fn run_example() -> mpdhp::Result<(usize, f64)> {
    let mut scenario = Scenario::five_topics();
    scenario.horizon = 2000.0;
    let truth = scenario.build()?;
    let rho = truth.spectral_radius();
    let rates = truth.stationary_rates()?;
    let predicted: f64 = rates.iter().sum::<f64>() * scenario.horizon;
    let stream = generate(&truth, &mut ChaCha8Rng::seed_from_u64(11))?;
    println!("scenario {}: {} topics, spectral radius {rho:.3}", scenario.name, truth.topics.len());
    println!("events: {} generated, {predicted:.0} predicted", stream.labels.len());
    let vocab = &stream.stream.vocabulary;
    for d in stream.stream.documents.iter().take(5) {
        let words: Vec<&str> = d.words.iter().filter_map(|&(w, _)| vocab.word(w)).collect();
        println!("  t={:>8.2}  topic={}  {words:?}", d.time, stream.labels[d.id]);
    }
    Ok((stream.labels.len(), predicted))
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
