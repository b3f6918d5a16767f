//! Cluster a synthetic stream online with the particle filter and score the
//! recovered topics against the ground truth.
//!
//! ```text
//! cargo run --release --example streaming_inference
//! ```

use mpdhp::inference::{run, InferenceConfig};
use mpdhp::metrics::adjusted_rand_index;
use mpdhp::synthgen::{generate, Scenario};
use mpdhp::temporal::{KernelPreset, KernelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns (documents, inferred topics, adjusted Rand index).
pub fn run_example() -> mpdhp::Result<(usize, usize, f64)> {
    let mut scenario = Scenario::five_topics();
    scenario.horizon = 1500.0;
    let truth = scenario.build()?;
    let synth = generate(&truth, &mut ChaCha8Rng::seed_from_u64(2))?;
    let stream = &synth.stream;

    let mut config = InferenceConfig::new(KernelSpec::preset(KernelPreset::Minute));
    config.alpha_samples = 500;
    config.seed = 2;
    let mut result = run(&stream.documents, stream.vocabulary.len(), stream.channels.len(), &config)?;
    result.attach_vocabulary(&stream.vocabulary, 5);

    let inferred: Vec<usize> = result.allocations.iter().map(|a| a.cluster).collect();
    let ari = adjusted_rand_index(&synth.labels, &inferred);
    println!(
        "{} documents -> {} topics in {:.1}s, ARI {ari:.3}",
        inferred.len(),
        result.num_clusters(),
        result.runtime_secs
    );
    let mut clusters = result.clusters.clone();
    clusters.sort_by(|a, b| b.doc_count.cmp(&a.doc_count));
    for c in clusters.iter().take(5) {
        println!("  topic {:>2}: {:>4} docs  {:?}", c.id, c.doc_count, c.top_words);
    }
    Ok((inferred.len(), result.num_clusters(), ari))
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
