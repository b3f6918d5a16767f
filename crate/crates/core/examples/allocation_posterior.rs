//! The per-document allocation posterior: textual likelihood times the
//! powered temporal prior, for several values of `r`.
//!
//! ```text
//! cargo run --example allocation_posterior
//! ```

use std::collections::BTreeMap;

use mpdhp::corpus::Document;
use mpdhp::inference::{posterior_allocation, temporal_prior, ClusterState, InferenceConfig, Model, Particle};
use mpdhp::lang_model::ClusterWordCounts;
use mpdhp::temporal::{KernelPreset, KernelSpec};

/// Allocation probabilities (two topics, then a new one) for r = 0, 1, 2.
pub fn run_example() -> mpdhp::Result<Vec<Vec<f64>>> {
    let vocab_size = 6;
    let words = |docs: &[&[usize]]| {
        let mut c = ClusterWordCounts::new();
        for (i, d) in docs.iter().enumerate() {
            c.update(&Document::from_tokens(i, 0.0, 0, 0, d));
        }
        c
    };
    let self_20min = BTreeMap::from([(0, vec![0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])]);
    let self_20min_1 = BTreeMap::from([(1, vec![0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])]);
    // Topic 0 fired 20 minutes ago, topic 1 an hour ago; both talk about
    // the same words, so time decides.
    let clusters = vec![
        ClusterState::with_fixed_alpha(0, words(&[&[0, 1], &[1, 2]]), vec![80.0], self_20min),
        ClusterState::with_fixed_alpha(1, words(&[&[0, 1], &[2, 0]]), vec![40.0], self_20min_1),
    ];
    let doc = Document::from_tokens(7, 100.0, 0, 0, &[0, 1, 2]);
    let mut out = Vec::new();
    for r in [0.0, 1.0, 2.0] {
        let mut config = InferenceConfig::new(KernelSpec::preset(KernelPreset::Minute));
        config.r = r;
        config.alpha_samples = 16;
        let model = Model::new(config, vocab_size)?;
        let particle = Particle::from_clusters(clusters.clone(), 100.0, &model);
        let prior = temporal_prior(doc.time, &particle, &model)?;
        let post = posterior_allocation(&doc, &particle, &model)?;
        println!("r = {r}: temporal prior {prior:.4?} -> posterior {post:.4?}");
        out.push(post);
    }
    Ok(out)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
