//! Score a document against topics with the Dirichlet-Multinomial
//! language model.
//!
//! ```text
//! cargo run --example text_likelihood
//! ```

use mpdhp::corpus::Document;
use mpdhp::lang_model::{doc_log_likelihood, ClusterWordCounts, ThetaPrior};

/// Log-likelihoods of one document under a matching topic, an unrelated
/// topic and an empty (new) topic.
pub fn run_example() -> mpdhp::Result<[f64; 3]> {
    let vocab = ["flood", "coast", "storm", "stock", "market", "rally"];
    let prior = ThetaPrior::new(0.01, vocab.len())?;
    let mut weather = ClusterWordCounts::new();
    let mut finance = ClusterWordCounts::new();
    for (i, tokens) in [[0usize, 1, 2], [0, 2, 2], [1, 2, 0]].iter().enumerate() {
        weather.update(&Document::from_tokens(i, i as f64, 0, 0, tokens));
    }
    for (i, tokens) in [[3usize, 4, 5], [4, 5, 3]].iter().enumerate() {
        finance.update(&Document::from_tokens(10 + i, i as f64, 0, 0, tokens));
    }
    let doc = Document::from_tokens(99, 10.0, 0, 0, &[0, 2]);
    let scores = [
        doc_log_likelihood(&doc, &weather, &prior)?,
        doc_log_likelihood(&doc, &finance, &prior)?,
        doc_log_likelihood(&doc, &ClusterWordCounts::new(), &prior)?,
    ];
    for (name, s) in ["weather", "finance", "new topic"].iter().zip(scores) {
        println!("log P(\"flood storm\" | {name:<9}) = {s:.4}");
    }
    Ok(scores)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
