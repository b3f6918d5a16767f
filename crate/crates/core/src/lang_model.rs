//! Collapsed Dirichlet-Multinomial language model.
//!
//! Each topic keeps sparse word counts `N_{c,v}` and their total `N_c`. The
//! textual likelihood of a document `n` under topic `c` is the posterior
//! predictive of the bag of words given the topic's counts:
//!
//! ```text
//! Γ(N_c + Vθ₀) / Γ(N_c + |n| + Vθ₀) · Π_v Γ(N_{c,v} + n_v + θ₀) / Γ(N_{c,v} + θ₀)
//! ```
//!
//! The scalar concentration in the leading ratio is the total `Vθ₀` (the
//! sum of the per-word concentrations), which makes the expression a proper
//! Dirichlet-Multinomial marginal. Factors for words absent from the
//! document cancel, so only the document's own words are visited.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::corpus::Document;
use crate::error::{contract, Result};

/// Symmetric Dirichlet prior over a vocabulary of size `vocab_size`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaPrior {
    pub theta0: f64,
    pub vocab_size: usize,
}

impl ThetaPrior {
    pub fn new(theta0: f64, vocab_size: usize) -> Result<Self> {
        if !(theta0 > 0.0 && theta0.is_finite()) {
            return Err(contract(format!("theta0 must be positive, got {theta0}")));
        }
        Ok(Self { theta0, vocab_size })
    }

    /// Total concentration `Vθ₀`.
    pub fn total(&self) -> f64 {
        self.theta0 * self.vocab_size as f64
    }
}

/// Per-topic sufficient statistics.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ClusterWordCounts {
    counts: HashMap<usize, u64>,
    total: u64,
    doc_count: u64,
    channel_counts: BTreeMap<usize, u64>,
}

impl ClusterWordCounts {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn count(&self, word: usize) -> u64 {
        self.counts.get(&word).copied().unwrap_or(0)
    }

    /// `N_c`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn doc_count(&self) -> u64 {
        self.doc_count
    }

    pub fn channel_counts(&self) -> &BTreeMap<usize, u64> {
        &self.channel_counts
    }

    /// Nonzero word counts sorted by word index.
    pub fn word_counts(&self) -> Vec<(usize, u64)> {
        let mut v: Vec<_> = self.counts.iter().map(|(&w, &n)| (w, n)).collect();
        v.sort_unstable();
        v
    }

    /// Number of distinct words seen by this topic.
    pub fn distinct_words(&self) -> usize {
        self.counts.len()
    }

    pub fn update(&mut self, doc: &Document) {
        for &(w, n) in &doc.words {
            *self.counts.entry(w).or_insert(0) += u64::from(n);
            self.total += u64::from(n);
        }
        self.doc_count += 1;
        *self.channel_counts.entry(doc.channel).or_insert(0) += 1;
    }

    /// Rebuilds a count table from its parts (used when loading results).
    pub fn from_parts(
        words: impl IntoIterator<Item = (usize, u64)>,
        doc_count: u64,
        channel_counts: BTreeMap<usize, u64>,
    ) -> Self {
        let counts: HashMap<usize, u64> = words.into_iter().filter(|&(_, n)| n > 0).collect();
        let total = counts.values().sum();
        Self {
            counts,
            total,
            doc_count,
            channel_counts,
        }
    }
}

/// Log posterior predictive of `doc`'s bag of words under `cluster`.
pub fn doc_log_likelihood(
    doc: &Document,
    cluster: &ClusterWordCounts,
    prior: &ThetaPrior,
) -> Result<f64> {
    doc.check_vocab(prior.vocab_size)?;
    Ok(doc_log_likelihood_unchecked(doc, cluster, prior))
}

/// [`doc_log_likelihood`] without the vocabulary bound check, for the hot
/// loop where documents were validated once on entry.
pub(crate) fn doc_log_likelihood_unchecked(
    doc: &Document,
    cluster: &ClusterWordCounts,
    prior: &ThetaPrior,
) -> f64 {
    let theta = prior.theta0;
    let big_n = cluster.total() as f64 + prior.total();
    let mut ll = ln_gamma(big_n) - ln_gamma(big_n + f64::from(doc.token_total()));
    for &(w, n) in &doc.words {
        let a = cluster.count(w) as f64 + theta;
        ll += ln_gamma(a + f64::from(n)) - ln_gamma(a);
    }
    ll
}
