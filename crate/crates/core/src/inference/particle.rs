//! Particle state and the per-document allocation posterior.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::alpha::PairPosterior;
use super::chunked::ChunkedVec;
use super::{mix_seed, Model};
use crate::corpus::Document;
use crate::error::{contract, Result};
use crate::lang_model::{doc_log_likelihood_unchecked, ClusterWordCounts};
use crate::temporal::{dot, kernel_sum};

/// One excitation pair `(this topic ← source)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaPair {
    /// Current estimate of `α_{target,source}`.
    pub estimate: Vec<f64>,
    posterior: PairPosterior,
}

/// Everything a particle knows about one topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterState {
    pub id: usize,
    pub words: ClusterWordCounts,
    /// Event times, nondecreasing.
    pub times: Vec<f64>,
    /// Excitation pairs keyed by source topic.
    pub alpha: BTreeMap<usize, AlphaPair>,
    events_at_refresh: usize,
}

impl ClusterState {
    fn new(id: usize) -> Self {
        Self {
            id,
            words: ClusterWordCounts::new(),
            times: Vec::new(),
            alpha: BTreeMap::new(),
            events_at_refresh: 0,
        }
    }

    /// Builds a state with fixed excitation weights and no posterior
    /// bookkeeping; for tests and hand-built scenarios.
    pub fn with_fixed_alpha(
        id: usize,
        words: ClusterWordCounts,
        times: Vec<f64>,
        alpha: BTreeMap<usize, Vec<f64>>,
    ) -> Self {
        let birth = times.first().copied().unwrap_or(0.0);
        Self {
            id,
            words,
            times,
            alpha: alpha
                .into_iter()
                .map(|(src, estimate)| {
                    let posterior = PairPosterior::new(estimate.len(), 1.0, birth, 0);
                    (src, AlphaPair { estimate, posterior })
                })
                .collect(),
            events_at_refresh: 0,
        }
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn alpha(&self, source: usize) -> Option<&[f64]> {
        self.alpha.get(&source).map(|p| p.estimate.as_slice())
    }
}

/// One allocation hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    clusters: Vec<Arc<ClusterState>>,
    /// Ids of topics that can still receive documents, ascending.
    active: Vec<usize>,
    allocations: ChunkedVec<u32>,
    weight: f64,
    last_time: f64,
}

impl Particle {
    pub fn new(weight: f64) -> Self {
        Self {
            clusters: Vec::new(),
            active: Vec::new(),
            allocations: ChunkedVec::new(4096),
            weight,
            last_time: 0.0,
        }
    }

    /// Assembles a particle from explicit topic states; every topic whose
    /// last event is within the activity horizon of `now` is active.
    pub fn from_clusters(clusters: Vec<ClusterState>, now: f64, model: &Model) -> Self {
        let horizon = model.kernel().activity_horizon();
        let active = clusters
            .iter()
            .filter(|c| c.last_time().is_some_and(|t| now - t <= horizon))
            .map(|c| c.id)
            .collect();
        Self {
            clusters: clusters.into_iter().map(Arc::new).collect(),
            active,
            allocations: ChunkedVec::new(4096),
            weight: 1.0,
            last_time: now,
        }
    }

    /// Number of topics ever opened (`K`).
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn cluster(&self, id: usize) -> &ClusterState {
        &self.clusters[id]
    }

    pub fn clusters(&self) -> impl Iterator<Item = &ClusterState> {
        self.clusters.iter().map(|c| c.as_ref())
    }

    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub(crate) fn set_weight(&mut self, w: f64) {
        self.weight = w;
    }

    pub fn last_time(&self) -> f64 {
        self.last_time
    }

    /// Topic chosen for each processed document, in order.
    pub fn allocations(&self) -> Vec<usize> {
        self.allocations.iter().map(|&c| c as usize).collect()
    }

    pub fn num_allocations(&self) -> usize {
        self.allocations.len()
    }

    fn is_active_at(&self, c: usize, t: f64, horizon: f64) -> bool {
        self.clusters[c].last_time().is_some_and(|last| t - last <= horizon)
    }

    /// Freezes topics with no event within the activity horizon of `t`.
    fn prune(&mut self, t: f64, horizon: f64) {
        let clusters = &self.clusters;
        self.active
            .retain(|&c| clusters[c].last_time().is_some_and(|last| t - last <= horizon));
    }
}

/// Kernel features `Σ_j κ(t − t_j)` of each listed source topic.
fn source_features(particle: &Particle, sources: &[usize], t: f64, model: &Model) -> Vec<Vec<f64>> {
    let kernel = model.kernel();
    let horizon = kernel.truncation_horizon();
    sources
        .iter()
        .map(|&s| {
            let mut f = vec![0.0; kernel.len()];
            kernel_sum(kernel, &particle.clusters[s].times, t, horizon, &mut f);
            f
        })
        .collect()
}

/// `λ_c(t) = Σ_{c' active} α_{c,c'} · F_{c'}` for each active target.
fn intensities(particle: &Particle, active: &[usize], features: &[Vec<f64>]) -> Vec<f64> {
    active
        .iter()
        .map(|&c| {
            let state = &particle.clusters[c];
            active
                .iter()
                .zip(features)
                .filter_map(|(s, f)| state.alpha(*s).map(|a| dot(a, f)))
                .sum()
        })
        .collect()
}

fn powered(lambda: f64, r: f64) -> f64 {
    if r == 0.0 {
        1.0
    } else if lambda > 0.0 {
        (r * lambda.ln()).exp()
    } else {
        0.0
    }
}

/// Unnormalized temporal prior over all `K + 1` choices at time `t`: entry
/// `c` is `λ_c(t)^r` for active topics (zero for frozen ones), the last
/// entry is `λ₀`.
pub fn temporal_prior(t: f64, particle: &Particle, model: &Model) -> Result<Vec<f64>> {
    if t < particle.last_time {
        return Err(contract(format!(
            "time {t} precedes the particle's latest event at {}",
            particle.last_time
        )));
    }
    let horizon = model.kernel().activity_horizon();
    let active: Vec<usize> = (0..particle.num_clusters())
        .filter(|&c| particle.is_active_at(c, t, horizon))
        .collect();
    let features = source_features(particle, &active, t, model);
    let lambdas = intensities(particle, &active, &features);
    let mut prior = vec![0.0; particle.num_clusters() + 1];
    for (&c, &lam) in active.iter().zip(&lambdas) {
        prior[c] = powered(lam, model.config.r);
    }
    prior[particle.num_clusters()] = model.config.lambda0;
    Ok(prior)
}

/// Posterior over the `K + 1` choices for `doc` (textual likelihood times
/// temporal prior), normalized.
pub fn posterior_allocation(doc: &Document, particle: &Particle, model: &Model) -> Result<Vec<f64>> {
    doc.check_vocab(model.prior.vocab_size)?;
    if doc.time < particle.last_time {
        return Err(contract(format!(
            "document {} at {} precedes the particle's latest event at {}",
            doc.id, doc.time, particle.last_time
        )));
    }
    let horizon = model.kernel().activity_horizon();
    let active: Vec<usize> = (0..particle.num_clusters())
        .filter(|&c| particle.is_active_at(c, doc.time, horizon))
        .collect();
    let scored = score(doc, particle, &active, model);
    let mut full = vec![0.0; particle.num_clusters() + 1];
    for (&c, &p) in active.iter().zip(&scored.probs) {
        full[c] = p;
    }
    full[particle.num_clusters()] = *scored.probs.last().expect("new-topic entry");
    Ok(full)
}

/// Scoring of one document against a particle's active topics.
pub(crate) struct Scored {
    /// Normalized probabilities: active topics in order, then the new topic.
    pub probs: Vec<f64>,
    /// `ln Σ_c P(n|c) P(c|t)` with the normalized temporal prior.
    pub log_marginal: f64,
    /// Kernel features of each active source at the document time.
    pub features: Vec<Vec<f64>>,
}

pub(crate) fn score(doc: &Document, particle: &Particle, active: &[usize], model: &Model) -> Scored {
    let r = model.config.r;
    let lambda0 = model.config.lambda0;
    let features = source_features(particle, active, doc.time, model);
    let lambdas = intensities(particle, active, &features);

    let empty = ClusterWordCounts::new();
    let mut log_post: Vec<f64> = Vec::with_capacity(active.len() + 1);
    let mut prior_sum = lambda0;
    for (&c, &lam) in active.iter().zip(&lambdas) {
        let p = powered(lam, r);
        prior_sum += p;
        let text = doc_log_likelihood_unchecked(doc, &particle.clusters[c].words, &model.prior);
        log_post.push(if p > 0.0 { text + p.ln() } else { f64::NEG_INFINITY });
    }
    log_post.push(doc_log_likelihood_unchecked(doc, &empty, &model.prior) + lambda0.ln());

    let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        log::warn!(
            target: "inference",
            "doc={} posterior underflow; opening a new topic",
            doc.id
        );
        let mut probs = vec![0.0; log_post.len()];
        *probs.last_mut().unwrap() = 1.0;
        return Scored {
            probs,
            log_marginal: f64::NEG_INFINITY,
            features,
        };
    }
    let mut probs: Vec<f64> = log_post.iter().map(|&v| (v - max).exp()).collect();
    let z: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= z);
    Scored {
        probs,
        log_marginal: max + z.ln() - prior_sum.ln(),
        features,
    }
}

/// Picks an index from a probability vector with a uniform draw `u`.
fn pick(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // rounding left `u` above the cumulative sum; take the last positive entry
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Scores `doc`, samples its topic with the uniform draw `u`, and commits
/// the allocation. Returns the log marginal likelihood of the document.
pub(crate) fn step(particle: &mut Particle, doc: &Document, u: f64, model: &Model) -> Result<f64> {
    if doc.time < particle.last_time {
        return Err(contract(format!(
            "document {} at {} arrives before {}",
            doc.id, doc.time, particle.last_time
        )));
    }
    let kernel = model.kernel();
    particle.prune(doc.time, kernel.activity_horizon());
    let active = particle.active.clone();
    let scored = score(doc, particle, &active, model);
    let choice = pick(&scored.probs, u);

    let target = if choice < active.len() {
        active[choice]
    } else {
        let id = particle.clusters.len();
        particle.clusters.push(Arc::new(ClusterState::new(id)));
        particle.active.push(id);
        id
    };
    commit(particle, target, doc, &active, &scored.features, model);
    particle.allocations.push(target as u32);
    particle.last_time = doc.time;
    Ok(scored.log_marginal)
}

fn should_refresh(events: usize, at_last: usize, every: usize) -> bool {
    (events.is_power_of_two() && events <= 32) || events - at_last >= every.max(1)
}

fn commit(
    particle: &mut Particle,
    target: usize,
    doc: &Document,
    sources: &[usize],
    features: &[Vec<f64>],
    model: &Model,
) {
    let kernel = model.kernel();
    let dim = kernel.len();
    let zero = vec![0.0; dim];
    // Source histories other than the target itself; holding these Arcs
    // does not affect the target's copy-on-write.
    let others: Vec<(usize, Arc<ClusterState>)> = sources
        .iter()
        .filter(|&&s| s != target)
        .map(|&s| (s, Arc::clone(&particle.clusters[s])))
        .collect();
    let state = Arc::make_mut(&mut particle.clusters[target]);
    let birth = state.times.first().copied().unwrap_or(doc.time);
    state.words.update(doc);
    state.times.push(doc.time);

    let ClusterState {
        times,
        alpha,
        events_at_refresh,
        ..
    } = state;

    let feature_of = |s: usize| -> &[f64] {
        sources
            .iter()
            .position(|&x| x == s)
            .map_or(zero.as_slice(), |i| features[i].as_slice())
    };
    let mut touched: Vec<usize> = sources.to_vec();
    if !touched.contains(&target) {
        touched.push(target);
    }
    for &s in &touched {
        let pair = alpha.entry(s).or_insert_with(|| AlphaPair {
            estimate: vec![0.0; dim],
            posterior: PairPosterior::new(
                dim,
                model.config.lambda0,
                birth,
                mix_seed(model.config.seed, ((target as u64) << 32) ^ s as u64),
            ),
        });
        pair.posterior.push_event(feature_of(s));
    }

    let n = times.len();
    if !should_refresh(n, *events_at_refresh, model.config.alpha_refresh_every) {
        return;
    }
    *events_at_refresh = n;
    for &s in &touched {
        let source_times: &[f64] = if s == target {
            times
        } else {
            &others.iter().find(|(id, _)| *id == s).expect("source listed").1.times
        };
        let pair = alpha.get_mut(&s).expect("pair created above");
        pair.estimate = pair
            .posterior
            .estimate(source_times, doc.time, kernel, &model.sampling(), &model.bank);
    }
}

/// Re-estimates every excitation pair at time `now`.
pub(crate) fn refresh_all(particle: &mut Particle, now: f64, model: &Model) {
    let snapshot: Vec<Arc<ClusterState>> = particle.clusters.clone();
    for c in 0..particle.clusters.len() {
        let state = Arc::make_mut(&mut particle.clusters[c]);
        let own_times = state.times.clone();
        for (&s, pair) in state.alpha.iter_mut() {
            let source_times = if s == c { &own_times } else { &snapshot[s].times };
            pair.estimate = pair
                .posterior
                .estimate(source_times, now, model.kernel(), &model.sampling(), &model.bank);
        }
    }
}
