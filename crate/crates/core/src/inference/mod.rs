//! Sequential inference: per-document topic allocation with a particle
//! filter, and online estimation of the excitation tensor.
//!
//! For each document, every particle
//!
//! 1. freezes topics whose last event is older than the kernel's activity
//!    horizon,
//! 2. scores the document against each active topic and a fresh one with
//!    `P(n | c) · λ_c(t)^r / (λ₀ + Σ λ^r)` (fresh topic: `λ₀` in place of
//!    `λ_c^r`),
//! 3. samples an allocation, updates the topic, and multiplies its weight
//!    by the document's marginal likelihood.
//!
//! Weights are then normalized and, on every second document, particles are
//! multinomially resampled when the effective sample size drops below half
//! the particle count.

mod alpha;
mod checkpoint;
mod chunked;
mod particle;
mod result;

use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use alpha::{estimate_alpha, AlphaSampling, PairPosterior, SampleBank};
pub use checkpoint::{load_checkpoint, write_checkpoint, Checkpoint};
pub use particle::{posterior_allocation, temporal_prior, ClusterState, Particle};
pub use result::{AllocationRecord, ClusterSummary, InferenceResult};

use crate::corpus::Document;
use crate::error::{contract, Error, Result};
use crate::lang_model::ThetaPrior;
use crate::temporal::{KernelSpec, RbfKernel};

/// Hyper-parameters of one inference run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceConfig {
    /// Power applied to intensities (0 ignores time).
    pub r: f64,
    /// Symmetric Dirichlet concentration of the language model.
    pub theta0: f64,
    /// Temporal concentration: prior weight of opening a new topic.
    pub lambda0: f64,
    pub particles: usize,
    pub alpha_samples: usize,
    pub kernel: KernelSpec,
    pub seed: u64,
    /// A topic's excitation pairs are re-estimated after this many new
    /// events (and on its 1st, 2nd, 4th, ..., 32nd event).
    pub alpha_refresh_every: usize,
}

impl InferenceConfig {
    /// Defaults for a kernel: `r = 1`, `θ₀ = 0.01`, the kernel's `λ₀`, 8
    /// particles, 100 000 excitation samples.
    pub fn new(kernel: KernelSpec) -> Self {
        Self {
            r: 1.0,
            theta0: 0.01,
            lambda0: kernel.lambda0,
            particles: 8,
            alpha_samples: 100_000,
            kernel,
            seed: 0,
            alpha_refresh_every: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_owned()));
        if !(self.r >= 0.0 && self.r.is_finite()) {
            return bad("r must be a nonnegative number");
        }
        if !(self.theta0 > 0.0 && self.theta0.is_finite()) {
            return bad("theta0 must be positive");
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return bad("lambda0 must be positive");
        }
        if self.particles == 0 {
            return bad("particles must be at least 1");
        }
        if self.alpha_samples == 0 {
            return bad("alpha-samples must be at least 1");
        }
        Ok(())
    }
}

/// A validated configuration bound to a vocabulary size, plus the sample
/// bank shared by every excitation pair at creation.
#[derive(Debug, Clone)]
pub struct Model {
    pub config: InferenceConfig,
    pub prior: ThetaPrior,
    bank: Arc<SampleBank>,
}

impl Model {
    pub fn new(config: InferenceConfig, vocab_size: usize) -> Result<Self> {
        config.validate()?;
        let prior = ThetaPrior::new(config.theta0, vocab_size)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, 0xA1FA));
        let bank = Arc::new(SampleBank::uniform(
            config.alpha_samples,
            config.kernel.kernel.len(),
            &mut rng,
        ));
        Ok(Self {
            config,
            prior,
            bank,
        })
    }

    pub fn kernel(&self) -> &RbfKernel {
        &self.config.kernel.kernel
    }

    pub fn sampling(&self) -> AlphaSampling {
        AlphaSampling::with_samples(self.config.alpha_samples)
    }
}

/// SplitMix64-style mixing of two seeds.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Effective sample size `1 / Σ w²` of normalized weights.
pub fn effective_sample_size(particles: &[Particle]) -> f64 {
    1.0 / particles.iter().map(|p| p.weight() * p.weight()).sum::<f64>()
}

/// Allocates `doc` in every particle and renormalizes the weights.
pub fn process_document<R: Rng + ?Sized>(
    doc: &Document,
    particles: &mut [Particle],
    model: &Model,
    rng: &mut R,
) -> Result<()> {
    doc.check_vocab(model.prior.vocab_size)?;
    if doc.words.is_empty() {
        return Err(contract(format!("document {} is empty", doc.id)));
    }
    let draws: Vec<f64> = particles.iter().map(|_| rng.random::<f64>()).collect();
    let log_marginals: Vec<f64> = particles
        .par_iter_mut()
        .zip(draws)
        .map(|(p, u)| particle::step(p, doc, u, model))
        .collect::<Result<_>>()?;

    let log_w: Vec<f64> = particles
        .iter()
        .zip(&log_marginals)
        .map(|(p, lm)| p.weight().ln() + lm)
        .collect();
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let w = 1.0 / particles.len() as f64;
        particles.iter_mut().for_each(|p| p.set_weight(w));
        return Ok(());
    }
    let unnorm: Vec<f64> = log_w.iter().map(|v| (v - max).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    for (p, w) in particles.iter_mut().zip(unnorm) {
        p.set_weight(w / z);
    }
    Ok(())
}

/// Multinomial resampling when the effective sample size falls below half
/// the particle count. Returns whether resampling happened.
pub fn resample<R: Rng + ?Sized>(particles: &mut Vec<Particle>, rng: &mut R) -> bool {
    let n = particles.len();
    if n < 2 || effective_sample_size(particles) >= n as f64 / 2.0 {
        return false;
    }
    let cumulative: Vec<f64> = particles
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p.weight();
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().unwrap();
    let mut next = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>() * total;
        let i = cumulative.partition_point(|&c| c <= u).min(n - 1);
        let mut child = particles[i].clone();
        child.set_weight(1.0 / n as f64);
        next.push(child);
    }
    *particles = next;
    true
}

/// Streaming driver holding the particle set.
#[derive(Debug, Clone)]
pub struct Smc {
    model: Model,
    particles: Vec<Particle>,
    rng: ChaCha8Rng,
    processed: usize,
    resamples: usize,
    started: Instant,
}

impl Smc {
    pub fn new(config: InferenceConfig, vocab_size: usize) -> Result<Self> {
        let model = Model::new(config, vocab_size)?;
        let n = model.config.particles;
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(model.config.seed),
            particles: vec![Particle::new(1.0 / n as f64); n],
            model,
            processed: 0,
            resamples: 0,
            started: Instant::now(),
        })
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn processed(&self) -> usize {
        self.processed
    }

    pub fn resamples(&self) -> usize {
        self.resamples
    }

    pub fn process(&mut self, doc: &Document) -> Result<()> {
        process_document(doc, &mut self.particles, &self.model, &mut self.rng)?;
        self.processed += 1;
        if self.processed % 2 == 0 && resample(&mut self.particles, &mut self.rng) {
            self.resamples += 1;
        }
        Ok(())
    }

    /// Index of the highest-weight particle (lowest index on ties).
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.particles.iter().enumerate() {
            if p.weight() > self.particles[best].weight() {
                best = i;
            }
        }
        best
    }

    /// Summarizes the best particle after a final re-estimation of all of
    /// its excitation pairs.
    pub fn finish(mut self, docs: &[Document], n_channels: usize) -> InferenceResult {
        let best = self.best_index();
        let mut particle = self.particles.swap_remove(best);
        let now = particle.last_time();
        particle::refresh_all(&mut particle, now, &self.model);
        InferenceResult::from_particle(
            &particle,
            docs,
            &self.model,
            n_channels,
            self.started.elapsed().as_secs_f64(),
        )
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(
            &self.model.config,
            self.model.prior.vocab_size,
            self.processed,
            self.resamples,
            self.rng.get_word_pos(),
            &self.particles,
        )
    }

    /// Continues from a snapshot; feeding the remaining documents gives the
    /// same result as an uninterrupted run.
    pub fn resume(checkpoint: Checkpoint) -> Result<Self> {
        let pos = checkpoint.word_pos()?;
        let model = Model::new(checkpoint.config, checkpoint.vocab_size)?;
        if checkpoint.particles.len() != model.config.particles {
            return Err(Error::Config("checkpoint particle count mismatch".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
        rng.set_word_pos(pos);
        Ok(Self {
            model,
            particles: checkpoint.particles,
            rng,
            processed: checkpoint.processed,
            resamples: checkpoint.resamples,
            started: Instant::now(),
        })
    }
}

/// Observer for long runs: called after each document with the driver.
pub trait Progress {
    fn after_document(&mut self, smc: &Smc) -> Result<()>;
}

impl Progress for () {
    fn after_document(&mut self, _: &Smc) -> Result<()> {
        Ok(())
    }
}

/// Runs inference over a whole stream and returns the best particle's state.
pub fn run(docs: &[Document], vocab_size: usize, n_channels: usize, config: &InferenceConfig) -> Result<InferenceResult> {
    run_with(docs, vocab_size, n_channels, config, &mut ())
}

pub fn run_with<P: Progress + ?Sized>(
    docs: &[Document],
    vocab_size: usize,
    n_channels: usize,
    config: &InferenceConfig,
    progress: &mut P,
) -> Result<InferenceResult> {
    let mut smc = Smc::new(config.clone(), vocab_size)?;
    for doc in docs {
        smc.process(doc)?;
        progress.after_document(&smc)?;
    }
    Ok(smc.finish(docs, n_channels))
}

#[cfg(test)]
mod tests;
