//! Pairwise estimation of excitation weights by self-normalized importance
//! sampling.
//!
//! For a target topic and one source topic, the weight vector `α ∈ [0,1]^L`
//! is scored with the Hawkes log-likelihood of the target's events under
//! the intensity `λ₀ + α·Σ_j κ(t − t_j)` (source events `t_j` only):
//!
//! ```text
//! ℓ(α) = Σ_i ln(λ₀ + α·F_i) − α·Φ
//! ```
//!
//! `F_i` is the kernel feature vector of target event `i` and `Φ` the
//! compensator of the source events over the target's observation window
//! (closed-form Gaussian integrals). Candidates are drawn uniformly from the
//! unit cube; the estimate is the likelihood-weighted mean, i.e. the
//! posterior mean under a uniform prior.
//!
//! Once the data make the posterior much narrower than the cube, uniform
//! candidates collapse onto a handful of samples. When the effective sample
//! size falls below a threshold, the bank is redrawn from a product-Beta
//! proposal (mixed with a uniform component) and weights are corrected by
//! the proposal density. Leaving the uniform bank, or recovering from a
//! bank that has collapsed onto a few samples, the proposal is centred on
//! the posterior mode, found by EM since `ℓ` is concave, with marginal
//! widths from the inverse observed information. Otherwise it
//! moment-matches the weighted samples.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use rand_distr::{Beta, Distribution};
use statrs::function::gamma::ln_gamma;

use super::chunked::ChunkedVec;
use super::mix_seed;
use crate::temporal::{dot, kernel_sum, RbfKernel};

/// Rows of features stored per shared chunk.
const ROWS_PER_CHUNK: usize = 256;

/// Knobs of the importance sampler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSampling {
    /// Number of candidate vectors `S`.
    pub samples: usize,
    /// Redraw the bank when ESS drops below this fraction of `S`...
    pub min_ess_fraction: f64,
    /// ...or below this many samples, whichever is smaller.
    pub min_ess: f64,
    /// Maximum bank redraws per estimate.
    pub max_rounds: usize,
    /// Mixture weight of the uniform component in adapted proposals.
    pub defensive_weight: f64,
}

impl AlphaSampling {
    pub fn with_samples(samples: usize) -> Self {
        Self {
            samples,
            ..Self::default()
        }
    }
}

impl Default for AlphaSampling {
    fn default() -> Self {
        Self {
            samples: 100_000,
            min_ess_fraction: 0.1,
            min_ess: 50.0,
            max_rounds: 4,
            defensive_weight: 0.1,
        }
    }
}

/// A fixed set of candidate vectors with their proposal log-densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBank {
    dim: usize,
    values: Vec<f64>,
    log_density: Vec<f64>,
}

impl SampleBank {
    pub fn uniform<R: Rng + ?Sized>(samples: usize, dim: usize, rng: &mut R) -> Self {
        let values = (0..samples * dim).map(|_| rng.random::<f64>()).collect();
        Self {
            dim,
            values,
            log_density: vec![0.0; samples],
        }
    }

    fn from_proposal<R: Rng + ?Sized>(proposal: &Proposal, samples: usize, rng: &mut R) -> Self {
        let dim = proposal.dim();
        let mut values = vec![0.0; samples * dim];
        let mut log_density = vec![0.0; samples];
        for (x, lq) in values.chunks_exact_mut(dim).zip(&mut log_density) {
            proposal.draw(rng, x);
            *lq = proposal.ln_density(x);
        }
        Self {
            dim,
            values,
            log_density,
        }
    }

    pub fn len(&self) -> usize {
        self.log_density.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_density.is_empty()
    }

    pub fn sample(&self, s: usize) -> &[f64] {
        &self.values[s * self.dim..(s + 1) * self.dim]
    }

    fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.values.chunks_exact(self.dim)
    }
}

/// Defensive mixture `ε·U[0,1]^L + (1−ε)·Π_l Beta(a_l, b_l)`.
#[derive(Debug, Clone)]
struct Proposal {
    a: Vec<f64>,
    b: Vec<f64>,
    ln_norm: Vec<f64>,
    defensive: f64,
}

const MIN_PROPOSAL_STD: f64 = 1e-4;
const PROPOSAL_WIDENING: f64 = 1.2;
const CLAMP: f64 = 1e-12;
const MODE_ITERATIONS: usize = 500;
/// Below this ESS the weighted samples say too little to fit a proposal.
const COLLAPSED_ESS: f64 = 5.0;
/// Precision of the uniform prior's variance, `1 / (1/12)`.
const UNINFORMED_PRECISION: f64 = 12.0;

impl Proposal {
    /// Moment-matches a Beta per coordinate to the weighted samples, with
    /// the standard deviation widened to keep the proposal heavier than
    /// the target. The widening is mild because its cost compounds over
    /// coordinates: a factor `s` per coordinate divides the ESS by roughly
    /// `(s² / √(2s² − 1))^L`.
    fn fit(bank: &SampleBank, weights: &[f64], defensive: f64) -> Self {
        let dim = bank.dim;
        let mut mean = vec![0.0; dim];
        for (x, &w) in bank.rows().zip(weights) {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        let mut var = vec![0.0; dim];
        for (x, &w) in bank.rows().zip(weights) {
            for l in 0..dim {
                var[l] += w * (x[l] - mean[l]).powi(2);
            }
        }
        let sd: Vec<f64> = var.iter().map(|v| v.sqrt()).collect();
        Self::from_moments(&mean, &sd, defensive)
    }

    /// Beta per coordinate with the given mean and standard deviation
    /// (widened, and capped so the Beta stays unimodal-or-flat).
    fn from_moments(mean: &[f64], sd: &[f64], defensive: f64) -> Self {
        let dim = mean.len();
        let (mut a, mut b, mut ln_norm) = (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
        for l in 0..dim {
            let m = mean[l].clamp(1e-3, 1.0 - 1e-3);
            let sd = (PROPOSAL_WIDENING * sd[l]).max(MIN_PROPOSAL_STD);
            let v = (sd * sd).min(0.8 * m * (1.0 - m));
            let common = m * (1.0 - m) / v - 1.0;
            a[l] = m * common;
            b[l] = (1.0 - m) * common;
            ln_norm[l] = ln_gamma(a[l] + b[l]) - ln_gamma(a[l]) - ln_gamma(b[l]);
        }
        Self {
            a,
            b,
            ln_norm,
            defensive,
        }
    }

    /// Proposal around the constrained mode of `ℓ` over `[0,1]^L`.
    fn around_mode(rows: &[&[f64]], phi: &[f64], lambda0: f64, defensive: f64) -> Self {
        let dim = phi.len();
        let alpha = constrained_mode(rows, phi, lambda0);
        // Observed information plus a flat-prior-sized ridge so that
        // coordinates the data say nothing about keep a cube-wide spread.
        let mut info = nalgebra::DMatrix::<f64>::identity(dim, dim) * UNINFORMED_PRECISION;
        for f in rows {
            let lam = lambda0 + dot(&alpha, f);
            for i in 0..dim {
                for j in 0..dim {
                    info[(i, j)] += f[i] * f[j] / (lam * lam);
                }
            }
        }
        let sd: Vec<f64> = match info.try_inverse() {
            Some(cov) => (0..dim).map(|l| cov[(l, l)].max(0.0).sqrt()).collect(),
            None => vec![UNINFORMED_PRECISION.recip().sqrt(); dim],
        };
        Self::from_moments(&alpha, &sd, defensive)
    }

    fn dim(&self) -> usize {
        self.a.len()
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if rng.random::<f64>() < self.defensive {
            out.iter_mut().for_each(|x| *x = rng.random::<f64>().clamp(CLAMP, 1.0 - CLAMP));
            return;
        }
        for (l, x) in out.iter_mut().enumerate() {
            let beta = Beta::new(self.a[l], self.b[l]).expect("fitted Beta parameters are positive");
            *x = beta.sample(rng).clamp(CLAMP, 1.0 - CLAMP);
        }
    }

    fn ln_density(&self, x: &[f64]) -> f64 {
        let mut ln_beta = (1.0 - self.defensive).ln();
        for l in 0..x.len() {
            ln_beta += self.ln_norm[l] + (self.a[l] - 1.0) * x[l].ln() + (self.b[l] - 1.0) * (1.0 - x[l]).ln();
        }
        log_add_exp(self.defensive.ln(), ln_beta)
    }
}

/// Maximizer of `ℓ` over the unit cube by EM: each step splits every
/// event's excess intensity among the entries and sets
/// `α_l = Σ_i α_l F_il / λ_i / Φ_l`, clipped at 1.
fn constrained_mode(rows: &[&[f64]], phi: &[f64], lambda0: f64) -> Vec<f64> {
    let dim = phi.len();
    let mut alpha = vec![0.5; dim];
    let mut resp = vec![0.0; dim];
    for _ in 0..MODE_ITERATIONS {
        resp.iter_mut().for_each(|r| *r = 0.0);
        for f in rows {
            let lam = lambda0 + dot(&alpha, f);
            for l in 0..dim {
                resp[l] += alpha[l] * f[l] / lam;
            }
        }
        let mut change: f64 = 0.0;
        for l in 0..dim {
            let next = if phi[l] > 0.0 { (resp[l] / phi[l]).min(1.0) } else { 1.0 };
            change = change.max((next - alpha[l]).abs());
            alpha[l] = next;
        }
        if change < 1e-7 {
            break;
        }
    }
    alpha
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Normalizes log-weights in place to probabilities and returns the
/// effective sample size `1 / Σ w²`.
fn normalize_log_weights(lw: &mut [f64]) -> f64 {
    let max = lw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        let n = lw.len() as f64;
        lw.iter_mut().for_each(|w| *w = 1.0 / n);
        return n;
    }
    let mut sum = 0.0;
    for w in lw.iter_mut() {
        *w = (*w - max).exp();
        sum += *w;
    }
    let mut sq = 0.0;
    for w in lw.iter_mut() {
        *w /= sum;
        sq += *w * *w;
    }
    1.0 / sq
}

/// Which candidate set a pair scores: the model-wide uniform bank, or its
/// own adapted bank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Bank {
    Shared,
    Own(Arc<SampleBank>),
}

/// Incremental posterior over one `(target, source)` weight vector.
///
/// Target-event features are appended as events arrive; the likelihood is
/// folded into the per-sample accumulators lazily when an estimate is
/// requested. Clones share the sample bank and feature history. The
/// accumulators are not serialized; they are rebuilt from the stored
/// features on the next estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairPosterior {
    dim: usize,
    lambda0: f64,
    window_start: f64,
    bank: Bank,
    #[serde(skip)]
    event_ll: Arc<Vec<f64>>,
    rows: ChunkedVec<f64>,
    #[serde(skip)]
    rows_folded: usize,
    settled: Vec<f64>,
    settled_upto: usize,
    seed: u64,
    rebanks: u32,
}

/// Compares the stored state; the lazily rebuilt accumulators are ignored.
impl PartialEq for PairPosterior {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.lambda0 == other.lambda0
            && self.window_start == other.window_start
            && self.bank == other.bank
            && self.rows == other.rows
            && self.settled == other.settled
            && self.settled_upto == other.settled_upto
            && self.seed == other.seed
            && self.rebanks == other.rebanks
    }
}

impl PairPosterior {
    /// Starts on the shared bank. `window_start` is the birth time of the
    /// target topic.
    pub fn new(dim: usize, lambda0: f64, window_start: f64, seed: u64) -> Self {
        Self {
            dim,
            lambda0,
            window_start,
            bank: Bank::Shared,
            event_ll: Arc::new(Vec::new()),
            rows: ChunkedVec::new(ROWS_PER_CHUNK * dim),
            rows_folded: 0,
            settled: vec![0.0; dim],
            settled_upto: 0,
            seed,
            rebanks: 0,
        }
    }

    fn bank<'a>(&'a self, shared: &'a Arc<SampleBank>) -> &'a Arc<SampleBank> {
        match &self.bank {
            Bank::Shared => shared,
            Bank::Own(b) => b,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of informative target events recorded.
    pub fn num_events(&self) -> usize {
        self.rows.len() / self.dim()
    }

    pub fn rebanks(&self) -> u32 {
        self.rebanks
    }

    /// Records the source-kernel features of one target event. All-zero
    /// rows only add the constant `ln λ₀` and are dropped.
    pub fn push_event(&mut self, features: &[f64]) {
        debug_assert_eq!(features.len(), self.dim());
        if features.iter().any(|&f| f != 0.0) {
            self.rows.push_row(features);
        }
    }

    /// Compensator `Φ_l = Σ_j ∫_{max(start, t_j)}^{now} κ_l(t − t_j) dt` over
    /// source events before `now`.
    fn compensator(&mut self, source: &[f64], now: f64, kernel: &RbfKernel) -> Vec<f64> {
        let horizon = kernel.truncation_horizon();
        let dim = self.dim();
        while let Some(&t) = source.get(self.settled_upto) {
            if t > now - horizon {
                break;
            }
            let lo = (self.window_start - t).max(0.0);
            for l in 0..dim {
                self.settled[l] += kernel.integral(l, lo, f64::INFINITY);
            }
            self.settled_upto += 1;
        }
        let mut phi = self.settled.clone();
        for &t in &source[self.settled_upto.min(source.len())..] {
            if t >= now {
                break;
            }
            let lo = (self.window_start - t).max(0.0);
            let hi = now - t;
            for l in 0..dim {
                phi[l] += kernel.integral(l, lo.min(hi), hi);
            }
        }
        phi
    }

    fn fold_rows(&mut self, shared: &Arc<SampleBank>) {
        let dim = self.dim();
        let bank = Arc::clone(self.bank(shared));
        if self.event_ll.len() != bank.len() {
            self.event_ll = Arc::new(vec![0.0; bank.len()]);
            self.rows_folded = 0;
        }
        let total_rows = self.num_events();
        if self.rows_folded == total_rows {
            return;
        }
        let lambda0 = self.lambda0;
        let pending: Vec<&[f64]> = self
            .rows
            .slices_from(self.rows_folded * dim)
            .flat_map(|s| s.chunks_exact(dim))
            .collect();
        let ll = Arc::make_mut(&mut self.event_ll);
        ll.par_iter_mut()
            .with_min_len(256)
            .zip(bank.values.par_chunks_exact(dim).with_min_len(256))
            .for_each(|(acc, alpha)| {
                for row in &pending {
                    *acc += (lambda0 + dot(alpha, row)).ln();
                }
            });
        self.rows_folded = total_rows;
    }

    fn rebank(&mut self, proposal: &Proposal, shared: &Arc<SampleBank>) {
        let samples = self.bank(shared).len();
        self.rebanks += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(self.seed, u64::from(self.rebanks)));
        self.bank = Bank::Own(Arc::new(SampleBank::from_proposal(proposal, samples, &mut rng)));
        self.event_ll = Arc::new(Vec::new());
        self.fold_rows(shared);
    }

    /// Posterior-mean estimate given the source history and current time.
    /// `shared` is the bank the pair was created on.
    pub fn estimate(
        &mut self,
        source: &[f64],
        now: f64,
        kernel: &RbfKernel,
        sampling: &AlphaSampling,
        shared: &Arc<SampleBank>,
    ) -> Vec<f64> {
        self.fold_rows(shared);
        let phi = self.compensator(source, now, kernel);
        let n = self.bank(shared).len();
        let threshold = sampling.min_ess.min(sampling.min_ess_fraction * n as f64);
        let mut weights = vec![0.0; n];
        for round in 0..=sampling.max_rounds {
            let bank = self.bank(shared);
            for (s, w) in weights.iter_mut().enumerate() {
                *w = self.event_ll[s] - dot(bank.sample(s), &phi) - bank.log_density[s];
            }
            let ess = normalize_log_weights(&mut weights);
            if n < 2 || round == sampling.max_rounds || ess >= threshold {
                break;
            }
            let collapsed = matches!(self.bank, Bank::Shared) || ess < COLLAPSED_ESS;
            let proposal = if round == 0 && collapsed {
                let dim = self.dim();
                let rows: Vec<&[f64]> = self.rows.slices_from(0).flat_map(|s| s.chunks_exact(dim)).collect();
                Proposal::around_mode(&rows, &phi, self.lambda0, sampling.defensive_weight)
            } else {
                Proposal::fit(self.bank(shared), &weights, sampling.defensive_weight)
            };
            self.rebank(&proposal, shared);
        }
        let mut mean = vec![0.0; self.dim()];
        for (x, &w) in self.bank(shared).rows().zip(&weights) {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        mean.iter_mut().for_each(|m| *m = m.clamp(0.0, 1.0));
        mean
    }
}

/// Estimates the excitation of `target` events by `source` events.
///
/// The observation window runs from the first target event to the last
/// event of either sequence. Pass the same slice twice for
/// self-excitation. Returns the zero vector when `target` is empty.
pub fn estimate_alpha<R: Rng + ?Sized>(
    target: &[f64],
    source: &[f64],
    kernel: &RbfKernel,
    lambda0: f64,
    sampling: &AlphaSampling,
    rng: &mut R,
) -> Vec<f64> {
    let dim = kernel.len();
    let Some(&start) = target.first() else {
        return vec![0.0; dim];
    };
    let end = target
        .last()
        .copied()
        .into_iter()
        .chain(source.last().copied())
        .fold(start, f64::max);
    let bank = Arc::new(SampleBank::uniform(sampling.samples.max(1), dim, rng));
    let mut pair = PairPosterior::new(dim, lambda0, start, rng.next_u64());
    let horizon = kernel.truncation_horizon();
    let mut row = vec![0.0; dim];
    for &t in target {
        row.iter_mut().for_each(|x| *x = 0.0);
        kernel_sum(kernel, source, t, horizon, &mut row);
        pair.push_event(&row);
    }
    pair.estimate(source, end, kernel, sampling, &bank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::preset;

    #[test]
    fn empty_target_gives_zero() {
        let (k, l0) = preset("minute").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = estimate_alpha(&[], &[1.0, 2.0], &k, l0, &AlphaSampling::with_samples(10), &mut rng);
        assert_eq!(a, vec![0.0; 9]);
    }

    #[test]
    fn single_sample_is_returned_verbatim() {
        let (k, l0) = preset("hour").unwrap();
        let times = [0.0, 30.0, 200.0, 260.0];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = estimate_alpha(&times, &times, &k, l0, &AlphaSampling::with_samples(1), &mut rng);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bank = SampleBank::uniform(1, k.len(), &mut rng);
        assert_eq!(a, bank.sample(0));
    }

    #[test]
    fn deterministic_and_in_unit_cube() {
        let (k, l0) = preset("minute").unwrap();
        let target: Vec<f64> = (0..60).map(|i| i as f64 * 7.3).collect();
        let source: Vec<f64> = (0..40).map(|i| 3.0 + i as f64 * 11.1).collect();
        let s = AlphaSampling::with_samples(300);
        let a = estimate_alpha(&target, &source, &k, l0, &s, &mut ChaCha8Rng::seed_from_u64(9));
        let b = estimate_alpha(&target, &source, &k, l0, &s, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        assert!(a.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn compensator_matches_direct_integration() {
        let (k, l0) = preset("minute").unwrap();
        let source = [0.0, 50.0, 120.0, 400.0, 410.0];
        let mut pair = PairPosterior::new(k.len(), l0, 100.0, 0);
        for now in [150.0, 420.0, 900.0] {
            let phi = pair.compensator(&source, now, &k);
            for l in 0..k.len() {
                // trapezoid per source event over its part of the window
                let mut total = 0.0;
                for &src in source.iter().filter(|&&s| s < now) {
                    let a = src.max(100.0);
                    let steps = 20_000;
                    let h = (now - a) / steps as f64;
                    let f = |t: f64| k.entry(l, t - src);
                    let mut acc = 0.5 * (f(a) + f(now));
                    for i in 1..steps {
                        acc += f(a + i as f64 * h);
                    }
                    total += acc * h;
                }
                assert!((total - phi[l]).abs() < 1e-6, "l={l} now={now}: {total} vs {}", phi[l]);
            }
        }
    }

    #[test]
    fn likelihood_weights_match_direct_formula() {
        // With no adaptation, the estimate is the ℓ-weighted mean of the bank.
        let (k, l0) = preset("minute").unwrap();
        let target = [10.0, 25.0, 31.0, 70.0];
        let source = [0.0, 20.0, 60.0];
        let sampling = AlphaSampling {
            samples: 50,
            min_ess_fraction: 0.0,
            min_ess: 0.0,
            ..AlphaSampling::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let got = estimate_alpha(&target, &source, &k, l0, &sampling, &mut rng);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let bank = SampleBank::uniform(50, k.len(), &mut rng);
        let (start, end) = (10.0, 70.0);
        let ll: Vec<f64> = (0..50)
            .map(|s| {
                let a = bank.sample(s);
                let mut v = 0.0;
                for &t in &target {
                    let lam: f64 = source
                        .iter()
                        .filter(|&&x| x < t)
                        .map(|&x| (0..k.len()).map(|l| a[l] * k.entry(l, t - x)).sum::<f64>())
                        .sum();
                    v += (l0 + lam).ln();
                }
                for &x in &source {
                    for l in 0..k.len() {
                        v -= a[l] * k.integral(l, (start - x).max(0.0), end - x);
                    }
                }
                v
            })
            .collect();
        let max = ll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = ll.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = w.iter().sum();
        for l in 0..k.len() {
            let m: f64 = (0..50).map(|s| w[s] * bank.sample(s)[l]).sum::<f64>() / z;
            assert!((m - got[l]).abs() < 1e-12);
        }
    }

    #[test]
    fn em_mode_satisfies_box_kkt_conditions() {
        let (k, l0) = preset("minute").unwrap();
        let times: Vec<f64> = (0..200).map(|i| (i as f64 * 7.919) % 1500.0 + (i % 3) as f64 * 20.0).collect();
        let mut times = times;
        times.sort_by(f64::total_cmp);
        let mut rows = Vec::new();
        for &t in &times {
            let mut row = vec![0.0; k.len()];
            kernel_sum(&k, &times, t, k.truncation_horizon(), &mut row);
            rows.push(row);
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let mut pair = PairPosterior::new(k.len(), l0, times[0], 0);
        let phi = pair.compensator(&times, *times.last().unwrap(), &k);
        let a = constrained_mode(&refs, &phi, l0);
        for l in 0..k.len() {
            let grad: f64 = refs.iter().map(|f| f[l] / (l0 + dot(&a, f))).sum::<f64>() - phi[l];
            let scale = phi[l].max(1.0);
            if a[l] < 1e-4 {
                assert!(grad < 1e-3 * scale, "l={l} at 0 with gradient {grad}");
            } else if a[l] > 1.0 - 1e-9 {
                assert!(grad > -1e-3 * scale, "l={l} at 1 with gradient {grad}");
            } else {
                assert!(grad.abs() < 1e-3 * scale, "l={l} interior gradient {grad} at {}", a[l]);
            }
        }
    }

    #[test]
    fn serde_round_trip_rebuilds_accumulators() {
        let (k, l0) = preset("minute").unwrap();
        let shared = Arc::new(SampleBank::uniform(64, k.len(), &mut ChaCha8Rng::seed_from_u64(0)));
        let source: Vec<f64> = (0..30).map(|i| i as f64 * 6.0).collect();
        let mut a = PairPosterior::new(k.len(), l0, 0.0, 1);
        let mut row = vec![0.0; k.len()];
        for &t in &source {
            row.iter_mut().for_each(|x| *x = 0.0);
            kernel_sum(&k, &source, t, k.truncation_horizon(), &mut row);
            a.push_event(&row);
        }
        assert_eq!(a.num_events(), 29);
        let s = AlphaSampling::with_samples(64);
        let first = a.estimate(&source, 180.0, &k, &s, &shared);
        let mut b: PairPosterior = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        assert_eq!(a.estimate(&source, 200.0, &k, &s, &shared), b.estimate(&source, 200.0, &k, &s, &shared));
        assert!(first.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}
