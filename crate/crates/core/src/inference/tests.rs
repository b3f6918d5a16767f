use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::lang_model::ClusterWordCounts;
use crate::temporal::{KernelPreset, KernelSpec, RbfKernel};

fn minute_config() -> InferenceConfig {
    let mut cfg = InferenceConfig::new(KernelSpec::preset(KernelPreset::Minute));
    cfg.alpha_samples = 256;
    cfg
}

/// One-entry kernel `N(0, 5)` with `λ₀ = 0.01`.
fn narrow_config() -> InferenceConfig {
    let kernel = RbfKernel::new(vec![0.0], vec![5.0]).unwrap();
    let mut cfg = InferenceConfig::new(KernelSpec {
        name: "narrow".into(),
        kernel,
        lambda0: 0.01,
    });
    cfg.alpha_samples = 64;
    cfg
}

fn counts(docs: &[Document]) -> ClusterWordCounts {
    let mut c = ClusterWordCounts::new();
    for d in docs {
        c.update(d);
    }
    c
}

/// Random topic states over a small vocabulary, all with events before `now`.
fn random_particle(rng: &mut ChaCha8Rng, model: &Model, vocab: usize, now: f64) -> Particle {
    let k = rng.random_range(0..5);
    let l = model.kernel().len();
    let clusters = (0..k)
        .map(|id| {
            let n_events = rng.random_range(1..5);
            let mut times: Vec<f64> = (0..n_events).map(|_| now - rng.random_range(0.0..120.0)).collect();
            times.sort_by(f64::total_cmp);
            let docs: Vec<Document> = (0..n_events)
                .map(|i| {
                    let toks: Vec<usize> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0..vocab)).collect();
                    Document::from_tokens(i, times[i], 0, 0, &toks)
                })
                .collect();
            let mut alpha = BTreeMap::new();
            for s in 0..k {
                if rng.random_bool(0.7) {
                    alpha.insert(s, (0..l).map(|_| rng.random::<f64>()).collect::<Vec<f64>>());
                }
            }
            ClusterState::with_fixed_alpha(id, counts(&docs), times, alpha)
        })
        .collect();
    Particle::from_clusters(clusters, now, model)
}

/// Sequential predictive probability of the document's tokens, multiplied
/// out directly.
fn naive_text_prob(doc: &Document, cluster: &ClusterWordCounts, theta0: f64, vocab: usize) -> f64 {
    let mut counts: Vec<f64> = (0..vocab).map(|w| cluster.count(w) as f64).collect();
    let mut total = cluster.total() as f64;
    let mut p = 1.0;
    for &(w, n) in &doc.words {
        for _ in 0..n {
            p *= (counts[w] + theta0) / (total + vocab as f64 * theta0);
            counts[w] += 1.0;
            total += 1.0;
        }
    }
    p
}

/// Direct evaluation of the allocation posterior: untruncated intensities,
/// plain products, one normalization.
fn naive_posterior(doc: &Document, particle: &Particle, model: &Model) -> Vec<f64> {
    let kernel = model.kernel();
    let horizon = kernel.activity_horizon();
    let k = particle.num_clusters();
    let active: Vec<usize> = (0..k)
        .filter(|&c| doc.time - particle.cluster(c).times.last().unwrap() <= horizon)
        .collect();
    let mut un = vec![0.0; k + 1];
    for &c in &active {
        let mut lam = 0.0;
        for &s in &active {
            if let Some(a) = particle.cluster(c).alpha(s) {
                for &tj in particle.cluster(s).times.iter().filter(|&&tj| tj < doc.time) {
                    for (l, al) in a.iter().enumerate() {
                        lam += al * kernel.entry(l, doc.time - tj);
                    }
                }
            }
        }
        let prior = if model.config.r == 0.0 { 1.0 } else { lam.powf(model.config.r) };
        un[c] = prior * naive_text_prob(doc, &particle.cluster(c).words, model.config.theta0, model.prior.vocab_size);
    }
    un[k] = model.config.lambda0
        * naive_text_prob(doc, &ClusterWordCounts::new(), model.config.theta0, model.prior.vocab_size);
    let z: f64 = un.iter().sum();
    un.iter().map(|u| u / z).collect()
}

#[test]
fn posterior_matches_direct_evaluation() {
    let vocab = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in [0.0, 0.5, 1.0, 1.5] {
        let mut cfg = minute_config();
        cfg.r = r;
        let model = Model::new(cfg, vocab).unwrap();
        for _ in 0..300 {
            let now = 500.0;
            let p = random_particle(&mut rng, &model, vocab, now);
            let toks: Vec<usize> = (0..rng.random_range(1..6)).map(|_| rng.random_range(0..vocab)).collect();
            let doc = Document::from_tokens(0, now, 0, 0, &toks);
            let got = posterior_allocation(&doc, &p, &model).unwrap();
            let want = naive_posterior(&doc, &p, &model);
            assert_eq!(got.len(), want.len());
            for (g, w) in got.iter().zip(&want) {
                assert!((g - w).abs() < 1e-9, "r={r}: {got:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn temporal_prior_normalizes_to_worked_example() {
    // Both topics fire at t = 100; at t = 101 the kernel is the same for
    // both, so weights proportional to 0.03 and 0.01 give those intensities.
    let model = Model::new(narrow_config(), 4).unwrap();
    let kappa = model.kernel().entry(0, 1.0);
    let doc = Document::from_tokens(0, 100.0, 0, 0, &[0]);
    let mk = |id: usize, lam: f64| {
        ClusterState::with_fixed_alpha(id, counts(&[doc.clone()]), vec![100.0], BTreeMap::from([(id, vec![lam / kappa])]))
    };
    let p = Particle::from_clusters(vec![mk(0, 0.03), mk(1, 0.01)], 100.0, &model);
    let prior = temporal_prior(101.0, &p, &model).unwrap();
    let z: f64 = prior.iter().sum();
    let normalized: Vec<f64> = prior.iter().map(|x| x / z).collect();
    for (got, want) in normalized.iter().zip([0.6, 0.2, 0.2]) {
        assert!((got - want).abs() < 1e-12, "{normalized:?}");
    }
}

#[test]
fn r_zero_prior_is_flat_over_active_topics() {
    let mut cfg = narrow_config();
    cfg.r = 0.0;
    let model = Model::new(cfg, 4).unwrap();
    let doc = Document::from_tokens(0, 0.0, 0, 0, &[0]);
    let a = ClusterState::with_fixed_alpha(0, counts(&[doc.clone()]), vec![0.0], BTreeMap::from([(0, vec![0.9])]));
    let b = ClusterState::with_fixed_alpha(1, counts(&[doc.clone()]), vec![3.0], BTreeMap::new());
    // frozen: last event far outside the activity horizon
    let c = ClusterState::with_fixed_alpha(2, counts(&[doc]), vec![0.0], BTreeMap::new());
    let mut clusters = vec![a, b, c];
    clusters[2].times = vec![-500.0];
    let p = Particle::from_clusters(clusters, 5.0, &model);
    assert_eq!(temporal_prior(5.0, &p, &model).unwrap(), vec![1.0, 1.0, 0.0, 0.01]);

    // identical text: the posterior over existing topics is uniform
    let q = Document::from_tokens(1, 5.0, 0, 0, &[0]);
    let post = posterior_allocation(&q, &p, &model).unwrap();
    assert!((post[0] - post[1]).abs() < 1e-15);
    assert_eq!(post[2], 0.0);
}

#[test]
fn posterior_is_monotone_in_intensity_for_equal_text() {
    let model = Model::new(narrow_config(), 4).unwrap();
    let doc = Document::from_tokens(0, 100.0, 0, 0, &[0]);
    let weights = [0.1, 0.4, 0.2, 0.8];
    let clusters = weights
        .iter()
        .enumerate()
        .map(|(id, &w)| ClusterState::with_fixed_alpha(id, counts(&[doc.clone()]), vec![100.0], BTreeMap::from([(id, vec![w])])))
        .collect();
    let p = Particle::from_clusters(clusters, 100.0, &model);
    let q = Document::from_tokens(1, 102.0, 0, 0, &[0]);
    let post = posterior_allocation(&q, &p, &model).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            if weights[i] < weights[j] {
                assert!(post[i] < post[j]);
            }
        }
    }
}

#[test]
fn one_document_opens_one_topic() {
    let model = Model::new(minute_config(), 5).unwrap();
    let mut particles = vec![Particle::new(1.0)];
    let doc = Document::from_tokens(0, 0.0, 0, 0, &[1, 2]);
    process_document(&doc, &mut particles, &model, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    assert_eq!(particles[0].num_clusters(), 1);
    assert_eq!(particles[0].allocations(), vec![0]);
    assert_eq!(particles[0].weight(), 1.0);
}

#[test]
fn out_of_order_document_is_rejected() {
    let model = Model::new(minute_config(), 5).unwrap();
    let mut particles = vec![Particle::new(1.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    process_document(&Document::from_tokens(0, 10.0, 0, 0, &[1]), &mut particles, &model, &mut rng).unwrap();
    let err = process_document(&Document::from_tokens(1, 5.0, 0, 0, &[1]), &mut particles, &model, &mut rng);
    assert!(matches!(err, Err(Error::Contract(_))));
}

#[test]
fn identical_burst_co_clusters() {
    let docs: Vec<Document> = (0..12)
        .map(|i| Document::from_tokens(i, i as f64 * 0.4, 0, 0, &[3, 4, 5]))
        .collect();
    let mut together = 0usize;
    let mut pairs = 0usize;
    for seed in 0..20 {
        let mut cfg = minute_config();
        cfg.seed = seed;
        let labels = run(&docs, 10, 1, &cfg).unwrap().labels();
        for i in 0..labels.len() {
            for j in i + 1..labels.len() {
                pairs += 1;
                together += usize::from(labels[i] == labels[j]);
            }
        }
    }
    let frac = together as f64 / pairs as f64;
    assert!(frac >= 0.9, "co-clustered fraction {frac}");
}

#[test]
fn weights_and_logs_stay_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let docs: Vec<Document> = (0..60)
        .map(|i| {
            let toks: Vec<usize> = (0..4).map(|_| rng.random_range(0..20)).collect();
            Document::from_tokens(i, i as f64 * 3.0, 0, 0, &toks)
        })
        .collect();
    let mut smc = Smc::new(minute_config(), 20).unwrap();
    for (n, d) in docs.iter().enumerate() {
        smc.process(d).unwrap();
        let total: f64 = smc.particles().iter().map(Particle::weight).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(smc.particles().len(), 8);
        for p in smc.particles() {
            assert_eq!(p.num_allocations(), n + 1);
            let sizes: u64 = p.clusters().map(|c| c.words.doc_count()).sum();
            assert_eq!(sizes as usize, n + 1);
        }
    }
}

#[test]
fn empty_stream_gives_empty_result() {
    let res = run(&[], 10, 0, &minute_config()).unwrap();
    assert_eq!(res.num_clusters(), 0);
    assert!(res.allocations.is_empty());
}

#[test]
fn run_is_deterministic_given_seed() {
    let docs: Vec<Document> = (0..40)
        .map(|i| Document::from_tokens(i, i as f64 * 2.0, 0, 0, &[i % 7, (i * 3) % 7]))
        .collect();
    let a = run(&docs, 7, 1, &minute_config()).unwrap();
    let b = run(&docs, 7, 1, &minute_config()).unwrap();
    assert_eq!(a.labels(), b.labels());
    assert_eq!(a.alpha, b.alpha);
}

#[test]
fn resume_from_checkpoint_matches_uninterrupted_run() {
    let docs: Vec<Document> = (0..50)
        .map(|i| Document::from_tokens(i, i as f64 * 1.5, 0, 0, &[i % 5, (i / 5) % 5]))
        .collect();
    let mut whole = Smc::new(minute_config(), 5).unwrap();
    for d in &docs {
        whole.process(d).unwrap();
    }
    let mut first = Smc::new(minute_config(), 5).unwrap();
    for d in &docs[..23] {
        first.process(d).unwrap();
    }
    let json = serde_json::to_string(&first.checkpoint()).unwrap();
    let mut second = Smc::resume(serde_json::from_str(&json).unwrap()).unwrap();
    for d in &docs[23..] {
        second.process(d).unwrap();
    }
    assert_eq!(whole.particles(), second.particles());
    let (x, y) = (whole.finish(&docs, 1), second.finish(&docs, 1));
    assert_eq!(x.labels(), y.labels());
    assert_eq!(x.alpha, y.alpha);
}

fn particles_with_weights(w: &[f64]) -> Vec<Particle> {
    w.iter().map(|&x| Particle::new(x)).collect()
}

#[test]
fn uniform_weights_do_not_resample() {
    let mut ps = particles_with_weights(&[0.125; 8]);
    assert!(!resample(&mut ps, &mut ChaCha8Rng::seed_from_u64(0)));
}

#[test]
fn single_particle_never_resamples() {
    let mut ps = particles_with_weights(&[1.0]);
    assert!(!resample(&mut ps, &mut ChaCha8Rng::seed_from_u64(0)));
}

#[test]
fn dominant_particle_takes_over() {
    // tag particles by their last time so survivors can be traced
    let model = Model::new(minute_config(), 4).unwrap();
    let mut ps: Vec<Particle> = (0..8)
        .map(|i| {
            let mut p = Particle::from_clusters(Vec::new(), i as f64, &model);
            p.set_weight(if i == 3 { 1.0 - 7e-9 } else { 1e-9 });
            p
        })
        .collect();
    assert!(effective_sample_size(&ps) < 4.0);
    assert!(resample(&mut ps, &mut ChaCha8Rng::seed_from_u64(1)));
    assert_eq!(ps.len(), 8);
    assert!(ps.iter().all(|p| p.last_time() == 3.0 && p.weight() == 0.125));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn posterior_is_a_distribution(seed in any::<u64>(), r in 0.0f64..2.0) {
        let mut cfg = minute_config();
        cfg.r = r;
        let model = Model::new(cfg, 8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_particle(&mut rng, &model, 8, 300.0);
        let doc = Document::from_tokens(0, 300.0, 0, 0, &[rng.random_range(0..8), rng.random_range(0..8)]);
        let post = posterior_allocation(&doc, &p, &model).unwrap();
        prop_assert!((post.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(post.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn scaling_unnormalized_entries_is_harmless(seed in any::<u64>(), shift in -300.0f64..300.0) {
        // The normalized posterior is computed from log scores; adding a
        // constant to every log score must leave it unchanged.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model = Model::new(minute_config(), 8).unwrap();
        let p = random_particle(&mut rng, &model, 8, 300.0);
        let doc = Document::from_tokens(0, 300.0, 0, 0, &[rng.random_range(0..8)]);
        let active = p.active().to_vec();
        let base = particle::score(&doc, &p, &active, &model).probs;
        let logs: Vec<f64> = base.iter().map(|x| x.ln() + shift).collect();
        let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let un: Vec<f64> = logs.iter().map(|v| (v - max).exp()).collect();
        let z: f64 = un.iter().sum();
        for (a, b) in base.iter().zip(un.iter().map(|u| u / z)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
