//! Generator invariants over random stable scenarios.

use mpdhp::synthgen::{generate, GroundTruth, LengthLaw, PairSpec, Scenario};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario(topics: usize, kernel: &str, self_weight: f64, cross: f64, shared: usize) -> Scenario {
    let entries = match kernel {
        "minute" => 9,
        "hour" => 5,
        _ => 7,
    };
    let mut text = format!(
        "horizon = 1.0\nkernel = \"{kernel}\"\ntopics = {topics}\nwords_per_topic = 12\nbackground_rate = 0.01\nchannels = 2\n"
    );
    if shared > 0 {
        text += &format!("shared_words = {shared}\nshared_weight = 0.2\n");
    }
    let mut s = Scenario::from_toml(&text).unwrap();
    // spread the weight over the entries so the branching ratio is about `self_weight`
    let per = self_weight / entries as f64;
    s.excitation.self_excitation = Some(vec![per; entries]);
    if topics > 1 && cross > 0.0 {
        s.excitation.pairs.push(PairSpec {
            target: 1,
            source: 0,
            values: vec![cross / entries as f64; entries],
        });
    }
    s
}

fn horizon_for(truth: &GroundTruth) -> f64 {
    // enough time for a few hundred events at most
    let means = truth.kernel.means();
    (means[means.len() - 1] * 6.0).max(300.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn streams_are_well_formed(
        topics in 1usize..4,
        kernel in prop::sample::select(vec!["minute", "hour", "day"]),
        self_weight in 0.0f64..0.7,
        cross in 0.0f64..0.2,
        shared in 0usize..3,
        seed in any::<u64>(),
    ) {
        let mut s = scenario(topics, kernel, self_weight, cross, shared);
        s.doc_length = Some(LengthLaw::Uniform { min: 3, max: 6 });
        let mut truth = s.build().unwrap();
        truth.horizon = horizon_for(&truth);
        prop_assert!(truth.spectral_radius() < 1.0);

        let synth = generate(&truth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let docs = &synth.stream.documents;
        prop_assert_eq!(docs.len(), synth.labels.len());
        prop_assert!(docs.windows(2).all(|w| w[0].time <= w[1].time));
        for (d, &label) in docs.iter().zip(&synth.labels) {
            prop_assert!(label < topics);
            prop_assert!((0.0..=truth.horizon).contains(&d.time));
            prop_assert!((3..=6).contains(&d.token_total()));
            prop_assert!(d.channel < truth.channels.len());
            let own = &truth.topics[label].words;
            prop_assert!(d.words.iter().all(|(w, _)| own.contains(w)));
        }

        // same seed, same stream
        let again = generate(&truth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(&again.stream, &synth.stream);
    }

    #[test]
    fn streams_survive_a_file_round_trip(seed in any::<u64>()) {
        let mut s = Scenario::five_topics();
        s.horizon = 200.0;
        let truth = s.build().unwrap();
        let synth = generate(&truth, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("docs.jsonl");
        mpdhp::io::write_stream(&path, &synth.stream).unwrap();
        prop_assert_eq!(mpdhp::io::read_stream(&path).unwrap(), synth.stream);
    }
}

#[test]
fn explosive_excitation_is_rejected_before_simulation() {
    let s = scenario(2, "minute", 1.2, 0.0, 0);
    assert!(matches!(s.build().and_then(|t| t.validate()), Err(mpdhp::Error::Unstable(_))));
}
