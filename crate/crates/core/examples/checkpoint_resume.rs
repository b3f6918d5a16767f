//! Snapshot a run halfway, resume from the snapshot and check that the
//! outcome matches an uninterrupted run.
//!
//! ```text
//! cargo run --release --example checkpoint_resume
//! ```

use mpdhp::inference::{load_checkpoint, write_checkpoint, InferenceConfig, Smc};
use mpdhp::synthgen::{generate, Scenario};
use mpdhp::temporal::{KernelPreset, KernelSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns whether the resumed allocations equal the uninterrupted ones.
pub fn run_example() -> mpdhp::Result<bool> {
    let mut scenario = Scenario::five_topics();
    scenario.horizon = 400.0;
    let synth = generate(&scenario.build()?, &mut ChaCha8Rng::seed_from_u64(8))?;
    let (docs, v, ch) = (&synth.stream.documents, synth.stream.vocabulary.len(), synth.stream.channels.len());
    let mut config = InferenceConfig::new(KernelSpec::preset(KernelPreset::Minute));
    config.alpha_samples = 200;

    let mut full = Smc::new(config.clone(), v)?;
    for d in docs {
        full.process(d)?;
    }
    let full = full.finish(docs, ch);

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("checkpoint.json");
    let half = docs.len() / 2;
    let mut first = Smc::new(config, v)?;
    for d in &docs[..half] {
        first.process(d)?;
    }
    write_checkpoint(&path, &first.checkpoint())?;
    drop(first);

    let mut resumed = Smc::resume(load_checkpoint(&path)?)?;
    for d in &docs[half..] {
        resumed.process(d)?;
    }
    let resumed = resumed.finish(docs, ch);
    let same = full.allocations == resumed.allocations && full.alpha == resumed.alpha;
    println!(
        "{} documents, checkpoint after {half} ({} bytes); identical result: {same}",
        docs.len(),
        std::fs::metadata(&path)?.len()
    );
    Ok(same)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
