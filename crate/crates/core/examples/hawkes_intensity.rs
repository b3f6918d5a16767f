//! Kernel presets, the λ₀ heuristic and Hawkes intensities.
//!
//! ```text
//! cargo run --example hawkes_intensity
//! ```

use mpdhp::temporal::{intensity, lambda0_heuristic, preset, AlphaTensor, EventHistory};

/// Returns the intensity of topic 0 sampled every 5 minutes over two hours.
pub fn run_example() -> mpdhp::Result<Vec<f64>> {
    for name in ["minute", "hour", "day"] {
        let (k, l0) = preset(name)?;
        println!(
            "{name:>6}: {} entries, means {:?}, preset λ₀ = {l0}, heuristic λ₀ = {:.3e}",
            k.len(),
            k.means(),
            lambda0_heuristic(&k)
        );
    }
    let (kernel, _) = preset("minute")?;
    // Topic 0 excites itself 20 minutes later; topic 1 excites topic 0 at
    // short lags.
    let mut alpha = AlphaTensor::zeros(2, kernel.len());
    alpha.set(0, 0, vec![0.0, 0.0, 0.8, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    alpha.set(0, 1, vec![0.5, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])?;
    let history = EventHistory::new(vec![vec![0.0, 5.0], vec![40.0]])?;
    let mut curve = Vec::new();
    for step in 0..=24 {
        let t = step as f64 * 5.0;
        let lambda = intensity(0, t, &history, &alpha, &kernel)?;
        println!("t = {t:>5.1} min  λ₀(t) = {lambda:.5} {}", "#".repeat((lambda * 800.0) as usize));
        curve.push(lambda);
    }
    Ok(curve)
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
