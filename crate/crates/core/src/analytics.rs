//! Post-hoc interaction analytics: effective interactions, strength
//! statistics, range profile, entropy-based cluster summaries and
//! distribution exports.
//!
//! The effective interaction of source `j` on target `i` through kernel
//! entry `l` is the average, over the target's events, of the excitation
//! that exceeds the background rate:
//!
//! ```text
//! w_{i,j,l} = (1/|H_i|) Σ_{t_i ∈ H_i} Σ_{t_j < t_i} max(a_{i,j,l} κ_l(t_i − t_j) − λ₀, 0)
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::inference::{InferenceConfig, InferenceResult};
use crate::temporal::{AlphaTensor, EventHistory, RbfKernel};

/// Sparse `K × K × L` tensor of effective interactions; rows that are zero
/// everywhere are not stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveInteraction {
    num_entries: usize,
    /// Topics holding at least one event.
    active: Vec<bool>,
    rows: BTreeMap<(usize, usize), Vec<f64>>,
}

impl EffectiveInteraction {
    pub fn num_topics(&self) -> usize {
        self.active.len()
    }

    pub fn num_entries(&self) -> usize {
        self.num_entries
    }

    pub fn num_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn is_active(&self, c: usize) -> bool {
        self.active.get(c).copied().unwrap_or(false)
    }

    pub fn value(&self, target: usize, source: usize, l: usize) -> f64 {
        self.rows.get(&(target, source)).map_or(0.0, |r| r[l])
    }

    /// Nonzero rows keyed by `(target, source)`.
    pub fn rows(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        self.rows.iter().map(|(&k, v)| (k, v.as_slice()))
    }

    /// All strictly positive entries, row by row.
    pub fn nonzero_values(&self) -> Vec<f64> {
        self.rows.values().flatten().copied().filter(|&v| v > 0.0).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Lags `Δ` at which `a · κ_l(Δ) > λ₀`, as a closed interval, or `None`
/// when the weighted kernel never clears the background.
fn excess_window(kernel: &RbfKernel, l: usize, a: f64, lambda0: f64) -> Option<(f64, f64)> {
    let top = a * kernel.peak(l);
    if top <= lambda0 {
        return None;
    }
    let half = kernel.sigmas()[l] * (2.0 * (top / lambda0).ln()).sqrt();
    let mu = kernel.means()[l];
    Some(((mu - half).max(0.0), mu + half))
}

/// Evaluates the effective-interaction tensor.
///
/// Only lags where `a · κ_l` exceeds `λ₀` contribute, and that set is an
/// interval around the kernel mean; the sum is restricted to it exactly, so
/// no truncation error is introduced.
pub fn effective_interaction(
    alpha: &AlphaTensor,
    history: &EventHistory,
    kernel: &RbfKernel,
    lambda0: f64,
) -> Result<EffectiveInteraction> {
    if alpha.num_topics() != history.num_topics() {
        return Err(contract(format!(
            "excitation tensor has {} topics but the history has {}",
            alpha.num_topics(),
            history.num_topics()
        )));
    }
    if alpha.num_entries() != kernel.len() {
        return Err(contract(format!(
            "excitation tensor has {} entries but the kernel has {}",
            alpha.num_entries(),
            kernel.len()
        )));
    }
    if !(lambda0 > 0.0) {
        return Err(contract("lambda0 must be positive"));
    }
    let pairs: Vec<((usize, usize), &[f64])> = alpha.pairs().collect();
    let rows: BTreeMap<(usize, usize), Vec<f64>> = pairs
        .par_iter()
        .filter_map(|&((i, j), a)| {
            let targets = history.times(i);
            if targets.is_empty() {
                return None;
            }
            let sources = history.times(j);
            let mut row = vec![0.0; kernel.len()];
            for (l, w) in row.iter_mut().enumerate() {
                let Some((lo, hi)) = excess_window(kernel, l, a[l], lambda0) else {
                    continue;
                };
                let mut acc = 0.0;
                for &ti in targets {
                    // sources with lo <= ti - tj <= hi and tj < ti
                    let start = sources.partition_point(|&tj| tj < ti - hi);
                    let end = sources.partition_point(|&tj| tj <= ti - lo && tj < ti);
                    for &tj in &sources[start..end.max(start)] {
                        acc += (a[l] * kernel.entry(l, ti - tj) - lambda0).max(0.0);
                    }
                }
                *w = acc / targets.len() as f64;
            }
            row.iter().any(|&v| v > 0.0).then_some(((i, j), row))
        })
        .collect();
    let active = history.all().iter().map(|t| !t.is_empty()).collect();
    Ok(EffectiveInteraction {
        num_entries: kernel.len(),
        active,
        rows,
    })
}

/// A mean with its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std: f64,
}

/// Running first and second moments over a set of entries where most are
/// implicitly zero.
#[derive(Default)]
struct Moments {
    n: f64,
    sum: f64,
    sq: f64,
}

impl Moments {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.sq += v * v;
    }

    fn estimate(&self) -> Option<Estimate> {
        if self.n == 0.0 {
            return None;
        }
        let mean = self.sum / self.n;
        let var = (self.sq / self.n - mean * mean).max(0.0);
        Some(Estimate { mean, std: var.sqrt() })
    }
}

/// Interaction-strength statistics over active topic pairs (both topics
/// hold at least one event), averaging every kernel entry of every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthReport {
    pub active_topics: usize,
    /// `⟨A⟩`: mean excitation weight; absent without active topics.
    pub mean_a: Option<Estimate>,
    /// `⟨W⟩`: mean effective interaction.
    pub mean_w: Option<Estimate>,
    /// `⟨A⟩_W`: excitation weights averaged with `W` as confidence weights;
    /// absent when `ΣW = 0`.
    pub mean_a_weighted: Option<Estimate>,
    /// Mean diagonal `W` over mean off-diagonal `W`, with a delta-method
    /// standard deviation; absent when the off-diagonal mean is 0.
    pub intra_extra_ratio: Option<Estimate>,
    pub mean_w_intra: Option<Estimate>,
    pub mean_w_extra: Option<Estimate>,
}

pub fn strength_report(alpha: &AlphaTensor, w: &EffectiveInteraction) -> Result<StrengthReport> {
    if alpha.num_topics() != w.num_topics() || alpha.num_entries() != w.num_entries() {
        return Err(contract("excitation and effective-interaction shapes differ"));
    }
    let k = w.num_active() as f64;
    let l = w.num_entries() as f64;
    let (mut a_m, mut w_m, mut intra, mut extra) =
        (Moments::default(), Moments::default(), Moments::default(), Moments::default());
    a_m.n = k * k * l;
    w_m.n = k * k * l;
    intra.n = k * l;
    extra.n = k * (k - 1.0) * l;
    let both_active = |i: usize, j: usize| w.is_active(i) && w.is_active(j);

    for ((i, j), row) in alpha.pairs() {
        if both_active(i, j) {
            row.iter().for_each(|&v| a_m.add(v));
        }
    }
    let (mut sum_w, mut sum_aw) = (0.0, 0.0);
    for ((i, j), row) in w.rows() {
        if !both_active(i, j) {
            continue;
        }
        let block = if i == j { &mut intra } else { &mut extra };
        for (lv, &v) in row.iter().enumerate() {
            w_m.add(v);
            block.add(v);
            sum_w += v;
            sum_aw += v * alpha.value(i, j, lv);
        }
    }

    let mean_a_weighted = (sum_w > 0.0).then(|| {
        let mean = sum_aw / sum_w;
        let mut var = 0.0;
        for ((i, j), row) in w.rows() {
            if both_active(i, j) {
                for (lv, &v) in row.iter().enumerate() {
                    var += v * (alpha.value(i, j, lv) - mean).powi(2);
                }
            }
        }
        Estimate {
            mean,
            std: (var / sum_w).sqrt(),
        }
    });

    let (mean_w_intra, mean_w_extra) = (intra.estimate(), extra.estimate());
    let intra_extra_ratio = match (mean_w_intra, mean_w_extra) {
        (Some(a), Some(b)) if b.mean > 0.0 => {
            let ratio = a.mean / b.mean;
            // variance of each block mean, then first-order propagation
            let var_a = a.std * a.std / intra.n;
            let var_b = b.std * b.std / extra.n;
            let rel = if a.mean > 0.0 { var_a / (a.mean * a.mean) } else { 0.0 } + var_b / (b.mean * b.mean);
            Some(Estimate {
                mean: ratio,
                std: ratio.abs() * rel.sqrt(),
            })
        }
        _ => None,
    };

    Ok(StrengthReport {
        active_topics: w.num_active(),
        mean_a: a_m.estimate(),
        mean_w: w_m.estimate(),
        mean_a_weighted,
        intra_extra_ratio,
        mean_w_intra,
        mean_w_extra,
    })
}

/// Mean effective interaction per kernel entry over all pairs of active
/// topics.
pub fn interaction_range(w: &EffectiveInteraction) -> Vec<f64> {
    let mut out = vec![0.0; w.num_entries()];
    let k = w.num_active() as f64;
    if k == 0.0 {
        return out;
    }
    for ((i, j), row) in w.rows() {
        if w.is_active(i) && w.is_active(j) {
            out.iter_mut().zip(row).for_each(|(o, v)| *o += v);
        }
    }
    out.iter_mut().for_each(|o| *o /= k * k);
    out
}

/// `−Σ p ln p / ln n` over the `n = counts.len()` categories. A single
/// category has entropy 0.
pub fn normalized_entropy(counts: &[u64]) -> Result<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::Undefined("entropy of an all-zero count vector"));
    }
    if counts.len() < 2 {
        return Ok(0.0);
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum();
    Ok((h / (counts.len() as f64).ln()).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopCluster {
    pub id: usize,
    pub size: u64,
    pub top_words: Vec<String>,
    /// Entropy of the topic's word counts over the words it contains.
    pub s_text: f64,
    /// Entropy of the topic's channel counts over all channels.
    pub s_sub: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Topics holding at least one document.
    pub k: usize,
    pub mean_population: Option<Estimate>,
    pub s_text_top: Option<Estimate>,
    pub s_sub_top: Option<Estimate>,
    /// The most populated topics, largest first (ties: lower id first).
    pub top: Vec<TopCluster>,
}

fn estimate_of(values: impl Iterator<Item = f64>) -> Option<Estimate> {
    let mut m = Moments::default();
    for v in values {
        m.n += 1.0;
        m.add(v);
    }
    m.estimate()
}

pub fn cluster_report(result: &InferenceResult, top_k: usize) -> ClusterReport {
    let mut populated: Vec<_> = result.clusters.iter().filter(|c| c.doc_count > 0).collect();
    populated.sort_by(|a, b| b.doc_count.cmp(&a.doc_count).then(a.id.cmp(&b.id)));
    let top: Vec<TopCluster> = populated
        .iter()
        .take(top_k)
        .map(|c| {
            let words: Vec<u64> = c.word_counts.iter().map(|&(_, n)| n).collect();
            let channels: Vec<u64> = (0..result.n_channels)
                .map(|ch| c.channel_counts.get(&ch).copied().unwrap_or(0))
                .collect();
            TopCluster {
                id: c.id,
                size: c.doc_count,
                top_words: c.top_words.clone(),
                s_text: normalized_entropy(&words).unwrap_or(0.0),
                s_sub: normalized_entropy(&channels).unwrap_or(0.0),
            }
        })
        .collect();
    ClusterReport {
        k: populated.len(),
        mean_population: estimate_of(populated.iter().map(|c| c.doc_count as f64)),
        s_text_top: estimate_of(top.iter().map(|c| c.s_text)),
        s_sub_top: estimate_of(top.iter().map(|c| c.s_sub)),
        top,
    }
}

/// Histogram bin `[low, high)`; the last bin is closed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Log-spaced histogram of the positive values.
pub fn log_histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    let positive: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
    let Some(lo) = positive.iter().copied().reduce(f64::min) else {
        return Vec::new();
    };
    let hi = positive.iter().copied().fold(lo, f64::max);
    if lo == hi || bins < 2 {
        return vec![Bin {
            low: lo,
            high: hi,
            count: positive.len(),
        }];
    }
    let (llo, lhi) = (lo.ln(), hi.ln());
    let step = (lhi - llo) / bins as f64;
    let edge = |b: usize| if b == bins { hi } else { (llo + step * b as f64).exp() };
    let mut out: Vec<Bin> = (0..bins)
        .map(|b| Bin {
            low: if b == 0 { lo } else { edge(b) },
            high: edge(b + 1),
            count: 0,
        })
        .collect();
    for v in positive {
        let b = (((v.ln() - llo) / step) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

/// Writes the histogram of nonzero effective interactions to `path`
/// (`bin_low,bin_high,count`) and the raw values to `<stem>_values.csv`
/// next to it.
pub fn export_distribution(w: &EffectiveInteraction, path: &Path, bins: usize) -> Result<Vec<Bin>> {
    let values = w.nonzero_values();
    let hist = log_histogram(&values, bins);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = String::from("bin_low,bin_high,count\n");
    for b in &hist {
        let _ = writeln!(s, "{},{},{}", b.low, b.high, b.count);
    }
    std::fs::write(path, s)?;

    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("distribution");
    let mut s = String::from("target,source,entry,value\n");
    for ((i, j), row) in w.rows() {
        for (l, v) in row.iter().enumerate().filter(|(_, v)| **v > 0.0) {
            let _ = writeln!(s, "{i},{j},{l},{v}");
        }
    }
    std::fs::write(path.with_file_name(format!("{stem}_values.csv")), s)?;
    Ok(hist)
}

/// Everything `analyze` reports for one run, tagged with the run's
/// configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub config: InferenceConfig,
    /// Statistics average all kernel entries of pairs where both topics
    /// hold events.
    pub pair_universe: String,
    pub clusters: ClusterReport,
    pub strength: StrengthReport,
    pub range: Vec<f64>,
}

pub fn analyze(result: &InferenceResult, top_k: usize) -> Result<(Analysis, EffectiveInteraction)> {
    let history = result.history();
    let kernel = &result.config.kernel.kernel;
    let w = effective_interaction(&result.alpha, &history, kernel, result.config.lambda0)?;
    let analysis = Analysis {
        config: result.config.clone(),
        pair_universe: "all (target, source, entry) triples over topics with at least one event".into(),
        clusters: cluster_report(result, top_k),
        strength: strength_report(&result.alpha, &w)?,
        range: interaction_range(&w),
    };
    Ok((analysis, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::preset;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Every ordered event pair, every entry, no windowing.
    fn brute_force(alpha: &AlphaTensor, h: &EventHistory, k: &RbfKernel, lambda0: f64) -> Vec<f64> {
        let (kk, l) = (alpha.num_topics(), k.len());
        let mut out = vec![0.0; kk * kk * l];
        for i in 0..kk {
            let ti_all = h.times(i);
            if ti_all.is_empty() {
                continue;
            }
            for j in 0..kk {
                for e in 0..l {
                    let a = alpha.value(i, j, e);
                    let mut acc = 0.0;
                    for &ti in ti_all {
                        for &tj in h.times(j) {
                            if tj < ti {
                                acc += (a * k.entry(e, ti - tj) - lambda0).max(0.0);
                            }
                        }
                    }
                    out[(i * kk + j) * l + e] = acc / ti_all.len() as f64;
                }
            }
        }
        out
    }

    fn random_instance(rng: &mut ChaCha8Rng, l: usize) -> (AlphaTensor, EventHistory) {
        let k = rng.random_range(1..5);
        let n = rng.random_range(0..120);
        let mut times = vec![Vec::new(); k];
        for _ in 0..n {
            times[rng.random_range(0..k)].push(rng.random_range(0.0..600.0));
        }
        times.iter_mut().for_each(|t| t.sort_by(f64::total_cmp));
        let mut alpha = AlphaTensor::zeros(k, l);
        for i in 0..k {
            for j in 0..k {
                if rng.random_bool(0.6) {
                    alpha.set(i, j, (0..l).map(|_| rng.random::<f64>()).collect()).unwrap();
                }
            }
        }
        (alpha, EventHistory::new(times).unwrap())
    }

    #[test]
    fn matches_brute_force() {
        let (kernel, l0) = preset("minute").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let (alpha, h) = random_instance(&mut rng, kernel.len());
            let w = effective_interaction(&alpha, &h, &kernel, l0).unwrap();
            let want = brute_force(&alpha, &h, &kernel, l0);
            let kk = alpha.num_topics();
            for i in 0..kk {
                for j in 0..kk {
                    for e in 0..kernel.len() {
                        let got = w.value(i, j, e);
                        assert!((got - want[(i * kk + j) * kernel.len() + e]).abs() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn single_pair_at_kernel_mean() {
        let (kernel, _) = preset("minute").unwrap();
        let h = EventHistory::new(vec![vec![100.0], vec![80.0]]).unwrap();
        let mut alpha = AlphaTensor::zeros(2, kernel.len());
        alpha.set(0, 1, vec![1.0; kernel.len()]).unwrap();
        let w = effective_interaction(&alpha, &h, &kernel, 0.01).unwrap();
        // lag 20 is the mean of entry 2: peak 1/(5√(2π)) = 0.0797885
        assert!((w.value(0, 1, 2) - 0.069_788_456_080_286_5).abs() < 1e-12);
        assert_eq!(w.value(1, 0, 2), 0.0);
    }

    #[test]
    fn zero_alpha_gives_zero_w() {
        let (kernel, l0) = preset("minute").unwrap();
        let h = EventHistory::new(vec![vec![0.0, 10.0, 20.0], vec![5.0]]).unwrap();
        let w = effective_interaction(&AlphaTensor::zeros(2, kernel.len()), &h, &kernel, l0).unwrap();
        assert!(w.is_zero());
        assert_eq!(interaction_range(&w), vec![0.0; kernel.len()]);
        let s = strength_report(&AlphaTensor::zeros(2, kernel.len()), &w).unwrap();
        assert_eq!(s.mean_w.unwrap().mean, 0.0);
        assert!(s.mean_a_weighted.is_none());
        assert!(s.intra_extra_ratio.is_none());
    }

    #[test]
    fn clamp_removes_weak_excitation() {
        let (kernel, _) = preset("minute").unwrap();
        let h = EventHistory::new(vec![vec![0.0, 10.0, 20.0, 30.0]]).unwrap();
        let mut alpha = AlphaTensor::zeros(1, kernel.len());
        alpha.set(0, 0, vec![0.1; kernel.len()]).unwrap();
        // 0.1 · 0.0798 < 0.01
        assert!(effective_interaction(&alpha, &h, &kernel, 0.01).unwrap().is_zero());
    }

    /// Hand-built 2×2×1 instance.
    fn two_by_two() -> (AlphaTensor, EffectiveInteraction) {
        let mut alpha = AlphaTensor::zeros(2, 1);
        alpha.set(0, 0, vec![0.8]).unwrap();
        alpha.set(0, 1, vec![0.2]).unwrap();
        alpha.set(1, 0, vec![0.4]).unwrap();
        alpha.set(1, 1, vec![0.6]).unwrap();
        let w = EffectiveInteraction {
            num_entries: 1,
            active: vec![true, true],
            rows: BTreeMap::from([
                ((0, 0), vec![0.4]),
                ((0, 1), vec![0.1]),
                ((1, 0), vec![0.3]),
                ((1, 1), vec![0.2]),
            ]),
        };
        (alpha, w)
    }

    #[test]
    fn strength_of_hand_built_tensor() {
        let (alpha, w) = two_by_two();
        let s = strength_report(&alpha, &w).unwrap();
        let a = s.mean_a.unwrap();
        assert!((a.mean - 0.5).abs() < 1e-15);
        // population std of (0.8, 0.2, 0.4, 0.6)
        assert!((a.std - 0.05f64.sqrt()).abs() < 1e-12);
        assert!((s.mean_w.unwrap().mean - 0.25).abs() < 1e-15);
        // (0.32 + 0.02 + 0.12 + 0.12) / 1.0
        assert!((s.mean_a_weighted.unwrap().mean - 0.58).abs() < 1e-12);
        let intra = s.mean_w_intra.unwrap();
        let extra = s.mean_w_extra.unwrap();
        assert!((intra.mean - 0.3).abs() < 1e-15 && (extra.mean - 0.2).abs() < 1e-15);
        assert!((intra.std - 0.1).abs() < 1e-12 && (extra.std - 0.1).abs() < 1e-12);
        let ratio = s.intra_extra_ratio.unwrap();
        assert!((ratio.mean - 1.5).abs() < 1e-12);
        // 1.5 · sqrt((0.01/2)/0.09 + (0.01/2)/0.04)
        let want = 1.5 * (0.005f64 / 0.09 + 0.005 / 0.04).sqrt();
        assert!((ratio.std - want).abs() < 1e-12);
    }

    #[test]
    fn diagonal_only_w_has_no_ratio() {
        let (alpha, mut w) = two_by_two();
        w.rows.retain(|(i, j), _| i == j);
        assert!(strength_report(&alpha, &w).unwrap().intra_extra_ratio.is_none());
    }

    #[test]
    fn range_picks_out_single_entry() {
        let w = EffectiveInteraction {
            num_entries: 4,
            active: vec![true, true],
            rows: BTreeMap::from([((0, 1), vec![0.0, 0.0, 0.8, 0.0])]),
        };
        assert_eq!(interaction_range(&w), vec![0.0, 0.0, 0.2, 0.0]);
    }

    #[test]
    fn entropy_examples() {
        assert!((normalized_entropy(&[5, 5, 5]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(normalized_entropy(&[0, 7, 0]).unwrap(), 0.0);
        let want = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln()) / 2f64.ln();
        assert!((normalized_entropy(&[3, 1]).unwrap() - want).abs() < 1e-15);
        assert!((want - 0.8113).abs() < 1e-4);
        assert!(matches!(normalized_entropy(&[0, 0]), Err(Error::Undefined(_))));
    }

    #[test]
    fn histogram_examples() {
        assert!(log_histogram(&[0.0; 5], 10).is_empty());
        let same = log_histogram(&[0.3; 100], 10);
        assert_eq!(same.len(), 1);
        assert_eq!(same[0].count, 100);
    }

    proptest! {
        #[test]
        fn histogram_conserves_count(values in prop::collection::vec(0.0f64..10.0, 0..200), bins in 1usize..30) {
            let hist = log_histogram(&values, bins);
            let positive = values.iter().filter(|&&v| v > 0.0).count();
            prop_assert_eq!(hist.iter().map(|b| b.count).sum::<usize>(), positive);
        }

        #[test]
        fn entropy_is_bounded_and_symmetric(
            counts in prop::collection::vec(0u64..50, 1..12),
            scale in 1u64..5,
            rot in 0usize..12,
        ) {
            prop_assume!(counts.iter().sum::<u64>() > 0);
            let h = normalized_entropy(&counts).unwrap();
            prop_assert!((0.0..=1.0).contains(&h));
            let mut permuted = counts.clone();
            let len = permuted.len();
            permuted.rotate_left(rot % len);
            prop_assert!((normalized_entropy(&permuted).unwrap() - h).abs() < 1e-12);
            let scaled: Vec<u64> = counts.iter().map(|c| c * scale).collect();
            prop_assert!((normalized_entropy(&scaled).unwrap() - h).abs() < 1e-12);
        }

        #[test]
        fn w_is_monotone_in_alpha(seed in any::<u64>(), bump in 0.0f64..0.5) {
            let (kernel, l0) = preset("minute").unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (alpha, h) = random_instance(&mut rng, kernel.len());
            let mut bigger = AlphaTensor::zeros(alpha.num_topics(), kernel.len());
            for ((i, j), row) in alpha.pairs() {
                bigger.set(i, j, row.iter().map(|v| (v + bump).min(1.0)).collect()).unwrap();
            }
            let w0 = effective_interaction(&alpha, &h, &kernel, l0).unwrap();
            let w1 = effective_interaction(&bigger, &h, &kernel, l0).unwrap();
            for ((i, j), row) in w0.rows() {
                for (e, v) in row.iter().enumerate() {
                    prop_assert!(*v >= 0.0);
                    prop_assert!(w1.value(i, j, e) >= *v - 1e-15);
                }
            }
        }

        #[test]
        fn weighted_mean_is_within_alpha_range(seed in any::<u64>()) {
            let (kernel, l0) = preset("minute").unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (alpha, h) = random_instance(&mut rng, kernel.len());
            let w = effective_interaction(&alpha, &h, &kernel, l0).unwrap();
            if let Some(m) = strength_report(&alpha, &w).unwrap().mean_a_weighted {
                let vals: Vec<f64> = alpha.pairs().flat_map(|(_, r)| r.to_vec()).collect();
                let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(m.mean >= lo - 1e-12 && m.mean <= hi + 1e-12);
            }
        }
    }
}
