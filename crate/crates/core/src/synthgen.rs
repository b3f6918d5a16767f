//! Ground-truth stream generator: multivariate Hawkes event times with
//! known excitation, and bag-of-words documents drawn from known topics.
//!
//! Scenarios are described in TOML:
//!
//! ```toml
//! name = "five-topics"
//! horizon = 20000.0          # minutes
//! kernel = "minute"          # preset name or kernel file
//! topics = 5
//! words_per_topic = 50
//! background_rate = 0.05     # immigrants per minute per topic
//! channels = 5
//!
//! [doc_length]
//! law = "uniform"
//! min = 3
//! max = 8
//!
//! [excitation]
//! self = [0, 0, 0.8, 0, 0, 0, 0, 0, 0]
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::{Exp, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, DocumentStream, Vocabulary};
use crate::error::{Error, Result};
use crate::temporal::{AlphaTensor, KernelSpec, RbfKernel};

/// Distribution of the number of tokens per document.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LengthLaw {
    Constant { n: u32 },
    /// Uniform over `min..=max`.
    Uniform { min: u32, max: u32 },
    /// `min` plus a Poisson count with mean `mean - min`.
    ShiftedPoisson { min: u32, mean: f64 },
}

impl Default for LengthLaw {
    fn default() -> Self {
        LengthLaw::Uniform { min: 3, max: 8 }
    }
}

impl LengthLaw {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LengthLaw::Constant { n } => n >= 3,
            LengthLaw::Uniform { min, max } => min >= 3 && max >= min,
            LengthLaw::ShiftedPoisson { min, mean } => min >= 3 && mean > f64::from(min),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("document length law {self:?} must keep at least 3 tokens")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match *self {
            LengthLaw::Constant { n } => n,
            LengthLaw::Uniform { min, max } => rng.random_range(min..=max),
            LengthLaw::ShiftedPoisson { min, mean } => {
                let extra: f64 = Poisson::new(mean - f64::from(min))
                    .expect("validated mean")
                    .sample(rng);
                min + extra as u32
            }
        }
    }
}

/// One ground-truth topic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicSpec {
    /// Vocabulary indices the topic emits.
    pub words: Vec<usize>,
    /// Emission probabilities, aligned with `words`.
    pub word_probs: Vec<f64>,
    /// Immigrant intensity in events per minute.
    pub background_rate: f64,
    /// Probability of each channel, indexed by channel.
    pub channel_probs: Vec<f64>,
}

/// A fully specified generating process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub kernel: RbfKernel,
    pub alpha: AlphaTensor,
    pub topics: Vec<TopicSpec>,
    pub doc_length: LengthLaw,
    /// Simulated window `[0, horizon]` in minutes.
    pub horizon: f64,
    pub vocabulary: Vocabulary,
    pub channels: Vec<String>,
}

impl GroundTruth {
    /// Checks shapes and branching stability.
    pub fn validate(&self) -> Result<()> {
        let k = self.topics.len();
        if self.alpha.num_topics() != k || self.alpha.num_entries() != self.kernel.len() {
            return Err(Error::Config(format!(
                "excitation tensor is {}x{}x{} but there are {k} topics and {} kernel entries",
                self.alpha.num_topics(),
                self.alpha.num_topics(),
                self.alpha.num_entries(),
                self.kernel.len()
            )));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::Config("horizon must be a nonnegative number of minutes".into()));
        }
        self.doc_length.validate()?;
        for (c, t) in self.topics.iter().enumerate() {
            if !(t.background_rate >= 0.0 && t.background_rate.is_finite()) {
                return Err(Error::Config(format!("topic {c}: background rate must be >= 0")));
            }
            if t.words.is_empty() || t.words.len() != t.word_probs.len() {
                return Err(Error::Config(format!("topic {c}: needs words with matching probabilities")));
            }
            if t.words.iter().any(|&w| w >= self.vocabulary.len()) {
                return Err(Error::Config(format!("topic {c}: word index outside the vocabulary")));
            }
            if t.channel_probs.len() != self.channels.len() {
                return Err(Error::Config(format!("topic {c}: one channel probability per channel")));
            }
        }
        let rho = self.spectral_radius();
        if rho >= 1.0 {
            return Err(Error::Unstable(rho));
        }
        Ok(())
    }

    /// Mean number of direct offspring of one event of each source topic
    /// in each target topic: `B[c][c'] = Σ_l α_{c,c',l} ∫_0^∞ κ_l`.
    pub fn branching_matrix(&self) -> DMatrix<f64> {
        let k = self.topics.len();
        let mass: Vec<f64> = (0..self.kernel.len()).map(|l| self.kernel.positive_mass(l)).collect();
        let mut b = DMatrix::zeros(k, k);
        for ((c, s), row) in self.alpha.pairs() {
            b[(c, s)] = row.iter().zip(&mass).map(|(a, m)| a * m).sum();
        }
        b
    }

    pub fn spectral_radius(&self) -> f64 {
        let b = self.branching_matrix();
        if b.is_empty() {
            return 0.0;
        }
        b.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Expected number of events per topic on an unbounded window, per
    /// minute: `(I − B)⁻¹ μ`.
    pub fn stationary_rates(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let k = self.topics.len();
        let mu = nalgebra::DVector::from_iterator(k, self.topics.iter().map(|t| t.background_rate));
        let m = DMatrix::identity(k, k) - self.branching_matrix();
        let x = m.lu().solve(&mu).ok_or(Error::Unstable(1.0))?;
        Ok(x.iter().copied().collect())
    }
}

/// A generated event: time in minutes and true topic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub topic: usize,
}

/// Samples the multivariate Hawkes process on `[0, horizon]` by thinning.
///
/// The bound on the total intensity after time `t` uses each kernel
/// entry's supremum over later lags (its peak before the mean, its value
/// after); it is recomputed at every candidate.
pub fn simulate_events<R: Rng + ?Sized>(truth: &GroundTruth, rng: &mut R) -> Result<Vec<Event>> {
    truth.validate()?;
    let k = truth.topics.len();
    let kernel = &truth.kernel;
    let l = kernel.len();
    let horizon = kernel.truncation_horizon();
    let mu_total: f64 = truth.topics.iter().map(|t| t.background_rate).sum();
    // column sums: total excitation a source event sends through each entry
    let mut outgoing = vec![vec![0.0; l]; k];
    for ((_, s), row) in truth.alpha.pairs() {
        outgoing[s].iter_mut().zip(row).for_each(|(o, a)| *o += a);
    }

    let mut events: Vec<Event> = Vec::new();
    let mut recent_start = 0;
    let mut t = 0.0;
    loop {
        while recent_start < events.len() && t - events[recent_start].time > horizon {
            recent_start += 1;
        }
        let recent = &events[recent_start..];
        let mut bound = mu_total;
        for e in recent {
            for (li, a) in outgoing[e.topic].iter().enumerate() {
                bound += a * kernel.tail_sup(li, t - e.time);
            }
        }
        if bound <= 0.0 {
            break;
        }
        t += Exp::new(bound).expect("positive rate").sample(rng);
        if t > truth.horizon {
            break;
        }
        let per_topic = topic_intensities(truth, recent, t);
        let total: f64 = per_topic.iter().sum();
        let u: f64 = rng.random::<f64>() * bound;
        if u < total {
            // reuse the acceptance draw to pick the topic
            let mut acc = 0.0;
            let mut topic = k - 1;
            for (c, &v) in per_topic.iter().enumerate() {
                acc += v;
                if u < acc {
                    topic = c;
                    break;
                }
            }
            events.push(Event { time: t, topic });
        }
    }
    Ok(events)
}

fn topic_intensities(truth: &GroundTruth, recent: &[Event], t: f64) -> Vec<f64> {
    let mut out: Vec<f64> = truth.topics.iter().map(|tp| tp.background_rate).collect();
    let mut feat = vec![0.0; truth.kernel.len()];
    for e in recent {
        if e.time >= t {
            continue;
        }
        truth.kernel.eval_into(t - e.time, &mut feat);
        for (c, o) in out.iter_mut().enumerate() {
            if let Some(a) = truth.alpha.get(c, e.topic) {
                *o += a.iter().zip(&feat).map(|(x, y)| x * y).sum::<f64>();
            }
        }
    }
    out
}

/// A generated document stream with its true topic per document.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticStream {
    pub stream: DocumentStream,
    pub labels: Vec<usize>,
}

/// Draws one document per event from the event's topic.
pub fn emit_documents<R: Rng + ?Sized>(events: &[Event], truth: &GroundTruth, rng: &mut R) -> Result<SyntheticStream> {
    truth.validate()?;
    let samplers = truth
        .topics
        .iter()
        .map(|t| {
            let words = WeightedIndex::new(&t.word_probs).map_err(|e| Error::Config(format!("word probabilities: {e}")))?;
            let channels = WeightedIndex::new(&t.channel_probs)
                .map_err(|e| Error::Config(format!("channel probabilities: {e}")))?;
            Ok((words, channels))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut documents = Vec::with_capacity(events.len());
    let mut labels = Vec::with_capacity(events.len());
    let mut tokens = Vec::new();
    for (id, e) in events.iter().enumerate() {
        let topic = &truth.topics[e.topic];
        let (words, channels) = &samplers[e.topic];
        tokens.clear();
        for _ in 0..truth.doc_length.sample(rng) {
            tokens.push(topic.words[words.sample(rng)]);
        }
        let channel = channels.sample(rng);
        documents.push(Document::from_tokens(id, e.time, channel, 0, &tokens));
        labels.push(e.topic);
    }
    Ok(SyntheticStream {
        stream: DocumentStream {
            vocabulary: truth.vocabulary.clone(),
            channels: truth.channels.clone(),
            documents,
        },
        labels,
    })
}

/// Simulates events and emits their documents.
pub fn generate<R: Rng + ?Sized>(truth: &GroundTruth, rng: &mut R) -> Result<SyntheticStream> {
    let events = simulate_events(truth, rng)?;
    emit_documents(&events, truth, rng)
}

/// Writes a `doc_id,label` CSV.
pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut s = String::from("doc_id,label\n");
    for (i, l) in labels.iter().enumerate() {
        let _ = writeln!(s, "{i},{l}");
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Excitation given per pair type; `pairs` entries override the blanket
/// settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcitationSpec {
    /// Applied to every `(c, c)` pair.
    #[serde(default, rename = "self")]
    pub self_excitation: Option<Vec<f64>>,
    /// Applied to every `(c, c')` pair with `c ≠ c'`.
    #[serde(default)]
    pub cross: Option<Vec<f64>>,
    #[serde(default)]
    pub pairs: Vec<PairSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub target: usize,
    pub source: usize,
    pub values: Vec<f64>,
}

/// Compact scenario description; see the module docs for the file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub horizon: f64,
    #[serde(default = "default_kernel")]
    pub kernel: String,
    pub topics: usize,
    pub words_per_topic: usize,
    /// Words emitted by every topic, on top of its own.
    #[serde(default)]
    pub shared_words: usize,
    /// Probability mass of the shared words in every topic.
    #[serde(default)]
    pub shared_weight: f64,
    /// Zipf exponent of word frequencies within a topic (0: uniform).
    #[serde(default)]
    pub zipf_exponent: f64,
    pub background_rate: f64,
    #[serde(default = "default_channels")]
    pub channels: usize,
    /// Probability that a document lands in its topic's home channel
    /// (`topic mod channels`); the rest spreads uniformly.
    #[serde(default = "default_fidelity")]
    pub channel_fidelity: f64,
    #[serde(default)]
    pub doc_length: Option<LengthLaw>,
    #[serde(default)]
    pub excitation: ExcitationSpec,
}

fn default_kernel() -> String {
    "minute".into()
}

fn default_channels() -> usize {
    1
}

fn default_fidelity() -> f64 {
    1.0
}

/// Word names are letters only, so they survive tokenization.
fn word_name(topic: Option<usize>, i: usize) -> String {
    fn letters(mut n: usize, width: usize) -> String {
        let mut s = vec![b'a'; width];
        for slot in s.iter_mut().rev() {
            *slot = b'a' + (n % 26) as u8;
            n /= 26;
        }
        String::from_utf8(s).expect("ascii")
    }
    match topic {
        Some(c) => format!("t{}w{}", letters(c, 2), letters(i, 3)),
        None => format!("common{}", letters(i, 3)),
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a scenario file; a relative kernel path is taken relative to
    /// the file.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut s = Self::from_toml(&std::fs::read_to_string(path)?).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if s.kernel.parse::<crate::temporal::KernelPreset>().is_err() {
            let k = PathBuf::from(&s.kernel);
            if k.is_relative() {
                if let Some(dir) = path.parent() {
                    s.kernel = dir.join(k).to_string_lossy().into_owned();
                }
            }
        }
        Ok(s)
    }

    /// The shipped validation scenario: 5 topics with disjoint 50-word
    /// vocabularies, self-excitation 0.8 through kernel entry 2 of the
    /// Minute kernel, 0.05 immigrants per minute per topic, 20 000 minutes.
    pub fn five_topics() -> Self {
        Self::from_toml(include_str!("../configs/five_topics.toml")).expect("shipped scenario parses")
    }

    pub fn build(&self) -> Result<GroundTruth> {
        let spec = KernelSpec::resolve(&self.kernel)?;
        let kernel = spec.kernel;
        let k = self.topics;
        let l = kernel.len();
        if k == 0 || self.words_per_topic == 0 || self.channels == 0 {
            return Err(Error::Config("topics, words_per_topic and channels must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.shared_weight) || (self.shared_words == 0 && self.shared_weight > 0.0) {
            return Err(Error::Config("shared_weight must be in [0, 1) and needs shared_words".into()));
        }
        if !(0.0..=1.0).contains(&self.channel_fidelity) {
            return Err(Error::Config("channel_fidelity must be in [0, 1]".into()));
        }

        let mut words: Vec<String> = (0..self.shared_words).map(|i| word_name(None, i)).collect();
        let shared: Vec<usize> = (0..self.shared_words).collect();
        let zipf: Vec<f64> = (1..=self.words_per_topic)
            .map(|r| (r as f64).powf(-self.zipf_exponent))
            .collect();
        let zsum: f64 = zipf.iter().sum();
        let mut topics = Vec::with_capacity(k);
        for c in 0..k {
            let start = words.len();
            words.extend((0..self.words_per_topic).map(|i| word_name(Some(c), i)));
            let mut ids: Vec<usize> = (start..words.len()).collect();
            let own_weight = if self.shared_words > 0 { 1.0 - self.shared_weight } else { 1.0 };
            let mut probs: Vec<f64> = zipf.iter().map(|z| own_weight * z / zsum).collect();
            ids.extend(&shared);
            probs.extend(std::iter::repeat_n(self.shared_weight / self.shared_words.max(1) as f64, self.shared_words));
            let home = c % self.channels;
            let channel_probs = (0..self.channels)
                .map(|ch| {
                    if self.channels == 1 {
                        1.0
                    } else if ch == home {
                        self.channel_fidelity
                    } else {
                        (1.0 - self.channel_fidelity) / (self.channels - 1) as f64
                    }
                })
                .collect();
            topics.push(TopicSpec {
                words: ids,
                word_probs: probs,
                background_rate: self.background_rate,
                channel_probs,
            });
        }

        let mut alpha = AlphaTensor::zeros(k, l);
        for c in 0..k {
            for s in 0..k {
                let blanket = if c == s { &self.excitation.self_excitation } else { &self.excitation.cross };
                if let Some(v) = blanket {
                    alpha.set(c, s, v.clone())?;
                }
            }
        }
        for p in &self.excitation.pairs {
            if p.target >= k || p.source >= k {
                return Err(Error::Config(format!("excitation pair ({}, {}) outside {k} topics", p.target, p.source)));
            }
            alpha.set(p.target, p.source, p.values.clone())?;
        }

        let truth = GroundTruth {
            kernel,
            alpha,
            topics,
            doc_length: self.doc_length.unwrap_or_default(),
            horizon: self.horizon,
            vocabulary: words.into(),
            channels: (0..self.channels).map(|i| format!("channel{i}")).collect(),
        };
        truth.validate()?;
        Ok(truth)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::temporal::preset;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_topic(alpha: Vec<f64>, rate: f64, horizon: f64) -> GroundTruth {
        let (kernel, _) = preset("minute").unwrap();
        let mut a = AlphaTensor::zeros(1, kernel.len());
        a.set(0, 0, alpha).unwrap();
        GroundTruth {
            kernel,
            alpha: a,
            topics: vec![TopicSpec {
                words: vec![0, 1, 2],
                word_probs: vec![0.5, 0.3, 0.2],
                background_rate: rate,
                channel_probs: vec![1.0],
            }],
            doc_length: LengthLaw::Constant { n: 3 },
            horizon,
            vocabulary: vec!["aaaa".to_string(), "bbbb".into(), "cccc".into()].into(),
            channels: vec!["only".into()],
        }
    }

    #[test]
    fn shipped_scenario_builds() {
        let s = Scenario::five_topics();
        let truth = s.build().unwrap();
        assert_eq!(truth.topics.len(), 5);
        assert_eq!(truth.vocabulary.len(), 250);
        assert_eq!(truth.alpha.value(3, 3, 2), 0.8);
        assert_eq!(truth.alpha.value(3, 2, 2), 0.0);
        // self branching 0.8 through an entry with (almost) all mass at lags > 0
        assert!((truth.spectral_radius() - 0.8 * truth.kernel.positive_mass(2)).abs() < 1e-12);
    }

    #[test]
    fn unstable_truth_is_refused() {
        let truth = single_topic(vec![0.2; 9], 0.01, 100.0);
        assert!(matches!(simulate_events(&truth, &mut ChaCha8Rng::seed_from_u64(0)), Err(Error::Unstable(_))));
    }

    #[test]
    fn zero_horizon_is_empty() {
        let truth = single_topic(vec![0.0; 9], 0.05, 0.0);
        assert!(simulate_events(&truth, &mut ChaCha8Rng::seed_from_u64(0)).unwrap().is_empty());
    }

    #[test]
    fn poisson_immigrants_without_excitation() {
        let truth = single_topic(vec![0.0; 9], 0.05, 20_000.0);
        let n = simulate_events(&truth, &mut ChaCha8Rng::seed_from_u64(4)).unwrap().len() as f64;
        let mean = 0.05 * 20_000.0;
        assert!((n - mean).abs() < 4.0 * mean.sqrt(), "{n}");
    }

    #[test]
    fn stream_is_sorted_and_long_enough() {
        let truth = Scenario::five_topics().build().unwrap();
        let mut short = truth.clone();
        short.horizon = 2000.0;
        let s = generate(&short, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let docs = &s.stream.documents;
        assert!(docs.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(docs.iter().all(|d| d.token_total() >= 3 && d.time <= 2000.0));
        assert_eq!(s.labels.len(), docs.len());
        // disjoint vocabularies: words identify the topic
        for (d, &lab) in docs.iter().zip(&s.labels) {
            for &(w, _) in &d.words {
                assert!(short.topics[lab].words.contains(&w));
            }
        }
    }

    #[test]
    fn constant_length_law() {
        let truth = single_topic(vec![0.0; 9], 0.1, 500.0);
        let s = generate(&truth, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert!(s.stream.documents.iter().all(|d| d.token_total() == 3));
    }

    #[test]
    fn word_frequencies_pass_chi_square() {
        let truth = single_topic(vec![0.0; 9], 1.0, 3000.0);
        let s = generate(&truth, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let mut counts = [0.0f64; 3];
        for d in &s.stream.documents {
            for &(w, n) in &d.words {
                counts[w] += f64::from(n);
            }
        }
        let total: f64 = counts.iter().sum();
        let chi2: f64 = counts
            .iter()
            .zip([0.5, 0.3, 0.2])
            .map(|(o, p)| (o - p * total).powi(2) / (p * total))
            .sum();
        // 0.99 quantile of chi-square with 2 degrees of freedom
        assert!(chi2 < 9.2103, "chi2 = {chi2}");
    }

    #[test]
    fn same_seed_same_stream() {
        let mut truth = Scenario::five_topics().build().unwrap();
        truth.horizon = 1000.0;
        let a = generate(&truth, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = generate(&truth, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn word_names_are_alphabetic() {
        for w in [word_name(Some(3), 49), word_name(None, 7)] {
            assert!(w.chars().all(|c| c.is_ascii_lowercase()) && w.len() >= 4, "{w}");
        }
    }
}
