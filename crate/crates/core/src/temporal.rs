//! Gaussian RBF temporal kernels and multivariate Hawkes intensities.
//!
//! All times and lags are in minutes. The intensity of topic `c` at time `t`
//! is
//!
//! ```text
//! λ_c(t) = Σ_{c'} Σ_{t_j ∈ H_{c'}, t_j < t} α_{c,c'} · κ(t − t_j)
//! ```
//!
//! where `κ` is a vector of `L` Gaussian densities with fixed means and
//! deviations. The first entry is centred on zero lag and only its
//! positive half is ever evaluated.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{contract, Error, Result};

/// Number of deviations past the last kernel mean beyond which a Gaussian
/// entry is below 1e-15 of its peak and events are skipped.
const TRUNCATION_SIGMAS: f64 = 8.5;

/// Vector of `L` Gaussian basis functions of the time lag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RbfKernel {
    means: Vec<f64>,
    sigmas: Vec<f64>,
    #[serde(skip)]
    norms: Vec<f64>,
}

impl<'de> Deserialize<'de> for RbfKernel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            means: Vec<f64>,
            sigmas: Vec<f64>,
        }
        let raw = Raw::deserialize(d)?;
        RbfKernel::new(raw.means, raw.sigmas).map_err(serde::de::Error::custom)
    }
}

impl RbfKernel {
    pub fn new(means: Vec<f64>, sigmas: Vec<f64>) -> Result<Self> {
        if means.is_empty() || means.len() != sigmas.len() {
            return Err(Error::Config(format!(
                "kernel needs matching non-empty means/sigmas, got {} and {}",
                means.len(),
                sigmas.len()
            )));
        }
        if sigmas.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config("kernel deviations must be positive".into()));
        }
        if means.iter().any(|m| !m.is_finite()) || means.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("kernel means must be strictly increasing".into()));
        }
        let norms = sigmas.iter().map(|s| 1.0 / (2.0 * PI * s * s).sqrt()).collect();
        Ok(Self {
            means,
            sigmas,
            norms,
        })
    }

    /// Kernel with a shared deviation.
    pub fn with_shared_sigma(means: Vec<f64>, sigma: f64) -> Result<Self> {
        let sigmas = vec![sigma; means.len()];
        Self::new(means, sigmas)
    }

    /// Number of entries `L`.
    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// A topic with no event inside this window is considered extinct. It
    /// equals the truncation horizon, so a topic stays open for exactly as
    /// long as its past events can still excite it.
    pub fn activity_horizon(&self) -> f64 {
        self.truncation_horizon()
    }

    /// Lag beyond which every entry is numerically zero (relative 1e-15).
    pub fn truncation_horizon(&self) -> f64 {
        self.means
            .iter()
            .zip(&self.sigmas)
            .map(|(m, s)| m + TRUNCATION_SIGMAS * s)
            .fold(0.0, f64::max)
    }

    /// Evaluates `κ(Δt)`; `Δt` must be nonnegative.
    pub fn eval(&self, dt: f64) -> Result<Vec<f64>> {
        if !(dt >= 0.0) {
            return Err(contract(format!("kernel lag must be >= 0, got {dt}")));
        }
        let mut out = vec![0.0; self.len()];
        self.eval_into(dt, &mut out);
        Ok(out)
    }

    /// Writes `κ(Δt)` into `out` (length `L`) without checking the lag.
    #[inline]
    pub fn eval_into(&self, dt: f64, out: &mut [f64]) {
        for (l, o) in out.iter_mut().enumerate() {
            *o = self.entry(l, dt);
        }
    }

    /// Adds `κ(Δt)` into `acc`.
    #[inline]
    pub fn accumulate(&self, dt: f64, acc: &mut [f64]) {
        for (l, a) in acc.iter_mut().enumerate() {
            *a += self.entry(l, dt);
        }
    }

    #[inline]
    pub fn entry(&self, l: usize, dt: f64) -> f64 {
        let z = (dt - self.means[l]) / self.sigmas[l];
        self.norms[l] * (-0.5 * z * z).exp()
    }

    /// Peak value of entry `l`.
    pub fn peak(&self, l: usize) -> f64 {
        self.norms[l]
    }

    /// Supremum of entry `l` over lags `>= dt`: the peak before the mean,
    /// the (monotone) tail value after it.
    #[inline]
    pub fn tail_sup(&self, l: usize, dt: f64) -> f64 {
        if dt <= self.means[l] {
            self.norms[l]
        } else {
            self.entry(l, dt)
        }
    }

    /// `∫_a^b κ_l(u) du` for `0 <= a <= b`.
    pub fn integral(&self, l: usize, a: f64, b: f64) -> f64 {
        let (m, s) = (self.means[l], self.sigmas[l]);
        // Difference of upper tails stays accurate when both bounds sit far
        // past the mean.
        let upper = |x: f64| 0.5 * erfc((x - m) / (s * SQRT_2));
        (upper(a) - upper(b)).max(0.0)
    }

    /// Mass of entry `l` on nonnegative lags.
    pub fn positive_mass(&self, l: usize) -> f64 {
        self.integral(l, 0.0, f64::INFINITY)
    }
}

/// A kernel together with its new-topic concentration `λ₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub name: String,
    pub kernel: RbfKernel,
    pub lambda0: f64,
}

impl KernelSpec {
    pub fn preset(preset: KernelPreset) -> Self {
        let (kernel, lambda0) = preset_kernel(preset);
        Self {
            name: preset.to_string(),
            kernel,
            lambda0,
        }
    }

    /// Reads a custom kernel from a TOML file:
    ///
    /// ```toml
    /// means = [0, 15, 30]
    /// sigmas = [5, 5, 5]   # or: sigma = 5
    /// lambda0 = 0.01
    /// ```
    pub fn from_file(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            means: Vec<f64>,
            sigmas: Option<Vec<f64>>,
            sigma: Option<f64>,
            lambda0: f64,
        }
        let text = std::fs::read_to_string(path)?;
        let fmt_err = |message: String| Error::Format {
            path: path.to_owned(),
            message,
        };
        let raw: Raw = toml::from_str(&text).map_err(|e| fmt_err(e.to_string()))?;
        let sigmas = match (raw.sigmas, raw.sigma) {
            (Some(v), None) => v,
            (None, Some(s)) => vec![s; raw.means.len()],
            _ => return Err(fmt_err("give exactly one of `sigmas` or `sigma`".into())),
        };
        if !(raw.lambda0 > 0.0) {
            return Err(fmt_err("lambda0 must be positive".into()));
        }
        Ok(Self {
            name: path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "custom".into()),
            kernel: RbfKernel::new(raw.means, sigmas)?,
            lambda0: raw.lambda0,
        })
    }

    /// Accepts a preset name or a path to a kernel file.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        match name_or_path.parse::<KernelPreset>() {
            Ok(p) => Ok(Self::preset(p)),
            Err(e) => {
                let path = Path::new(name_or_path);
                if path.exists() {
                    Self::from_file(path)
                } else {
                    Err(e)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelPreset {
    Minute,
    Hour,
    Day,
}

impl KernelPreset {
    pub const ALL: [KernelPreset; 3] = [KernelPreset::Minute, KernelPreset::Hour, KernelPreset::Day];
}

impl fmt::Display for KernelPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KernelPreset::Minute => "minute",
            KernelPreset::Hour => "hour",
            KernelPreset::Day => "day",
        })
    }
}

impl FromStr for KernelPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "minute" => Ok(Self::Minute),
            "hour" => Ok(Self::Hour),
            "day" => Ok(Self::Day),
            _ => Err(Error::UnknownPreset(s.to_owned())),
        }
    }
}

/// The three timescales used for news streams.
pub fn preset(name: &str) -> Result<(RbfKernel, f64)> {
    Ok(preset_kernel(name.parse()?))
}

fn preset_kernel(p: KernelPreset) -> (RbfKernel, f64) {
    let (step, count, sigma, lambda0) = match p {
        KernelPreset::Minute => (10.0, 9, 5.0, 0.01),
        KernelPreset::Hour => (120.0, 5, 60.0, 0.001),
        KernelPreset::Day => (1440.0, 7, 720.0, 0.0001),
    };
    let means = (0..count).map(|i| i as f64 * step).collect();
    let kernel = RbfKernel::with_shared_sigma(means, sigma).expect("preset kernels are valid");
    (kernel, lambda0)
}

/// Value of one Gaussian entry two deviations away from its centre, using
/// the first entry's deviation.
pub fn lambda0_heuristic(kernel: &RbfKernel) -> f64 {
    kernel.peak(0) * (-2.0f64).exp()
}

/// Per-topic event times, nondecreasing within each topic.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventHistory {
    times: Vec<Vec<f64>>,
}

impl EventHistory {
    pub fn new(times: Vec<Vec<f64>>) -> Result<Self> {
        for (c, t) in times.iter().enumerate() {
            if t.windows(2).any(|w| w[1] < w[0]) || t.iter().any(|x| !x.is_finite()) {
                return Err(contract(format!("event times of topic {c} are not sorted")));
            }
        }
        Ok(Self { times })
    }

    pub fn num_topics(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self, c: usize) -> &[f64] {
        &self.times[c]
    }

    pub fn all(&self) -> &[Vec<f64>] {
        &self.times
    }
}

/// Sparse `K × K × L` tensor of excitation weights in `[0, 1]`; absent
/// `(target, source)` pairs are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaTensor {
    num_topics: usize,
    num_entries: usize,
    pairs: BTreeMap<(usize, usize), Vec<f64>>,
}

impl AlphaTensor {
    pub fn zeros(num_topics: usize, num_entries: usize) -> Self {
        Self {
            num_topics,
            num_entries,
            pairs: BTreeMap::new(),
        }
    }

    /// `K`.
    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    /// `L`.
    pub fn num_entries(&self) -> usize {
        self.num_entries
    }

    pub fn set(&mut self, target: usize, source: usize, values: Vec<f64>) -> Result<()> {
        if target >= self.num_topics || source >= self.num_topics {
            return Err(contract(format!(
                "pair ({target}, {source}) outside K = {}",
                self.num_topics
            )));
        }
        if values.len() != self.num_entries {
            return Err(contract(format!(
                "expected {} kernel entries, got {}",
                self.num_entries,
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(contract("excitation weights must lie in [0, 1]"));
        }
        if values.iter().all(|&v| v == 0.0) {
            self.pairs.remove(&(target, source));
        } else {
            self.pairs.insert((target, source), values);
        }
        Ok(())
    }

    pub fn get(&self, target: usize, source: usize) -> Option<&[f64]> {
        self.pairs.get(&(target, source)).map(Vec::as_slice)
    }

    pub fn value(&self, target: usize, source: usize, l: usize) -> f64 {
        self.get(target, source).map_or(0.0, |v| v[l])
    }

    /// Nonzero pairs in `(target, source)` order.
    pub fn pairs(&self) -> impl Iterator<Item = ((usize, usize), &[f64])> {
        self.pairs.iter().map(|(&k, v)| (k, v.as_slice()))
    }
}

/// Hawkes intensity of topic `c` at time `t`. Events older than the
/// kernel's truncation horizon are skipped; events at exactly `t` are
/// excluded.
pub fn intensity(
    c: usize,
    t: f64,
    history: &EventHistory,
    alpha: &AlphaTensor,
    kernel: &RbfKernel,
) -> Result<f64> {
    if c >= alpha.num_topics() {
        return Err(contract(format!("topic {c} outside K = {}", alpha.num_topics())));
    }
    if !(t >= 0.0) {
        return Err(contract(format!("time must be >= 0, got {t}")));
    }
    let horizon = kernel.truncation_horizon();
    let mut feat = vec![0.0; kernel.len()];
    let mut total = 0.0;
    for (src, times) in history.all().iter().enumerate() {
        let Some(a) = alpha.get(c, src) else { continue };
        feat.iter_mut().for_each(|f| *f = 0.0);
        kernel_sum(kernel, times, t, horizon, &mut feat);
        total += dot(a, &feat);
    }
    Ok(total)
}

/// Adds `Σ κ(t − t_j)` over events `t_j` in `(t − horizon, t)` to `acc`.
/// `times` must be sorted.
pub(crate) fn kernel_sum(kernel: &RbfKernel, times: &[f64], t: f64, horizon: f64, acc: &mut [f64]) {
    let end = times.partition_point(|&x| x < t);
    let start = times[..end].partition_point(|&x| x <= t - horizon);
    for &tj in &times[start..end] {
        kernel.accumulate(t - tj, acc);
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
