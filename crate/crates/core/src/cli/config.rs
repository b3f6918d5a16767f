//! Experiment manifests: a TOML file with one table per subcommand.
//!
//! ```toml
//! seed = 7
//! jobs = 2
//!
//! [run]
//! input = "docs.jsonl"
//! kernel = "minute"
//! theta0 = 0.01
//! r = 1.0
//!
//! [grid]
//! kernels = ["minute", "hour", "day"]
//! theta0 = [0.001, 0.01]
//! r = [0.0, 0.5, 1.0, 1.5]
//! ```
//!
//! Every command-line flag has a key of the same name (dashes become
//! underscores) in its subcommand's table. Command-line values win.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub preprocess: PreprocessSection,
    pub synth: SynthSection,
    pub run: RunSection,
    pub analyze: AnalyzeSection,
    pub report: ReportSection,
    pub grid: GridSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub min_score: Option<i64>,
    pub min_tokens: Option<u32>,
    pub min_word_len: Option<usize>,
    pub min_word_freq: Option<usize>,
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub scenario: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub input: Option<PathBuf>,
    pub kernel: Option<String>,
    pub theta0: Option<f64>,
    pub r: Option<f64>,
    pub lambda0: Option<f64>,
    pub particles: Option<usize>,
    pub alpha_samples: Option<usize>,
    pub alpha_refresh_every: Option<usize>,
    pub checkpoint_every: Option<usize>,
    pub resume: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub top_words: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeSection {
    pub run: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub top: Option<usize>,
    pub bins: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub runs: Option<Vec<PathBuf>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub kernels: Option<Vec<String>>,
    pub theta0: Option<Vec<f64>>,
    pub r: Option<Vec<f64>>,
    pub particles: Option<usize>,
    pub alpha_samples: Option<usize>,
    pub seed_policy: Option<String>,
    pub top: Option<usize>,
    pub bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Rewrites relative paths against `base` so that manifests can refer to
    /// files next to themselves.
    pub fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut Option<PathBuf>| {
            if let Some(path) = p.as_mut().filter(|p| p.is_relative()) {
                *path = base.join(&*path);
            }
        };
        fix(&mut self.preprocess.input);
        fix(&mut self.preprocess.output);
        fix(&mut self.preprocess.stats);
        fix(&mut self.synth.scenario);
        fix(&mut self.synth.out);
        fix(&mut self.synth.labels);
        fix(&mut self.run.input);
        fix(&mut self.run.resume);
        fix(&mut self.run.output);
        fix(&mut self.analyze.run);
        fix(&mut self.analyze.out);
        fix(&mut self.report.out);
        if let Some(runs) = self.report.runs.as_mut() {
            for r in runs.iter_mut().filter(|r| r.is_relative()) {
                *r = base.join(&*r);
            }
        }
        fix(&mut self.grid.input);
        fix(&mut self.grid.output);
    }
}

/// First of the command-line value, the file value, or a default.
pub fn pick<T>(cli: Option<T>, file: Option<T>, default: T) -> T {
    cli.or(file).unwrap_or(default)
}

/// Like [`pick`] for values without a default.
pub fn require<T>(cli: Option<T>, file: Option<T>, what: &str) -> Result<T> {
    cli.or(file)
        .ok_or_else(|| Error::Config(format!("missing `{what}` (flag or config key)")))
}
