//! The `mpdhp` command: `preprocess → run → analyze → report`, plus `synth`
//! for generated streams and `grid` for the kernel × θ₀ × r experiment grid.
//!
//! Each subcommand is also exposed as a plain function taking resolved
//! options, so pipelines can be scripted from Rust without going through
//! argument parsing.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use log::{error, info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{self, Analysis};
use crate::corpus::{self, CurationConfig, CurationReport, Tokenizer};
use crate::error::{Error, Result};
use crate::inference::{self, load_checkpoint, write_checkpoint, InferenceConfig, InferenceResult, Progress, Smc};
use crate::io;
use crate::synthgen::{self, Scenario};
use crate::temporal::KernelSpec;
use config::{pick, require, FileConfig};
use report::Row;

#[derive(Debug, Parser)]
#[command(name = "mpdhp", version, about = "Streaming topic and interaction inference for timestamped documents")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (grid cells, particles, importance samples).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// TOML manifest with one table per subcommand; `synth` also accepts a
    /// scenario file here.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curate raw JSONL records into a document stream.
    Preprocess(PreprocessArgs),
    /// Generate a synthetic stream with ground-truth labels.
    Synth(SynthArgs),
    /// Infer topics and excitation weights from a document stream.
    Run(RunArgs),
    /// Compute interaction and cluster reports for a run directory.
    Analyze(AnalyzeArgs),
    /// Concatenate analyses into table-style grids.
    Report(ReportArgs),
    /// Run and analyze every (kernel, θ₀, r) cell.
    Grid(GridArgs),
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub min_score: Option<i64>,
    #[arg(long)]
    pub min_tokens: Option<u32>,
    #[arg(long)]
    pub min_word_len: Option<usize>,
    #[arg(long)]
    pub min_word_freq: Option<usize>,
    /// Directory for dataset statistics CSVs.
    #[arg(long)]
    pub stats: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scenario file (defaults to the shipped five-topic scenario).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Preset name (minute, hour, day) or kernel file.
    #[arg(long)]
    pub kernel: Option<String>,
    #[arg(long)]
    pub theta0: Option<f64>,
    #[arg(long)]
    pub r: Option<f64>,
    /// Overrides the kernel's λ₀.
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub alpha_samples: Option<usize>,
    #[arg(long)]
    pub alpha_refresh_every: Option<usize>,
    /// Write `checkpoint.json` into the output directory every N documents.
    #[arg(long)]
    pub checkpoint_every: Option<usize>,
    /// Continue from a checkpoint; its configuration replaces the flags.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Words listed per topic in the result.
    #[arg(long)]
    pub top_words: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub run: Option<PathBuf>,
    /// Defaults to `<run>/analysis`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of largest topics summarized.
    #[arg(long)]
    pub top: Option<usize>,
    /// Histogram bins for the effective-interaction distribution.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run or analysis directories.
    #[arg(long, num_args = 1..)]
    pub runs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub kernels: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pub theta0: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub r: Vec<f64>,
    #[arg(long)]
    pub particles: Option<usize>,
    #[arg(long)]
    pub alpha_samples: Option<usize>,
    /// `shared`: every cell uses `--seed`; `per-cell`: seeds derived from
    /// `--seed` and the cell's position.
    #[arg(long)]
    pub seed_policy: Option<String>,
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub bins: Option<usize>,
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    init_logging();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!(target: "mpdhp", "{e}");
            ExitCode::FAILURE
        }
    }
}

/// Parses `args` (including the program name) and executes the command.
pub fn run_from<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Config(e.to_string()))?;
    execute(cli)
}

/// Structured progress lines on standard error:
/// `<timestamp> <level> stage=<subcommand> key=value ...`.
pub fn init_logging() {
    use std::io::Write;
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format(|buf, rec| {
            writeln!(buf, "{} {} stage={} {}", buf.timestamp_millis(), rec.level(), rec.target(), rec.args())
        })
        .try_init();
}

fn load_manifest(path: &Path) -> Result<FileConfig> {
    let base = path.parent().unwrap_or(Path::new("."));
    match FileConfig::load(path) {
        Ok(mut c) => {
            c.rebase(base);
            Ok(c)
        }
        // A bare scenario file is accepted in place of a manifest.
        Err(manifest_err) => match Scenario::from_file(path) {
            Ok(_) => Ok(FileConfig {
                synth: config::SynthSection {
                    scenario: Some(path.to_owned()),
                    ..Default::default()
                },
                ..Default::default()
            }),
            Err(_) => Err(manifest_err),
        },
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => load_manifest(p)?,
        None => FileConfig::default(),
    };
    let seed = pick(cli.seed, file.seed, 0);
    let jobs = pick(cli.jobs, file.jobs, 0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| dispatch(cli.command, &file, seed))
}

fn dispatch(command: Command, file: &FileConfig, seed: u64) -> Result<()> {
    match command {
        Command::Preprocess(a) => {
            let f = &file.preprocess;
            let opts = PreprocessOptions {
                input: require(a.input, f.input.clone(), "input")?,
                output: require(a.output, f.output.clone(), "output")?,
                curation: CurationConfig {
                    min_score: pick(a.min_score, f.min_score, 20),
                    min_tokens: pick(a.min_tokens, f.min_tokens, 3),
                },
                min_word_len: pick(a.min_word_len, f.min_word_len, 4),
                min_word_freq: pick(a.min_word_freq, f.min_word_freq, 3),
                stats: a.stats.or(f.stats.clone()),
            };
            preprocess(&opts).map(|_| ())
        }
        Command::Synth(a) => {
            let f = &file.synth;
            let scenario = match a.scenario.or(f.scenario.clone()) {
                Some(p) => Scenario::from_file(&p)?,
                None => Scenario::five_topics(),
            };
            let out = require(a.out, f.out.clone(), "out")?;
            let labels = require(a.labels, f.labels.clone(), "labels")?;
            synth(&scenario, seed, &out, &labels).map(|_| ())
        }
        Command::Run(a) => {
            let f = &file.run;
            let resume = a.resume.or(f.resume.clone());
            let kernel = KernelSpec::resolve(&pick(a.kernel, f.kernel.clone(), "minute".into()))?;
            let mut config = InferenceConfig::new(kernel);
            config.theta0 = pick(a.theta0, f.theta0, config.theta0);
            config.r = pick(a.r, f.r, config.r);
            config.lambda0 = pick(a.lambda0, f.lambda0, config.lambda0);
            config.particles = pick(a.particles, f.particles, config.particles);
            config.alpha_samples = pick(a.alpha_samples, f.alpha_samples, config.alpha_samples);
            config.alpha_refresh_every = pick(a.alpha_refresh_every, f.alpha_refresh_every, config.alpha_refresh_every);
            config.seed = seed;
            let opts = RunOptions {
                input: require(a.input, f.input.clone(), "input")?,
                output: require(a.output, f.output.clone(), "output")?,
                config,
                checkpoint_every: a.checkpoint_every.or(f.checkpoint_every),
                resume,
                top_words: pick(a.top_words, f.top_words, 20),
            };
            run(&opts).map(|_| ())
        }
        Command::Analyze(a) => {
            let f = &file.analyze;
            let dir = require(a.run, f.run.clone(), "run")?;
            let out = a.out.or(f.out.clone()).unwrap_or_else(|| dir.join("analysis"));
            analyze(&dir, &out, pick(a.top, f.top, 20), pick(a.bins, f.bins, 30)).map(|_| ())
        }
        Command::Report(a) => {
            let f = &file.report;
            let runs = if a.runs.is_empty() { f.runs.clone().unwrap_or_default() } else { a.runs };
            if runs.is_empty() {
                return Err(Error::Config("missing `runs` (flag or config key)".into()));
            }
            let out = require(a.out, f.out.clone(), "out")?;
            report(&runs, &out)
        }
        Command::Grid(a) => {
            let f = &file.grid;
            let policy = pick(a.seed_policy, f.seed_policy.clone(), "shared".into());
            let opts = GridOptions {
                input: require(a.input, f.input.clone(), "input")?,
                output: require(a.output, f.output.clone(), "output")?,
                kernels: nonempty(a.kernels, f.kernels.clone(), vec!["minute".into(), "hour".into(), "day".into()]),
                theta0: nonempty(a.theta0, f.theta0.clone(), vec![0.001, 0.01]),
                r: nonempty(a.r, f.r.clone(), vec![0.0, 0.5, 1.0, 1.5]),
                particles: pick(a.particles, f.particles, 8),
                alpha_samples: pick(a.alpha_samples, f.alpha_samples, 100_000),
                seed,
                seed_policy: policy.parse()?,
                top: pick(a.top, f.top, 20),
                bins: pick(a.bins, f.bins, 30),
            };
            grid(&opts).map(|_| ())
        }
    }
}

/// List flags are empty when not given on the command line.
fn nonempty<T>(cli: Vec<T>, file: Option<Vec<T>>, default: Vec<T>) -> Vec<T> {
    if cli.is_empty() {
        file.unwrap_or(default)
    } else {
        cli
    }
}

/// Resolved options of `preprocess`.
#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub curation: CurationConfig,
    pub min_word_len: usize,
    pub min_word_freq: usize,
    pub stats: Option<PathBuf>,
}

pub fn preprocess(opts: &PreprocessOptions) -> Result<CurationReport> {
    let records = io::read_records(&opts.input)?;
    let tokenizer = Tokenizer::new(opts.min_word_len);
    let vocab = corpus::build_vocabulary(&records, &tokenizer, opts.min_word_freq);
    let curated = corpus::curate(&records, &vocab, &tokenizer, opts.curation);
    io::write_stream(&opts.output, &curated.stream)?;
    if let Some(dir) = &opts.stats {
        corpus::dataset_stats(&curated.stream.documents).write_csv(dir, &curated.stream.channels)?;
    }
    let r = &curated.report;
    info!(
        target: "preprocess",
        "records={} dropped_score={} dropped_tokens={} retained={} vocabulary={}",
        r.input, r.dropped_score, r.dropped_tokens, r.retained, vocab.len()
    );
    Ok(curated.report)
}

/// Generates a stream from `scenario`, writes it and its labels, and
/// returns the number of documents.
pub fn synth(scenario: &Scenario, seed: u64, out: &Path, labels: &Path) -> Result<usize> {
    let truth = scenario.build()?;
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let s = synthgen::generate(&truth, &mut rng)?;
    io::write_stream(out, &s.stream)?;
    synthgen::write_labels(labels, &s.labels)?;
    info!(
        target: "synth",
        "scenario={} documents={} topics={} spectral_radius={:.4}",
        scenario.name,
        s.labels.len(),
        truth.topics.len(),
        truth.spectral_radius()
    );
    Ok(s.labels.len())
}

/// Resolved options of `run`.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub config: InferenceConfig,
    pub checkpoint_every: Option<usize>,
    pub resume: Option<PathBuf>,
    pub top_words: usize,
}

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const RUN_LOG: &str = "run.log";

struct RunObserver<'a> {
    dir: &'a Path,
    total: usize,
    every_log: usize,
    checkpoint_every: Option<usize>,
    log: String,
    started: Instant,
}

impl RunObserver<'_> {
    fn line(&mut self, smc: &Smc) {
        let best = &smc.particles()[smc.best_index()];
        let msg = format!(
            "docs={}/{} clusters={} ess={:.2} resamples={}",
            smc.processed(),
            self.total,
            best.num_clusters(),
            inference::effective_sample_size(smc.particles()),
            smc.resamples()
        );
        info!(target: "run", "{msg} elapsed_s={:.1}", self.started.elapsed().as_secs_f64());
        let _ = writeln!(self.log, "{msg}");
    }
}

impl Progress for RunObserver<'_> {
    fn after_document(&mut self, smc: &Smc) -> Result<()> {
        let n = smc.processed();
        if n % self.every_log == 0 || n == self.total {
            self.line(smc);
        }
        if let Some(k) = self.checkpoint_every.filter(|&k| k > 0) {
            if n % k == 0 {
                write_checkpoint(&self.dir.join(CHECKPOINT_FILE), &smc.checkpoint())?;
            }
        }
        Ok(())
    }
}

/// Runs inference and writes the run directory: `result.json`,
/// `config.json`, `allocations.csv`, `alpha.csv` and `run.log`.
pub fn run(opts: &RunOptions) -> Result<InferenceResult> {
    let stream = io::read_stream(&opts.input)?;
    let docs = &stream.documents;
    std::fs::create_dir_all(&opts.output)?;
    let mut smc = match &opts.resume {
        Some(path) => {
            let cp = load_checkpoint(path)?;
            if cp.vocab_size != stream.vocabulary.len() || cp.processed > docs.len() {
                return Err(Error::Config(format!("{} does not belong to this stream", path.display())));
            }
            Smc::resume(cp)?
        }
        None => Smc::new(opts.config.clone(), stream.vocabulary.len())?,
    };
    let c = &smc.model().config;
    info!(
        target: "run",
        "documents={} vocabulary={} kernel={} theta0={} r={} particles={} alpha_samples={} seed={} start={}",
        docs.len(), stream.vocabulary.len(), c.kernel.name, c.theta0, c.r, c.particles, c.alpha_samples, c.seed,
        smc.processed()
    );
    let mut obs = RunObserver {
        dir: &opts.output,
        total: docs.len(),
        every_log: (docs.len() / 20).max(1),
        checkpoint_every: opts.checkpoint_every,
        log: String::new(),
        started: Instant::now(),
    };
    for doc in &docs[smc.processed()..] {
        smc.process(doc)?;
        obs.after_document(&smc)?;
    }
    let mut result = smc.finish(docs, stream.channels.len());
    result.attach_vocabulary(&stream.vocabulary, opts.top_words);
    result.save(&opts.output)?;
    let _ = writeln!(obs.log, "finished clusters={} runtime_s={:.3}", result.num_clusters(), result.runtime_secs);
    std::fs::write(opts.output.join(RUN_LOG), obs.log)?;
    info!(target: "run", "clusters={} runtime_s={:.1} output={}", result.num_clusters(), result.runtime_secs, opts.output.display());
    Ok(result)
}

pub const SUMMARY_FILE: &str = "summary.json";

/// Writes `summary.json`, the three tables, `top_clusters.csv` and the
/// effective-interaction histogram (`w_histogram.csv`, raw values in
/// `w_histogram_values.csv`) for one run directory.
pub fn analyze(run_dir: &Path, out: &Path, top: usize, bins: usize) -> Result<Analysis> {
    let result = InferenceResult::load(run_dir)?;
    let (analysis, w) = analytics::analyze(&result, top)?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join(SUMMARY_FILE), serde_json::to_string_pretty(&analysis)?)?;
    report::write_tables(out, &[Row::Ok(&analysis)])?;
    let mut s = String::from("rank,id,size,s_text,s_sub,top_words\n");
    for (i, c) in analysis.clusters.top.iter().enumerate() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            i + 1,
            c.id,
            c.size,
            c.s_text,
            c.s_sub,
            io::csv_field(&c.top_words.join(" "))
        );
    }
    std::fs::write(out.join("top_clusters.csv"), s)?;
    analytics::export_distribution(&w, &out.join("w_histogram.csv"), bins)?;
    info!(
        target: "analyze",
        "run={} clusters={} active_topics={} out={}",
        run_dir.display(),
        analysis.clusters.k,
        analysis.strength.active_topics,
        out.display()
    );
    Ok(analysis)
}

fn load_summary(dir: &Path) -> Result<Analysis> {
    let direct = dir.join(SUMMARY_FILE);
    let path = if direct.exists() { direct } else { dir.join("analysis").join(SUMMARY_FILE) };
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

/// Concatenates the tables of several analyses, in the order given.
pub fn report(dirs: &[PathBuf], out: &Path) -> Result<()> {
    let analyses = dirs.iter().map(|d| load_summary(d)).collect::<Result<Vec<_>>>()?;
    let rows: Vec<Row> = analyses.iter().map(Row::Ok).collect();
    report::write_tables(out, &rows)?;
    info!(target: "report", "runs={} out={}", rows.len(), out.display());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeedPolicy {
    /// Every cell uses the global seed.
    Shared,
    /// Cell `i` uses a seed mixed from the global seed and `i`.
    PerCell,
}

impl std::str::FromStr for SeedPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(Self::Shared),
            "per-cell" | "per_cell" => Ok(Self::PerCell),
            _ => Err(Error::Config(format!("unknown seed policy `{s}` (shared or per-cell)"))),
        }
    }
}

/// Resolved options of `grid`: the cross product of kernels, θ₀ and r.
#[derive(Debug, Clone)]
pub struct GridOptions {
    pub input: PathBuf,
    pub output: PathBuf,
    pub kernels: Vec<String>,
    pub theta0: Vec<f64>,
    pub r: Vec<f64>,
    pub particles: usize,
    pub alpha_samples: usize,
    pub seed: u64,
    pub seed_policy: SeedPolicy,
    pub top: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub name: String,
    pub kernel: String,
    pub theta0: f64,
    pub r: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub cell: GridCell,
    /// `None` on success.
    pub error: Option<String>,
}

impl GridOptions {
    /// Cells in kernel-major, then θ₀, then r order.
    pub fn cells(&self) -> Vec<GridCell> {
        let mut out = Vec::new();
        for k in &self.kernels {
            for &theta0 in &self.theta0 {
                for &r in &self.r {
                    let seed = match self.seed_policy {
                        SeedPolicy::Shared => self.seed,
                        SeedPolicy::PerCell => inference::mix_seed(self.seed, out.len() as u64),
                    };
                    let stem = Path::new(k).file_stem().map(|s| s.to_string_lossy().into_owned());
                    out.push(GridCell {
                        name: format!("{}_theta{theta0}_r{r}", stem.unwrap_or_else(|| k.clone())),
                        kernel: k.clone(),
                        theta0,
                        r,
                        seed,
                    });
                }
            }
        }
        out
    }

    fn cell_config(&self, cell: &GridCell) -> Result<InferenceConfig> {
        let mut c = InferenceConfig::new(KernelSpec::resolve(&cell.kernel)?);
        c.theta0 = cell.theta0;
        c.r = cell.r;
        c.particles = self.particles;
        c.alpha_samples = self.alpha_samples;
        c.seed = cell.seed;
        Ok(c)
    }
}

/// Runs and analyzes every cell (in parallel up to the thread pool size),
/// then writes `table1.csv`, `table2.csv`, `table3.csv` and `grid.json`
/// under the output root. A failing cell becomes a `failed` row; the grid
/// fails only when no cell succeeds.
pub fn grid(opts: &GridOptions) -> Result<Vec<CellOutcome>> {
    let cells = opts.cells();
    if cells.is_empty() {
        return Err(Error::Config("grid has no cells (kernels, theta0 and r must be non-empty)".into()));
    }
    // Invalid kernels are a configuration error, not a failed cell.
    for k in &opts.kernels {
        KernelSpec::resolve(k)?;
    }
    info!(target: "grid", "cells={} output={}", cells.len(), opts.output.display());
    let results: Vec<(InferenceConfig, std::result::Result<Analysis, String>)> = cells
        .par_iter()
        .map(|cell| {
            let config = opts.cell_config(cell).expect("kernels validated above");
            let dir = opts.output.join("cells").join(&cell.name);
            let run_opts = RunOptions {
                input: opts.input.clone(),
                output: dir.clone(),
                config: config.clone(),
                checkpoint_every: None,
                resume: None,
                top_words: opts.top,
            };
            let outcome = run(&run_opts)
                .and_then(|_| analyze(&dir, &dir.join("analysis"), opts.top, opts.bins))
                .map_err(|e| e.to_string());
            if let Err(e) = &outcome {
                warn!(target: "grid", "cell={} failed error={e}", cell.name);
            }
            (config, outcome)
        })
        .collect();
    if results.iter().all(|(_, r)| r.is_err()) {
        return Err(Error::Config(format!("all {} grid cells failed", results.len())));
    }
    let rows: Vec<Row> = results
        .iter()
        .map(|(c, r)| match r {
            Ok(a) => Row::Ok(a),
            Err(e) => Row::Failed(c, e),
        })
        .collect();
    report::write_tables(&opts.output, &rows)?;
    let outcomes: Vec<CellOutcome> = cells
        .into_iter()
        .zip(&results)
        .map(|(cell, (_, r))| CellOutcome {
            cell,
            error: r.as_ref().err().cloned(),
        })
        .collect();
    std::fs::write(opts.output.join("grid.json"), serde_json::to_string_pretty(&outcomes)?)?;
    let failed = outcomes.iter().filter(|o| o.error.is_some()).count();
    info!(target: "grid", "cells={} failed={failed}", outcomes.len());
    Ok(outcomes)
}
