use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InferenceConfig, Model, Particle};
use crate::corpus::{Document, Vocabulary};
use crate::error::{Error, Result};
use crate::lang_model::ClusterWordCounts;
use crate::temporal::{AlphaTensor, EventHistory};

pub const RESULT_FORMAT: &str = "mpdhp-result";
pub const RESULT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSummary {
    pub id: usize,
    pub doc_count: u64,
    /// Most frequent words, filled when a vocabulary is available.
    #[serde(default)]
    pub top_words: Vec<String>,
    pub channel_counts: BTreeMap<usize, u64>,
    /// `(word index, count)` sorted by word index.
    pub word_counts: Vec<(usize, u64)>,
}

impl ClusterSummary {
    pub fn counts(&self) -> ClusterWordCounts {
        ClusterWordCounts::from_parts(
            self.word_counts.iter().copied(),
            self.doc_count,
            self.channel_counts.clone(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationRecord {
    pub doc_id: usize,
    pub time: f64,
    pub cluster: usize,
}

/// State of the best particle at the end of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceResult {
    pub config: InferenceConfig,
    pub vocab_size: usize,
    pub n_channels: usize,
    pub clusters: Vec<ClusterSummary>,
    pub allocations: Vec<AllocationRecord>,
    pub alpha: AlphaTensor,
    pub runtime_secs: f64,
    /// Normalized weight of the reported particle.
    pub weight: f64,
}

#[derive(Serialize, Deserialize)]
struct ResultFile {
    format: String,
    version: u32,
    config: InferenceConfig,
    vocab_size: usize,
    n_channels: usize,
    num_documents: usize,
    num_clusters: usize,
    runtime_secs: f64,
    weight: f64,
    clusters: Vec<ClusterSummary>,
}

impl InferenceResult {
    pub(crate) fn from_particle(
        particle: &Particle,
        docs: &[Document],
        model: &Model,
        n_channels: usize,
        runtime_secs: f64,
    ) -> Self {
        let k = particle.num_clusters();
        let l = model.kernel().len();
        let mut alpha = AlphaTensor::zeros(k, l);
        let mut clusters = Vec::with_capacity(k);
        for c in particle.clusters() {
            for (&src, pair) in &c.alpha {
                alpha
                    .set(c.id, src, pair.estimate.clone())
                    .expect("estimates lie in the unit cube");
            }
            clusters.push(ClusterSummary {
                id: c.id,
                doc_count: c.words.doc_count(),
                top_words: Vec::new(),
                channel_counts: c.words.channel_counts().clone(),
                word_counts: c.words.word_counts(),
            });
        }
        let allocations = particle
            .allocations()
            .into_iter()
            .zip(docs)
            .map(|(cluster, d)| AllocationRecord {
                doc_id: d.id,
                time: d.time,
                cluster,
            })
            .collect();
        Self {
            config: model.config.clone(),
            vocab_size: model.prior.vocab_size,
            n_channels,
            clusters,
            allocations,
            alpha,
            runtime_secs,
            weight: particle.weight(),
        }
    }

    /// Number of topics holding at least one document.
    pub fn num_clusters(&self) -> usize {
        self.clusters.iter().filter(|c| c.doc_count > 0).count()
    }

    /// Topic label per document, in stream order.
    pub fn labels(&self) -> Vec<usize> {
        self.allocations.iter().map(|a| a.cluster).collect()
    }

    /// Event times per topic.
    pub fn history(&self) -> EventHistory {
        let mut times = vec![Vec::new(); self.clusters.len()];
        for a in &self.allocations {
            times[a.cluster].push(a.time);
        }
        EventHistory::new(times).expect("allocations are in stream order")
    }

    /// Fills `top_words` of each topic from a vocabulary.
    pub fn attach_vocabulary(&mut self, vocab: &Vocabulary, top: usize) {
        for c in &mut self.clusters {
            let mut wc = c.word_counts.clone();
            wc.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
            c.top_words = wc
                .iter()
                .take(top)
                .filter_map(|&(w, _)| vocab.word(w).map(str::to_owned))
                .collect();
        }
    }

    /// Writes `result.json`, `config.json`, `allocations.csv` and
    /// `alpha.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let file = ResultFile {
            format: RESULT_FORMAT.into(),
            version: RESULT_VERSION,
            config: self.config.clone(),
            vocab_size: self.vocab_size,
            n_channels: self.n_channels,
            num_documents: self.allocations.len(),
            num_clusters: self.num_clusters(),
            runtime_secs: self.runtime_secs,
            weight: self.weight,
            clusters: self.clusters.clone(),
        };
        std::fs::write(dir.join("result.json"), serde_json::to_string_pretty(&file)?)?;
        std::fs::write(dir.join("config.json"), serde_json::to_string_pretty(&self.config)?)?;

        let mut s = String::from("doc_id,time,cluster\n");
        for a in &self.allocations {
            let _ = writeln!(s, "{},{},{}", a.doc_id, a.time, a.cluster);
        }
        std::fs::write(dir.join("allocations.csv"), s)?;

        let mut s = String::from("target,source,entry,value\n");
        for ((c, src), v) in self.alpha.pairs() {
            for (l, x) in v.iter().enumerate() {
                let _ = writeln!(s, "{c},{src},{l},{x}");
            }
        }
        std::fs::write(dir.join("alpha.csv"), s)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("result.json");
        let file: ResultFile = serde_json::from_str(&std::fs::read_to_string(&path)?)?;
        if file.format != RESULT_FORMAT || file.version != RESULT_VERSION {
            return Err(Error::Format {
                path,
                message: format!("unsupported format {} v{}", file.format, file.version),
            });
        }
        let allocations = read_rows(&dir.join("allocations.csv"), 3)?
            .into_iter()
            .map(|r| {
                Ok(AllocationRecord {
                    doc_id: r[0].parse().map_err(|_| bad_row(dir, "allocations.csv"))?,
                    time: r[1].parse().map_err(|_| bad_row(dir, "allocations.csv"))?,
                    cluster: r[2].parse().map_err(|_| bad_row(dir, "allocations.csv"))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let l = file.config.kernel.kernel.len();
        let k = file.clusters.len();
        let mut pairs: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for r in read_rows(&dir.join("alpha.csv"), 4)? {
            let parse = |s: &str| s.parse::<usize>().map_err(|_| bad_row(dir, "alpha.csv"));
            let (c, s, e) = (parse(&r[0])?, parse(&r[1])?, parse(&r[2])?);
            let v: f64 = r[3].parse().map_err(|_| bad_row(dir, "alpha.csv"))?;
            if e >= l {
                return Err(bad_row(dir, "alpha.csv"));
            }
            pairs.entry((c, s)).or_insert_with(|| vec![0.0; l])[e] = v;
        }
        let mut alpha = AlphaTensor::zeros(k, l);
        for ((c, s), v) in pairs {
            alpha.set(c, s, v).map_err(|_| bad_row(dir, "alpha.csv"))?;
        }
        Ok(Self {
            config: file.config,
            vocab_size: file.vocab_size,
            n_channels: file.n_channels,
            clusters: file.clusters,
            allocations,
            alpha,
            runtime_secs: file.runtime_secs,
            weight: file.weight,
        })
    }
}

fn bad_row(dir: &Path, name: &str) -> Error {
    Error::Format {
        path: dir.join(name),
        message: "malformed row".into(),
    }
}

fn read_rows(path: &Path, width: usize) -> Result<Vec<Vec<String>>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let row: Vec<String> = l.split(',').map(str::to_owned).collect();
            if row.len() == width {
                Ok(row)
            } else {
                Err(Error::Format {
                    path: path.to_owned(),
                    message: format!("expected {width} columns in `{l}`"),
                })
            }
        })
        .collect()
}
