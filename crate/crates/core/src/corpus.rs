//! Headline ingestion: tokenization, vocabulary construction, curation
//! filters and dataset statistics.
//!
//! Raw records are JSON Lines shaped like public archive dumps
//! (`created_utc`, `title`, `subreddit`, `score`). Curation keeps records
//! with enough popularity and enough in-vocabulary tokens, sorts them by
//! time, and rebases timestamps to minutes since the first retained record.
//! All downstream modules work in minutes.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{contract, Result};

static STOPWORDS_EN: &str = include_str!("../data/stopwords_en.txt");

/// One raw archive record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    /// Seconds since the Unix epoch.
    #[serde(deserialize_with = "de_timestamp")]
    pub created_utc: i64,
    pub title: String,
    /// Source channel name.
    pub subreddit: String,
    /// Upvotes minus downvotes.
    #[serde(default)]
    pub score: i64,
}

/// Archive dumps are inconsistent about timestamp encoding; accept integers,
/// floats and numeric strings.
fn de_timestamp<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    use serde::de::Error as _;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(i64),
        Float(f64),
        Str(String),
    }
    let ts = match Raw::deserialize(d)? {
        Raw::Int(v) => v,
        Raw::Float(v) => v.floor() as i64,
        Raw::Str(s) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| D::Error::custom(format!("bad timestamp `{s}`")))?
            .floor() as i64,
    };
    if ts < 0 {
        return Err(D::Error::custom("negative timestamp"));
    }
    Ok(ts)
}

/// Lexical tokenizer: lowercase, drop URLs, split on non-alphanumerics, drop
/// stopwords and short tokens.
#[derive(Debug, Clone)]
pub struct Tokenizer {
    stopwords: HashSet<String>,
    min_word_len: usize,
}

impl Default for Tokenizer {
    fn default() -> Self {
        Self::new(4)
    }
}

impl Tokenizer {
    pub fn new(min_word_len: usize) -> Self {
        let stopwords = STOPWORDS_EN
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_owned)
            .collect();
        Self {
            stopwords,
            min_word_len,
        }
    }

    pub fn min_word_len(&self) -> usize {
        self.min_word_len
    }

    pub fn tokenize(&self, title: &str) -> Vec<String> {
        let mut out = Vec::new();
        for chunk in title.split_whitespace() {
            if looks_like_url(chunk) {
                continue;
            }
            let lowered = chunk.to_lowercase();
            for tok in lowered.split(|c: char| !c.is_alphanumeric()) {
                if tok.chars().count() < self.min_word_len || self.stopwords.contains(tok) {
                    continue;
                }
                out.push(tok.to_owned());
            }
        }
        out
    }
}

fn looks_like_url(chunk: &str) -> bool {
    let lower = chunk.to_ascii_lowercase();
    let lower = lower.trim_start_matches(|c: char| !c.is_alphanumeric());
    lower.contains("://") || lower.starts_with("www.") || lower.starts_with("http")
        && lower.contains('/')
}

/// Tokenizes with the default rules (minimum length 4, embedded stopwords).
pub fn tokenize(title: &str) -> Vec<String> {
    Tokenizer::default().tokenize(title)
}

/// Bijection between retained words and indices `0..V`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl From<Vec<String>> for Vocabulary {
    fn from(words: Vec<String>) -> Self {
        let index = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self { words, index }
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn word(&self, idx: usize) -> Option<&str> {
        self.words.get(idx).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

/// Builds the vocabulary of tokens occurring at least `min_word_freq` times,
/// indexed in order of first appearance.
pub fn build_vocabulary<'a, I>(records: I, tokenizer: &Tokenizer, min_word_freq: usize) -> Vocabulary
where
    I: IntoIterator<Item = &'a RawRecord>,
{
    let mut order: Vec<String> = Vec::new();
    let mut freq: HashMap<String, usize> = HashMap::new();
    for rec in records {
        for tok in tokenizer.tokenize(&rec.title) {
            let n = freq.entry(tok.clone()).or_insert(0);
            if *n == 0 {
                order.push(tok);
            }
            *n += 1;
        }
    }
    order
        .into_iter()
        .filter(|w| freq[w] >= min_word_freq)
        .collect::<Vec<_>>()
        .into()
}

/// A curated document: a timestamped bag of vocabulary indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: usize,
    /// Minutes since the stream origin.
    pub time: f64,
    pub channel: usize,
    pub score: i64,
    /// `(word index, count)` pairs, sorted by word index, counts > 0.
    pub words: Vec<(usize, u32)>,
}

impl Document {
    /// Builds a document from a token-index list, merging duplicates.
    pub fn from_tokens(id: usize, time: f64, channel: usize, score: i64, tokens: &[usize]) -> Self {
        let mut counts: BTreeMap<usize, u32> = BTreeMap::new();
        for &t in tokens {
            *counts.entry(t).or_insert(0) += 1;
        }
        Self {
            id,
            time,
            channel,
            score,
            words: counts.into_iter().collect(),
        }
    }

    pub fn token_total(&self) -> u32 {
        self.words.iter().map(|&(_, n)| n).sum()
    }

    pub(crate) fn check_vocab(&self, vocab_size: usize) -> Result<()> {
        match self.words.iter().find(|&&(v, _)| v >= vocab_size) {
            Some(&(v, _)) => Err(contract(format!(
                "document {} uses word index {v} but V = {vocab_size}",
                self.id
            ))),
            None => Ok(()),
        }
    }
}

/// A curated stream with the metadata needed to interpret it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DocumentStream {
    pub vocabulary: Vocabulary,
    pub channels: Vec<String>,
    pub documents: Vec<Document>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationConfig {
    pub min_score: i64,
    pub min_tokens: u32,
}

impl Default for CurationConfig {
    fn default() -> Self {
        Self {
            min_score: 20,
            min_tokens: 3,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurationReport {
    pub input: usize,
    pub dropped_score: usize,
    pub dropped_tokens: usize,
    pub retained: usize,
}

#[derive(Debug, Clone)]
pub struct Curated {
    pub stream: DocumentStream,
    /// Indices (into the caller's record slice) of the retained records, in
    /// stream order.
    pub retained: Vec<usize>,
    pub report: CurationReport,
}

/// Applies the popularity and length filters and produces a time-sorted
/// document stream. Records are stable-sorted by timestamp first.
pub fn curate(
    records: &[RawRecord],
    vocab: &Vocabulary,
    tokenizer: &Tokenizer,
    cfg: CurationConfig,
) -> Curated {
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by_key(|&i| records[i].created_utc);

    let mut report = CurationReport {
        input: records.len(),
        ..Default::default()
    };
    let mut channels: Vec<String> = Vec::new();
    let mut channel_index: HashMap<&str, usize> = HashMap::new();
    let mut documents = Vec::new();
    let mut retained = Vec::new();
    let mut origin: Option<i64> = None;

    for i in order {
        let rec = &records[i];
        if rec.score < cfg.min_score {
            report.dropped_score += 1;
            continue;
        }
        let tokens: Vec<usize> = tokenizer
            .tokenize(&rec.title)
            .iter()
            .filter_map(|t| vocab.index_of(t))
            .collect();
        if (tokens.len() as u32) < cfg.min_tokens || tokens.is_empty() {
            report.dropped_tokens += 1;
            continue;
        }
        let origin = *origin.get_or_insert(rec.created_utc);
        let channel = *channel_index.entry(rec.subreddit.as_str()).or_insert_with(|| {
            channels.push(rec.subreddit.clone());
            channels.len() - 1
        });
        let time = (rec.created_utc - origin) as f64 / 60.0;
        documents.push(Document::from_tokens(
            documents.len(),
            time,
            channel,
            rec.score,
            &tokens,
        ));
        retained.push(i);
    }
    report.retained = documents.len();
    Curated {
        stream: DocumentStream {
            vocabulary: vocab.clone(),
            channels,
            documents,
        },
        retained,
        report,
    }
}

/// Histograms describing a curated stream.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StatsReport {
    /// token_total -> number of documents.
    pub word_counts: BTreeMap<u32, usize>,
    /// score -> number of documents.
    pub scores: BTreeMap<i64, usize>,
    /// Documents per channel index.
    pub channels: Vec<usize>,
    /// day index (since origin) -> number of documents.
    pub timeline: BTreeMap<u64, usize>,
}

pub fn dataset_stats(docs: &[Document]) -> StatsReport {
    let mut stats = StatsReport::default();
    for d in docs {
        *stats.word_counts.entry(d.token_total()).or_default() += 1;
        *stats.scores.entry(d.score).or_default() += 1;
        if stats.channels.len() <= d.channel {
            stats.channels.resize(d.channel + 1, 0);
        }
        stats.channels[d.channel] += 1;
        *stats.timeline.entry((d.time / 1440.0).floor() as u64).or_default() += 1;
    }
    stats
}

impl StatsReport {
    /// Writes `word_counts.csv`, `scores.csv`, `channels.csv` and
    /// `timeline.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path, channel_names: &[String]) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut s = String::from("token_total,count\n");
        for (k, v) in &self.word_counts {
            let _ = writeln!(s, "{k},{v}");
        }
        std::fs::write(dir.join("word_counts.csv"), s)?;

        let mut s = String::from("score,count\n");
        for (k, v) in &self.scores {
            let _ = writeln!(s, "{k},{v}");
        }
        std::fs::write(dir.join("scores.csv"), s)?;

        let mut s = String::from("channel,count\n");
        for (i, v) in self.channels.iter().enumerate() {
            let name = channel_names.get(i).map(String::as_str).unwrap_or("?");
            let _ = writeln!(s, "{},{v}", crate::io::csv_field(name));
        }
        std::fs::write(dir.join("channels.csv"), s)?;

        let mut s = String::from("day,count\n");
        for (k, v) in &self.timeline {
            let _ = writeln!(s, "{k},{v}");
        }
        std::fs::write(dir.join("timeline.csv"), s)?;
        Ok(())
    }
}
