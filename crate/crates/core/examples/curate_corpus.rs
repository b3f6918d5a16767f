//! Tokenize raw headlines, build a vocabulary and curate a document stream.
//!
//! ```text
//! cargo run --example curate_corpus
//! ```

use mpdhp::corpus::{build_vocabulary, curate, dataset_stats, CurationConfig, RawRecord, Tokenizer};

fn record(t: i64, title: &str, subreddit: &str, score: i64) -> RawRecord {
    RawRecord {
        created_utc: t,
        title: title.into(),
        subreddit: subreddit.into(),
        score,
    }
}

/// Returns the retained document count and the vocabulary.
pub fn run_example() -> mpdhp::Result<(usize, Vec<String>)> {
    let records = vec![
        record(120, "Climate disaster strikes http://a.bc coast summit", "worldnews", 50),
        record(60, "Climate summit opens as coast floods", "news", 31),
        record(180, "Markets rally after climate summit", "business", 12),
        record(240, "Climate talks stall at coast summit", "worldnews", 80),
        record(300, "Summit ends", "news", 99),
    ];
    let tokenizer = Tokenizer::default();
    println!("tokens: {:?}", tokenizer.tokenize(&records[0].title));

    let vocab = build_vocabulary(&records, &tokenizer, 2);
    println!("vocabulary ({} words): {:?}", vocab.len(), vocab.words());

    let curated = curate(&records, &vocab, &tokenizer, CurationConfig::default());
    println!("curation: {:?}", curated.report);
    for d in &curated.stream.documents {
        println!("  t={:>5} min  channel={}  words={:?}", d.time, d.channel, d.words);
    }
    let stats = dataset_stats(&curated.stream.documents);
    println!("channel sizes: {:?}", stats.channels);
    Ok((curated.stream.documents.len(), vocab.words().to_vec()))
}

fn main() -> mpdhp::Result<()> {
    run_example().map(|_| ())
}
