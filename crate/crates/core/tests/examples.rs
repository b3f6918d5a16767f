//! Runs every example's `run_example` and sanity-checks what it returns.

#[allow(dead_code)]
#[path = "../examples/allocation_posterior.rs"]
mod allocation_posterior;
#[allow(dead_code)]
#[path = "../examples/alpha_estimation.rs"]
mod alpha_estimation;
#[allow(dead_code)]
#[path = "../examples/checkpoint_resume.rs"]
mod checkpoint_resume;
#[allow(dead_code)]
#[path = "../examples/cli_pipeline.rs"]
mod cli_pipeline;
#[allow(dead_code)]
#[path = "../examples/curate_corpus.rs"]
mod curate_corpus;
#[allow(dead_code)]
#[path = "../examples/experiment_grid.rs"]
mod experiment_grid;
#[allow(dead_code)]
#[path = "../examples/hawkes_intensity.rs"]
mod hawkes_intensity;
#[allow(dead_code)]
#[path = "../examples/interaction_report.rs"]
mod interaction_report;
#[allow(dead_code)]
#[path = "../examples/streaming_inference.rs"]
mod streaming_inference;
#[allow(dead_code)]
#[path = "../examples/synthetic_stream.rs"]
mod synthetic_stream;
#[allow(dead_code)]
#[path = "../examples/text_likelihood.rs"]
mod text_likelihood;

#[test]
fn allocation_posterior_sharpens_with_r() {
    let posts = allocation_posterior::run_example().unwrap();
    for p in &posts {
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    // topic 0 is the one whose excitation peaks right now
    assert!(posts[2][0] > posts[0][0]);
}

#[test]
fn alpha_estimation_finds_the_excited_entry() {
    let alpha = alpha_estimation::run_example().unwrap();
    assert!((alpha[2] - 0.8).abs() < 0.15, "{alpha:?}");
}

#[test]
fn checkpoint_resume_is_exact() {
    assert!(checkpoint_resume::run_example().unwrap());
}

#[test]
fn cli_pipeline_writes_a_report() {
    let table = cli_pipeline::run_example().unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert!(lines[0].starts_with("kernel,theta0,r,"));
    assert_eq!(lines.len(), 2);
}

#[test]
fn curate_corpus_keeps_expected_documents() {
    let (kept, vocab) = curate_corpus::run_example().unwrap();
    assert_eq!(kept, 3);
    assert!(!vocab.is_empty());
}

#[test]
fn experiment_grid_has_one_row_per_cell() {
    let table = experiment_grid::run_example().unwrap();
    assert_eq!(table.lines().count(), 1 + 8);
    assert!(table.lines().skip(1).all(|l| l.contains(",ok,")));
}

#[test]
fn hawkes_intensity_is_a_bump() {
    let curve = hawkes_intensity::run_example().unwrap();
    assert!(curve.iter().all(|&v| v >= 0.0));
    let max = curve.iter().copied().fold(0.0, f64::max);
    assert!(max > curve[0] && max > *curve.last().unwrap());
}

#[test]
fn interaction_report_covers_every_entry() {
    let range = interaction_report::run_example().unwrap();
    assert_eq!(range.len(), 9);
    assert!(range.iter().all(|&v| v >= 0.0) && range.iter().any(|&v| v > 0.0));
}

#[test]
fn streaming_inference_recovers_topics() {
    let (docs, _topics, ari) = streaming_inference::run_example().unwrap();
    assert!(docs > 1000);
    assert!(ari > 0.8, "ARI {ari}");
}

#[test]
fn synthetic_stream_matches_branching_prediction() {
    let (events, predicted) = synthetic_stream::run_example().unwrap();
    assert!((events as f64 - predicted).abs() < 0.15 * predicted);
}

#[test]
fn text_likelihood_prefers_the_matching_topic() {
    let [matching, unrelated, fresh] = text_likelihood::run_example().unwrap();
    assert!(matching > fresh && fresh > unrelated);
}
