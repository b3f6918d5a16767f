//! Online topic clustering and interaction-network inference for streams of
//! timestamped short documents.
//!
//! Each incoming document is allocated to a topic by combining a collapsed
//! Dirichlet-Multinomial language model with the intensities of a
//! multivariate Hawkes process built on Gaussian RBF kernels. Intensities
//! are raised to a power `r` that balances temporal against textual
//! evidence. Allocation hypotheses are tracked with a particle filter, and
//! the pairwise excitation weights between topics are estimated online by
//! importance sampling.
//!
//! Modules, in pipeline order:
//!
//! * [`corpus`]: tokenization, vocabulary, curation filters, document streams.
//! * [`lang_model`]: per-topic word counts and the textual likelihood.
//! * [`temporal`]: RBF kernels, kernel presets, Hawkes intensities.
//! * [`inference`]: posterior allocation, SMC, excitation-weight estimation.
//! * [`analytics`]: effective interactions and cluster/strength reports.
//! * [`synthgen`]: ground-truth stream generator for validation.
//! * [`cli`]: the `mpdhp` command (preprocess, synth, run, analyze, report, grid).

pub mod analytics;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod inference;
pub mod io;
pub mod lang_model;
pub mod metrics;
pub mod synthgen;
pub mod temporal;

pub use error::{Error, Result};
