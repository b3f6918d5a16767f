//! Resumable snapshots of the particle filter.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{InferenceConfig, Particle};
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "mpdhp-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Everything needed to continue a run after `processed` documents.
///
/// The shared sample bank is not stored: it is regenerated from the
/// configuration's seed. Per-pair likelihood accumulators are rebuilt from
/// the stored features on first use.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config: InferenceConfig,
    pub vocab_size: usize,
    pub processed: usize,
    pub resamples: usize,
    /// Word position of the driver's random stream, as a decimal string.
    pub rng_word_pos: String,
    pub particles: Vec<Particle>,
}

impl Checkpoint {
    pub fn new(
        config: &InferenceConfig,
        vocab_size: usize,
        processed: usize,
        resamples: usize,
        rng_word_pos: u128,
        particles: &[Particle],
    ) -> Self {
        Self {
            format: CHECKPOINT_FORMAT.into(),
            version: CHECKPOINT_VERSION,
            config: config.clone(),
            vocab_size,
            processed,
            resamples,
            rng_word_pos: rng_word_pos.to_string(),
            particles: particles.to_vec(),
        }
    }

    pub fn word_pos(&self) -> Result<u128> {
        self.rng_word_pos
            .parse()
            .map_err(|_| Error::Config(format!("bad rng position `{}`", self.rng_word_pos)))
    }
}

pub fn write_checkpoint(path: &Path, checkpoint: &Checkpoint) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, serde_json::to_vec(checkpoint)?)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let cp: Checkpoint = serde_json::from_slice(&std::fs::read(path)?)?;
    if cp.format != CHECKPOINT_FORMAT || cp.version != CHECKPOINT_VERSION {
        return Err(Error::Format {
            path: path.to_owned(),
            message: format!("unsupported checkpoint {} v{}", cp.format, cp.version),
        });
    }
    if cp.particles.len() != cp.config.particles {
        return Err(Error::Format {
            path: path.to_owned(),
            message: "particle count does not match the configuration".into(),
        });
    }
    cp.word_pos()?;
    Ok(cp)
}
