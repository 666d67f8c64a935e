//! Optimiser, regularisation, splitting, the training loop and metrics.

mod adam;
mod config;
mod fit;
mod metrics;
mod regularization;
mod split;

pub use adam::{adam_step, AdamState};
pub use config::{AdamConfig, Objective, Regularization, TrainConfig};
pub use fit::{evaluate, predict, resolve_objective, train, train_observed, EpochLog, Sample, TrainLog};
pub use metrics::{fmt_metric, Confusion, MetricsReport};
pub use regularization::{apply_regularization, near_zero_fraction, reg_penalty};
pub use split::{split_dataset, Split, SplitPart, SplitSpec};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Video,
    Audio,
    Fusion,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Video => "video",
            ModelKind::Audio => "audio",
            ModelKind::Fusion => "fusion",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "video" => Ok(ModelKind::Video),
            "audio" => Ok(ModelKind::Audio),
            "fusion" => Ok(ModelKind::Fusion),
            other => Err(Error::Config(format!("unknown model '{other}' (video, audio, fusion)"))),
        }
    }
}
