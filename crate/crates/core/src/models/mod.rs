//! Baseline classifiers: a linear SVM over time-averaged features and a
//! three-block CNN over 2-D spectrogram features, both trained from scratch
//! in f64 with deterministic seeding.
//!
//! Label convention everywhere: `-1` normal, `+1` abnormal, matching
//! PhysioNet reference files. Ties at the decision boundary go to normal.

pub mod cnn;
mod container;
pub mod svm;

pub use cnn::{CnnModel, ForwardMode};
pub use container::{load_cnn, load_linear, peek_model_kind, ModelKind};
pub use svm::{svm_train, LinearModel, SvmConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("training diverged: {0}")]
    Divergence(String),
    #[error("model container: {0}")]
    Container(String),
    #[error("unsupported container version {found} (expected {expected})")]
    VersionMismatch { expected: u8, found: u8 },
    #[error("container checksum mismatch")]
    Checksum,
    #[error("architecture mismatch: {0}")]
    Architecture(String),
    #[error("feature kind mismatch: model expects {expected}, got {got}")]
    FeatureKind { expected: String, got: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which parameters stay fixed during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezeMode {
    #[default]
    None,
    /// Convolutional blocks frozen; only the fully connected layers update.
    AllButDense,
}

/// Gradient-training hyperparameters (Adam).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub freeze: FreezeMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            epochs: 10,
            batch_size: 32,
            seed: 0,
            freeze: FreezeMode::None,
        }
    }
}
