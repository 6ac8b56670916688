//! End-to-end experiment orchestration: load a dataset manifest, extract
//! per-segment features, train a classifier, and predict on the test split.
//!
//! Pre-processing order per recording: resample to the working rate, split
//! into fixed-length segments (trailing remainders of at least
//! `min_keep_seconds` are zero-padded and kept), then amplitude-normalize
//! each segment. The evaluation unit is the segment; recording-level
//! majority voting is available but off by default.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{
    load_physionet, DatasetError, DatasetManifest, ManifestRow, Split,
};
use crate::features::{
    extract, FeatureConfig, FeatureError, FeatureKind, FeatureMatrix,
};
use crate::mat::Mat;
use crate::models::{
    svm_train, CnnModel, FreezeMode, LinearModel, ModelError, SvmConfig, TrainConfig,
};
use crate::report::{Prediction, ReportError};
use crate::rng;
use crate::signal::{normalize_amplitude, read_wav, resample, segment, SignalError};

#[derive(Error, Debug)]
pub enum ExperimentError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureBase {
    Log,
    Mel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Svm,
    Cnn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    #[default]
    Segment,
    Recording,
}

fn default_min_keep() -> f64 {
    2.0
}
fn default_sample_rate() -> u32 {
    crate::signal::CANONICAL_RATE_HZ
}
fn default_n_mels() -> usize {
    crate::features::DEFAULT_N_MELS
}
fn default_svm_c() -> f64 {
    1.0
}
fn default_svm_epochs() -> usize {
    50
}
fn default_learning_rate() -> f64 {
    0.001
}
fn default_epochs() -> usize {
    10
}
fn default_batch_size() -> usize {
    32
}
fn default_pretrain_epochs() -> usize {
    60
}

/// One experiment: dataset, features, classifier and training protocol.
/// Deserializable from the JSON config files the CLI accepts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub manifest: PathBuf,
    pub feature: FeatureBase,
    pub model: ClassifierKind,
    /// Defaults to 10 s for SVM models and 5 s for CNN models.
    #[serde(default)]
    pub segment_seconds: Option<f64>,
    #[serde(default = "default_min_keep")]
    pub min_keep_seconds: f64,
    #[serde(default = "default_sample_rate")]
    pub sample_rate: u32,
    #[serde(default = "default_n_mels")]
    pub n_mels: usize,
    #[serde(default = "default_svm_c")]
    pub svm_c: f64,
    #[serde(default = "default_svm_epochs")]
    pub svm_epochs: usize,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    /// PhysioNet-format directory for CNN pre-training; when set, the main
    /// training phase runs with convolutional parameters frozen.
    #[serde(default)]
    pub pretrain_dir: Option<PathBuf>,
    #[serde(default = "default_pretrain_epochs")]
    pub pretrain_epochs: usize,
    #[serde(default)]
    pub aggregation: Aggregation,
}

impl ExperimentConfig {
    pub fn new(manifest: impl Into<PathBuf>, feature: FeatureBase, model: ClassifierKind) -> Self {
        Self {
            manifest: manifest.into(),
            feature,
            model,
            segment_seconds: None,
            min_keep_seconds: default_min_keep(),
            sample_rate: default_sample_rate(),
            n_mels: default_n_mels(),
            svm_c: default_svm_c(),
            svm_epochs: default_svm_epochs(),
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            batch_size: default_batch_size(),
            pretrain_dir: None,
            pretrain_epochs: default_pretrain_epochs(),
            aggregation: Aggregation::default(),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn segment_seconds(&self) -> f64 {
        self.segment_seconds.unwrap_or(match self.model {
            ClassifierKind::Svm => 10.0,
            ClassifierKind::Cnn => 5.0,
        })
    }

    pub fn feature_kind(&self) -> FeatureKind {
        match (self.feature, self.model) {
            (FeatureBase::Log, ClassifierKind::Svm) => FeatureKind::LogSpecAvg,
            (FeatureBase::Mel, ClassifierKind::Svm) => FeatureKind::MelSpecAvg,
            (FeatureBase::Log, ClassifierKind::Cnn) => FeatureKind::LogSpec,
            (FeatureBase::Mel, ClassifierKind::Cnn) => FeatureKind::MelSpec,
        }
    }

    pub fn feature_config(&self) -> FeatureConfig {
        FeatureConfig { n_mels: self.n_mels, ..FeatureConfig::default() }
    }
}

/// One evaluation unit: a segment's features plus its manifest join key.
#[derive(Debug, Clone)]
pub struct Sample {
    pub recording_id: u32,
    pub label: i8,
    pub features: FeatureMatrix,
    /// Source recording duration before segmentation.
    pub duration_s: f64,
}

#[derive(Debug)]
pub struct PreparedData {
    pub train: Vec<Sample>,
    pub test: Vec<Sample>,
    pub manifest: DatasetManifest,
}

/// Extracts per-segment features for every manifest row. WAV paths resolve
/// relative to the manifest's directory.
pub fn prepare(cfg: &ExperimentConfig) -> Result<PreparedData, ExperimentError> {
    prepare_filtered(cfg, None)
}

/// [`prepare`] restricted to one split (the other side stays empty).
pub fn prepare_filtered(
    cfg: &ExperimentConfig,
    only: Option<Split>,
) -> Result<PreparedData, ExperimentError> {
    let manifest = DatasetManifest::load_csv(&cfg.manifest)?;
    let base_dir = cfg
        .manifest
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let kind = cfg.feature_kind();
    let feature_cfg = cfg.feature_config();

    let samples: Vec<(Split, Vec<Sample>)> = manifest
        .rows()
        .par_iter()
        .filter(|row| only.is_none_or(|s| row.split == s))
        .map(|row| {
            let segs = row_samples(row, &base_dir, cfg, kind, &feature_cfg)?;
            Ok::<_, ExperimentError>((row.split, segs))
        })
        .collect::<Result<_, _>>()?;

    let mut train = Vec::new();
    let mut test = Vec::new();
    for (split, segs) in samples {
        match split {
            Split::Train => train.extend(segs),
            Split::Test => test.extend(segs),
        }
    }
    Ok(PreparedData { train, test, manifest })
}

fn row_samples(
    row: &ManifestRow,
    base_dir: &Path,
    cfg: &ExperimentConfig,
    kind: FeatureKind,
    feature_cfg: &FeatureConfig,
) -> Result<Vec<Sample>, ExperimentError> {
    let wav = read_wav(base_dir.join(&row.path))?;
    let wav = resample(&wav, cfg.sample_rate)?;
    let duration_s = wav.duration_seconds();
    let segments = segment(&wav, cfg.segment_seconds(), cfg.min_keep_seconds)?;
    segments
        .iter()
        .map(|seg| {
            let normalized = normalize_amplitude(seg)?;
            let features = extract(&normalized, kind, feature_cfg)?;
            Ok(Sample {
                recording_id: row.recording_id,
                label: row.class_label.label_value(),
                features,
                duration_s,
            })
        })
        .collect()
}

/// A trained classifier of either family.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)] // CnnModel's payload already lives on the heap
pub enum TrainedModel {
    Svm(LinearModel),
    Cnn(CnnModel),
}

impl TrainedModel {
    pub fn predict(&self, features: &FeatureMatrix) -> Result<i8, ExperimentError> {
        match self {
            TrainedModel::Svm(m) => Ok(m.predict_feature(features)?),
            TrainedModel::Cnn(m) => Ok(m.predict(&features.values)?),
        }
    }
}

/// Result of [`train_model`], with per-phase epoch losses for logging.
#[derive(Debug)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub pretrain_losses: Vec<f64>,
    pub train_losses: Vec<f64>,
    /// Names of parameter tensors held fixed during the main phase.
    pub frozen: Vec<&'static str>,
}

/// Trains the configured classifier on the prepared training samples.
/// For CNNs with a `pretrain_dir`, runs the two-phase protocol: pre-train
/// with everything trainable, then fine-tune with convolutional parameters
/// frozen.
pub fn train_model(
    prepared: &PreparedData,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<TrainOutcome, ExperimentError> {
    if prepared.train.is_empty() {
        return Err(ExperimentError::Config("training split is empty".into()));
    }
    match cfg.model {
        ClassifierKind::Svm => {
            let dim = prepared.train[0].features.values.rows();
            let mut data = Vec::with_capacity(prepared.train.len() * dim);
            let mut labels = Vec::with_capacity(prepared.train.len());
            for s in &prepared.train {
                let v = s.features.as_vector().ok_or_else(|| {
                    ExperimentError::Config(
                        "svm training needs time-averaged features".into(),
                    )
                })?;
                data.extend(v);
                labels.push(s.label);
            }
            let x = Mat::from_vec(prepared.train.len(), dim, data);
            let svm_cfg = SvmConfig {
                c: cfg.svm_c,
                epochs: cfg.svm_epochs,
                seed,
                feature_kind: Some(cfg.feature_kind()),
            };
            Ok(TrainOutcome {
                model: TrainedModel::Svm(svm_train(&x, &labels, &svm_cfg)?),
                pretrain_losses: Vec::new(),
                train_losses: Vec::new(),
                frozen: Vec::new(),
            })
        }
        ClassifierKind::Cnn => {
            let shape = &prepared.train[0].features.values;
            let mut model =
                CnnModel::init(shape.rows(), shape.cols(), rng::derive_seed(seed, "init"))?;
            model.set_feature_kind(Some(cfg.feature_kind()));

            let mut freeze = FreezeMode::None;
            let mut pretrain_losses = Vec::new();
            if let Some(dir) = &cfg.pretrain_dir {
                let pretrain_data = physionet_samples(dir, cfg)?;
                let pre_cfg = TrainConfig {
                    learning_rate: cfg.learning_rate,
                    epochs: cfg.pretrain_epochs,
                    batch_size: cfg.batch_size,
                    seed: rng::derive_seed(seed, "pretrain"),
                    freeze: FreezeMode::None,
                };
                pretrain_losses = model.train(&pretrain_data, &pre_cfg)?;
                freeze = FreezeMode::AllButDense;
            }

            let data: Vec<(Mat, i8)> = prepared
                .train
                .iter()
                .map(|s| (s.features.values.clone(), s.label))
                .collect();
            let train_cfg = TrainConfig {
                learning_rate: cfg.learning_rate,
                epochs: cfg.epochs,
                batch_size: cfg.batch_size,
                seed: rng::derive_seed(seed, "train"),
                freeze,
            };
            let train_losses = model.train(&data, &train_cfg)?;
            let frozen: Vec<&'static str> = crate::models::cnn::frozen_tensor_indices(freeze)
                .iter()
                .map(|&i| crate::models::cnn::TENSOR_NAMES[i])
                .collect();
            Ok(TrainOutcome {
                model: TrainedModel::Cnn(model),
                pretrain_losses,
                train_losses,
                frozen,
            })
        }
    }
}

/// Segments and featurizes a PhysioNet-format directory for pre-training.
pub fn physionet_samples(
    dir: &Path,
    cfg: &ExperimentConfig,
) -> Result<Vec<(Mat, i8)>, ExperimentError> {
    let kind = cfg.feature_kind();
    let feature_cfg = cfg.feature_config();
    let recordings = load_physionet(dir)?;
    if recordings.is_empty() {
        return Err(ExperimentError::Config(format!(
            "no usable recordings in {}",
            dir.display()
        )));
    }
    let mut out = Vec::new();
    for rec in &recordings {
        let wav = resample(&rec.waveform, cfg.sample_rate)?;
        for seg in segment(&wav, cfg.segment_seconds(), cfg.min_keep_seconds)? {
            let normalized = normalize_amplitude(&seg)?;
            let features = extract(&normalized, kind, &feature_cfg)?;
            out.push((features.values, rec.class_label.label_value()));
        }
    }
    Ok(out)
}

/// Predicts every test sample; applies recording-level majority voting when
/// configured.
pub fn evaluate_model(
    model: &TrainedModel,
    prepared: &PreparedData,
    cfg: &ExperimentConfig,
) -> Result<Vec<Prediction>, ExperimentError> {
    if prepared.test.is_empty() {
        return Err(ExperimentError::Config("test split is empty".into()));
    }
    let predictions: Vec<Prediction> = prepared
        .test
        .iter()
        .map(|s| {
            Ok(Prediction {
                recording_id: s.recording_id,
                predicted: model.predict(&s.features)?,
                truth: s.label,
                duration_s: Some(s.duration_s),
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    Ok(match cfg.aggregation {
        Aggregation::Segment => predictions,
        Aggregation::Recording => crate::report::aggregate_majority(&predictions),
    })
}

/// Train + evaluate once with the given seed, on pre-extracted features.
pub fn run_prepared(
    prepared: &PreparedData,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<Prediction>, ExperimentError> {
    let outcome = train_model(prepared, cfg, seed)?;
    evaluate_model(&outcome.model, prepared, cfg)
}

/// Full single-shot run: prepare, train, evaluate.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<Vec<Prediction>, ExperimentError> {
    let prepared = prepare(cfg)?;
    run_prepared(&prepared, cfg, seed)
}
