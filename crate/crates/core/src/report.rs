//! Evaluation metrics and faceted robustness reports.
//!
//! Accuracy is `(TP+TN)/total` and recall is `TP/(TP+FN)` with the abnormal
//! class as positive (for the normal class the roles are relabeled first).
//! Undefined metrics (zero support, empty inputs) raise errors instead of
//! returning 0 so facet means never silently absorb them. Facet groups are
//! ordered by ascending mean accuracy, ties broken lexicographically.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{fmt_f64, DatasetManifest, HeartClass, SHORT_SIGNAL_THRESHOLD_S};
use crate::rng;

#[derive(Error, Debug)]
pub enum ReportError {
    #[error("length mismatch: {predictions} predictions vs {truths} truths")]
    LengthMismatch { predictions: usize, truths: usize },
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error("join error: {0}")]
    Join(String),
    #[error("inconsistent repeats: {0}")]
    InconsistentRepeats(String),
    #[error("repeat {index} failed: {source}")]
    Repeat {
        index: usize,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("invalid label {0}; expected -1 or +1")]
    BadLabel(i8),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Counts with the abnormal class as positive.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn from_predictions(predictions: &[i8], truths: &[i8]) -> Result<Self, ReportError> {
        if predictions.len() != truths.len() {
            return Err(ReportError::LengthMismatch {
                predictions: predictions.len(),
                truths: truths.len(),
            });
        }
        if predictions.is_empty() {
            return Err(ReportError::EmptyInput("no predictions".into()));
        }
        let mut cm = ConfusionMatrix::default();
        for (&p, &t) in predictions.iter().zip(truths) {
            for v in [p, t] {
                if v != 1 && v != -1 {
                    return Err(ReportError::BadLabel(v));
                }
            }
            match (p > 0, t > 0) {
                (true, true) => cm.tp += 1,
                (true, false) => cm.fp += 1,
                (false, false) => cm.tn += 1,
                (false, true) => cm.fn_ += 1,
            }
        }
        Ok(cm)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.tn += other.tn;
        self.fn_ += other.fn_;
    }

    pub fn accuracy(&self) -> Result<f64, ReportError> {
        if self.total() == 0 {
            return Err(ReportError::EmptyInput("empty confusion matrix".into()));
        }
        Ok((self.tp + self.tn) as f64 / self.total() as f64)
    }

    /// `TP/(TP+FN)` for the chosen positive class.
    pub fn recall(&self, positive: HeartClass) -> Result<f64, ReportError> {
        let (tp, fn_) = match positive {
            HeartClass::Abnormal => (self.tp, self.fn_),
            HeartClass::Normal => (self.tn, self.fp),
        };
        if tp + fn_ == 0 {
            return Err(ReportError::UndefinedMetric(format!(
                "no {positive} examples in the evaluation set"
            )));
        }
        Ok(tp as f64 / (tp + fn_) as f64)
    }

    /// Swaps the class roles (normal becomes positive).
    pub fn relabeled(&self) -> ConfusionMatrix {
        ConfusionMatrix { tp: self.tn, fp: self.fn_, tn: self.tp, fn_: self.fp }
    }
}

/// One model output joined back to its manifest row by `recording_id`.
/// `duration_s` is the source recording's duration (pre-segmentation),
/// needed only for the signal-duration facet.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub recording_id: u32,
    pub predicted: i8,
    pub truth: i8,
    pub duration_s: Option<f64>,
}

/// Dimension to break accuracy down by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Facet {
    NoiseType,
    NoiseGrouping,
    NoiseDuration,
    SnrDb,
    SignalDuration,
    Overall,
}

impl Facet {
    pub const ALL: [Facet; 6] = [
        Facet::NoiseType,
        Facet::NoiseGrouping,
        Facet::NoiseDuration,
        Facet::SnrDb,
        Facet::SignalDuration,
        Facet::Overall,
    ];
}

impl fmt::Display for Facet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Facet::NoiseType => "noise_type",
            Facet::NoiseGrouping => "noise_grouping",
            Facet::NoiseDuration => "noise_duration",
            Facet::SnrDb => "snr_db",
            Facet::SignalDuration => "signal_duration",
            Facet::Overall => "overall",
        })
    }
}

impl FromStr for Facet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "noise_type" => Ok(Facet::NoiseType),
            "noise_grouping" => Ok(Facet::NoiseGrouping),
            "noise_duration" => Ok(Facet::NoiseDuration),
            "snr_db" => Ok(Facet::SnrDb),
            "signal_duration" => Ok(Facet::SignalDuration),
            "overall" => Ok(Facet::Overall),
            other => Err(format!("unknown facet {other:?}")),
        }
    }
}

/// Per-group aggregates; std fields are 0 when repeats == 1 (single-sample
/// convention).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub key: String,
    pub n: usize,
    pub accuracy: f64,
    pub recall_normal: f64,
    pub recall_abnormal: f64,
    pub accuracy_std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FacetReport {
    pub facet: Facet,
    pub groups: Vec<GroupStats>,
    pub repeats: usize,
}

impl FacetReport {
    pub fn group(&self, key: &str) -> Option<&GroupStats> {
        self.groups.iter().find(|g| g.key == key)
    }
}

fn group_key(
    facet: Facet,
    row: &crate::dataset::ManifestRow,
    pred: &Prediction,
) -> Result<String, ReportError> {
    Ok(match facet {
        Facet::NoiseType => row.noise_name.clone(),
        Facet::NoiseGrouping => row.noise_grouping.to_string(),
        Facet::NoiseDuration => row.noise_duration_class.to_string(),
        Facet::SnrDb => fmt_f64(row.snr_db),
        Facet::SignalDuration => {
            let d = pred.duration_s.ok_or_else(|| {
                ReportError::Join(format!(
                    "prediction for recording {} carries no duration; \
                     the signal_duration facet needs one",
                    pred.recording_id
                ))
            })?;
            if d < SHORT_SIGNAL_THRESHOLD_S { "short".into() } else { "long".into() }
        }
        Facet::Overall => "all".into(),
    })
}

/// Groups predictions by the facet column and computes per-group metrics.
pub fn facet_breakdown(
    predictions: &[Prediction],
    manifest: &DatasetManifest,
    facet: Facet,
) -> Result<FacetReport, ReportError> {
    facet_breakdown_repeated(std::slice::from_ref(&predictions.to_vec()), manifest, facet)
}

/// Multi-repeat breakdown: per-cell mean and sample (n-1) standard
/// deviation across repeats. Every repeat must cover the same groups with
/// the same sizes.
pub fn facet_breakdown_repeated(
    per_repeat: &[Vec<Prediction>],
    manifest: &DatasetManifest,
    facet: Facet,
) -> Result<FacetReport, ReportError> {
    if per_repeat.is_empty() {
        return Err(ReportError::EmptyInput("no repeats".into()));
    }
    let by_id: HashMap<u32, &crate::dataset::ManifestRow> =
        manifest.rows().iter().map(|r| (r.recording_id, r)).collect();

    // group key -> per-repeat confusion matrices
    let mut cms: HashMap<String, Vec<ConfusionMatrix>> = HashMap::new();
    for (repeat_idx, predictions) in per_repeat.iter().enumerate() {
        if predictions.is_empty() {
            return Err(ReportError::EmptyInput(format!("repeat {repeat_idx} has no predictions")));
        }
        let mut grouped: HashMap<String, (Vec<i8>, Vec<i8>)> = HashMap::new();
        for pred in predictions {
            let row = by_id.get(&pred.recording_id).ok_or_else(|| {
                ReportError::Join(format!(
                    "prediction references recording {} which is not in the manifest",
                    pred.recording_id
                ))
            })?;
            let key = group_key(facet, row, pred)?;
            let entry = grouped.entry(key).or_default();
            entry.0.push(pred.predicted);
            entry.1.push(pred.truth);
        }
        for (key, (preds, truths)) in grouped {
            let cm = ConfusionMatrix::from_predictions(&preds, &truths)?;
            cms.entry(key).or_default().push(cm);
        }
    }

    let repeats = per_repeat.len();
    let mut groups = Vec::with_capacity(cms.len());
    for (key, mats) in cms {
        if mats.len() != repeats {
            return Err(ReportError::InconsistentRepeats(format!(
                "group {key:?} appears in {} of {repeats} repeats",
                mats.len()
            )));
        }
        let n = mats[0].total() as usize;
        if mats.iter().any(|m| m.total() as usize != n) {
            return Err(ReportError::InconsistentRepeats(format!(
                "group {key:?} changes size across repeats"
            )));
        }
        let accuracies: Vec<f64> =
            mats.iter().map(|m| m.accuracy()).collect::<Result<_, _>>()?;
        let recalls_n: Vec<f64> =
            mats.iter().map(|m| m.recall(HeartClass::Normal)).collect::<Result<_, _>>()?;
        let recalls_a: Vec<f64> =
            mats.iter().map(|m| m.recall(HeartClass::Abnormal)).collect::<Result<_, _>>()?;
        groups.push(GroupStats {
            key,
            n,
            accuracy: mean(&accuracies),
            recall_normal: mean(&recalls_n),
            recall_abnormal: mean(&recalls_a),
            accuracy_std: sample_std(&accuracies),
        });
    }
    groups.sort_by(|a, b| {
        a.accuracy
            .partial_cmp(&b.accuracy)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.key.cmp(&b.key))
    });
    Ok(FacetReport { facet, groups, repeats })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n-1); 0 for a single sample.
fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Majority vote per recording id; exact ties go to normal. The returned
/// predictions keep one row per recording in first-appearance order.
pub fn aggregate_majority(predictions: &[Prediction]) -> Vec<Prediction> {
    let mut order: Vec<u32> = Vec::new();
    let mut votes: HashMap<u32, (i64, i8, Option<f64>)> = HashMap::new();
    for p in predictions {
        let entry = votes.entry(p.recording_id).or_insert_with(|| {
            order.push(p.recording_id);
            (0, p.truth, p.duration_s)
        });
        entry.0 += p.predicted as i64;
    }
    order
        .into_iter()
        .map(|id| {
            let (sum, truth, duration) = votes[&id];
            Prediction {
                recording_id: id,
                predicted: if sum > 0 { 1 } else { -1 },
                truth,
                duration_s: duration,
            }
        })
        .collect()
}

/// Runs an experiment `n_repeats` times with derived per-repeat seeds and
/// aggregates one report per requested facet. Training failures are
/// reported with their repeat index attached.
pub fn repeat_experiment<F, E>(
    n_repeats: usize,
    master_seed: u64,
    mut run: F,
    manifest: &DatasetManifest,
    facets: &[Facet],
) -> Result<Vec<FacetReport>, ReportError>
where
    F: FnMut(u64) -> Result<Vec<Prediction>, E>,
    E: std::error::Error + Send + Sync + 'static,
{
    if n_repeats == 0 {
        return Err(ReportError::EmptyInput("n_repeats must be >= 1".into()));
    }
    let mut per_repeat = Vec::with_capacity(n_repeats);
    for i in 0..n_repeats {
        let seed = rng::derive_seed(master_seed, &format!("repeat-{i}"));
        let predictions = run(seed)
            .map_err(|e| ReportError::Repeat { index: i, source: Box::new(e) })?;
        per_repeat.push(predictions);
    }
    facets
        .iter()
        .map(|&facet| facet_breakdown_repeated(&per_repeat, manifest, facet))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Serializes a report. CSV schema:
/// `facet,group,n,accuracy,recall_normal,recall_abnormal,accuracy_std`;
/// JSON mirrors it. Values are rounded to 6 decimals at serialization only.
pub fn emit_report(
    r: &FacetReport,
    format: ReportFormat,
    path: impl AsRef<Path>,
) -> Result<(), ReportError> {
    match format {
        ReportFormat::Csv => {
            let mut out = String::from(
                "facet,group,n,accuracy,recall_normal,recall_abnormal,accuracy_std\n",
            );
            for g in &r.groups {
                out.push_str(&format!(
                    "{},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                    r.facet, g.key, g.n, g.accuracy, g.recall_normal, g.recall_abnormal,
                    g.accuracy_std
                ));
            }
            std::fs::write(path.as_ref(), out)?;
        }
        ReportFormat::Json => {
            let groups: Vec<serde_json::Value> = r
                .groups
                .iter()
                .map(|g| {
                    serde_json::json!({
                        "group": g.key,
                        "n": g.n,
                        "accuracy": round6(g.accuracy),
                        "recall_normal": round6(g.recall_normal),
                        "recall_abnormal": round6(g.recall_abnormal),
                        "accuracy_std": round6(g.accuracy_std),
                    })
                })
                .collect();
            let doc = serde_json::json!({
                "facet": r.facet.to_string(),
                "repeats": r.repeats,
                "groups": groups,
            });
            std::fs::write(path.as_ref(), serde_json::to_string_pretty(&doc)?)?;
        }
    }
    Ok(())
}

/// Parses a CSV report produced by [`emit_report`].
pub fn read_report_csv(path: impl AsRef<Path>) -> Result<FacetReport, ReportError> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let mut facet: Option<Facet> = None;
    let mut groups = Vec::new();
    for record in reader.records() {
        let record = record?;
        let f = Facet::from_str(&record[0]).map_err(ReportError::Join)?;
        facet = Some(f);
        groups.push(GroupStats {
            key: record[1].to_string(),
            n: record[2].parse().map_err(|_| ReportError::Join("bad n".into()))?,
            accuracy: record[3].parse().map_err(|_| ReportError::Join("bad accuracy".into()))?,
            recall_normal: record[4]
                .parse()
                .map_err(|_| ReportError::Join("bad recall_normal".into()))?,
            recall_abnormal: record[5]
                .parse()
                .map_err(|_| ReportError::Join("bad recall_abnormal".into()))?,
            accuracy_std: record[6]
                .parse()
                .map_err(|_| ReportError::Join("bad accuracy_std".into()))?,
        });
    }
    Ok(FacetReport {
        facet: facet.unwrap_or(Facet::Overall),
        groups,
        repeats: 1,
    })
}
