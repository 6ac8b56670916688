//! Linear SVM trained by deterministic epoch-based subgradient descent.
//!
//! Objective: `(1/2)||w||^2 + c * sum_i hinge(y_i (w.x_i + b))`, i.e. the
//! Pegasos formulation with `lambda = 1/(c*n)` and step `1/(lambda*t)` for
//! the weights. The bias is unregularized and follows a `1/t` schedule.
//! Features are z-scored per dimension with statistics computed on the
//! training data and stored in the model.

use serde::{Deserialize, Serialize};

use super::ModelError;
use crate::features::{FeatureKind, FeatureMatrix};
use crate::mat::Mat;
use crate::rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Hinge-loss weight.
    pub c: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Recorded so predict-time feature mismatch is detectable.
    pub feature_kind: Option<FeatureKind>,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self { c: 1.0, epochs: 50, seed: 0, feature_kind: None }
    }
}

/// Trained linear decision function with stored standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub feature_kind: Option<FeatureKind>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl LinearModel {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Applies the stored z-score to a raw feature vector.
    pub fn standardize(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.dim() {
            return Err(ModelError::Dimension(format!(
                "expected {} features, got {}",
                self.dim(),
                x.len()
            )));
        }
        Ok(x.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| (v - m) / s)
            .collect())
    }

    /// `w . z(x) + b`.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64, ModelError> {
        let z = self.standardize(x)?;
        Ok(self.weights.iter().zip(&z).map(|(&w, &v)| w * v).sum::<f64>() + self.bias)
    }

    /// Label in {-1, +1}; a decision value of exactly 0 maps to normal (-1).
    pub fn predict(&self, x: &[f64]) -> Result<i8, ModelError> {
        Ok(if self.decision_value(x)? > 0.0 { 1 } else { -1 })
    }

    /// Predicts from a time-averaged feature matrix, checking its kind.
    pub fn predict_feature(&self, f: &FeatureMatrix) -> Result<i8, ModelError> {
        if let Some(expected) = self.feature_kind {
            if f.kind != expected {
                return Err(ModelError::FeatureKind {
                    expected: expected.to_string(),
                    got: f.kind.to_string(),
                });
            }
        }
        let x = f.as_vector().ok_or_else(|| {
            ModelError::Shape("svm prediction needs a time-averaged feature vector".into())
        })?;
        self.predict(&x)
    }
}

/// Trains on rows of `x` with labels in {-1, +1}.
pub fn svm_train(x: &Mat, y: &[i8], cfg: &SvmConfig) -> Result<LinearModel, ModelError> {
    let n = x.rows();
    let d = x.cols();
    if y.len() != n {
        return Err(ModelError::Dimension(format!(
            "{n} feature rows but {} labels",
            y.len()
        )));
    }
    if n < 2 {
        return Err(ModelError::DegenerateLabels("need at least two samples".into()));
    }
    if let Some(bad) = y.iter().find(|&&v| v != 1 && v != -1) {
        return Err(ModelError::DegenerateLabels(format!(
            "labels must be -1 or +1, found {bad}"
        )));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(ModelError::DegenerateLabels(
            "training data contains a single class".into(),
        ));
    }

    // Per-dimension z-score from the training data; constant columns get
    // unit scale so they pass through as zeros.
    let mut mean = vec![0.0f64; d];
    for r in 0..n {
        for (j, m) in mean.iter_mut().enumerate() {
            *m += x.get(r, j);
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut std = vec![0.0f64; d];
    for r in 0..n {
        for (j, s) in std.iter_mut().enumerate() {
            let dv = x.get(r, j) - mean[j];
            *s += dv * dv;
        }
    }
    for s in std.iter_mut() {
        *s = (*s / n as f64).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }

    let z = |r: usize, j: usize| (x.get(r, j) - mean[j]) / std[j];

    let lambda = 1.0 / (cfg.c * n as f64);
    let mut w = vec![0.0f64; d];
    let mut b = 0.0f64;
    let mut t = 0u64;
    let mut order: Vec<usize> = (0..n).collect();
    let mut r = rng::from_seed(cfg.seed);

    for _ in 0..cfg.epochs {
        // Fisher-Yates with our own bounded-uniform draws.
        for i in (1..n).rev() {
            let j = rng::uniform_index(&mut r, (i + 1) as u64) as usize;
            order.swap(i, j);
        }
        for &i in &order {
            t += 1;
            let margin =
                y[i] as f64 * ((0..d).map(|j| w[j] * z(i, j)).sum::<f64>() + b);
            let shrink = 1.0 - 1.0 / t as f64;
            for wj in w.iter_mut() {
                *wj *= shrink;
            }
            if margin < 1.0 {
                let eta = 1.0 / (lambda * t as f64);
                for (j, wj) in w.iter_mut().enumerate() {
                    *wj += eta * y[i] as f64 * z(i, j);
                }
                b += y[i] as f64 / t as f64;
            }
        }
    }

    Ok(LinearModel { weights: w, bias: b, feature_kind: cfg.feature_kind, mean, std })
}
