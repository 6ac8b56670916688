//! Heart-sound robustness benchmarking toolkit.
//!
//! The crate builds noise-contaminated phonocardiogram datasets under precise
//! control (noise type, duration, placement, SNR), extracts spectrogram
//! features, trains baseline classifiers, and produces faceted robustness
//! reports quantifying how each degradation dimension affects accuracy.
//!
//! Pipeline overview:
//!
//! ```text
//! clean bases ──┐
//!               ├─ mix at target SNR ─► wav files + manifest.csv
//! noise catalog ┘                               │
//!                         segment / normalize / STFT / mel
//!                                               │
//!                             SVM or CNN ─► predictions ─► facet reports
//! ```
//!
//! Modules follow the pipeline: [`signal`] (waveforms, WAV I/O, resampling,
//! pre-processing), [`noise`] (color-noise synthesis and the noise catalog),
//! [`mix`] (SNR-exact additive mixing), [`dataset`] (recipe execution and
//! manifests), [`features`] (STFT / log- / mel-spectrograms), [`models`]
//! (linear SVM and a small CNN trained with Adam), [`report`] (metrics and
//! faceted breakdowns), [`experiment`] (train + evaluate orchestration).

pub mod dataset;
pub mod experiment;
pub mod features;
pub mod mat;
pub mod mix;
pub mod models;
pub mod noise;
pub mod report;
pub mod rng;
pub mod signal;

pub use mat::Mat;
pub use signal::Waveform;
