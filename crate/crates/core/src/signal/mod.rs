//! Audio representation, WAV I/O, resampling and pre-processing.
//!
//! Everything downstream of file decode runs in 64-bit floating point; WAV
//! files are the only quantization boundary. The canonical internal sample
//! rate for mixing and feature extraction is [`CANONICAL_RATE_HZ`] (heart
//! sound energy sits below 800 Hz).

mod resample;
pub mod wav;

pub use resample::resample;
pub use wav::{read_wav, write_wav};

use thiserror::Error;

/// Default working sample rate in Hz for mixing and feature extraction.
pub const CANONICAL_RATE_HZ: u32 = 2000;

#[derive(Error, Debug)]
pub enum SignalError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed wav: {0}")]
    Format(String),
    #[error("unsupported codec: {0}")]
    UnsupportedCodec(String),
    #[error("empty signal")]
    EmptySignal,
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("degenerate signal: {0}")]
    Degenerate(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Mono sampled audio. Samples are dimensionless amplitudes with nominal
/// range `[-1, 1]`; values outside that range are legal in memory and only
/// clipped when written to 16-bit PCM.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    /// Validates finiteness of every sample and positivity of the rate.
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self, SignalError> {
        if sample_rate == 0 {
            return Err(SignalError::ZeroSampleRate);
        }
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(SignalError::NonFinite(i));
        }
        Ok(Self { samples, sample_rate })
    }

    /// Internal constructor for samples already known to be finite.
    pub(crate) fn from_validated(samples: Vec<f64>, sample_rate: u32) -> Self {
        debug_assert!(sample_rate > 0);
        debug_assert!(samples.iter().all(|s| s.is_finite()));
        Self { samples, sample_rate }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0f64, |m, &s| m.max(s.abs()))
    }
}

/// Divides every sample by `max|x|` so the output peak is exactly 1.
///
/// Errors with [`SignalError::Degenerate`] on an all-zero input.
pub fn normalize_amplitude(w: &Waveform) -> Result<Waveform, SignalError> {
    let peak = w.peak();
    if peak == 0.0 {
        return Err(SignalError::Degenerate(
            "cannot amplitude-normalize an all-zero signal".into(),
        ));
    }
    let samples = w.samples.iter().map(|&s| s / peak).collect();
    Ok(Waveform::from_validated(samples, w.sample_rate))
}

/// Appends zeros until the waveform holds `target_samples` samples.
pub fn zero_pad(w: &Waveform, target_samples: usize) -> Result<Waveform, SignalError> {
    if target_samples < w.len() {
        return Err(SignalError::InvalidArgument(format!(
            "zero_pad target {} is shorter than signal length {}",
            target_samples,
            w.len()
        )));
    }
    let mut samples = w.samples.clone();
    samples.resize(target_samples, 0.0);
    Ok(Waveform::from_validated(samples, w.sample_rate))
}

/// Splits a waveform into consecutive non-overlapping segments of exactly
/// `segment_seconds`. A trailing remainder of at least `min_keep_seconds` is
/// zero-padded to full length and kept; shorter remainders are dropped.
pub fn segment(
    w: &Waveform,
    segment_seconds: f64,
    min_keep_seconds: f64,
) -> Result<Vec<Waveform>, SignalError> {
    if segment_seconds.is_nan() || segment_seconds <= 0.0 {
        return Err(SignalError::InvalidArgument(
            "segment_seconds must be positive".into(),
        ));
    }
    if min_keep_seconds > segment_seconds {
        return Err(SignalError::InvalidArgument(
            "min_keep_seconds must not exceed segment_seconds".into(),
        ));
    }
    let seg_len = (segment_seconds * w.sample_rate as f64).round() as usize;
    let min_keep = (min_keep_seconds * w.sample_rate as f64).round() as usize;
    if seg_len == 0 {
        return Err(SignalError::InvalidArgument(
            "segment length rounds to zero samples".into(),
        ));
    }

    let mut out = Vec::new();
    let mut start = 0;
    while start + seg_len <= w.len() {
        out.push(Waveform::from_validated(
            w.samples[start..start + seg_len].to_vec(),
            w.sample_rate,
        ));
        start += seg_len;
    }
    let remainder = w.len() - start;
    if remainder >= min_keep && remainder > 0 {
        let mut tail = w.samples[start..].to_vec();
        tail.resize(seg_len, 0.0);
        out.push(Waveform::from_validated(tail, w.sample_rate));
    }
    Ok(out)
}
