//! Time-frequency features: STFT, power/log spectrograms, mel filterbanks
//! and mel spectrograms, plus time-axis averaging for SVM features.
//!
//! Framing is uncentered: frame `m` covers samples `[m*hop, m*hop + win)`
//! and the trailing partial frame is dropped, so
//! `frames = 1 + floor((len - win) / hop)`. The DFT is unnormalized and only
//! bins `0..=win/2` are retained. Log compression is `10*log10(S + eps)`
//! with `eps = 1e-10`, so exact zeros floor at -100 dB.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mat::Mat;
use crate::signal::Waveform;

/// Log-compression floor.
pub const DEFAULT_EPS: f64 = 1e-10;
/// Default number of mel bands.
pub const DEFAULT_N_MELS: usize = 64;

#[derive(Error, Debug)]
pub enum FeatureError {
    #[error("signal too short: {len} samples < window {window}")]
    TooShort { len: usize, window: usize },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("filterbank resolution: {0}")]
    Resolution(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("matrix file format: {0}")]
    FileFormat(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// STFT framing parameters. The window function is a periodic Hann window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StftConfig {
    pub window_len: usize,
    pub hop: usize,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self { window_len: 256, hop: 128 }
    }
}

/// Complex STFT, `[bins x frames]` row-major.
#[derive(Debug, Clone)]
pub struct Stft {
    values: Vec<Complex64>,
    bins: usize,
    frames: usize,
    pub bin_hz: f64,
    pub frame_hop_s: f64,
}

impl Stft {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    #[inline]
    pub fn get(&self, bin: usize, frame: usize) -> Complex64 {
        self.values[bin * self.frames + frame]
    }
}

/// Power spectrogram: squared STFT magnitudes, all entries non-negative.
#[derive(Debug, Clone)]
pub struct Spectrogram {
    pub values: Mat,
    pub bin_hz: f64,
    pub frame_hop_s: f64,
}

/// Which feature a matrix holds; `_avg` kinds are time-averaged vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    LogSpec,
    MelSpec,
    LogSpecAvg,
    MelSpecAvg,
}

impl FeatureKind {
    pub fn is_averaged(self) -> bool {
        matches!(self, FeatureKind::LogSpecAvg | FeatureKind::MelSpecAvg)
    }

    pub fn averaged(self) -> FeatureKind {
        match self {
            FeatureKind::LogSpec | FeatureKind::LogSpecAvg => FeatureKind::LogSpecAvg,
            FeatureKind::MelSpec | FeatureKind::MelSpecAvg => FeatureKind::MelSpecAvg,
        }
    }
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FeatureKind::LogSpec => "log_spec",
            FeatureKind::MelSpec => "mel_spec",
            FeatureKind::LogSpecAvg => "log_spec_avg",
            FeatureKind::MelSpecAvg => "mel_spec_avg",
        };
        f.write_str(s)
    }
}

impl FromStr for FeatureKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "log_spec" => Ok(FeatureKind::LogSpec),
            "mel_spec" => Ok(FeatureKind::MelSpec),
            "log_spec_avg" => Ok(FeatureKind::LogSpecAvg),
            "mel_spec_avg" => Ok(FeatureKind::MelSpecAvg),
            other => Err(format!("unknown feature kind {other:?}")),
        }
    }
}

/// Feature values, `[channels x frames]`, or `[channels x 1]` after
/// time averaging.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Mat,
    pub kind: FeatureKind,
}

impl FeatureMatrix {
    /// Channel values of a time-averaged feature.
    pub fn as_vector(&self) -> Option<Vec<f64>> {
        if self.values.cols() == 1 {
            Some((0..self.values.rows()).map(|r| self.values.get(r, 0)).collect())
        } else {
            None
        }
    }
}

/// Short-time Fourier transform with Hann windowing and no centering.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<Stft, FeatureError> {
    if cfg.window_len == 0 || cfg.hop == 0 || cfg.hop > cfg.window_len {
        return Err(FeatureError::InvalidConfig(format!(
            "need 0 < hop <= window_len, got window {} hop {}",
            cfg.window_len, cfg.hop
        )));
    }
    if w.len() < cfg.window_len {
        return Err(FeatureError::TooShort { len: w.len(), window: cfg.window_len });
    }
    let win = cfg.window_len;
    let frames = 1 + (w.len() - win) / cfg.hop;
    let bins = win / 2 + 1;
    let window: Vec<f64> = (0..win)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / win as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(win);

    let mut values = vec![Complex64::new(0.0, 0.0); bins * frames];
    let mut buf = vec![Complex64::new(0.0, 0.0); win];
    for frame in 0..frames {
        let start = frame * cfg.hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(w.samples()[start + i] * window[i], 0.0);
        }
        fft.process(&mut buf);
        for (bin, &v) in buf.iter().take(bins).enumerate() {
            values[bin * frames + frame] = v;
        }
    }
    Ok(Stft {
        values,
        bins,
        frames,
        bin_hz: w.sample_rate() as f64 / win as f64,
        frame_hop_s: cfg.hop as f64 / w.sample_rate() as f64,
    })
}

/// Elementwise squared magnitude.
pub fn power_spec(x: &Stft) -> Spectrogram {
    let mut values = Mat::zeros(x.bins, x.frames);
    for bin in 0..x.bins {
        for frame in 0..x.frames {
            values.set(bin, frame, x.get(bin, frame).norm_sqr());
        }
    }
    Spectrogram { values, bin_hz: x.bin_hz, frame_hop_s: x.frame_hop_s }
}

/// `10*log10(S + eps)` per entry.
pub fn log_spec(s: &Spectrogram, eps: f64) -> Result<FeatureMatrix, FeatureError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(FeatureError::InvalidConfig("eps must be positive".into()));
    }
    Ok(FeatureMatrix {
        values: s.values.map(|v| 10.0 * (v + eps).log10()),
        kind: FeatureKind::LogSpec,
    })
}

/// `Mel(f) = 2595 * log10(1 + f/700)`.
pub fn mel_scale(f_hz: f64) -> Result<f64, FeatureError> {
    if f_hz < 0.0 {
        return Err(FeatureError::Domain(format!(
            "mel scale undefined for negative frequency {f_hz}"
        )));
    }
    Ok(2595.0 * (1.0 + f_hz / 700.0).log10())
}

/// Inverse of [`mel_scale`].
pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangle normalization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MelNorm {
    /// Each triangle's apex is 1.
    #[default]
    Peak,
    /// Each triangle integrates to 1 over Hz.
    Area,
}

/// Triangular mel filterbank, `[n_mels x bins]`.
#[derive(Debug, Clone)]
pub struct MelFilterbank {
    pub weights: Mat,
    pub f_min: f64,
    pub f_max: f64,
    centers_mel: Vec<f64>,
}

impl MelFilterbank {
    pub fn n_mels(&self) -> usize {
        self.weights.rows()
    }

    pub fn bins(&self) -> usize {
        self.weights.cols()
    }

    /// Triangle center frequencies on the mel axis.
    pub fn centers_mel(&self) -> &[f64] {
        &self.centers_mel
    }
}

/// Builds `n_mels` triangles with corners uniformly spaced on the mel axis
/// between `Mel(f_min)` and `Mel(f_max)`, evaluated at the FFT bin centers.
pub fn mel_filterbank(
    n_mels: usize,
    window_len: usize,
    rate: u32,
    f_min: f64,
    f_max: f64,
    norm: MelNorm,
) -> Result<MelFilterbank, FeatureError> {
    let nyquist = rate as f64 / 2.0;
    if n_mels == 0 {
        return Err(FeatureError::InvalidConfig("n_mels must be >= 1".into()));
    }
    if !(f_min >= 0.0 && f_min < f_max && f_max <= nyquist) {
        return Err(FeatureError::InvalidConfig(format!(
            "need 0 <= f_min < f_max <= Nyquist ({nyquist} Hz), got [{f_min}, {f_max}]"
        )));
    }
    let bins = window_len / 2 + 1;
    let bin_hz = rate as f64 / window_len as f64;

    let mel_lo = mel_scale(f_min)?;
    let mel_hi = mel_scale(f_max)?;
    let corner_mels: Vec<f64> = (0..n_mels + 2)
        .map(|k| mel_lo + (mel_hi - mel_lo) * k as f64 / (n_mels + 1) as f64)
        .collect();
    let corner_hz: Vec<f64> = corner_mels.iter().map(|&m| mel_to_hz(m)).collect();

    let mut weights = Mat::zeros(n_mels, bins);
    for i in 0..n_mels {
        let (lo, center, hi) = (corner_hz[i], corner_hz[i + 1], corner_hz[i + 2]);
        let area_scale = match norm {
            MelNorm::Peak => 1.0,
            MelNorm::Area => 2.0 / (hi - lo),
        };
        let mut nonzero = false;
        for j in 0..bins {
            let f = j as f64 * bin_hz;
            let rising = (f - lo) / (center - lo);
            let falling = (hi - f) / (hi - center);
            let w = rising.min(falling).max(0.0);
            if w > 0.0 {
                nonzero = true;
                weights.set(i, j, w * area_scale);
            }
        }
        if !nonzero {
            return Err(FeatureError::Resolution(format!(
                "filter {i} (centered at {center:.2} Hz) covers no FFT bin; \
                 lower n_mels or use a longer window"
            )));
        }
    }
    Ok(MelFilterbank {
        weights,
        f_min,
        f_max,
        centers_mel: corner_mels[1..=n_mels].to_vec(),
    })
}

/// Applies the filterbank and log-compresses: `10*log10(fb * S + eps)`.
pub fn mel_spec(
    s: &Spectrogram,
    fb: &MelFilterbank,
    eps: f64,
) -> Result<FeatureMatrix, FeatureError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(FeatureError::InvalidConfig("eps must be positive".into()));
    }
    if fb.bins() != s.values.rows() {
        return Err(FeatureError::Dimension(format!(
            "filterbank expects {} bins, spectrogram has {}",
            fb.bins(),
            s.values.rows()
        )));
    }
    let pooled = fb.weights.matmul(&s.values);
    Ok(FeatureMatrix {
        values: pooled.map(|v| 10.0 * (v + eps).log10()),
        kind: FeatureKind::MelSpec,
    })
}

/// Mean across frames per channel; the kind gains its `_avg` suffix.
pub fn time_average(f: &FeatureMatrix) -> Result<FeatureMatrix, FeatureError> {
    if f.kind.is_averaged() {
        return Err(FeatureError::InvalidConfig(
            "feature matrix is already time-averaged".into(),
        ));
    }
    if f.values.cols() == 0 {
        return Err(FeatureError::Empty("no frames to average".into()));
    }
    let means = f.values.row_means();
    let rows = means.len();
    Ok(FeatureMatrix {
        values: Mat::from_vec(rows, 1, means),
        kind: f.kind.averaged(),
    })
}

/// Extraction settings shared by the SVM and CNN paths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub stft: StftConfig,
    pub n_mels: usize,
    pub mel_norm: MelNorm,
    pub eps: f64,
    pub f_min: f64,
    /// Defaults to Nyquist when unset.
    pub f_max: Option<f64>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            n_mels: DEFAULT_N_MELS,
            mel_norm: MelNorm::Peak,
            eps: DEFAULT_EPS,
            f_min: 0.0,
            f_max: None,
        }
    }
}

/// Full pipeline for one waveform: STFT, power, log or mel compression,
/// optional time averaging.
pub fn extract(
    w: &Waveform,
    kind: FeatureKind,
    cfg: &FeatureConfig,
) -> Result<FeatureMatrix, FeatureError> {
    let x = stft(w, &cfg.stft)?;
    let s = power_spec(&x);
    let base = match kind {
        FeatureKind::LogSpec | FeatureKind::LogSpecAvg => log_spec(&s, cfg.eps)?,
        FeatureKind::MelSpec | FeatureKind::MelSpecAvg => {
            let f_max = cfg.f_max.unwrap_or(w.sample_rate() as f64 / 2.0);
            let fb = mel_filterbank(
                cfg.n_mels,
                cfg.stft.window_len,
                w.sample_rate(),
                cfg.f_min,
                f_max,
                cfg.mel_norm,
            )?;
            mel_spec(&s, &fb, cfg.eps)?
        }
    };
    if kind.is_averaged() {
        time_average(&base)
    } else {
        Ok(base)
    }
}

const MATRIX_MAGIC: &[u8; 4] = b"FMX1";
const DTYPE_F64_LE: u32 = 1;

/// Writes a matrix as a 16-byte header (`magic, rows, cols, dtype`) followed
/// by row-major little-endian f64 values.
pub fn save_matrix(path: impl AsRef<Path>, m: &Mat) -> Result<(), FeatureError> {
    let mut f = std::fs::File::create(path.as_ref())?;
    f.write_all(MATRIX_MAGIC)?;
    f.write_all(&(m.rows() as u32).to_le_bytes())?;
    f.write_all(&(m.cols() as u32).to_le_bytes())?;
    f.write_all(&DTYPE_F64_LE.to_le_bytes())?;
    let mut buf = Vec::with_capacity(m.data().len() * 8);
    for &v in m.data() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

/// Reads a matrix written by [`save_matrix`].
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Mat, FeatureError> {
    let mut f = std::fs::File::open(path.as_ref())?;
    let mut header = [0u8; 16];
    f.read_exact(&mut header)?;
    if &header[0..4] != MATRIX_MAGIC {
        return Err(FeatureError::FileFormat("bad magic".into()));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let dtype = u32::from_le_bytes(header[12..16].try_into().unwrap());
    if dtype != DTYPE_F64_LE {
        return Err(FeatureError::FileFormat(format!("unknown dtype {dtype}")));
    }
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes)?;
    if bytes.len() != rows * cols * 8 {
        return Err(FeatureError::FileFormat(format!(
            "expected {} payload bytes, found {}",
            rows * cols * 8,
            bytes.len()
        )));
    }
    let data: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Mat::from_vec(rows, cols, data))
}
