//! Welch power-spectral-density estimation and log-log slope fitting.
//!
//! This is the validation oracle for the color-noise generators: the fitted
//! slope of mean Welch log-power against log2(frequency) should be 0, -3 and
//! -6 dB/octave for white, pink and red noise.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::NoiseError;
use crate::signal::Waveform;

/// Welch segment length in samples.
pub const WELCH_SEGMENT: usize = 4096;
/// Hop between segments (50% overlap).
pub const WELCH_HOP: usize = WELCH_SEGMENT / 2;
/// Minimum number of averaged segments required by [`psd_slope`].
pub const MIN_SEGMENTS: usize = 8;

/// Mean Welch periodogram: frequencies and mean power per bin.
pub struct WelchPsd {
    pub freqs_hz: Vec<f64>,
    pub power: Vec<f64>,
}

/// Averages Hann-windowed periodograms over 50%-overlapped segments of
/// [`WELCH_SEGMENT`] samples. Power is unnormalized (slope fitting only
/// cares about shape).
pub fn welch_psd(w: &Waveform) -> Result<WelchPsd, NoiseError> {
    let n = WELCH_SEGMENT;
    if w.len() < n + (MIN_SEGMENTS - 1) * WELCH_HOP {
        return Err(NoiseError::InvalidBand(format!(
            "signal too short for {MIN_SEGMENTS} Welch segments of {n} samples"
        )));
    }
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);

    let bins = n / 2 + 1;
    let mut acc = vec![0.0f64; bins];
    let mut segments = 0usize;
    let mut start = 0;
    while start + n <= w.len() {
        let mut buf: Vec<Complex64> = w.samples()[start..start + n]
            .iter()
            .zip(&window)
            .map(|(&x, &h)| Complex64::new(x * h, 0.0))
            .collect();
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
        segments += 1;
        start += WELCH_HOP;
    }

    let bin_hz = w.sample_rate() as f64 / n as f64;
    Ok(WelchPsd {
        freqs_hz: (0..bins).map(|k| k as f64 * bin_hz).collect(),
        power: acc.iter().map(|&p| p / segments as f64).collect(),
    })
}

/// Least-squares slope of `10*log10(power)` against `log2(frequency)` over
/// `[f_lo, f_hi]`, in dB/octave.
pub fn psd_slope(w: &Waveform, f_lo: f64, f_hi: f64) -> Result<f64, NoiseError> {
    let nyquist = w.sample_rate() as f64 / 2.0;
    if !(f_lo > 0.0 && f_lo < f_hi && f_hi <= nyquist) {
        return Err(NoiseError::InvalidBand(format!(
            "need 0 < f_lo < f_hi <= Nyquist ({nyquist} Hz), got [{f_lo}, {f_hi}]"
        )));
    }
    let psd = welch_psd(w)?;

    let total_peak = psd.power.iter().cloned().fold(0.0f64, f64::max);
    let selected: Vec<(f64, f64)> = psd
        .freqs_hz
        .iter()
        .zip(&psd.power)
        .filter(|(&f, _)| f >= f_lo && f <= f_hi)
        .map(|(&f, &p)| (f, p))
        .collect();
    if selected.is_empty() {
        return Err(NoiseError::InvalidBand(format!(
            "no FFT bins inside [{f_lo}, {f_hi}] Hz"
        )));
    }
    let band_peak = selected.iter().map(|&(_, p)| p).fold(0.0f64, f64::max);
    if band_peak.is_nan() || band_peak <= total_peak * 1e-20 {
        return Err(NoiseError::InvalidBand(
            "no spectral content inside the requested band".into(),
        ));
    }

    // Ordinary least squares on (log2 f, dB power).
    let pts: Vec<(f64, f64)> = selected
        .iter()
        .map(|&(f, p)| (f.log2(), 10.0 * p.log10()))
        .collect();
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(NoiseError::InvalidBand(
            "band too narrow to fit a slope".into(),
        ));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_signal_too_short_for_eight_segments() {
        let w = Waveform::new(vec![0.1; WELCH_SEGMENT * 2], 2000).unwrap();
        assert!(matches!(
            psd_slope(&w, 20.0, 800.0),
            Err(NoiseError::InvalidBand(_))
        ));
    }

    #[test]
    fn rejects_bad_band() {
        let w = crate::noise::gen_white(1 << 15, 2000, 0);
        assert!(psd_slope(&w, 800.0, 20.0).is_err());
        assert!(psd_slope(&w, 20.0, 1500.0).is_err()); // above Nyquist
        assert!(psd_slope(&w, 0.0, 800.0).is_err());
    }

    #[test]
    fn pure_dc_has_no_band_content() {
        let w = Waveform::new(vec![0.7; 1 << 15], 2000).unwrap();
        assert!(matches!(
            psd_slope(&w, 20.0, 800.0),
            Err(NoiseError::InvalidBand(_))
        ));
    }

    #[test]
    fn slope_is_scale_invariant() {
        let w = crate::noise::gen_pink(1 << 15, 2000, 2);
        let doubled = Waveform::new(
            w.samples().iter().map(|&s| 2.0 * s).collect(),
            w.sample_rate(),
        )
        .unwrap();
        let a = psd_slope(&w, 20.0, 800.0).unwrap();
        let b = psd_slope(&doubled, 20.0, 800.0).unwrap();
        assert!((a - b).abs() < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn welch_psd_of_tone_peaks_at_tone_frequency() {
        let rate = 2000u32;
        let n = 1 << 15;
        let samples: Vec<f64> = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * 250.0 * i as f64 / rate as f64).sin())
            .collect();
        let w = Waveform::new(samples, rate).unwrap();
        let psd = welch_psd(&w).unwrap();
        let peak = (0..psd.power.len())
            .max_by(|&a, &b| psd.power[a].partial_cmp(&psd.power[b]).unwrap())
            .unwrap();
        assert!((psd.freqs_hz[peak] - 250.0).abs() < 1.0);
    }
}
