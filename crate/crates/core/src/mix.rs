//! Additive mixing of noise into clean signals at an exact target SNR.
//!
//! SNR is defined as `10*log10(P_signal / P_scaled_noise)` with power taken
//! as the mean square of samples. For short noises placed at a random
//! offset, powers are measured over the noise-active window only, so a one
//! second cough at "SNR 0" is locally at SNR 0 rather than deafening. The
//! clean signal is expected to be amplitude-normalized already; no
//! re-normalization happens after mixing (clipping is handled at WAV write).

use thiserror::Error;

use crate::rng;
use crate::signal::Waveform;

#[derive(Error, Debug)]
pub enum MixError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate signal: {0}")]
    Degenerate(String),
    #[error("placement error: {0}")]
    Placement(String),
}

/// Where the noise goes relative to the clean signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Placement {
    /// Noise spans the whole recording (long-duration noises).
    FullOverlap,
    /// Noise starts at a seeded uniform offset (short-duration noises).
    RandomOffset { seed: u64 },
}

/// How a length mismatch between noise and clean signal is resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoopPolicy {
    /// Repeat the noise end-to-end (no crossfade), then truncate.
    Tile,
    /// Truncate only; a noise shorter than required is an error.
    Crop,
}

#[derive(Debug, Clone)]
pub struct MixRequest {
    pub clean: Waveform,
    pub noise: Waveform,
    pub snr_db: f64,
    pub placement: Placement,
    pub loop_policy: LoopPolicy,
}

#[derive(Debug, Clone)]
pub struct MixResult {
    pub mixed: Waveform,
    /// Linear gain applied to the noise.
    pub gain: f64,
    /// Start of the noise-active window in the clean signal.
    pub offset_samples: usize,
    /// Length of the noise-active window.
    pub active_samples: usize,
    /// SNR re-measured post-hoc from `mixed - clean` over the active window.
    pub measured_snr_db: f64,
}

/// Mean of squared samples over `[start, start + len)`.
pub fn measure_power(w: &Waveform, start: usize, len: usize) -> Result<f64, MixError> {
    if len == 0 {
        return Err(MixError::InvalidArgument("empty power window".into()));
    }
    let end = start
        .checked_add(len)
        .filter(|&e| e <= w.len())
        .ok_or_else(|| {
            MixError::InvalidArgument(format!(
                "window [{start}, {}) out of bounds for length {}",
                start.saturating_add(len),
                w.len()
            ))
        })?;
    let sum: f64 = w.samples()[start..end].iter().map(|s| s * s).sum();
    Ok(sum / len as f64)
}

/// Gain `g` such that `10*log10(p_signal / (g^2 * p_noise)) == snr_db`.
pub fn compute_gain(p_signal: f64, p_noise: f64, snr_db: f64) -> Result<f64, MixError> {
    if p_signal.is_nan() || p_noise.is_nan() || p_signal <= 0.0 || p_noise <= 0.0 {
        return Err(MixError::Degenerate(
            "signal and noise powers must be positive".into(),
        ));
    }
    if !snr_db.is_finite() {
        return Err(MixError::InvalidArgument("snr_db must be finite".into()));
    }
    Ok((p_signal / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt())
}

/// Mixes noise into the clean signal at the requested SNR.
pub fn mix_at_snr(req: &MixRequest) -> Result<MixResult, MixError> {
    if req.clean.sample_rate() != req.noise.sample_rate() {
        return Err(MixError::InvalidArgument(format!(
            "sample rate mismatch: clean {} Hz vs noise {} Hz",
            req.clean.sample_rate(),
            req.noise.sample_rate()
        )));
    }
    if req.clean.is_empty() || req.noise.is_empty() {
        return Err(MixError::Degenerate("clean and noise must be non-empty".into()));
    }

    match req.placement {
        Placement::FullOverlap => mix_full_overlap(req),
        Placement::RandomOffset { seed } => mix_random_offset(req, seed),
    }
}

fn mix_full_overlap(req: &MixRequest) -> Result<MixResult, MixError> {
    let len = req.clean.len();
    let noise = fit_to_length(&req.noise, len, req.loop_policy)?;
    finish_mix(req, &noise, 0, len)
}

fn mix_random_offset(req: &MixRequest, seed: u64) -> Result<MixResult, MixError> {
    let mut noise_samples = req.noise.samples().to_vec();
    if noise_samples.len() > req.clean.len() {
        match req.loop_policy {
            LoopPolicy::Crop => noise_samples.truncate(req.clean.len()),
            LoopPolicy::Tile => {
                return Err(MixError::Placement(format!(
                    "noise ({} samples) longer than clean signal ({} samples) and cropping is disallowed",
                    noise_samples.len(),
                    req.clean.len()
                )))
            }
        }
    }
    let noise = Waveform::from_validated(noise_samples, req.noise.sample_rate());
    let span = (req.clean.len() - noise.len()) as u64;
    let mut r = rng::from_seed(seed);
    let offset = rng::uniform_index(&mut r, span + 1) as usize;
    finish_mix(req, &noise, offset, noise.len())
}

fn finish_mix(
    req: &MixRequest,
    noise: &Waveform,
    offset: usize,
    active: usize,
) -> Result<MixResult, MixError> {
    let p_signal = measure_power(&req.clean, offset, active)?;
    let p_noise = measure_power(noise, 0, active)?;
    let gain = compute_gain(p_signal, p_noise, req.snr_db)?;

    let mut mixed = req.clean.samples().to_vec();
    for (i, &ns) in noise.samples()[..active].iter().enumerate() {
        mixed[offset + i] += gain * ns;
    }
    let mixed = Waveform::from_validated(mixed, req.clean.sample_rate());

    // Re-measure from the actual output rather than echoing the target.
    let residual_power = mixed.samples()[offset..offset + active]
        .iter()
        .zip(&req.clean.samples()[offset..offset + active])
        .map(|(&m, &c)| (m - c) * (m - c))
        .sum::<f64>()
        / active as f64;
    if residual_power == 0.0 {
        return Err(MixError::Degenerate(
            "scaled noise vanished entirely; snr_db is too large".into(),
        ));
    }
    let measured_snr_db = 10.0 * (p_signal / residual_power).log10();

    Ok(MixResult {
        mixed,
        gain,
        offset_samples: offset,
        active_samples: active,
        measured_snr_db,
    })
}

fn fit_to_length(noise: &Waveform, len: usize, policy: LoopPolicy) -> Result<Waveform, MixError> {
    if noise.len() == len {
        return Ok(noise.clone());
    }
    match policy {
        LoopPolicy::Tile => {
            let samples: Vec<f64> = noise.samples().iter().cycle().take(len).copied().collect();
            Ok(Waveform::from_validated(samples, noise.sample_rate()))
        }
        LoopPolicy::Crop => {
            if noise.len() < len {
                return Err(MixError::Placement(format!(
                    "noise ({} samples) shorter than required length {} and tiling is disallowed",
                    noise.len(),
                    len
                )));
            }
            Ok(Waveform::from_validated(
                noise.samples()[..len].to_vec(),
                noise.sample_rate(),
            ))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::gen_white;
    use crate::rng::Gaussian;

    fn sine(freq: f64, rate: u32, n: usize) -> Waveform {
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        Waveform::new(samples, rate).unwrap()
    }

    #[test]
    fn power_of_constant() {
        let w = Waveform::new(vec![0.5; 100], 2000).unwrap();
        assert_eq!(measure_power(&w, 0, 100).unwrap(), 0.25);
    }

    #[test]
    fn power_of_unit_sine_over_whole_periods() {
        // 100 Hz at 2000 Hz: 20 samples per period, 50 periods.
        let w = sine(100.0, 2000, 1000);
        let p = measure_power(&w, 0, 1000).unwrap();
        assert!((p - 0.5).abs() < 1e-12, "power {p}");
    }

    #[test]
    fn power_scales_quadratically() {
        let mut g = Gaussian::new(1);
        let xs = g.fill(500);
        let w = Waveform::new(xs.clone(), 2000).unwrap();
        let w2 = Waveform::new(xs.iter().map(|&x| 2.0 * x).collect(), 2000).unwrap();
        let p = measure_power(&w, 0, 500).unwrap();
        let p2 = measure_power(&w2, 0, 500).unwrap();
        assert!((p2 - 4.0 * p).abs() < 1e-12 * p.max(1.0));
    }

    #[test]
    fn power_rejects_bad_windows() {
        let w = Waveform::new(vec![0.1; 10], 100).unwrap();
        assert!(measure_power(&w, 0, 0).is_err());
        assert!(measure_power(&w, 8, 5).is_err());
    }

    #[test]
    fn gain_closed_forms() {
        assert_eq!(compute_gain(1.0, 1.0, 0.0).unwrap(), 1.0);
        let g = compute_gain(1.0, 1.0, 10.0).unwrap();
        assert!((g - 10f64.powf(-0.5)).abs() < 1e-15, "gain {g}");
        let g = compute_gain(4.0, 1.0, 0.0).unwrap();
        assert!((g - 2.0).abs() < 1e-15, "gain {g}");
    }

    #[test]
    fn gain_rejects_zero_powers() {
        assert!(compute_gain(0.0, 1.0, 0.0).is_err());
        assert!(compute_gain(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn huge_snr_leaves_signal_nearly_untouched() {
        let clean = sine(100.0, 2000, 4000);
        let req = MixRequest {
            clean: clean.clone(),
            noise: gen_white(4000, 2000, 5),
            snr_db: 200.0,
            placement: Placement::FullOverlap,
            loop_policy: LoopPolicy::Tile,
        };
        let out = mix_at_snr(&req).unwrap();
        let max_diff = out
            .mixed
            .samples()
            .iter()
            .zip(clean.samples())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(max_diff < 1e-8, "max diff {max_diff}");
    }

    #[test]
    fn equal_power_mix_at_zero_snr_doubles_signal() {
        let clean = sine(100.0, 2000, 4000);
        let req = MixRequest {
            clean: clean.clone(),
            noise: clean.clone(),
            snr_db: 0.0,
            placement: Placement::FullOverlap,
            loop_policy: LoopPolicy::Tile,
        };
        let out = mix_at_snr(&req).unwrap();
        assert!((out.gain - 1.0).abs() < 1e-12);
        for (m, c) in out.mixed.samples().iter().zip(clean.samples()) {
            assert!((m - 2.0 * c).abs() < 1e-12);
        }
    }

    #[test]
    fn random_offset_is_deterministic() {
        let clean = sine(80.0, 2000, 20000);
        let noise = gen_white(2000, 2000, 7);
        let mk = || MixRequest {
            clean: clean.clone(),
            noise: noise.clone(),
            snr_db: 5.0,
            placement: Placement::RandomOffset { seed: 99 },
            loop_policy: LoopPolicy::Crop,
        };
        let a = mix_at_snr(&mk()).unwrap();
        let b = mix_at_snr(&mk()).unwrap();
        assert_eq!(a.offset_samples, b.offset_samples);
        assert_eq!(a.mixed.samples(), b.mixed.samples());
    }

    #[test]
    fn measured_snr_matches_target() {
        let clean = sine(90.0, 2000, 24000);
        for (i, &snr) in [-10.0, -5.0, 0.0, 12.5, 40.0].iter().enumerate() {
            let full = MixRequest {
                clean: clean.clone(),
                noise: gen_white(24000, 2000, i as u64),
                snr_db: snr,
                placement: Placement::FullOverlap,
                loop_policy: LoopPolicy::Tile,
            };
            let out = mix_at_snr(&full).unwrap();
            assert!(
                (out.measured_snr_db - snr).abs() <= 0.05,
                "full overlap snr {snr}: measured {}",
                out.measured_snr_db
            );

            let short = MixRequest {
                clean: clean.clone(),
                noise: gen_white(2000, 2000, 100 + i as u64),
                snr_db: snr,
                placement: Placement::RandomOffset { seed: 7 + i as u64 },
                loop_policy: LoopPolicy::Crop,
            };
            let out = mix_at_snr(&short).unwrap();
            assert!(
                (out.measured_snr_db - snr).abs() <= 0.05,
                "random offset snr {snr}: measured {}",
                out.measured_snr_db
            );
        }
    }

    #[test]
    fn active_window_difference_is_scaled_noise() {
        let clean = sine(70.0, 2000, 16000);
        let noise = gen_white(1500, 2000, 3);
        let req = MixRequest {
            clean: clean.clone(),
            noise: noise.clone(),
            snr_db: 3.0,
            placement: Placement::RandomOffset { seed: 11 },
            loop_policy: LoopPolicy::Crop,
        };
        let out = mix_at_snr(&req).unwrap();
        let off = out.offset_samples;
        for i in 0..out.active_samples {
            let diff = out.mixed.samples()[off + i] - clean.samples()[off + i];
            let expected = out.gain * noise.samples()[i];
            assert!((diff - expected).abs() <= 1e-12);
        }
        // Outside the window the signal is untouched bit-for-bit.
        for i in 0..off {
            assert_eq!(out.mixed.samples()[i], clean.samples()[i]);
        }
        for i in off + out.active_samples..clean.len() {
            assert_eq!(out.mixed.samples()[i], clean.samples()[i]);
        }
    }

    #[test]
    fn offsets_are_uniform() {
        // Chi-square over 10 equal bins; 10^4 draws. Critical value for
        // p = 0.001 at 9 degrees of freedom is 27.877.
        let clean = sine(60.0, 2000, 11000);
        let noise = gen_white(1000, 2000, 1);
        let span = 10000usize;
        let mut counts = [0usize; 10];
        for seed in 0..10_000u64 {
            let req = MixRequest {
                clean: clean.clone(),
                noise: noise.clone(),
                snr_db: 0.0,
                placement: Placement::RandomOffset { seed },
                loop_policy: LoopPolicy::Crop,
            };
            let out = mix_at_snr(&req).unwrap();
            assert!(out.offset_samples <= span);
            let bin = (out.offset_samples * 10 / (span + 1)).min(9);
            counts[bin] += 1;
        }
        let expected = 1000.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - expected;
                d * d / expected
            })
            .sum();
        assert!(chi2 < 27.877, "chi-square {chi2}, counts {counts:?}");
    }

    #[test]
    fn tiling_repeats_noise_without_crossfade() {
        let noise = Waveform::new(vec![1.0, -1.0, 0.5], 2000).unwrap();
        let tiled = fit_to_length(&noise, 7, LoopPolicy::Tile).unwrap();
        assert_eq!(tiled.samples(), &[1.0, -1.0, 0.5, 1.0, -1.0, 0.5, 1.0]);
    }

    #[test]
    fn crop_policy_rejects_short_noise_on_full_overlap() {
        let clean = sine(100.0, 2000, 4000);
        let req = MixRequest {
            clean,
            noise: gen_white(100, 2000, 2),
            snr_db: 0.0,
            placement: Placement::FullOverlap,
            loop_policy: LoopPolicy::Crop,
        };
        assert!(matches!(mix_at_snr(&req), Err(MixError::Placement(_))));
    }

    #[test]
    fn long_noise_with_tile_policy_errors_on_random_offset() {
        let clean = sine(100.0, 2000, 1000);
        let req = MixRequest {
            clean,
            noise: gen_white(2000, 2000, 2),
            snr_db: 0.0,
            placement: Placement::RandomOffset { seed: 1 },
            loop_policy: LoopPolicy::Tile,
        };
        assert!(matches!(mix_at_snr(&req), Err(MixError::Placement(_))));
    }

    #[test]
    fn rate_mismatch_is_rejected() {
        let req = MixRequest {
            clean: sine(100.0, 2000, 1000),
            noise: gen_white(1000, 4000, 2),
            snr_db: 0.0,
            placement: Placement::FullOverlap,
            loop_policy: LoopPolicy::Tile,
        };
        assert!(matches!(mix_at_snr(&req), Err(MixError::InvalidArgument(_))));
    }
}
