//! Synthetic stand-in heart sounds.
//!
//! Each heartbeat cycle carries an S1 event (damped sinusoid near 40 Hz) at
//! the cycle start and an S2 event (near 60 Hz) at 0.3 of the cycle.
//! Abnormal recordings add a band-limited systolic murmur (120-400 Hz)
//! between S1 and S2. The event frequencies, the 0.3-cycle gap and the
//! murmur band are invented parameters chosen so the two classes are
//! separable by construction; these are test stand-ins, not physiological
//! models. Only complete cycles are generated: a 10 s recording at 75 bpm
//! holds floor(10 / 0.8) = 12 cycles and carries no events afterwards.
//! A -80 dB sensor floor keeps every window of the signal strictly
//! non-silent, as real recordings are, so SNR power measurements stay
//! defined everywhere.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::{BaseRecording, DatasetError, HeartClass};
use crate::rng::{self, Gaussian};
use crate::signal::{normalize_amplitude, Waveform};

/// Murmur passband, Hz.
const MURMUR_BAND: (f64, f64) = (120.0, 400.0);
/// S1 onset to S2 onset, as a fraction of the cycle.
const S1_S2_GAP: f64 = 0.3;
/// Sensor-floor amplitude relative to the unit S1 event (-80 dB).
const SENSOR_FLOOR: f64 = 1e-4;

/// Deterministic synthetic heart sound. See the module docs for the shape.
pub fn gen_surrogate_heart_sound(
    class_label: HeartClass,
    duration_s: f64,
    heart_rate_bpm: f64,
    seed: u64,
) -> Result<Waveform, DatasetError> {
    gen_surrogate_at_rate(class_label, duration_s, heart_rate_bpm, 2000, seed)
}

/// [`gen_surrogate_heart_sound`] with an explicit sample rate.
pub fn gen_surrogate_at_rate(
    class_label: HeartClass,
    duration_s: f64,
    heart_rate_bpm: f64,
    rate: u32,
    seed: u64,
) -> Result<Waveform, DatasetError> {
    if duration_s.is_nan() || duration_s <= 0.0 {
        return Err(DatasetError::Recipe("duration must be positive".into()));
    }
    if !(30.0..=200.0).contains(&heart_rate_bpm) {
        return Err(DatasetError::Recipe(format!(
            "heart rate {heart_rate_bpm} bpm out of range [30, 200]"
        )));
    }

    let n = (duration_s * rate as f64).round() as usize;
    let cycle_s = 60.0 / heart_rate_bpm;
    let n_cycles = (duration_s / cycle_s).floor() as usize;

    // Per-recording timbre, drawn unconditionally so a normal and an
    // abnormal surrogate with the same seed share identical S1/S2 events.
    let mut r = rng::from_seed(seed);
    let f_s1 = 36.0 + 8.0 * rng::uniform_f64(&mut r);
    let f_s2 = 55.0 + 10.0 * rng::uniform_f64(&mut r);
    let s2_amp = 0.6 + 0.2 * rng::uniform_f64(&mut r);
    let murmur_amp = 0.30 + 0.10 * rng::uniform_f64(&mut r);
    let murmur_seed = rng::derive_seed(seed, "murmur");

    let mut samples = vec![0.0f64; n];
    let add_damped = |samples: &mut [f64], start_s: f64, freq: f64, amp: f64, tau: f64| {
        let start = (start_s * rate as f64).round() as usize;
        let dur = (0.10 * rate as f64) as usize;
        for i in start..(start + dur).min(samples.len()) {
            let dt = (i - start) as f64 / rate as f64;
            samples[i] += amp * (-dt / tau).exp() * (2.0 * std::f64::consts::PI * freq * dt).sin();
        }
    };

    for k in 0..n_cycles {
        let t0 = k as f64 * cycle_s;
        add_damped(&mut samples, t0, f_s1, 1.0, 0.022);
        add_damped(&mut samples, t0 + S1_S2_GAP * cycle_s, f_s2, s2_amp, 0.016);
    }

    if class_label == HeartClass::Abnormal && n_cycles > 0 {
        let noise = band_noise(n, rate, MURMUR_BAND.0, MURMUR_BAND.1, murmur_seed);
        for k in 0..n_cycles {
            let t0 = k as f64 * cycle_s;
            let m_start = t0 + 0.06;
            let m_end = t0 + S1_S2_GAP * cycle_s;
            let i0 = (m_start * rate as f64).round() as usize;
            let i1 = ((m_end * rate as f64).round() as usize).min(n);
            if i1 <= i0 {
                continue;
            }
            for i in i0..i1 {
                // Crescendo-decrescendo envelope over the systolic window.
                let u = (i - i0) as f64 / (i1 - i0) as f64;
                let env = (std::f64::consts::PI * u).sin();
                samples[i] += murmur_amp * env * noise[i];
            }
        }
    }

    // Identical floor for a normal/abnormal pair sharing a seed.
    let mut floor = Gaussian::new(rng::derive_seed(seed, "floor"));
    for s in samples.iter_mut() {
        *s += SENSOR_FLOOR * floor.sample();
    }

    let w = Waveform::from_validated(samples, rate);
    Ok(normalize_amplitude(&w)?)
}

/// Brick-wall band-passed unit-RMS Gaussian noise.
fn band_noise(n: usize, rate: u32, f_lo: f64, f_hi: f64, seed: u64) -> Vec<f64> {
    let mut spectrum: Vec<Complex64> = Gaussian::new(seed)
        .fill(n)
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spectrum);
    let f1 = rate as f64 / n as f64;
    for (k, bin) in spectrum.iter_mut().enumerate() {
        let f = k.min(n - k) as f64 * f1;
        if !(f_lo..=f_hi).contains(&f) {
            *bin = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let raw: Vec<f64> = spectrum.iter().map(|c| c.re / n as f64).collect();
    let rms = (raw.iter().map(|s| s * s).sum::<f64>() / n as f64).sqrt();
    raw.iter().map(|&s| s / rms.max(1e-300)).collect()
}

/// Durations and types mirroring the standard 16-recording layout: eight
/// normal and eight abnormal bases, two of them short (3.0 s and 2.5 s).
const BASE_LAYOUT: [(u32, HeartClass, &str, f64); 16] = [
    (1, HeartClass::Normal, "Normal", 12.0),
    (2, HeartClass::Normal, "Normal", 10.1),
    (3, HeartClass::Normal, "Normal", 13.8),
    (4, HeartClass::Normal, "Normal", 10.0),
    (5, HeartClass::Normal, "Normal", 3.0),
    (6, HeartClass::Normal, "Normal", 12.8),
    (7, HeartClass::Normal, "Normal", 10.2),
    (8, HeartClass::Normal, "Normal", 15.0),
    (9, HeartClass::Abnormal, "Aortic regurgitation", 12.0),
    (10, HeartClass::Abnormal, "Aortic stenosis", 10.9),
    (11, HeartClass::Abnormal, "Mitral regurgitation", 12.0),
    (12, HeartClass::Abnormal, "Mitral stenosis", 11.2),
    (13, HeartClass::Abnormal, "Mitral valve prolapse", 11.5),
    (14, HeartClass::Abnormal, "Mitral valve prolapse", 2.5),
    (15, HeartClass::Abnormal, "S3", 10.1),
    (16, HeartClass::Abnormal, "S4", 10.0),
];

/// Train-side base ids of the standard split.
pub const PAPER_TRAIN_IDS: [u32; 8] = [1, 3, 6, 8, 9, 11, 12, 15];
/// Test-side base ids of the standard split.
pub const PAPER_TEST_IDS: [u32; 8] = [2, 4, 5, 7, 10, 13, 14, 16];

/// The 16 surrogate bases of the standard recipe, deterministic per seed.
/// Heart rates vary per base within 62-95 bpm.
pub fn paper_surrogate_bases(rate: u32, seed: u64) -> Vec<BaseRecording> {
    BASE_LAYOUT
        .iter()
        .map(|&(id, class, subtype, duration)| {
            let base_seed = rng::derive_seed(seed, &format!("base-{id}"));
            let mut r = rng::from_seed(base_seed);
            let bpm = 62.0 + 33.0 * rng::uniform_f64(&mut r);
            BaseRecording {
                id,
                class_label: class,
                subtype: subtype.to_string(),
                waveform: gen_surrogate_at_rate(class, duration, bpm, rate, base_seed)
                    .expect("layout parameters are in range"),
            }
        })
        .collect()
}

/// Small alternating-class surrogate set for tests and smoke runs.
pub fn surrogate_bases(count: usize, duration_s: f64, rate: u32, seed: u64) -> Vec<BaseRecording> {
    (1..=count as u32)
        .map(|id| {
            let class = if id % 2 == 1 { HeartClass::Normal } else { HeartClass::Abnormal };
            let base_seed = rng::derive_seed(seed, &format!("base-{id}"));
            let mut r = rng::from_seed(base_seed);
            let bpm = 62.0 + 33.0 * rng::uniform_f64(&mut r);
            BaseRecording {
                id,
                class_label: class,
                subtype: format!("surrogate {class}"),
                waveform: gen_surrogate_at_rate(class, duration_s, bpm, rate, base_seed)
                    .expect("bpm drawn in range"),
            }
        })
        .collect()
}
