//! Synthetic stand-ins for the recorded noise types.
//!
//! Real movement/internal/ambient noises are user-supplied recordings. These
//! generators exist so the full pipeline and test suite run with zero
//! external data: each sketches the coarse spectral and temporal character
//! of its namesake (band-limited noise, hums, bursts, chirps) and is NOT a
//! substitute for the real sound. All are deterministic per seed and
//! peak-normalized, with a -40 dB noise floor so no output is ever silent.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::rng::{self, Gaussian};
use crate::signal::{normalize_amplitude, Waveform};

pub(super) fn gen_standin(name: &str, n: usize, rate: u32, seed: u64) -> Option<Waveform> {
    assert!(n > 0, "sample count must be positive");
    let mut b = Builder::new(n, rate, seed);
    match name {
        "sensor_movement" => {
            b.burst_noise(10.0, 80.0, 0.05, 0.004, 0.12, 1.0);
            b.burst_noise(10.0, 80.0, 0.45, 0.004, 0.10, 0.8);
        }
        "body_movement" => {
            b.burst_noise(15.0, 120.0, 0.10, 0.08, 0.45, 1.0);
        }
        "deep_breathing" => {
            b.band_noise(100.0, 600.0, 1.0);
            b.am(0.25, 0.9);
        }
        "fast_breathing" => {
            b.band_noise(100.0, 600.0, 1.0);
            b.am(0.8, 0.9);
        }
        "coughing" => {
            b.burst_noise(80.0, 900.0, 0.08, 0.01, 0.25, 1.0);
            b.burst_noise(80.0, 900.0, 0.55, 0.01, 0.20, 0.7);
        }
        "digestive_sound" => {
            b.band_noise(30.0, 150.0, 1.0);
            b.am(6.0, 0.8);
        }
        "talking" => {
            // Amplitude-modulated band-passed noise at a syllabic rate.
            b.band_noise(100.0, 800.0, 1.0);
            b.am(4.0, 0.85);
        }
        "door_open_close" => {
            b.damped_tone(55.0, 0.12, 0.15, 1.0);
            b.burst_noise(100.0, 950.0, 0.12, 0.002, 0.03, 0.8);
        }
        "phone_ringing" => {
            b.tone(440.0, 0.5);
            b.tone(480.0, 0.5);
            b.am(20.0, 0.5);
            b.gate(0.8, 0.4);
        }
        "music" => {
            b.tone(220.0, 0.5);
            b.tone(277.18, 0.35);
            b.tone(329.63, 0.35);
            b.band_noise(80.0, 900.0, 0.1);
            b.am(0.5, 0.5);
        }
        "water_flow" => {
            b.shaped_noise(0.5, 1.0); // 1/sqrt(f) tilt, steady
        }
        "tv" => {
            b.band_noise(100.0, 800.0, 0.8);
            b.am(4.0, 0.6);
            b.tone(310.0, 0.3);
            b.tone(415.3, 0.25);
        }
        "dishwasher" => {
            b.tone(50.0, 0.5);
            b.tone(100.0, 0.3);
            b.tone(150.0, 0.2);
            b.band_noise(200.0, 900.0, 0.7);
            b.am(2.0, 0.5);
        }
        "washing_machine" => {
            b.tone(60.0, 0.4);
            b.thump_train(40.0, 3.0, 0.9);
            b.band_noise(150.0, 700.0, 0.25);
        }
        "kettle" => {
            b.band_noise(200.0, 950.0, 1.0);
            b.ramp(0.3, 1.0);
        }
        "vacuum_cleaner" => {
            b.tone(120.0, 0.7);
            b.tone(240.0, 0.4);
            b.tone(360.0, 0.25);
            b.band_noise(200.0, 900.0, 0.6);
        }
        "dog_barking" => {
            b.bark(0.10, 1.0);
            b.bark(0.50, 0.9);
        }
        "bird_singing" => {
            b.chirp_train(600.0, 900.0, 3.0, 0.12, 1.0);
        }
        _ => return None,
    }
    Some(b.finish())
}

struct Builder {
    n: usize,
    rate: f64,
    seed: u64,
    draws: u64,
    acc: Vec<f64>,
}

impl Builder {
    fn new(n: usize, rate: u32, seed: u64) -> Self {
        Self { n, rate: rate as f64, seed, draws: 0, acc: vec![0.0; n] }
    }

    fn next_gaussian_source(&mut self) -> Gaussian {
        self.draws += 1;
        Gaussian::new(rng::derive_seed(self.seed, &format!("standin-{}", self.draws)))
    }

    fn t(&self, i: usize) -> f64 {
        i as f64 / self.rate
    }

    /// Brick-wall band-passed Gaussian noise, RMS-scaled by `amp`.
    fn band_noise(&mut self, f_lo: f64, f_hi: f64, amp: f64) {
        let shaped = self.filtered_noise(|f| if f >= f_lo && f <= f_hi { 1.0 } else { 0.0 });
        self.mix_rms(&shaped, amp);
    }

    /// Noise with amplitude spectrum `f^-exponent` (like the color shapes).
    fn shaped_noise(&mut self, exponent: f64, amp: f64) {
        let f1 = self.rate / self.n as f64;
        let shaped = self.filtered_noise(|f| f.max(f1).powf(-exponent));
        self.mix_rms(&shaped, amp);
    }

    fn filtered_noise(&mut self, gain: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.n;
        let mut src = self.next_gaussian_source();
        let mut spectrum: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(src.sample(), 0.0))
            .collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut spectrum);
        let f1 = self.rate / n as f64;
        for (k, bin) in spectrum.iter_mut().enumerate() {
            let alias = k.min(n - k);
            *bin *= gain(alias as f64 * f1);
        }
        planner.plan_fft_inverse(n).process(&mut spectrum);
        spectrum.iter().map(|c| c.re / n as f64).collect()
    }

    /// Adds `src` scaled so its RMS is `amp` (no-op on silent sources).
    fn mix_rms(&mut self, src: &[f64], amp: f64) {
        let rms = (src.iter().map(|s| s * s).sum::<f64>() / src.len() as f64).sqrt();
        if rms == 0.0 {
            return;
        }
        for (a, &s) in self.acc.iter_mut().zip(src) {
            *a += s * amp / rms;
        }
    }

    fn tone(&mut self, freq: f64, amp: f64) {
        for i in 0..self.n {
            self.acc[i] += amp * (2.0 * std::f64::consts::PI * freq * self.t(i)).sin();
        }
    }

    /// Multiplies by a raised-cosine tremolo in [1-depth, 1].
    fn am(&mut self, f_mod: f64, depth: f64) {
        for i in 0..self.n {
            let m = 1.0
                - depth * 0.5 * (1.0 + (2.0 * std::f64::consts::PI * f_mod * self.t(i)).cos());
            self.acc[i] *= m;
        }
    }

    /// On/off cadence: `on_s` seconds passing, `off_s` seconds muted to 10%.
    fn gate(&mut self, on_s: f64, off_s: f64) {
        let period = on_s + off_s;
        for i in 0..self.n {
            if self.t(i) % period > on_s {
                self.acc[i] *= 0.1;
            }
        }
    }

    /// Linear intensity ramp from `from` to `to` over the whole clip.
    fn ramp(&mut self, from: f64, to: f64) {
        let n = self.n.max(2) as f64;
        for i in 0..self.n {
            let u = i as f64 / (n - 1.0);
            self.acc[i] *= from + (to - from) * u;
        }
    }

    /// Band-noise burst: attack/decay envelope placed at a fraction of the clip.
    fn burst_noise(&mut self, f_lo: f64, f_hi: f64, at: f64, attack_s: f64, decay_s: f64, amp: f64) {
        let shaped = self.filtered_noise(|f| if f >= f_lo && f <= f_hi { 1.0 } else { 0.0 });
        let rms = (shaped.iter().map(|s| s * s).sum::<f64>() / shaped.len() as f64).sqrt();
        if rms == 0.0 {
            return;
        }
        let start = at * self.n as f64 / self.rate;
        for (i, &s) in shaped.iter().enumerate() {
            let dt = self.t(i) - start;
            let env = burst_env(dt, attack_s, decay_s);
            self.acc[i] += s / rms * env * amp;
        }
    }

    /// Exponentially damped sinusoid starting at a fraction of the clip.
    fn damped_tone(&mut self, freq: f64, decay_s: f64, at: f64, amp: f64) {
        let start = at * self.n as f64 / self.rate;
        for i in 0..self.n {
            let dt = self.t(i) - start;
            if dt >= 0.0 {
                self.acc[i] += amp
                    * (-dt / decay_s).exp()
                    * (2.0 * std::f64::consts::PI * freq * dt).sin();
            }
        }
    }

    /// Rhythmic train of damped low-frequency thumps.
    fn thump_train(&mut self, freq: f64, per_second: f64, amp: f64) {
        let period = 1.0 / per_second;
        for i in 0..self.n {
            let dt = self.t(i) % period;
            self.acc[i] += amp * (-dt / 0.06).exp() * (2.0 * std::f64::consts::PI * freq * dt).sin();
        }
    }

    /// Single bark: short burst with a falling-pitch tone core.
    fn bark(&mut self, at: f64, amp: f64) {
        let start = at * self.n as f64 / self.rate;
        let dur = 0.12;
        for i in 0..self.n {
            let dt = self.t(i) - start;
            if dt >= 0.0 && dt < dur {
                let u = dt / dur;
                let f = 400.0 - 150.0 * u;
                let env = (std::f64::consts::PI * u).sin();
                self.acc[i] += amp * env * (2.0 * std::f64::consts::PI * f * dt).sin();
            }
        }
    }

    /// Repeating rising chirps.
    fn chirp_train(&mut self, f0: f64, f1: f64, per_second: f64, dur: f64, amp: f64) {
        let period = 1.0 / per_second;
        for i in 0..self.n {
            let dt = self.t(i) % period;
            if dt < dur {
                let u = dt / dur;
                let phase = 2.0 * std::f64::consts::PI * (f0 * dt + 0.5 * (f1 - f0) / dur * dt * dt);
                self.acc[i] += amp * (std::f64::consts::PI * u).sin() * phase.sin();
            }
        }
    }

    fn finish(mut self) -> Waveform {
        // -40 dB floor keeps every stand-in strictly non-silent.
        let mut floor_src = self.next_gaussian_source();
        let floor = 0.01;
        for a in self.acc.iter_mut() {
            *a += floor * floor_src.sample();
        }
        let w = Waveform::from_validated(self.acc, self.rate as u32);
        normalize_amplitude(&w).expect("stand-ins always carry a noise floor")
    }
}

fn burst_env(dt: f64, attack_s: f64, decay_s: f64) -> f64 {
    if dt < 0.0 {
        0.0
    } else if dt < attack_s {
        dt / attack_s
    } else {
        (-(dt - attack_s) / decay_s).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_name_yields_none() {
        assert!(gen_standin("mauve", 100, 2000, 0).is_none());
    }

    #[test]
    fn talking_standin_has_syllabic_modulation() {
        let w = gen_standin("talking", 8000, 2000, 3).unwrap();
        // Energy envelope should dip near the AM troughs (4 Hz -> trough
        // every 250 ms at 125 ms offsets).
        let frame = 100; // 50 ms
        let energies: Vec<f64> = w
            .samples()
            .chunks(frame)
            .map(|c| c.iter().map(|s| s * s).sum::<f64>())
            .collect();
        let max = energies.iter().cloned().fold(0.0f64, f64::max);
        let min = energies.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min < max * 0.2, "expected deep modulation, min {min} max {max}");
    }

    #[test]
    fn coughing_standin_is_transient() {
        let w = gen_standin("coughing", 2000, 2000, 3).unwrap();
        // Last 10% of the clip should be much quieter than the loudest 10%.
        let n = w.len();
        let tail: f64 = w.samples()[n - n / 10..].iter().map(|s| s * s).sum();
        let total: f64 = w.samples().iter().map(|s| s * s).sum();
        assert!(tail < total * 0.05, "tail {tail} total {total}");
    }

    #[test]
    fn vacuum_standin_has_motor_line() {
        let w = gen_standin("vacuum_cleaner", 1 << 14, 2000, 5).unwrap();
        let n = w.len();
        let mut buf: Vec<Complex64> = w
            .samples()
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let f1 = 2000.0 / n as f64;
        let peak = (1..n / 2)
            .max_by(|&a, &b| buf[a].norm().partial_cmp(&buf[b].norm()).unwrap())
            .unwrap();
        let peak_hz = peak as f64 * f1;
        assert!((peak_hz - 120.0).abs() < 2.0, "dominant line at {peak_hz} Hz");
    }
}
