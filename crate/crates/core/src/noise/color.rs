//! Color-noise generators.
//!
//! White noise is i.i.d. Gaussian. Pink and red noise are produced by
//! scaling the white spectrum by `1/sqrt(f)` and `1/f` respectively, giving
//! power densities of exactly `1/f` (-3 dB/octave) and `1/f^2`
//! (-6 dB/octave). The DC bin copies bin 1's scale so nothing divides by
//! zero. All outputs are peak-normalized.

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::rng::Gaussian;
use crate::signal::{normalize_amplitude, Waveform};

/// Seeded Gaussian white noise, peak-normalized.
pub fn gen_white(n: usize, rate: u32, seed: u64) -> Waveform {
    assert!(n > 0, "sample count must be positive");
    let samples = Gaussian::new(seed).fill(n);
    let w = Waveform::from_validated(samples, rate);
    normalize_amplitude(&w).expect("gaussian draw is never all-zero")
}

/// Pink noise: power density `1/f`, -3 dB/octave.
pub fn gen_pink(n: usize, rate: u32, seed: u64) -> Waveform {
    gen_shaped(n, rate, seed, 0.5)
}

/// Red (Brownian) noise: power density `1/f^2`, -6 dB/octave.
pub fn gen_red(n: usize, rate: u32, seed: u64) -> Waveform {
    gen_shaped(n, rate, seed, 1.0)
}

/// Shapes white noise so its amplitude spectrum falls as `f^-exponent`.
fn gen_shaped(n: usize, rate: u32, seed: u64, exponent: f64) -> Waveform {
    assert!(n > 0, "sample count must be positive");
    let white = Gaussian::new(seed).fill(n);

    let mut planner = FftPlanner::new();
    let mut spectrum: Vec<Complex64> =
        white.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut spectrum);

    let f1 = rate as f64 / n as f64;
    for (k, bin) in spectrum.iter_mut().enumerate() {
        // Mirror bins carry the same |f|; equal real scale factors keep the
        // spectrum Hermitian, so the inverse transform stays real.
        let alias = k.min(n - k);
        let f = if alias == 0 { f1 } else { alias as f64 * f1 };
        *bin *= f.powf(-exponent);
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);

    let samples: Vec<f64> = spectrum.iter().map(|c| c.re / n as f64).collect();
    let w = Waveform::from_validated(samples, rate);
    normalize_amplitude(&w).expect("shaped noise is never all-zero")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::psd_slope;
    use crate::rng::Gaussian;

    #[test]
    fn generators_are_deterministic() {
        for (a, b) in [
            (gen_white(4096, 2000, 9), gen_white(4096, 2000, 9)),
            (gen_pink(4096, 2000, 9), gen_pink(4096, 2000, 9)),
            (gen_red(4096, 2000, 9), gen_red(4096, 2000, 9)),
        ] {
            assert_eq!(a.samples(), b.samples());
        }
        assert_ne!(
            gen_white(4096, 2000, 9).samples(),
            gen_white(4096, 2000, 10).samples()
        );
    }

    #[test]
    fn outputs_are_peak_normalized() {
        for w in [
            gen_white(8192, 2000, 3),
            gen_pink(8192, 2000, 3),
            gen_red(8192, 2000, 3),
        ] {
            assert!((w.peak() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn raw_gaussian_mean_shrinks_with_n() {
        // CLT bound on the pre-normalization draw.
        for seed in 0..5u64 {
            let n = 1 << 16;
            let xs = Gaussian::new(seed).fill(n);
            let mean = xs.iter().sum::<f64>() / n as f64;
            assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "seed {seed} mean {mean}");
        }
    }

    #[test]
    fn fitted_slopes_match_color_definitions() {
        let n = 1 << 18;
        let white = psd_slope(&gen_white(n, 2000, 1), 20.0, 800.0).unwrap();
        let pink = psd_slope(&gen_pink(n, 2000, 1), 20.0, 800.0).unwrap();
        let red = psd_slope(&gen_red(n, 2000, 1), 20.0, 800.0).unwrap();
        assert!(white.abs() < 0.5, "white slope {white}");
        assert!((pink + 3.0).abs() < 0.5, "pink slope {pink}");
        assert!((red + 6.0).abs() < 0.5, "red slope {red}");
    }

    #[test]
    fn slopes_are_strictly_ordered_per_seed() {
        let n = 1 << 16;
        for seed in 0..5u64 {
            let white = psd_slope(&gen_white(n, 2000, seed), 20.0, 800.0).unwrap();
            let pink = psd_slope(&gen_pink(n, 2000, seed), 20.0, 800.0).unwrap();
            let red = psd_slope(&gen_red(n, 2000, seed), 20.0, 800.0).unwrap();
            assert!(white > pink && pink > red, "seed {seed}: {white} {pink} {red}");
        }
    }

    #[test]
    fn pink_noise_has_equal_energy_per_octave() {
        // Direct FFT band-energy oracle, independent of the Welch estimator.
        let n = 1 << 18;
        let rate = 2000u32;
        let w = gen_pink(n, rate, 4);
        let mut buf: Vec<rustfft::num_complex::Complex64> = w
            .samples()
            .iter()
            .map(|&x| rustfft::num_complex::Complex64::new(x, 0.0))
            .collect();
        rustfft::FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let band_energy = |lo: f64, hi: f64| -> f64 {
            let f1 = rate as f64 / n as f64;
            (1..n / 2)
                .filter(|&k| {
                    let f = k as f64 * f1;
                    f >= lo && f < hi
                })
                .map(|k| buf[k].norm_sqr())
                .sum()
        };
        let ratio = band_energy(50.0, 100.0) / band_energy(100.0, 200.0);
        assert!((ratio - 1.0).abs() < 0.2, "octave ratio {ratio}");
    }
}
