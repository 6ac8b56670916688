//! Sample-rate conversion by windowed-sinc interpolation.

use super::{SignalError, Waveform};

/// Zero crossings of the (cutoff-scaled) sinc kernel on each side.
const KERNEL_HALF_WIDTH: f64 = 32.0;
const KAISER_BETA: f64 = 8.0;

/// Resamples to `target_rate` with a Kaiser-windowed sinc kernel whose
/// cutoff sits at the lower of the two Nyquist frequencies. Output length is
/// `round(len * target_rate / source_rate)`.
pub fn resample(w: &Waveform, target_rate: u32) -> Result<Waveform, SignalError> {
    if target_rate == 0 {
        return Err(SignalError::ZeroSampleRate);
    }
    if target_rate == w.sample_rate() {
        return Ok(w.clone());
    }

    let src = w.sample_rate() as f64;
    let dst = target_rate as f64;
    let out_len = (w.len() as f64 * dst / src).round() as usize;
    // Cutoff as a fraction of the input Nyquist; < 1 only when decimating.
    let scale = (dst / src).min(1.0);
    let half = KERNEL_HALF_WIDTH / scale;
    let i0_beta = bessel_i0(KAISER_BETA);

    let x = w.samples();
    let mut out = Vec::with_capacity(out_len);
    for m in 0..out_len {
        let t = m as f64 * src / dst;
        let lo = ((t - half).ceil() as i64).max(0) as usize;
        let hi = ((t + half).floor() as i64).min(x.len() as i64 - 1) as usize;
        let mut acc = 0.0;
        for (n, &xn) in x.iter().enumerate().take(hi + 1).skip(lo) {
            let dt = n as f64 - t;
            acc += xn * kernel(dt, scale, half, i0_beta);
        }
        out.push(acc);
    }
    Ok(Waveform::from_validated(out, target_rate))
}

#[inline]
fn kernel(dt: f64, scale: f64, half: f64, i0_beta: f64) -> f64 {
    let u = dt / half;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let window = bessel_i0(KAISER_BETA * (1.0 - u * u).sqrt()) / i0_beta;
    scale * sinc(scale * dt) * window
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = std::f64::consts::PI * x;
        px.sin() / px
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= (half / k) * (half / k);
        sum += term;
        if term < sum * 1e-16 {
            return sum;
        }
        k += 1.0;
    }
}
