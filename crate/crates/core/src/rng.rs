//! Seeded randomness helpers.
//!
//! Every stochastic operation in the crate derives its stream from a ChaCha8
//! generator seeded through `SeedableRng::seed_from_u64` (SplitMix64 key
//! expansion), so datasets and trained models are reproducible from integer
//! seeds. Gaussian and bounded-uniform draws are implemented here rather than
//! pulled from distribution crates so the sample streams are pinned by this
//! crate alone.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 64-bit FNV-1a over a byte string. Used to derive sub-seeds from structured
/// keys so that adding new rows to a dataset never perturbs existing ones.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives a child seed from a parent seed and a textual key.
pub fn derive_seed(parent: u64, key: &str) -> u64 {
    let mut buf = parent.to_le_bytes().to_vec();
    buf.push(b'|');
    buf.extend_from_slice(key.as_bytes());
    fnv1a(&buf)
}

/// Uniform `f64` in `[0, 1)` from the top 53 bits of one `u64` draw.
#[inline]
pub fn uniform_f64(rng: &mut Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, bound)` by rejection sampling (no modulo bias).
pub fn uniform_index(rng: &mut Rng, bound: u64) -> u64 {
    assert!(bound > 0, "uniform_index bound must be positive");
    if bound == 1 {
        return 0;
    }
    // Largest multiple of `bound` that fits in u64.
    let zone = u64::MAX - (u64::MAX % bound) - 1;
    loop {
        let v = rng.next_u64();
        if v <= zone {
            return v % bound;
        }
    }
}

/// Standard Gaussian via Box-Muller on two uniform draws.
///
/// Returns a pair; callers that need single draws should buffer the second
/// value (see [`Gaussian`]).
pub fn gaussian_pair(rng: &mut Rng) -> (f64, f64) {
    // u1 in (0, 1] so the log is finite.
    let u1 = 1.0 - uniform_f64(rng);
    let u2 = uniform_f64(rng);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Buffered standard-Gaussian stream over a ChaCha8 generator.
pub struct Gaussian {
    rng: Rng,
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new(seed: u64) -> Self {
        Self { rng: from_seed(seed), spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = gaussian_pair(&mut self.rng);
        self.spare = Some(b);
        a
    }

    pub fn fill(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.sample()).collect()
    }
}
