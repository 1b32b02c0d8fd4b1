//! Deterministic random-draw helpers on top of ChaCha8.
//!
//! Every randomized feature in this crate derives its draws from a
//! `ChaCha8Rng` seeded with a 64-bit seed, through the two primitives below,
//! so outputs are reproducible across platforms and releases.

use rand_chacha::rand_core::RngCore;
use rand_chacha::ChaCha8Rng;

/// Uniform index in `0..bound` by rejection sampling on `next_u64`.
///
/// `bound == 1` returns 0 without consuming a draw. Otherwise values at or
/// above the largest multiple of `bound` are rejected and redrawn.
pub(crate) fn uniform_index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    assert!(bound >= 1, "uniform_index bound must be at least 1");
    if bound == 1 {
        return 0;
    }
    let bound = bound as u64;
    let zone = (u64::MAX / bound) * bound;
    loop {
        let v = rng.next_u64();
        if v < zone {
            return (v % bound) as usize;
        }
    }
}

/// Uniform f64 in [0, 1) using the top 53 bits of one draw.
pub(crate) fn uniform_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform f64 in [lo, hi).
pub(crate) fn uniform_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * uniform_f64(rng)
}
