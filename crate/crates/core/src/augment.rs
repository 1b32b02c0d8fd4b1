//! Stitched-data augmentation: random permutation of N sequential glosses,
//! speed variation, and schedule expansion for batch dataset generation.
//!
//! All randomness is drawn from a ChaCha8 generator seeded with a 64-bit
//! seed. The window permutation consumes exactly two kinds of draws, in
//! order: one uniform index selecting the window start in
//! `0..=len - window`, then a Fisher-Yates shuffle of the window (for `i`
//! from `window - 1` down to 1, swap position `i` with a uniform index in
//! `0..=i`). Uniform indices come from rejection sampling on `next_u64`
//! (values at or above the largest multiple of the bound are redrawn;
//! bound 1 returns 0 without drawing), so results do not depend on any
//! library's range-sampling internals.

use std::io::{BufReader, Read};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::uniform_index;
use crate::skeleton::PoseSequence;
use crate::stitcher::StitchResult;

/// How `N` is interpreted when permuting gloss order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PermuteMode {
    /// Shuffle one contiguous window of `N` glosses (default).
    #[default]
    Window,
    /// Apply `N` independent adjacent swaps.
    Swaps,
}

/// Whether speed scaling resamples the stitched sequence or rescales the
/// per-gloss durations before stitching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedMode {
    #[default]
    Sequence,
    Durations,
}

/// Sweep definition: every request is expanded to
/// `|permutation_ns| * |speed_scales| * copies` variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentSchedule {
    pub permutation_ns: Vec<usize>,
    pub speed_scales: Vec<f64>,
    pub copies: usize,
    pub seed: u64,
    #[serde(default)]
    pub permute_mode: PermuteMode,
    #[serde(default)]
    pub speed_mode: SpeedMode,
}

impl AugmentSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.permutation_ns.is_empty() || self.speed_scales.is_empty() {
            return Err(Error::InvalidInput(
                "schedule needs at least one N and one speed scale".into(),
            ));
        }
        if self
            .speed_scales
            .iter()
            .any(|&s| !(s.is_finite() && s > 0.0))
        {
            return Err(Error::InvalidInput("speed scales must be positive".into()));
        }
        if self.copies == 0 {
            return Err(Error::InvalidInput("copies must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load(reader: impl Read) -> Result<Self> {
        let schedule: Self = serde_json::from_reader(BufReader::new(reader))
            .map_err(|e| Error::Format(format!("schedule file: {e}")))?;
        schedule.validate()?;
        Ok(schedule)
    }
}

/// Index permutation of `0..len` for the given mode, `N`, and seed.
/// `N == 0` is the identity.
pub fn permutation_indices(len: usize, n: usize, seed: u64, mode: PermuteMode) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..len).collect();
    if n == 0 || len < 2 {
        return indices;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        PermuteMode::Window => {
            let window = n.min(len);
            let start = uniform_index(&mut rng, len - window + 1);
            for i in (1..window).rev() {
                let j = uniform_index(&mut rng, i + 1);
                indices.swap(start + i, start + j);
            }
        }
        PermuteMode::Swaps => {
            for _ in 0..n {
                let i = uniform_index(&mut rng, len - 1);
                indices.swap(i, i + 1);
            }
        }
    }
    indices
}

/// Window-mode gloss permutation: a seeded uniform window of `min(N, len)`
/// glosses is shuffled in place; the gloss multiset is preserved.
pub fn permute_glosses(glosses: &[String], n: usize, seed: u64) -> Vec<String> {
    permutation_indices(glosses.len(), n, seed, PermuteMode::Window)
        .into_iter()
        .map(|i| glosses[i].clone())
        .collect()
}

/// Resamples `poses` to `round(len * scale)` frames; the fps metadata is kept,
/// so the content plays faster or slower. Fails when the rounded length is 0.
pub fn scale_speed(poses: &PoseSequence, scale: f64) -> Result<PoseSequence> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::InvalidScale { scale });
    }
    let target = ((poses.len() as f64) * scale).round() as usize;
    if target == 0 {
        return Err(Error::InvalidScale { scale });
    }
    poses.resample(target)
}

/// [`scale_speed`] over a whole stitch result, remapping its spans onto the
/// new frame grid.
pub fn scale_result(mut result: StitchResult, scale: f64) -> Result<StitchResult> {
    let old_len = result.poses.len();
    result.poses = scale_speed(&result.poses, scale)?;
    let new_len = result.poses.len();
    if new_len != old_len {
        result.remap_spans(old_len, new_len);
    }
    Ok(result)
}

/// One planned variant of a base request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantPlan {
    pub base_index: usize,
    pub base_id: String,
    pub variant_id: String,
    pub n: usize,
    pub scale: f64,
    pub copy: usize,
    pub seed: u64,
}

/// Expands `request_ids` against the schedule:
/// `ids x permutation_ns x speed_scales x copies` variants, in that nesting
/// order. Each variant derives its own seed from
/// `(schedule seed, request id, N, scale, copy)` so reruns reproduce the
/// exact same variant set.
pub fn expand_schedule(request_ids: &[String], schedule: &AugmentSchedule) -> Vec<VariantPlan> {
    let mut plans = Vec::with_capacity(
        request_ids.len()
            * schedule.permutation_ns.len()
            * schedule.speed_scales.len()
            * schedule.copies,
    );
    for (base_index, base_id) in request_ids.iter().enumerate() {
        for &n in &schedule.permutation_ns {
            for &scale in &schedule.speed_scales {
                for copy in 0..schedule.copies {
                    plans.push(VariantPlan {
                        base_index,
                        base_id: base_id.clone(),
                        variant_id: format!("{base_id}.N{n}.s{scale}.c{copy}"),
                        n,
                        scale,
                        copy,
                        seed: derive_seed(schedule.seed, base_id, n, scale, copy),
                    });
                }
            }
        }
    }
    plans
}

/// FNV-1a over the canonical little-endian encoding of the provenance tuple.
/// Stable across platforms and releases by construction.
pub fn derive_seed(base: u64, request_id: &str, n: usize, scale: f64, copy: usize) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(PRIME);
        }
    };
    eat(&base.to_le_bytes());
    eat(request_id.as_bytes());
    eat(&[0xff]);
    eat(&(n as u64).to_le_bytes());
    eat(&scale.to_bits().to_le_bytes());
    eat(&(copy as u64).to_le_bytes());
    hash
}
