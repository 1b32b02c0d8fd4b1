//! Continuous sequence generation: sign retrieval with duration resampling,
//! concatenation with velocity-bounded interpolated transitions, and
//! zero-phase Butterworth motion filtering of the stitched result.

mod filter;

pub use filter::{butterworth_lowpass, design_lowpass, filtfilt, min_filter_len};

use serde::{Deserialize, Serialize};

use crate::dictionary::{Dictionary, EmbeddingTable};
use crate::error::{Error, Result};
use crate::skeleton::{fk_sequence, CanonicalSkeleton, LinearFrame, PoseFrame, PoseSequence};

/// Filter order used by [`stitch`].
pub const FILTER_ORDER: usize = 4;

/// One stitching job: the gloss sentence, optional per-gloss durations in
/// output frames, the low-pass cutoff, and the output frame rate.
///
/// When `durations` is absent, each sign keeps its native dictionary length
/// rescaled to the output rate. `seed` identifies the job for downstream
/// randomized augmentation; stitching itself is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchRequest {
    pub glosses: Vec<String>,
    pub durations: Option<Vec<usize>>,
    pub cutoff_hz: f64,
    pub fps: f64,
    pub seed: u64,
}

impl StitchRequest {
    pub fn new(glosses: Vec<String>, cutoff_hz: f64, fps: f64) -> Self {
        Self {
            glosses,
            durations: None,
            cutoff_hz,
            fps,
            seed: 0,
        }
    }

    pub fn with_durations(mut self, durations: Vec<usize>) -> Self {
        self.durations = Some(durations);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.glosses.is_empty() {
            return Err(Error::InvalidInput("request has no glosses".into()));
        }
        if let Some(durations) = &self.durations {
            if durations.len() != self.glosses.len() {
                return Err(Error::InvalidInput(format!(
                    "{} durations for {} glosses",
                    durations.len(),
                    self.glosses.len()
                )));
            }
            if durations.contains(&0) {
                return Err(Error::InvalidInput("durations must be positive".into()));
            }
        }
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        if !(self.cutoff_hz.is_finite() && self.cutoff_hz > 0.0 && self.cutoff_hz < self.fps / 2.0)
        {
            return Err(Error::NyquistViolation {
                cutoff_hz: self.cutoff_hz,
                fps: self.fps,
            });
        }
        Ok(())
    }
}

/// How transition lengths are derived from boundary motion.
///
/// `boundary_window` is the number of frame pairs averaged on each side of a
/// boundary; the two side velocities combine by max (default) or min, and the
/// transition length `ceil(distance / velocity)` is clamped to
/// `[min_frames, max_frames]`. Static boundaries with a residual gap take
/// `max_frames`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPolicy {
    pub boundary_window: usize,
    pub min_frames: usize,
    pub max_frames: usize,
    pub combine: VelocityCombine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityCombine {
    Max,
    Min,
}

impl Default for TransitionPolicy {
    fn default() -> Self {
        Self {
            boundary_window: 3,
            min_frames: 1,
            max_frames: 12,
            combine: VelocityCombine::Max,
        }
    }
}

impl TransitionPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.boundary_window == 0 {
            return Err(Error::InvalidInput(
                "boundary window must be at least 1".into(),
            ));
        }
        if self.min_frames == 0 || self.min_frames > self.max_frames {
            return Err(Error::InvalidInput(format!(
                "transition bounds {}..{} are invalid",
                self.min_frames, self.max_frames
            )));
        }
        Ok(())
    }
}

/// Planned transition: its length and the per-step displacement bound the
/// plan guarantees. When clamping forces fewer frames than the boundary
/// velocity would allow, the bound is the realized step `distance / (n + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionPlan {
    pub frames: usize,
    pub velocity_bound: f64,
}

const STATIC_EPS: f64 = 1e-9;

fn boundary_velocity(seq: &PoseSequence, window: usize, from_end: bool) -> Option<f64> {
    let pairs = seq.len() - 1;
    if pairs == 0 {
        return None;
    }
    let take = pairs.min(window);
    let range = if from_end {
        (pairs - take)..pairs
    } else {
        0..take
    };
    let sum: f64 = range
        .map(|i| seq.frame_velocity(i).expect("in-range pair"))
        .sum();
    Some(sum / take as f64)
}

/// Plans the number of interpolated frames between the end of `out_seq` and
/// the start of `in_seq` so transition motion stays within the boundary
/// velocities.
pub fn plan_transition(
    out_seq: &PoseSequence,
    in_seq: &PoseSequence,
    policy: &TransitionPolicy,
) -> TransitionPlan {
    let distance = out_seq
        .frames()
        .last()
        .expect("non-empty sequence")
        .mean_distance(&in_seq.frames()[0]);
    let outgoing = boundary_velocity(out_seq, policy.boundary_window, true);
    let incoming = boundary_velocity(in_seq, policy.boundary_window, false);
    let velocity = match (outgoing, incoming, policy.combine) {
        (Some(a), Some(b), VelocityCombine::Max) => a.max(b),
        (Some(a), Some(b), VelocityCombine::Min) => a.min(b),
        (Some(a), None, _) | (None, Some(a), _) => a,
        (None, None, _) => 0.0,
    };
    let frames = if velocity > STATIC_EPS {
        ((distance / velocity).ceil() as usize).clamp(policy.min_frames, policy.max_frames)
    } else if distance > STATIC_EPS {
        policy.max_frames
    } else {
        policy.min_frames
    };
    TransitionPlan {
        frames,
        velocity_bound: velocity.max(distance / (frames + 1) as f64),
    }
}

/// `n` linearly interpolated frames strictly between `a` and `b`: frame `j`
/// (1-based) is `a + (b - a) * j / (n + 1)`.
pub fn interpolate_transition(a: &PoseFrame, b: &PoseFrame, n: usize) -> Vec<PoseFrame> {
    (1..=n)
        .map(|j| a.lerp(b, j as f64 / (n + 1) as f64))
        .collect()
}

/// A requested gloss and what it resolved to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGloss {
    pub requested: String,
    pub matched: String,
    pub similarity: f64,
}

/// Output of the retrieval step: one pose sequence per gloss, already at its
/// requested duration, plus the post-fallback gloss record.
#[derive(Debug, Clone)]
pub struct RetrievedSigns {
    pub sequences: Vec<PoseSequence>,
    pub resolved: Vec<ResolvedGloss>,
}

/// Retrieves each gloss (exact or by embedding fallback), converts the
/// angular entry to poses with the canonical skeleton, and resamples sign `i`
/// to duration `d_i` at the request's frame rate.
pub fn retrieve_signs(
    req: &StitchRequest,
    dict: &Dictionary,
    emb: Option<&EmbeddingTable>,
    skel: &CanonicalSkeleton,
) -> Result<RetrievedSigns> {
    req.validate()?;
    let mut sequences = Vec::with_capacity(req.glosses.len());
    let mut resolved = Vec::with_capacity(req.glosses.len());
    for (position, gloss) in req.glosses.iter().enumerate() {
        let resolution = match (dict.lookup(gloss), emb) {
            (Some(entry), _) => crate::dictionary::Resolution {
                entry,
                similarity: 1.0,
            },
            (None, Some(emb)) => dict.resolve(gloss, emb).map_err(|e| match e {
                Error::UnresolvableGloss { gloss, .. } => Error::UnresolvableGloss {
                    gloss,
                    position: Some(position),
                },
                other => other,
            })?,
            (None, None) => {
                return Err(Error::UnresolvableGloss {
                    gloss: gloss.clone(),
                    position: Some(position),
                })
            }
        };
        let entry = resolution.entry;
        let duration = match &req.durations {
            Some(durations) => durations[position],
            None => native_duration(entry.angles.len(), dict.fps(), req.fps),
        };
        let poses = fk_sequence(&entry.angles, skel)?
            .resample(duration)?
            .with_fps(req.fps)?;
        sequences.push(poses);
        resolved.push(ResolvedGloss {
            requested: gloss.clone(),
            matched: entry.gloss.clone(),
            similarity: resolution.similarity,
        });
    }
    Ok(RetrievedSigns {
        sequences,
        resolved,
    })
}

/// Native entry length rescaled from the dictionary rate to the output rate.
pub fn native_duration(native_len: usize, dict_fps: f64, out_fps: f64) -> usize {
    ((native_len as f64) * out_fps / dict_fps).round().max(1.0) as usize
}

/// Half-open frame range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// A stitched sequence with its per-gloss and transition frame ranges. The
/// two span lists interleave and tile `[0, len)` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StitchResult {
    pub poses: PoseSequence,
    pub gloss_spans: Vec<Span>,
    pub transition_spans: Vec<Span>,
    pub transition_plans: Vec<TransitionPlan>,
    pub resolved_glosses: Vec<ResolvedGloss>,
    pub filtered: bool,
}

impl StitchResult {
    /// Remaps all spans after the sequence was resampled from `old_len` to
    /// `new_len` frames, preserving the tiling.
    pub(crate) fn remap_spans(&mut self, old_len: usize, new_len: usize) {
        let map = |b: usize| -> usize {
            ((b as f64) * (new_len as f64) / (old_len as f64)).round() as usize
        };
        for span in self
            .gloss_spans
            .iter_mut()
            .chain(&mut self.transition_spans)
        {
            span.start = map(span.start);
            span.end = map(span.end);
        }
    }
}

/// Runs retrieval and stitching but skips the motion filter, exposing the
/// raw concatenation; [`stitch`] adds the final filtering pass.
pub fn stitch_unfiltered(
    req: &StitchRequest,
    dict: &Dictionary,
    emb: Option<&EmbeddingTable>,
    skel: &CanonicalSkeleton,
    policy: &TransitionPolicy,
) -> Result<StitchResult> {
    policy.validate()?;
    let retrieved = retrieve_signs(req, dict, emb, skel)?;
    let mut frames: Vec<PoseFrame> = Vec::new();
    let mut gloss_spans = Vec::with_capacity(retrieved.sequences.len());
    let mut transition_spans = Vec::new();
    let mut transition_plans = Vec::new();
    for (i, seq) in retrieved.sequences.iter().enumerate() {
        if i > 0 {
            let plan = plan_transition(&retrieved.sequences[i - 1], seq, policy);
            let start = frames.len();
            frames.extend(interpolate_transition(
                frames.last().expect("previous sign frames"),
                &seq.frames()[0],
                plan.frames,
            ));
            transition_spans.push(Span {
                start,
                end: frames.len(),
            });
            transition_plans.push(plan);
        }
        let start = frames.len();
        frames.extend(seq.frames().iter().cloned());
        gloss_spans.push(Span {
            start,
            end: frames.len(),
        });
    }
    Ok(StitchResult {
        poses: PoseSequence::new(frames, req.fps)?,
        gloss_spans,
        transition_spans,
        transition_plans,
        resolved_glosses: retrieved.resolved,
        filtered: false,
    })
}

/// Full pipeline: retrieval, duration resampling, transition synthesis, and a
/// zero-phase order-4 Butterworth low-pass over the whole concatenation.
/// Deterministic for fixed inputs.
pub fn stitch(
    req: &StitchRequest,
    dict: &Dictionary,
    emb: Option<&EmbeddingTable>,
    skel: &CanonicalSkeleton,
    policy: &TransitionPolicy,
) -> Result<StitchResult> {
    let mut result = stitch_unfiltered(req, dict, emb, skel, policy)?;
    let filtered = result.poses.len() >= min_filter_len(FILTER_ORDER);
    result.poses = butterworth_lowpass(&result.poses, req.cutoff_hz, FILTER_ORDER)?;
    result.filtered = filtered;
    Ok(result)
}
