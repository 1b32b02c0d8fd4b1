//! Synthesis of continuous sign-language skeleton-pose sequences from a
//! dictionary of isolated signs.
//!
//! The pipeline retrieves each gloss from a joint-angle dictionary (with
//! embedding-based fallback for out-of-vocabulary glosses), converts entries
//! to 3D poses with a fixed-proportion canonical skeleton, resamples each
//! sign to its requested duration, joins signs with velocity-bounded linear
//! transitions, and smooths the result with a zero-phase Butterworth low-pass
//! filter. On top of that sit gloss-order and speed augmentations for
//! mass-producing pretraining datasets, plus BLEU/ROUGE scoring utilities for
//! the downstream translation experiments.
//!
//! Batch drivers in [`batch`] run many requests in parallel (rayon, behind
//! the default `parallel` feature) over shared immutable inputs; everything
//! else is pure functions, deterministic for fixed inputs and seeds.

pub mod augment;
pub mod batch;
pub mod dictionary;
pub mod error;
pub mod geom;
pub mod metrics;
mod rng;
pub mod skeleton;
pub mod sspk;
pub mod stitcher;
pub mod synth;

pub use dictionary::{CoverageReport, DictEntry, Dictionary, EmbeddingTable};
pub use error::{Error, Result};
pub use metrics::{bleu, rouge_l, score_report, Corpus, ScoreReport};
pub use skeleton::{
    fk_sequence, forward_kinematics, normalize_pose, AngleFrame, AngleSequence, CanonicalSkeleton,
    JointLayout, PoseFrame, PoseSequence, ANGLE_COUNT, KEYPOINT_COUNT,
};
pub use stitcher::{
    butterworth_lowpass, interpolate_transition, plan_transition, retrieve_signs, stitch,
    stitch_unfiltered, StitchRequest, StitchResult, TransitionPolicy,
};
