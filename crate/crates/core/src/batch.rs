//! Batch stitching over many requests sharing one immutable dictionary,
//! skeleton, and embedding table.
//!
//! With the `parallel` feature (default) items are processed with rayon;
//! without it the same driver runs sequentially. Results are collected in
//! input order, so output is identical regardless of worker count. The
//! sequential entry points are always available for single-threaded use and
//! benchmarking.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::augment::{self, AugmentSchedule, SpeedMode, VariantPlan};
use crate::dictionary::{Dictionary, EmbeddingTable};
use crate::error::{Error, Result};
use crate::skeleton::{normalize_pose, CanonicalSkeleton};
use crate::stitcher::{self, StitchRequest, StitchResult, TransitionPolicy};

/// Shared read-only inputs for a batch run.
#[derive(Clone, Copy)]
pub struct StitchContext<'a> {
    pub dict: &'a Dictionary,
    pub emb: Option<&'a EmbeddingTable>,
    pub skel: &'a CanonicalSkeleton,
    pub policy: TransitionPolicy,
    pub post: PostOps,
}

/// Post-processing applied uniformly after stitching: optional fps
/// subsampling, then optional pose normalization.
#[derive(Debug, Clone, Copy, Default)]
pub struct PostOps {
    pub subsample_fps: Option<f64>,
    pub normalize: bool,
}

/// One batch entry: a stable identifier and its request.
#[derive(Debug, Clone)]
pub struct BatchItem {
    pub id: String,
    pub request: StitchRequest,
}

fn apply_post(mut result: StitchResult, ctx: &StitchContext) -> Result<StitchResult> {
    if let Some(target_fps) = ctx.post.subsample_fps {
        let old_len = result.poses.len();
        result.poses = result.poses.subsample_to_fps(target_fps)?;
        let new_len = result.poses.len();
        if new_len != old_len {
            result.remap_spans(old_len, new_len);
        }
    }
    if ctx.post.normalize {
        result.poses = normalize_pose(&result.poses, ctx.skel.layout())?;
    }
    Ok(result)
}

/// Stitches one item and applies the context's post-ops.
pub fn stitch_item(request: &StitchRequest, ctx: &StitchContext) -> Result<StitchResult> {
    let result = stitcher::stitch(request, ctx.dict, ctx.emb, ctx.skel, &ctx.policy)?;
    apply_post(result, ctx)
}

/// Sequential batch driver.
pub fn stitch_batch_seq(items: &[BatchItem], ctx: &StitchContext) -> Vec<Result<StitchResult>> {
    items
        .iter()
        .map(|item| stitch_item(&item.request, ctx))
        .collect()
}

/// Batch driver; data-parallel when the `parallel` feature is enabled.
pub fn stitch_batch(items: &[BatchItem], ctx: &StitchContext) -> Vec<Result<StitchResult>> {
    #[cfg(feature = "parallel")]
    {
        items
            .par_iter()
            .map(|item| stitch_item(&item.request, ctx))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        stitch_batch_seq(items, ctx)
    }
}

/// Builds and stitches one schedule variant: permutes the base request's
/// glosses (durations follow their glosses), stitches, and applies the speed
/// scale either to the final sequence or to the per-gloss durations.
pub fn stitch_variant(
    base: &StitchRequest,
    plan: &VariantPlan,
    schedule: &AugmentSchedule,
    ctx: &StitchContext,
) -> Result<StitchResult> {
    let perm =
        augment::permutation_indices(base.glosses.len(), plan.n, plan.seed, schedule.permute_mode);
    let mut request = base.clone();
    request.seed = plan.seed;
    request.glosses = perm.iter().map(|&i| base.glosses[i].clone()).collect();
    request.durations = base
        .durations
        .as_ref()
        .map(|d| perm.iter().map(|&i| d[i]).collect());

    match schedule.speed_mode {
        SpeedMode::Sequence => {
            let result = stitcher::stitch(&request, ctx.dict, ctx.emb, ctx.skel, &ctx.policy)?;
            apply_post(augment::scale_result(result, plan.scale)?, ctx)
        }
        SpeedMode::Durations => {
            let durations = match request.durations.take() {
                Some(d) => d,
                None => native_durations(&request, ctx)?,
            };
            let scaled = durations
                .iter()
                .map(|&d| {
                    let v = ((d as f64) * plan.scale).round() as usize;
                    if v == 0 {
                        Err(Error::InvalidScale { scale: plan.scale })
                    } else {
                        Ok(v)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            request.durations = Some(scaled);
            let result = stitcher::stitch(&request, ctx.dict, ctx.emb, ctx.skel, &ctx.policy)?;
            apply_post(result, ctx)
        }
    }
}

fn native_durations(request: &StitchRequest, ctx: &StitchContext) -> Result<Vec<usize>> {
    request
        .glosses
        .iter()
        .enumerate()
        .map(|(position, gloss)| {
            let entry = match (ctx.dict.lookup(gloss), ctx.emb) {
                (Some(entry), _) => entry,
                (None, Some(emb)) => {
                    ctx.dict
                        .resolve(gloss, emb)
                        .map_err(|_| Error::UnresolvableGloss {
                            gloss: gloss.clone(),
                            position: Some(position),
                        })?
                        .entry
                }
                (None, None) => {
                    return Err(Error::UnresolvableGloss {
                        gloss: gloss.clone(),
                        position: Some(position),
                    })
                }
            };
            Ok(stitcher::native_duration(
                entry.angles.len(),
                ctx.dict.fps(),
                request.fps,
            ))
        })
        .collect()
}

/// Expands the schedule over all items and stitches every variant, pairing
/// each plan with its outcome; parallel when the feature is enabled.
pub fn augment_batch(
    items: &[BatchItem],
    schedule: &AugmentSchedule,
    ctx: &StitchContext,
) -> Vec<(VariantPlan, Result<StitchResult>)> {
    let ids: Vec<String> = items.iter().map(|i| i.id.clone()).collect();
    let plans = augment::expand_schedule(&ids, schedule);
    let run = |plan: VariantPlan| {
        let result = stitch_variant(&items[plan.base_index].request, &plan, schedule, ctx);
        (plan, result)
    };
    #[cfg(feature = "parallel")]
    {
        plans.into_par_iter().map(run).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        plans.into_iter().map(run).collect()
    }
}
