//! Frame and sequence containers for joint-angle and keypoint data.

use crate::error::{Error, Result};
use crate::geom::{self, Vec3};

/// Number of joint-angle slots in every angle frame.
pub const ANGLE_COUNT: usize = 104;
/// Number of skeleton keypoints in every pose frame.
pub const KEYPOINT_COUNT: usize = 61;

/// One frame of joint angles, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleFrame(Vec<f64>);

impl AngleFrame {
    /// Builds a frame from exactly [`ANGLE_COUNT`] finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != ANGLE_COUNT {
            return Err(Error::InvalidInput(format!(
                "angle frame has {} values, expected {ANGLE_COUNT}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "angle frame value {i} is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn zeros() -> Self {
        Self(vec![0.0; ANGLE_COUNT])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// One frame of 3D keypoint coordinates, in canonical length units.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFrame(Vec<Vec3>);

impl PoseFrame {
    /// Builds a frame from exactly [`KEYPOINT_COUNT`] finite points.
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if points.len() != KEYPOINT_COUNT {
            return Err(Error::InvalidInput(format!(
                "pose frame has {} points, expected {KEYPOINT_COUNT}",
                points.len()
            )));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "pose frame contains non-finite coordinates".into(),
            ));
        }
        Ok(Self(points))
    }

    pub(crate) fn from_points_unchecked(points: Vec<Vec3>) -> Self {
        debug_assert_eq!(points.len(), KEYPOINT_COUNT);
        Self(points)
    }

    pub fn points(&self) -> &[Vec3] {
        &self.0
    }

    /// Mean per-keypoint Euclidean distance to another frame.
    pub fn mean_distance(&self, other: &Self) -> f64 {
        let total: f64 = self
            .0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| geom::norm(geom::sub(*b, *a)))
            .sum();
        total / self.0.len() as f64
    }
}

/// Linear interpolation between two frames of the same shape, `a + (b - a) * alpha`.
pub(crate) trait LinearFrame: Clone {
    fn lerp(&self, other: &Self, alpha: f64) -> Self;
}

impl LinearFrame for AngleFrame {
    fn lerp(&self, other: &Self, alpha: f64) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + (b - a) * alpha)
                .collect(),
        )
    }
}

impl LinearFrame for PoseFrame {
    fn lerp(&self, other: &Self, alpha: f64) -> Self {
        Self(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| {
                    [
                        a[0] + (b[0] - a[0]) * alpha,
                        a[1] + (b[1] - a[1]) * alpha,
                        a[2] + (b[2] - a[2]) * alpha,
                    ]
                })
                .collect(),
        )
    }
}

/// Resamples `frames` to `target_len` by linear interpolation at
/// `t_j = j * (U - 1) / (target_len - 1)`. Endpoints are copied exactly;
/// `target_len == len` returns a bitwise-identical copy.
pub(crate) fn resample_frames<F: LinearFrame>(frames: &[F], target_len: usize) -> Result<Vec<F>> {
    if target_len == 0 {
        return Err(Error::InvalidInput("resample target length is zero".into()));
    }
    if frames.is_empty() {
        return Err(Error::InvalidInput(
            "cannot resample an empty sequence".into(),
        ));
    }
    let source_len = frames.len();
    if target_len == source_len {
        return Ok(frames.to_vec());
    }
    if target_len == 1 {
        return Ok(vec![frames[0].clone()]);
    }
    let mut out = Vec::with_capacity(target_len);
    let span = (source_len - 1) as f64;
    let denom = (target_len - 1) as f64;
    for j in 0..target_len {
        let t = j as f64 * span / denom;
        let i0 = t.floor() as usize;
        if i0 >= source_len - 1 {
            out.push(frames[source_len - 1].clone());
            continue;
        }
        let alpha = t - i0 as f64;
        if alpha == 0.0 {
            out.push(frames[i0].clone());
        } else {
            out.push(frames[i0].lerp(&frames[i0 + 1], alpha));
        }
    }
    Ok(out)
}

fn check_fps(fps: f64) -> Result<()> {
    if !(fps.is_finite() && fps > 0.0) {
        return Err(Error::InvalidInput(format!(
            "fps must be positive, got {fps}"
        )));
    }
    Ok(())
}

/// A non-empty sequence of angle frames at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSequence {
    frames: Vec<AngleFrame>,
    fps: f64,
}

impl AngleSequence {
    pub fn new(frames: Vec<AngleFrame>, fps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidInput("angle sequence is empty".into()));
        }
        check_fps(fps)?;
        Ok(Self { frames, fps })
    }

    pub fn frames(&self) -> &[AngleFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    /// Linear resample to exactly `target_len` frames; fps metadata is kept.
    pub fn resample(&self, target_len: usize) -> Result<Self> {
        Ok(Self {
            frames: resample_frames(&self.frames, target_len)?,
            fps: self.fps,
        })
    }
}

/// A non-empty sequence of pose frames at a fixed frame rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseSequence {
    frames: Vec<PoseFrame>,
    fps: f64,
}

impl PoseSequence {
    pub fn new(frames: Vec<PoseFrame>, fps: f64) -> Result<Self> {
        if frames.is_empty() {
            return Err(Error::InvalidInput("pose sequence is empty".into()));
        }
        check_fps(fps)?;
        Ok(Self { frames, fps })
    }

    pub(crate) fn from_frames_unchecked(frames: Vec<PoseFrame>, fps: f64) -> Self {
        debug_assert!(!frames.is_empty());
        Self { frames, fps }
    }

    pub fn frames(&self) -> &[PoseFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn with_fps(mut self, fps: f64) -> Result<Self> {
        check_fps(fps)?;
        self.fps = fps;
        Ok(self)
    }

    /// Linear resample to exactly `target_len` frames; fps metadata is kept.
    pub fn resample(&self, target_len: usize) -> Result<Self> {
        Ok(Self {
            frames: resample_frames(&self.frames, target_len)?,
            fps: self.fps,
        })
    }

    /// Resamples to `round(len * target_fps / fps)` frames (at least one) and
    /// updates the fps metadata, e.g. for 25 -> 12 fps subsampling.
    pub fn subsample_to_fps(&self, target_fps: f64) -> Result<Self> {
        check_fps(target_fps)?;
        let target_len = ((self.len() as f64) * target_fps / self.fps)
            .round()
            .max(1.0) as usize;
        Ok(Self {
            frames: resample_frames(&self.frames, target_len)?,
            fps: target_fps,
        })
    }

    /// Mean per-keypoint displacement between `frame_index` and the next frame,
    /// in canonical units per frame.
    pub fn frame_velocity(&self, frame_index: usize) -> Result<f64> {
        if frame_index + 1 >= self.len() {
            return Err(Error::IndexOutOfRange {
                index: frame_index,
                len: self.len(),
            });
        }
        Ok(self.frames[frame_index].mean_distance(&self.frames[frame_index + 1]))
    }
}
