//! Pose sequence file formats.
//!
//! Binary layout (little-endian): magic `SSPK`, u16 version = 1,
//! u16 keypoints = 61, u32 frame count, f32 fps, then frames x 61 x 3 f32
//! coordinates, row-major. A JSON mirror of the same fields is available for
//! tooling, and stitched outputs carry a JSON sidecar with gloss spans,
//! transition spans, and the post-fallback gloss list.

use std::io::{BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{PoseFrame, PoseSequence, KEYPOINT_COUNT};
use crate::stitcher::{ResolvedGloss, Span, StitchResult};

pub const SSPK_MAGIC: [u8; 4] = *b"SSPK";
pub const SSPK_VERSION: u16 = 1;

/// Serializes a pose sequence; coordinates are narrowed to f32.
pub fn write_sspk(mut writer: impl Write, seq: &PoseSequence) -> Result<()> {
    writer.write_all(&SSPK_MAGIC)?;
    writer.write_all(&SSPK_VERSION.to_le_bytes())?;
    writer.write_all(&(KEYPOINT_COUNT as u16).to_le_bytes())?;
    writer.write_all(&(seq.len() as u32).to_le_bytes())?;
    writer.write_all(&(seq.fps() as f32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(seq.len() * KEYPOINT_COUNT * 3 * 4);
    for frame in seq.frames() {
        for point in frame.points() {
            for v in point {
                buf.extend_from_slice(&(*v as f32).to_le_bytes());
            }
        }
    }
    writer.write_all(&buf)?;
    Ok(())
}

pub fn sspk_bytes(seq: &PoseSequence) -> Vec<u8> {
    let mut buf = Vec::new();
    write_sspk(&mut buf, seq).expect("in-memory write");
    buf
}

fn read_exact_or_format(reader: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    reader
        .read_exact(buf)
        .map_err(|_| Error::Format(format!("pose file truncated in {what}")))
}

/// Parses an SSPK stream, rejecting bad magic, unsupported versions, wrong
/// keypoint counts, truncation, and trailing bytes.
pub fn read_sspk(reader: impl Read) -> Result<PoseSequence> {
    let mut reader = BufReader::new(reader);
    let mut magic = [0u8; 4];
    read_exact_or_format(&mut reader, &mut magic, "header")?;
    if magic != SSPK_MAGIC {
        return Err(Error::Format(format!(
            "bad magic {magic:?}, expected \"SSPK\""
        )));
    }
    let mut u16buf = [0u8; 2];
    read_exact_or_format(&mut reader, &mut u16buf, "header")?;
    let version = u16::from_le_bytes(u16buf);
    if version != SSPK_VERSION {
        return Err(Error::Format(format!(
            "unsupported pose file version {version}"
        )));
    }
    read_exact_or_format(&mut reader, &mut u16buf, "header")?;
    let keypoints = u16::from_le_bytes(u16buf) as usize;
    if keypoints != KEYPOINT_COUNT {
        return Err(Error::Format(format!(
            "pose file has {keypoints} keypoints, expected {KEYPOINT_COUNT}"
        )));
    }
    let mut u32buf = [0u8; 4];
    read_exact_or_format(&mut reader, &mut u32buf, "header")?;
    let frame_count = u32::from_le_bytes(u32buf) as usize;
    read_exact_or_format(&mut reader, &mut u32buf, "header")?;
    let fps = f32::from_le_bytes(u32buf) as f64;
    if frame_count == 0 {
        return Err(Error::Format("pose file has zero frames".into()));
    }

    // Read whatever is actually there rather than pre-sizing a buffer from
    // the declared count; a corrupt header cannot force a giant allocation.
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    let expected = frame_count * KEYPOINT_COUNT * 3 * 4;
    if data.len() < expected {
        return Err(Error::Format(format!(
            "pose file truncated: {} data bytes for {frame_count} frames",
            data.len()
        )));
    }
    if data.len() > expected {
        return Err(Error::Format("trailing bytes after frame data".into()));
    }

    let mut frames = Vec::with_capacity(frame_count);
    let mut offset = 0usize;
    for _ in 0..frame_count {
        let mut points = Vec::with_capacity(KEYPOINT_COUNT);
        for _ in 0..KEYPOINT_COUNT {
            let mut p = [0.0f64; 3];
            for v in &mut p {
                let raw: [u8; 4] = data[offset..offset + 4].try_into().expect("sized read");
                *v = f32::from_le_bytes(raw) as f64;
                offset += 4;
            }
            points.push(p);
        }
        frames.push(PoseFrame::new(points).map_err(|e| Error::Format(e.to_string()))?);
    }
    PoseSequence::new(frames, fps)
}

/// JSON mirror of the binary fields.
#[derive(Debug, Serialize, Deserialize)]
struct PoseJson {
    version: u16,
    keypoints: usize,
    frames: usize,
    fps: f64,
    poses: Vec<Vec<[f64; 3]>>,
}

pub fn write_pose_json(mut writer: impl Write, seq: &PoseSequence) -> Result<()> {
    let doc = PoseJson {
        version: SSPK_VERSION,
        keypoints: KEYPOINT_COUNT,
        frames: seq.len(),
        fps: seq.fps(),
        poses: seq.frames().iter().map(|f| f.points().to_vec()).collect(),
    };
    serde_json::to_writer(&mut writer, &doc)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn read_pose_json(reader: impl Read) -> Result<PoseSequence> {
    let doc: PoseJson = serde_json::from_reader(BufReader::new(reader))
        .map_err(|e| Error::Format(format!("pose json: {e}")))?;
    if doc.version != SSPK_VERSION {
        return Err(Error::Format(format!(
            "unsupported pose file version {}",
            doc.version
        )));
    }
    if doc.keypoints != KEYPOINT_COUNT {
        return Err(Error::Format(format!(
            "pose file has {} keypoints, expected {KEYPOINT_COUNT}",
            doc.keypoints
        )));
    }
    if doc.poses.len() != doc.frames {
        return Err(Error::Format("frame count does not match pose data".into()));
    }
    let frames = doc
        .poses
        .into_iter()
        .map(|points| PoseFrame::new(points).map_err(|e| Error::Format(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    PoseSequence::new(frames, doc.fps)
}

/// Sidecar metadata written next to each stitched pose file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub gloss_spans: Vec<Span>,
    pub transition_spans: Vec<Span>,
    pub resolved_glosses: Vec<ResolvedGloss>,
}

impl Sidecar {
    pub fn from_result(result: &StitchResult) -> Self {
        Self {
            gloss_spans: result.gloss_spans.clone(),
            transition_spans: result.transition_spans.clone(),
            resolved_glosses: result.resolved_glosses.clone(),
        }
    }

    pub fn save(&self, mut writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn load(reader: impl Read) -> Result<Self> {
        serde_json::from_reader(BufReader::new(reader))
            .map_err(|e| Error::Format(format!("sidecar: {e}")))
    }
}
