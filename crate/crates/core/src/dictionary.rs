//! The isolated-sign dictionary: gloss -> joint-angle sequence, with exact
//! lookup and embedding-based fallback for out-of-vocabulary glosses.
//!
//! Lookups are exact and case-sensitive. Fallback retrieval vectorises the
//! query gloss with an external embedding table and substitutes the
//! dictionary entry with the highest cosine similarity; ties break on the
//! lexicographically smallest gloss. No similarity threshold is applied, but
//! substitutions below 0.5 are logged so dataset builders can audit them.
//! Coverage reporting is sized for real-world use: dictionaries of several
//! thousand signs checked against vocabularies of around a thousand glosses.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::{AngleFrame, AngleSequence, ANGLE_COUNT};

pub const DICTIONARY_FILE_VERSION: u32 = 1;

/// One isolated sign: its gloss tag and captured joint-angle sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct DictEntry {
    pub gloss: String,
    pub angles: AngleSequence,
}

/// Immutable gloss-keyed dictionary of isolated signs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    entries: BTreeMap<String, DictEntry>,
    fps: f64,
    skeleton_id: String,
}

/// Maps an angle into (-pi, pi]. In-range values are returned untouched so
/// repeated application is bitwise stable.
fn wrap_angle(v: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    if v > PI || v <= -PI {
        let w = (v + PI).rem_euclid(TAU) - PI;
        if w == -PI {
            PI
        } else {
            w
        }
    } else {
        v
    }
}

impl Dictionary {
    /// Builds a dictionary from `(gloss, angles)` pairs, rejecting empty or
    /// duplicate glosses. Entry sequences adopt `fps` as their capture rate
    /// and their angles are mapped into (-pi, pi) so duration resampling
    /// interpolates sanely; per-frame deltas in signing data are small enough
    /// that no further wrap handling is needed.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, AngleSequence)>,
        fps: f64,
        skeleton_id: &str,
    ) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidInput(format!(
                "dictionary fps must be positive, got {fps}"
            )));
        }
        let mut map = BTreeMap::new();
        for (gloss, angles) in entries {
            if gloss.is_empty() {
                return Err(Error::Schema {
                    entity: "dictionary".into(),
                    detail: "empty gloss".into(),
                });
            }
            let fps = angles.fps();
            let frames = angles
                .frames()
                .iter()
                .map(|f| {
                    AngleFrame::new(f.values().iter().copied().map(wrap_angle).collect())
                        .expect("wrapping keeps angles finite")
                })
                .collect();
            let entry = DictEntry {
                gloss: gloss.clone(),
                angles: AngleSequence::new(frames, fps)?,
            };
            if map.insert(gloss.clone(), entry).is_some() {
                return Err(Error::DuplicateGloss(gloss));
            }
        }
        if map.is_empty() {
            return Err(Error::Schema {
                entity: "dictionary".into(),
                detail: "no entries".into(),
            });
        }
        Ok(Self {
            entries: map,
            fps,
            skeleton_id: skeleton_id.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn skeleton_id(&self) -> &str {
        &self.skeleton_id
    }

    pub fn glosses(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn entries(&self) -> impl Iterator<Item = &DictEntry> {
        self.entries.values()
    }

    /// Exact, case-sensitive lookup; a miss is a `None`, not an error.
    pub fn lookup(&self, gloss: &str) -> Option<&DictEntry> {
        self.entries.get(gloss)
    }

    /// Exact lookup with embedding fallback.
    ///
    /// An exact hit short-circuits with similarity 1.0. Otherwise the query
    /// gloss is vectorised and the dictionary entry with the highest cosine
    /// similarity wins; equal similarities resolve to the lexicographically
    /// smallest gloss. Fails when the query gloss has no vector or no
    /// dictionary gloss is present in the table.
    pub fn resolve<'a>(&'a self, gloss: &str, emb: &EmbeddingTable) -> Result<Resolution<'a>> {
        if let Some(entry) = self.lookup(gloss) {
            return Ok(Resolution {
                entry,
                similarity: 1.0,
            });
        }
        let query = emb.vector(gloss).ok_or_else(|| Error::UnresolvableGloss {
            gloss: gloss.to_string(),
            position: None,
        })?;
        let mut best: Option<(f64, &DictEntry)> = None;
        for (candidate, entry) in &self.entries {
            let Some(vector) = emb.vector(candidate) else {
                continue;
            };
            let similarity = cosine(query, vector);
            // Strict greater-than keeps the first (lexicographically
            // smallest) gloss on ties; BTreeMap iterates in sorted order.
            if best.is_none_or(|(s, _)| similarity > s) {
                best = Some((similarity, entry));
            }
        }
        let (similarity, entry) = best.ok_or_else(|| Error::UnresolvableGloss {
            gloss: gloss.to_string(),
            position: None,
        })?;
        if similarity < 0.5 {
            log::warn!(
                "gloss {gloss:?} resolved to {:?} with low similarity {similarity:.3}",
                entry.gloss
            );
        }
        Ok(Resolution { entry, similarity })
    }

    /// How much of `vocab` the dictionary covers. An empty vocabulary counts
    /// as fully covered.
    pub fn coverage<'a>(&self, vocab: impl IntoIterator<Item = &'a str>) -> CoverageReport {
        let mut covered_count = 0usize;
        let mut missing = Vec::new();
        let mut vocab_size = 0usize;
        for gloss in vocab {
            vocab_size += 1;
            if self.entries.contains_key(gloss) {
                covered_count += 1;
            } else {
                missing.push(gloss.to_string());
            }
        }
        missing.sort();
        missing.dedup();
        let ratio = if vocab_size == 0 {
            1.0
        } else {
            covered_count as f64 / vocab_size as f64
        };
        CoverageReport {
            vocab_size,
            covered_count,
            missing,
            ratio,
        }
    }

    /// Parses a dictionary file, validating frame widths, finiteness, and
    /// gloss uniqueness.
    pub fn load(reader: impl Read) -> Result<Self> {
        let file: DictionaryFile = serde_json::from_reader(BufReader::new(reader))
            .map_err(|e| Error::Format(format!("dictionary file: {e}")))?;
        Self::from_file(file)
    }

    fn from_file(file: DictionaryFile) -> Result<Self> {
        if file.version != DICTIONARY_FILE_VERSION {
            return Err(Error::Format(format!(
                "unsupported dictionary file version {}",
                file.version
            )));
        }
        let mut entries = Vec::with_capacity(file.entries.len());
        for entry in file.entries {
            let mut frames = Vec::with_capacity(entry.frames.len());
            for (i, frame) in entry.frames.into_iter().enumerate() {
                if frame.len() != ANGLE_COUNT {
                    return Err(Error::Schema {
                        entity: format!("dictionary entry {:?}", entry.gloss),
                        detail: format!(
                            "frame {i} has width {}, expected {ANGLE_COUNT}",
                            frame.len()
                        ),
                    });
                }
                frames.push(AngleFrame::new(frame).map_err(|e| Error::Schema {
                    entity: format!("dictionary entry {:?}", entry.gloss),
                    detail: format!("frame {i}: {e}"),
                })?);
            }
            let angles = AngleSequence::new(frames, file.fps).map_err(|e| Error::Schema {
                entity: format!("dictionary entry {:?}", entry.gloss),
                detail: e.to_string(),
            })?;
            entries.push((entry.gloss, angles));
        }
        Self::from_entries(entries, file.fps, &file.skeleton_id)
    }

    /// Writes the dictionary with entries sorted by gloss; saving and
    /// reloading round-trips angle payloads bit-exactly.
    pub fn save(&self, mut writer: impl Write) -> Result<()> {
        let file = DictionaryFile {
            version: DICTIONARY_FILE_VERSION,
            fps: self.fps,
            skeleton_id: self.skeleton_id.clone(),
            entries: self
                .entries
                .values()
                .map(|e| DictionaryEntryFile {
                    gloss: e.gloss.clone(),
                    frames: e
                        .angles
                        .frames()
                        .iter()
                        .map(|f| f.values().to_vec())
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_writer_pretty(&mut writer, &file)?;
        writer.write_all(b"\n")?;
        Ok(())
    }
}

/// Outcome of [`Dictionary::resolve`]: the selected entry (its gloss is the
/// matched gloss) and the cosine similarity that selected it.
#[derive(Debug, Clone, Copy)]
pub struct Resolution<'a> {
    pub entry: &'a DictEntry,
    pub similarity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageReport {
    pub vocab_size: usize,
    pub covered_count: usize,
    pub missing: Vec<String>,
    pub ratio: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DictionaryFile {
    version: u32,
    fps: f64,
    skeleton_id: String,
    entries: Vec<DictionaryEntryFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DictionaryEntryFile {
    gloss: String,
    frames: Vec<Vec<f64>>,
}

/// Optional gloss preprocessing: uppercases the token and strips a trailing
/// run of ASCII digits, collapsing numbered variants like `HAUS2` onto
/// `HAUS`. Lookups stay exact and case-sensitive unless a caller opts in.
pub fn fold_gloss(gloss: &str) -> String {
    let trimmed = gloss.trim_end_matches(|c: char| c.is_ascii_digit());
    let base = if trimmed.is_empty() { gloss } else { trimmed };
    base.to_uppercase()
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Token -> vector table for fallback retrieval. All vectors share one
/// dimension and none may be (near-)zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize, vectors: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput(
                "embedding dimension must be positive".into(),
            ));
        }
        let mut map = BTreeMap::new();
        for (token, vector) in vectors {
            Self::check_vector(&token, dim, &vector)?;
            if map.insert(token.clone(), vector).is_some() {
                return Err(Error::Schema {
                    entity: "embedding table".into(),
                    detail: format!("duplicate token {token:?}"),
                });
            }
        }
        Ok(Self { dim, vectors: map })
    }

    fn check_vector(token: &str, dim: usize, vector: &[f64]) -> Result<()> {
        if vector.len() != dim {
            return Err(Error::Schema {
                entity: "embedding table".into(),
                detail: format!(
                    "token {token:?} has dimension {}, expected {dim}",
                    vector.len()
                ),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Schema {
                entity: "embedding table".into(),
                detail: format!("token {token:?} has non-finite components"),
            });
        }
        let norm: f64 = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-12 {
            return Err(Error::Schema {
                entity: "embedding table".into(),
                detail: format!("token {token:?} has zero norm"),
            });
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Parses the text format: a `dim N` header line, then one
    /// whitespace-separated `token v1 .. vN` record per line.
    pub fn load(reader: impl Read) -> Result<Self> {
        let reader = BufReader::new(reader);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("embedding file is empty".into()))??;
        let dim = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["dim", n] => n
                .parse::<usize>()
                .map_err(|_| Error::Format(format!("bad embedding header {header:?}")))?,
            _ => return Err(Error::Format(format!("bad embedding header {header:?}"))),
        };
        if dim == 0 {
            return Err(Error::Format("embedding dimension must be positive".into()));
        }
        let mut vectors = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().expect("non-empty line").to_string();
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>().map_err(|_| {
                        Error::Format(format!("embedding line {}: bad value {p:?}", lineno + 2))
                    })
                })
                .collect::<Result<_>>()?;
            Self::check_vector(&token, dim, &values)?;
            if vectors.insert(token.clone(), values).is_some() {
                return Err(Error::Schema {
                    entity: "embedding table".into(),
                    detail: format!("duplicate token {token:?} on line {}", lineno + 2),
                });
            }
        }
        Ok(Self { dim, vectors })
    }

    pub fn save(&self, mut writer: impl Write) -> Result<()> {
        writeln!(writer, "dim {}", self.dim)?;
        for (token, vector) in &self.vectors {
            write!(writer, "{token}")?;
            for v in vector {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}
