//! JSON-lines stitch manifest: one record per line with a unique id, the
//! gloss sentence, and optional per-gloss durations, cutoff, and reference
//! text.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub glosses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub durations_frames: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

pub fn load_manifest(reader: impl Read) -> anyhow::Result<Vec<ManifestRecord>> {
    let reader = BufReader::new(reader);
    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ManifestRecord =
            serde_json::from_str(&line).with_context(|| format!("manifest line {}", lineno + 1))?;
        if record.id.is_empty() {
            bail!("manifest line {}: empty id", lineno + 1);
        }
        if record.glosses.is_empty() {
            bail!("manifest record {:?}: no glosses", record.id);
        }
        if let Some(durations) = &record.durations_frames {
            if durations.len() != record.glosses.len() {
                bail!(
                    "manifest record {:?}: {} durations for {} glosses",
                    record.id,
                    durations.len(),
                    record.glosses.len()
                );
            }
        }
        if !seen.insert(record.id.clone()) {
            bail!("duplicate manifest id {:?}", record.id);
        }
        records.push(record);
    }
    Ok(records)
}
