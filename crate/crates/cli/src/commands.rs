use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use signstitch::augment::AugmentSchedule;
use signstitch::batch::{self, BatchItem, PostOps, StitchContext};
use signstitch::dictionary::{fold_gloss, Dictionary, EmbeddingTable};
use signstitch::metrics;
use signstitch::skeleton::{load_skeleton, AngleFrame, AngleSequence, CanonicalSkeleton};
use signstitch::sspk::{self, Sidecar};
use signstitch::stitcher::{StitchRequest, StitchResult, TransitionPolicy};
use signstitch::Corpus;

use crate::manifest::{load_manifest, ManifestRecord};
use crate::{BuildDictArgs, CoverageArgs, OutputFormat, PipelineArgs, ScoreArgs};

/// Raw single-sign angle file accepted by `build-dict`.
#[derive(Debug, Deserialize)]
struct RawEntryFile {
    gloss: String,
    #[serde(default)]
    fps: Option<f64>,
    frames: Vec<Vec<f64>>,
}

pub fn build_dict(args: BuildDictArgs) -> anyhow::Result<()> {
    load_skeleton(open(&args.skeleton)?)
        .with_context(|| format!("loading skeleton {}", args.skeleton.display()))?;

    let mut entries: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    let mut inherited_fps = None;
    let mut inherited_id = None;
    for input in &args.inputs {
        let value: serde_json::Value = serde_json::from_reader(open(input)?)
            .with_context(|| format!("parsing {}", input.display()))?;
        if value.get("entries").is_some() {
            let dict = Dictionary::load(serde_json::to_vec(&value)?.as_slice())
                .with_context(|| format!("loading dictionary {}", input.display()))?;
            inherited_fps.get_or_insert(dict.fps());
            inherited_id.get_or_insert_with(|| dict.skeleton_id().to_string());
            for entry in dict.entries() {
                entries.push((
                    entry.gloss.clone(),
                    entry
                        .angles
                        .frames()
                        .iter()
                        .map(|f| f.values().to_vec())
                        .collect(),
                ));
            }
        } else {
            let raw: RawEntryFile = serde_json::from_value(value)
                .with_context(|| format!("parsing {}", input.display()))?;
            if let Some(fps) = raw.fps {
                inherited_fps.get_or_insert(fps);
            }
            entries.push((raw.gloss, raw.frames));
        }
    }

    let fps = args.fps.or(inherited_fps).unwrap_or(25.0);
    let skeleton_id = args
        .skeleton_id
        .or(inherited_id)
        .or_else(|| {
            args.skeleton
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
        })
        .unwrap_or_else(|| "skeleton".to_string());

    let mut validated = Vec::with_capacity(entries.len());
    for (gloss, frames) in entries {
        let mut angle_frames = Vec::with_capacity(frames.len());
        for (i, frame) in frames.into_iter().enumerate() {
            angle_frames.push(
                AngleFrame::new(frame).with_context(|| format!("entry {gloss:?}, frame {i}"))?,
            );
        }
        let seq =
            AngleSequence::new(angle_frames, fps).with_context(|| format!("entry {gloss:?}"))?;
        validated.push((gloss, seq));
    }
    let dict = Dictionary::from_entries(validated, fps, &skeleton_id)?;
    dict.save(BufWriter::new(File::create(&args.out)?))?;
    println!(
        "wrote {} with {} entries at {} fps",
        args.out.display(),
        dict.len(),
        dict.fps()
    );
    Ok(())
}

struct PipelineInputs {
    records: Vec<ManifestRecord>,
    dict: Dictionary,
    emb: Option<EmbeddingTable>,
    skel: CanonicalSkeleton,
}

fn load_pipeline_inputs(args: &PipelineArgs) -> anyhow::Result<PipelineInputs> {
    let records = load_manifest(open(&args.manifest)?)
        .with_context(|| format!("loading manifest {}", args.manifest.display()))?;
    let dict = Dictionary::load(open(&args.dict)?)
        .with_context(|| format!("loading dictionary {}", args.dict.display()))?;
    let skel = load_skeleton(open(&args.skeleton)?)
        .with_context(|| format!("loading skeleton {}", args.skeleton.display()))?;
    if let Some(stem) = args.skeleton.file_stem() {
        if dict.skeleton_id() != stem.to_string_lossy() {
            log::warn!(
                "dictionary is bound to skeleton {:?} but {} was supplied",
                dict.skeleton_id(),
                args.skeleton.display()
            );
        }
    }
    let emb = match &args.embeddings {
        Some(path) => Some(
            EmbeddingTable::load(open(path)?)
                .with_context(|| format!("loading embeddings {}", path.display()))?,
        ),
        None => None,
    };
    if let Some(jobs) = args.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    fs::create_dir_all(&args.out_dir)?;
    Ok(PipelineInputs {
        records,
        dict,
        emb,
        skel,
    })
}

fn to_items(records: &[ManifestRecord], args: &PipelineArgs) -> Vec<BatchItem> {
    records
        .iter()
        .map(|record| {
            let glosses = if args.fold_glosses {
                record.glosses.iter().map(|g| fold_gloss(g)).collect()
            } else {
                record.glosses.clone()
            };
            BatchItem {
                id: record.id.clone(),
                request: StitchRequest {
                    glosses,
                    durations: record.durations_frames.clone(),
                    cutoff_hz: record.cutoff_hz.unwrap_or(args.cutoff),
                    fps: args.fps,
                    seed: args.seed,
                },
            }
        })
        .collect()
}

fn write_outputs(
    out_dir: &Path,
    id: &str,
    result: &StitchResult,
    format: OutputFormat,
) -> anyhow::Result<PathBuf> {
    let pose_path = match format {
        OutputFormat::Sspk => {
            let path = out_dir.join(format!("{id}.sspk"));
            sspk::write_sspk(BufWriter::new(File::create(&path)?), &result.poses)?;
            path
        }
        OutputFormat::Json => {
            let path = out_dir.join(format!("{id}.json"));
            sspk::write_pose_json(BufWriter::new(File::create(&path)?), &result.poses)?;
            path
        }
    };
    let sidecar_path = out_dir.join(format!("{id}.spans.json"));
    Sidecar::from_result(result).save(BufWriter::new(File::create(sidecar_path)?))?;
    Ok(pose_path)
}

pub fn stitch(args: PipelineArgs) -> anyhow::Result<()> {
    let inputs = load_pipeline_inputs(&args)?;
    let ctx = StitchContext {
        dict: &inputs.dict,
        emb: inputs.emb.as_ref(),
        skel: &inputs.skel,
        policy: TransitionPolicy::default(),
        post: PostOps {
            subsample_fps: args.subsample_fps,
            normalize: args.normalize,
        },
    };
    let items = to_items(&inputs.records, &args);
    let results = batch::stitch_batch(&items, &ctx);

    let mut written = 0usize;
    let mut failed = 0usize;
    let mut total_frames = 0usize;
    for (item, result) in items.iter().zip(results) {
        match result {
            Ok(result) => {
                write_outputs(&args.out_dir, &item.id, &result, args.format)?;
                written += 1;
                total_frames += result.poses.len();
            }
            Err(err) => {
                if args.strict {
                    bail!("record {:?}: {err}", item.id);
                }
                log::warn!("skipping record {:?}: {err}", item.id);
                failed += 1;
            }
        }
    }
    println!("stitched {written} sequences ({failed} failed), {total_frames} frames");
    Ok(())
}

/// Expanded-manifest line recording a variant's provenance.
#[derive(Debug, Serialize)]
struct VariantRecord<'a> {
    id: &'a str,
    base_id: &'a str,
    glosses: Vec<String>,
    n: usize,
    scale: f64,
    copy: usize,
    seed: u64,
    cutoff_hz: f64,
    frames: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    text: Option<&'a str>,
}

pub fn augment(args: PipelineArgs, schedule_path: PathBuf) -> anyhow::Result<()> {
    let schedule = AugmentSchedule::load(open(&schedule_path)?)
        .with_context(|| format!("loading schedule {}", schedule_path.display()))?;
    let mut schedule = schedule;
    schedule.seed = schedule.seed.wrapping_add(args.seed);
    let inputs = load_pipeline_inputs(&args)?;
    let ctx = StitchContext {
        dict: &inputs.dict,
        emb: inputs.emb.as_ref(),
        skel: &inputs.skel,
        policy: TransitionPolicy::default(),
        post: PostOps {
            subsample_fps: args.subsample_fps,
            normalize: args.normalize,
        },
    };
    let items = to_items(&inputs.records, &args);
    let outputs = batch::augment_batch(&items, &schedule, &ctx);

    let manifest_path = args.out_dir.join("manifest.expanded.jsonl");
    let mut manifest = BufWriter::new(File::create(&manifest_path)?);
    let mut written = 0usize;
    let mut failed = 0usize;
    for (plan, result) in &outputs {
        let record = &inputs.records[plan.base_index];
        match result {
            Ok(result) => {
                write_outputs(&args.out_dir, &plan.variant_id, result, args.format)?;
                let line = VariantRecord {
                    id: &plan.variant_id,
                    base_id: &plan.base_id,
                    glosses: result
                        .resolved_glosses
                        .iter()
                        .map(|r| r.requested.clone())
                        .collect(),
                    n: plan.n,
                    scale: plan.scale,
                    copy: plan.copy,
                    seed: plan.seed,
                    cutoff_hz: record.cutoff_hz.unwrap_or(args.cutoff),
                    frames: result.poses.len(),
                    text: record.text.as_deref(),
                };
                serde_json::to_writer(&mut manifest, &line)?;
                manifest.write_all(b"\n")?;
                written += 1;
            }
            Err(err) => {
                if args.strict {
                    bail!("variant {:?}: {err}", plan.variant_id);
                }
                log::warn!("skipping variant {:?}: {err}", plan.variant_id);
                failed += 1;
            }
        }
    }
    manifest.flush()?;
    println!(
        "generated {written} variants ({failed} failed), manifest {}",
        manifest_path.display()
    );
    Ok(())
}

pub fn coverage(args: CoverageArgs) -> anyhow::Result<()> {
    let dict = Dictionary::load(open(&args.dict)?)
        .with_context(|| format!("loading dictionary {}", args.dict.display()))?;
    let vocab: Vec<String> = if let Some(path) = &args.manifest {
        let records = load_manifest(open(path)?)?;
        records.into_iter().flat_map(|r| r.glosses).collect()
    } else if let Some(path) = &args.vocab {
        open(path)?
            .lines()
            .collect::<std::io::Result<Vec<_>>>()?
            .into_iter()
            .map(|l| l.trim().to_string())
            .filter(|l| !l.is_empty())
            .collect()
    } else {
        bail!("coverage needs --manifest or --vocab");
    };
    let mut unique: Vec<&str> = vocab.iter().map(String::as_str).collect();
    unique.sort_unstable();
    unique.dedup();
    let report = dict.coverage(unique);
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

pub fn score(args: ScoreArgs) -> anyhow::Result<()> {
    let read_lines = |path: &Path| -> anyhow::Result<Vec<String>> {
        Ok(open(path)?.lines().collect::<std::io::Result<_>>()?)
    };
    let hyps = read_lines(&args.hyp)?;
    let refs = read_lines(&args.reference)?;
    if hyps.len() != refs.len() {
        bail!(
            "line count mismatch: {} hypothesis lines vs {} reference lines",
            hyps.len(),
            refs.len()
        );
    }
    let corpus = Corpus::from_lines(&hyps, &refs)?;
    let report = metrics::score_report(&corpus, args.smooth)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    Ok(BufReader::new(
        File::open(path).with_context(|| format!("opening {}", path.display()))?,
    ))
}
