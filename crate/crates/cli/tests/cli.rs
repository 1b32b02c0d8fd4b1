//! End-to-end tests of the command-line interface: file handling, exit
//! codes, failure modes, and rerun determinism.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use signstitch::skeleton::save_skeleton;
use signstitch::synth;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let skel = synth::sample_skeleton();
        save_skeleton(
            File::create(dir.path().join("skeleton.json")).unwrap(),
            &skel,
        )
        .unwrap();

        let glosses = synth::gloss_names(10);
        let dict = synth::toy_dictionary(&glosses, 16, 25.0, 31);
        dict.save(File::create(dir.path().join("dictionary.json")).unwrap())
            .unwrap();

        let mut tokens = glosses;
        tokens.push("OOV_SIGN".to_string());
        synth::toy_embeddings(&tokens, 8, 32)
            .save(File::create(dir.path().join("embeddings.txt")).unwrap())
            .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, content: &str) -> PathBuf {
        let path = self.path(name);
        fs::write(&path, content).unwrap();
        path
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_signstitch"))
            .current_dir(self.dir.path())
            .args(args)
            .output()
            .unwrap()
    }
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn stitch_writes_outputs_per_record() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        concat!(
            r#"{"id":"r0","glosses":["GLOSS_000","GLOSS_001"]}"#,
            "\n",
            r#"{"id":"r1","glosses":["GLOSS_002"],"durations_frames":[40]}"#,
            "\n",
            r#"{"id":"r2","glosses":["GLOSS_003","GLOSS_004","GLOSS_005"],"cutoff_hz":3.0}"#,
            "\n",
        ),
    );
    let out = ws.run(&[
        "stitch",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "dictionary.json",
        "--skeleton",
        "skeleton.json",
        "--embeddings",
        "embeddings.txt",
        "--out-dir",
        "out",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("stitched 3 sequences (0 failed)"));
    let names = read_dir_sorted(&ws.path("out"));
    assert_eq!(
        names,
        vec![
            "r0.spans.json",
            "r0.sspk",
            "r1.spans.json",
            "r1.sspk",
            "r2.spans.json",
            "r2.sspk",
        ]
    );
    // r1 was given an explicit 40-frame duration for its single gloss.
    let seq = signstitch::sspk::read_sspk(File::open(ws.path("out/r1.sspk")).unwrap()).unwrap();
    assert_eq!(seq.len(), 40);
}

#[test]
fn unresolvable_record_skips_by_default_and_aborts_in_strict_mode() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        concat!(
            r#"{"id":"good1","glosses":["GLOSS_000"]}"#,
            "\n",
            r#"{"id":"bad","glosses":["NO_SUCH_SIGN_ANYWHERE"]}"#,
            "\n",
            r#"{"id":"good2","glosses":["GLOSS_001"]}"#,
            "\n",
        ),
    );
    let base = [
        "stitch",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "dictionary.json",
        "--skeleton",
        "skeleton.json",
        "--out-dir",
        "out",
    ];
    let out = ws.run(&base);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("stitched 2 sequences (1 failed)"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad"));

    let mut strict = base.to_vec();
    strict.push("--strict");
    let out = ws.run(&strict);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_invocations_produce_bit_identical_outputs() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        concat!(
            r#"{"id":"a","glosses":["GLOSS_000","OOV_SIGN","GLOSS_002"]}"#,
            "\n"
        ),
    );
    for dir in ["out1", "out2"] {
        let out = ws.run(&[
            "stitch",
            "--manifest",
            "manifest.jsonl",
            "--dict",
            "dictionary.json",
            "--skeleton",
            "skeleton.json",
            "--embeddings",
            "embeddings.txt",
            "--out-dir",
            dir,
            "--subsample-fps",
            "12",
            "--normalize",
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(ws.path("out1/a.sspk")).unwrap();
    let b = fs::read(ws.path("out2/a.sspk")).unwrap();
    assert_eq!(a, b);
    let a = fs::read(ws.path("out1/a.spans.json")).unwrap();
    let b = fs::read(ws.path("out2/a.spans.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn json_format_writes_json_pose_files() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        "{\"id\":\"a\",\"glosses\":[\"GLOSS_000\"]}\n",
    );
    let out = ws.run(&[
        "stitch",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "dictionary.json",
        "--skeleton",
        "skeleton.json",
        "--out-dir",
        "out",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let seq = signstitch::sspk::read_pose_json(File::open(ws.path("out/a.json")).unwrap()).unwrap();
    assert_eq!(seq.fps(), 25.0);
}

#[test]
fn build_dict_from_raw_files_then_rebuild_is_byte_identical() {
    let ws = Workspace::new();
    // Two raw entries pulled out of the toy dictionary.
    let dict = synth::toy_dictionary(&synth::gloss_names(2), 8, 25.0, 77);
    for entry in dict.entries() {
        let frames: Vec<Vec<f64>> = entry
            .angles
            .frames()
            .iter()
            .map(|f| f.values().to_vec())
            .collect();
        let mut f = File::create(ws.path(&format!("{}.json", entry.gloss))).unwrap();
        write!(
            f,
            r#"{{"gloss":{},"fps":25,"frames":{}}}"#,
            serde_json::to_string(&entry.gloss).unwrap(),
            serde_json::to_string(&frames).unwrap()
        )
        .unwrap();
    }
    let out = ws.run(&[
        "build-dict",
        "--skeleton",
        "skeleton.json",
        "--out",
        "built.json",
        "GLOSS_000.json",
        "GLOSS_001.json",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("2 entries"));

    // Rebuilding from the emitted file reproduces it byte for byte.
    let out = ws.run(&[
        "build-dict",
        "--skeleton",
        "skeleton.json",
        "--out",
        "rebuilt.json",
        "built.json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read(ws.path("built.json")).unwrap(),
        fs::read(ws.path("rebuilt.json")).unwrap()
    );
}

#[test]
fn build_dict_rejects_duplicate_gloss() {
    let ws = Workspace::new();
    ws.write("one.json", r#"{"gloss":"REGEN","fps":25,"frames":[[0.0]]}"#);
    // Widen the frame to 104 entries.
    let frame = vec![0.0f64; 104];
    let body = format!(
        r#"{{"gloss":"REGEN","fps":25,"frames":[{}]}}"#,
        serde_json::to_string(&frame).unwrap()
    );
    ws.write("one.json", &body);
    ws.write("two.json", &body);
    let out = ws.run(&[
        "build-dict",
        "--skeleton",
        "skeleton.json",
        "--out",
        "d.json",
        "one.json",
        "two.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("REGEN"));
}

#[test]
fn augment_expands_schedule_and_is_reproducible() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        "{\"id\":\"rec\",\"glosses\":[\"GLOSS_000\",\"GLOSS_001\",\"GLOSS_002\"],\"text\":\"es regnet\"}\n",
    );
    ws.write(
        "schedule.json",
        r#"{"permutation_ns":[0,3],"speed_scales":[1.0,1.5],"copies":1,"seed":5}"#,
    );
    let args = [
        "augment",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "dictionary.json",
        "--skeleton",
        "skeleton.json",
        "--schedule",
        "schedule.json",
        "--out-dir",
        "aug",
    ];
    let out = ws.run(&args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(stdout(&out).contains("generated 4 variants"));
    let names = read_dir_sorted(&ws.path("aug"));
    for expected in [
        "rec.N0.s1.c0.sspk",
        "rec.N0.s1.5.c0.sspk",
        "rec.N3.s1.c0.sspk",
        "rec.N3.s1.5.c0.sspk",
        "manifest.expanded.jsonl",
    ] {
        assert!(
            names.iter().any(|n| n == expected),
            "missing {expected} in {names:?}"
        );
    }
    let manifest1 = fs::read(ws.path("aug/manifest.expanded.jsonl")).unwrap();
    let text = String::from_utf8_lossy(&manifest1);
    assert!(text.contains("\"base_id\":\"rec\""));
    assert!(text.contains("\"text\":\"es regnet\""));

    // Rerun into a fresh directory: identical variant set and bytes.
    let mut rerun = args.to_vec();
    let last = rerun.len() - 1;
    rerun[last] = "aug2";
    let out = ws.run(&rerun);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_dir_sorted(&ws.path("aug2")), names);
    assert_eq!(
        fs::read(ws.path("aug/rec.N3.s1.5.c0.sspk")).unwrap(),
        fs::read(ws.path("aug2/rec.N3.s1.5.c0.sspk")).unwrap()
    );
    assert_eq!(
        manifest1,
        fs::read(ws.path("aug2/manifest.expanded.jsonl")).unwrap()
    );
}

#[test]
fn augment_with_two_copies_doubles_variants_with_distinct_seeds() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        "{\"id\":\"rec\",\"glosses\":[\"GLOSS_000\",\"GLOSS_001\"]}\n",
    );
    ws.write(
        "schedule.json",
        r#"{"permutation_ns":[0,3],"speed_scales":[1.0,1.5],"copies":2,"seed":5}"#,
    );
    let out = ws.run(&[
        "augment",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "dictionary.json",
        "--skeleton",
        "skeleton.json",
        "--schedule",
        "schedule.json",
        "--out-dir",
        "aug",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("generated 8 variants"));
    let manifest = fs::read_to_string(ws.path("aug/manifest.expanded.jsonl")).unwrap();
    let mut seeds = Vec::new();
    for line in manifest.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        seeds.push(v["seed"].as_u64().unwrap());
    }
    assert_eq!(seeds.len(), 8);
    seeds.sort_unstable();
    seeds.dedup();
    assert_eq!(seeds.len(), 8, "derived seeds must be distinct");
}

#[test]
fn coverage_reports_missing_glosses() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        "{\"id\":\"a\",\"glosses\":[\"GLOSS_000\",\"WOLKE\",\"GLOSS_001\",\"WOLKE\"]}\n",
    );
    let out = ws.run(&[
        "coverage",
        "--dict",
        "dictionary.json",
        "--manifest",
        "manifest.jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["vocab_size"], 3);
    assert_eq!(report["covered_count"], 2);
    assert_eq!(report["missing"], serde_json::json!(["WOLKE"]));
}

#[test]
fn score_identical_files_and_line_count_mismatch() {
    let ws = Workspace::new();
    ws.write(
        "hyp.txt",
        "viel regen im norden\nder himmel bleibt heute blau\n",
    );
    ws.write(
        "ref.txt",
        "viel regen im norden\nder himmel bleibt heute blau\n",
    );
    let out = ws.run(&["score", "--hyp", "hyp.txt", "--ref", "ref.txt"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        report["bleu"],
        serde_json::json!([100.0, 100.0, 100.0, 100.0])
    );
    assert_eq!(report["rouge_l"], 1.0);

    ws.write("short.txt", "viel regen im norden\n");
    let out = ws.run(&["score", "--hyp", "hyp.txt", "--ref", "short.txt"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains('2') && err.contains('1'), "stderr: {err}");
}

#[test]
fn fold_glosses_flag_collapses_case_and_variant_suffixes() {
    let ws = Workspace::new();
    let glosses = vec!["REGEN".to_string(), "WETTER".to_string()];
    synth::toy_dictionary(&glosses, 16, 25.0, 12)
        .save(File::create(ws.path("words.json")).unwrap())
        .unwrap();
    ws.write(
        "manifest.jsonl",
        "{\"id\":\"a\",\"glosses\":[\"regen2\",\"WETTER\"]}\n",
    );
    let base = [
        "stitch",
        "--manifest",
        "manifest.jsonl",
        "--dict",
        "words.json",
        "--skeleton",
        "skeleton.json",
        "--out-dir",
        "out",
    ];
    // Without folding the variant gloss is unknown and the record is skipped.
    let out = ws.run(&base);
    assert!(stdout(&out).contains("stitched 0 sequences (1 failed)"));

    // "regen2" folds to "REGEN", which the dictionary has.
    let mut folded = base.to_vec();
    folded.push("--fold-glosses");
    let out = ws.run(&folded);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("stitched 1 sequences (0 failed)"));
}

#[test]
fn usage_errors_exit_2() {
    let ws = Workspace::new();
    let out = ws.run(&["stitch", "--manifest"]);
    assert_eq!(out.status.code(), Some(2));
    let out = ws.run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn jobs_flag_does_not_change_output() {
    let ws = Workspace::new();
    ws.write(
        "manifest.jsonl",
        concat!(
            r#"{"id":"a","glosses":["GLOSS_000","GLOSS_001"]}"#,
            "\n",
            r#"{"id":"b","glosses":["GLOSS_002","GLOSS_003"]}"#,
            "\n",
        ),
    );
    for (dir, jobs) in [("j1", "1"), ("j4", "4")] {
        let out = ws.run(&[
            "stitch",
            "--manifest",
            "manifest.jsonl",
            "--dict",
            "dictionary.json",
            "--skeleton",
            "skeleton.json",
            "--out-dir",
            dir,
            "--jobs",
            jobs,
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(
        fs::read(ws.path("j1/a.sspk")).unwrap(),
        fs::read(ws.path("j4/a.sspk")).unwrap()
    );
    assert_eq!(
        fs::read(ws.path("j1/b.sspk")).unwrap(),
        fs::read(ws.path("j4/b.sspk")).unwrap()
    );
}
