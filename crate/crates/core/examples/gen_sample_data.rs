//! Writes a ready-to-use demo data set: canonical skeleton, a 50-sign toy
//! dictionary, an embedding table, a stitch manifest, and an augmentation
//! schedule.
//!
//! Usage: cargo run --example gen_sample_data -- [OUT_DIR]

use std::fs::{self, File};
use std::io::Write;
use std::path::PathBuf;

use signstitch::skeleton::save_skeleton;
use signstitch::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "sample-data".into())
        .into();
    fs::create_dir_all(&out)?;

    let skel = synth::sample_skeleton();
    save_skeleton(File::create(out.join("skeleton.json"))?, &skel)?;

    let glosses = synth::gloss_names(50);
    let dict = synth::toy_dictionary(&glosses, 40, 25.0, 1);
    dict.save(File::create(out.join("dictionary.json"))?)?;

    let mut tokens = glosses.clone();
    tokens.push("UNKNOWN_SIGN".to_string());
    synth::toy_embeddings(&tokens, 16, 2).save(File::create(out.join("embeddings.txt"))?)?;

    let mut manifest = File::create(out.join("manifest.jsonl"))?;
    for i in 0..10 {
        let sentence: Vec<String> = (0..6)
            .map(|g| glosses[(i * 7 + g * 3) % 50].clone())
            .collect();
        writeln!(
            manifest,
            r#"{{"id":"demo{:02}","glosses":{}}}"#,
            i,
            serde_json::to_string(&sentence)?
        )?;
    }

    let mut schedule = File::create(out.join("schedule.json"))?;
    writeln!(
        schedule,
        r#"{{"permutation_ns":[0,1,3,10],"speed_scales":[0.5,0.7,1.1,1.5],"copies":1,"seed":7}}"#
    )?;

    println!("sample data written to {}", out.display());
    Ok(())
}
