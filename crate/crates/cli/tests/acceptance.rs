#![allow(clippy::neg_cmp_op_on_partial_ord)] // `ensure!` negates float comparisons

//! Acceptance suite: every release criterion runs in order and prints one
//! PASS/FAIL line; the process fails if any criterion fails.
//!
//!     cargo test -p signstitch-cli --test acceptance

use std::collections::HashMap;
use std::io::Write;
use std::process::Command;
use std::time::Instant;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use signstitch::augment::{self, AugmentSchedule, PermuteMode, SpeedMode};
use signstitch::batch::{self, BatchItem, PostOps, StitchContext};
use signstitch::geom;
use signstitch::metrics::{bleu, rouge_l, Corpus};
use signstitch::skeleton::{forward_kinematics, AngleFrame, ANGLE_COUNT};
use signstitch::sspk;
use signstitch::stitcher::{
    design_lowpass, filtfilt, stitch, stitch_unfiltered, StitchRequest, TransitionPolicy,
};
use signstitch::synth;

type Outcome = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)*) => {
        if !$cond {
            return Err(format!($($msg)*));
        }
    };
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: &[Criterion] = &[
        (
            "bone lengths invariant under FK for 1000 random frames, < 1 s",
            criterion_1,
        ),
        (
            "200 random requests: velocity bound holds, U = sum(d) + sum(n)",
            criterion_2,
        ),
        (
            "zero-phase gain within 1 dB of analytic at 0.5/1/2/4x cutoff, DC < 1e-9",
            criterion_3,
        ),
        (
            "BLEU/ROUGE match brute-force oracles on 100 corpora, identity exact",
            criterion_4,
        ),
        (
            "resolve equals brute-force cosine argmax on 1000 random tables",
            criterion_5,
        ),
        (
            "160 schedule variants; N=0 bit-identical; frame counts round(U*s)",
            criterion_6,
        ),
        (
            "1000 eight-gloss sentences single-threaded < 10 s, reruns bit-identical",
            criterion_7,
        ),
        (
            "dictionary/SSPK round-trips byte-identical; corrupt inputs exit 1",
            criterion_8,
        ),
    ];
    let mut failures = 0;
    for (i, (summary, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(()) => println!("acceptance {} ({summary}): PASS", i + 1),
            Err(why) => {
                println!("acceptance {} ({summary}): FAIL — {why}", i + 1);
                failures += 1;
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

fn index(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    (rng.next_u64() % bound as u64) as usize
}

fn criterion_1() -> Outcome {
    let skel = synth::sample_skeleton();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let values: Vec<f64> = (0..ANGLE_COUNT)
            .map(|_| (uniform(&mut rng) - 0.5) * 2.0 * std::f64::consts::PI)
            .collect();
        let pose = forward_kinematics(&AngleFrame::new(values).unwrap(), &skel).unwrap();
        for (i, parent) in skel.layout().parents().iter().enumerate() {
            let Some(p) = parent else { continue };
            let len = geom::norm(geom::sub(pose.points()[i], pose.points()[*p]));
            worst = worst.max((len - skel.bone_lengths()[i]).abs() / skel.bone_lengths()[i]);
        }
    }
    let elapsed = start.elapsed();
    ensure!(worst < 1e-6, "max relative bone-length deviation {worst:e}");
    ensure!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    Ok(())
}

fn criterion_2() -> Outcome {
    let glosses = synth::gloss_names(20);
    let dict = synth::toy_dictionary(&glosses, 24, 25.0, 2002);
    let skel = synth::sample_skeleton();
    let policy = TransitionPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    for trial in 0..200 {
        let count = 2 + index(&mut rng, 6);
        let sentence: Vec<String> = (0..count)
            .map(|_| glosses[index(&mut rng, glosses.len())].clone())
            .collect();
        let durations: Vec<usize> = (0..count).map(|_| 8 + index(&mut rng, 40)).collect();
        let req = StitchRequest::new(sentence, 4.0, 25.0).with_durations(durations.clone());
        let result =
            stitch_unfiltered(&req, &dict, None, &skel, &policy).map_err(|e| e.to_string())?;

        let transition_total: usize = result.transition_plans.iter().map(|p| p.frames).sum();
        let expected: usize = durations.iter().sum::<usize>() + transition_total;
        ensure!(
            result.poses.len() == expected,
            "trial {trial}: U = {} but sum(d) + sum(n) = {expected}",
            result.poses.len()
        );

        for (span, plan) in result.transition_spans.iter().zip(&result.transition_plans) {
            for i in span.start.saturating_sub(1)..span.end {
                let step = result.poses.frame_velocity(i).unwrap();
                ensure!(
                    step <= plan.velocity_bound * (1.0 + 1e-6),
                    "trial {trial}: step {step} exceeds bound {}",
                    plan.velocity_bound
                );
            }
        }
    }
    Ok(())
}

fn criterion_3() -> Outcome {
    let fs = 1000.0;
    let cutoff = 5.0;
    let len = 4000usize;
    for order in [2usize, 4] {
        let (b, a) = design_lowpass(cutoff, fs, order).map_err(|e| e.to_string())?;

        let dc = filtfilt(&b, &a, &vec![1.0; 256]);
        let dc_err = dc.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        ensure!(dc_err < 1e-9, "order {order}: DC error {dc_err:e}");

        for mult in [0.5, 1.0, 2.0, 4.0] {
            let f = cutoff * mult;
            let x: Vec<f64> = (0..len)
                .map(|i| (std::f64::consts::TAU * f * i as f64 / fs).sin())
                .collect();
            let y = filtfilt(&b, &a, &x);

            let margin = len / 8;
            let (mut s, mut cs, mut n) = (0.0, 0.0, 0.0);
            for (i, v) in y.iter().enumerate().take(len - margin).skip(margin) {
                let phase = std::f64::consts::TAU * f * i as f64 / fs;
                s += v * phase.sin();
                cs += v * phase.cos();
                n += 1.0;
            }
            let gain = 2.0 * (s * s + cs * cs).sqrt() / n;
            let analytic = 1.0 / (1.0 + (f / cutoff).powi(2 * order as i32));
            let db = 10.0 * (gain / analytic).log10();
            ensure!(
                db.abs() < 1.0,
                "order {order}, {mult}x cutoff: {gain:e} vs {analytic:e} ({db:.3} dB)"
            );
        }
    }
    Ok(())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let vocab = ["a", "b", "c", "d", "e", "f"];
    for trial in 0..100 {
        let pairs: Vec<(Vec<String>, Vec<String>)> = (0..1 + index(&mut rng, 5))
            .map(|_| {
                let sent = |rng: &mut ChaCha8Rng| -> Vec<String> {
                    (0..1 + index(rng, 9))
                        .map(|_| vocab[index(rng, vocab.len())].to_string())
                        .collect()
                };
                (sent(&mut rng), sent(&mut rng))
            })
            .collect();
        let corpus = Corpus::new(pairs);
        let report = bleu(&corpus, false).map_err(|e| e.to_string())?;
        let expected = oracle_bleu(&corpus);
        for (k, (got, want)) in report.scores.iter().zip(&expected).enumerate() {
            ensure!(
                (got - want).abs() < 1e-9,
                "trial {trial} BLEU-{}: {got} vs {want}",
                k + 1
            );
        }
        let rouge = rouge_l(&corpus).unwrap();
        let rouge_expected = oracle_rouge(&corpus);
        ensure!(
            (rouge - rouge_expected).abs() < 1e-9,
            "trial {trial} ROUGE: {rouge} vs {rouge_expected}"
        );
    }

    let sentence = |s: &str| -> Vec<String> { s.split(' ').map(String::from).collect() };
    let identity = Corpus::new(vec![
        (
            sentence("viel regen im norden"),
            sentence("viel regen im norden"),
        ),
        (
            sentence("der himmel bleibt heute blau"),
            sentence("der himmel bleibt heute blau"),
        ),
    ]);
    let report = bleu(&identity, false).unwrap();
    ensure!(
        report.scores == [100.0; 4],
        "identity BLEU {:?}",
        report.scores
    );
    ensure!(rouge_l(&identity).unwrap() == 1.0, "identity ROUGE");
    Ok(())
}

fn criterion_5() -> Outcome {
    let glosses = synth::gloss_names(50);
    let dict = synth::toy_dictionary(&glosses, 4, 25.0, 5005);
    let mut tokens = glosses.clone();
    tokens.push("QUERY".to_string());
    for seed in 0..1000u64 {
        let emb = synth::toy_embeddings(&tokens, 16, seed);
        let got = dict.resolve("QUERY", &emb).map_err(|e| e.to_string())?;

        let q = emb.vector("QUERY").unwrap();
        let mut best: Option<(f64, &str)> = None;
        for g in &glosses {
            let v = emb.vector(g).unwrap();
            let dot: f64 = q.iter().zip(v).map(|(a, b)| a * b).sum();
            let nq = q.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let sim = dot / (nq * nv);
            let better = match best {
                None => true,
                Some((bs, bg)) => sim > bs || (sim == bs && g.as_str() < bg),
            };
            if better {
                best = Some((sim, g));
            }
        }
        let (sim, gloss) = best.unwrap();
        ensure!(
            got.entry.gloss == gloss && got.similarity == sim,
            "seed {seed}: resolve chose {:?} ({}), oracle {gloss:?} ({sim})",
            got.entry.gloss,
            got.similarity
        );
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let glosses = synth::gloss_names(20);
    let dict = synth::toy_dictionary(&glosses, 14, 25.0, 6006);
    let skel = synth::sample_skeleton();
    let ctx = StitchContext {
        dict: &dict,
        emb: None,
        skel: &skel,
        policy: TransitionPolicy::default(),
        post: PostOps::default(),
    };
    let items: Vec<BatchItem> = (0..10)
        .map(|i| BatchItem {
            id: format!("req{i}"),
            request: StitchRequest::new(
                (0..4)
                    .map(|g| glosses[(i * 5 + g * 3) % 20].clone())
                    .collect(),
                4.0,
                25.0,
            ),
        })
        .collect();
    let schedule = AugmentSchedule {
        permutation_ns: vec![0, 1, 3, 10],
        speed_scales: vec![0.5, 0.7, 1.1, 1.5],
        copies: 1,
        seed: 66,
        permute_mode: PermuteMode::Window,
        speed_mode: SpeedMode::Sequence,
    };
    let outputs = batch::augment_batch(&items, &schedule, &ctx);
    ensure!(
        outputs.len() == 160,
        "{} variants, expected 160",
        outputs.len()
    );

    for (plan, result) in &outputs {
        let result = result.as_ref().map_err(|e| e.to_string())?;
        let base = &items[plan.base_index].request;

        // Pre-scale length of this variant's permuted request.
        let perm = augment::permutation_indices(
            base.glosses.len(),
            plan.n,
            plan.seed,
            schedule.permute_mode,
        );
        let mut permuted = base.clone();
        permuted.glosses = perm.iter().map(|&i| base.glosses[i].clone()).collect();
        let unscaled = stitch(&permuted, &dict, None, &skel, &ctx.policy).unwrap();
        let expected_len = ((unscaled.poses.len() as f64) * plan.scale).round() as usize;
        ensure!(
            result.poses.len() == expected_len,
            "variant {}: {} frames, expected round({} * {}) = {expected_len}",
            plan.variant_id,
            result.poses.len(),
            unscaled.poses.len(),
            plan.scale
        );

        if plan.n == 0 {
            let plain = augment::scale_result(
                stitch(base, &dict, None, &skel, &ctx.policy).unwrap(),
                plan.scale,
            )
            .unwrap();
            ensure!(
                sspk::sspk_bytes(&result.poses) == sspk::sspk_bytes(&plain.poses),
                "variant {}: N=0 output differs from unaugmented stitch",
                plan.variant_id
            );
        }
    }
    Ok(())
}

fn criterion_7() -> Outcome {
    let glosses = synth::gloss_names(50);
    let dict = synth::toy_dictionary(&glosses, 40, 25.0, 7007);
    let skel = synth::sample_skeleton();
    let ctx = StitchContext {
        dict: &dict,
        emb: None,
        skel: &skel,
        policy: TransitionPolicy::default(),
        post: PostOps::default(),
    };
    let items: Vec<BatchItem> = (0..1000)
        .map(|i| BatchItem {
            id: format!("s{i}"),
            request: StitchRequest::new(
                (0..8)
                    .map(|g| glosses[(i * 17 + g * 11) % 50].clone())
                    .collect(),
                4.0,
                25.0,
            ),
        })
        .collect();

    let start = Instant::now();
    let first = batch::stitch_batch_seq(&items, &ctx);
    let elapsed = start.elapsed();
    ensure!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");

    let first_bytes: Vec<Vec<u8>> = first
        .into_iter()
        .map(|r| sspk::sspk_bytes(&r.unwrap().poses))
        .collect();
    let second_bytes: Vec<Vec<u8>> = batch::stitch_batch_seq(&items, &ctx)
        .into_iter()
        .map(|r| sspk::sspk_bytes(&r.unwrap().poses))
        .collect();
    ensure!(
        first_bytes == second_bytes,
        "rerun produced different bytes"
    );
    println!(
        "  (criterion 7: 1000 sentences in {:.2} s)",
        elapsed.as_secs_f64()
    );
    Ok(())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();

    // Dictionary file: write -> read -> write, byte-identical.
    let glosses = synth::gloss_names(5);
    let dict = synth::toy_dictionary(&glosses, 10, 25.0, 8008);
    let mut first = Vec::new();
    dict.save(&mut first).unwrap();
    let reloaded = signstitch::Dictionary::load(first.as_slice()).map_err(|e| e.to_string())?;
    let mut second = Vec::new();
    reloaded.save(&mut second).unwrap();
    ensure!(first == second, "dictionary round trip not byte-identical");

    // SSPK: write -> read -> write, byte-identical; corrupted header rejected.
    let skel = synth::sample_skeleton();
    let req = StitchRequest::new(vec!["GLOSS_000".into(), "GLOSS_001".into()], 4.0, 25.0);
    let result = stitch(&req, &dict, None, &skel, &TransitionPolicy::default()).unwrap();
    let bytes = sspk::sspk_bytes(&result.poses);
    let reread = sspk::read_sspk(bytes.as_slice()).map_err(|e| e.to_string())?;
    ensure!(
        sspk::sspk_bytes(&reread) == bytes,
        "SSPK round trip not byte-identical"
    );
    let mut corrupt = bytes.clone();
    corrupt[1] = b'X';
    ensure!(
        sspk::read_sspk(corrupt.as_slice()).is_err(),
        "bad magic accepted"
    );

    // CLI: a 103-wide frame is rejected with exit code 1 naming the entry.
    let skel_path = dir.path().join("skeleton.json");
    signstitch::skeleton::save_skeleton(std::fs::File::create(&skel_path).unwrap(), &skel).unwrap();
    let raw_path = dir.path().join("bad.json");
    let mut frame = vec![0.0f64; 103];
    frame[0] = 0.5;
    let mut f = std::fs::File::create(&raw_path).unwrap();
    write!(
        f,
        r#"{{"gloss":"BROKEN","fps":25,"frames":[{}]}}"#,
        serde_json::to_string(&frame).unwrap()
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_signstitch"))
        .args(["build-dict", "--skeleton"])
        .arg(&skel_path)
        .arg("--out")
        .arg(dir.path().join("dict.json"))
        .arg(&raw_path)
        .output()
        .unwrap();
    ensure!(out.status.code() == Some(1), "exit {:?}", out.status.code());
    let stderr = String::from_utf8_lossy(&out.stderr);
    ensure!(
        stderr.contains("BROKEN"),
        "stderr does not name the entry: {stderr}"
    );

    // CLI: corrupted dictionary header is rejected with exit code 1.
    let bad_dict = dir.path().join("corrupt.json");
    std::fs::write(&bad_dict, b"{\"version\":9,\"garbled").unwrap();
    let manifest_path = dir.path().join("m.jsonl");
    std::fs::write(
        &manifest_path,
        "{\"id\":\"a\",\"glosses\":[\"GLOSS_000\"]}\n",
    )
    .unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_signstitch"))
        .args(["stitch", "--manifest"])
        .arg(&manifest_path)
        .arg("--dict")
        .arg(&bad_dict)
        .arg("--skeleton")
        .arg(&skel_path)
        .arg("--out-dir")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    ensure!(out.status.code() == Some(1), "exit {:?}", out.status.code());
    Ok(())
}

fn oracle_bleu(corpus: &Corpus) -> [f64; 4] {
    let grams = |tokens: &[String], n: usize| -> HashMap<String, usize> {
        let mut m = HashMap::new();
        if tokens.len() >= n {
            for i in 0..=tokens.len() - n {
                *m.entry(tokens[i..i + n].join(" ")).or_insert(0) += 1;
            }
        }
        m
    };
    let mut matches = [0usize; 4];
    let mut totals = [0usize; 4];
    let (mut c, mut r) = (0usize, 0usize);
    for (hyp, reference) in corpus.pairs() {
        c += hyp.len();
        r += reference.len();
        for n in 1..=4 {
            let h = grams(hyp, n);
            let g = grams(reference, n);
            for (gram, count) in h {
                totals[n - 1] += count;
                matches[n - 1] += count.min(g.get(&gram).copied().unwrap_or(0));
            }
        }
    }
    let bp = if c == 0 {
        0.0
    } else if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    let mut out = [0.0; 4];
    for k in 1..=4 {
        let mut product = 1.0f64;
        let mut zero = false;
        for n in 0..k {
            if totals[n] == 0 || matches[n] == 0 {
                zero = true;
                break;
            }
            product *= matches[n] as f64 / totals[n] as f64;
        }
        if !zero {
            out[k - 1] = 100.0 * bp * product.powf(1.0 / k as f64);
        }
    }
    out
}

fn oracle_rouge(corpus: &Corpus) -> f64 {
    let mut total = 0.0;
    for (hyp, reference) in corpus.pairs() {
        let (n, m) = (hyp.len(), reference.len());
        let mut table = vec![vec![0usize; m + 1]; n + 1];
        for i in 1..=n {
            for j in 1..=m {
                table[i][j] = if hyp[i - 1] == reference[j - 1] {
                    table[i - 1][j - 1] + 1
                } else {
                    table[i - 1][j].max(table[i][j - 1])
                };
            }
        }
        let l = table[n][m];
        if l == 0 {
            continue;
        }
        let p = l as f64 / n as f64;
        let r = l as f64 / m as f64;
        total += 2.0 * p * r / (p + r);
    }
    total / corpus.pairs().len() as f64
}
