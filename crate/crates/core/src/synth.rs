//! Seeded generators for a sample skeleton, toy dictionaries, and embedding
//! tables. Used by the test suites and benchmarks, and handy for producing
//! demo input files.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dictionary::{Dictionary, EmbeddingTable};
use crate::geom;
use crate::rng::{uniform_index, uniform_range};
use crate::skeleton::{
    AngleFrame, AngleSequence, CanonicalSkeleton, JointLayout, JointSpec, KeypointGroup,
    RotationAxis, ANGLE_COUNT,
};

const FINGERS: [&str; 5] = ["thumb", "index", "middle", "ring", "pinky"];

/// Builds a fixed 61-keypoint skeleton with 104 angle slots: a 9-keypoint
/// body chain, two 21-keypoint hands, and 10 face keypoints hanging off the
/// head. Angle slots are assigned joint by joint in keypoint order, axes in
/// x, y, z order.
pub fn sample_skeleton() -> CanonicalSkeleton {
    struct Kp {
        name: String,
        parent: Option<String>,
        group: KeypointGroup,
        length: f64,
        dir: [f64; 3],
        axes: &'static [RotationAxis],
    }

    use RotationAxis::{X, Y, Z};
    const XYZ: &[RotationAxis] = &[X, Y, Z];
    const XY: &[RotationAxis] = &[X, Y];
    const XZ: &[RotationAxis] = &[X, Z];
    const FLEX: &[RotationAxis] = &[X];

    let mut kps: Vec<Kp> = Vec::with_capacity(61);
    let body = |name: &str, parent: Option<&str>, length: f64, dir: [f64; 3], axes| Kp {
        name: name.into(),
        parent: parent.map(String::from),
        group: KeypointGroup::Body,
        length,
        dir,
        axes,
    };
    kps.push(body("body_root", None, 0.0, [0.0; 3], XYZ));
    kps.push(body("spine", Some("body_root"), 0.25, [0.0, 1.0, 0.0], XYZ));
    kps.push(body("chest", Some("spine"), 0.25, [0.0, 1.0, 0.0], XYZ));
    kps.push(body("neck", Some("chest"), 0.15, [0.0, 1.0, 0.0], XYZ));
    kps.push(body("head", Some("neck"), 0.12, [0.0, 1.0, 0.0], XY));
    for (side, sx) in [("l", -1.0), ("r", 1.0)] {
        kps.push(body(
            &format!("{side}_shoulder"),
            Some("chest"),
            0.22,
            [sx, 0.25, 0.0],
            XYZ,
        ));
        kps.push(body(
            &format!("{side}_elbow"),
            Some(&format!("{side}_shoulder")),
            0.28,
            [sx * 0.6, -0.8, 0.05],
            XYZ,
        ));
    }

    for (side, sx, group) in [
        ("l", -1.0, KeypointGroup::LeftHand),
        ("r", 1.0, KeypointGroup::RightHand),
    ] {
        let hand = |name: String, parent: String, length: f64, dir: [f64; 3], axes| Kp {
            name,
            parent: Some(parent),
            group,
            length,
            dir,
            axes,
        };
        let wrist = format!("{side}_wrist");
        kps.push(hand(
            wrist.clone(),
            format!("{side}_elbow"),
            0.26,
            [sx * 0.35, -0.9, 0.2],
            XYZ,
        ));
        for (f, finger) in FINGERS.iter().enumerate() {
            let spread = sx * (0.6 - 0.3 * f as f64);
            let mcp = format!("{side}_{finger}_mcp");
            let pip = format!("{side}_{finger}_pip");
            let dip = format!("{side}_{finger}_dip");
            let tip = format!("{side}_{finger}_tip");
            let mcp_axes = if *finger == "thumb" { XYZ } else { XZ };
            kps.push(hand(
                mcp.clone(),
                wrist.clone(),
                0.09,
                [spread, -0.8, 0.3],
                mcp_axes,
            ));
            kps.push(hand(
                pip.clone(),
                mcp,
                0.035,
                [spread * 0.5, -1.0, 0.2],
                FLEX,
            ));
            kps.push(hand(
                dip.clone(),
                pip,
                0.025,
                [spread * 0.5, -1.0, 0.1],
                FLEX,
            ));
            kps.push(hand(tip, dip, 0.02, [spread * 0.5, -1.0, 0.0], &[]));
        }
    }

    for k in 0..10 {
        let theta = 2.0 * std::f64::consts::PI * k as f64 / 10.0;
        kps.push(Kp {
            name: format!("face_{k}"),
            parent: Some("head".into()),
            group: KeypointGroup::Face,
            length: 0.1,
            dir: [0.4 * theta.cos(), 0.2 + 0.25 * theta.sin(), 0.85],
            axes: XYZ,
        });
    }

    let names: Vec<String> = kps.iter().map(|k| k.name.clone()).collect();
    let parents: Vec<Option<usize>> = kps
        .iter()
        .map(|k| {
            k.parent
                .as_ref()
                .map(|p| names.iter().position(|n| n == p).expect("known parent"))
        })
        .collect();
    let groups: Vec<KeypointGroup> = kps.iter().map(|k| k.group).collect();
    let neck = names.iter().position(|n| n == "neck").unwrap();
    let shoulders = (
        names.iter().position(|n| n == "l_shoulder").unwrap(),
        names.iter().position(|n| n == "r_shoulder").unwrap(),
    );
    let layout = JointLayout::new(names, parents, groups, neck, shoulders).expect("sample layout");

    let bone_lengths: Vec<f64> = kps.iter().map(|k| k.length).collect();
    let rest_directions: Vec<[f64; 3]> = kps
        .iter()
        .map(|k| geom::normalize(k.dir, 0.0).unwrap_or([0.0; 3]))
        .collect();
    let mut joints = Vec::new();
    let mut angle_slots = Vec::new();
    for (i, kp) in kps.iter().enumerate() {
        if kp.axes.is_empty() {
            continue;
        }
        joints.push(JointSpec {
            keypoint: i,
            axes: kp.axes.to_vec(),
        });
        for axis in kp.axes {
            angle_slots.push((i, *axis));
        }
    }
    CanonicalSkeleton::new(layout, bone_lengths, rest_directions, joints, angle_slots)
        .expect("sample skeleton")
}

/// Names `GLOSS_000`, `GLOSS_001`, ...
pub fn gloss_names(count: usize) -> Vec<String> {
    (0..count).map(|i| format!("GLOSS_{i:03}")).collect()
}

/// Builds a dictionary of `glosses.len()` smooth synthetic signs. Frame
/// counts vary around `frames_per_sign` by +/-25%; each angle slot follows a
/// two-harmonic sinusoid with randomized amplitude and phase.
pub fn toy_dictionary(
    glosses: &[String],
    frames_per_sign: usize,
    fps: f64,
    seed: u64,
) -> Dictionary {
    assert!(frames_per_sign >= 4);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = Vec::with_capacity(glosses.len());
    for gloss in glosses {
        let jitter = frames_per_sign / 4;
        let frames = frames_per_sign - jitter + uniform_index(&mut rng, 2 * jitter + 1);
        let mut channels = Vec::with_capacity(ANGLE_COUNT);
        for _ in 0..ANGLE_COUNT {
            let offset = uniform_range(&mut rng, -0.3, 0.3);
            let a1 = uniform_range(&mut rng, 0.05, 0.35);
            let f1 = uniform_range(&mut rng, 0.5, 1.5);
            let p1 = uniform_range(&mut rng, 0.0, std::f64::consts::TAU);
            let a2 = uniform_range(&mut rng, 0.02, 0.12);
            let f2 = uniform_range(&mut rng, 1.5, 3.0);
            let p2 = uniform_range(&mut rng, 0.0, std::f64::consts::TAU);
            channels.push(move |t: f64| {
                offset
                    + a1 * (std::f64::consts::TAU * f1 * t + p1).sin()
                    + a2 * (std::f64::consts::TAU * f2 * t + p2).sin()
            });
        }
        let frames: Vec<AngleFrame> = (0..frames)
            .map(|u| {
                let t = u as f64 / frames as f64;
                AngleFrame::new(channels.iter().map(|c| c(t)).collect()).unwrap()
            })
            .collect();
        entries.push((gloss.clone(), AngleSequence::new(frames, fps).unwrap()));
    }
    Dictionary::from_entries(entries, fps, "sample-skeleton").expect("toy dictionary")
}

/// Random embedding table over `tokens`, dimension `dim`, components uniform
/// in [-1, 1).
pub fn toy_embeddings(tokens: &[String], dim: usize, seed: u64) -> EmbeddingTable {
    assert!(dim >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vectors: Vec<(String, Vec<f64>)> = tokens
        .iter()
        .map(|t| {
            let v: Vec<f64> = (0..dim)
                .map(|_| uniform_range(&mut rng, -1.0, 1.0))
                .collect();
            (t.clone(), v)
        })
        .collect();
    EmbeddingTable::new(dim, vectors).expect("toy embeddings")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_skeleton_is_valid_and_sized() {
        let skel = sample_skeleton();
        assert_eq!(skel.layout().names().len(), 61);
        assert_eq!(skel.angle_slots().len(), 104);
        let dof: usize = skel.joints().iter().map(|j| j.axes.len()).sum();
        assert_eq!(dof, 104);
    }

    #[test]
    fn toy_dictionary_is_reproducible() {
        let glosses = gloss_names(4);
        let a = toy_dictionary(&glosses, 20, 25.0, 7);
        let b = toy_dictionary(&glosses, 20, 25.0, 7);
        assert_eq!(a.len(), 4);
        for g in &glosses {
            assert_eq!(a.lookup(g).unwrap().angles, b.lookup(g).unwrap().angles);
        }
    }
}
