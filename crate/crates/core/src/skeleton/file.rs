//! JSON serialization of the canonical skeleton.
//!
//! The document carries the keypoint tree (name, parent, bone length, rest
//! direction), the articulated joints with their axes, the 104-entry angle
//! slot map, the articulator grouping, and the neck/shoulder markers used by
//! pose normalization. Files with a keypoint count other than 61 or a slot
//! count other than 104 are rejected.

use std::io::{BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::skeleton::rig::{
    CanonicalSkeleton, JointLayout, JointSpec, KeypointGroup, RotationAxis,
};
use crate::skeleton::types::{ANGLE_COUNT, KEYPOINT_COUNT};

pub const SKELETON_FILE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct SkeletonFile {
    version: u32,
    keypoints: Vec<KeypointDef>,
    joints: Vec<JointDef>,
    angle_slots: Vec<SlotDef>,
    groups: GroupsDef,
    markers: MarkersDef,
}

#[derive(Debug, Serialize, Deserialize)]
struct KeypointDef {
    name: String,
    parent: Option<String>,
    bone_length: f64,
    rest_direction: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct JointDef {
    keypoint: String,
    dof: usize,
    axes: Vec<RotationAxis>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SlotDef {
    joint: String,
    axis: RotationAxis,
}

#[derive(Debug, Serialize, Deserialize)]
struct GroupsDef {
    left_hand: Vec<String>,
    right_hand: Vec<String>,
    body: Vec<String>,
    face: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MarkersDef {
    neck: String,
    shoulder_left: String,
    shoulder_right: String,
}

pub fn load_skeleton(reader: impl Read) -> Result<CanonicalSkeleton> {
    let file: SkeletonFile = serde_json::from_reader(BufReader::new(reader))
        .map_err(|e| Error::Format(format!("skeleton file: {e}")))?;
    if file.version != SKELETON_FILE_VERSION {
        return Err(Error::Format(format!(
            "unsupported skeleton file version {}",
            file.version
        )));
    }
    if file.keypoints.len() != KEYPOINT_COUNT {
        return Err(Error::Schema {
            entity: "skeleton file".into(),
            detail: format!(
                "{} keypoints, expected {KEYPOINT_COUNT}",
                file.keypoints.len()
            ),
        });
    }
    if file.angle_slots.len() != ANGLE_COUNT {
        return Err(Error::Schema {
            entity: "skeleton file".into(),
            detail: format!(
                "{} angle slots, expected {ANGLE_COUNT}",
                file.angle_slots.len()
            ),
        });
    }

    let names: Vec<String> = file.keypoints.iter().map(|k| k.name.clone()).collect();
    let index_of = |name: &str, context: &str| -> Result<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::Schema {
                entity: "skeleton file".into(),
                detail: format!("{context} references unknown keypoint {name:?}"),
            })
    };

    let mut parents = Vec::with_capacity(names.len());
    for kp in &file.keypoints {
        parents.push(match &kp.parent {
            None => None,
            Some(p) => Some(index_of(p, &format!("keypoint {:?}", kp.name))?),
        });
    }

    let mut groups = vec![None; names.len()];
    for (group, list) in [
        (KeypointGroup::LeftHand, &file.groups.left_hand),
        (KeypointGroup::RightHand, &file.groups.right_hand),
        (KeypointGroup::Body, &file.groups.body),
        (KeypointGroup::Face, &file.groups.face),
    ] {
        for name in list {
            let i = index_of(name, "group list")?;
            if groups[i].is_some() {
                return Err(Error::Schema {
                    entity: "skeleton file".into(),
                    detail: format!("keypoint {name:?} listed in more than one group"),
                });
            }
            groups[i] = Some(group);
        }
    }
    let groups: Vec<KeypointGroup> = groups
        .into_iter()
        .enumerate()
        .map(|(i, g)| {
            g.ok_or_else(|| Error::Schema {
                entity: "skeleton file".into(),
                detail: format!("keypoint {:?} missing from the group lists", names[i]),
            })
        })
        .collect::<Result<_>>()?;

    let neck = index_of(&file.markers.neck, "neck marker")?;
    let shoulders = (
        index_of(&file.markers.shoulder_left, "shoulder marker")?,
        index_of(&file.markers.shoulder_right, "shoulder marker")?,
    );

    let mut joints = Vec::with_capacity(file.joints.len());
    for j in &file.joints {
        if j.dof != j.axes.len() {
            return Err(Error::Schema {
                entity: "skeleton file".into(),
                detail: format!(
                    "joint {:?} declares dof {} but lists {} axes",
                    j.keypoint,
                    j.dof,
                    j.axes.len()
                ),
            });
        }
        joints.push(JointSpec {
            keypoint: index_of(&j.keypoint, &format!("joint {:?}", j.keypoint))?,
            axes: j.axes.clone(),
        });
    }

    let mut slots = Vec::with_capacity(file.angle_slots.len());
    for s in &file.angle_slots {
        slots.push((index_of(&s.joint, "angle slot")?, s.axis));
    }

    let layout = JointLayout::new(names, parents, groups, neck, shoulders)?;
    let bone_lengths = file.keypoints.iter().map(|k| k.bone_length).collect();
    let rest_directions = file.keypoints.iter().map(|k| k.rest_direction).collect();
    CanonicalSkeleton::new(layout, bone_lengths, rest_directions, joints, slots)
}

pub fn save_skeleton(mut writer: impl Write, skel: &CanonicalSkeleton) -> Result<()> {
    let layout = skel.layout();
    let names = layout.names();
    let keypoints = names
        .iter()
        .enumerate()
        .map(|(i, name)| KeypointDef {
            name: name.clone(),
            parent: layout.parent(i).map(|p| names[p].clone()),
            bone_length: skel.bone_lengths()[i],
            rest_direction: skel.rest_directions()[i],
        })
        .collect();
    let joints = skel
        .joints()
        .iter()
        .map(|j| JointDef {
            keypoint: names[j.keypoint].clone(),
            dof: j.axes.len(),
            axes: j.axes.clone(),
        })
        .collect();
    let angle_slots = skel
        .angle_slots()
        .iter()
        .map(|(kp, axis)| SlotDef {
            joint: names[*kp].clone(),
            axis: *axis,
        })
        .collect();
    let in_group = |g: KeypointGroup| -> Vec<String> {
        (0..names.len())
            .filter(|&i| layout.group(i) == g)
            .map(|i| names[i].clone())
            .collect()
    };
    let (left, right) = layout.shoulder_indices();
    let file = SkeletonFile {
        version: SKELETON_FILE_VERSION,
        keypoints,
        joints,
        angle_slots,
        groups: GroupsDef {
            left_hand: in_group(KeypointGroup::LeftHand),
            right_hand: in_group(KeypointGroup::RightHand),
            body: in_group(KeypointGroup::Body),
            face: in_group(KeypointGroup::Face),
        },
        markers: MarkersDef {
            neck: names[layout.neck_index()].clone(),
            shoulder_left: names[left].clone(),
            shoulder_right: names[right].clone(),
        },
    };
    serde_json::to_writer_pretty(&mut writer, &file)?;
    writer.write_all(b"\n")?;
    Ok(())
}
