//! Kinematic tree model: joint layout, canonical skeleton, forward kinematics,
//! and pose normalization.
//!
//! All angle data is interpreted with a fixed convention: radians, applied as
//! intrinsic rotations about each joint's declared axes in x, y, z order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{self, Mat3, Vec3};
use crate::skeleton::types::{
    AngleFrame, AngleSequence, PoseFrame, PoseSequence, ANGLE_COUNT, KEYPOINT_COUNT,
};

pub const LEFT_HAND_COUNT: usize = 21;
pub const RIGHT_HAND_COUNT: usize = 21;
pub const BODY_COUNT: usize = 9;
pub const FACE_COUNT: usize = 10;

/// Rotation axis of one angle slot, in the parent frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RotationAxis {
    X,
    Y,
    Z,
}

impl RotationAxis {
    fn order(self) -> usize {
        match self {
            RotationAxis::X => 0,
            RotationAxis::Y => 1,
            RotationAxis::Z => 2,
        }
    }
}

/// Which articulator group a keypoint belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeypointGroup {
    LeftHand,
    RightHand,
    Body,
    Face,
}

/// Names, parenting, and articulator grouping of the 61 keypoints.
#[derive(Debug, Clone, PartialEq)]
pub struct JointLayout {
    names: Vec<String>,
    parents: Vec<Option<usize>>,
    groups: Vec<KeypointGroup>,
    neck: usize,
    shoulders: (usize, usize),
    index_by_name: BTreeMap<String, usize>,
    root: usize,
    topo_order: Vec<usize>,
}

impl JointLayout {
    /// Validates keypoint count, group partition sizes (21/21/9/10), the
    /// single-rooted parent forest, and that neck and shoulders are body
    /// keypoints.
    pub fn new(
        names: Vec<String>,
        parents: Vec<Option<usize>>,
        groups: Vec<KeypointGroup>,
        neck: usize,
        shoulders: (usize, usize),
    ) -> Result<Self> {
        if names.len() != KEYPOINT_COUNT {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: format!("{} keypoints, expected {KEYPOINT_COUNT}", names.len()),
            });
        }
        if parents.len() != names.len() || groups.len() != names.len() {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: "parent and group lists must match the keypoint list".into(),
            });
        }
        let mut index_by_name = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Schema {
                    entity: "joint layout".into(),
                    detail: format!("keypoint {i} has an empty name"),
                });
            }
            if index_by_name.insert(name.clone(), i).is_some() {
                return Err(Error::Schema {
                    entity: "joint layout".into(),
                    detail: format!("duplicate keypoint name {name:?}"),
                });
            }
        }
        let count_of = |g: KeypointGroup| groups.iter().filter(|&&x| x == g).count();
        let sizes = (
            count_of(KeypointGroup::LeftHand),
            count_of(KeypointGroup::RightHand),
            count_of(KeypointGroup::Body),
            count_of(KeypointGroup::Face),
        );
        if sizes != (LEFT_HAND_COUNT, RIGHT_HAND_COUNT, BODY_COUNT, FACE_COUNT) {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: format!(
                    "group sizes {sizes:?}, expected ({LEFT_HAND_COUNT}, {RIGHT_HAND_COUNT}, {BODY_COUNT}, {FACE_COUNT})"
                ),
            });
        }

        let mut roots = Vec::new();
        for (i, p) in parents.iter().enumerate() {
            match p {
                None => roots.push(i),
                Some(p) if *p >= names.len() => {
                    return Err(Error::Schema {
                        entity: "joint layout".into(),
                        detail: format!("keypoint {i} has out-of-range parent {p}"),
                    });
                }
                Some(p) if *p == i => {
                    return Err(Error::Schema {
                        entity: "joint layout".into(),
                        detail: format!("keypoint {i} is its own parent"),
                    });
                }
                _ => {}
            }
        }
        let [root] = roots.as_slice() else {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: format!("expected exactly one root keypoint, found {}", roots.len()),
            });
        };
        let root = *root;
        if groups[root] != KeypointGroup::Body {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: "root keypoint must be a body keypoint".into(),
            });
        }

        // Kahn traversal; a shortfall means a parenting cycle.
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); names.len()];
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(i);
            }
        }
        let mut topo_order = Vec::with_capacity(names.len());
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            topo_order.push(i);
            for &c in children[i].iter().rev() {
                stack.push(c);
            }
        }
        if topo_order.len() != names.len() {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: "parent graph contains a cycle".into(),
            });
        }

        for (label, idx) in [
            ("neck", neck),
            ("left shoulder", shoulders.0),
            ("right shoulder", shoulders.1),
        ] {
            if idx >= names.len() || groups[idx] != KeypointGroup::Body {
                return Err(Error::Schema {
                    entity: "joint layout".into(),
                    detail: format!("{label} marker must reference a body keypoint"),
                });
            }
        }
        if shoulders.0 == shoulders.1 {
            return Err(Error::Schema {
                entity: "joint layout".into(),
                detail: "shoulder markers must be two distinct keypoints".into(),
            });
        }

        Ok(Self {
            names,
            parents,
            groups,
            neck,
            shoulders,
            index_by_name,
            root,
            topo_order,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parent(&self, index: usize) -> Option<usize> {
        self.parents[index]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parents
    }

    pub fn group(&self, index: usize) -> KeypointGroup {
        self.groups[index]
    }

    pub fn neck_index(&self) -> usize {
        self.neck
    }

    /// `(left, right)` shoulder keypoint indices.
    pub fn shoulder_indices(&self) -> (usize, usize) {
        self.shoulders
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index_by_name.get(name).copied()
    }

    /// Parent-before-child traversal order starting at the root.
    pub fn topo_order(&self) -> &[usize] {
        &self.topo_order
    }
}

/// One articulated joint: the keypoint it lives at and the rotation axes it
/// drives, listed in application order (x before y before z).
#[derive(Debug, Clone, PartialEq)]
pub struct JointSpec {
    pub keypoint: usize,
    pub axes: Vec<RotationAxis>,
}

/// Fixed-proportion skeleton: bone lengths, rest directions, and the mapping
/// from the 104 angle slots to (joint, axis) pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSkeleton {
    layout: JointLayout,
    bone_lengths: Vec<f64>,
    rest_directions: Vec<Vec3>,
    joints: Vec<JointSpec>,
    angle_slots: Vec<(usize, RotationAxis)>,
    // Per keypoint, the angle-slot index feeding each of its x/y/z rotations.
    rot_slots: Vec<[Option<usize>; 3]>,
}

impl CanonicalSkeleton {
    /// Validates bone lengths (positive), rest directions (unit norm within
    /// 1e-9), joint degrees of freedom (1..=3, distinct axes, 104 total), and
    /// that the slot map covers every declared (joint, axis) exactly once.
    pub fn new(
        layout: JointLayout,
        bone_lengths: Vec<f64>,
        rest_directions: Vec<Vec3>,
        joints: Vec<JointSpec>,
        angle_slots: Vec<(usize, RotationAxis)>,
    ) -> Result<Self> {
        let n = layout.names().len();
        if bone_lengths.len() != n || rest_directions.len() != n {
            return Err(Error::Schema {
                entity: "canonical skeleton".into(),
                detail: "bone length and rest direction lists must cover every keypoint".into(),
            });
        }
        for i in 0..n {
            if i == layout.root_index() {
                continue;
            }
            if !(bone_lengths[i].is_finite() && bone_lengths[i] > 0.0) {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "keypoint {:?} has non-positive bone length {}",
                        layout.names()[i],
                        bone_lengths[i]
                    ),
                });
            }
            let norm = geom::norm(rest_directions[i]);
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "keypoint {:?} rest direction has norm {norm}, expected 1",
                        layout.names()[i]
                    ),
                });
            }
        }

        let mut rot_slots: Vec<[Option<usize>; 3]> = vec![[None; 3]; n];
        let mut joint_of_keypoint: Vec<Option<usize>> = vec![None; n];
        let mut dof_total = 0usize;
        for (j, joint) in joints.iter().enumerate() {
            if joint.keypoint >= n {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!("joint {j} references out-of-range keypoint"),
                });
            }
            if joint_of_keypoint[joint.keypoint].is_some() {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "keypoint {:?} declared as a joint more than once",
                        layout.names()[joint.keypoint]
                    ),
                });
            }
            joint_of_keypoint[joint.keypoint] = Some(j);
            if joint.axes.is_empty() || joint.axes.len() > 3 {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "joint {:?} has {} degrees of freedom, expected 1 to 3",
                        layout.names()[joint.keypoint],
                        joint.axes.len()
                    ),
                });
            }
            if joint.axes.windows(2).any(|w| w[0].order() >= w[1].order()) {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "joint {:?} axes must be distinct and listed in x, y, z order",
                        layout.names()[joint.keypoint]
                    ),
                });
            }
            dof_total += joint.axes.len();
        }
        if dof_total != ANGLE_COUNT {
            return Err(Error::Schema {
                entity: "canonical skeleton".into(),
                detail: format!(
                    "joint degrees of freedom sum to {dof_total}, expected {ANGLE_COUNT}"
                ),
            });
        }
        if angle_slots.len() != ANGLE_COUNT {
            return Err(Error::Schema {
                entity: "canonical skeleton".into(),
                detail: format!("{} angle slots, expected {ANGLE_COUNT}", angle_slots.len()),
            });
        }
        for (slot, (kp, axis)) in angle_slots.iter().enumerate() {
            if *kp >= n {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!("angle slot {slot} references out-of-range keypoint"),
                });
            }
            let Some(j) = joint_of_keypoint[*kp] else {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "angle slot {slot} references keypoint {:?} which is not a joint",
                        layout.names()[*kp]
                    ),
                });
            };
            if !joints[j].axes.contains(axis) {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "angle slot {slot} uses axis {axis:?} not declared for joint {:?}",
                        layout.names()[*kp]
                    ),
                });
            }
            let cell = &mut rot_slots[*kp][axis.order()];
            if cell.is_some() {
                return Err(Error::Schema {
                    entity: "canonical skeleton".into(),
                    detail: format!(
                        "joint {:?} axis {axis:?} mapped by more than one angle slot",
                        layout.names()[*kp]
                    ),
                });
            }
            *cell = Some(slot);
        }
        // dof_total == ANGLE_COUNT and no double mapping, so coverage is exact.

        Ok(Self {
            layout,
            bone_lengths,
            rest_directions,
            joints,
            angle_slots,
            rot_slots,
        })
    }

    pub fn layout(&self) -> &JointLayout {
        &self.layout
    }

    pub fn bone_lengths(&self) -> &[f64] {
        &self.bone_lengths
    }

    pub fn rest_directions(&self) -> &[Vec3] {
        &self.rest_directions
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn angle_slots(&self) -> &[(usize, RotationAxis)] {
        &self.angle_slots
    }

    /// Pose with all angles zero: every bone along its rest direction.
    pub fn rest_pose(&self) -> PoseFrame {
        forward_kinematics(&AngleFrame::zeros(), self).expect("rest pose of a validated skeleton")
    }
}

/// Core FK traversal shared by the public entry point and the unit tests,
/// which exercise it on small hand-built chains.
fn fk_positions(
    angles: &[f64],
    topo_order: &[usize],
    parents: &[Option<usize>],
    bone_lengths: &[f64],
    rest_directions: &[Vec3],
    rot_slots: &[[Option<usize>; 3]],
) -> Vec<Vec3> {
    let n = parents.len();
    let mut positions = vec![[0.0; 3]; n];
    let mut rotations = vec![geom::IDENTITY; n];
    for &i in topo_order {
        let local = local_rotation(angles, rot_slots[i]);
        match parents[i] {
            None => {
                rotations[i] = local;
            }
            Some(p) => {
                let bone = geom::scale(rest_directions[i], bone_lengths[i]);
                positions[i] = geom::add(positions[p], geom::mat_vec(rotations[p], bone));
                rotations[i] = geom::mat_mul(rotations[p], local);
            }
        }
    }
    positions
}

fn local_rotation(angles: &[f64], slots: [Option<usize>; 3]) -> Mat3 {
    let mut rot = geom::IDENTITY;
    let mut any = false;
    if let Some(s) = slots[0] {
        rot = geom::rot_x(angles[s]);
        any = true;
    }
    if let Some(s) = slots[1] {
        let ry = geom::rot_y(angles[s]);
        rot = if any { geom::mat_mul(rot, ry) } else { ry };
        any = true;
    }
    if let Some(s) = slots[2] {
        let rz = geom::rot_z(angles[s]);
        rot = if any { geom::mat_mul(rot, rz) } else { rz };
    }
    rot
}

/// Converts one angle frame to 3D keypoint positions using the canonical
/// skeleton. The root sits at the origin; each joint's rotation is applied to
/// the bones of its children, so output bone lengths always equal the
/// canonical ones.
pub fn forward_kinematics(angles: &AngleFrame, skel: &CanonicalSkeleton) -> Result<PoseFrame> {
    let positions = fk_positions(
        angles.values(),
        skel.layout.topo_order(),
        skel.layout.parents(),
        &skel.bone_lengths,
        &skel.rest_directions,
        &skel.rot_slots,
    );
    Ok(PoseFrame::from_points_unchecked(positions))
}

/// Applies [`forward_kinematics`] to every frame, keeping the frame rate.
pub fn fk_sequence(angles: &AngleSequence, skel: &CanonicalSkeleton) -> Result<PoseSequence> {
    let frames = angles
        .frames()
        .iter()
        .map(|f| forward_kinematics(f, skel))
        .collect::<Result<Vec<_>>>()?;
    Ok(PoseSequence::from_frames_unchecked(frames, angles.fps()))
}

const DEGENERATE_EPS: f64 = 1e-12;

/// Rigidly normalizes every frame: the neck is translated to the origin, the
/// left-to-right shoulder direction is rotated onto +x, and the torso plane
/// spanned by the shoulders and the neck becomes the xy-plane (neck on the +y
/// side of the shoulder midpoint). Frames where the shoulders coincide or the
/// neck is collinear with the shoulder line are rejected with their frame
/// index.
pub fn normalize_pose(seq: &PoseSequence, layout: &JointLayout) -> Result<PoseSequence> {
    let neck = layout.neck_index();
    let (left, right) = layout.shoulder_indices();
    let mut out = Vec::with_capacity(seq.len());
    for (frame_index, frame) in seq.frames().iter().enumerate() {
        let points = frame.points();
        let origin = points[neck];
        let span = geom::sub(points[right], points[left]);
        let x_axis = geom::normalize(span, DEGENERATE_EPS).ok_or(Error::DegenerateFrame {
            frame: frame_index,
            detail: "shoulder keypoints coincide".into(),
        })?;
        let mid = geom::scale(geom::add(points[left], points[right]), 0.5);
        let up = geom::sub(origin, mid);
        let up_perp = geom::sub(up, geom::scale(x_axis, geom::dot(up, x_axis)));
        let y_axis = geom::normalize(up_perp, DEGENERATE_EPS).ok_or(Error::DegenerateFrame {
            frame: frame_index,
            detail: "neck is collinear with the shoulder line".into(),
        })?;
        let z_axis = geom::cross(x_axis, y_axis);
        let rotation: Mat3 = [x_axis, y_axis, z_axis];
        let points = points
            .iter()
            .map(|p| geom::mat_vec(rotation, geom::sub(*p, origin)))
            .collect();
        out.push(PoseFrame::from_points_unchecked(points));
    }
    Ok(PoseSequence::from_frames_unchecked(out, seq.fps()))
}
