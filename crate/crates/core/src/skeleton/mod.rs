//! Skeleton data model: joint layout, canonical skeleton, forward kinematics,
//! pose normalization, and temporal resampling.

mod file;
mod rig;
mod types;

pub use file::{load_skeleton, save_skeleton, SKELETON_FILE_VERSION};
pub use rig::{
    fk_sequence, forward_kinematics, normalize_pose, CanonicalSkeleton, JointLayout, JointSpec,
    KeypointGroup, RotationAxis, BODY_COUNT, FACE_COUNT, LEFT_HAND_COUNT, RIGHT_HAND_COUNT,
};
pub use types::{AngleFrame, AngleSequence, PoseFrame, PoseSequence, ANGLE_COUNT, KEYPOINT_COUNT};

pub(crate) use types::LinearFrame;
