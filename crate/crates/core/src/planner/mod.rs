//! Antipodal parallel-jaw grasp sampling confined to the graspable faces.

mod grasp_set;
mod gripper;
mod sampler;
mod score;

pub use grasp_set::{
    format_sig9, top_k, Contact, ContactRecord, GraspCandidate, GraspRecord, GraspSet, GraspSetDocument, GraspSetHeader,
};
pub use gripper::{grasp_pose, GripperModel};
pub use sampler::{
    closing_direction, sample_grasps, unrestricted_baseline, ATTEMPTS_PER_TARGET, BATCH_SIZE, RAY_EPSILON,
};
pub use score::{angle_between, contact_angles, quality_from_angles, score_grasp};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no grasp found within {attempts} attempts; the graspable region is too small or unreachable")]
    RegionTooSmall { attempts: u64 },
    #[error("partition has no graspable face")]
    EmptyRegion,
    #[error("invalid gripper: {0}")]
    InvalidGripper(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("partition labels {labels} faces but the mesh has {faces}")]
    PartitionMismatch { faces: usize, labels: usize },
    #[error("grasp document: {0}")]
    Document(String),
}
