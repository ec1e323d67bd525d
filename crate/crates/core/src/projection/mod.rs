//! Pinhole projection and the box-driven graspable/obstacle split.

mod camera;
mod partition;

pub use camera::{project_point, CameraModel, CameraPose, MIN_DEPTH};
pub use partition::{
    face_in_box, partition_mesh, region_of_grasp, BoundingBox2D, FaceLabel, RegionMembership, RegionPartition, Visibility,
    DEFAULT_DEPTH_BAND,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("no face qualifies as graspable")]
    EmptyRegion,
    #[error("bounding box does not intersect the image")]
    BoxOutsideImage,
    #[error("malformed bounding box")]
    InvalidBox,
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
    #[error("camera file: {0}")]
    CameraParse(String),
    #[error("label file line {line}: unknown label `{value}`")]
    LabelParse { line: usize, value: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
