//! Triangle meshes, ray casting and box/triangle overlap.

mod bvh;
mod mesh;
mod obb;
pub mod primitives;
mod ray;

pub use bvh::{Aabb, Bvh, MAX_LEAF_SIZE};
pub use mesh::{load_mesh, parse_obj, parse_ply, MeshFormat, TriMesh, DEGENERATE_AREA};
pub use obb::{box_triangle_overlap, OrientedBox};
pub use ray::{intersect_triangle, Hit, Ray, MIN_HIT_DISTANCE};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("mesh has no valid faces")]
    EmptyMesh,
    #[error("face {face} references a vertex outside 0..{vertex_count}")]
    IndexOutOfRange { face: usize, vertex_count: usize },
    #[error("ray direction must be finite and nonzero")]
    InvalidRay,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Nearest hit along `ray`, via the hierarchy built for `mesh`.
pub fn ray_cast(mesh: &TriMesh, bvh: &Bvh, ray: &Ray) -> Option<Hit> {
    debug_assert_eq!(mesh.face_count(), bvh.face_count());
    bvh.ray_cast(mesh, ray)
}
