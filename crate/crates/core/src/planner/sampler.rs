use nalgebra::{Point3, Vector3};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::gripper::{grasp_pose, GripperModel};
use super::grasp_set::{Contact, GraspCandidate, GraspSet};
use super::score::{angle_between, quality_from_angles};
use super::PlannerError;
use crate::geometry::{box_triangle_overlap, Bvh, OrientedBox, Ray, TriMesh};
use crate::projection::RegionPartition;

/// Offset of the probe ray origin below the sampled surface point.
pub const RAY_EPSILON: f64 = 1e-6;
/// Attempts allowed per requested candidate.
pub const ATTEMPTS_PER_TARGET: u64 = 200;
/// Attempts sharing one RNG stream. Part of the reproducibility contract:
/// changing it changes every sampled set.
pub const BATCH_SIZE: u64 = 64;
const BATCHES_PER_WAVE: u64 = 16;

struct Sampler<'a> {
    mesh: &'a TriMesh,
    bvh: &'a Bvh,
    partition: &'a RegionPartition,
    gripper: &'a GripperModel,
    faces: Vec<usize>,
    picker: WeightedIndex<f64>,
    cone: f64,
}

impl Sampler<'_> {
    fn attempt(&self, rng: &mut ChaCha8Rng, seed_id: u64) -> Option<GraspCandidate> {
        let face = self.faces[self.picker.sample(rng)];
        let (r1, r2): (f64, f64) = (rng.random(), rng.random());
        let [a, b, c] = self.mesh.triangle(face);
        let s = r1.sqrt();
        let p1 = Point3::from(a.coords * (1.0 - s) + b.coords * (s * (1.0 - r2)) + c.coords * (s * r2));
        let n1 = self.mesh.face_normals()[face];

        let ray = Ray::new(p1 - n1 * RAY_EPSILON, -n1).ok()?;
        let hit = self.bvh.ray_cast(self.mesh, &ray)?;
        let p2 = ray.at(hit.distance);
        let n2 = self.mesh.face_normals()[hit.face];
        let width = (p1 - p2).norm();
        if width > self.gripper.max_opening || width <= 0.0 || !self.partition.is_graspable(hit.face) {
            return None;
        }

        let theta_a = angle_between(&n1, &(p1 - p2));
        let theta_b = angle_between(&n2, &(p2 - p1));
        if theta_a > self.cone || theta_b > self.cone {
            return None;
        }

        let pose = (0..self.gripper.rolls)
            .map(|k| grasp_pose(&p1, &p2, std::f64::consts::TAU * k as f64 / self.gripper.rolls as f64))
            .find(|pose| self.gripper.swept_boxes(pose, width).iter().all(|bx| !self.hits_obstacle(bx)))?;

        Some(GraspCandidate {
            pose,
            contact_a: Contact { point: p1, normal: n1, face },
            contact_b: Contact { point: p2, normal: n2, face: hit.face },
            width,
            quality: quality_from_angles(theta_a, theta_b, width, self.gripper),
            seed_id,
        })
    }

    fn hits_obstacle(&self, bx: &OrientedBox) -> bool {
        let mut near = Vec::new();
        self.bvh.faces_overlapping(&bx.aabb(), &mut near);
        near.iter()
            .any(|&f| !self.partition.is_graspable(f) && box_triangle_overlap(bx, &self.mesh.triangle(f)))
    }

    fn run_batch(&self, seed: u64, batch: u64, budget: u64) -> Vec<GraspCandidate> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(batch);
        let start = batch * BATCH_SIZE;
        let end = (start + BATCH_SIZE).min(budget);
        (start..end).filter_map(|id| self.attempt(&mut rng, id)).collect()
    }
}

/// Sample antipodal parallel-jaw grasps whose contacts both lie on graspable
/// faces and whose swept gripper volume clears every obstacle face.
///
/// Attempts are numbered globally; candidate `seed_id` is that number. The
/// budget is split into fixed batches, each driven by its own ChaCha8 stream
/// of `rng_seed`, so the result does not depend on the thread count. The
/// first `n_target` accepted attempts in attempt order are returned, ranked.
pub fn sample_grasps(
    mesh: &TriMesh,
    bvh: &Bvh,
    partition: &RegionPartition,
    gripper: &GripperModel,
    n_target: usize,
    rng_seed: u64,
) -> Result<GraspSet, PlannerError> {
    gripper.validate()?;
    if n_target == 0 {
        return Err(PlannerError::InvalidArgument("n_target must be at least 1".into()));
    }
    if partition.face_count() != mesh.face_count() {
        return Err(PlannerError::PartitionMismatch { faces: mesh.face_count(), labels: partition.face_count() });
    }
    let faces: Vec<usize> = partition.graspable_faces().collect();
    let areas: Vec<f64> = faces.iter().map(|&f| mesh.face_areas()[f]).collect();
    let picker = WeightedIndex::new(&areas).map_err(|_| PlannerError::EmptyRegion)?;
    let sampler = Sampler { mesh, bvh, partition, gripper, faces, picker, cone: gripper.cone_half_angle() };

    let budget = ATTEMPTS_PER_TARGET * n_target as u64;
    let n_batches = budget.div_ceil(BATCH_SIZE);
    let mut accepted: Vec<GraspCandidate> = Vec::with_capacity(n_target);
    let mut next = 0;
    while next < n_batches && accepted.len() < n_target {
        let wave_end = (next + BATCHES_PER_WAVE).min(n_batches);
        let wave: Vec<Vec<GraspCandidate>> =
            (next..wave_end).into_par_iter().map(|b| sampler.run_batch(rng_seed, b, budget)).collect();
        for found in wave {
            accepted.extend(found);
        }
        next = wave_end;
    }
    accepted.truncate(n_target);
    if accepted.is_empty() {
        return Err(PlannerError::RegionTooSmall { attempts: budget });
    }
    log::debug!("sampled {} grasps from {} graspable faces", accepted.len(), sampler.faces.len());
    Ok(GraspSet::new(accepted, rng_seed))
}

/// [`sample_grasps`] with every face graspable: the part-agnostic baseline.
pub fn unrestricted_baseline(
    mesh: &TriMesh,
    bvh: &Bvh,
    gripper: &GripperModel,
    n_target: usize,
    rng_seed: u64,
) -> Result<GraspSet, PlannerError> {
    sample_grasps(mesh, bvh, &RegionPartition::all_graspable(mesh), gripper, n_target, rng_seed)
}

/// Closing direction at contact a (towards b), normalized.
pub fn closing_direction(candidate: &GraspCandidate) -> Vector3<f64> {
    (candidate.contact_b.point - candidate.contact_a.point).normalize()
}
