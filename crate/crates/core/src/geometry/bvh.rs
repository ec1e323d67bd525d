//! Bounding volume hierarchy over mesh faces.
//!
//! Nodes are split at the median face centroid along the longest axis of the
//! centroid bounds; leaves hold at most [`MAX_LEAF_SIZE`] faces. Building is
//! deterministic: equal centroid coordinates are ordered by face index.

use nalgebra::{Point3, Vector3};

use super::mesh::TriMesh;
use super::ray::{intersect_triangle, Hit, Ray};

pub const MAX_LEAF_SIZE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Aabb {
            min: Point3::from(Vector3::repeat(f64::INFINITY)),
            max: Point3::from(Vector3::repeat(f64::NEG_INFINITY)),
        }
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn contains(&self, p: &Point3<f64>) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    pub fn overlaps(&self, other: &Aabb) -> bool {
        (0..3).all(|i| self.min[i] <= other.max[i] && other.min[i] <= self.max[i])
    }

    fn padded(mut self) -> Self {
        let pad = 1e-9 * (self.max - self.min).norm() + 1e-12;
        self.min -= Vector3::repeat(pad);
        self.max += Vector3::repeat(pad);
        self
    }

    /// Parametric entry distance of the ray into the box, if it is entered
    /// before `t_max`.
    fn entry(&self, ray: &Ray, t_max: f64) -> Option<f64> {
        let o = ray.origin();
        let d = ray.direction();
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for i in 0..3 {
            if d[i] == 0.0 {
                if o[i] < self.min[i] || o[i] > self.max[i] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / d[i];
            let mut near = (self.min[i] - o[i]) * inv;
            let mut far = (self.max[i] - o[i]) * inv;
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // conservative slack against rounding in the slab distances
            far *= 1.0 + 4.0 * f64::EPSILON;
            t0 = t0.max(near);
            t1 = t1.min(far);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone)]
enum NodeKind {
    Leaf { start: usize, count: usize },
    Inner { left: usize, right: usize },
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<usize>,
    face_count: usize,
}

impl Bvh {
    pub fn build(mesh: &TriMesh) -> Self {
        let n = mesh.face_count();
        let centroids: Vec<Point3<f64>> = (0..n).map(|f| mesh.centroid(f)).collect();
        let mut order: Vec<usize> = (0..n).collect();
        let mut nodes = Vec::with_capacity(2 * n / MAX_LEAF_SIZE + 1);
        build_node(mesh, &centroids, &mut order, 0, &mut nodes);
        Bvh { nodes, order, face_count: n }
    }

    pub fn face_count(&self) -> usize {
        self.face_count
    }

    /// Face index lists of every leaf, in tree order.
    pub fn leaves(&self) -> Vec<(Aabb, &[usize])> {
        self.nodes
            .iter()
            .filter_map(|node| match node.kind {
                NodeKind::Leaf { start, count } => Some((node.bounds, &self.order[start..start + count])),
                NodeKind::Inner { .. } => None,
            })
            .collect()
    }

    /// Nearest hit along the ray. Ties on distance go to the lowest face index.
    pub fn ray_cast(&self, mesh: &TriMesh, ray: &Ray) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        self.nodes[0].bounds.entry(ray, f64::INFINITY)?;
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            let limit = best.map_or(f64::INFINITY, |h| h.distance);
            match node.bounds.entry(ray, limit) {
                None => continue,
                Some(t) if t > limit => continue,
                Some(_) => {}
            }
            match node.kind {
                NodeKind::Leaf { start, count } => {
                    for &face in &self.order[start..start + count] {
                        if let Some((distance, barycentric)) = intersect_triangle(ray, &mesh.triangle(face)) {
                            let hit = Hit { face, distance, barycentric };
                            if best.is_none_or(|b| hit.closer_than(&b)) {
                                best = Some(hit);
                            }
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let tl = self.nodes[left].bounds.entry(ray, limit);
                    let tr = self.nodes[right].bounds.entry(ray, limit);
                    match (tl, tr) {
                        (Some(a), Some(b)) => {
                            // push farther first so the nearer child is popped next
                            if a <= b {
                                stack.push(right);
                                stack.push(left);
                            } else {
                                stack.push(left);
                                stack.push(right);
                            }
                        }
                        (Some(_), None) => stack.push(left),
                        (None, Some(_)) => stack.push(right),
                        (None, None) => {}
                    }
                }
            }
        }
        best
    }

    /// Faces whose leaf bounds overlap `query`. Conservative: a superset of
    /// the faces whose own bounds overlap.
    pub fn faces_overlapping(&self, query: &Aabb, out: &mut Vec<usize>) {
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let node = &self.nodes[idx];
            if !node.bounds.overlaps(query) {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, count } => out.extend_from_slice(&self.order[start..start + count]),
                NodeKind::Inner { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
    }
}

fn build_node(
    mesh: &TriMesh,
    centroids: &[Point3<f64>],
    order: &mut [usize],
    offset: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &f in order.iter() {
        for p in mesh.triangle(f) {
            bounds.grow(&p);
        }
        cbounds.grow(&centroids[f]);
    }
    let bounds = bounds.padded();
    let idx = nodes.len();
    if order.len() <= MAX_LEAF_SIZE {
        nodes.push(Node { bounds, kind: NodeKind::Leaf { start: offset, count: order.len() } });
        return idx;
    }
    nodes.push(Node { bounds, kind: NodeKind::Leaf { start: 0, count: 0 } });

    let extent = cbounds.max - cbounds.min;
    let axis = extent.iamax();
    let mid = order.len() / 2;
    // with coincident centroids this degenerates to an index-order split
    order.select_nth_unstable_by(mid, |&a, &b| {
        centroids[a][axis].total_cmp(&centroids[b][axis]).then(a.cmp(&b))
    });
    let (lo, hi) = order.split_at_mut(mid);
    let left = build_node(mesh, centroids, lo, offset, nodes);
    let right = build_node(mesh, centroids, hi, offset + mid, nodes);
    nodes[idx].kind = NodeKind::Inner { left, right };
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn exhaustive(mesh: &TriMesh, ray: &Ray) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        for face in 0..mesh.face_count() {
            if let Some((distance, barycentric)) = intersect_triangle(ray, &mesh.triangle(face)) {
                let hit = Hit { face, distance, barycentric };
                if best.is_none_or(|b| hit.closer_than(&b)) {
                    best = Some(hit);
                }
            }
        }
        best
    }

    #[test]
    fn every_face_in_exactly_one_leaf() {
        let mesh = primitives::uv_sphere(Point3::origin(), 1.0, 24, 16).unwrap();
        let bvh = Bvh::build(&mesh);
        let mut seen = vec![0usize; mesh.face_count()];
        for (bounds, faces) in bvh.leaves() {
            assert!(faces.len() <= MAX_LEAF_SIZE);
            for &f in faces {
                seen[f] += 1;
                for p in mesh.triangle(f) {
                    assert!(bounds.contains(&p));
                }
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn cube_axis_ray() {
        let cube = primitives::cuboid(Point3::origin(), Vector3::repeat(0.5)).unwrap();
        let bvh = Bvh::build(&cube);
        let ray = Ray::new(Point3::new(0.0, 0.0, -5.0), Vector3::z()).unwrap();
        let hit = bvh.ray_cast(&cube, &ray).unwrap();
        assert!((hit.distance - 4.5).abs() < 1e-12);
        assert!((cube.centroid(hit.face).z + 0.5).abs() < 1e-12);
        let away = Ray::new(Point3::new(0.0, 0.0, -5.0), -Vector3::z()).unwrap();
        assert!(bvh.ray_cast(&cube, &away).is_none());
    }

    #[test]
    fn traversal_matches_exhaustive_scan() {
        let mesh = primitives::torus(Point3::origin(), Vector3::z(), 0.3, 0.1, 32, 16).unwrap();
        let bvh = Bvh::build(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let o = Point3::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
            let d = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let Ok(ray) = Ray::new(o, d) else { continue };
            assert_eq!(bvh.ray_cast(&mesh, &ray), exhaustive(&mesh, &ray));
        }
    }
}
