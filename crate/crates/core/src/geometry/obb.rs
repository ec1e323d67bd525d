use nalgebra::{Point3, Rotation3, Vector3};

use super::bvh::Aabb;

/// Box with arbitrary orientation. Columns of `rotation` are the box axes
/// expressed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    pub half_extents: Vector3<f64>,
    pub rotation: Rotation3<f64>,
}

impl OrientedBox {
    pub fn new(center: Point3<f64>, half_extents: Vector3<f64>, rotation: Rotation3<f64>) -> Self {
        debug_assert!(half_extents.iter().all(|&h| h > 0.0));
        OrientedBox { center, half_extents, rotation }
    }

    pub fn to_local(&self, p: &Point3<f64>) -> Vector3<f64> {
        self.rotation.inverse_transform_vector(&(p - self.center))
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        let h = self.half_extents;
        std::array::from_fn(|i| {
            let s = Vector3::new(
                if i & 1 == 0 { -h.x } else { h.x },
                if i & 2 == 0 { -h.y } else { h.y },
                if i & 4 == 0 { -h.z } else { h.z },
            );
            self.center + self.rotation * s
        })
    }

    pub fn aabb(&self) -> Aabb {
        let m = self.rotation.matrix().abs();
        let ext = m * self.half_extents;
        Aabb { min: self.center - ext, max: self.center + ext }
    }
}

/// Exact separating-axis test between a closed box and a closed triangle.
/// Touching counts as overlap.
pub fn box_triangle_overlap(bx: &OrientedBox, tri: &[Point3<f64>; 3]) -> bool {
    let h = bx.half_extents;
    let v = tri.map(|p| bx.to_local(&p));
    let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    let separated_on = |axis: Vector3<f64>| -> bool {
        let p = [axis.dot(&v[0]), axis.dot(&v[1]), axis.dot(&v[2])];
        let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
        let lo = p[0].min(p[1]).min(p[2]);
        let hi = p[0].max(p[1]).max(p[2]);
        lo > r || hi < -r
    };

    // box face normals
    for i in 0..3 {
        let lo = v[0][i].min(v[1][i]).min(v[2][i]);
        let hi = v[0][i].max(v[1][i]).max(v[2][i]);
        if lo > h[i] || hi < -h[i] {
            return false;
        }
    }
    // triangle plane
    if separated_on(edges[0].cross(&edges[1])) {
        return false;
    }
    // edge-edge
    for e in &edges {
        for axis in [Vector3::x(), Vector3::y(), Vector3::z()] {
            if separated_on(axis.cross(e)) {
                return false;
            }
        }
    }
    true
}
