use nalgebra::{Point3, Vector3};

use super::GeometryError;

/// Minimum accepted hit distance along a ray (m).
pub const MIN_HIT_DISTANCE: f64 = 1e-9;

/// Half-line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Point3<f64>,
    direction: Vector3<f64>,
}

impl Ray {
    /// Builds a ray, normalizing `direction`. Fails on a zero or non-finite
    /// direction.
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Result<Self, GeometryError> {
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() || !origin.coords.iter().all(|c| c.is_finite()) {
            return Err(GeometryError::InvalidRay);
        }
        Ok(Ray { origin, direction: direction / norm })
    }

    pub fn origin(&self) -> Point3<f64> {
        self.origin
    }

    pub fn direction(&self) -> Vector3<f64> {
        self.direction
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}

/// Nearest intersection of a ray with a mesh face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub face: usize,
    pub distance: f64,
    /// Weights of the face's three vertices, summing to one.
    pub barycentric: [f64; 3],
}

impl Hit {
    /// Strict ordering used everywhere a nearest hit is chosen: shorter
    /// distance wins, equal distances go to the lower face index.
    pub fn closer_than(&self, other: &Hit) -> bool {
        self.distance < other.distance || (self.distance == other.distance && self.face < other.face)
    }
}

/// Watertight ray/triangle test (shear-and-scale formulation). Edges and
/// vertices count as inside, and a ray through a shared edge hits at least
/// one of the adjacent faces. Returns `(distance, barycentric)`.
pub fn intersect_triangle(ray: &Ray, tri: &[Point3<f64>; 3]) -> Option<(f64, [f64; 3])> {
    let d = ray.direction;
    let kz = d.iamax();
    let mut kx = (kz + 1) % 3;
    let mut ky = (kx + 1) % 3;
    if d[kz] < 0.0 {
        std::mem::swap(&mut kx, &mut ky);
    }
    let sx = d[kx] / d[kz];
    let sy = d[ky] / d[kz];
    let sz = 1.0 / d[kz];

    let a = tri[0] - ray.origin;
    let b = tri[1] - ray.origin;
    let c = tri[2] - ray.origin;

    let ax = a[kx] - sx * a[kz];
    let ay = a[ky] - sy * a[kz];
    let bx = b[kx] - sx * b[kz];
    let by = b[ky] - sy * b[kz];
    let cx = c[kx] - sx * c[kz];
    let cy = c[ky] - sy * c[kz];

    let u = cx * by - cy * bx;
    let v = ax * cy - ay * cx;
    let w = bx * ay - by * ax;

    if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
        return None;
    }
    let det = u + v + w;
    if det == 0.0 {
        return None;
    }
    let az = sz * a[kz];
    let bz = sz * b[kz];
    let cz = sz * c[kz];
    let t = (u * az + v * bz + w * cz) / det;
    if !(t > MIN_HIT_DISTANCE) || !t.is_finite() {
        return None;
    }
    Some((t, [u / det, v / det, w / det]))
}
