//! Reference implementations used only to cross-check the library.
//!
//! Both are deliberately naive: a Möller–Trumbore test over every triangle
//! for rays, and dense point sampling for box/triangle contact.

#![allow(dead_code)]

use nalgebra::{Point3, Vector3};
use semgrasp::geometry::{OrientedBox, TriMesh};

/// Möller–Trumbore, one-sided tolerance free. Returns the hit distance.
pub fn moller_trumbore(origin: &Point3<f64>, dir: &Vector3<f64>, tri: &[Point3<f64>; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-300 {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 1e-9).then_some(t)
}

/// Nearest `(face, distance)` over all faces; ties go to the lower index.
pub fn brute_force_cast(mesh: &TriMesh, origin: &Point3<f64>, dir: &Vector3<f64>) -> Option<(usize, f64)> {
    let d = dir.normalize();
    let mut best: Option<(usize, f64)> = None;
    for f in 0..mesh.face_count() {
        if let Some(t) = moller_trumbore(origin, &d, &mesh.triangle(f)) {
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((f, t));
            }
        }
    }
    best
}

/// Distance from `p` to the box, zero when inside or on the boundary.
pub fn box_exterior_distance(bx: &OrientedBox, p: &Point3<f64>) -> f64 {
    let local = bx.rotation.inverse_transform_vector(&(p - bx.center));
    let out = local.abs() - bx.half_extents;
    out.map(|c| c.max(0.0)).norm()
}

/// Smallest exterior distance over a barycentric grid on the triangle with
/// spacing at most `step`. Zero means a sample landed in the box.
pub fn sampled_separation(bx: &OrientedBox, tri: &[Point3<f64>; 3], step: f64) -> f64 {
    let longest = (tri[1] - tri[0]).norm().max((tri[2] - tri[1]).norm()).max((tri[0] - tri[2]).norm());
    let n = ((longest / step).ceil() as usize).max(1);
    let mut best = f64::INFINITY;
    for i in 0..=n {
        for j in 0..=n - i {
            let (u, v) = (i as f64 / n as f64, j as f64 / n as f64);
            let p = tri[0] + (tri[1] - tri[0]) * u + (tri[2] - tri[0]) * v;
            best = best.min(box_exterior_distance(bx, &p));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

/// Sampling step fine enough for a box: a quarter of its thinnest half extent.
pub fn step_for(bx: &OrientedBox) -> f64 {
    bx.half_extents.min() / 4.0
}

/// Whether any triangle sample falls strictly inside the box shrunk by `margin`.
pub fn samples_inside(bx: &OrientedBox, tri: &[Point3<f64>; 3], margin: f64) -> bool {
    let shrunk = OrientedBox { half_extents: bx.half_extents.map(|h| (h - margin).max(0.0)), ..*bx };
    sampled_separation(&shrunk, tri, step_for(bx)) == 0.0
}
