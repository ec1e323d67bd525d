//! Procedural closed surfaces with outward-facing winding. Used to build the
//! bundled fixture objects and in tests.

use std::f64::consts::TAU;

use nalgebra::{Point3, Unit, Vector3};

use super::mesh::TriMesh;
use super::GeometryError;

/// Orthonormal `(u, v)` completing `w` to a right-handed frame.
fn basis(w: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let helper = if w.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = helper.cross(w).normalize();
    let v = w.cross(&u);
    (u, v)
}

pub fn cuboid(center: Point3<f64>, half: Vector3<f64>) -> Result<TriMesh, GeometryError> {
    let c = center.coords;
    let verts = [
        [-1.0, -1.0, -1.0],
        [1.0, -1.0, -1.0],
        [1.0, 1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
        [-1.0, 1.0, 1.0],
    ]
    .iter()
    .map(|s| Point3::from(c + Vector3::new(s[0] * half.x, s[1] * half.y, s[2] * half.z)))
    .collect();
    let faces = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriMesh::new(verts, faces)
}

pub fn uv_sphere(center: Point3<f64>, radius: f64, slices: usize, stacks: usize) -> Result<TriMesh, GeometryError> {
    ellipsoid(center, Vector3::repeat(radius), slices, stacks)
}

pub fn ellipsoid(center: Point3<f64>, radii: Vector3<f64>, slices: usize, stacks: usize) -> Result<TriMesh, GeometryError> {
    let slices = slices.max(3);
    let stacks = stacks.max(2);
    let mut verts = vec![center + Vector3::new(0.0, 0.0, radii.z)];
    for i in 1..stacks {
        let theta = std::f64::consts::PI * i as f64 / stacks as f64;
        for j in 0..slices {
            let phi = TAU * j as f64 / slices as f64;
            verts.push(
                center
                    + Vector3::new(
                        radii.x * theta.sin() * phi.cos(),
                        radii.y * theta.sin() * phi.sin(),
                        radii.z * theta.cos(),
                    ),
            );
        }
    }
    let south = verts.len() as u32;
    verts.push(center - Vector3::new(0.0, 0.0, radii.z));
    let ring = |i: usize, j: usize| (1 + (i - 1) * slices + j % slices) as u32;
    let mut faces = Vec::new();
    for j in 0..slices {
        faces.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..stacks - 1 {
        for j in 0..slices {
            let (a, b, c, d) = (ring(i, j), ring(i + 1, j), ring(i + 1, j + 1), ring(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    for j in 0..slices {
        faces.push([ring(stacks - 1, j), south, ring(stacks - 1, j + 1)]);
    }
    TriMesh::new(verts, faces)
}

/// Closed truncated cone from `base` (radius `r0`) to `top` (radius `r1`).
/// A zero radius collapses that end to an apex.
pub fn frustum(base: Point3<f64>, top: Point3<f64>, r0: f64, r1: f64, segments: usize) -> Result<TriMesh, GeometryError> {
    let axis = top - base;
    let w = Unit::try_new(axis, 1e-12).ok_or(GeometryError::EmptyMesh)?.into_inner();
    let (u, v) = basis(&w);
    let n = segments.max(3);
    let mut verts = Vec::new();
    let mut ring = |center: Point3<f64>, r: f64| -> Vec<u32> {
        if r <= 0.0 {
            verts.push(center);
            return vec![(verts.len() - 1) as u32; n];
        }
        (0..n)
            .map(|j| {
                let phi = TAU * j as f64 / n as f64;
                verts.push(center + (u * phi.cos() + v * phi.sin()) * r);
                (verts.len() - 1) as u32
            })
            .collect()
    };
    let bottom = ring(base, r0);
    let upper = ring(top, r1);
    let c0 = verts.len() as u32;
    verts.push(base);
    let c1 = verts.len() as u32;
    verts.push(top);
    let mut faces = Vec::new();
    for j in 0..n {
        let k = (j + 1) % n;
        let (a, b, c, d) = (bottom[j], bottom[k], upper[k], upper[j]);
        if a != b {
            faces.push([a, b, c]);
        }
        if c != d {
            faces.push([a, c, d]);
        }
        if r0 > 0.0 {
            faces.push([c0, bottom[k], bottom[j]]);
        }
        if r1 > 0.0 {
            faces.push([c1, upper[j], upper[k]]);
        }
    }
    TriMesh::new(verts, faces)
}

pub fn cylinder(base: Point3<f64>, top: Point3<f64>, radius: f64, segments: usize) -> Result<TriMesh, GeometryError> {
    frustum(base, top, radius, radius, segments)
}

/// Torus around `axis` through `center` with ring radius `major` and tube
/// radius `minor`.
pub fn torus(
    center: Point3<f64>,
    axis: Vector3<f64>,
    major: f64,
    minor: f64,
    major_segments: usize,
    minor_segments: usize,
) -> Result<TriMesh, GeometryError> {
    let w = axis.normalize();
    let (u, v) = basis(&w);
    let (nm, nn) = (major_segments.max(3), minor_segments.max(3));
    let mut verts = Vec::with_capacity(nm * nn);
    for i in 0..nm {
        let phi = TAU * i as f64 / nm as f64;
        let radial = u * phi.cos() + v * phi.sin();
        for j in 0..nn {
            let psi = TAU * j as f64 / nn as f64;
            verts.push(center + radial * (major + minor * psi.cos()) + w * (minor * psi.sin()));
        }
    }
    let idx = |i: usize, j: usize| ((i % nm) * nn + j % nn) as u32;
    let mut faces = Vec::with_capacity(2 * nm * nn);
    for i in 0..nm {
        for j in 0..nn {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(verts, faces)
}

/// Single rectangle (two triangles) facing `normal`.
pub fn quad(center: Point3<f64>, normal: Vector3<f64>, half_u: f64, half_v: f64) -> Result<TriMesh, GeometryError> {
    let (u, v) = basis(&normal.normalize());
    let verts = vec![
        center - u * half_u - v * half_v,
        center + u * half_u - v * half_v,
        center + u * half_u + v * half_v,
        center - u * half_u + v * half_v,
    ];
    TriMesh::new(verts, vec![[0, 1, 2], [0, 2, 3]])
}

/// Signed enclosed volume; positive for closed meshes with outward winding.
pub fn signed_volume(mesh: &TriMesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn volumes_are_positive_and_close_to_analytic() {
        let o = Point3::origin();
        let cube = cuboid(o, Vector3::new(0.5, 0.5, 0.5)).unwrap();
        assert!((signed_volume(&cube) - 1.0).abs() < 1e-12);

        let s = uv_sphere(o, 1.0, 64, 32).unwrap();
        let v = signed_volume(&s);
        assert!(v > 0.0 && (v - 4.0 / 3.0 * PI).abs() / v < 0.02, "{v}");

        let c = cylinder(Point3::new(0.1, 0.2, 0.0), Point3::new(0.3, 0.2, 1.0), 0.5, 64).unwrap();
        let v = signed_volume(&c);
        let expect = PI * 0.25 * (0.04f64 + 1.0).sqrt();
        assert!((v - expect).abs() / expect < 0.01, "{v} {expect}");

        let cone = frustum(o, Point3::new(0.0, 0.0, 1.0), 0.0, 1.0, 64).unwrap();
        let v = signed_volume(&cone);
        assert!((v - PI / 3.0).abs() / v < 0.01, "{v}");

        let t = torus(o, Vector3::new(1.0, 1.0, 0.0), 1.0, 0.25, 64, 32).unwrap();
        let v = signed_volume(&t);
        let expect = 2.0 * PI * PI * 0.0625;
        assert!((v - expect).abs() / expect < 0.01, "{v} {expect}");
    }

    #[test]
    fn quad_faces_normal() {
        let q = quad(Point3::origin(), Vector3::new(0.0, 0.0, -1.0), 0.1, 0.2).unwrap();
        for n in q.face_normals() {
            assert!((n - Vector3::new(0.0, 0.0, -1.0)).norm() < 1e-12);
        }
        assert!((q.total_area() - 0.08).abs() < 1e-12);
    }
}
