mod common;

use common::oracles::{brute_force_cast, sampled_separation, step_for};
use nalgebra::{Point3, Rotation3, Unit, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semgrasp::geometry::{box_triangle_overlap, Bvh, OrientedBox, Ray};

#[test]
fn obj_parser_agrees_with_tobj() {
    for name in common::SCENES.iter().chain(&["cube", "plates"]) {
        let path = common::fixtures().join("meshes").join(format!("{name}.obj"));
        let ours = common::mesh(name);
        let (models, _) = tobj::load_obj(&path, &tobj::LoadOptions { triangulate: true, ..Default::default() }).unwrap();
        let m = &models[0].mesh;
        assert_eq!(models.len(), 1);
        assert_eq!(m.indices.len() / 3, ours.face_count(), "{name}");
        // tobj renumbers vertices by first use, so compare triangle corners.
        for (f, idx) in m.indices.chunks(3).enumerate() {
            let tri = ours.triangle(f);
            for (corner, &i) in tri.iter().zip(idx) {
                let q = &m.positions[3 * i as usize..3 * i as usize + 3];
                for k in 0..3 {
                    assert!((corner[k] - q[k] as f64).abs() <= 1e-6 * (1.0 + corner[k].abs()), "{name} face {f}");
                }
            }
        }
    }
}

fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_ray(mesh: &semgrasp::geometry::TriMesh, rng: &mut impl Rng) -> (Point3<f64>, Vector3<f64>) {
    let (lo, hi) = mesh.bounds();
    let c = nalgebra::center(&lo, &hi);
    let r = (hi - lo).norm();
    let origin = c + unit_vector(rng) * r;
    let target = c + unit_vector(rng) * (0.4 * r);
    (origin, target - origin)
}

#[test]
fn bvh_matches_brute_force_on_fixtures() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for name in common::SCENES {
        let mesh = common::mesh(name);
        let bvh = Bvh::build(&mesh);
        for _ in 0..1000 {
            let (o, d) = random_ray(&mesh, &mut rng);
            let ours = bvh.ray_cast(&mesh, &Ray::new(o, d).unwrap()).map(|h| (h.face, h.distance));
            let oracle = brute_force_cast(&mesh, &o, &d);
            match (ours, oracle) {
                (None, None) => {}
                (Some((fa, ta)), Some((fb, tb))) => {
                    assert!((ta - tb).abs() <= 1e-9, "{name}: {ta} vs {tb}");
                    assert_eq!(fa, fb, "{name}");
                }
                other => panic!("{name}: {other:?}"),
            }
        }
    }
}

fn random_box(rng: &mut impl Rng) -> OrientedBox {
    let axis = Unit::new_normalize(Vector3::new(rng.random(), rng.random(), rng.random::<f64>() + 0.1));
    OrientedBox::new(
        Point3::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5)),
        Vector3::new(rng.random_range(0.1..0.6), rng.random_range(0.1..0.6), rng.random_range(0.1..0.6)),
        Rotation3::from_axis_angle(&axis, rng.random_range(0.0..std::f64::consts::TAU)),
    )
}

#[test]
fn sat_agrees_with_point_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut hits = 0;
    for _ in 0..3000 {
        let bx = random_box(&mut rng);
        let tri: [Point3<f64>; 3] = std::array::from_fn(|_| {
            Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let step = step_for(&bx);
        let sep = sampled_separation(&bx, &tri, step);
        let sat = box_triangle_overlap(&bx, &tri);
        if sat {
            hits += 1;
            assert!(sep <= step, "SAT overlap but nearest sample {sep} away");
        } else {
            assert!(sep > 0.0, "sample inside a box SAT says is clear");
        }
    }
    assert!(hits > 300);
}
