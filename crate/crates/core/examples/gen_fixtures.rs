//! Regenerates everything under `fixtures/` that is derived from geometry:
//! meshes, per-face part names, cameras, rendered images, detector boxes,
//! pipeline configs and the stored doll baseline.
//!
//! `cargo run -p semgrasp --example gen_fixtures [-- <fixtures dir>]`

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use image::{Rgb, RgbImage};
use nalgebra::{Point3, Vector3};
use semgrasp::geometry::{primitives, Bvh, TriMesh};
use semgrasp::pipeline::{run_partition, PipelineConfig};
use semgrasp::planner::{unrestricted_baseline, GraspSet, GripperModel};
use semgrasp::projection::{project_point, region_of_grasp, CameraModel, RegionMembership};
use semgrasp::Mode;

const WIDTH: u32 = 640;
const HEIGHT: u32 = 480;
const BOX_PAD: f64 = 3.0;
const BACKGROUND: Rgb<u8> = Rgb([236, 236, 232]);

struct Part {
    name: &'static str,
    mesh: TriMesh,
    color: [u8; 3],
}

struct Fixture {
    name: &'static str,
    label: &'static str,
    mode: Mode,
    parts: Vec<Part>,
    /// Part whose box the detector returns for the language answer.
    target: &'static str,
    /// Surface points of the target part that count towards its box.
    keep: fn(&Point3<f64>) -> bool,
    /// Another part whose box is also returned for the target label, with a
    /// lower score.
    decoy: &'static str,
    seed: u64,
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

fn p(x: f64, y: f64, z: f64) -> Point3<f64> {
    Point3::new(x, y, z)
}

fn part(name: &'static str, mesh: Result<TriMesh, semgrasp::geometry::GeometryError>, color: [u8; 3]) -> Res<Part> {
    Ok(Part { name, mesh: mesh?, color })
}

fn fixtures() -> Res<Vec<Fixture>> {
    let y = Vector3::y();
    Ok(vec![
        Fixture {
            name: "mug",
            label: "mug",
            mode: Mode::Grasp,
            parts: vec![
                part("body", primitives::cylinder(p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.10), 0.04, 32), [190, 70, 60])?,
                part("handle", primitives::torus(p(0.058, 0.0, 0.05), y, 0.025, 0.007, 32, 12), [60, 90, 180])?,
            ],
            target: "handle",
            keep: |v| v.x > 0.047,
            decoy: "body",
            seed: 42,
        },
        Fixture {
            name: "ice_cream",
            label: "ice cream",
            mode: Mode::Grasp,
            parts: vec![
                part("cone", primitives::frustum(p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.12), 0.0, 0.025, 32), [210, 160, 90])?,
                part("scoop", primitives::uv_sphere(p(0.0, 0.0, 0.14), 0.03, 32, 16), [240, 200, 220])?,
            ],
            target: "cone",
            keep: |v| v.z < 0.105,
            decoy: "scoop",
            seed: 7,
        },
        Fixture {
            name: "doll",
            label: "doll",
            mode: Mode::Grasp,
            parts: vec![
                part("torso", primitives::cuboid(p(0.0, 0.0, 0.09), Vector3::new(0.025, 0.015, 0.035)), [80, 150, 90])?,
                part("head", primitives::uv_sphere(p(0.0, 0.0, 0.152), 0.025, 24, 12), [235, 195, 160])?,
                part("leg", primitives::cylinder(p(-0.012, 0.0, 0.0), p(-0.012, 0.0, 0.055), 0.009, 16), [70, 70, 140])?,
                part("leg", primitives::cylinder(p(0.012, 0.0, 0.0), p(0.012, 0.0, 0.055), 0.009, 16), [70, 70, 140])?,
                part("arm", primitives::cylinder(p(-0.034, 0.0, 0.12), p(-0.034, 0.0, 0.07), 0.008, 16), [235, 195, 160])?,
                part("arm", primitives::cylinder(p(0.034, 0.0, 0.12), p(0.034, 0.0, 0.07), 0.008, 16), [235, 195, 160])?,
            ],
            target: "torso",
            keep: |_| true,
            decoy: "head",
            seed: 3,
        },
        Fixture {
            name: "plant",
            label: "plant",
            mode: Mode::Grasp,
            parts: vec![
                part("pot", primitives::frustum(p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.07), 0.035, 0.045, 32), [170, 90, 50])?,
                part("stem", primitives::cylinder(p(0.0, 0.0, 0.07), p(0.0, 0.0, 0.085), 0.006, 12), [90, 120, 60])?,
                part("leaves", primitives::ellipsoid(p(0.0, 0.0, 0.13), Vector3::new(0.055, 0.055, 0.05), 32, 16), [60, 160, 70])?,
            ],
            target: "pot",
            keep: |_| true,
            decoy: "leaves",
            seed: 11,
        },
        Fixture {
            name: "cupcake",
            label: "cupcake",
            mode: Mode::Grasp,
            parts: vec![
                part("wrapper", primitives::frustum(p(0.0, 0.0, 0.0), p(0.0, 0.0, 0.04), 0.025, 0.031, 32), [200, 60, 120])?,
                part("frosting", primitives::ellipsoid(p(0.0, 0.0, 0.058), Vector3::new(0.035, 0.035, 0.022), 32, 16), [250, 235, 240])?,
            ],
            target: "wrapper",
            keep: |v| v.z < 0.034,
            decoy: "frosting",
            seed: 5,
        },
        Fixture {
            name: "teapot",
            label: "teapot",
            mode: Mode::Avoid,
            parts: vec![
                part("body", primitives::ellipsoid(p(0.0, 0.0, 0.05), Vector3::new(0.055, 0.055, 0.05), 32, 16), [120, 160, 190])?,
                part("spout", primitives::cylinder(p(0.04, 0.0, 0.045), p(0.1, 0.0, 0.09), 0.009, 16), [100, 140, 170])?,
                part("handle", primitives::torus(p(-0.072, 0.0, 0.055), y, 0.024, 0.007, 32, 12), [90, 110, 140])?,
                part("lid", primitives::uv_sphere(p(0.0, 0.0, 0.106), 0.012, 16, 8), [90, 110, 140])?,
            ],
            target: "spout",
            keep: |v| v.x > 0.058,
            decoy: "handle",
            seed: 9,
        },
    ])
}

fn assemble(f: &Fixture) -> Res<(TriMesh, Vec<&'static str>)> {
    let meshes: Vec<TriMesh> = f.parts.iter().map(|p| p.mesh.clone()).collect();
    let (mesh, ranges) = TriMesh::merge(&meshes)?;
    let mut names = vec![""; mesh.face_count()];
    for (part, range) in f.parts.iter().zip(ranges) {
        for face in range {
            names[face] = part.name;
        }
    }
    Ok((mesh, names))
}

/// Level side view framing the whole mesh.
fn camera_for(mesh: &TriMesh) -> Res<CameraModel> {
    let (lo, hi) = mesh.bounds();
    let center = nalgebra::center(&lo, &hi);
    let extent = (hi - lo).norm();
    let dist = 0.45;
    let eye = center + Vector3::new(0.0, -dist, 0.0);
    let f = 0.75 * HEIGHT as f64 * (eye - center).norm() / extent;
    Ok(CameraModel::look_at(eye, center, Vector3::z(), f, f, WIDTH, HEIGHT)?)
}

/// Flat-shaded z-buffer rendering.
fn render(mesh: &TriMesh, colors: &[[u8; 3]], cam: &CameraModel) -> RgbImage {
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, BACKGROUND);
    let mut depth = vec![f64::INFINITY; (WIDTH * HEIGHT) as usize];
    let eye = cam.center();
    for face in 0..mesh.face_count() {
        let tri = mesh.triangle(face);
        let cams: Vec<Point3<f64>> = tri.iter().map(|v| cam.to_camera(v)).collect();
        let Some(px): Option<Vec<_>> = tri.iter().map(|v| project_point(cam, v)).collect() else { continue };
        let n = mesh.face_normals()[face];
        let view = (eye - mesh.centroid(face)).normalize();
        let shade = 0.35 + 0.65 * n.dot(&view).abs();
        let c = colors[face].map(|ch| (ch as f64 * shade).round().clamp(0.0, 255.0) as u8);
        let xmin = px.iter().map(|q| q.x).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
        let xmax = px.iter().map(|q| q.x).fold(f64::NEG_INFINITY, f64::max).ceil().min(WIDTH as f64 - 1.0) as i64;
        let ymin = px.iter().map(|q| q.y).fold(f64::INFINITY, f64::min).floor().max(0.0) as u32;
        let ymax = px.iter().map(|q| q.y).fold(f64::NEG_INFINITY, f64::max).ceil().min(HEIGHT as f64 - 1.0) as i64;
        let area = (px[1].x - px[0].x) * (px[2].y - px[0].y) - (px[2].x - px[0].x) * (px[1].y - px[0].y);
        if area.abs() < 1e-12 {
            continue;
        }
        for yy in ymin as i64..=ymax {
            for xx in xmin as i64..=xmax {
                let (sx, sy) = (xx as f64 + 0.5, yy as f64 + 0.5);
                let w0 = ((px[1].x - sx) * (px[2].y - sy) - (px[2].x - sx) * (px[1].y - sy)) / area;
                let w1 = ((px[2].x - sx) * (px[0].y - sy) - (px[0].x - sx) * (px[2].y - sy)) / area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                let z = w0 * cams[0].z + w1 * cams[1].z + w2 * cams[2].z;
                let idx = (yy as u32 * WIDTH + xx as u32) as usize;
                if z < depth[idx] {
                    depth[idx] = z;
                    img.put_pixel(xx as u32, yy as u32, Rgb(c));
                }
            }
        }
    }
    img
}

/// Points on a barycentric grid over every face.
fn surface_samples(mesh: &TriMesh) -> Vec<Point3<f64>> {
    const N: usize = 8;
    let mut out = Vec::new();
    for face in 0..mesh.face_count() {
        let [a, b, c] = mesh.triangle(face);
        for i in 0..=N {
            for j in 0..=N - i {
                let (u, v) = (i as f64 / N as f64, j as f64 / N as f64);
                out.push(Point3::from(a.coords * (1.0 - u - v) + b.coords * u + c.coords * v));
            }
        }
    }
    out
}

fn pixel_box(cam: &CameraModel, pts: impl Iterator<Item = Point3<f64>>) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY];
    for q in pts.filter_map(|v| project_point(cam, &v)) {
        b = [b[0].min(q.x), b[1].min(q.y), b[2].max(q.x), b[3].max(q.y)];
    }
    [
        (b[0] - BOX_PAD).max(0.0).floor(),
        (b[1] - BOX_PAD).max(0.0).floor(),
        (b[2] + BOX_PAD).min(WIDTH as f64).ceil(),
        (b[3] + BOX_PAD).min(HEIGHT as f64).ceil(),
    ]
}

fn config_text(f: &Fixture) -> String {
    let mode = match f.mode {
        Mode::Grasp => "grasp",
        Mode::Avoid => "avoid",
    };
    format!(
        r#"object_label = "{label}"
mode = "{mode}"
mesh = "../meshes/{name}.obj"
image = "../images/{name}.png"
camera = "../cameras/{name}.toml"
n_grasps = 20
rng_seed = {seed}

[visibility]
rule = "silhouette"

[backend]
detection_threshold = 0.1

[backend.llm]
kind = "mock"
fixture = "../llm_parts.csv"

[backend.vlm]
kind = "mock"
fixture = "../vlm_boxes.csv"
"#,
        label = f.label,
        name = f.name,
        seed = f.seed
    )
}

fn write_extra_meshes(root: &Path) -> Res<()> {
    let cube = primitives::cuboid(p(0.0, 0.0, 0.5), Vector3::repeat(0.5))?;
    cube.save_obj(&root.join("meshes/cube.obj"))?;
    let up = primitives::quad(p(0.0, 0.0, 0.03), Vector3::z(), 0.05, 0.05)?;
    let down = primitives::quad(p(0.0, 0.0, -0.03), -Vector3::z(), 0.05, 0.05)?;
    TriMesh::merge(&[up, down])?.0.save_obj(&root.join("meshes/plates.obj"))?;
    Ok(())
}

/// 20 unrestricted doll grasps of which exactly 4 lie on the torso.
fn doll_baseline(root: &Path) -> Res<()> {
    let cfg = PipelineConfig::load(&root.join("configs/doll.toml"))?;
    let (_, partition) = run_partition(&cfg)?;
    let mesh = semgrasp::geometry::load_mesh(&root.join("meshes/doll.obj"), semgrasp::geometry::MeshFormat::Obj)?;
    let bvh = Bvh::build(&mesh);
    let pool = unrestricted_baseline(&mesh, &bvh, &GripperModel::default(), 400, 2024)?;
    let (inside, outside): (Vec<_>, Vec<_>) = pool
        .grasps()
        .iter()
        .cloned()
        .partition(|g| region_of_grasp(&partition, &g.contact_faces()) == RegionMembership::InsideA);
    if inside.len() < 4 || outside.len() < 16 {
        return Err(format!("doll pool too small: {} inside, {} outside", inside.len(), outside.len()).into());
    }
    let mut chosen: Vec<_> = inside.into_iter().take(4).collect();
    chosen.extend(outside.into_iter().take(16));
    let set = GraspSet::new(chosen, 2024);
    std::fs::create_dir_all(root.join("grasps"))?;
    std::fs::write(root.join("grasps/doll_baseline.json"), set.to_json("doll", &GripperModel::default()))?;
    Ok(())
}

fn main() -> Res<()> {
    let root: PathBuf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
    });
    for dir in ["meshes", "cameras", "images", "configs"] {
        std::fs::create_dir_all(root.join(dir))?;
    }
    write_extra_meshes(&root)?;

    let mut summaries = Vec::new();
    let mut boxes = String::from("image_id,part_label,x_min,y_min,x_max,y_max,confidence\n");
    for f in fixtures()? {
        let (mesh, names) = assemble(&f)?;
        mesh.save_obj(&root.join(format!("meshes/{}.obj", f.name)))?;
        let mut part_text = String::new();
        for n in &names {
            writeln!(part_text, "{n}")?;
        }
        std::fs::write(root.join(format!("meshes/{}.parts.txt", f.name)), part_text)?;

        let cam = camera_for(&mesh)?;
        std::fs::write(root.join(format!("cameras/{}.toml", f.name)), cam.to_toml())?;
        let colors: Vec<[u8; 3]> = {
            let mut c = Vec::with_capacity(mesh.face_count());
            for pt in &f.parts {
                c.extend(std::iter::repeat_n(pt.color, pt.mesh.face_count()));
            }
            c
        };
        render(&mesh, &colors, &cam).save(root.join(format!("images/{}.png", f.name)))?;

        // one box per distinct part name; the target box gets the top score
        let mut per_part: BTreeMap<&str, Vec<Point3<f64>>> = BTreeMap::new();
        for pt in &f.parts {
            let pts = surface_samples(&pt.mesh).into_iter().filter(|v| pt.name != f.target || (f.keep)(v));
            per_part.entry(pt.name).or_default().extend(pts);
        }
        for (name, verts) in &per_part {
            let b = pixel_box(&cam, verts.iter().copied());
            let score = if *name == f.target { 0.87 } else { 0.62 };
            writeln!(boxes, "{},{},{},{},{},{},{}", f.name, name, b[0], b[1], b[2], b[3], score)?;
        }
        let d = pixel_box(&cam, per_part[f.decoy].iter().copied());
        writeln!(boxes, "{},{},{},{},{},{},{}", f.name, f.target, d[0], d[1], d[2], d[3], 0.31)?;

        std::fs::write(root.join(format!("configs/{}.toml", f.name)), config_text(&f))?;
        summaries.push((f.name, names));
    }
    std::fs::write(root.join("vlm_boxes.csv"), boxes)?;
    for (name, names) in summaries {
        let cfg = PipelineConfig::load(&root.join(format!("configs/{name}.toml")))?;
        let (_, partition) = run_partition(&cfg)?;
        let mut region_a: BTreeMap<&str, usize> = BTreeMap::new();
        for (face, part) in names.iter().enumerate() {
            if partition.in_region_a(face) {
                *region_a.entry(part).or_default() += 1;
            }
        }
        println!("{name}: {} faces, region a by part {region_a:?}", names.len());
    }
    doll_baseline(&root)?;
    Ok(())
}
