use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Point3, Vector3};

use super::GeometryError;

/// Faces with an area at or below this value (m²) are dropped on load.
pub const DEGENERATE_AREA: f64 = 1e-12;

/// On-disk mesh formats understood by [`load_mesh`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    PlyAscii,
}

impl MeshFormat {
    /// Guess the format from a file extension (`.obj` / `.ply`).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "ply" => Some(MeshFormat::PlyAscii),
            _ => None,
        }
    }
}

/// Indexed triangle mesh in meters with cached per-face normals and areas.
///
/// Construction drops degenerate faces, so every stored face has a unit
/// normal and a strictly positive area. The mesh is immutable afterwards and
/// can be shared between threads.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
    normals: Vec<Vector3<f64>>,
    areas: Vec<f64>,
    dropped: usize,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        let mut normals = Vec::with_capacity(faces.len());
        let mut areas = Vec::with_capacity(faces.len());
        let mut dropped = 0;
        for (i, f) in faces.into_iter().enumerate() {
            if f.iter().any(|&v| v as usize >= n) {
                return Err(GeometryError::IndexOutOfRange { face: i, vertex_count: n });
            }
            let [a, b, c] = f.map(|v| vertices[v as usize]);
            let cross = (b - a).cross(&(c - a));
            let area = 0.5 * cross.norm();
            if !(area > DEGENERATE_AREA) {
                dropped += 1;
                continue;
            }
            kept.push(f);
            normals.push(cross.normalize());
            areas.push(area);
        }
        if kept.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate face(s)");
        }
        Ok(TriMesh { vertices, faces: kept, normals, areas, dropped })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn face_normals(&self) -> &[Vector3<f64>] {
        &self.normals
    }

    pub fn face_areas(&self) -> &[f64] {
        &self.areas
    }

    /// Number of degenerate faces removed at construction.
    pub fn dropped_faces(&self) -> usize {
        self.dropped
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn triangle(&self, face: usize) -> [Point3<f64>; 3] {
        self.faces[face].map(|v| self.vertices[v as usize])
    }

    pub fn centroid(&self, face: usize) -> Point3<f64> {
        let [a, b, c] = self.triangle(face);
        Point3::from((a.coords + b.coords + c.coords) / 3.0)
    }

    /// Axis-aligned bounds `(min, max)` over all vertices referenced by faces.
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::from(Vector3::repeat(f64::INFINITY));
        let mut hi = Point3::from(Vector3::repeat(f64::NEG_INFINITY));
        for f in &self.faces {
            for &v in f {
                let p = self.vertices[v as usize];
                lo = lo.inf(&p);
                hi = hi.sup(&p);
            }
        }
        (lo, hi)
    }

    pub fn diagonal(&self) -> f64 {
        let (lo, hi) = self.bounds();
        (hi - lo).norm()
    }

    /// Copy of the mesh with every vertex multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        let verts = self.vertices.iter().map(|p| p * factor).collect();
        TriMesh::new(verts, self.faces.clone())
    }

    /// Copy of the mesh with the winding of every face reversed.
    pub fn reversed(&self) -> Self {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        TriMesh::new(self.vertices.clone(), faces).expect("reversal keeps faces valid")
    }

    /// Concatenate meshes, offsetting indices. Returns the merged mesh and the
    /// face range each input occupies in it.
    pub fn merge(parts: &[TriMesh]) -> Result<(TriMesh, Vec<std::ops::Range<usize>>), GeometryError> {
        let mut verts = Vec::new();
        let mut faces = Vec::new();
        let mut ranges = Vec::new();
        for part in parts {
            let off = verts.len() as u32;
            let start = faces.len();
            verts.extend_from_slice(&part.vertices);
            faces.extend(part.faces.iter().map(|f| f.map(|v| v + off)));
            ranges.push(start..faces.len());
        }
        Ok((TriMesh::new(verts, faces)?, ranges))
    }

    /// Wavefront OBJ text with `v` and `f` records only.
    pub fn to_obj_string(&self) -> String {
        let mut out = String::with_capacity(32 * (self.vertices.len() + self.faces.len()));
        for v in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        out
    }

    pub fn save_obj(&self, path: &Path) -> Result<(), GeometryError> {
        let mut file = fs::File::create(path)?;
        file.write_all(self.to_obj_string().as_bytes())?;
        Ok(())
    }
}

/// Load a mesh from disk. Normals and areas are recomputed from the geometry.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh, GeometryError> {
    let text = fs::read_to_string(path)?;
    let (verts, faces) = match format {
        MeshFormat::Obj => parse_obj(&text)?,
        MeshFormat::PlyAscii => parse_ply(&text)?,
    };
    let mesh = TriMesh::new(verts, faces)?;
    if mesh.dropped_faces() > 0 {
        log::info!("{}: {} degenerate face(s) dropped", path.display(), mesh.dropped_faces());
    }
    Ok(mesh)
}

fn parse_err(line: usize, msg: impl Into<String>) -> GeometryError {
    GeometryError::Parse { line, message: msg.into() }
}

fn parse_f64(tok: Option<&str>, line: usize) -> Result<f64, GeometryError> {
    let tok = tok.ok_or_else(|| parse_err(line, "missing coordinate"))?;
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("bad number `{tok}`")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite coordinate `{tok}`")));
    }
    Ok(v)
}

type RawMesh = (Vec<Point3<f64>>, Vec<[u32; 3]>);

/// Parses `v` and `f` records. Polygons are fan-triangulated; texture and
/// normal indices (`f 1/2/3`) are ignored, as are all other record types.
pub fn parse_obj(text: &str) -> Result<RawMesh, GeometryError> {
    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut toks = content.split_whitespace();
        match toks.next() {
            Some("v") => {
                let x = parse_f64(toks.next(), line)?;
                let y = parse_f64(toks.next(), line)?;
                let z = parse_f64(toks.next(), line)?;
                verts.push(Point3::new(x, y, z));
            }
            Some("f") => {
                let mut poly = Vec::with_capacity(4);
                for tok in toks {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad face index `{tok}`")))?;
                    let resolved = match i {
                        0 => return Err(parse_err(line, "face index 0")),
                        i if i > 0 => i - 1,
                        i => verts.len() as i64 + i,
                    };
                    if resolved < 0 || resolved >= verts.len() as i64 {
                        return Err(parse_err(line, format!("face index {i} out of range")));
                    }
                    poly.push(resolved as u32);
                }
                if poly.len() < 3 {
                    return Err(parse_err(line, "face with fewer than 3 vertices"));
                }
                for k in 1..poly.len() - 1 {
                    faces.push([poly[0], poly[k], poly[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok((verts, faces))
}

struct PlyElement {
    name: String,
    count: usize,
    props: Vec<String>,
}

/// ASCII PLY with `vertex` (x, y, z) and `face` (vertex index list) elements.
/// Other elements and properties are skipped.
pub fn parse_ply(text: &str) -> Result<RawMesh, GeometryError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, l)) if l.trim() == "ply" => {}
        _ => return Err(parse_err(1, "missing `ply` magic")),
    }
    let mut elements: Vec<PlyElement> = Vec::new();
    let mut ascii = false;
    loop {
        let (idx, raw) = lines.next().ok_or_else(|| parse_err(0, "missing end_header"))?;
        let line = idx + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        match toks.as_slice() {
            ["format", "ascii", ..] => ascii = true,
            ["format", other, ..] => {
                return Err(parse_err(line, format!("unsupported PLY format `{other}`")))
            }
            ["element", name, count] => {
                let count = count.parse().map_err(|_| parse_err(line, "bad element count"))?;
                elements.push(PlyElement { name: name.to_string(), count, props: Vec::new() });
            }
            ["property", "list", _, _, name] | ["property", _, name] => {
                let el = elements.last_mut().ok_or_else(|| parse_err(line, "property before element"))?;
                el.props.push(name.to_string());
            }
            ["end_header"] => break,
            _ => {}
        }
    }
    if !ascii {
        return Err(parse_err(0, "missing `format ascii` line"));
    }

    let mut verts = Vec::new();
    let mut faces = Vec::new();
    for el in &elements {
        let pos = |n: &str| el.props.iter().position(|p| p == n);
        for _ in 0..el.count {
            let (idx, raw) = lines.next().ok_or_else(|| parse_err(0, format!("truncated `{}` data", el.name)))?;
            let line = idx + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            match el.name.as_str() {
                "vertex" => {
                    let (x, y, z) = match (pos("x"), pos("y"), pos("z")) {
                        (Some(x), Some(y), Some(z)) => (x, y, z),
                        _ => return Err(parse_err(line, "vertex element lacks x/y/z")),
                    };
                    verts.push(Point3::new(
                        parse_f64(toks.get(x).copied(), line)?,
                        parse_f64(toks.get(y).copied(), line)?,
                        parse_f64(toks.get(z).copied(), line)?,
                    ));
                }
                "face" => {
                    let n: usize = toks
                        .first()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| parse_err(line, "bad face list length"))?;
                    if n < 3 || toks.len() < n + 1 {
                        return Err(parse_err(line, "malformed face list"));
                    }
                    let mut poly = Vec::with_capacity(n);
                    for t in &toks[1..=n] {
                        let i: u32 = t.parse().map_err(|_| parse_err(line, format!("bad index `{t}`")))?;
                        poly.push(i);
                    }
                    for k in 1..n - 1 {
                        faces.push([poly[0], poly[k], poly[k + 1]]);
                    }
                }
                _ => {}
            }
        }
    }
    if let Some(f) = faces.iter().flatten().find(|&&i| i as usize >= verts.len()) {
        return Err(parse_err(0, format!("face index {f} out of range")));
    }
    Ok((verts, faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    const CUBE_OBJ: &str = "\
v -0.5 -0.5 -0.5
v 0.5 -0.5 -0.5
v 0.5 0.5 -0.5
v -0.5 0.5 -0.5
v -0.5 -0.5 0.5
v 0.5 -0.5 0.5
v 0.5 0.5 0.5
v -0.5 0.5 0.5
f 1 3 2
f 1 4 3
f 5 6 7
f 5 7 8
f 1 2 6
f 1 6 5
f 2 3 7
f 2 7 6
f 3 4 8
f 3 8 7
f 4 1 5
f 4 5 8
";

    fn cube() -> TriMesh {
        let (v, f) = parse_obj(CUBE_OBJ).unwrap();
        TriMesh::new(v, f).unwrap()
    }

    #[test]
    fn cube_area_and_counts() {
        let m = cube();
        assert_eq!(m.face_count(), 12);
        assert_eq!(m.vertices().len(), 8);
        assert!((m.total_area() - 6.0).abs() < 1e-12);
        for n in m.face_normals() {
            assert!((n.norm() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cube_normals_point_outward() {
        let m = cube();
        for f in 0..m.face_count() {
            assert!(m.face_normals()[f].dot(&m.centroid(f).coords) > 0.0, "face {f}");
        }
    }

    #[test]
    fn zero_area_face_dropped() {
        let text = format!("{CUBE_OBJ}v 0 0 0\nv 1 0 0\nv 2 0 0\nf 9 10 11\nf 1 1 2\n");
        let (v, f) = parse_obj(&text).unwrap();
        let m = TriMesh::new(v, f).unwrap();
        assert_eq!(m.face_count(), 12);
        assert_eq!(m.dropped_faces(), 2);
    }

    #[test]
    fn all_degenerate_is_empty() {
        let (v, f) = parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n").unwrap();
        assert!(matches!(TriMesh::new(v, f), Err(GeometryError::EmptyMesh)));
    }

    #[test]
    fn obj_polygon_and_slash_forms() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nvt 0 0\nf 1/1/1 2/1/1 3//1 -1\n";
        let (v, f) = parse_obj(text).unwrap();
        assert_eq!(v.len(), 4);
        assert_eq!(f, vec![[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn obj_errors() {
        assert!(matches!(parse_obj("v 0 0\n"), Err(GeometryError::Parse { line: 1, .. })));
        assert!(matches!(parse_obj("v 0 0 0\nf 1 2 3\n"), Err(GeometryError::Parse { line: 2, .. })));
        assert!(matches!(parse_obj("v 0 0 x\n"), Err(GeometryError::Parse { .. })));
    }

    #[test]
    fn ply_ascii_cube() {
        let m = cube();
        let mut ply = format!(
            "ply\nformat ascii 1.0\ncomment test\nelement vertex {}\nproperty float x\nproperty float y\nproperty float z\nproperty uchar red\nelement face {}\nproperty list uchar int vertex_indices\nend_header\n",
            m.vertices().len(),
            m.face_count()
        );
        for p in m.vertices() {
            ply.push_str(&format!("{} {} {} 255\n", p.x, p.y, p.z));
        }
        for f in m.faces() {
            ply.push_str(&format!("3 {} {} {}\n", f[0], f[1], f[2]));
        }
        let (v, f) = parse_ply(&ply).unwrap();
        assert_eq!(v, m.vertices());
        assert_eq!(f, m.faces());
    }

    #[test]
    fn ply_rejects_binary() {
        let text = "ply\nformat binary_little_endian 1.0\nend_header\n";
        assert!(matches!(parse_ply(text), Err(GeometryError::Parse { .. })));
    }

    #[test]
    fn winding_reversal_flips_normals() {
        let m = cube();
        let r = m.reversed();
        for (a, b) in m.face_normals().iter().zip(r.face_normals()) {
            assert!((a + b).norm() < 1e-12);
        }
        assert!((m.total_area() - r.total_area()).abs() < 1e-12);
    }
}
