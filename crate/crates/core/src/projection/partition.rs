use nalgebra::Point2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::camera::{project_point, CameraModel};
use super::PartitionError;
use crate::geometry::{Bvh, TriMesh};
use crate::Mode;

/// Default depth band for [`Visibility::DepthBand`] (m).
pub const DEFAULT_DEPTH_BAND: f64 = 0.02;

/// Axis-aligned image box around a grounded part, in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox2D {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
    pub confidence: f64,
    pub label: String,
}

impl BoundingBox2D {
    pub fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64, confidence: f64, label: impl Into<String>) -> Self {
        BoundingBox2D { x_min, y_min, x_max, y_max, confidence, label: label.into() }
    }

    /// The whole image as a box.
    pub fn full_image(camera: &CameraModel) -> Self {
        BoundingBox2D::new(0.0, 0.0, camera.width as f64, camera.height as f64, 1.0, "")
    }

    pub fn is_well_formed(&self) -> bool {
        self.x_min < self.x_max
            && self.y_min < self.y_max
            && (0.0..=1.0).contains(&self.confidence)
            && [self.x_min, self.y_min, self.x_max, self.y_max].iter().all(|v| v.is_finite())
    }

    /// Intersect with the `width × height` image rectangle.
    pub fn clamped(&self, width: u32, height: u32) -> Result<Self, PartitionError> {
        if !self.is_well_formed() {
            return Err(PartitionError::InvalidBox);
        }
        let (w, h) = (width as f64, height as f64);
        let out = BoundingBox2D {
            x_min: self.x_min.clamp(0.0, w),
            y_min: self.y_min.clamp(0.0, h),
            x_max: self.x_max.clamp(0.0, w),
            y_max: self.y_max.clamp(0.0, h),
            ..self.clone()
        };
        if out.x_min >= out.x_max || out.y_min >= out.y_max {
            return Err(PartitionError::BoxOutsideImage);
        }
        Ok(out)
    }

    /// Closed containment.
    pub fn contains(&self, p: &Point2<f64>) -> bool {
        self.x_min <= p.x && p.x <= self.x_max && self.y_min <= p.y && p.y <= self.y_max
    }
}

/// Which faces count as visible through the box.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Visibility {
    /// Every face whose centroid projects into the box, occluded or not.
    #[default]
    Silhouette,
    /// Additionally require the face centroid to lie within `delta` meters of
    /// the first surface hit along its pixel ray.
    DepthBand { delta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceLabel {
    Graspable,
    Obstacle,
}

impl FaceLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            FaceLabel::Graspable => "graspable",
            FaceLabel::Obstacle => "obstacle",
        }
    }
}

/// Per-face two-coloring of a mesh into graspable and obstacle faces.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPartition {
    labels: Vec<FaceLabel>,
    mode: Mode,
    source_box: Option<BoundingBox2D>,
}

/// Whether a grasp lies on the part named by the box ("region a").
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionMembership {
    InsideA,
    OutsideA,
}

impl RegionPartition {
    pub fn from_labels(labels: Vec<FaceLabel>, mode: Mode, source_box: Option<BoundingBox2D>) -> Result<Self, PartitionError> {
        if !labels.contains(&FaceLabel::Graspable) {
            return Err(PartitionError::EmptyRegion);
        }
        Ok(RegionPartition { labels, mode, source_box })
    }

    /// Every face graspable; used by the unrestricted planner.
    pub fn all_graspable(mesh: &TriMesh) -> Self {
        RegionPartition { labels: vec![FaceLabel::Graspable; mesh.face_count()], mode: Mode::Grasp, source_box: None }
    }

    pub fn labels(&self) -> &[FaceLabel] {
        &self.labels
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn source_box(&self) -> Option<&BoundingBox2D> {
        self.source_box.as_ref()
    }

    pub fn face_count(&self) -> usize {
        self.labels.len()
    }

    pub fn is_graspable(&self, face: usize) -> bool {
        self.labels[face] == FaceLabel::Graspable
    }

    pub fn graspable_faces(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(|(_, l)| **l == FaceLabel::Graspable).map(|(i, _)| i)
    }

    pub fn graspable_count(&self) -> usize {
        self.labels.iter().filter(|l| **l == FaceLabel::Graspable).count()
    }

    pub fn obstacle_count(&self) -> usize {
        self.labels.len() - self.graspable_count()
    }

    /// Whether the face passed the box membership test: graspable in grasp
    /// mode, obstacle in avoid mode.
    pub fn in_region_a(&self, face: usize) -> bool {
        match self.mode {
            Mode::Grasp => self.labels[face] == FaceLabel::Graspable,
            Mode::Avoid => self.labels[face] == FaceLabel::Obstacle,
        }
    }

    /// One label per line, in face order.
    pub fn to_label_text(&self) -> String {
        let mut s = String::with_capacity(self.labels.len() * 10);
        for l in &self.labels {
            s.push_str(l.as_str());
            s.push('\n');
        }
        s
    }

    pub fn parse_label_text(text: &str, mode: Mode) -> Result<Self, PartitionError> {
        let labels = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .enumerate()
            .map(|(i, l)| match l.trim() {
                "graspable" => Ok(FaceLabel::Graspable),
                "obstacle" => Ok(FaceLabel::Obstacle),
                other => Err(PartitionError::LabelParse { line: i + 1, value: other.to_string() }),
            })
            .collect::<Result<Vec<_>, _>>()?;
        RegionPartition::from_labels(labels, mode, None)
    }
}

/// Whether a face's centroid projects into `bx` and passes the visibility rule.
pub fn face_in_box(
    mesh: &TriMesh,
    bvh: &Bvh,
    camera: &CameraModel,
    bx: &BoundingBox2D,
    visibility: Visibility,
    face: usize,
) -> bool {
    let c = mesh.centroid(face);
    let Some(px) = project_point(camera, &c) else {
        return false;
    };
    if !bx.contains(&px) {
        return false;
    }
    match visibility {
        Visibility::Silhouette => true,
        Visibility::DepthBand { delta } => {
            let eye = camera.center();
            let depth = (c - eye).norm();
            let ray = crate::geometry::Ray::new(eye, c - eye).expect("centroid differs from eye");
            match bvh.ray_cast(mesh, &ray) {
                Some(hit) => depth - hit.distance <= delta,
                None => true,
            }
        }
    }
}

/// Label faces by projecting their centroids through the camera into the box.
///
/// In grasp mode the in-box faces are graspable and the rest are obstacles;
/// avoid mode swaps the two.
pub fn partition_mesh(
    mesh: &TriMesh,
    bvh: &Bvh,
    camera: &CameraModel,
    bx: &BoundingBox2D,
    mode: Mode,
    visibility: Visibility,
) -> Result<RegionPartition, PartitionError> {
    let clamped = bx.clamped(camera.width, camera.height)?;
    let labels: Vec<FaceLabel> = (0..mesh.face_count())
        .into_par_iter()
        .map(|f| {
            let member = face_in_box(mesh, bvh, camera, &clamped, visibility, f);
            match (mode, member) {
                (Mode::Grasp, true) | (Mode::Avoid, false) => FaceLabel::Graspable,
                _ => FaceLabel::Obstacle,
            }
        })
        .collect();
    RegionPartition::from_labels(labels, mode, Some(clamped))
}

/// `InsideA` iff every contact face lies in the part selected by the box.
pub fn region_of_grasp(partition: &RegionPartition, contact_faces: &[usize]) -> RegionMembership {
    if contact_faces.iter().all(|&f| partition.in_region_a(f)) {
        RegionMembership::InsideA
    } else {
        RegionMembership::OutsideA
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;
    use nalgebra::{Point3, Vector3};

    fn cube_setup() -> (TriMesh, Bvh, CameraModel) {
        let mesh = primitives::cuboid(Point3::origin(), Vector3::repeat(0.5)).unwrap();
        let bvh = Bvh::build(&mesh);
        let cam = CameraModel::look_at(Point3::new(0.0, 0.0, 3.0), Point3::origin(), Vector3::y(), 500.0, 500.0, 640, 480).unwrap();
        (mesh, bvh, cam)
    }

    #[test]
    fn full_image_box_takes_every_front_face() {
        let (mesh, bvh, cam) = cube_setup();
        let p = partition_mesh(&mesh, &bvh, &cam, &BoundingBox2D::full_image(&cam), Mode::Grasp, Visibility::Silhouette).unwrap();
        for f in 0..mesh.face_count() {
            assert_eq!(p.is_graspable(f), project_point(&cam, &mesh.centroid(f)).is_some());
        }
        assert_eq!(p.graspable_count(), 12);
    }

    #[test]
    fn depth_band_drops_back_faces() {
        let (mesh, bvh, cam) = cube_setup();
        let full = BoundingBox2D::full_image(&cam);
        let p = partition_mesh(&mesh, &bvh, &cam, &full, Mode::Grasp, Visibility::DepthBand { delta: 0.02 }).unwrap();
        // only the +z face (two triangles) sees the camera directly through its centroid
        for f in 0..mesh.face_count() {
            let facing = mesh.face_normals()[f].z > 0.5;
            assert_eq!(p.is_graspable(f), facing, "face {f}");
        }
    }

    #[test]
    fn box_outside_image() {
        let (mesh, bvh, cam) = cube_setup();
        let bx = BoundingBox2D::new(700.0, 10.0, 800.0, 20.0, 0.9, "x");
        assert!(matches!(
            partition_mesh(&mesh, &bvh, &cam, &bx, Mode::Grasp, Visibility::Silhouette),
            Err(PartitionError::BoxOutsideImage)
        ));
    }

    #[test]
    fn empty_region() {
        let (mesh, bvh, cam) = cube_setup();
        let bx = BoundingBox2D::new(0.0, 0.0, 5.0, 5.0, 0.9, "corner");
        assert!(matches!(
            partition_mesh(&mesh, &bvh, &cam, &bx, Mode::Grasp, Visibility::Silhouette),
            Err(PartitionError::EmptyRegion)
        ));
    }

    #[test]
    fn clamping() {
        let b = BoundingBox2D::new(-10.0, 100.0, 50.0, 900.0, 0.5, "a").clamped(640, 480).unwrap();
        assert_eq!((b.x_min, b.y_min, b.x_max, b.y_max), (0.0, 100.0, 50.0, 480.0));
        assert!(BoundingBox2D::new(5.0, 0.0, 5.0, 1.0, 0.5, "").clamped(640, 480).is_err());
    }

    #[test]
    fn region_of_grasp_rules() {
        use FaceLabel::*;
        let p = RegionPartition::from_labels(vec![Graspable, Graspable, Obstacle], Mode::Grasp, None).unwrap();
        assert_eq!(region_of_grasp(&p, &[0, 1]), RegionMembership::InsideA);
        assert_eq!(region_of_grasp(&p, &[0, 2]), RegionMembership::OutsideA);
        let avoid = RegionPartition::from_labels(vec![Graspable, Graspable, Obstacle], Mode::Avoid, None).unwrap();
        assert_eq!(region_of_grasp(&avoid, &[2, 2]), RegionMembership::InsideA);
    }

    #[test]
    fn label_text_round_trip() {
        use FaceLabel::*;
        let p = RegionPartition::from_labels(vec![Graspable, Obstacle, Graspable], Mode::Grasp, None).unwrap();
        let text = p.to_label_text();
        assert_eq!(text, "graspable\nobstacle\ngraspable\n");
        assert_eq!(RegionPartition::parse_label_text(&text, Mode::Grasp).unwrap().labels(), p.labels());
    }
}
