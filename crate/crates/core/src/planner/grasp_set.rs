use std::io;

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::ser::Serialize;
use serde::{Deserialize, Serialize as SerializeDerive};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::gripper::GripperModel;
use super::PlannerError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub point: Point3<f64>,
    /// Outward unit surface normal.
    pub normal: Vector3<f64>,
    pub face: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspCandidate {
    /// Gripper frame expressed in the mesh frame.
    pub pose: Isometry3<f64>,
    pub contact_a: Contact,
    pub contact_b: Contact,
    pub width: f64,
    pub quality: f64,
    /// Global attempt index that produced this candidate.
    pub seed_id: u64,
}

impl GraspCandidate {
    pub fn contact_faces(&self) -> [usize; 2] {
        [self.contact_a.face, self.contact_b.face]
    }
}

/// Candidates ordered by descending quality, ties by ascending `seed_id`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraspSet {
    grasps: Vec<GraspCandidate>,
    rng_seed: u64,
}

fn ranking(a: &GraspCandidate, b: &GraspCandidate) -> std::cmp::Ordering {
    b.quality.total_cmp(&a.quality).then(a.seed_id.cmp(&b.seed_id))
}

impl GraspSet {
    pub fn new(mut grasps: Vec<GraspCandidate>, rng_seed: u64) -> Self {
        grasps.sort_by(ranking);
        GraspSet { grasps, rng_seed }
    }

    pub fn grasps(&self) -> &[GraspCandidate] {
        &self.grasps
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn len(&self) -> usize {
        self.grasps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grasps.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.grasps.windows(2).all(|w| ranking(&w[0], &w[1]) != std::cmp::Ordering::Greater)
    }

    /// The first `k` candidates in ranking order.
    pub fn top_k(&self, k: usize) -> GraspSet {
        GraspSet { grasps: self.grasps.iter().take(k).cloned().collect(), rng_seed: self.rng_seed }
    }

    pub fn to_document(&self, fixture_id: &str, gripper: &GripperModel) -> GraspSetDocument {
        GraspSetDocument {
            header: GraspSetHeader { fixture_id: fixture_id.to_string(), rng_seed: self.rng_seed, gripper: *gripper },
            grasps: self.grasps.iter().map(GraspRecord::from).collect(),
        }
    }

    /// Pretty JSON with every float written to 9 significant digits.
    pub fn to_json(&self, fixture_id: &str, gripper: &GripperModel) -> String {
        self.to_document(fixture_id, gripper).to_json()
    }
}

pub fn top_k(grasps: &GraspSet, k: usize) -> GraspSet {
    grasps.top_k(k)
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct GraspSetHeader {
    pub fixture_id: String,
    pub rng_seed: u64,
    pub gripper: GripperModel,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct ContactRecord {
    pub point: [f64; 3],
    pub normal: [f64; 3],
    pub face: usize,
}

#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct GraspRecord {
    /// Homogeneous 4×4 transform, row-major.
    pub pose: Vec<f64>,
    pub width: f64,
    pub contacts: [ContactRecord; 2],
    pub quality: f64,
    pub seed_id: u64,
}

/// On-disk form of a [`GraspSet`].
#[derive(Debug, Clone, PartialEq, SerializeDerive, Deserialize)]
pub struct GraspSetDocument {
    pub header: GraspSetHeader,
    pub grasps: Vec<GraspRecord>,
}

impl From<&GraspCandidate> for GraspRecord {
    fn from(g: &GraspCandidate) -> Self {
        let m = g.pose.to_homogeneous();
        let pose = (0..4).flat_map(|r| (0..4).map(move |c| (r, c))).map(|(r, c)| m[(r, c)]).collect();
        let contact = |c: &Contact| ContactRecord { point: c.point.coords.into(), normal: c.normal.into(), face: c.face };
        GraspRecord {
            pose,
            width: g.width,
            contacts: [contact(&g.contact_a), contact(&g.contact_b)],
            quality: g.quality,
            seed_id: g.seed_id,
        }
    }
}

impl GraspRecord {
    pub fn to_candidate(&self) -> Result<GraspCandidate, PlannerError> {
        if self.pose.len() != 16 {
            return Err(PlannerError::Document(format!("pose has {} entries, expected 16", self.pose.len())));
        }
        let p = &self.pose;
        let rot = Matrix3::new(p[0], p[1], p[2], p[4], p[5], p[6], p[8], p[9], p[10]);
        let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix(&rot));
        let pose = Isometry3::from_parts(Translation3::new(p[3], p[7], p[11]), rot);
        let contact = |c: &ContactRecord| Contact { point: Point3::from(c.point), normal: Vector3::from(c.normal), face: c.face };
        Ok(GraspCandidate {
            pose,
            contact_a: contact(&self.contacts[0]),
            contact_b: contact(&self.contacts[1]),
            width: self.width,
            quality: self.quality,
            seed_id: self.seed_id,
        })
    }
}

impl GraspSetDocument {
    pub fn to_json(&self) -> String {
        let mut out = Vec::new();
        let mut ser = serde_json::Serializer::with_formatter(&mut out, SigFigFormatter::default());
        self.serialize(&mut ser).expect("grasp document serializes");
        out.push(b'\n');
        String::from_utf8(out).expect("json is utf-8")
    }

    pub fn from_json(text: &str) -> Result<Self, PlannerError> {
        serde_json::from_str(text).map_err(|e| PlannerError::Document(e.to_string()))
    }

    pub fn to_grasp_set(&self) -> Result<GraspSet, PlannerError> {
        let grasps = self.grasps.iter().map(GraspRecord::to_candidate).collect::<Result<Vec<_>, _>>()?;
        Ok(GraspSet::new(grasps, self.header.rng_seed))
    }
}

/// Float text with 9 significant digits in scientific notation, e.g.
/// `6.00000000e-2`. Negative zero is written as zero.
pub fn format_sig9(v: f64) -> String {
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.8e}")
}

/// Pretty printer that writes floats through [`format_sig9`].
#[derive(Default)]
struct SigFigFormatter {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for SigFigFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_sig9(value).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_array(writer)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array(writer)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_array_value(writer, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(writer)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object(writer)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object(writer)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.pretty.begin_object_key(writer, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(writer)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(writer)
    }
}
