use nalgebra::{Isometry3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::PlannerError;
use crate::geometry::OrientedBox;

/// Parallel-jaw gripper geometry, all lengths in meters.
///
/// In the gripper frame the closing axis is `x` (contact a at `-width/2`,
/// contact b at `+width/2`), the approach direction is `z` (pointing from the
/// palm towards the object) and `y = z × x`. Each finger pad is centered on
/// its contact, `finger_box.z` below the fingertip; the finger runs
/// `finger_length` back towards the palm. The palm is a slab `palm_clearance`
/// thick directly behind the finger bases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GripperModel {
    pub max_opening: f64,
    pub finger_length: f64,
    /// Finger half-extents: thickness along `x`, width along `y`, pad
    /// half-height along `z`.
    pub finger_box: [f64; 3],
    pub palm_clearance: f64,
    pub friction_mu: f64,
    /// Evenly spaced approach rolls tried per contact pair.
    #[serde(default = "default_rolls")]
    pub rolls: u32,
}

fn default_rolls() -> u32 {
    8
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            max_opening: 0.12,
            finger_length: 0.04,
            finger_box: [0.01, 0.01, 0.02],
            palm_clearance: 0.01,
            friction_mu: 0.5,
            rolls: default_rolls(),
        }
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<(), PlannerError> {
        let lengths = [self.max_opening, self.finger_length, self.palm_clearance, self.finger_box[0], self.finger_box[1], self.finger_box[2]];
        if !lengths.iter().all(|&l| l > 0.0 && l.is_finite()) {
            return Err(PlannerError::InvalidGripper("all lengths must be positive"));
        }
        if !(self.friction_mu > 0.0 && self.friction_mu.is_finite()) {
            return Err(PlannerError::InvalidGripper("friction coefficient must be positive"));
        }
        if self.finger_box[2] > self.finger_length {
            return Err(PlannerError::InvalidGripper("pad half-height exceeds finger length"));
        }
        if self.rolls == 0 {
            return Err(PlannerError::InvalidGripper("need at least one roll sample"));
        }
        Ok(())
    }

    /// Friction cone half-angle `atan(mu)`.
    pub fn cone_half_angle(&self) -> f64 {
        self.friction_mu.atan()
    }

    /// Same gripper with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        GripperModel {
            max_opening: self.max_opening * s,
            finger_length: self.finger_length * s,
            finger_box: self.finger_box.map(|h| h * s),
            palm_clearance: self.palm_clearance * s,
            ..*self
        }
    }

    /// Volumes swept by the two fingers while closing from `max_opening` to
    /// `width`, plus the palm slab, in the frame given by `pose`.
    pub fn swept_boxes(&self, pose: &Isometry3<f64>, width: f64) -> [OrientedBox; 3] {
        let [fx, fy, fz] = self.finger_box;
        let outer = self.max_opening / 2.0 + 2.0 * fx;
        let inner = width / 2.0;
        let finger_half_x = ((outer - inner) / 2.0).max(fx);
        let finger_cx = (outer + inner) / 2.0;
        let finger_half_z = self.finger_length / 2.0;
        let finger_cz = fz - finger_half_z;
        let base_z = fz - self.finger_length;
        let palm_half_z = self.palm_clearance / 2.0;

        let rot = pose.rotation.to_rotation_matrix();
        let make = |c: Vector3<f64>, h: Vector3<f64>| OrientedBox::new(pose * Point3::from(c), h, rot);
        [
            make(Vector3::new(-finger_cx, 0.0, finger_cz), Vector3::new(finger_half_x, fy, finger_half_z)),
            make(Vector3::new(finger_cx, 0.0, finger_cz), Vector3::new(finger_half_x, fy, finger_half_z)),
            make(Vector3::new(0.0, 0.0, base_z - palm_half_z), Vector3::new(outer, fy, palm_half_z)),
        ]
    }
}

/// Gripper pose for a contact pair: origin at the midpoint, `x` from a to b,
/// approach `z` rolled by `roll` radians about `x` from a fixed reference.
pub fn grasp_pose(a: &Point3<f64>, b: &Point3<f64>, roll: f64) -> Isometry3<f64> {
    let x = (b - a).normalize();
    let helper = if x.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let u = helper.cross(&x).normalize();
    let v = x.cross(&u);
    let z = u * roll.cos() + v * roll.sin();
    let y = z.cross(&x);
    let rot = Rotation3::from_basis_unchecked(&[x, y, z]);
    let mid = Point3::from((a.coords + b.coords) / 2.0);
    Isometry3::from_parts(Translation3::from(mid.coords), UnitQuaternion::from_rotation_matrix(&rot))
}
