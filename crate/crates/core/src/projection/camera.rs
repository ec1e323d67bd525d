use std::path::Path;

use nalgebra::{Matrix3, Point2, Point3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::PartitionError;
use crate::geometry::Ray;

/// Points at or closer than this depth (m, camera frame) do not project.
pub const MIN_DEPTH: f64 = 1e-6;

/// Rigid world→camera transform: `p_cam = rotation * p_world + translation`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    /// Row-major rotation matrix.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

/// Pinhole camera (OpenCV convention: x right, y down, z forward).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
    pub pose: CameraPose,
}

impl CameraModel {
    /// Camera at `eye` looking at `target`, with image-up roughly along `up`.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        eye: Point3<f64>,
        target: Point3<f64>,
        up: Vector3<f64>,
        fx: f64,
        fy: f64,
        width: u32,
        height: u32,
    ) -> Result<Self, PartitionError> {
        let z = (target - eye).try_normalize(1e-12).ok_or(PartitionError::InvalidCamera("eye equals target"))?;
        let x = z.cross(&up).try_normalize(1e-12).ok_or(PartitionError::InvalidCamera("up parallel to view"))?;
        let y = z.cross(&x);
        let r = Matrix3::from_rows(&[x.transpose(), y.transpose(), z.transpose()]);
        let t = -(r * eye.coords);
        let cam = CameraModel {
            fx,
            fy,
            cx: width as f64 / 2.0,
            cy: height as f64 / 2.0,
            width,
            height,
            pose: CameraPose {
                rotation: [[r[(0, 0)], r[(0, 1)], r[(0, 2)]], [r[(1, 0)], r[(1, 1)], r[(1, 2)]], [r[(2, 0)], r[(2, 1)], r[(2, 2)]]],
                translation: [t.x, t.y, t.z],
            },
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(PartitionError::InvalidCamera("focal lengths must be positive"));
        }
        if !(0.0 <= self.cx && self.cx < self.width as f64 && 0.0 <= self.cy && self.cy < self.height as f64) {
            return Err(PartitionError::InvalidCamera("principal point outside image"));
        }
        let r = self.rotation_matrix();
        if (r.transpose() * r - Matrix3::identity()).abs().max() > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(PartitionError::InvalidCamera("rotation is not orthonormal with det +1"));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, PartitionError> {
        let text = std::fs::read_to_string(path)?;
        let cam: CameraModel = toml::from_str(&text).map_err(|e| PartitionError::CameraParse(e.to_string()))?;
        cam.validate()?;
        Ok(cam)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("camera serializes")
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        let r = &self.pose.rotation;
        Matrix3::new(r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2])
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_matrix_unchecked(self.rotation_matrix())
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::from(self.pose.translation)
    }

    pub fn to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        Point3::from(self.rotation_matrix() * p.coords + self.translation())
    }

    /// Optical center in world coordinates.
    pub fn center(&self) -> Point3<f64> {
        Point3::from(-(self.rotation_matrix().transpose() * self.translation()))
    }

    pub fn project_camera_frame(&self, pc: &Point3<f64>) -> Option<Point2<f64>> {
        if pc.z <= MIN_DEPTH {
            return None;
        }
        Some(Point2::new(self.fx * pc.x / pc.z + self.cx, self.fy * pc.y / pc.z + self.cy))
    }

    /// World ray through a pixel, starting at the optical center.
    pub fn back_project(&self, pixel: &Point2<f64>) -> Ray {
        let d_cam = Vector3::new((pixel.x - self.cx) / self.fx, (pixel.y - self.cy) / self.fy, 1.0);
        let d = self.rotation_matrix().transpose() * d_cam;
        Ray::new(self.center(), d).expect("pixel ray direction is nonzero")
    }

    pub fn contains_pixel(&self, px: &Point2<f64>) -> bool {
        px.x >= 0.0 && px.y >= 0.0 && px.x <= self.width as f64 && px.y <= self.height as f64
    }
}

/// Pixel coordinates of a world point, or `None` if it lies behind the camera.
pub fn project_point(camera: &CameraModel, p: &Point3<f64>) -> Option<Point2<f64>> {
    camera.project_camera_frame(&camera.to_camera(p))
}
