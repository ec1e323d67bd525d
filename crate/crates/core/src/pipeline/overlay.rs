use image::{Rgb, RgbImage};
use imageproc::drawing::{draw_filled_circle_mut, draw_hollow_circle_mut, draw_hollow_rect_mut, draw_line_segment_mut};
use imageproc::rect::Rect;
use nalgebra::Point2;

use super::PipelineError;
use crate::planner::GraspSet;
use crate::projection::{project_point, BoundingBox2D, CameraModel};

pub const BOX_COLOR: Rgb<u8> = Rgb([0, 200, 0]);
pub const CONTACT_COLOR: Rgb<u8> = Rgb([230, 30, 30]);
pub const JAW_COLOR: Rgb<u8> = Rgb([255, 210, 0]);
pub const LABEL_COLOR: Rgb<u8> = Rgb([255, 255, 255]);
pub const MARKER_RADIUS: i32 = 4;
const BOX_THICKNESS: i32 = 2;
const DIGIT_SCALE: i32 = 2;

/// 3×5 bitmaps for 0-9, one row per entry, most significant bit on the left.
const DIGITS: [[u8; 5]; 10] = [
    [0b111, 0b101, 0b101, 0b101, 0b111],
    [0b010, 0b110, 0b010, 0b010, 0b111],
    [0b111, 0b001, 0b111, 0b100, 0b111],
    [0b111, 0b001, 0b111, 0b001, 0b111],
    [0b101, 0b101, 0b111, 0b001, 0b001],
    [0b111, 0b100, 0b111, 0b001, 0b111],
    [0b111, 0b100, 0b111, 0b101, 0b111],
    [0b111, 0b001, 0b010, 0b010, 0b010],
    [0b111, 0b101, 0b111, 0b101, 0b111],
    [0b111, 0b101, 0b111, 0b001, 0b111],
];

fn put(img: &mut RgbImage, x: i32, y: i32, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

/// Draw a decimal number with its top-left corner at `(x, y)`.
pub fn draw_number(img: &mut RgbImage, x: i32, y: i32, n: usize, color: Rgb<u8>) {
    for (i, ch) in n.to_string().bytes().enumerate() {
        let glyph = DIGITS[(ch - b'0') as usize];
        let ox = x + i as i32 * 4 * DIGIT_SCALE;
        for (row, bits) in glyph.iter().enumerate() {
            for col in 0..3 {
                if bits & (0b100 >> col) != 0 {
                    for dy in 0..DIGIT_SCALE {
                        for dx in 0..DIGIT_SCALE {
                            put(img, ox + col * DIGIT_SCALE + dx, y + row as i32 * DIGIT_SCALE + dy, color);
                        }
                    }
                }
            }
        }
    }
}

/// Pixel of a contact point, or `None` when it is behind the camera or
/// outside the frame.
fn visible_pixel(camera: &CameraModel, p: &nalgebra::Point3<f64>) -> Option<Point2<f64>> {
    project_point(camera, p).filter(|px| camera.contains_pixel(px))
}

/// Draw the grounded box in green and each grasp's two contacts as markers
/// labeled with the grasp's 1-based rank. Contacts that do not project into
/// the frame are skipped with a warning.
pub fn render_overlay(
    image: &RgbImage,
    bx: &BoundingBox2D,
    camera: &CameraModel,
    grasps: &GraspSet,
) -> Result<RgbImage, PipelineError> {
    if image.width() != camera.width || image.height() != camera.height {
        return Err(PipelineError::Config(format!(
            "image is {}x{} but the camera expects {}x{}",
            image.width(),
            image.height(),
            camera.width,
            camera.height
        )));
    }
    let mut out = image.clone();
    let x0 = bx.x_min.floor() as i32;
    let y0 = bx.y_min.floor() as i32;
    let w = ((bx.x_max - bx.x_min).round() as u32).max(1);
    let h = ((bx.y_max - bx.y_min).round() as u32).max(1);
    for t in 0..BOX_THICKNESS {
        if w > 2 * t as u32 && h > 2 * t as u32 {
            draw_hollow_rect_mut(&mut out, Rect::at(x0 + t, y0 + t).of_size(w - 2 * t as u32, h - 2 * t as u32), BOX_COLOR);
        }
    }

    for (rank, g) in grasps.grasps().iter().enumerate() {
        let pa = visible_pixel(camera, &g.contact_a.point);
        let pb = visible_pixel(camera, &g.contact_b.point);
        if let (Some(a), Some(b)) = (pa, pb) {
            draw_line_segment_mut(&mut out, (a.x as f32, a.y as f32), (b.x as f32, b.y as f32), JAW_COLOR);
        }
        for (which, px) in [("a", pa), ("b", pb)] {
            match px {
                Some(p) => {
                    let c = (p.x.round() as i32, p.y.round() as i32);
                    draw_filled_circle_mut(&mut out, c, MARKER_RADIUS, CONTACT_COLOR);
                    draw_hollow_circle_mut(&mut out, c, MARKER_RADIUS + 1, LABEL_COLOR);
                    draw_number(&mut out, c.0 + MARKER_RADIUS + 2, c.1 - MARKER_RADIUS - 2, rank + 1, LABEL_COLOR);
                }
                None => log::warn!("grasp {} contact {which} projects outside the image; marker skipped", rank + 1),
            }
        }
    }
    Ok(out)
}
