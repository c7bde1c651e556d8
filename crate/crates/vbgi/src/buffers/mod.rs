//! Image containers, the pinhole camera model, G-buffer validation, and
//! float/preview file formats.

pub mod pfm;
pub mod png;

use std::fmt;

use crate::math::{vec3, RigidTransform, Vec3};

/// Dense row-major image. Row 0 is the top of the image.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuf<T> {
    width: u32,
    height: u32,
    data: Vec<T>,
}

impl<T: Clone> ImageBuf<T> {
    pub fn new(width: u32, height: u32, fill: T) -> Self {
        ImageBuf {
            width,
            height,
            data: vec![fill; (width as usize) * (height as usize)],
        }
    }
}

impl<T> ImageBuf<T> {
    /// Wraps an existing row-major buffer. Panics when the length does not
    /// match the dimensions.
    pub fn from_vec(width: u32, height: u32, data: Vec<T>) -> Self {
        assert_eq!(data.len(), (width as usize) * (height as usize));
        ImageBuf { width, height, data }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as u32) < self.width && (y as u32) < self.height
    }

    fn idx(&self, x: u32, y: u32) -> usize {
        debug_assert!(x < self.width && y < self.height);
        (y as usize) * (self.width as usize) + (x as usize)
    }

    pub fn get(&self, x: u32, y: u32) -> &T {
        &self.data[self.idx(x, y)]
    }

    pub fn set(&mut self, x: u32, y: u32, value: T) {
        let i = self.idx(x, y);
        self.data[i] = value;
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Iterates `(x, y, &value)` in row-major order.
    pub fn enumerate(&self) -> impl Iterator<Item = (u32, u32, &T)> {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .map(move |(i, v)| ((i as u32) % w, (i as u32) / w, v))
    }
}

impl<T: Copy> ImageBuf<T> {
    pub fn at(&self, x: u32, y: u32) -> T {
        self.data[self.idx(x, y)]
    }
}

/// Pinhole camera. View space is right-handed with the camera at the origin
/// looking down -Z; depth values are linear view-space distance along -Z.
#[derive(Clone, Debug, PartialEq)]
pub struct CameraModel {
    pub width: u32,
    pub height: u32,
    pub vertical_fov: f32,
    pub near: f32,
    pub far: f32,
    pub world_to_view: RigidTransform,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CameraError(pub String);

impl fmt::Display for CameraError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid camera: {}", self.0)
    }
}

impl std::error::Error for CameraError {}

impl CameraModel {
    pub fn new(
        width: u32,
        height: u32,
        vertical_fov: f32,
        near: f32,
        far: f32,
        world_to_view: RigidTransform,
    ) -> Result<Self, CameraError> {
        if width < 1 || height < 1 {
            return Err(CameraError(format!("degenerate resolution {width}x{height}")));
        }
        if !(near > 0.0 && far > near) {
            return Err(CameraError(format!("need 0 < near < far, got {near}..{far}")));
        }
        if !(vertical_fov > 0.0 && vertical_fov < std::f32::consts::PI) {
            return Err(CameraError(format!("vertical fov {vertical_fov} outside (0, pi)")));
        }
        Ok(CameraModel { width, height, vertical_fov, near, far, world_to_view })
    }

    /// Camera with a look-at transform.
    #[allow(clippy::too_many_arguments)]
    pub fn look_at(
        width: u32,
        height: u32,
        vertical_fov: f32,
        near: f32,
        far: f32,
        eye: Vec3,
        target: Vec3,
        up: Vec3,
    ) -> Result<Self, CameraError> {
        CameraModel::new(width, height, vertical_fov, near, far, RigidTransform::look_at(eye, target, up))
    }

    /// Tangents of the half field of view, horizontal and vertical.
    pub fn tan_half(&self) -> (f32, f32) {
        let tv = (self.vertical_fov * 0.5).tan();
        let th = tv * (self.width as f32) / (self.height as f32);
        (th, tv)
    }

    /// View-space position of the point seen at continuous pixel coordinates
    /// `(sx, sy)` with the given linear depth. Returns `None` for sky
    /// (non-finite) or non-positive depth.
    pub fn reconstruct_at(&self, sx: f32, sy: f32, depth: f32) -> Option<Vec3> {
        if !(depth.is_finite() && depth > 0.0) {
            return None;
        }
        let (th, tv) = self.tan_half();
        let x_ndc = 2.0 * sx / (self.width as f32) - 1.0;
        let y_ndc = 1.0 - 2.0 * sy / (self.height as f32);
        Some(vec3(x_ndc * th * depth, y_ndc * tv * depth, -depth))
    }

    /// View-space position for an integer pixel plus subpixel offset
    /// (`(0.5, 0.5)` is the pixel center).
    pub fn reconstruct_view_position(
        &self,
        px: u32,
        py: u32,
        offset: (f32, f32),
        depth: f32,
    ) -> Option<Vec3> {
        self.reconstruct_at(px as f32 + offset.0, py as f32 + offset.1, depth)
    }

    /// Projects a view-space point back to continuous pixel coordinates and
    /// linear depth. `None` when the point is at or behind the camera plane.
    pub fn project_view(&self, p: Vec3) -> Option<(f32, f32, f32)> {
        let depth = -p.z;
        if depth.is_nan() || depth <= 0.0 {
            return None;
        }
        let (th, tv) = self.tan_half();
        let x_ndc = p.x / (th * depth);
        let y_ndc = p.y / (tv * depth);
        let sx = (x_ndc + 1.0) * 0.5 * self.width as f32;
        let sy = (1.0 - y_ndc) * 0.5 * self.height as f32;
        Some((sx, sy, depth))
    }

    /// Unit view-space direction of the primary ray through a pixel center.
    pub fn pixel_ray_view(&self, px: u32, py: u32) -> Vec3 {
        let (th, tv) = self.tan_half();
        let x_ndc = 2.0 * (px as f32 + 0.5) / (self.width as f32) - 1.0;
        let y_ndc = 1.0 - 2.0 * (py as f32 + 0.5) / (self.height as f32);
        vec3(x_ndc * th, y_ndc * tv, -1.0).normalized()
    }

    /// Unit world-space direction of the primary ray through a pixel center.
    pub fn pixel_ray_world(&self, px: u32, py: u32) -> Vec3 {
        self.world_to_view.inverse_dir(self.pixel_ray_view(px, py))
    }

    pub fn eye_world(&self) -> Vec3 {
        self.world_to_view.eye()
    }

    pub fn view_dir_to_world(&self, d: Vec3) -> Vec3 {
        self.world_to_view.inverse_dir(d)
    }
}

/// Geometry and material inputs for the screen-space passes. `depth` uses
/// +infinity as the sky sentinel; sky pixels carry zeroed normal, light, and
/// albedo.
#[derive(Clone, Debug)]
pub struct GBuffer {
    pub depth: ImageBuf<f32>,
    pub normal: ImageBuf<Vec3>,
    pub light: ImageBuf<Vec3>,
    pub albedo: ImageBuf<Vec3>,
    pub camera: CameraModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GBufferError(pub String);

impl fmt::Display for GBufferError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid g-buffer: {}", self.0)
    }
}

impl std::error::Error for GBufferError {}

impl GBuffer {
    pub fn width(&self) -> u32 {
        self.depth.width()
    }

    pub fn height(&self) -> u32 {
        self.depth.height()
    }

    pub fn is_sky(&self, x: u32, y: u32) -> bool {
        !self.depth.at(x, y).is_finite()
    }

    /// Reconstructed view-space position and unit normal, `None` on sky.
    pub fn surface_at(&self, x: u32, y: u32) -> Option<(Vec3, Vec3)> {
        let p = self
            .camera
            .reconstruct_view_position(x, y, (0.5, 0.5), self.depth.at(x, y))?;
        Some((p, self.normal.at(x, y)))
    }

    pub fn validate(&self) -> Result<(), GBufferError> {
        let (w, h) = (self.depth.width(), self.depth.height());
        for (name, dims) in [
            ("normal", (self.normal.width(), self.normal.height())),
            ("light", (self.light.width(), self.light.height())),
            ("albedo", (self.albedo.width(), self.albedo.height())),
        ] {
            if dims != (w, h) {
                return Err(GBufferError(format!(
                    "{name} is {}x{}, depth is {w}x{h}",
                    dims.0, dims.1
                )));
            }
        }
        if (self.camera.width, self.camera.height) != (w, h) {
            return Err(GBufferError(format!(
                "camera is {}x{}, images are {w}x{h}",
                self.camera.width, self.camera.height
            )));
        }
        for (x, y, &d) in self.depth.enumerate() {
            if d.is_nan() || d <= 0.0 {
                return Err(GBufferError(format!("depth {d} at ({x}, {y})")));
            }
            if !d.is_finite() {
                continue; // sky
            }
            let n = self.normal.at(x, y);
            if !n.is_finite() || (n.length() - 1.0).abs() > 1e-4 {
                return Err(GBufferError(format!("non-unit normal {n:?} at ({x}, {y})")));
            }
            let l = self.light.at(x, y);
            if !l.is_finite() || l.min_component() < 0.0 {
                return Err(GBufferError(format!("bad light {l:?} at ({x}, {y})")));
            }
            let a = self.albedo.at(x, y);
            if !a.is_finite() || a.min_component() < 0.0 || a.max_component() > 1.0 {
                return Err(GBufferError(format!("albedo {a:?} outside [0,1] at ({x}, {y})")));
            }
        }
        Ok(())
    }
}

/// The three pass outputs for one frame: visibility-style AO in [0,1]
/// (1 = unoccluded), and non-negative HDR GI / ambient radiance.
#[derive(Clone, Debug)]
pub struct OutputFrame {
    pub ao: ImageBuf<f32>,
    pub gi: ImageBuf<Vec3>,
    pub ambient: ImageBuf<Vec3>,
}
