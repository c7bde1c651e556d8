//! Per-slice geometry: azimuth generation, the slice coordinate frame,
//! screen-space step planning, and the front/back angle pair per sample.
//!
//! All angles are radians measured inside the slice plane from the view axis
//! (the unit vector from the shaded point toward the camera), positive toward
//! the slice tangent. Sector mapping recenters them on the projected-normal
//! angle and clamps to [-pi/2, pi/2].

use std::f32::consts::{FRAC_PI_2, PI};

use smallvec::SmallVec;

use crate::buffers::CameraModel;
use crate::math::Vec3;

/// Hash streams, so one (seed, pixel, frame) tuple yields independent values.
pub const STREAM_DIRECTION: u32 = 0;
pub const STREAM_STEP_JITTER: u32 = 1;
/// SSR rays consume two streams per ray starting here.
pub const STREAM_SSR_BASE: u32 = 2;

fn mix64(mut x: u64) -> u64 {
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Deterministic per-pixel scalar in [0, 1). Identical inputs give identical
/// output on every platform, thread, and run.
pub fn stable_hash01(seed: u64, px: u32, py: u32, frame_index: u32, stream: u32) -> f32 {
    let mut h = mix64(seed ^ 0x9E3779B97F4A7C15);
    h = mix64(h ^ (((px as u64) << 32) | py as u64));
    h = mix64(h ^ (((frame_index as u64) << 32) | stream as u64));
    ((h >> 40) as f32) / (1u64 << 24) as f32
}

/// Azimuth of slice `i` of `n_d`, rotated by the per-pixel offset `xi` in
/// [0, 1). Slices are uniform over the half-turn; the opposite half is
/// covered by marching both sides of each slice.
pub fn slice_direction(i: u32, n_d: u32, xi: f32) -> f32 {
    PI * (i as f32 + xi) / n_d as f32
}

/// All slice azimuths for one pixel and frame.
pub fn slice_directions(n_d: u32, px: u32, py: u32, frame_index: u32, seed: u64) -> Vec<f32> {
    let xi = stable_hash01(seed, px, py, frame_index, STREAM_DIRECTION);
    (0..n_d).map(|i| slice_direction(i, n_d, xi)).collect()
}

/// Coordinate frame of one hemisphere slice at a shaded point.
#[derive(Clone, Copy, Debug)]
pub struct SliceFrame {
    /// Slice azimuth in the image plane.
    pub phi: f32,
    /// Unit view-space vector spanning the slice plane together with
    /// `view_axis`; lateral sample offsets project onto it.
    pub tangent: Vec3,
    /// Unit vector from the shaded point toward the camera.
    pub view_axis: Vec3,
    /// Angle of the projected surface normal inside the slice plane,
    /// measured from `view_axis`, clamped to [-pi/2, pi/2].
    pub n_angle: f32,
    /// Angle between the tangent and the view-space z = 0 plane. Not used by
    /// the sector mapping; exposed for inspection.
    pub t_theta: f32,
}

/// Builds the slice frame at view-space position `p` with unit normal `n_p`
/// for slice azimuth `phi`.
pub fn build_slice_frame(p: Vec3, n_p: Vec3, phi: f32) -> SliceFrame {
    let view_axis = (-p).normalized();
    let (sin_phi, cos_phi) = phi.sin_cos();
    let omega = Vec3 { x: cos_phi, y: sin_phi, z: 0.0 };
    let raw = omega - view_axis * omega.dot(view_axis);
    // For any point in front of the camera the image-plane direction cannot
    // be parallel to the view axis, but guard the normalization anyway.
    let tangent = raw
        .try_normalized(1e-12)
        .unwrap_or(crate::math::orthonormal_basis(view_axis).0);

    let n_t = n_p.dot(tangent);
    let n_v = n_p.dot(view_axis);
    let n_angle = if n_t * n_t + n_v * n_v < 1e-12 {
        0.0 // normal orthogonal to the slice plane: keep the frame centered
    } else {
        n_t.atan2(n_v).clamp(-FRAC_PI_2, FRAC_PI_2)
    };

    let t_theta = tangent.z.clamp(-1.0, 1.0).asin();

    SliceFrame { phi, tangent, view_axis, n_angle, t_theta }
}

/// Recenters a view-axis-relative angle on the projected normal and clamps it
/// to the hemisphere.
pub fn recenter_on_normal(theta: f32, n_angle: f32) -> f32 {
    (theta - n_angle).clamp(-FRAC_PI_2, FRAC_PI_2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    Constant,
    /// Quadratic warp concentrating steps near the pixel.
    Exponential,
}

/// Screen-space marching offsets (pixels) shared by both sides of a slice.
#[derive(Clone, Debug)]
pub struct StepPlan {
    pub offsets: SmallVec<[f32; 16]>,
    pub mode: StepMode,
    pub jitter: f32,
    /// Projected world radius in pixels at the shaded point's depth.
    pub r_px: f32,
}

/// Offsets for a given projected radius: constant spacing
/// `(j + jitter) * r_px / (n_s + 1)` or the quadratic warp
/// `r_px * ((j + jitter) / n_s)^2`. A radius that projects below one pixel
/// collapses to a single one-pixel step.
pub fn step_offsets(r_px: f32, n_s: u32, mode: StepMode, jitter: f32) -> SmallVec<[f32; 16]> {
    if r_px < 1.0 {
        return SmallVec::from_slice(&[1.0]);
    }
    (0..n_s)
        .map(|j| {
            let t = j as f32 + jitter;
            match mode {
                StepMode::Constant => t * r_px / (n_s as f32 + 1.0),
                StepMode::Exponential => r_px * (t / n_s as f32) * (t / n_s as f32),
            }
        })
        .collect()
}

/// Plans the marching offsets for world radius `r_world` at view position
/// `p`. The projected radius uses the vertical image scale at `p`'s depth.
pub fn plan_steps(
    r_world: f32,
    p: Vec3,
    camera: &CameraModel,
    n_s: u32,
    mode: StepMode,
    jitter: f32,
) -> StepPlan {
    let depth = -p.z;
    let (_, tan_v) = camera.tan_half();
    let r_px = r_world * (camera.height as f32 * 0.5) / (tan_v * depth);
    StepPlan { offsets: step_offsets(r_px, n_s, mode, jitter), mode, jitter, r_px }
}

/// Angles of the front sample `s_f` and of the back point obtained by pushing
/// `s_f` away from the camera by `thickness` along the shaded pixel's view
/// ray. Returns `None` when the sample coincides with the shaded point.
pub fn sample_angles(
    p: Vec3,
    view_axis: Vec3,
    tangent: Vec3,
    s_f: Vec3,
    thickness: f32,
) -> Option<(f32, f32)> {
    let dv = s_f - p;
    if dv.length_squared() < 1e-12 {
        return None;
    }
    // The back point is s_f - view_axis * thickness. Expanding its dot
    // products keeps the tangent component exact: tangent is orthogonal to
    // view_axis by construction, and multiplying the residual of that
    // orthogonality by a huge thickness would otherwise flip the side of
    // near-axis samples.
    let along = dv.dot(tangent);
    let toward = dv.dot(view_axis);
    let theta_f = along.atan2(toward);
    let theta_b = along.atan2(toward - thickness);
    Some((theta_f, theta_b))
}
