//! Comparison methods: two-horizon AO with an optional distance falloff,
//! bent-normal ambient, plain-normal ambient, and a single-hit screen-space
//! GI tracer.

use std::f32::consts::{FRAC_PI_2, PI, TAU};

use crate::bitmask::{sectors_from_arc, VisibilityBitmask};
use crate::buffers::{GBuffer, ImageBuf};
use crate::math::{orthonormal_basis, Vec3};
use crate::parallel::map_pixels;
use crate::passes::{
    walk_pixel, AmbientEnvironment, PassConfig, SampleInfo, SliceConsumer,
};
use crate::slicemath::{recenter_on_normal, stable_hash01, SliceFrame, STREAM_SSR_BASE};

/// Distance weighting applied to horizon candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Falloff {
    None,
    /// Scales each sample's horizon intrusion by max(0, 1 - d/r).
    Linear,
}

/// The two horizon angles of one slice, relative to the projected normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HorizonPair {
    pub theta1: f32,
    pub theta2: f32,
}

struct GtaoConsumer {
    falloff: Falloff,
    radius: f32,
    horizons: HorizonPair,
    ao_sum: f32,
}

impl SliceConsumer for GtaoConsumer {
    fn begin(&mut self, _frame: &SliceFrame) {
        self.horizons = HorizonPair { theta1: FRAC_PI_2, theta2: -FRAC_PI_2 };
    }

    fn sample(&mut self, frame: &SliceFrame, info: &SampleInfo) {
        let theta = recenter_on_normal(info.theta_f, frame.n_angle);
        let w = match self.falloff {
            Falloff::None => 1.0,
            Falloff::Linear => (1.0 - info.dist / self.radius).max(0.0),
        };
        // Horizon side comes from the raw front angle, not the marching side,
        // so it always matches the side of the bitmask sample's arc.
        if info.theta_f >= 0.0 {
            let cand = FRAC_PI_2 - w * (FRAC_PI_2 - theta);
            self.horizons.theta1 = self.horizons.theta1.min(cand);
        } else {
            let cand = -FRAC_PI_2 + w * (theta + FRAC_PI_2);
            self.horizons.theta2 = self.horizons.theta2.max(cand);
        }
    }

    fn end(&mut self, _frame: &SliceFrame) {
        self.ao_sum += (self.horizons.theta1 - self.horizons.theta2).max(0.0) / PI;
    }
}

/// Two-horizon AO over the exact sampling pattern of the bitmask pass,
/// integrated in the same uniform angle space. Sky pixels output 1.
pub fn render_gtao(gbuffer: &GBuffer, config: &PassConfig, falloff: Falloff) -> ImageBuf<f32> {
    config.validate().expect("pass config");
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, config.threads, |x, y| {
        if gbuffer.is_sky(x, y) {
            return 1.0;
        }
        let mut consumer = GtaoConsumer {
            falloff,
            radius: config.radius,
            horizons: HorizonPair { theta1: FRAC_PI_2, theta2: -FRAC_PI_2 },
            ao_sum: 0.0,
        };
        for frame_index in 0..config.frames {
            walk_pixel(gbuffer, config, x, y, frame_index, &mut consumer);
        }
        consumer.ao_sum / (config.slices * config.frames) as f32
    });
    ImageBuf::from_vec(w, h, results)
}

/// Unnormalized sum of the unoccluded sector center directions of one slice.
pub(crate) fn bent_from_mask(mask: &VisibilityBitmask, frame: &SliceFrame) -> Vec3 {
    let n_b = mask.sectors();
    let mut sum = Vec3::ZERO;
    for k in 0..n_b {
        if mask.is_set(k) {
            continue;
        }
        let theta = frame.n_angle - FRAC_PI_2 + (k as f32 + 0.5) * PI / n_b as f32;
        sum += frame.view_axis * theta.cos() + frame.tangent * theta.sin();
    }
    sum
}

struct BentConsumer {
    mask: VisibilityBitmask,
    dir_sum: Vec3,
    ao_sum: f32,
}

impl SliceConsumer for BentConsumer {
    fn begin(&mut self, _frame: &SliceFrame) {
        self.mask.clear();
    }

    fn sample(&mut self, frame: &SliceFrame, info: &SampleInfo) {
        let a = recenter_on_normal(info.theta_f, frame.n_angle);
        let b = recenter_on_normal(info.theta_b, frame.n_angle);
        let arc = sectors_from_arc(a.min(b), a.max(b), self.mask.sectors());
        self.mask.or_with(&arc);
    }

    fn end(&mut self, frame: &SliceFrame) {
        self.dir_sum += bent_from_mask(&self.mask, frame);
        self.ao_sum += self.mask.visibility();
    }
}

fn bent_and_ao(gbuffer: &GBuffer, config: &PassConfig, x: u32, y: u32) -> Option<(Vec3, f32)> {
    let (_p, n_p) = gbuffer.surface_at(x, y)?;
    let mut consumer = BentConsumer {
        mask: VisibilityBitmask::empty(config.sectors),
        dir_sum: Vec3::ZERO,
        ao_sum: 0.0,
    };
    for frame_index in 0..config.frames {
        walk_pixel(gbuffer, config, x, y, frame_index, &mut consumer);
    }
    let bent = consumer.dir_sum.try_normalized(1e-6).unwrap_or(n_p);
    Some((bent, consumer.ao_sum / (config.slices * config.frames) as f32))
}

/// View-space bent normals (average unoccluded direction), unit length on
/// surface pixels, zero on sky.
pub fn bent_normals(gbuffer: &GBuffer, config: &PassConfig) -> ImageBuf<Vec3> {
    config.validate().expect("pass config");
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, config.threads, |x, y| {
        bent_and_ao(gbuffer, config, x, y).map_or(Vec3::ZERO, |(bent, _)| bent)
    });
    ImageBuf::from_vec(w, h, results)
}

/// Ambient via a single bent normal per pixel: env(bent) * AO.
pub fn render_bent_normal_ambient(
    gbuffer: &GBuffer,
    config: &PassConfig,
    env: &AmbientEnvironment,
) -> ImageBuf<Vec3> {
    config.validate().expect("pass config");
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, config.threads, |x, y| {
        match bent_and_ao(gbuffer, config, x, y) {
            Some((bent, ao)) => env.radiance(gbuffer.camera.view_dir_to_world(bent)) * ao,
            None => env.radiance(gbuffer.camera.pixel_ray_world(x, y)),
        }
    });
    ImageBuf::from_vec(w, h, results)
}

/// Ambient with no directional occlusion at all: env(n_p) * AO.
pub fn render_normal_ambient(
    gbuffer: &GBuffer,
    config: &PassConfig,
    env: &AmbientEnvironment,
) -> ImageBuf<Vec3> {
    let (ao, _) = crate::passes::render_ao_gi(gbuffer, config);
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, config.threads, |x, y| {
        match gbuffer.surface_at(x, y) {
            Some((_p, n_p)) => {
                env.radiance(gbuffer.camera.view_dir_to_world(n_p)) * ao.at(x, y)
            }
            None => env.radiance(gbuffer.camera.pixel_ray_world(x, y)),
        }
    });
    ImageBuf::from_vec(w, h, results)
}

/// Single-hit screen-space GI: cosine-weighted hemisphere rays marched
/// against the depth buffer; the first crossing within the thickness budget
/// contributes its pixel's light once. The high-noise baseline.
pub fn render_ssr_gi(
    gbuffer: &GBuffer,
    config: &PassConfig,
    rays_per_pixel: u32,
) -> ImageBuf<Vec3> {
    config.validate().expect("pass config");
    assert!(rays_per_pixel >= 1, "need at least one ray per pixel");
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let step_len = config.radius / config.samples as f32;

    let results = map_pixels(w, h, config.threads, |x, y| {
        let Some((p, n_p)) = gbuffer.surface_at(x, y) else {
            return Vec3::ZERO;
        };
        let t_eff = config.thickness * (1.0 + config.thickness_linear * p.length());
        let (tan1, tan2) = orthonormal_basis(n_p);
        let mut sum = Vec3::ZERO;
        for frame_index in 0..config.frames {
            for ray in 0..rays_per_pixel {
                let u1 = stable_hash01(config.seed, x, y, frame_index, STREAM_SSR_BASE + 2 * ray);
                let u2 =
                    stable_hash01(config.seed, x, y, frame_index, STREAM_SSR_BASE + 2 * ray + 1);
                let r = u1.sqrt();
                let (sin_a, cos_a) = (TAU * u2).sin_cos();
                let dir = tan1 * (r * cos_a) + tan2 * (r * sin_a) + n_p * (1.0 - u1).sqrt();
                for j in 1..=config.samples {
                    let q = p + dir * (step_len * j as f32);
                    let Some((sx, sy, q_depth)) = gbuffer.camera.project_view(q) else {
                        break; // behind the camera plane
                    };
                    let (ix, iy) = (sx.floor() as i64, sy.floor() as i64);
                    if !gbuffer.depth.contains(ix, iy) {
                        break; // left the screen
                    }
                    let (ux, uy) = (ix as u32, iy as u32);
                    if ux == x && uy == y {
                        continue;
                    }
                    if gbuffer.is_sky(ux, uy) {
                        continue;
                    }
                    // A crossing deeper than the thickness budget is treated
                    // as the ray passing behind the occluder; keep marching.
                    let buf_depth = gbuffer.depth.at(ux, uy);
                    if q_depth > buf_depth && q_depth - buf_depth <= t_eff {
                        let n_j = gbuffer.normal.at(ux, uy);
                        let w_emit = n_j.dot(-dir).max(0.0);
                        sum += gbuffer.light.at(ux, uy) * w_emit;
                        break;
                    }
                }
            }
        }
        sum * (1.0 / (rays_per_pixel * config.frames) as f32)
    });
    ImageBuf::from_vec(w, h, results)
}
