//! The production passes: bitmask AO + indirect diffuse GI, directionally
//! occluded ambient, multi-bounce feedback, and multi-frame accumulation.

use std::f32::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::bitmask::{newly_unoccluded_count, sectors_from_arc, VisibilityBitmask};
use crate::buffers::{CameraModel, GBuffer, ImageBuf, OutputFrame};
use crate::math::Vec3;
use crate::parallel::map_pixels;
use crate::slicemath::{
    build_slice_frame, plan_steps, recenter_on_normal, sample_angles, slice_directions,
    stable_hash01, SliceFrame, StepMode, STREAM_STEP_JITTER,
};

/// Radiance arriving from a given world-space direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AmbientEnvironment {
    Constant(Vec3),
    /// Blends from `horizon` at y <= 0 up to `top` at the zenith.
    VerticalGradient { top: Vec3, horizon: Vec3 },
    /// Blends from `west` at -x to `east` at +x, constant in elevation.
    HorizontalGradient { east: Vec3, west: Vec3 },
}

impl AmbientEnvironment {
    pub fn radiance(&self, world_dir: Vec3) -> Vec3 {
        match *self {
            AmbientEnvironment::Constant(c) => c,
            AmbientEnvironment::VerticalGradient { top, horizon } => {
                horizon.lerp(top, world_dir.y.clamp(0.0, 1.0))
            }
            AmbientEnvironment::HorizontalGradient { east, west } => {
                west.lerp(east, 0.5 * (world_dir.x.clamp(-1.0, 1.0) + 1.0))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid pass config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Knobs shared by every screen-space pass.
#[derive(Clone, Debug)]
pub struct PassConfig {
    /// Sampling radius in world units.
    pub radius: f32,
    /// Marching steps per horizon side.
    pub samples: u32,
    /// Hemisphere slices per pixel per frame.
    pub slices: u32,
    /// Visibility sectors per slice.
    pub sectors: u32,
    /// Assumed occluder thickness along the view ray, world units.
    pub thickness: f32,
    /// Slope k of t_eff = thickness * (1 + k * |p|).
    pub thickness_linear: f32,
    pub step_mode: StepMode,
    pub seed: u64,
    /// Frames to accumulate (each re-jitters directions and steps).
    pub frames: u32,
    /// Contiguous subregions per slice for the ambient pass.
    pub ambient_subregions: u32,
    /// Worker threads; 0 picks the machine's parallelism.
    pub threads: usize,
}

impl Default for PassConfig {
    fn default() -> Self {
        PassConfig {
            radius: 2.0,
            samples: 16,
            slices: 1,
            sectors: 32,
            thickness: 0.2,
            thickness_linear: 0.0,
            step_mode: StepMode::Constant,
            seed: 0,
            frames: 1,
            ambient_subregions: 4,
            threads: 0,
        }
    }
}

impl PassConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.samples < 1 || self.slices < 1 || self.sectors < 1 || self.frames < 1 {
            return Err(ConfigError("all counts must be >= 1".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(ConfigError(format!("radius {} must be positive", self.radius)));
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(ConfigError(format!("thickness {} must be positive", self.thickness)));
        }
        if !(self.thickness_linear >= 0.0 && self.thickness_linear.is_finite()) {
            return Err(ConfigError(format!(
                "thickness_linear {} must be >= 0",
                self.thickness_linear
            )));
        }
        if self.ambient_subregions < 1 || !self.sectors.is_multiple_of(self.ambient_subregions) {
            return Err(ConfigError(format!(
                "ambient subregions {} must divide sector count {}",
                self.ambient_subregions, self.sectors
            )));
        }
        Ok(())
    }

    fn checked(&self) -> &Self {
        self.validate().expect("pass config");
        self
    }
}

/// One depth-buffer sample seen from the shaded point, ready for a consumer.
pub(crate) struct SampleInfo {
    /// Angle of the sample's surface point, measured from the view axis.
    pub theta_f: f32,
    /// Angle of the assumed back face.
    pub theta_b: f32,
    /// View-space distance from the shaded point.
    pub dist: f32,
    /// Unit direction from the shaded point to the sample.
    pub dir: Vec3,
    /// Sample pixel's direct light.
    pub light: Vec3,
    /// Sample pixel's view-space normal.
    pub normal: Vec3,
}

/// Receives the slice walk of one pixel. `begin`/`end` bracket each slice;
/// `sample` sees every accepted depth sample of that slice in marching order.
pub(crate) trait SliceConsumer {
    fn begin(&mut self, frame: &SliceFrame);
    fn sample(&mut self, frame: &SliceFrame, info: &SampleInfo);
    fn end(&mut self, frame: &SliceFrame);
}

/// Runs the shared sampling pattern for one pixel and frame: N_d slices, two
/// marching sides each, N_s steps per side. Steps that leave the screen, land
/// on sky, revisit the shaded pixel, sit further than 2r in view space, or
/// fall at or below the tangent plane are dropped. Returns false on sky
/// pixels without touching the consumer.
pub(crate) fn walk_pixel<C: SliceConsumer>(
    gb: &GBuffer,
    cfg: &PassConfig,
    px: u32,
    py: u32,
    frame_index: u32,
    consumer: &mut C,
) -> bool {
    let Some((p, n_p)) = gb.surface_at(px, py) else {
        return false;
    };
    let jitter = stable_hash01(cfg.seed, px, py, frame_index, STREAM_STEP_JITTER);
    let plan = plan_steps(cfg.radius, p, &gb.camera, cfg.samples, cfg.step_mode, jitter);
    let t_eff = cfg.thickness * (1.0 + cfg.thickness_linear * p.length());
    let max_dist = 2.0 * cfg.radius;

    for phi in slice_directions(cfg.slices, px, py, frame_index, cfg.seed) {
        let frame = build_slice_frame(p, n_p, phi);
        consumer.begin(&frame);
        let (sin_phi, cos_phi) = phi.sin_cos();
        for side in [1.0f32, -1.0] {
            // View-space +y is screen-up, so the pixel step flips y.
            let step = (side * cos_phi, -side * sin_phi);
            for &off in plan.offsets.iter() {
                let sx = px as f32 + 0.5 + step.0 * off;
                let sy = py as f32 + 0.5 + step.1 * off;
                let (ix, iy) = (sx.floor() as i64, sy.floor() as i64);
                if ix == px as i64 && iy == py as i64 {
                    continue;
                }
                if !gb.depth.contains(ix, iy) {
                    continue;
                }
                let (ux, uy) = (ix as u32, iy as u32);
                let d = gb.depth.at(ux, uy);
                let Some(s_f) = gb.camera.reconstruct_at(ix as f32 + 0.5, iy as f32 + 0.5, d)
                else {
                    continue; // sky
                };
                let delta = s_f - p;
                let dist = delta.length();
                if dist < 1e-6 || dist > max_dist {
                    continue;
                }
                // Samples at or below the tangent plane cannot occlude the
                // hemisphere around n_p. Dropping them here also absorbs the
                // angular noise pixel snapping adds for coplanar neighbours,
                // which would otherwise register sub-sector occlusion on
                // flat geometry.
                if delta.dot(n_p) <= 1e-3 * dist {
                    continue;
                }
                let Some((theta_f, theta_b)) =
                    sample_angles(p, frame.view_axis, frame.tangent, s_f, t_eff)
                else {
                    continue;
                };
                consumer.sample(
                    &frame,
                    &SampleInfo {
                        theta_f,
                        theta_b,
                        dist,
                        dir: delta * (1.0 / dist),
                        light: gb.light.at(ux, uy),
                        normal: gb.normal.at(ux, uy),
                    },
                );
            }
        }
        consumer.end(&frame);
    }
    true
}

struct AoGiConsumer {
    n_p: Vec3,
    mask: VisibilityBitmask,
    ao_sum: f32,
    gi_sum: Vec3,
}

impl SliceConsumer for AoGiConsumer {
    fn begin(&mut self, _frame: &SliceFrame) {
        self.mask.clear();
    }

    fn sample(&mut self, frame: &SliceFrame, info: &SampleInfo) {
        let a = recenter_on_normal(info.theta_f, frame.n_angle);
        let b = recenter_on_normal(info.theta_b, frame.n_angle);
        let n_b = self.mask.sectors();
        let arc = sectors_from_arc(a.min(b), a.max(b), n_b);
        let newly = newly_unoccluded_count(&arc, &self.mask);
        if newly > 0 {
            let w_recv = self.n_p.dot(info.dir).max(0.0);
            let w_emit = info.normal.dot(-info.dir).max(0.0);
            self.gi_sum += info.light * ((newly as f32 / n_b as f32) * w_recv * w_emit);
        }
        self.mask.or_with(&arc);
    }

    fn end(&mut self, _frame: &SliceFrame) {
        self.ao_sum += self.mask.visibility();
    }
}

/// Bitmask AO and single-bounce indirect diffuse. Sky pixels output AO 1,
/// GI 0. Averages over `config.frames` jitter frames.
pub fn render_ao_gi(gbuffer: &GBuffer, config: &PassConfig) -> (ImageBuf<f32>, ImageBuf<Vec3>) {
    let cfg = config.checked();
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, cfg.threads, |x, y| {
        let Some((_p, n_p)) = gbuffer.surface_at(x, y) else {
            return (1.0f32, Vec3::ZERO);
        };
        let mut consumer = AoGiConsumer {
            n_p,
            mask: VisibilityBitmask::empty(cfg.sectors),
            ao_sum: 0.0,
            gi_sum: Vec3::ZERO,
        };
        for frame_index in 0..cfg.frames {
            walk_pixel(gbuffer, cfg, x, y, frame_index, &mut consumer);
        }
        let norm = 1.0 / (cfg.slices * cfg.frames) as f32;
        (consumer.ao_sum * norm, consumer.gi_sum * norm)
    });
    let (ao, gi): (Vec<f32>, Vec<Vec3>) = results.into_iter().unzip();
    (ImageBuf::from_vec(w, h, ao), ImageBuf::from_vec(w, h, gi))
}

/// Ambient arriving through the unoccluded part of one slice's final mask.
/// The slice is split into `k` contiguous subregions; each contributes the
/// environment radiance at its center direction, weighted by its unoccluded
/// sector fraction and by incidence against the surface normal. The incidence
/// factor is an extension over pure sector counting: without it a grazing
/// subregion would outweigh its physical share, and with it the empty
/// hemisphere converges on the usual cosine-weighted ambient term.
pub(crate) fn ambient_from_mask(
    mask: &VisibilityBitmask,
    frame: &SliceFrame,
    n_p: Vec3,
    k: u32,
    env: &AmbientEnvironment,
    camera: &CameraModel,
) -> Vec3 {
    let n_b = mask.sectors();
    let per = n_b / k;
    let mut sum = Vec3::ZERO;
    for m in 0..k {
        let unoccluded = (m * per..(m + 1) * per).filter(|&s| !mask.is_set(s)).count() as f32;
        if unoccluded == 0.0 {
            continue;
        }
        let theta_m = frame.n_angle - FRAC_PI_2 + (m as f32 + 0.5) * PI / k as f32;
        let a_m = frame.view_axis * theta_m.cos() + frame.tangent * theta_m.sin();
        let w = a_m.dot(n_p).max(0.0);
        if w == 0.0 {
            continue;
        }
        let radiance = env.radiance(camera.view_dir_to_world(a_m));
        sum += radiance * (unoccluded / n_b as f32 * w);
    }
    sum
}

struct AmbientConsumer<'a> {
    n_p: Vec3,
    k: u32,
    env: &'a AmbientEnvironment,
    camera: &'a CameraModel,
    mask: VisibilityBitmask,
    sum: Vec3,
}

impl SliceConsumer for AmbientConsumer<'_> {
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
        self.sum += ambient_from_mask(&self.mask, frame, self.n_p, self.k, self.env, self.camera);
    }
}

/// Directionally occluded ambient light. Sky pixels sample the environment
/// straight along the view ray.
pub fn render_ambient(
    gbuffer: &GBuffer,
    config: &PassConfig,
    env: &AmbientEnvironment,
) -> ImageBuf<Vec3> {
    let cfg = config.checked();
    let (w, h) = (gbuffer.width(), gbuffer.height());
    let results = map_pixels(w, h, cfg.threads, |x, y| {
        let Some((_p, n_p)) = gbuffer.surface_at(x, y) else {
            return env.radiance(gbuffer.camera.pixel_ray_world(x, y));
        };
        let mut consumer = AmbientConsumer {
            n_p,
            k: cfg.ambient_subregions,
            env,
            camera: &gbuffer.camera,
            mask: VisibilityBitmask::empty(cfg.sectors),
            sum: Vec3::ZERO,
        };
        for frame_index in 0..cfg.frames {
            walk_pixel(gbuffer, cfg, x, y, frame_index, &mut consumer);
        }
        consumer.sum * (1.0 / (cfg.slices * cfg.frames) as f32)
    });
    ImageBuf::from_vec(w, h, results)
}

fn mean_luminance(img: &ImageBuf<Vec3>, gb: &GBuffer) -> f32 {
    let mut sum = 0.0f64;
    let mut n = 0u32;
    for (x, y, v) in img.enumerate() {
        if !gb.is_sky(x, y) {
            sum += ((v.x + v.y + v.z) / 3.0) as f64;
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64) as f32
    }
}

/// Iterated GI: each bounce folds the previous indirect result back into the
/// light buffer (direct + albedo * GI) and re-renders. `bounces` of 1 is
/// plain `render_ao_gi`. Panics if mean GI inflates by over 10x between
/// bounces, which signals a feedback loop.
pub fn render_multibounce(gbuffer: &GBuffer, config: &PassConfig, bounces: u32) -> ImageBuf<Vec3> {
    assert!(bounces >= 1, "bounces must be >= 1");
    let mut work = gbuffer.clone();
    let mut gi = render_ao_gi(&work, config).1;
    let mut prev_mean = mean_luminance(&gi, gbuffer);
    for _ in 1..bounces {
        for i in 0..work.light.data().len() {
            work.light.data_mut()[i] =
                gbuffer.light.data()[i] + gbuffer.albedo.data()[i].mul_elem(gi.data()[i]);
        }
        gi = render_ao_gi(&work, config).1;
        let mean = mean_luminance(&gi, gbuffer);
        assert!(
            mean <= prev_mean * 10.0 + 1e-6,
            "indirect light diverging: mean {mean} after {prev_mean}"
        );
        prev_mean = mean;
    }
    gi
}

/// Renders all three outputs averaged over `frames` jitter frames,
/// overriding `config.frames`.
pub fn accumulate(
    gbuffer: &GBuffer,
    config: &PassConfig,
    env: &AmbientEnvironment,
    frames: u32,
) -> OutputFrame {
    let mut cfg = config.clone();
    cfg.frames = frames;
    let (ao, gi) = render_ao_gi(gbuffer, &cfg);
    let ambient = render_ambient(gbuffer, &cfg, env);
    OutputFrame { ao, gi, ambient }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::vec3;
    use crate::scenegen::{builtin_camera, builtin_scene, synthesize_gbuffer};

    fn rendered(scene: &str, size: u32, cfg: &PassConfig) -> (GBuffer, ImageBuf<f32>, ImageBuf<Vec3>) {
        let gb = synthesize_gbuffer(
            &builtin_scene(scene).unwrap(),
            &builtin_camera(scene, size, size).unwrap(),
        );
        let (ao, gi) = render_ao_gi(&gb, cfg);
        (gb, ao, gi)
    }

    #[test]
    fn config_validation() {
        assert!(PassConfig::default().validate().is_ok());
        for broken in [
            PassConfig { samples: 0, ..Default::default() },
            PassConfig { radius: 0.0, ..Default::default() },
            PassConfig { thickness: -1.0, ..Default::default() },
            PassConfig { sectors: 33, ..Default::default() },
            PassConfig { ambient_subregions: 0, ..Default::default() },
        ] {
            assert!(broken.validate().is_err(), "{broken:?}");
        }
        // 4096-sector reference configs are legal.
        assert!(PassConfig { sectors: 4096, ..Default::default() }.validate().is_ok());
    }

    #[test]
    fn flat_scene_is_fully_visible() {
        let (gb, ao, gi) = rendered("flat", 64, &PassConfig { seed: 7, ..Default::default() });
        for (x, y, &a) in ao.enumerate() {
            assert!(!gb.is_sky(x, y), "flat fixture should fill the frame");
            assert_eq!(a, 1.0, "AO at ({x},{y})");
        }
        assert!(gi.data().iter().all(|g| *g == Vec3::ZERO));
    }

    #[test]
    fn zero_light_means_zero_gi() {
        let scene = builtin_scene("poles").unwrap();
        let cam = builtin_camera("poles", 48, 48).unwrap();
        let mut gb = synthesize_gbuffer(&scene, &cam);
        for v in gb.light.data_mut() {
            *v = Vec3::ZERO;
        }
        let (_, gi) = render_ao_gi(&gb, &PassConfig::default());
        assert!(gi.data().iter().all(|g| *g == Vec3::ZERO));
    }

    #[test]
    fn gi_is_linear_in_light() {
        let scene = builtin_scene("corner").unwrap();
        let cam = builtin_camera("corner", 48, 48).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let cfg = PassConfig { seed: 11, ..Default::default() };
        let (_, gi) = render_ao_gi(&gb, &cfg);

        let mut doubled = gb.clone();
        for v in doubled.light.data_mut() {
            *v *= 2.0;
        }
        let (_, gi2) = render_ao_gi(&doubled, &cfg);
        for (a, b) in gi.data().iter().zip(gi2.data()) {
            assert_eq!(*a * 2.0, *b); // power-of-two scale commutes exactly
        }

        let mut scaled = gb.clone();
        for v in scaled.light.data_mut() {
            *v *= 2.5;
        }
        let (_, gi25) = render_ao_gi(&scaled, &cfg);
        for (a, b) in gi.data().iter().zip(gi25.data()) {
            assert!((*a * 2.5 - *b).length() <= 1e-5 * (1.0 + b.length()));
        }
    }

    #[test]
    fn thickness_shrink_never_darkens() {
        let scene = builtin_scene("sphere_on_plane").unwrap();
        let cam = builtin_camera("sphere_on_plane", 48, 48).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let thick = render_ao_gi(&gb, &PassConfig { thickness: 0.5, seed: 3, ..Default::default() }).0;
        let thin = render_ao_gi(&gb, &PassConfig { thickness: 0.25, seed: 3, ..Default::default() }).0;
        for (t, s) in thick.data().iter().zip(thin.data()) {
            assert!(s + 1e-6 >= *t, "thinner occluders must not add occlusion");
        }
    }

    #[test]
    fn outputs_stay_in_range() {
        let cfg = PassConfig { seed: 5, ..Default::default() };
        for scene in ["poles", "corner", "thin_wall"] {
            let (gb, ao, gi) = rendered(scene, 48, &cfg);
            let env = builtin_scene(scene).unwrap().ambient_env;
            let ambient = render_ambient(&gb, &cfg, &env);
            for &a in ao.data() {
                assert!((0.0..=1.0).contains(&a));
            }
            for g in gi.data().iter().chain(ambient.data()) {
                assert!(g.is_finite() && g.x >= 0.0 && g.y >= 0.0 && g.z >= 0.0);
            }
        }
    }

    fn head_on_plane(size: u32) -> GBuffer {
        use crate::scenegen::{synthesize_gbuffer, AnalyticScene, Primitive, Sun};
        let scene = AnalyticScene {
            primitives: vec![Primitive::Plane {
                point: Vec3::ZERO,
                normal: vec3(0.0, 0.0, 1.0),
                albedo: Vec3::splat(0.5),
            }],
            sun: Sun { direction: vec3(0.0, 0.0, -1.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let cam = CameraModel::look_at(
            size,
            size,
            1.0,
            0.05,
            100.0,
            vec3(0.0, 0.0, 3.0),
            Vec3::ZERO,
            vec3(0.0, 1.0, 0.0),
        )
        .unwrap();
        synthesize_gbuffer(&scene, &cam)
    }

    #[test]
    fn ambient_subregion_quadrature() {
        // Frozen sum (1/K) * sum_m cos((m + 0.5) pi / K - pi/2) for K = 4.
        const EMPTY_K4: f32 = 0.653_281_5;

        let frame = build_slice_frame(vec3(0.0, 0.0, -2.0), vec3(0.0, 0.0, 1.0), 0.3);
        let env = AmbientEnvironment::Constant(Vec3::ONE);
        let cam = builtin_camera("flat", 8, 8).unwrap();
        let n_p = vec3(0.0, 0.0, 1.0);

        let empty = VisibilityBitmask::empty(32);
        let a = ambient_from_mask(&empty, &frame, n_p, 4, &env, &cam);
        assert!((a.x - EMPTY_K4).abs() < 1e-5, "{}", a.x);

        let mut full = VisibilityBitmask::empty(32);
        full.set_range(0, 32);
        assert_eq!(ambient_from_mask(&full, &frame, n_p, 4, &env, &cam), Vec3::ZERO);

        // Upper half occluded: exactly the lower two subregions remain.
        let mut half = VisibilityBitmask::empty(32);
        half.set_range(16, 32);
        let h = ambient_from_mask(&half, &frame, n_p, 4, &env, &cam);
        assert!((h.x - 0.5 * EMPTY_K4).abs() < 1e-5, "{}", h.x);
    }

    #[test]
    fn empty_hemisphere_ambient_matches_golden() {
        let gb = head_on_plane(64);
        let cfg = PassConfig { seed: 2, ..Default::default() };
        let ambient = render_ambient(&gb, &cfg, &AmbientEnvironment::Constant(Vec3::ONE));
        let center = ambient.at(32, 32);
        assert!((center.x - 0.653_281_5).abs() < 5e-4, "{}", center.x);
        assert_eq!(center.x, center.y);
    }

    #[test]
    fn sky_pixels_use_view_ray_environment() {
        use crate::scenegen::{synthesize_gbuffer, AnalyticScene, Sun};
        let scene = AnalyticScene {
            primitives: vec![],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let cam = builtin_camera("poles", 16, 16).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let env = AmbientEnvironment::VerticalGradient {
            top: vec3(0.0, 0.0, 1.0),
            horizon: vec3(1.0, 0.0, 0.0),
        };
        let ambient = render_ambient(&gb, &PassConfig::default(), &env);
        let (ao, gi) = render_ao_gi(&gb, &PassConfig::default());
        for (x, y, &a) in ambient.enumerate() {
            assert_eq!(a, env.radiance(cam.pixel_ray_world(x, y)));
            assert_eq!(ao.at(x, y), 1.0);
            assert_eq!(gi.at(x, y), Vec3::ZERO);
        }
    }

    #[test]
    fn multibounce_first_bounce_matches_single_pass() {
        let scene = builtin_scene("corner").unwrap();
        let cam = builtin_camera("corner", 48, 48).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let cfg = PassConfig { seed: 9, ..Default::default() };
        let direct = render_ao_gi(&gb, &cfg).1;
        let one = render_multibounce(&gb, &cfg, 1);
        assert_eq!(direct.data(), one.data());

        let two = render_multibounce(&gb, &cfg, 2);
        let mean = |img: &ImageBuf<Vec3>| {
            img.data().iter().map(|v| (v.x + v.y + v.z) as f64).sum::<f64>()
        };
        assert!(mean(&two) >= mean(&one), "a second bounce only adds energy");

        let mut dark = gb.clone();
        for v in dark.light.data_mut() {
            *v = Vec3::ZERO;
        }
        for bounces in [1, 3] {
            let gi = render_multibounce(&dark, &cfg, bounces);
            assert!(gi.data().iter().all(|g| *g == Vec3::ZERO));
        }
    }

    #[test]
    fn accumulation_is_stable_and_reduces_variance() {
        let scene = builtin_scene("poles").unwrap();
        let cam = builtin_camera("poles", 64, 64).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let env = AmbientEnvironment::Constant(Vec3::ONE);

        let base = PassConfig { seed: 1, ..Default::default() };
        let once = accumulate(&gb, &base, &env, 1);
        let (ao1, _) = render_ao_gi(&gb, &base);
        assert_eq!(once.ao.data(), ao1.data());

        // Flat scene: averaging identical frames changes nothing.
        let flat = synthesize_gbuffer(
            &builtin_scene("flat").unwrap(),
            &builtin_camera("flat", 32, 32).unwrap(),
        );
        let f1 = accumulate(&flat, &base, &env, 1);
        let f64x = accumulate(&flat, &base, &env, 64);
        assert_eq!(f1.ao.data(), f64x.ao.data());

        // Frame accumulation shrinks seed-to-seed variance roughly like 1/n.
        let seeds: Vec<u64> = (0..8).map(|i| 1000 + 37 * i).collect();
        let variance_at = |frames: u32| {
            let renders: Vec<ImageBuf<f32>> = seeds
                .iter()
                .map(|&seed| {
                    let cfg = PassConfig { seed, frames, ..Default::default() };
                    render_ao_gi(&gb, &cfg).0
                })
                .collect();
            let n = renders.len() as f64;
            let mut total = 0.0f64;
            let mut count = 0u64;
            for i in 0..gb.depth.data().len() {
                let mean: f64 = renders.iter().map(|r| r.data()[i] as f64).sum::<f64>() / n;
                let var: f64 = renders
                    .iter()
                    .map(|r| (r.data()[i] as f64 - mean).powi(2))
                    .sum::<f64>()
                    / (n - 1.0);
                total += var;
                count += 1;
            }
            total / count as f64
        };
        let v1 = variance_at(1);
        let v16 = variance_at(16);
        assert!(
            v16 * 4.0 <= v1,
            "16-frame accumulation should cut variance by >= 4x: {v1} vs {v16}"
        );
    }

    #[test]
    fn worker_count_is_invisible() {
        let scene = builtin_scene("poles").unwrap();
        let cam = builtin_camera("poles", 48, 48).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        let single = PassConfig { threads: 1, seed: 21, ..Default::default() };
        let multi = PassConfig { threads: 4, seed: 21, ..Default::default() };
        let (ao_a, gi_a) = render_ao_gi(&gb, &single);
        let (ao_b, gi_b) = render_ao_gi(&gb, &multi);
        assert_eq!(ao_a.data(), ao_b.data());
        assert_eq!(gi_a.data(), gi_b.data());
    }
}
