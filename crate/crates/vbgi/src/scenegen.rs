//! Analytic test scenes: ray-cast primitives turned into G-buffers, plus the
//! ray queries the reference implementations build on.

use std::fmt;

use crate::buffers::{CameraModel, GBuffer, ImageBuf};
use crate::math::{vec3, Vec3};
use crate::passes::AmbientEnvironment;

#[derive(Clone, Debug)]
pub enum Primitive {
    Plane { point: Vec3, normal: Vec3, albedo: Vec3 },
    Sphere { center: Vec3, radius: f32, albedo: Vec3 },
    /// Axis-aligned box.
    Box { min: Vec3, max: Vec3, albedo: Vec3 },
}

/// One directional light. `direction` is the unit travel direction of the
/// light (pointing from the sun into the scene).
#[derive(Clone, Copy, Debug)]
pub struct Sun {
    pub direction: Vec3,
    pub radiance: Vec3,
}

#[derive(Clone, Debug)]
pub struct AnalyticScene {
    pub primitives: Vec<Primitive>,
    pub sun: Sun,
    pub ambient_env: AmbientEnvironment,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f32,
    pub normal: Vec3,
    pub albedo: Vec3,
}

const RAY_EPS: f32 = 1e-4;

fn hit_plane(point: Vec3, normal: Vec3, o: Vec3, d: Vec3, t_max: f32) -> Option<(f32, Vec3)> {
    let denom = normal.dot(d);
    if denom.abs() < 1e-9 {
        return None;
    }
    let t = (point - o).dot(normal) / denom;
    if t <= RAY_EPS || t >= t_max {
        return None;
    }
    // Face the ray origin.
    Some((t, if denom < 0.0 { normal } else { -normal }))
}

fn hit_sphere(center: Vec3, radius: f32, o: Vec3, d: Vec3, t_max: f32) -> Option<(f32, Vec3)> {
    let oc = o - center;
    let b = oc.dot(d);
    let c = oc.length_squared() - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let mut t = -b - sq;
    if t <= RAY_EPS {
        t = -b + sq;
    }
    if t <= RAY_EPS || t >= t_max {
        return None;
    }
    Some((t, (o + d * t - center) / radius))
}

fn hit_box(min: Vec3, max: Vec3, o: Vec3, d: Vec3, t_max: f32) -> Option<(f32, Vec3)> {
    let mut t_enter = f32::NEG_INFINITY;
    let mut t_exit = f32::INFINITY;
    let mut axis = 3usize; // entry axis
    let (mins, maxs, os, ds) = (
        [min.x, min.y, min.z],
        [max.x, max.y, max.z],
        [o.x, o.y, o.z],
        [d.x, d.y, d.z],
    );
    for i in 0..3 {
        if ds[i].abs() < 1e-12 {
            if os[i] < mins[i] || os[i] > maxs[i] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / ds[i];
        let (mut t0, mut t1) = ((mins[i] - os[i]) * inv, (maxs[i] - os[i]) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        if t0 > t_enter {
            t_enter = t0;
            axis = i;
        }
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    let mut normal = Vec3::ZERO;
    if t_enter > RAY_EPS && t_enter < t_max {
        match axis {
            0 => normal.x = -ds[0].signum(),
            1 => normal.y = -ds[1].signum(),
            _ => normal.z = -ds[2].signum(),
        }
        return Some((t_enter, normal));
    }
    // Origin inside the box: report the exit so occlusion queries still see it.
    if t_exit > RAY_EPS && t_exit < t_max {
        return Some((t_exit, -d.normalized()));
    }
    None
}

/// Nearest intersection along `o + t*d` with `t` in (1e-4, t_max).
pub fn trace_ray(scene: &AnalyticScene, o: Vec3, d: Vec3, t_max: f32) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for prim in &scene.primitives {
        let cand = match *prim {
            Primitive::Plane { point, normal, albedo } => {
                hit_plane(point, normal, o, d, t_max).map(|(t, n)| Hit { t, normal: n, albedo })
            }
            Primitive::Sphere { center, radius, albedo } => {
                hit_sphere(center, radius, o, d, t_max).map(|(t, n)| Hit { t, normal: n, albedo })
            }
            Primitive::Box { min, max, albedo } => {
                hit_box(min, max, o, d, t_max).map(|(t, n)| Hit { t, normal: n, albedo })
            }
        };
        if let Some(h) = cand {
            if best.is_none_or(|b| h.t < b.t) {
                best = Some(h);
            }
        }
    }
    best
}

/// True when something blocks the path toward the sun.
pub fn sun_occluded(scene: &AnalyticScene, point: Vec3, normal: Vec3) -> bool {
    let to_sun = -scene.sun.direction;
    trace_ray(scene, point + normal * 1e-3, to_sun, f32::INFINITY).is_some()
}

/// Ray-casts the scene into depth / normal / direct-light / albedo buffers.
/// One pixel-center ray per pixel, hard sun shadows, misses become sky
/// (+inf depth, zeroed attributes).
pub fn synthesize_gbuffer(scene: &AnalyticScene, camera: &CameraModel) -> GBuffer {
    let (w, h) = (camera.width, camera.height);
    let mut depth = ImageBuf::new(w, h, f32::INFINITY);
    let mut normal = ImageBuf::new(w, h, Vec3::ZERO);
    let mut light = ImageBuf::new(w, h, Vec3::ZERO);
    let mut albedo = ImageBuf::new(w, h, Vec3::ZERO);
    let eye = camera.eye_world();
    for y in 0..h {
        for x in 0..w {
            let dir = camera.pixel_ray_world(x, y);
            let Some(hit) = trace_ray(scene, eye, dir, camera.far) else {
                continue;
            };
            let pos = eye + dir * hit.t;
            let view_pos = camera.world_to_view.transform_point(pos);
            depth.set(x, y, -view_pos.z);
            normal.set(x, y, camera.world_to_view.transform_dir(hit.normal).normalized());
            albedo.set(x, y, hit.albedo);
            let to_sun = -scene.sun.direction;
            let incidence = hit.normal.dot(to_sun).max(0.0);
            if incidence > 0.0 && !sun_occluded(scene, pos, hit.normal) {
                light.set(x, y, hit.albedo.mul_elem(scene.sun.radiance) * incidence);
            }
        }
    }
    GBuffer { depth, normal, light, albedo, camera: camera.clone() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnknownSceneError(pub String);

impl fmt::Display for UnknownSceneError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown scene {:?} (expected one of {})", self.0, BUILTIN_SCENES.join(", "))
    }
}

impl std::error::Error for UnknownSceneError {}

pub const BUILTIN_SCENES: &[&str] =
    &["flat", "poles", "fence", "corner", "sphere_on_plane", "thin_wall"];

pub const DEFAULT_WALL_THICKNESS: f32 = 0.2;

fn gray(v: f32) -> Vec3 {
    Vec3::splat(v)
}

fn ground(albedo: Vec3) -> Primitive {
    Primitive::Plane { point: Vec3::ZERO, normal: vec3(0.0, 1.0, 0.0), albedo }
}

/// A thin elevated slab over a ground plane; `thickness` is the slab's depth
/// extent along z.
pub fn thin_wall_scene(thickness: f32) -> AnalyticScene {
    AnalyticScene {
        primitives: vec![
            ground(gray(0.6)),
            Primitive::Box {
                min: vec3(-1.0, 0.5, -0.5 * thickness),
                max: vec3(1.0, 1.1, 0.5 * thickness),
                albedo: vec3(0.65, 0.6, 0.55),
            },
        ],
        sun: Sun { direction: vec3(0.3, -1.0, 0.4).normalized(), radiance: vec3(2.6, 2.6, 2.4) },
        ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
    }
}

/// Fixed scene fixtures:
/// - `flat`: a lone ground plane.
/// - `poles`: ground plus five 0.1-unit-thick vertical posts in a row.
/// - `fence`: ground, a back wall, and seven thin vertical bars in front of it.
/// - `corner`: ground and two perpendicular walls, sun grazing one of them.
/// - `sphere_on_plane`: unit sphere resting on the ground.
/// - `thin_wall`: ground plus a thin elevated slab (default 0.2 thick).
pub fn builtin_scene(name: &str) -> Result<AnalyticScene, UnknownSceneError> {
    let scene = match name {
        "flat" => AnalyticScene {
            primitives: vec![ground(gray(0.7))],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: gray(3.0) },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        },
        "poles" => {
            let mut primitives = vec![ground(gray(0.55))];
            for i in 0..5 {
                let cx = -1.2 + 0.6 * i as f32;
                primitives.push(Primitive::Box {
                    min: vec3(cx - 0.05, 0.0, -0.05),
                    max: vec3(cx + 0.05, 1.2, 0.05),
                    albedo: vec3(0.7, 0.6, 0.5),
                });
            }
            AnalyticScene {
                primitives,
                sun: Sun {
                    direction: vec3(-0.4, -1.0, -0.3).normalized(),
                    radiance: vec3(2.5, 2.3, 2.0),
                },
                ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
            }
        }
        "fence" => {
            let mut primitives = vec![
                ground(gray(0.6)),
                Primitive::Box {
                    min: vec3(-2.0, 0.0, -0.7),
                    max: vec3(2.0, 1.5, -0.6),
                    albedo: vec3(0.75, 0.65, 0.55),
                },
            ];
            for i in 0..7 {
                let cx = -1.05 + 0.35 * i as f32;
                primitives.push(Primitive::Box {
                    min: vec3(cx - 0.03, 0.0, -0.015),
                    max: vec3(cx + 0.03, 1.1, 0.015),
                    albedo: vec3(0.35, 0.38, 0.42),
                });
            }
            AnalyticScene {
                primitives,
                sun: Sun {
                    direction: vec3(0.25, -0.9, -0.35).normalized(),
                    radiance: vec3(2.8, 2.7, 2.5),
                },
                ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
            }
        }
        "corner" => AnalyticScene {
            primitives: vec![
                ground(gray(0.5)),
                // Sunlit wall, inward face +x.
                Primitive::Box {
                    min: vec3(-0.9, 0.0, -2.5),
                    max: vec3(-0.8, 2.0, 1.5),
                    albedo: vec3(0.8, 0.45, 0.3),
                },
                // Shadowed wall, inward face +z.
                Primitive::Box {
                    min: vec3(-2.5, 0.0, -1.3),
                    max: vec3(1.5, 2.0, -1.2),
                    albedo: vec3(0.7, 0.7, 0.65),
                },
            ],
            sun: Sun {
                direction: -vec3(0.95, 0.31, -0.06).normalized(),
                radiance: vec3(3.2, 3.0, 2.6),
            },
            ambient_env: AmbientEnvironment::HorizontalGradient {
                east: vec3(1.0, 0.55, 0.25),
                west: vec3(0.25, 0.45, 1.0),
            },
        },
        "sphere_on_plane" => AnalyticScene {
            primitives: vec![
                ground(gray(0.65)),
                Primitive::Sphere {
                    center: vec3(0.0, 1.0, 0.0),
                    radius: 1.0,
                    albedo: vec3(0.75, 0.72, 0.7),
                },
            ],
            sun: Sun {
                direction: vec3(-0.35, -1.0, -0.25).normalized(),
                radiance: gray(2.8),
            },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        },
        "thin_wall" => thin_wall_scene(DEFAULT_WALL_THICKNESS),
        other => return Err(UnknownSceneError(other.to_string())),
    };
    Ok(scene)
}

/// Default viewpoint for each fixture at the requested resolution.
pub fn builtin_camera(name: &str, width: u32, height: u32) -> Result<CameraModel, UnknownSceneError> {
    let (eye, target) = match name {
        "flat" => (vec3(0.0, 2.0, -2.0), vec3(0.0, 0.0, 0.0)),
        "poles" => (vec3(0.0, 1.6, 2.8), vec3(0.0, 0.45, 0.0)),
        "fence" => (vec3(0.0, 1.3, 2.5), vec3(0.0, 0.6, -0.3)),
        "corner" => (vec3(1.4, 1.5, 1.2), vec3(-0.5, 0.7, -0.9)),
        "sphere_on_plane" => (vec3(0.0, 2.0, 4.0), vec3(0.0, 0.8, 0.0)),
        "thin_wall" => (vec3(0.0, 1.7, 2.2), vec3(0.0, 0.1, -0.5)),
        other => return Err(UnknownSceneError(other.to_string())),
    };
    Ok(CameraModel::look_at(
        width,
        height,
        std::f32::consts::FRAC_PI_3,
        0.05,
        100.0,
        eye,
        target,
        vec3(0.0, 1.0, 0.0),
    )
    .expect("fixture cameras are valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lone_plane() -> AnalyticScene {
        AnalyticScene {
            primitives: vec![ground(gray(0.5))],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        }
    }

    #[test]
    fn ray_down_hits_plane() {
        let s = lone_plane();
        let hit = trace_ray(&s, vec3(0.3, 1.0, 0.2), vec3(0.0, -1.0, 0.0), 100.0).unwrap();
        assert!((hit.t - 1.0).abs() < 1e-6);
        assert_eq!(hit.normal, vec3(0.0, 1.0, 0.0));
    }

    #[test]
    fn parallel_ray_misses_plane() {
        let s = lone_plane();
        assert!(trace_ray(&s, vec3(0.0, 1.0, 0.0), vec3(1.0, 0.0, 0.0), 100.0).is_none());
    }

    #[test]
    fn head_on_sphere_distance() {
        let s = AnalyticScene {
            primitives: vec![Primitive::Sphere {
                center: vec3(0.0, 0.0, -3.0),
                radius: 1.0,
                albedo: Vec3::ONE,
            }],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let hit = trace_ray(&s, Vec3::ZERO, vec3(0.0, 0.0, -1.0), 100.0).unwrap();
        assert!((hit.t - 2.0).abs() < 1e-6);
        assert!((hit.normal - vec3(0.0, 0.0, 1.0)).length() < 1e-6);
    }

    #[test]
    fn box_entry_normal_and_inside_origin() {
        let s = AnalyticScene {
            primitives: vec![Primitive::Box {
                min: vec3(-1.0, -1.0, -1.0),
                max: vec3(1.0, 1.0, 1.0),
                albedo: Vec3::ONE,
            }],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let hit = trace_ray(&s, vec3(-3.0, 0.2, 0.1), vec3(1.0, 0.0, 0.0), 100.0).unwrap();
        assert!((hit.t - 2.0).abs() < 1e-6);
        assert_eq!(hit.normal, vec3(-1.0, 0.0, 0.0));
        // From inside, the exit face still registers as an occluder.
        assert!(trace_ray(&s, Vec3::ZERO, vec3(0.0, 1.0, 0.0), 100.0).is_some());
    }

    #[test]
    fn empty_scene_synthesizes_sky() {
        let s = AnalyticScene {
            primitives: vec![],
            sun: Sun { direction: vec3(0.0, -1.0, 0.0), radiance: Vec3::ONE },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let cam = builtin_camera("flat", 16, 16).unwrap();
        let gb = synthesize_gbuffer(&s, &cam);
        assert!(gb.depth.data().iter().all(|d| d.is_infinite()));
        gb.validate().unwrap();
    }

    #[test]
    fn facing_plane_constant_depth_and_light() {
        // Plane z = 0 facing the camera along +z, sun head on.
        let s = AnalyticScene {
            primitives: vec![Primitive::Plane {
                point: Vec3::ZERO,
                normal: vec3(0.0, 0.0, 1.0),
                albedo: gray(0.5),
            }],
            sun: Sun { direction: vec3(0.0, 0.0, -1.0), radiance: vec3(2.0, 2.0, 2.0) },
            ambient_env: AmbientEnvironment::Constant(Vec3::ONE),
        };
        let cam = CameraModel::look_at(
            24,
            24,
            1.0,
            0.05,
            100.0,
            vec3(0.0, 0.0, 3.0),
            Vec3::ZERO,
            vec3(0.0, 1.0, 0.0),
        )
        .unwrap();
        let gb = synthesize_gbuffer(&s, &cam);
        gb.validate().unwrap();
        for (_, _, &d) in gb.depth.enumerate() {
            assert!((d - 3.0).abs() < 1e-4);
        }
        for (_, _, &l) in gb.light.enumerate() {
            assert!((l - gray(1.0)).length() < 1e-5);
        }
    }

    #[test]
    fn corner_gbuffer_matches_ray_queries() {
        let scene = builtin_scene("corner").unwrap();
        let cam = builtin_camera("corner", 96, 96).unwrap();
        let gb = synthesize_gbuffer(&scene, &cam);
        gb.validate().unwrap();

        let eye = cam.eye_world();
        let mut shadowed_wall_px = 0;
        let probes = (0..96u32)
            .step_by(8)
            .flat_map(|y| (0..96u32).step_by(8).map(move |x| (x, y)));
        for (x, y) in probes {
            let dir = cam.pixel_ray_world(x, y);
            match trace_ray(&scene, eye, dir, cam.far) {
                Some(hit) => {
                    let pos = eye + dir * hit.t;
                    let view = cam.world_to_view.transform_point(pos);
                    assert!((gb.depth.at(x, y) - -view.z).abs() < 1e-3);
                    let expect = if hit.normal.dot(-scene.sun.direction) <= 0.0
                        || sun_occluded(&scene, pos, hit.normal)
                    {
                        Vec3::ZERO
                    } else {
                        hit.albedo.mul_elem(scene.sun.radiance)
                            * hit.normal.dot(-scene.sun.direction)
                    };
                    assert!((gb.light.at(x, y) - expect).length() < 1e-4);
                    // The z-facing wall never sees the sun.
                    if hit.normal.dot(vec3(0.0, 0.0, 1.0)) > 0.99 {
                        assert_eq!(gb.light.at(x, y), Vec3::ZERO);
                        shadowed_wall_px += 1;
                    }
                }
                None => assert!(gb.is_sky(x, y)),
            }
        }
        assert!(shadowed_wall_px > 0, "probe pixels should include the shadowed wall");
    }

    #[test]
    fn fixture_inventory() {
        for name in BUILTIN_SCENES {
            let scene = builtin_scene(name).unwrap();
            assert!(!scene.primitives.is_empty());
            assert!((scene.sun.direction.length() - 1.0).abs() < 1e-5);
            builtin_camera(name, 64, 64).unwrap();
        }
        assert!(builtin_scene("nope").is_err());

        // flat: camera two units up looking 45 degrees down.
        let cam = builtin_camera("flat", 64, 64).unwrap();
        let eye = cam.eye_world();
        assert!((eye.y - 2.0).abs() < 1e-5);
        let fwd = cam.world_to_view.inverse_dir(vec3(0.0, 0.0, -1.0));
        assert!((fwd.dot(vec3(0.0, -1.0, 0.0)) - (0.5f32).sqrt()).abs() < 1e-4);

        // poles: five 0.1-thick posts.
        let poles = builtin_scene("poles").unwrap();
        let posts: Vec<_> = poles
            .primitives
            .iter()
            .filter_map(|p| match p {
                Primitive::Box { min, max, .. } => Some((max.x - min.x, max.z - min.z)),
                _ => None,
            })
            .collect();
        assert_eq!(posts.len(), 5);
        for (dx, dz) in posts {
            assert!((dx - 0.1).abs() < 1e-6 && (dz - 0.1).abs() < 1e-6);
        }

        // sphere_on_plane: unit sphere tangent to the ground.
        let sphere = builtin_scene("sphere_on_plane").unwrap();
        let Some(Primitive::Sphere { center, radius, .. }) = sphere
            .primitives
            .iter()
            .find(|p| matches!(p, Primitive::Sphere { .. }))
        else {
            panic!("sphere fixture missing its sphere");
        };
        assert_eq!(center.y - radius, 0.0);
    }
}
