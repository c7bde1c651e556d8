//! Flat key=value manifest written by `synth` next to the G-buffer PFMs.
//!
//! The manifest pins everything `render` and `compare --reference` need to
//! rebuild the scene and camera exactly: floats are written with Rust's
//! shortest round-trip formatting, and the camera is reconstructed through
//! the same `builtin_camera` call that produced it, so a synth/render round
//! trip is byte-exact. Unknown keys are ignored on read.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use vbgi::buffers::CameraModel;
use vbgi::passes::AmbientEnvironment;
use vbgi::scenegen::{builtin_camera, builtin_scene, thin_wall_scene, AnalyticScene};
use vbgi::math::{vec3, Vec3};

#[derive(Clone, Debug)]
pub struct Manifest {
    pub scene: String,
    pub width: u32,
    pub height: u32,
    pub vfov: f32,
    pub near: f32,
    pub far: f32,
    pub seed: u64,
    pub env: AmbientEnvironment,
    /// Only recorded for the thin_wall scene.
    pub wall_thickness: Option<f32>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scene={}", self.scene);
        let _ = writeln!(out, "width={}", self.width);
        let _ = writeln!(out, "height={}", self.height);
        let _ = writeln!(out, "vfov={}", self.vfov);
        let _ = writeln!(out, "near={}", self.near);
        let _ = writeln!(out, "far={}", self.far);
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "env={}", format_env(&self.env));
        if let Some(t) = self.wall_thickness {
            let _ = writeln!(out, "wall_thickness={t}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Manifest, String> {
        let mut map = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("manifest line {}: expected key=value", i + 1))?;
            map.insert(key.trim().to_string(), value.trim().to_string());
        }
        let get = |key: &str| {
            map.get(key).cloned().ok_or_else(|| format!("manifest is missing key {key}"))
        };
        let num = |key: &str, v: String| format!("manifest key {key}: bad number {v:?}");
        let scene = get("scene")?;
        let width = get("width")?.parse().map_err(|_| num("width", get("width").unwrap()))?;
        let height = get("height")?.parse().map_err(|_| num("height", get("height").unwrap()))?;
        let vfov = get("vfov")?.parse().map_err(|_| num("vfov", get("vfov").unwrap()))?;
        let near = get("near")?.parse().map_err(|_| num("near", get("near").unwrap()))?;
        let far = get("far")?.parse().map_err(|_| num("far", get("far").unwrap()))?;
        let seed = get("seed")?.parse().map_err(|_| num("seed", get("seed").unwrap()))?;
        let env = parse_env(&get("env")?)?;
        let wall_thickness = match map.get("wall_thickness") {
            Some(v) => {
                Some(v.parse().map_err(|_| num("wall_thickness", v.clone()))?)
            }
            None => None,
        };
        Ok(Manifest { scene, width, height, vfov, near, far, seed, env, wall_thickness })
    }

    pub fn build_scene(&self) -> Result<AnalyticScene, String> {
        match self.wall_thickness {
            Some(t) if self.scene == "thin_wall" => Ok(thin_wall_scene(t)),
            Some(_) => Err("wall_thickness only applies to the thin_wall scene".into()),
            None => builtin_scene(&self.scene).map_err(|e| e.to_string()),
        }
    }

    /// Rebuilds the synth camera, then applies the recorded projection
    /// parameters on top so the manifest stays authoritative.
    pub fn build_camera(&self) -> Result<CameraModel, String> {
        let mut cam =
            builtin_camera(&self.scene, self.width, self.height).map_err(|e| e.to_string())?;
        cam.vertical_fov = self.vfov;
        cam.near = self.near;
        cam.far = self.far;
        Ok(cam)
    }
}

pub fn format_env(env: &AmbientEnvironment) -> String {
    let v = |v: Vec3| format!("{},{},{}", v.x, v.y, v.z);
    match *env {
        AmbientEnvironment::Constant(c) => format!("constant:{}", v(c)),
        AmbientEnvironment::VerticalGradient { top, horizon } => {
            format!("vertical:{},{}", v(top), v(horizon))
        }
        AmbientEnvironment::HorizontalGradient { east, west } => {
            format!("horizontal:{},{}", v(east), v(west))
        }
    }
}

/// `constant:r,g,b`, `vertical:tr,tg,tb,hr,hg,hb` (alias `gradient:`), or
/// `horizontal:er,eg,eb,wr,wg,wb`.
pub fn parse_env(s: &str) -> Result<AmbientEnvironment, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("bad env {s:?}: expected kind:components"))?;
    let comps: Vec<f32> = rest
        .split(',')
        .map(|c| {
            let x: f32 = c
                .trim()
                .parse()
                .map_err(|_| format!("bad env component {c:?} in {s:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("bad env component {c:?} in {s:?}"))
            }
        })
        .collect::<Result<_, String>>()?;
    let want = |n: usize| {
        if comps.len() == n {
            Ok(())
        } else {
            Err(format!("env kind {kind:?} takes {n} components, got {}", comps.len()))
        }
    };
    match kind {
        "constant" => {
            want(3)?;
            Ok(AmbientEnvironment::Constant(vec3(comps[0], comps[1], comps[2])))
        }
        "vertical" | "gradient" => {
            want(6)?;
            Ok(AmbientEnvironment::VerticalGradient {
                top: vec3(comps[0], comps[1], comps[2]),
                horizon: vec3(comps[3], comps[4], comps[5]),
            })
        }
        "horizontal" => {
            want(6)?;
            Ok(AmbientEnvironment::HorizontalGradient {
                east: vec3(comps[0], comps[1], comps[2]),
                west: vec3(comps[3], comps[4], comps[5]),
            })
        }
        other => Err(format!("unknown env kind {other:?}")),
    }
}
