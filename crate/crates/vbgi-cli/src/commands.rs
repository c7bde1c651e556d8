//! Subcommand bodies. Everything here is plumbing around the library: load
//! PFMs into a G-buffer, run the requested pass, write results, print
//! metrics or timings.

use std::fs;
use std::path::Path;
use std::time::Instant;

use vbgi::baselines::{render_bent_normal_ambient, render_gtao, render_ssr_gi, Falloff};
use vbgi::buffers::pfm::{load_pfm, save_pfm_rgb, save_pfm_scalar, PfmData};
use vbgi::buffers::png::{save_png_rgb, save_png_scalar, ToneMap};
use vbgi::buffers::{CameraModel, GBuffer, ImageBuf};
use vbgi::math::{vec3, Vec3};
use vbgi::oracle::{compare_rgb, compare_scalar, world_ao_reference, ImageMetrics};
use vbgi::passes::{render_ambient, render_ao_gi, PassConfig};
use vbgi::scenegen::{
    builtin_camera, builtin_scene, synthesize_gbuffer, thin_wall_scene, BUILTIN_SCENES,
    DEFAULT_WALL_THICKNESS,
};

use crate::manifest::{parse_env, Manifest};
use crate::{
    runtime, usage, BenchArgs, CliError, CompareArgs, Method, Mode, RenderArgs, SynthArgs,
};

const SECTOR_CHOICES: [u32; 5] = [8, 16, 32, 64, 128];

pub fn cmd_synth(args: &SynthArgs) -> Result<(), CliError> {
    if args.width == 0 || args.height == 0 {
        return Err(usage("--width and --height must be nonzero"));
    }
    let scene = match args.wall_thickness {
        Some(t) if args.scene == "thin_wall" => {
            if !(t > 0.0 && t.is_finite()) {
                return Err(usage(format!("--wall-thickness {t} must be positive")));
            }
            thin_wall_scene(t)
        }
        Some(_) => return Err(usage("--wall-thickness only applies to the thin_wall scene")),
        None => builtin_scene(&args.scene).map_err(|_| unknown_scene(&args.scene))?,
    };
    let camera = builtin_camera(&args.scene, args.width, args.height)
        .map_err(|_| unknown_scene(&args.scene))?;
    let gbuffer = synthesize_gbuffer(&scene, &camera);

    let manifest = Manifest {
        scene: args.scene.clone(),
        width: args.width,
        height: args.height,
        vfov: camera.vertical_fov,
        near: camera.near,
        far: camera.far,
        seed: args.seed,
        env: scene.ambient_env,
        wall_thickness: (args.scene == "thin_wall")
            .then(|| args.wall_thickness.unwrap_or(DEFAULT_WALL_THICKNESS)),
    };

    make_dir(&args.out)?;
    write_scalar_pfm(&gbuffer.depth, &args.out.join("depth.pfm"))?;
    write_rgb_pfm(&gbuffer.normal, &args.out.join("normal.pfm"))?;
    write_rgb_pfm(&gbuffer.light, &args.out.join("light.pfm"))?;
    write_rgb_pfm(&gbuffer.albedo, &args.out.join("albedo.pfm"))?;
    let man_path = args.out.join("manifest.txt");
    fs::write(&man_path, manifest.to_text())
        .map_err(|e| runtime(format!("write {}: {e}", man_path.display())))?;
    println!("wrote {}", man_path.display());
    Ok(())
}

pub fn cmd_render(args: &RenderArgs) -> Result<(), CliError> {
    if args.half_res != "off" {
        return Err(usage(
            "--half-res is reserved for a future half-resolution mode; only \"off\" is accepted",
        ));
    }
    if !SECTOR_CHOICES.contains(&args.sectors) {
        return Err(usage(format!(
            "--sectors {} is not supported; the mask layout allows 8, 16, 32, 64 or 128",
            args.sectors
        )));
    }
    if args.ssr_rays < 1 {
        return Err(usage("--ssr-rays must be at least 1"));
    }

    let manifest = load_manifest(&args.input)?;
    let camera = manifest.build_camera().map_err(usage)?;
    let gbuffer = load_gbuffer(&args.input, camera)?;
    let env = match &args.env {
        Some(s) => parse_env(s).map_err(usage)?,
        None => manifest.env,
    };
    let config = PassConfig {
        radius: args.radius,
        samples: args.samples,
        slices: args.slices,
        sectors: args.sectors,
        thickness: args.thickness,
        thickness_linear: args.thickness_linear,
        step_mode: args.steps.into(),
        seed: args.seed.unwrap_or(manifest.seed),
        frames: args.frames,
        threads: args.threads,
        ..PassConfig::default()
    };
    config.validate().map_err(|e| usage(e.to_string()))?;

    let mut ao = None;
    let mut gi = None;
    let mut ambient = None;
    let wants = |m: Mode| args.mode == m || args.mode == Mode::All;
    let refused = |of: &str| {
        usage(format!(
            "method {} only produces {of}; --mode {} has nothing to write",
            args.method, args.mode
        ))
    };
    match args.method {
        Method::Bitmask => {
            if wants(Mode::Ao) || wants(Mode::Gi) {
                let (a, g) = render_ao_gi(&gbuffer, &config);
                ao = wants(Mode::Ao).then_some(a);
                gi = wants(Mode::Gi).then_some(g);
            }
            if wants(Mode::Ambient) {
                ambient = Some(render_ambient(&gbuffer, &config, &env));
            }
        }
        Method::Gtao | Method::GtaoFalloff => {
            if !wants(Mode::Ao) {
                return Err(refused("ao"));
            }
            let falloff =
                if args.method == Method::Gtao { Falloff::None } else { Falloff::Linear };
            ao = Some(render_gtao(&gbuffer, &config, falloff));
        }
        Method::Bent => {
            if !wants(Mode::Ambient) {
                return Err(refused("ambient"));
            }
            ambient = Some(render_bent_normal_ambient(&gbuffer, &config, &env));
        }
        Method::Ssr => {
            if !wants(Mode::Gi) {
                return Err(refused("gi"));
            }
            gi = Some(render_ssr_gi(&gbuffer, &config, args.ssr_rays));
        }
    }

    make_dir(&args.out)?;
    if let Some(img) = &ao {
        write_scalar_pfm(img, &args.out.join("ao.pfm"))?;
        write_png(|p| save_png_scalar(img, p, ToneMap::ClampGamma22), &args.out.join("ao.png"))?;
    }
    if let Some(img) = &gi {
        write_rgb_pfm(img, &args.out.join("gi.pfm"))?;
        write_png(|p| save_png_rgb(img, p, ToneMap::ReinhardGamma22), &args.out.join("gi.png"))?;
    }
    if let Some(img) = &ambient {
        write_rgb_pfm(img, &args.out.join("ambient.pfm"))?;
        write_png(
            |p| save_png_rgb(img, p, ToneMap::ReinhardGamma22),
            &args.out.join("ambient.png"),
        )?;
    }
    // Carried along so `compare --reference` can rebuild the scene from a
    // render directory alone.
    fs::copy(args.input.join("manifest.txt"), args.out.join("manifest.txt"))
        .map_err(|e| runtime(format!("copy manifest: {e}")))?;
    Ok(())
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    match (&args.b, args.reference) {
        (Some(_), true) => {
            Err(usage("give either a second directory or --reference, not both"))
        }
        (Some(b), false) => compare_dirs(args, b),
        (None, true) => compare_reference(args),
        (None, false) => Err(usage("compare needs a second directory or --reference")),
    }
}

fn compare_dirs(args: &CompareArgs, b_dir: &Path) -> Result<(), CliError> {
    let mut compared = 0;
    for name in ["ao", "gi", "ambient"] {
        let pa = args.a.join(format!("{name}.pfm"));
        let pb = b_dir.join(format!("{name}.pfm"));
        if !(pa.exists() && pb.exists()) {
            continue;
        }
        match (read_pfm(&pa)?, read_pfm(&pb)?) {
            (PfmData::Scalar(ia), PfmData::Scalar(ib)) => {
                check_dims(name, ia.width(), ia.height(), ib.width(), ib.height())?;
                let mask = ImageBuf::new(ia.width(), ia.height(), 0.0f32);
                print_metrics(name, &compare_scalar(&ia, &ib, &mask));
                if let Some(dir) = &args.diff {
                    let mut d = ia.clone();
                    for (i, v) in d.data_mut().iter_mut().enumerate() {
                        *v = (*v - ib.data()[i]).abs();
                    }
                    make_dir(dir)?;
                    write_scalar_pfm(&d, &dir.join(format!("{name}_diff.pfm")))?;
                }
            }
            (PfmData::Rgb(ia), PfmData::Rgb(ib)) => {
                check_dims(name, ia.width(), ia.height(), ib.width(), ib.height())?;
                let mask = ImageBuf::new(ia.width(), ia.height(), 0.0f32);
                print_metrics(name, &compare_rgb(&ia, &ib, &mask));
                if let Some(dir) = &args.diff {
                    let mut d = ia.clone();
                    for (i, v) in d.data_mut().iter_mut().enumerate() {
                        let o = ib.data()[i];
                        *v = vec3((v.x - o.x).abs(), (v.y - o.y).abs(), (v.z - o.z).abs());
                    }
                    make_dir(dir)?;
                    write_rgb_pfm(&d, &dir.join(format!("{name}_diff.pfm")))?;
                }
            }
            _ => {
                return Err(runtime(format!(
                    "{name}.pfm: scalar/rgb layout differs between the two directories"
                )))
            }
        }
        compared += 1;
    }
    if compared == 0 {
        return Err(runtime("no ao/gi/ambient PFM present in both directories"));
    }
    Ok(())
}

/// Ray-casts the manifest's scene for ground truth and reports how far the
/// directory's ao.pfm sits from it. Sky pixels are excluded.
fn compare_reference(args: &CompareArgs) -> Result<(), CliError> {
    if args.rays < 1 {
        return Err(usage("--rays must be at least 1"));
    }
    if !(args.radius > 0.0 && args.radius.is_finite()) {
        return Err(usage(format!("--radius {} must be positive", args.radius)));
    }
    let manifest = load_manifest(&args.a)?;
    let scene = manifest.build_scene().map_err(usage)?;
    let camera = manifest.build_camera().map_err(usage)?;
    let ao = read_pfm(&args.a.join("ao.pfm"))?
        .into_scalar()
        .ok_or_else(|| runtime("ao.pfm holds rgb data, expected scalar"))?;
    check_dims("ao", ao.width(), ao.height(), camera.width, camera.height)?;
    let reference =
        world_ao_reference(&scene, &camera, args.rays, args.radius, args.seed, args.threads);
    let depth = synthesize_gbuffer(&scene, &camera).depth;
    print_metrics("ao vs reference", &compare_scalar(&ao, &reference, &depth));
    if let Some(dir) = &args.diff {
        let mut d = ao.clone();
        for (i, v) in d.data_mut().iter_mut().enumerate() {
            *v = if depth.data()[i].is_finite() {
                (*v - reference.data()[i]).abs()
            } else {
                0.0
            };
        }
        make_dir(dir)?;
        write_scalar_pfm(&d, &dir.join("ao_diff.pfm"))?;
    }
    Ok(())
}

pub fn cmd_bench(args: &BenchArgs) -> Result<(), CliError> {
    if args.repeat < 1 {
        return Err(usage("--repeat must be at least 1"));
    }
    if args.size == 0 {
        return Err(usage("--size must be nonzero"));
    }
    let scene = builtin_scene(&args.scene).map_err(|_| unknown_scene(&args.scene))?;
    let camera = builtin_camera(&args.scene, args.size, args.size)
        .map_err(|_| unknown_scene(&args.scene))?;
    let gbuffer = synthesize_gbuffer(&scene, &camera);

    let time_one = |radius: f32, samples: u32| {
        let config =
            PassConfig { radius, samples, threads: args.threads, ..PassConfig::default() };
        let mut best = f64::INFINITY;
        for _ in 0..args.repeat {
            let start = Instant::now();
            let out = render_ao_gi(&gbuffer, &config);
            std::hint::black_box(&out);
            best = best.min(start.elapsed().as_secs_f64());
        }
        best
    };

    println!(
        "scene {} at {}x{}, best of {} run(s) per row; timings are machine-relative",
        args.scene, args.size, args.size, args.repeat
    );
    println!("{:>8} {:>8} {:>10} {:>7}", "radius", "samples", "ms", "ratio");
    let grid = [(0.8f32, 8u32), (1.0, 12), (1.0, 16), (2.0, 16), (3.0, 16)];
    let mut first = None;
    for (radius, samples) in grid {
        let t = time_one(radius, samples);
        let base = *first.get_or_insert(t);
        println!("{:>8.2} {:>8} {:>10.2} {:>7.2}", radius, samples, t * 1e3, t / base);
    }
    let t8 = time_one(2.0, 8);
    let t32 = time_one(2.0, 32);
    println!("step scaling at radius 2: samples 32 takes {:.2}x the time of samples 8", t32 / t8);
    Ok(())
}

fn unknown_scene(name: &str) -> CliError {
    usage(format!("unknown scene {name:?}; builtin scenes: {}", BUILTIN_SCENES.join(", ")))
}

fn load_manifest(dir: &Path) -> Result<Manifest, CliError> {
    let path = dir.join("manifest.txt");
    let text =
        fs::read_to_string(&path).map_err(|e| runtime(format!("read {}: {e}", path.display())))?;
    Manifest::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_gbuffer(dir: &Path, camera: CameraModel) -> Result<GBuffer, CliError> {
    let scalar = |name: &str| {
        read_pfm(&dir.join(name))?
            .into_scalar()
            .ok_or_else(|| runtime(format!("{name} holds rgb data, expected scalar")))
    };
    let rgb = |name: &str| {
        read_pfm(&dir.join(name))?
            .into_rgb()
            .ok_or_else(|| runtime(format!("{name} holds scalar data, expected rgb")))
    };
    let gbuffer = GBuffer {
        depth: scalar("depth.pfm")?,
        normal: rgb("normal.pfm")?,
        light: rgb("light.pfm")?,
        albedo: rgb("albedo.pfm")?,
        camera,
    };
    gbuffer.validate().map_err(|e| runtime(format!("loaded G-buffer is invalid: {e}")))?;
    Ok(gbuffer)
}

fn read_pfm(path: &Path) -> Result<PfmData, CliError> {
    load_pfm(path).map_err(|e| runtime(format!("read {}: {e}", path.display())))
}

fn make_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| runtime(format!("create {}: {e}", dir.display())))
}

fn write_scalar_pfm(img: &ImageBuf<f32>, path: &Path) -> Result<(), CliError> {
    save_pfm_scalar(img, path).map_err(|e| runtime(format!("write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_rgb_pfm(img: &ImageBuf<Vec3>, path: &Path) -> Result<(), CliError> {
    save_pfm_rgb(img, path).map_err(|e| runtime(format!("write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn write_png<E: std::fmt::Display>(
    save: impl Fn(&Path) -> Result<(), E>,
    path: &Path,
) -> Result<(), CliError> {
    save(path).map_err(|e| runtime(format!("write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn check_dims(name: &str, aw: u32, ah: u32, bw: u32, bh: u32) -> Result<(), CliError> {
    if (aw, ah) != (bw, bh) {
        return Err(runtime(format!("{name}: size mismatch, {aw}x{ah} vs {bw}x{bh}")));
    }
    Ok(())
}

fn print_metrics(name: &str, m: &ImageMetrics) {
    println!(
        "{name}: rmse {:.6} mean_abs {:.6} max_abs {:.6} pixels {}",
        m.rmse, m.mean_abs, m.max_abs, m.pixels
    );
}
