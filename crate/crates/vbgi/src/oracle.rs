//! Brute-force references and image metrics. The oracles re-derive their
//! answers with separate machinery (per-sector loops, world-space ray casts,
//! their own hash and basis) so they can catch bugs in the production paths.

use std::f32::consts::TAU;

use crate::bitmask::{sector_covered, to_sector_coord, VisibilityBitmask};
use crate::buffers::{CameraModel, ImageBuf};
use crate::math::{vec3, Vec3};
use crate::parallel::map_pixels;
use crate::passes::{render_ao_gi, PassConfig};
use crate::scenegen::{trace_ray, AnalyticScene};

/// Sector mask of one occluder arc by direct per-sector testing: sector k is
/// occluded when the arc covers at least half of it. Same definition as the
/// closed-form `sectors_from_arc`, evaluated the slow way.
pub fn sectors_bruteforce(theta_min: f32, theta_max: f32, sectors: u32) -> VisibilityBitmask {
    let mut mask = VisibilityBitmask::empty(sectors);
    if theta_max.is_nan() || theta_min.is_nan() || theta_max <= theta_min {
        return mask;
    }
    let lo = to_sector_coord(theta_min, sectors);
    let hi = to_sector_coord(theta_max, sectors);
    for k in 0..sectors {
        if sector_covered(lo, hi, k) {
            mask.set(k);
        }
    }
    mask
}

/// The bitmask pass at 4096 sectors: quantization-free for practical
/// purposes, used as the reference in sector-count convergence tests.
pub fn fine_slice_reference(gbuffer: &crate::buffers::GBuffer, config: &PassConfig) -> ImageBuf<f32> {
    let mut cfg = config.clone();
    cfg.sectors = 4096;
    cfg.ambient_subregions = 4;
    render_ao_gi(gbuffer, &cfg).0
}

// Murmur3's finalizer; deliberately a different mixer than the passes use.
fn fmix64(mut h: u64) -> u64 {
    h ^= h >> 33;
    h = h.wrapping_mul(0xff51_afd7_ed55_8ccd);
    h ^= h >> 33;
    h = h.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    h ^= h >> 33;
    h
}

fn oracle_hash01(seed: u64, px: u32, py: u32, ray: u32, axis: u32) -> f32 {
    let mut h = fmix64(seed ^ 0x5851_f42d_4c95_7f2d);
    h = fmix64(h ^ (((px as u64) << 32) | py as u64));
    h = fmix64(h ^ (((ray as u64) << 32) | axis as u64));
    (h >> 40) as f32 / (1u64 << 24) as f32
}

fn oracle_basis(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < n.y.abs() && n.x.abs() < n.z.abs() {
        vec3(1.0, 0.0, 0.0)
    } else if n.y.abs() < n.z.abs() {
        vec3(0.0, 1.0, 0.0)
    } else {
        vec3(0.0, 0.0, 1.0)
    };
    let t1 = n.cross(helper).normalized();
    let t2 = n.cross(t1);
    (t1, t2)
}

/// Ray-cast AO ground truth on an analytic scene: cosine-weighted hemisphere
/// rays from each primary hit (offset 1e-3 along the normal), occlusion
/// counted within `max_dist` only. Rays are stratified on a
/// floor(sqrt(rays_per_pixel))^2 grid with seed-jittered positions inside
/// each stratum. Sky pixels output 1.
pub fn world_ao_reference(
    scene: &AnalyticScene,
    camera: &CameraModel,
    rays_per_pixel: u32,
    max_dist: f32,
    seed: u64,
    threads: usize,
) -> ImageBuf<f32> {
    assert!(rays_per_pixel >= 1 && max_dist > 0.0);
    let strata = ((rays_per_pixel as f32).sqrt().floor() as u32).max(1);
    let eye = camera.eye_world();
    let results = map_pixels(camera.width, camera.height, threads, |x, y| {
        let dir = camera.pixel_ray_world(x, y);
        let Some(hit) = trace_ray(scene, eye, dir, camera.far) else {
            return 1.0;
        };
        let origin = eye + dir * hit.t + hit.normal * 1e-3;
        let (t1, t2) = oracle_basis(hit.normal);
        let mut open = 0u32;
        for i in 0..strata {
            for j in 0..strata {
                let ray = i * strata + j;
                let u1 = (i as f32 + oracle_hash01(seed, x, y, ray, 0)) / strata as f32;
                let u2 = (j as f32 + oracle_hash01(seed, x, y, ray, 1)) / strata as f32;
                let r = u1.sqrt();
                let (sin_a, cos_a) = (TAU * u2).sin_cos();
                let d = t1 * (r * cos_a) + t2 * (r * sin_a) + hit.normal * (1.0 - u1).sqrt();
                if trace_ray(scene, origin, d, max_dist).is_none() {
                    open += 1;
                }
            }
        }
        open as f32 / (strata * strata) as f32
    });
    ImageBuf::from_vec(camera.width, camera.height, results)
}

/// Masked error summary between two images; only pixels with finite depth
/// (non-sky) participate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageMetrics {
    pub rmse: f32,
    pub mean_abs: f32,
    pub max_abs: f32,
    pub pixels: u32,
}

fn finish(sq: f64, abs: f64, max: f64, n: u64) -> ImageMetrics {
    if n == 0 {
        return ImageMetrics { rmse: 0.0, mean_abs: 0.0, max_abs: 0.0, pixels: 0 };
    }
    ImageMetrics {
        rmse: (sq / n as f64).sqrt() as f32,
        mean_abs: (abs / n as f64) as f32,
        max_abs: max as f32,
        pixels: n as u32,
    }
}

pub fn compare_scalar(
    a: &ImageBuf<f32>,
    b: &ImageBuf<f32>,
    depth: &ImageBuf<f32>,
) -> ImageMetrics {
    assert_eq!(a.data().len(), b.data().len());
    assert_eq!(a.data().len(), depth.data().len());
    let (mut sq, mut abs, mut max, mut n) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    for ((&va, &vb), &d) in a.data().iter().zip(b.data()).zip(depth.data()) {
        if !d.is_finite() {
            continue;
        }
        let e = (va - vb).abs() as f64;
        sq += e * e;
        abs += e;
        max = max.max(e);
        n += 1;
    }
    finish(sq, abs, max, n)
}

/// RGB comparison pooled over channels (each channel of each masked pixel
/// counts once).
pub fn compare_rgb(a: &ImageBuf<Vec3>, b: &ImageBuf<Vec3>, depth: &ImageBuf<f32>) -> ImageMetrics {
    assert_eq!(a.data().len(), b.data().len());
    assert_eq!(a.data().len(), depth.data().len());
    let (mut sq, mut abs, mut max, mut n) = (0.0f64, 0.0f64, 0.0f64, 0u64);
    for ((va, vb), &d) in a.data().iter().zip(b.data()).zip(depth.data()) {
        if !d.is_finite() {
            continue;
        }
        for e in [va.x - vb.x, va.y - vb.y, va.z - vb.z] {
            let e = e.abs() as f64;
            sq += e * e;
            abs += e;
            max = max.max(e);
            n += 1;
        }
    }
    finish(sq, abs, max, n)
}

/// Mean over masked pixels of the unbiased per-pixel variance across an
/// ensemble of renders.
pub fn mean_pixel_variance(ensemble: &[ImageBuf<f32>], depth: &ImageBuf<f32>) -> f32 {
    assert!(ensemble.len() >= 2, "variance needs at least two members");
    let n = ensemble.len() as f64;
    let (mut total, mut count) = (0.0f64, 0u64);
    for (i, &d) in depth.data().iter().enumerate() {
        if !d.is_finite() {
            continue;
        }
        let mean: f64 = ensemble.iter().map(|img| img.data()[i] as f64).sum::<f64>() / n;
        let var: f64 = ensemble
            .iter()
            .map(|img| (img.data()[i] as f64 - mean).powi(2))
            .sum::<f64>()
            / (n - 1.0);
        total += var;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        (total / count as f64) as f32
    }
}

/// RGB ensemble variance, averaged over channels as well as pixels.
pub fn mean_pixel_variance_rgb(ensemble: &[ImageBuf<Vec3>], depth: &ImageBuf<f32>) -> f32 {
    assert!(ensemble.len() >= 2, "variance needs at least two members");
    let n = ensemble.len() as f64;
    let (mut total, mut count) = (0.0f64, 0u64);
    for (i, &d) in depth.data().iter().enumerate() {
        if !d.is_finite() {
            continue;
        }
        for c in 0..3 {
            let pick = |v: Vec3| match c {
                0 => v.x,
                1 => v.y,
                _ => v.z,
            } as f64;
            let mean: f64 = ensemble.iter().map(|img| pick(img.data()[i])).sum::<f64>() / n;
            let var: f64 =
                ensemble.iter().map(|img| (pick(img.data()[i]) - mean).powi(2)).sum::<f64>()
                    / (n - 1.0);
            total += var;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (total / count as f64) as f32
    }
}

/// Spatial variance of each channel over masked pixels of a single image.
pub fn channel_variance(img: &ImageBuf<Vec3>, depth: &ImageBuf<f32>) -> [f32; 3] {
    let mut sum = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    let mut n = 0u64;
    for (v, &d) in img.data().iter().zip(depth.data()) {
        if !d.is_finite() {
            continue;
        }
        for (c, val) in [v.x, v.y, v.z].into_iter().enumerate() {
            sum[c] += val as f64;
            sq[c] += (val as f64) * (val as f64);
        }
        n += 1;
    }
    if n < 2 {
        return [0.0; 3];
    }
    let mut out = [0.0f32; 3];
    for c in 0..3 {
        let mean = sum[c] / n as f64;
        out[c] = ((sq[c] / n as f64 - mean * mean).max(0.0)) as f32;
    }
    out
}
