//! Randomized invariants for the geometry, mask, and I/O layers.

use proptest::prelude::*;
use std::f32::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use vbgi::bitmask::{merge, sectors_from_arc, VisibilityBitmask};
use vbgi::buffers::pfm::{load_pfm, save_pfm_rgb, save_pfm_scalar};
use vbgi::buffers::{CameraModel, ImageBuf};
use vbgi::math::{vec3, Mat3, Vec3};
use vbgi::oracle::sectors_bruteforce;
use vbgi::slicemath::{sample_angles, stable_hash01, step_offsets, StepMode};

fn finite_f32() -> impl Strategy<Value = f32> {
    prop_oneof![
        -1e6f32..1e6f32,
        -1.0f32..1.0f32,
        Just(0.0f32),
        Just(-0.0f32),
        Just(f32::MIN_POSITIVE),
    ]
}

fn vec3_in(r: f32) -> impl Strategy<Value = Vec3> {
    (-r..r, -r..r, -r..r).prop_map(|(x, y, z)| vec3(x, y, z))
}

fn bits(mask: &VisibilityBitmask) -> Vec<bool> {
    (0..mask.sectors()).map(|k| mask.is_set(k)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pfm_scalar_roundtrip_is_bitwise(
        w in 1u32..24, h in 1u32..24,
        seed_vals in proptest::collection::vec(finite_f32(), 1..600),
    ) {
        let n = (w * h) as usize;
        let data: Vec<f32> = (0..n).map(|i| seed_vals[i % seed_vals.len()]).collect();
        let img = ImageBuf::from_vec(w, h, data);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pfm");
        save_pfm_scalar(&img, &path).unwrap();
        let back = load_pfm(&path).unwrap().into_scalar().unwrap();
        prop_assert_eq!(back.width(), w);
        prop_assert_eq!(back.height(), h);
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn pfm_rgb_roundtrip_is_bitwise(
        w in 1u32..16, h in 1u32..16,
        seed_vals in proptest::collection::vec(finite_f32(), 3..600),
    ) {
        let n = (w * h) as usize;
        let data: Vec<Vec3> = (0..n)
            .map(|i| {
                let j = (3 * i) % (seed_vals.len() - 2);
                vec3(seed_vals[j], seed_vals[j + 1], seed_vals[j + 2])
            })
            .collect();
        let img = ImageBuf::from_vec(w, h, data);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.pfm");
        save_pfm_rgb(&img, &path).unwrap();
        let back = load_pfm(&path).unwrap().into_rgb().unwrap();
        for (a, b) in img.data().iter().zip(back.data()) {
            prop_assert_eq!(a.x.to_bits(), b.x.to_bits());
            prop_assert_eq!(a.y.to_bits(), b.y.to_bits());
            prop_assert_eq!(a.z.to_bits(), b.z.to_bits());
        }
    }
}

proptest! {
    #[test]
    fn project_reconstruct_roundtrip(
        w in 8u32..512, h in 8u32..512,
        vfov in 0.3f32..2.2,
        sx01 in 0.01f32..0.99, sy01 in 0.01f32..0.99,
        depth in 0.1f32..50.0,
    ) {
        let cam = CameraModel::look_at(
            w, h, vfov, 0.05, 100.0,
            vec3(0.0, 0.0, 0.0), vec3(0.0, 0.0, -1.0), vec3(0.0, 1.0, 0.0),
        ).unwrap();
        let sx = sx01 * w as f32;
        let sy = sy01 * h as f32;
        let p = cam.reconstruct_at(sx, sy, depth).unwrap();
        let (rx, ry, rd) = cam.project_view(p).unwrap();
        prop_assert!((rx - sx).abs() < 1e-2 * w as f32 / 256.0 + 1e-3);
        prop_assert!((ry - sy).abs() < 1e-2 * h as f32 / 256.0 + 1e-3);
        prop_assert!((rd - depth).abs() < 1e-4 * depth);
    }

    #[test]
    fn arc_bits_match_bruteforce(
        a in -2.0f32..2.0, b in -2.0f32..2.0,
        sectors in prop_oneof![Just(8u32), Just(32), Just(128)],
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let fast = sectors_from_arc(lo, hi, sectors);
        let slow = sectors_bruteforce(lo, hi, sectors);
        prop_assert_eq!(bits(&fast), bits(&slow));
    }

    #[test]
    fn arc_bits_match_bruteforce_at_exact_boundaries(
        ai in 0usize..5, bi in 0usize..5,
    ) {
        let grid = [-FRAC_PI_2, -FRAC_PI_4, 0.0, FRAC_PI_4, FRAC_PI_2];
        let (lo, hi) = (grid[ai].min(grid[bi]), grid[ai].max(grid[bi]));
        let fast = sectors_from_arc(lo, hi, 32);
        let slow = sectors_bruteforce(lo, hi, 32);
        prop_assert_eq!(bits(&fast), bits(&slow));
    }

    #[test]
    fn wider_arcs_cover_supersets(
        a in -1.6f32..1.6, b in -1.6f32..1.6,
        grow_lo in 0.0f32..0.8, grow_hi in 0.0f32..0.8,
        sectors in prop_oneof![Just(8u32), Just(32), Just(128)],
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let narrow = sectors_from_arc(lo, hi, sectors);
        let wide = sectors_from_arc(lo - grow_lo, hi + grow_hi, sectors);
        for k in 0..sectors {
            prop_assert!(!narrow.is_set(k) || wide.is_set(k));
        }
    }

    #[test]
    fn mirrored_arcs_mirror_bits(
        a in -1.6f32..1.6, b in -1.6f32..1.6,
        sectors in prop_oneof![Just(8u32), Just(32), Just(128)],
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let fwd = sectors_from_arc(lo, hi, sectors);
        let rev = sectors_from_arc(-hi, -lo, sectors);
        for k in 0..sectors {
            prop_assert_eq!(fwd.is_set(k), rev.is_set(sectors - 1 - k));
        }
    }

    #[test]
    fn mask_union_is_order_independent(
        arcs in proptest::collection::vec((-1.6f32..1.6, -1.6f32..1.6), 1..12),
    ) {
        let masks: Vec<_> = arcs
            .iter()
            .map(|&(a, b)| sectors_from_arc(a.min(b), a.max(b), 32))
            .collect();
        let mut fwd = VisibilityBitmask::empty(32);
        for m in &masks {
            fwd = merge(&fwd, m);
        }
        let mut rev = VisibilityBitmask::empty(32);
        for m in masks.iter().rev() {
            rev.or_with(m);
        }
        prop_assert_eq!(bits(&fwd), bits(&rev));
        prop_assert_eq!(fwd.count(), rev.count());
    }

    #[test]
    fn newly_occluded_counts_partition_the_union(
        arcs in proptest::collection::vec((-1.6f32..1.6, -1.6f32..1.6), 1..12),
    ) {
        let mut acc = VisibilityBitmask::empty(32);
        let mut newly_total = 0;
        for &(a, b) in &arcs {
            let m = sectors_from_arc(a.min(b), a.max(b), 32);
            newly_total += m.and_not_count(&acc);
            acc.or_with(&m);
        }
        prop_assert_eq!(newly_total, acc.count());
    }

    #[test]
    fn step_offsets_stay_ordered_and_inside_radius(
        r_px in 1.0f32..500.0,
        n_s in 1u32..64,
        jitter in 0.0f32..0.999,
        exponential in proptest::bool::ANY,
    ) {
        let mode = if exponential { StepMode::Exponential } else { StepMode::Constant };
        let offs = step_offsets(r_px, n_s, mode, jitter);
        prop_assert_eq!(offs.len(), n_s as usize);
        for pair in offs.windows(2) {
            prop_assert!(pair[0] < pair[1]);
        }
        for &o in offs.iter() {
            prop_assert!((0.0..r_px).contains(&o));
        }
    }

    #[test]
    fn hash_is_a_pure_function_into_unit_interval(
        seed in proptest::num::u64::ANY,
        px in 0u32..4096, py in 0u32..4096,
        frame in 0u32..512, stream in 0u32..64,
    ) {
        let a = stable_hash01(seed, px, py, frame, stream);
        let b = stable_hash01(seed, px, py, frame, stream);
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert!((0.0..1.0).contains(&a));
    }

    #[test]
    fn sample_angles_survive_camera_roll(
        p in vec3_in(4.0),
        s_f in vec3_in(4.0),
        alpha in -PI..PI,
        thickness in 0.01f32..2.0,
    ) {
        let p = p + vec3(0.0, 0.0, -6.0);
        let s_f = s_f + vec3(0.0, 0.0, -6.0);
        prop_assume!((s_f - p).length() > 1e-3);
        let view_axis = (-p).normalized();
        // Any unit vector orthogonal to the view axis spans a valid slice.
        let tangent = view_axis.cross(vec3(0.0, 1.0, 0.2)).normalized();
        let base = sample_angles(p, view_axis, tangent, s_f, thickness).unwrap();
        let rot = Mat3::rotation_z(alpha);
        let rolled = sample_angles(
            rot.mul_vec(p),
            rot.mul_vec(view_axis),
            rot.mul_vec(tangent),
            rot.mul_vec(s_f),
            thickness,
        )
        .unwrap();
        prop_assert!((base.0 - rolled.0).abs() < 2e-3);
        prop_assert!((base.1 - rolled.1).abs() < 2e-3);
    }

    #[test]
    fn back_angle_recedes_monotonically_with_thickness(
        p in vec3_in(4.0),
        s_f in vec3_in(4.0),
    ) {
        let p = p + vec3(0.0, 0.0, -6.0);
        let s_f = s_f + vec3(0.0, 0.0, -6.0);
        prop_assume!((s_f - p).length() > 1e-3);
        let view_axis = (-p).normalized();
        let tangent = view_axis.cross(vec3(0.0, 1.0, 0.2)).normalized();
        let side = (s_f - p).dot(tangent);
        prop_assume!(side.abs() > 1e-3);
        let mut prev = None;
        for t in [0.05f32, 0.2, 0.8, 3.2] {
            let (_, theta_b) = sample_angles(p, view_axis, tangent, s_f, t).unwrap();
            if let Some(prev) = prev {
                if side > 0.0 {
                    prop_assert!(theta_b >= prev - 1e-6);
                } else {
                    prop_assert!(theta_b <= prev + 1e-6);
                }
            }
            prev = Some(theta_b);
        }
    }
}
