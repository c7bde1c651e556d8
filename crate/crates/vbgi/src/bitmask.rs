//! Sector occupancy over one hemisphere slice.
//!
//! The half-turn [-pi/2, pi/2] around the projected normal is divided into
//! `sectors` equal sectors; bit k covers [-pi/2 + k*pi/N, -pi/2 + (k+1)*pi/N).
//! An occluder arc marks every sector at least half covered by it (ties count
//! as covered), so arcs merge with bitwise OR in O(1) regardless of count.

use std::f32::consts::{FRAC_PI_2, PI};

use smallvec::SmallVec;

/// Occupancy bit field. Sector counts up to 128 stay inline; the fine
/// reference configuration (4096) spills to the heap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisibilityBitmask {
    sectors: u32,
    words: SmallVec<[u64; 2]>,
}

/// Maps an angle (already recentered on the projected normal) to the
/// continuous sector coordinate in [0, sectors].
#[inline]
pub(crate) fn to_sector_coord(theta: f32, sectors: u32) -> f32 {
    (theta.clamp(-FRAC_PI_2, FRAC_PI_2) + FRAC_PI_2) * sectors as f32 / PI
}

/// Half-coverage test for one sector against an arc in sector coordinates.
/// Shared by the closed form and the brute-force reference so the two agree
/// bit for bit.
#[inline]
pub(crate) fn sector_covered(lo: f32, hi: f32, k: u32) -> bool {
    hi.min((k + 1) as f32) >= lo.max(k as f32) + 0.5
}

impl VisibilityBitmask {
    pub fn empty(sectors: u32) -> Self {
        assert!(sectors >= 1, "need at least one sector");
        let words = sectors.div_ceil(64) as usize;
        VisibilityBitmask { sectors, words: smallvec::smallvec![0; words] }
    }

    pub fn sectors(&self) -> u32 {
        self.sectors
    }

    pub fn count(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Unoccluded fraction, `1 - count / sectors`.
    pub fn visibility(&self) -> f32 {
        1.0 - self.count() as f32 / self.sectors as f32
    }

    pub fn is_set(&self, k: u32) -> bool {
        debug_assert!(k < self.sectors);
        self.words[(k / 64) as usize] >> (k % 64) & 1 == 1
    }

    pub fn set(&mut self, k: u32) {
        debug_assert!(k < self.sectors);
        self.words[(k / 64) as usize] |= 1u64 << (k % 64);
    }

    pub fn clear(&mut self) {
        self.words.fill(0);
    }

    /// Sets sectors [lo, hi).
    pub fn set_range(&mut self, lo: u32, hi: u32) {
        debug_assert!(lo <= hi && hi <= self.sectors);
        if lo >= hi {
            return;
        }
        for w in (lo / 64)..=((hi - 1) / 64) {
            let base = w * 64;
            let a = lo.max(base) - base;
            let b = hi.min(base + 64) - base;
            let mask = if b - a == 64 { !0u64 } else { ((1u64 << (b - a)) - 1) << a };
            self.words[w as usize] |= mask;
        }
    }

    pub fn or_with(&mut self, other: &VisibilityBitmask) {
        debug_assert_eq!(self.sectors, other.sectors);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    /// Bits set in `self` but not in `acc`.
    pub fn and_not_count(&self, acc: &VisibilityBitmask) -> u32 {
        debug_assert_eq!(self.sectors, acc.sectors);
        self.words
            .iter()
            .zip(&acc.words)
            .map(|(s, a)| (s & !a).count_ones())
            .sum()
    }

    /// Marks the sectors at least half covered by the arc
    /// [theta_min, theta_max] (angles recentered on the projected normal;
    /// anything outside the hemisphere is clamped away). The two boundary
    /// sectors get the explicit half-coverage test; everything between them
    /// is fully covered and set as one range.
    pub fn set_arc(&mut self, theta_min: f32, theta_max: f32) {
        let n = self.sectors;
        let lo = to_sector_coord(theta_min, n);
        let hi = to_sector_coord(theta_max, n);
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return; // empty arc
        }
        let k_lo = (lo.floor() as i64).clamp(0, n as i64 - 1) as u32;
        let k_hi = (hi.floor() as i64).clamp(0, n as i64 - 1) as u32;
        if k_lo == k_hi {
            if sector_covered(lo, hi, k_lo) {
                self.set(k_lo);
            }
            return;
        }
        let a = if sector_covered(lo, hi, k_lo) { k_lo } else { k_lo + 1 };
        let b = if sector_covered(lo, hi, k_hi) { k_hi + 1 } else { k_hi };
        if b > a {
            self.set_range(a, b);
        }
    }
}

/// Bitmask with the arc's sectors set; see [`VisibilityBitmask::set_arc`].
pub fn sectors_from_arc(theta_min: f32, theta_max: f32, sectors: u32) -> VisibilityBitmask {
    let mut m = VisibilityBitmask::empty(sectors);
    m.set_arc(theta_min, theta_max);
    m
}

/// Bitwise OR of two masks.
pub fn merge(acc: &VisibilityBitmask, sample: &VisibilityBitmask) -> VisibilityBitmask {
    let mut out = acc.clone();
    out.or_with(sample);
    out
}

/// How many of `sample`'s sectors are not yet set in `acc`.
pub fn newly_unoccluded_count(sample: &VisibilityBitmask, acc: &VisibilityBitmask) -> u32 {
    sample.and_not_count(acc)
}
