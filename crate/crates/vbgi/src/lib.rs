//! CPU renderer for screen-space ambient occlusion, directionally occluded
//! ambient light, and single-bounce indirect diffuse, all built on per-slice
//! visibility bitmasks. Ships with classic two-horizon and SSR baselines,
//! analytic test scenes, and brute-force oracles for validating the fast
//! paths.

pub mod math;

pub mod buffers;

pub mod bitmask;
pub mod slicemath;

pub mod scenegen;

pub mod parallel;

pub mod baselines;
pub mod oracle;
pub mod passes;
