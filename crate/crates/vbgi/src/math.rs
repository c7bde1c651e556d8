//! Minimal 3-vector / 3x3 matrix math used throughout the renderer.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3 {
    pub x: f32,
    pub y: f32,
    pub z: f32,
}

pub const fn vec3(x: f32, y: f32, z: f32) -> Vec3 {
    Vec3 { x, y, z }
}

impl Vec3 {
    pub const ZERO: Vec3 = vec3(0.0, 0.0, 0.0);
    pub const ONE: Vec3 = vec3(1.0, 1.0, 1.0);

    pub fn splat(v: f32) -> Vec3 {
        vec3(v, v, v)
    }

    pub fn dot(self, rhs: Vec3) -> f32 {
        self.x * rhs.x + self.y * rhs.y + self.z * rhs.z
    }

    pub fn cross(self, rhs: Vec3) -> Vec3 {
        vec3(
            self.y * rhs.z - self.z * rhs.y,
            self.z * rhs.x - self.x * rhs.z,
            self.x * rhs.y - self.y * rhs.x,
        )
    }

    pub fn length_squared(self) -> f32 {
        self.dot(self)
    }

    pub fn length(self) -> f32 {
        self.length_squared().sqrt()
    }

    pub fn normalized(self) -> Vec3 {
        self / self.length()
    }

    /// Normalize, or return `None` when the vector is too short to give a
    /// meaningful direction.
    pub fn try_normalized(self, min_len: f32) -> Option<Vec3> {
        let len = self.length();
        if len > min_len {
            Some(self / len)
        } else {
            None
        }
    }

    pub fn min_component(self) -> f32 {
        self.x.min(self.y).min(self.z)
    }

    pub fn max_component(self) -> f32 {
        self.x.max(self.y).max(self.z)
    }

    /// Component-wise product (used for albedo * radiance).
    pub fn mul_elem(self, rhs: Vec3) -> Vec3 {
        vec3(self.x * rhs.x, self.y * rhs.y, self.z * rhs.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn lerp(self, rhs: Vec3, t: f32) -> Vec3 {
        self + (rhs - self) * t
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        vec3(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        vec3(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f32> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f32) -> Vec3 {
        vec3(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl MulAssign<f32> for Vec3 {
    fn mul_assign(&mut self, rhs: f32) {
        *self = *self * rhs;
    }
}

impl Mul<Vec3> for f32 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

impl Div<f32> for Vec3 {
    type Output = Vec3;
    fn div(self, rhs: f32) -> Vec3 {
        vec3(self.x / rhs, self.y / rhs, self.z / rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        vec3(-self.x, -self.y, -self.z)
    }
}

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3 {
    pub rows: [Vec3; 3],
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [vec3(1.0, 0.0, 0.0), vec3(0.0, 1.0, 0.0), vec3(0.0, 0.0, 1.0)],
    };

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Mat3 {
        Mat3 { rows: [r0, r1, r2] }
    }

    pub fn mul_vec(&self, v: Vec3) -> Vec3 {
        vec3(self.rows[0].dot(v), self.rows[1].dot(v), self.rows[2].dot(v))
    }

    pub fn transposed(&self) -> Mat3 {
        let [a, b, c] = self.rows;
        Mat3::from_rows(vec3(a.x, b.x, c.x), vec3(a.y, b.y, c.y), vec3(a.z, b.z, c.z))
    }

    /// Rotation about +Z by `angle` radians (counter-clockwise looking down -Z).
    pub fn rotation_z(angle: f32) -> Mat3 {
        let (s, c) = angle.sin_cos();
        Mat3::from_rows(vec3(c, -s, 0.0), vec3(s, c, 0.0), vec3(0.0, 0.0, 1.0))
    }
}

/// Rigid world-to-view transform: `view = rotation * world + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Right-handed look-at: the camera sits at `eye` looking toward `target`,
    /// with view space looking down -Z and +Y up.
    pub fn look_at(eye: Vec3, target: Vec3, up: Vec3) -> RigidTransform {
        let forward = (target - eye).normalized();
        let right = forward.cross(up).normalized();
        let true_up = right.cross(forward);
        // View basis rows: right, up, -forward.
        let rotation = Mat3::from_rows(right, true_up, -forward);
        let translation = -rotation.mul_vec(eye);
        RigidTransform { rotation, translation }
    }

    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn transform_dir(&self, d: Vec3) -> Vec3 {
        self.rotation.mul_vec(d)
    }

    /// Inverse direction transform (view to world).
    pub fn inverse_dir(&self, d: Vec3) -> Vec3 {
        self.rotation.transposed().mul_vec(d)
    }

    pub fn inverse_point(&self, p: Vec3) -> Vec3 {
        self.rotation.transposed().mul_vec(p - self.translation)
    }

    /// Camera position in world space.
    pub fn eye(&self) -> Vec3 {
        self.inverse_point(Vec3::ZERO)
    }
}

/// Deterministic orthonormal basis around `n` (unit). Returns two tangents.
pub fn orthonormal_basis(n: Vec3) -> (Vec3, Vec3) {
    // Branchless construction due to Duff et al.
    let sign = if n.z >= 0.0 { 1.0 } else { -1.0 };
    let a = -1.0 / (sign + n.z);
    let b = n.x * n.y * a;
    let t = vec3(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
    let bt = vec3(b, sign + n.y * n.y * a, -n.y);
    (t, bt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn look_at_maps_target_onto_negative_z() {
        let xf = RigidTransform::look_at(vec3(1.0, 2.0, 3.0), vec3(1.0, 2.0, -4.0), vec3(0.0, 1.0, 0.0));
        let t = xf.transform_point(vec3(1.0, 2.0, -4.0));
        assert!(t.x.abs() < 1e-5 && t.y.abs() < 1e-5);
        assert!((t.z + 7.0).abs() < 1e-4);
        let eye = xf.eye();
        assert!((eye - vec3(1.0, 2.0, 3.0)).length() < 1e-5);
    }

    #[test]
    fn rigid_round_trip() {
        let xf = RigidTransform::look_at(vec3(2.0, 1.5, 4.0), vec3(0.0, 0.5, 0.0), vec3(0.0, 1.0, 0.0));
        let p = vec3(-0.3, 0.9, 2.7);
        let back = xf.inverse_point(xf.transform_point(p));
        assert!((back - p).length() < 1e-5);
        let d = vec3(0.6, -0.2, 0.4).normalized();
        let dd = xf.inverse_dir(xf.transform_dir(d));
        assert!((dd - d).length() < 1e-6);
    }

    #[test]
    fn basis_is_orthonormal() {
        for n in [
            vec3(0.0, 0.0, 1.0),
            vec3(0.0, 0.0, -1.0),
            vec3(1.0, 0.0, 0.0),
            vec3(0.3, -0.8, 0.52).normalized(),
        ] {
            let (t, b) = orthonormal_basis(n);
            assert!(t.dot(n).abs() < 1e-6);
            assert!(b.dot(n).abs() < 1e-6);
            assert!(t.dot(b).abs() < 1e-6);
            assert!((t.length() - 1.0).abs() < 1e-5);
            assert!((b.length() - 1.0).abs() < 1e-5);
        }
    }
}
