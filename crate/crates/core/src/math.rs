//! Small fixed-size linear algebra: 3-vectors, 3×3 rotations and rigid poses.

use core::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn sin(x: f64) -> f64 {
    libm::sin(x)
}

#[inline]
pub fn cos(x: f64) -> f64 {
    libm::cos(x)
}

#[inline]
pub fn tan(x: f64) -> f64 {
    libm::tan(x)
}

#[inline]
pub fn asin(x: f64) -> f64 {
    libm::asin(x)
}

#[inline]
pub fn acos(x: f64) -> f64 {
    libm::acos(x)
}

#[inline]
pub fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

#[inline]
pub fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub fn powi(x: f64, n: u64) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn cbrt(x: f64) -> f64 {
    libm::cbrt(x)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

/// A point or direction in 3-D. Geometry is expressed in meters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        sqrt(self.norm_squared())
    }

    /// Unit vector in the same direction, or `None` for a (near) zero vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 1e-300 && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn normalize(self) -> Vec3 {
        self.try_normalize().unwrap_or(Vec3::ZERO)
    }

    #[inline]
    pub fn min(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    #[inline]
    pub fn max(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    #[inline]
    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }

    /// Component along axis 0, 1 or 2.
    #[inline]
    pub fn axis(self, i: usize) -> f64 {
        self[i]
    }

    /// Any unit vector orthogonal to `self` (which must be non-zero).
    pub fn any_orthogonal(self) -> Vec3 {
        let helper = if self.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        self.cross(helper).normalize()
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    #[inline]
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        Vec3::new(self.x / s, self.y / s, self.z / s)
    }
}

/// Row-major 3×3 matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mat3 {
    pub rows: [[f64; 3]; 3],
}

impl Default for Mat3 {
    fn default() -> Self {
        Mat3::IDENTITY
    }
}

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3 {
        rows: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    /// Matrix whose columns are `a`, `b`, `c`.
    pub fn from_columns(a: Vec3, b: Vec3, c: Vec3) -> Mat3 {
        Mat3 {
            rows: [[a.x, b.x, c.x], [a.y, b.y, c.y], [a.z, b.z, c.z]],
        }
    }

    #[inline]
    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(self.rows[0][j], self.rows[1][j], self.rows[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let r = &self.rows;
        Mat3 {
            rows: [
                [r[0][0], r[1][0], r[2][0]],
                [r[0][1], r[1][1], r[2][1]],
                [r[0][2], r[1][2], r[2][2]],
            ],
        }
    }

    pub fn determinant(&self) -> f64 {
        let c0 = self.column(0);
        let c1 = self.column(1);
        let c2 = self.column(2);
        c0.dot(c1.cross(c2))
    }

    /// Rotation of `angle` radians about the unit axis `axis` (Rodrigues).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Mat3 {
        let k = axis.normalize();
        let (s, c) = (sin(angle), cos(angle));
        let t = 1.0 - c;
        Mat3 {
            rows: [
                [t * k.x * k.x + c, t * k.x * k.y - s * k.z, t * k.x * k.z + s * k.y],
                [t * k.x * k.y + s * k.z, t * k.y * k.y + c, t * k.y * k.z - s * k.x],
                [t * k.x * k.z - s * k.y, t * k.y * k.z + s * k.x, t * k.z * k.z + c],
            ],
        }
    }

    /// Rotation of the quaternion `(w, x, y, z)`, normalized first.
    pub fn from_quaternion(w: f64, x: f64, y: f64, z: f64) -> Mat3 {
        let n = sqrt(w * w + x * x + y * y + z * z);
        let (w, x, y, z) = (w / n, x / n, y / n, z / n);
        Mat3 {
            rows: [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ],
        }
    }

    pub fn rot_x(angle: f64) -> Mat3 {
        Mat3::from_axis_angle(Vec3::X, angle)
    }

    pub fn rot_y(angle: f64) -> Mat3 {
        Mat3::from_axis_angle(Vec3::Y, angle)
    }

    pub fn rot_z(angle: f64) -> Mat3 {
        Mat3::from_axis_angle(Vec3::Z, angle)
    }

    /// Largest absolute entry of `RᵀR − I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let p = self.transpose() * *self;
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let id = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((p.rows[i][j] - id).abs());
            }
        }
        worst
    }

    /// Gram–Schmidt on the columns; the result is a proper rotation.
    pub fn orthonormalized(&self) -> Mat3 {
        let a = self.column(0).normalize();
        let b = (self.column(1) - a * a.dot(self.column(1))).normalize();
        let c = a.cross(b);
        Mat3::from_columns(a, b, c)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut rows = [[0.0; 3]; 3];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.rows[i][0] * o.rows[0][j]
                    + self.rows[i][1] * o.rows[1][j]
                    + self.rows[i][2] * o.rows[2][j];
            }
        }
        Mat3 { rows }
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        let r = &self.rows;
        Vec3::new(
            r[0][0] * v.x + r[0][1] * v.y + r[0][2] * v.z,
            r[1][0] * v.x + r[1][1] * v.y + r[1][2] * v.z,
            r[2][0] * v.x + r[2][1] * v.y + r[2][2] * v.z,
        )
    }
}

/// Orthonormality defect above which composed rotations are re-orthonormalized.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Rigid transform `p ↦ R·p + t`, an element of SE(3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub rotation: Mat3,
    pub translation: Vec3,
}

impl Default for Pose {
    fn default() -> Self {
        Pose::IDENTITY
    }
}

impl Pose {
    pub const IDENTITY: Pose = Pose {
        rotation: Mat3::IDENTITY,
        translation: Vec3::ZERO,
    };

    /// Builds a pose, re-orthonormalizing the rotation if it drifted.
    pub fn new(rotation: Mat3, translation: Vec3) -> Pose {
        let rotation = if rotation.orthonormality_defect() > ORTHONORMAL_TOLERANCE {
            rotation.orthonormalized()
        } else {
            rotation
        };
        Pose {
            rotation,
            translation,
        }
    }

    pub fn from_translation(t: Vec3) -> Pose {
        Pose {
            rotation: Mat3::IDENTITY,
            translation: t,
        }
    }

    pub fn from_rotation(r: Mat3) -> Pose {
        Pose::new(r, Vec3::ZERO)
    }

    /// Frame whose z-axis is `z_axis` and whose x-axis is the projection of
    /// `x_hint` onto the plane orthogonal to it (falls back to +y, then any
    /// orthogonal direction when the projection degenerates).
    pub fn from_z_axis(origin: Vec3, z_axis: Vec3, x_hint: Vec3) -> Pose {
        let z = z_axis.normalize();
        let project = |h: Vec3| {
            let p = h - z * z.dot(h);
            if p.norm() > 1e-6 {
                Some(p.normalize())
            } else {
                None
            }
        };
        let x = project(x_hint)
            .or_else(|| project(Vec3::Y))
            .unwrap_or_else(|| z.any_orthogonal());
        let y = z.cross(x);
        Pose {
            rotation: Mat3::from_columns(x, y, z),
            translation: origin,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.rotation.orthonormality_defect() <= ORTHONORMAL_TOLERANCE
            && (self.rotation.determinant() - 1.0).abs() <= ORTHONORMAL_TOLERANCE
            && self.translation.is_finite()
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        Pose::new(
            self.rotation * other.rotation,
            self.rotation * other.translation + self.translation,
        )
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3) -> Vec3 {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn transform_vector(&self, v: Vec3) -> Vec3 {
        self.rotation * v
    }

    #[inline]
    pub fn x_axis(&self) -> Vec3 {
        self.rotation.column(0)
    }

    #[inline]
    pub fn y_axis(&self) -> Vec3 {
        self.rotation.column(1)
    }

    #[inline]
    pub fn z_axis(&self) -> Vec3 {
        self.rotation.column(2)
    }
}

impl Mul for Pose {
    type Output = Pose;
    fn mul(self, o: Pose) -> Pose {
        self.compose(&o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let p = Pose::from_rotation(Mat3::rot_z(FRAC_PI_2));
        let v = p.transform_point(Vec3::X);
        assert!((v - Vec3::Y).norm() < 1e-12);
    }

    #[test]
    fn quaternion_matches_axis_angle() {
        let (a, axis) = (0.9, Vec3::new(0.3, -0.5, 0.8).normalize());
        let (s, c) = (sin(a / 2.0), cos(a / 2.0));
        let q = Mat3::from_quaternion(2.0 * c, 2.0 * s * axis.x, 2.0 * s * axis.y, 2.0 * s * axis.z);
        let r = Mat3::from_axis_angle(axis, a);
        for i in 0..3 {
            for j in 0..3 {
                assert!((q.rows[i][j] - r.rows[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let p = Pose::new(
            Mat3::from_axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7),
            Vec3::new(0.1, -0.2, 0.3),
        );
        let q = Vec3::new(0.4, 0.5, -0.6);
        let back = p.inverse().transform_point(p.transform_point(q));
        assert!((back - q).norm() < 1e-12);
        assert!(p.compose(&p.inverse()).rotation.orthonormality_defect() < 1e-12);
    }

    #[test]
    fn drift_is_bounded_over_long_chains() {
        let step = Pose::new(
            Mat3::from_axis_angle(Vec3::new(0.3, -0.5, 0.8), 0.01234),
            Vec3::new(1e-3, 0.0, -2e-3),
        );
        let mut acc = Pose::IDENTITY;
        for _ in 0..1000 {
            acc = acc.compose(&step);
        }
        assert!(acc.is_valid());
    }

    #[test]
    fn frame_from_z_axis_uses_x_hint() {
        let f = Pose::from_z_axis(Vec3::ZERO, Vec3::Z, Vec3::X);
        assert!((f.x_axis() - Vec3::X).norm() < 1e-15);
        assert!((f.y_axis() - Vec3::Y).norm() < 1e-15);
        // Degenerate hint falls back to +y.
        let g = Pose::from_z_axis(Vec3::ZERO, Vec3::X, Vec3::X);
        assert!((g.x_axis() - Vec3::Y).norm() < 1e-15);
        assert!(g.is_valid());
    }
}
