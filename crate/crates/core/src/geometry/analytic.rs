use super::{Hit, RayCaster};
use crate::math::{sqrt, Vec3};

use super::triangle::T_MIN;

/// Exact sphere, used to check the depth renderer against closed-form depths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticSphere {
    pub center: Vec3,
    pub radius: f64,
}

impl RayCaster for AnalyticSphere {
    fn cast_ray(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        let oc = origin - self.center;
        let b = oc.dot(dir);
        let c = oc.norm_squared() - self.radius * self.radius;
        let disc = b * b - c;
        if disc < 0.0 {
            return None;
        }
        let s = sqrt(disc);
        let t = [-b - s, -b + s]
            .into_iter()
            .find(|&t| t > T_MIN && t <= t_max)?;
        let point = origin + dir * t;
        Some(Hit {
            t,
            point,
            normal: (point - self.center) / self.radius,
            triangle: 0,
        })
    }
}

/// Infinite plane through `point` with unit `normal`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticPlane {
    pub point: Vec3,
    pub normal: Vec3,
}

impl RayCaster for AnalyticPlane {
    fn cast_ray(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = self.normal.dot(self.point - origin) / denom;
        if t <= T_MIN || t > t_max {
            return None;
        }
        Some(Hit {
            t,
            point: origin + dir * t,
            normal: self.normal,
            triangle: 0,
        })
    }
}
