//! Meshes, poses, ray casting, surface sampling and distance queries.

mod analytic;
mod bvh;
mod mesh;
mod obj;
mod primitives;
mod sampling;
pub mod triangle;

use core::fmt;

use serde::{Deserialize, Serialize};

pub use analytic::{AnalyticPlane, AnalyticSphere};
pub use bvh::{Bvh, LEAF_SIZE};
pub use mesh::TriangleMesh;
pub use obj::{parse_obj, ObjError};
pub use primitives::{make_primitive, PrimitiveSpec};
pub use sampling::{accept_sample, sample_surface, AcceptParams, SampleMode, SurfaceSampler};

use crate::math::{Pose, Vec3};

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryError {
    EmptyMesh,
    NonFiniteVertex(usize),
    IndexOutOfRange {
        face: usize,
        index: usize,
        vertex_count: usize,
    },
    NonPositiveDimension(&'static str),
    TooFewSides(u32),
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::EmptyMesh => write!(f, "mesh has no non-degenerate triangles"),
            GeometryError::NonFiniteVertex(i) => write!(f, "vertex {i} has a non-finite coordinate"),
            GeometryError::IndexOutOfRange {
                face,
                index,
                vertex_count,
            } => write!(
                f,
                "face {face} references vertex {index} but only {vertex_count} vertices exist"
            ),
            GeometryError::NonPositiveDimension(name) => {
                write!(f, "dimension `{name}` must be positive")
            }
            GeometryError::TooFewSides(k) => write!(f, "need at least 3 sides, got {k}"),
        }
    }
}

impl core::error::Error for GeometryError {}

/// Axis-aligned bounding box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub const EMPTY: Aabb = Aabb {
        min: Vec3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
        max: Vec3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
    };

    #[inline]
    pub fn grow_point(self, p: Vec3) -> Aabb {
        Aabb {
            min: self.min.min(p),
            max: self.max.max(p),
        }
    }

    #[inline]
    pub fn union(self, o: &Aabb) -> Aabb {
        Aabb {
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3 {
        (self.min + self.max) * 0.5
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        p.x >= self.min.x
            && p.y >= self.min.y
            && p.z >= self.min.z
            && p.x <= self.max.x
            && p.y <= self.max.y
            && p.z <= self.max.z
    }

    pub fn contains_box(&self, o: &Aabb) -> bool {
        self.contains(o.min) && self.contains(o.max)
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_squared(&self, p: Vec3) -> f64 {
        let d = (self.min - p).max(p - self.max).max(Vec3::ZERO);
        d.norm_squared()
    }

    /// Slab test: entry parameter of the ray into the box if it enters before `t_max`.
    #[inline]
    pub fn ray_entry(&self, origin: Vec3, inv_dir: Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            if inv_dir[k].is_infinite() {
                // Ray parallel to this slab: inside it everywhere or nowhere.
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        if t0 <= t1 {
            Some(t0)
        } else {
            None
        }
    }
}

/// A ray/surface intersection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    /// Distance along the (unit) ray direction, meters.
    pub t: f64,
    pub point: Vec3,
    /// Interpolated vertex normal at the hit (unit).
    pub normal: Vec3,
    pub triangle: u32,
}

/// Result of a closest-point query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClosestPoint {
    pub distance: f64,
    pub point: Vec3,
    /// Interpolated vertex normal at the closest point (unit).
    pub normal: Vec3,
    pub triangle: u32,
}

/// Anything a ray can be cast against: meshes through their BVH, or the
/// analytic shapes used for closed-form checks of the renderer.
pub trait RayCaster {
    fn cast_ray(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit>;
}

impl<T: RayCaster + ?Sized> RayCaster for &T {
    fn cast_ray(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        (**self).cast_ray(origin, dir, t_max)
    }
}

/// A point on a surface with its outward unit normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSample {
    pub point: Vec3,
    pub normal: Vec3,
}

/// Rigid transformation of geometric entities. Normals are rotated only.
pub trait Transform {
    fn transformed(&self, pose: &Pose) -> Self;
}

impl Transform for Vec3 {
    fn transformed(&self, pose: &Pose) -> Self {
        if *pose == Pose::IDENTITY {
            return *self;
        }
        pose.transform_point(*self)
    }
}

impl Transform for SurfaceSample {
    fn transformed(&self, pose: &Pose) -> Self {
        if *pose == Pose::IDENTITY {
            return *self;
        }
        SurfaceSample {
            point: pose.transform_point(self.point),
            normal: pose.transform_vector(self.normal),
        }
    }
}

impl Transform for TriangleMesh {
    fn transformed(&self, pose: &Pose) -> Self {
        TriangleMesh::transformed(self, pose)
    }
}

/// Applies `pose` to any transformable entity.
pub fn transform<T: Transform>(entity: &T, pose: &Pose) -> T {
    entity.transformed(pose)
}
