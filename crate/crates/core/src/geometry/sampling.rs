use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{Bvh, SurfaceSample, TriangleMesh};
use crate::math::{asin, sqrt, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMode {
    /// Uniformly chosen mesh vertex with its vertex normal.
    Vertex,
    /// Uniform point on the surface with the face normal.
    AreaWeighted,
}

/// Surface sampler with a precomputed area table.
#[derive(Clone, Debug)]
pub struct SurfaceSampler<'a> {
    mesh: &'a TriangleMesh,
    cumulative: Vec<f64>,
}

impl<'a> SurfaceSampler<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Self {
        let mut acc = 0.0;
        let cumulative = (0..mesh.triangle_count())
            .map(|i| {
                acc += mesh.triangle_area(i);
                acc
            })
            .collect();
        SurfaceSampler { mesh, cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, mode: SampleMode) -> SurfaceSample {
        match mode {
            SampleMode::Vertex => {
                let i = rng.random_range(0..self.mesh.vertices().len());
                SurfaceSample {
                    point: self.mesh.vertices()[i],
                    normal: self.mesh.normals()[i],
                }
            }
            SampleMode::AreaWeighted => {
                let total = *self.cumulative.last().expect("non-empty mesh");
                let x = rng.random::<f64>() * total;
                let tri = self
                    .cumulative
                    .partition_point(|&c| c <= x)
                    .min(self.cumulative.len() - 1);
                let [a, b, c] = self.mesh.corners(tri);
                let (r1, r2): (f64, f64) = (rng.random(), rng.random());
                let s = sqrt(r1);
                let point = a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2);
                SurfaceSample {
                    point,
                    normal: self.mesh.face_normal(tri),
                }
            }
        }
    }
}

/// Draws one surface sample from a non-empty mesh.
pub fn sample_surface<R: Rng + ?Sized>(mesh: &TriangleMesh, rng: &mut R, mode: SampleMode) -> SurfaceSample {
    SurfaceSampler::new(mesh).sample(rng, mode)
}

/// Touch-candidate filter parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptParams {
    /// Minimum elevation of the normal above the table plane, degrees.
    pub min_angle_deg: f64,
    /// Length of the approach corridor along the normal, meters.
    pub corridor_length: f64,
    /// Radius of the probe-ray circle around the corridor axis, meters.
    pub corridor_radius: f64,
    pub table_normal: Vec3,
}

impl Default for AcceptParams {
    fn default() -> Self {
        AcceptParams {
            min_angle_deg: 33.0,
            corridor_length: 0.12,
            corridor_radius: 0.015,
            table_normal: Vec3::Z,
        }
    }
}

/// Probes stop this far short of the tangent plane at the sample.
const CORRIDOR_CLEARANCE: f64 = 1e-3;

/// Accepts a touch candidate whose normal is steep enough relative to the
/// table and whose approach corridor is free.
///
/// The corridor is probed by nine rays parallel to the normal (the axis plus
/// eight on a circle of `corridor_radius`) cast from `corridor_length` out
/// back toward the surface; any hit before reaching within 1 mm of the
/// sample's tangent plane rejects the sample.
pub fn accept_sample(sample: &SurfaceSample, bvh: &Bvh, params: &AcceptParams) -> bool {
    let n = sample.normal;
    let elevation = asin(n.dot(params.table_normal).clamp(-1.0, 1.0)).to_degrees();
    if elevation < params.min_angle_deg {
        return false;
    }
    let a = n.any_orthogonal();
    let b = n.cross(a);
    let t_max = params.corridor_length - CORRIDOR_CLEARANCE;
    let base = sample.point + n * params.corridor_length;
    let mut offsets = [Vec3::ZERO; 9];
    for (k, o) in offsets.iter_mut().enumerate().skip(1) {
        let phi = core::f64::consts::TAU * (k - 1) as f64 / 8.0;
        *o = (a * crate::math::cos(phi) + b * crate::math::sin(phi)) * params.corridor_radius;
    }
    offsets
        .iter()
        .all(|&o| bvh.raycast(base + o, -n, t_max).is_none())
}
