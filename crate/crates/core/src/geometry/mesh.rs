use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::triangle::area_vector;
use super::{Aabb, GeometryError};
use crate::math::{Pose, Vec3};

/// Indexed triangle mesh with area-weighted per-vertex normals.
///
/// Construction drops zero-area triangles and unreferenced vertices, so every
/// vertex belongs to at least one triangle and carries a unit normal.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<Vec3>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !v.is_finite() {
                return Err(GeometryError::NonFiniteVertex(i));
            }
        }
        for (face, tri) in triangles.iter().enumerate() {
            for &idx in tri {
                if idx as usize >= n {
                    return Err(GeometryError::IndexOutOfRange {
                        face,
                        index: idx as usize,
                        vertex_count: n,
                    });
                }
            }
        }

        let kept: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| {
                let a = area_vector(
                    vertices[t[0] as usize],
                    vertices[t[1] as usize],
                    vertices[t[2] as usize],
                );
                a.norm() > 0.0 && t[0] != t[1] && t[1] != t[2] && t[0] != t[2]
            })
            .collect();
        if kept.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }

        // Compact away vertices no triangle references.
        let mut used = vec![false; n];
        for t in &kept {
            for &idx in t {
                used[idx as usize] = true;
            }
        }
        let mut remap = vec![u32::MAX; n];
        let mut compact = Vec::with_capacity(n);
        for (i, v) in vertices.iter().enumerate() {
            if used[i] {
                remap[i] = compact.len() as u32;
                compact.push(*v);
            }
        }
        let triangles: Vec<[u32; 3]> = kept
            .iter()
            .map(|t| [remap[t[0] as usize], remap[t[1] as usize], remap[t[2] as usize]])
            .collect();

        let normals = vertex_normals(&compact, &triangles);
        Ok(TriangleMesh {
            vertices: compact,
            triangles,
            normals,
        })
    }

    #[inline]
    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    #[inline]
    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    #[inline]
    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    #[inline]
    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    #[inline]
    pub fn corners(&self, tri: usize) -> [Vec3; 3] {
        let t = self.triangles[tri];
        [
            self.vertices[t[0] as usize],
            self.vertices[t[1] as usize],
            self.vertices[t[2] as usize],
        ]
    }

    pub fn face_normal(&self, tri: usize) -> Vec3 {
        let [a, b, c] = self.corners(tri);
        area_vector(a, b, c).normalize()
    }

    pub fn triangle_area(&self, tri: usize) -> f64 {
        let [a, b, c] = self.corners(tri);
        0.5 * area_vector(a, b, c).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    /// Signed enclosed volume; positive for closed meshes with outward winding.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|i| {
                let [a, b, c] = self.corners(i);
                a.dot(b.cross(c)) / 6.0
            })
            .sum()
    }

    pub fn bounds(&self) -> Aabb {
        self.vertices
            .iter()
            .fold(Aabb::EMPTY, |acc, &v| acc.grow_point(v))
    }

    /// Interpolated vertex normal at barycentric weights `w` on triangle `tri`.
    pub fn interpolated_normal(&self, tri: usize, w: [f64; 3]) -> Vec3 {
        let t = self.triangles[tri];
        let n = self.normals[t[0] as usize] * w[0]
            + self.normals[t[1] as usize] * w[1]
            + self.normals[t[2] as usize] * w[2];
        n.try_normalize().unwrap_or_else(|| self.face_normal(tri))
    }

    /// True when every undirected edge is shared by exactly two triangles
    /// that traverse it in opposite directions.
    pub fn is_watertight(&self) -> bool {
        let mut directed: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let e = (t[k], t[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
            }
        }
        directed
            .iter()
            .all(|(&(a, b), &count)| count == 1 && directed.get(&(b, a)) == Some(&1))
    }

    pub fn transformed(&self, pose: &Pose) -> TriangleMesh {
        if *pose == Pose::IDENTITY {
            return self.clone();
        }
        TriangleMesh {
            vertices: self.vertices.iter().map(|&v| pose.transform_point(v)).collect(),
            triangles: self.triangles.clone(),
            normals: self.normals.iter().map(|&n| pose.transform_vector(n)).collect(),
        }
    }
}

fn vertex_normals(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Vec<Vec3> {
    let mut acc = vec![Vec3::ZERO; vertices.len()];
    let mut fallback: Vec<Option<Vec3>> = vec![None; vertices.len()];
    for t in triangles {
        // Twice-area vector: its length weights the face by area.
        let n = area_vector(
            vertices[t[0] as usize],
            vertices[t[1] as usize],
            vertices[t[2] as usize],
        );
        for &i in t {
            acc[i as usize] += n;
            if fallback[i as usize].is_none() {
                fallback[i as usize] = n.try_normalize();
            }
        }
    }
    acc.iter()
        .zip(fallback)
        .map(|(n, f)| n.try_normalize().or(f).unwrap_or(Vec3::Z))
        .collect()
}
