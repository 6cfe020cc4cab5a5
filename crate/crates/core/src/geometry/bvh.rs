//! Median-split bounding volume hierarchy over a triangle mesh.

use alloc::vec;
use alloc::vec::Vec;

use super::triangle::{closest_point_on_triangle, ray_triangle, BARYCENTRIC_EPS};
use super::{Aabb, ClosestPoint, GeometryError, Hit, RayCaster, TriangleMesh};
use crate::math::{log2, Vec3};

/// Maximum number of triangles stored in a leaf.
pub const LEAF_SIZE: usize = 8;

/// Nodes whose entry lies within this distance past the current best are
/// still visited, so equal-distance ties across nodes resolve by triangle id
/// despite rounding in the slab test, meters.
const PRUNE_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    /// Leaf: first slot in `order`. Inner: index of the left child (right is `left + 1`).
    start: u32,
    /// Leaf: triangle count. Inner: 0.
    count: u32,
}

impl Node {
    #[inline]
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Bounding volume hierarchy owning the mesh it indexes.
///
/// Immutable after construction, so shared references can be queried from
/// any number of threads.
#[derive(Clone, Debug)]
pub struct Bvh {
    mesh: TriangleMesh,
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    /// Builds the tree by splitting at the centroid median along the longest
    /// axis of the centroid bounds until at most [`LEAF_SIZE`] triangles remain.
    pub fn build(mesh: TriangleMesh) -> Result<Bvh, GeometryError> {
        let n = mesh.triangle_count();
        if n == 0 {
            return Err(GeometryError::EmptyMesh);
        }
        let centroids: Vec<Vec3> = (0..n)
            .map(|i| {
                let [a, b, c] = mesh.corners(i);
                (a + b + c) / 3.0
            })
            .collect();
        let boxes: Vec<Aabb> = (0..n)
            .map(|i| {
                let [a, b, c] = mesh.corners(i);
                // Covers hits the triangle test accepts within its barycentric slack.
                let pad = 2.0 * BARYCENTRIC_EPS * ((b - a).norm() + (c - a).norm());
                let p = Vec3::new(pad, pad, pad);
                let tight = Aabb::EMPTY.grow_point(a).grow_point(b).grow_point(c);
                Aabb {
                    min: tight.min - p,
                    max: tight.max + p,
                }
            })
            .collect();

        let mut order: Vec<u32> = (0..n as u32).collect();
        let mut nodes = vec![Node {
            bounds: Aabb::EMPTY,
            start: 0,
            count: 0,
        }];
        // (node index, range start, range end)
        let mut work = vec![(0usize, 0usize, n)];
        while let Some((node, lo, hi)) = work.pop() {
            let slice = &mut order[lo..hi];
            let bounds = slice
                .iter()
                .fold(Aabb::EMPTY, |acc, &t| acc.union(&boxes[t as usize]));
            nodes[node].bounds = bounds;
            if hi - lo <= LEAF_SIZE {
                nodes[node].start = lo as u32;
                nodes[node].count = (hi - lo) as u32;
                continue;
            }
            let cbounds = slice
                .iter()
                .fold(Aabb::EMPTY, |acc, &t| acc.grow_point(centroids[t as usize]));
            let axis = cbounds.longest_axis();
            let mid = (hi - lo) / 2;
            slice.select_nth_unstable_by(mid, |&a, &b| {
                centroids[a as usize]
                    .axis(axis)
                    .total_cmp(&centroids[b as usize].axis(axis))
                    .then(a.cmp(&b))
            });
            let left = nodes.len();
            nodes.push(Node {
                bounds: Aabb::EMPTY,
                start: 0,
                count: 0,
            });
            nodes.push(Node {
                bounds: Aabb::EMPTY,
                start: 0,
                count: 0,
            });
            nodes[node].start = left as u32;
            nodes[node].count = 0;
            work.push((left + 1, lo + mid, hi));
            work.push((left, lo, lo + mid));
        }
        Ok(Bvh { mesh, nodes, order })
    }

    #[inline]
    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn into_mesh(self) -> TriangleMesh {
        self.mesh
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Number of levels from the root to the deepest leaf (a single leaf has depth 1).
    pub fn depth(&self) -> usize {
        let mut best = 0;
        let mut stack = vec![(0usize, 1usize)];
        while let Some((i, d)) = stack.pop() {
            let n = &self.nodes[i];
            if n.is_leaf() {
                best = best.max(d);
            } else {
                stack.push((n.start as usize, d + 1));
                stack.push((n.start as usize + 1, d + 1));
            }
        }
        best
    }

    /// Upper bound on [`Bvh::depth`] for a median-split tree over `n` triangles.
    pub fn depth_bound(n: usize) -> usize {
        if n <= LEAF_SIZE {
            1
        } else {
            (2.0 * log2(n as f64 / LEAF_SIZE as f64)) as usize + 2
        }
    }

    /// Triangle ids per leaf, in tree order.
    pub fn leaves(&self) -> Vec<Vec<u32>> {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| self.order[n.start as usize..(n.start + n.count) as usize].to_vec())
            .collect()
    }

    /// Checks that every node box contains its children's boxes and every leaf
    /// box contains its triangles.
    pub fn check_invariants(&self) -> bool {
        self.nodes.iter().all(|n| {
            if n.is_leaf() {
                self.order[n.start as usize..(n.start + n.count) as usize]
                    .iter()
                    .all(|&t| self.mesh.corners(t as usize).iter().all(|&p| n.bounds.contains(p)))
            } else {
                let l = &self.nodes[n.start as usize];
                let r = &self.nodes[n.start as usize + 1];
                n.bounds.contains_box(&l.bounds) && n.bounds.contains_box(&r.bounds)
            }
        })
    }

    /// Nearest intersection along the ray with `t ∈ (1e-9, t_max]`.
    ///
    /// Equal `t` values are resolved to the lowest triangle id, so results do
    /// not depend on traversal order.
    pub fn raycast(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut best: Option<(f64, u32, f64, f64)> = None;
        let mut limit = t_max;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        self.nodes[0].bounds.ray_entry(origin, inv, limit)?;
        stack.push(0);
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            match node.bounds.ray_entry(origin, inv, limit + PRUNE_SLACK) {
                Some(_) => {}
                None => continue,
            }
            if node.is_leaf() {
                for &t in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let [a, b, c] = self.mesh.corners(t as usize);
                    if let Some((th, u, v)) = ray_triangle(origin, dir, limit, a, b, c) {
                        let better = match best {
                            None => true,
                            Some((bt, bid, _, _)) => th < bt || (th == bt && t < bid),
                        };
                        if better {
                            best = Some((th, t, u, v));
                            limit = th;
                        }
                    }
                }
            } else {
                let l = node.start as usize;
                let r = l + 1;
                let tl = self.nodes[l].bounds.ray_entry(origin, inv, limit + PRUNE_SLACK);
                let tr = self.nodes[r].bounds.ray_entry(origin, inv, limit + PRUNE_SLACK);
                match (tl, tr) {
                    (Some(a), Some(b)) => {
                        // Visit the nearer child first.
                        if a <= b {
                            stack.push(r);
                            stack.push(l);
                        } else {
                            stack.push(l);
                            stack.push(r);
                        }
                    }
                    (Some(_), None) => stack.push(l),
                    (None, Some(_)) => stack.push(r),
                    (None, None) => {}
                }
            }
        }
        best.map(|(t, tri, u, v)| {
            let w = [1.0 - u - v, u, v];
            Hit {
                t,
                point: origin + dir * t,
                normal: self.mesh.interpolated_normal(tri as usize, w),
                triangle: tri,
            }
        })
    }

    /// Exact unsigned distance from `p` to the mesh surface and the closest point.
    pub fn closest_point(&self, p: Vec3) -> ClosestPoint {
        let mut best_d2 = f64::INFINITY;
        let mut best: Option<(Vec3, u32, [f64; 3])> = None;
        let mut stack: Vec<(usize, f64)> = Vec::with_capacity(64);
        stack.push((0, self.nodes[0].bounds.distance_squared(p)));
        while let Some((i, d2)) = stack.pop() {
            if d2 > best_d2 + PRUNE_SLACK * PRUNE_SLACK {
                continue;
            }
            let node = &self.nodes[i];
            if node.is_leaf() {
                for &t in &self.order[node.start as usize..(node.start + node.count) as usize] {
                    let [a, b, c] = self.mesh.corners(t as usize);
                    let (q, w) = closest_point_on_triangle(p, a, b, c);
                    let dq = (q - p).norm_squared();
                    let better = match best {
                        None => true,
                        Some((_, bid, _)) => dq < best_d2 || (dq == best_d2 && t < bid),
                    };
                    if better {
                        best_d2 = dq;
                        best = Some((q, t, w));
                    }
                }
            } else {
                let l = node.start as usize;
                let r = l + 1;
                let dl = self.nodes[l].bounds.distance_squared(p);
                let dr = self.nodes[r].bounds.distance_squared(p);
                if dl <= dr {
                    stack.push((r, dr));
                    stack.push((l, dl));
                } else {
                    stack.push((l, dl));
                    stack.push((r, dr));
                }
            }
        }
        let (point, tri, w) = best.expect("non-empty mesh");
        ClosestPoint {
            distance: crate::math::sqrt(best_d2),
            point,
            normal: self.mesh.interpolated_normal(tri as usize, w),
            triangle: tri,
        }
    }

    /// `(distance, closest point)` from `p` to the surface.
    pub fn min_distance(&self, p: Vec3) -> (f64, Vec3) {
        let c = self.closest_point(p);
        (c.distance, c.point)
    }
}

impl RayCaster for Bvh {
    fn cast_ray(&self, origin: Vec3, dir: Vec3, t_max: f64) -> Option<Hit> {
        self.raycast(origin, dir, t_max)
    }
}
