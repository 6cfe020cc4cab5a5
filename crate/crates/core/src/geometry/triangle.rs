//! Per-triangle queries shared by the BVH and by callers that scan meshes directly.

use crate::math::Vec3;

/// Slack on the barycentric bounds of the ray/triangle test.
pub const BARYCENTRIC_EPS: f64 = 1e-9;

/// Hits closer than this along the ray are ignored (self-intersection guard).
pub const T_MIN: f64 = 1e-9;

/// Möller–Trumbore ray/triangle intersection.
///
/// Returns `(t, u, v)` with `t ∈ (T_MIN, t_max]` where the hit point is
/// `a + u·(b − a) + v·(c − a)`.
#[inline]
pub fn ray_triangle(
    origin: Vec3,
    dir: Vec3,
    t_max: f64,
    a: Vec3,
    b: Vec3,
    c: Vec3,
) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(e2);
    let det = e1.dot(p);
    // Relative parallel test: |det| is |e1||e2| times the sine of the ray/plane angle.
    if det.abs() <= 1e-12 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - a;
    let u = s.dot(p) * inv;
    if !(-BARYCENTRIC_EPS..=1.0 + BARYCENTRIC_EPS).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = dir.dot(q) * inv;
    if v < -BARYCENTRIC_EPS || u + v > 1.0 + BARYCENTRIC_EPS {
        return None;
    }
    let t = e2.dot(q) * inv;
    if t <= T_MIN || t > t_max {
        return None;
    }
    Some((t, u, v))
}

/// Closest point on triangle `abc` to `p` by Voronoi-region classification.
/// Returns the point and its barycentric weights
/// `(wa, wb, wc)`.
pub fn closest_point_on_triangle(p: Vec3, a: Vec3, b: Vec3, c: Vec3) -> (Vec3, [f64; 3]) {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(ap);
    let d2 = ac.dot(ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return (a, [1.0, 0.0, 0.0]);
    }

    let bp = p - b;
    let d3 = ab.dot(bp);
    let d4 = ac.dot(bp);
    if d3 >= 0.0 && d4 <= d3 {
        return (b, [0.0, 1.0, 0.0]);
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (a + ab * v, [1.0 - v, v, 0.0]);
    }

    let cp = p - c;
    let d5 = ab.dot(cp);
    let d6 = ac.dot(cp);
    if d6 >= 0.0 && d5 <= d6 {
        return (c, [0.0, 0.0, 1.0]);
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (a + ac * w, [1.0 - w, 0.0, w]);
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (b + (c - b) * w, [0.0, 1.0 - w, w]);
    }

    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (a + ab * v + ac * w, [1.0 - v - w, v, w])
}

/// Twice-area vector `(b − a) × (c − a)`.
#[inline]
pub fn area_vector(a: Vec3, b: Vec3, c: Vec3) -> Vec3 {
    (b - a).cross(c - a)
}
