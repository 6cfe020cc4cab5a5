//! Procedural watertight primitives: prisms, cylinders, cones and ellipsoids.
//!
//! All shapes are centered on the z axis with their base on the z = 0 plane.
//! Descriptor dimensions are millimeters; generated meshes are in meters.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{GeometryError, TriangleMesh};
use crate::math::{ceil, cos, sin, sqrt, Vec3};

const MM: f64 = 1e-3;

fn default_segments() -> u32 {
    32
}

/// Shape descriptor, serialized as a JSON object tagged by `kind`, e.g.
/// `{"kind":"cylinder","radius_mm":20,"height_mm":50,"segments":32}`.
///
/// The optional `resolution_mm` refines the tessellation so that no edge is
/// much longer than the given length; without it the minimal mesh is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    Box {
        size_x_mm: f64,
        size_y_mm: f64,
        size_z_mm: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    Cylinder {
        radius_mm: f64,
        height_mm: f64,
        #[serde(default = "default_segments")]
        segments: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    RegularPrism {
        sides: u32,
        /// Circumradius.
        radius_mm: f64,
        height_mm: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    StarPrism {
        points: u32,
        inner_radius_mm: f64,
        outer_radius_mm: f64,
        height_mm: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    /// Polar profile `r(θ) = mid + amp·cos(lobes·θ)` between the two radii.
    FlowerPrism {
        lobes: u32,
        inner_radius_mm: f64,
        outer_radius_mm: f64,
        height_mm: f64,
        #[serde(default = "default_segments")]
        segments: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    Sphere {
        radius_mm: f64,
        #[serde(default = "default_segments")]
        segments: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    CappedCone {
        bottom_radius_mm: f64,
        top_radius_mm: f64,
        height_mm: f64,
        #[serde(default = "default_segments")]
        segments: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
    Ellipsoid {
        radius_x_mm: f64,
        radius_y_mm: f64,
        radius_z_mm: f64,
        #[serde(default = "default_segments")]
        segments: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        resolution_mm: Option<f64>,
    },
}

impl PrimitiveSpec {
    /// Short human-readable name of the shape family.
    pub fn kind_name(&self) -> &'static str {
        match self {
            PrimitiveSpec::Box { .. } => "box",
            PrimitiveSpec::Cylinder { .. } => "cylinder",
            PrimitiveSpec::RegularPrism { .. } => "regular_prism",
            PrimitiveSpec::StarPrism { .. } => "star_prism",
            PrimitiveSpec::FlowerPrism { .. } => "flower_prism",
            PrimitiveSpec::Sphere { .. } => "sphere",
            PrimitiveSpec::CappedCone { .. } => "capped_cone",
            PrimitiveSpec::Ellipsoid { .. } => "ellipsoid",
        }
    }

    /// Returns the same shape with the given tessellation resolution.
    pub fn with_resolution(mut self, res_mm: f64) -> Self {
        match &mut self {
            PrimitiveSpec::Box { resolution_mm, .. }
            | PrimitiveSpec::Cylinder { resolution_mm, .. }
            | PrimitiveSpec::RegularPrism { resolution_mm, .. }
            | PrimitiveSpec::StarPrism { resolution_mm, .. }
            | PrimitiveSpec::FlowerPrism { resolution_mm, .. }
            | PrimitiveSpec::Sphere { resolution_mm, .. }
            | PrimitiveSpec::CappedCone { resolution_mm, .. }
            | PrimitiveSpec::Ellipsoid { resolution_mm, .. } => *resolution_mm = Some(res_mm),
        }
        self
    }
}

fn positive(name: &'static str, v: f64) -> Result<f64, GeometryError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(GeometryError::NonPositiveDimension(name))
    }
}

fn at_least_three(k: u32) -> Result<u32, GeometryError> {
    if k >= 3 {
        Ok(k)
    } else {
        Err(GeometryError::TooFewSides(k))
    }
}

fn resolution(r: Option<f64>) -> Result<Option<f64>, GeometryError> {
    r.map(|v| positive("resolution_mm", v)).transpose()
}

fn pieces(length: f64, res: Option<f64>) -> usize {
    match res {
        Some(r) => (ceil(length / r) as usize).max(1),
        None => 1,
    }
}

/// Builds the watertight mesh described by `spec`.
pub fn make_primitive(spec: &PrimitiveSpec) -> Result<TriangleMesh, GeometryError> {
    match *spec {
        PrimitiveSpec::Box {
            size_x_mm,
            size_y_mm,
            size_z_mm,
            resolution_mm,
        } => {
            let hx = positive("size_x_mm", size_x_mm)? * MM / 2.0;
            let hy = positive("size_y_mm", size_y_mm)? * MM / 2.0;
            let h = positive("size_z_mm", size_z_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let corners = [(-hx, -hy), (hx, -hy), (hx, hy), (-hx, hy)];
            let profile = subdivide_polygon(&corners, res);
            loft(&profile, h, 1.0, res, CapStyle::CenterFan)
        }
        PrimitiveSpec::Cylinder {
            radius_mm,
            height_mm,
            segments,
            resolution_mm,
        } => {
            let r = positive("radius_mm", radius_mm)? * MM;
            let h = positive("height_mm", height_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let n = at_least_three(segments)? as usize;
            let n = n.max(pieces(TAU * r, res));
            loft(&circle(r, n), h, 1.0, res, CapStyle::CenterFan)
        }
        PrimitiveSpec::RegularPrism {
            sides,
            radius_mm,
            height_mm,
            resolution_mm,
        } => {
            let k = at_least_three(sides)? as usize;
            let r = positive("radius_mm", radius_mm)? * MM;
            let h = positive("height_mm", height_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let profile = subdivide_polygon(&circle(r, k), res);
            loft(&profile, h, 1.0, res, CapStyle::CenterFan)
        }
        PrimitiveSpec::StarPrism {
            points,
            inner_radius_mm,
            outer_radius_mm,
            height_mm,
            resolution_mm,
        } => {
            let k = at_least_three(points)? as usize;
            let ri = positive("inner_radius_mm", inner_radius_mm)? * MM;
            let ro = positive("outer_radius_mm", outer_radius_mm)? * MM;
            positive("outer_radius_mm - inner_radius_mm", ro - ri)?;
            let h = positive("height_mm", height_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let star: Vec<(f64, f64)> = (0..2 * k)
                .map(|i| {
                    let a = PI * i as f64 / k as f64;
                    let r = if i % 2 == 0 { ro } else { ri };
                    (r * cos(a), r * sin(a))
                })
                .collect();
            if res.is_some() {
                let profile = subdivide_polygon(&star, res);
                loft(&profile, h, 1.0, res, CapStyle::CenterFan)
            } else {
                loft(&star, h, 1.0, None, CapStyle::StarSpikes)
            }
        }
        PrimitiveSpec::FlowerPrism {
            lobes,
            inner_radius_mm,
            outer_radius_mm,
            height_mm,
            segments,
            resolution_mm,
        } => {
            let k = at_least_three(lobes)?;
            let ri = positive("inner_radius_mm", inner_radius_mm)? * MM;
            let ro = positive("outer_radius_mm", outer_radius_mm)? * MM;
            positive("outer_radius_mm - inner_radius_mm", ro - ri)?;
            let h = positive("height_mm", height_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let n = (at_least_three(segments)? as usize).max(pieces(TAU * ro, res));
            let (mid, amp) = ((ro + ri) / 2.0, (ro - ri) / 2.0);
            let profile: Vec<(f64, f64)> = (0..n)
                .map(|i| {
                    let a = TAU * i as f64 / n as f64;
                    let r = mid + amp * cos(k as f64 * a);
                    (r * cos(a), r * sin(a))
                })
                .collect();
            loft(&profile, h, 1.0, res, CapStyle::CenterFan)
        }
        PrimitiveSpec::Sphere {
            radius_mm,
            segments,
            resolution_mm,
        } => {
            let r = positive("radius_mm", radius_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            ellipsoid(r, r, r, at_least_three(segments)?, res)
        }
        PrimitiveSpec::Ellipsoid {
            radius_x_mm,
            radius_y_mm,
            radius_z_mm,
            segments,
            resolution_mm,
        } => {
            let rx = positive("radius_x_mm", radius_x_mm)? * MM;
            let ry = positive("radius_y_mm", radius_y_mm)? * MM;
            let rz = positive("radius_z_mm", radius_z_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            ellipsoid(rx, ry, rz, at_least_three(segments)?, res)
        }
        PrimitiveSpec::CappedCone {
            bottom_radius_mm,
            top_radius_mm,
            height_mm,
            segments,
            resolution_mm,
        } => {
            let rb = positive("bottom_radius_mm", bottom_radius_mm)? * MM;
            let rt = positive("top_radius_mm", top_radius_mm)? * MM;
            let h = positive("height_mm", height_mm)? * MM;
            let res = resolution(resolution_mm)?.map(|r| r * MM);
            let n = (at_least_three(segments)? as usize).max(pieces(TAU * rb.max(rt), res));
            // Slant length drives the row count for the side.
            let slant = sqrt(h * h + (rb - rt) * (rb - rt));
            loft_rows(&circle(rb, n), h, rt / rb, pieces(slant, res), res, CapStyle::CenterFan)
        }
    }
}

fn circle(r: f64, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let a = TAU * i as f64 / n as f64;
            (r * cos(a), r * sin(a))
        })
        .collect()
}

/// Splits every polygon edge into pieces no longer than `res`.
fn subdivide_polygon(corners: &[(f64, f64)], res: Option<f64>) -> Vec<(f64, f64)> {
    let n = corners.len();
    let mut out = Vec::new();
    for i in 0..n {
        let (x0, y0) = corners[i];
        let (x1, y1) = corners[(i + 1) % n];
        let len = sqrt((x1 - x0) * (x1 - x0) + (y1 - y0) * (y1 - y0));
        let m = pieces(len, res);
        for s in 0..m {
            let f = s as f64 / m as f64;
            out.push((x0 + (x1 - x0) * f, y0 + (y1 - y0) * f));
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
enum CapStyle {
    /// Concentric scaled rings closed by a fan around the axis.
    CenterFan,
    /// Star polygon without an axis vertex: spike triangles plus the inner polygon.
    StarSpikes,
}

fn loft(
    profile: &[(f64, f64)],
    height: f64,
    top_scale: f64,
    res: Option<f64>,
    cap: CapStyle,
) -> Result<TriangleMesh, GeometryError> {
    loft_rows(profile, height, top_scale, pieces(height, res), res, cap)
}

/// Extrudes a CCW, origin-star-shaped profile from z = 0 to `height`,
/// linearly scaling it to `top_scale` at the top.
fn loft_rows(
    profile: &[(f64, f64)],
    height: f64,
    top_scale: f64,
    rows: usize,
    res: Option<f64>,
    cap: CapStyle,
) -> Result<TriangleMesh, GeometryError> {
    let n = profile.len();
    let mut verts: Vec<Vec3> = Vec::new();
    let mut tris: Vec<[u32; 3]> = Vec::new();

    let scale_at = |r: usize| 1.0 + (top_scale - 1.0) * r as f64 / rows as f64;
    for r in 0..=rows {
        let z = if r == rows { height } else { height * r as f64 / rows as f64 };
        let s = scale_at(r);
        for &(x, y) in profile {
            verts.push(Vec3::new(x * s, y * s, z));
        }
    }
    let idx = |r: usize, i: usize| (r * n + i % n) as u32;
    for r in 0..rows {
        for i in 0..n {
            let (a, b, c, d) = (idx(r, i), idx(r, i + 1), idx(r + 1, i + 1), idx(r + 1, i));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }

    let max_radius = profile
        .iter()
        .map(|&(x, y)| sqrt(x * x + y * y))
        .fold(0.0, f64::max);
    let bottom: Vec<u32> = (0..n).map(|i| idx(0, i)).collect();
    let top: Vec<u32> = (0..n).map(|i| idx(rows, i)).collect();
    for (ring, z, s, up) in [(bottom, 0.0, 1.0, false), (top, height, top_scale, true)] {
        match cap {
            CapStyle::CenterFan => {
                let rings = pieces(max_radius * s, res);
                cap_fan(&mut verts, &mut tris, profile, &ring, z, s, rings, up);
            }
            CapStyle::StarSpikes => cap_star(&mut tris, &ring, up),
        }
    }
    TriangleMesh::new(verts, tris)
}

#[allow(clippy::too_many_arguments)]
fn cap_fan(
    verts: &mut Vec<Vec3>,
    tris: &mut Vec<[u32; 3]>,
    profile: &[(f64, f64)],
    boundary: &[u32],
    z: f64,
    scale: f64,
    rings: usize,
    up: bool,
) {
    let n = boundary.len();
    let mut outer: Vec<u32> = boundary.to_vec();
    let push = |t: [u32; 3], tris: &mut Vec<[u32; 3]>| {
        if up {
            tris.push(t);
        } else {
            tris.push([t[0], t[2], t[1]]);
        }
    };
    for j in 1..rings {
        let f = scale * (rings - j) as f64 / rings as f64;
        let base = verts.len() as u32;
        for &(x, y) in profile {
            verts.push(Vec3::new(x * f, y * f, z));
        }
        let inner: Vec<u32> = (0..n as u32).map(|i| base + i).collect();
        for i in 0..n {
            let (a0, a1) = (outer[i], outer[(i + 1) % n]);
            let (b0, b1) = (inner[i], inner[(i + 1) % n]);
            push([a0, a1, b1], tris);
            push([a0, b1, b0], tris);
        }
        outer = inner;
    }
    let center = verts.len() as u32;
    verts.push(Vec3::new(0.0, 0.0, z));
    for i in 0..n {
        push([outer[i], outer[(i + 1) % n], center], tris);
    }
}

/// Caps a 2k-vertex star ring (even slots outer tips, odd slots inner notches).
fn cap_star(tris: &mut Vec<[u32; 3]>, ring: &[u32], up: bool) {
    let n = ring.len();
    let k = n / 2;
    let mut push = |t: [u32; 3]| {
        if up {
            tris.push(t);
        } else {
            tris.push([t[0], t[2], t[1]]);
        }
    };
    for j in 0..k {
        let tip = 2 * j;
        push([ring[(tip + n - 1) % n], ring[tip], ring[tip + 1]]);
    }
    for m in 1..k - 1 {
        push([ring[1], ring[2 * m + 1], ring[2 * m + 3]]);
    }
}

/// UV ellipsoid resting on z = 0. Segment count is rounded up to a multiple of
/// four and the stack count to an even number so the extremal points exist.
fn ellipsoid(
    rx: f64,
    ry: f64,
    rz: f64,
    segments: u32,
    res: Option<f64>,
) -> Result<TriangleMesh, GeometryError> {
    let rmax = rx.max(ry).max(rz);
    let mut seg = (segments as usize).max(pieces(TAU * rmax, res));
    seg = seg.div_ceil(4) * 4;
    let mut stacks = (seg / 2).max(pieces(PI * rmax, res));
    stacks += stacks % 2;

    let mut verts = Vec::new();
    let mut tris = Vec::new();
    verts.push(Vec3::new(0.0, 0.0, 0.0));
    for j in 1..stacks {
        let phi = PI * j as f64 / stacks as f64;
        let (sp, cp) = (sin(phi), cos(phi));
        for i in 0..seg {
            let th = TAU * i as f64 / seg as f64;
            verts.push(Vec3::new(rx * sp * cos(th), ry * sp * sin(th), rz * (1.0 - cp)));
        }
    }
    let top = verts.len() as u32;
    verts.push(Vec3::new(0.0, 0.0, 2.0 * rz));

    let ring = |j: usize, i: usize| (1 + (j - 1) * seg + i % seg) as u32;
    for i in 0..seg {
        tris.push([0, ring(1, i + 1), ring(1, i)]);
    }
    for j in 1..stacks - 1 {
        for i in 0..seg {
            let (a, b, c, d) = (ring(j, i), ring(j, i + 1), ring(j + 1, i + 1), ring(j + 1, i));
            tris.push([a, b, c]);
            tris.push([a, c, d]);
        }
    }
    for i in 0..seg {
        tris.push([ring(stacks - 1, i), ring(stacks - 1, i + 1), top]);
    }
    TriangleMesh::new(verts, tris)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<PrimitiveSpec> {
        alloc::vec![
            PrimitiveSpec::Box { size_x_mm: 30.0, size_y_mm: 20.0, size_z_mm: 10.0, resolution_mm: None },
            PrimitiveSpec::Cylinder { radius_mm: 20.0, height_mm: 50.0, segments: 32, resolution_mm: None },
            PrimitiveSpec::RegularPrism { sides: 6, radius_mm: 20.0, height_mm: 30.0, resolution_mm: None },
            PrimitiveSpec::StarPrism { points: 6, inner_radius_mm: 10.0, outer_radius_mm: 20.0, height_mm: 40.0, resolution_mm: None },
            PrimitiveSpec::FlowerPrism { lobes: 5, inner_radius_mm: 12.0, outer_radius_mm: 20.0, height_mm: 30.0, segments: 60, resolution_mm: None },
            PrimitiveSpec::Sphere { radius_mm: 20.0, segments: 24, resolution_mm: None },
            PrimitiveSpec::CappedCone { bottom_radius_mm: 20.0, top_radius_mm: 8.0, height_mm: 30.0, segments: 32, resolution_mm: None },
            PrimitiveSpec::Ellipsoid { radius_x_mm: 20.0, radius_y_mm: 15.0, radius_z_mm: 10.0, segments: 24, resolution_mm: None },
        ]
    }

    #[test]
    fn every_primitive_is_closed_and_outward() {
        for spec in all_specs() {
            for s in [spec.clone(), spec.clone().with_resolution(4.0)] {
                let m = make_primitive(&s).unwrap();
                assert!(m.is_watertight(), "{:?}", s);
                assert!(m.signed_volume() > 0.0, "{:?}", s);
                let b = m.bounds();
                assert!(b.min.z.abs() < 1e-12, "{:?}", s);
            }
        }
    }

    #[test]
    fn cylinder_triangle_count() {
        let m = make_primitive(&PrimitiveSpec::Cylinder {
            radius_mm: 20.0,
            height_mm: 50.0,
            segments: 32,
            resolution_mm: None,
        })
        .unwrap();
        assert_eq!(m.triangle_count(), 128);
    }

    #[test]
    fn invalid_dimensions() {
        assert_eq!(
            make_primitive(&PrimitiveSpec::Box { size_x_mm: 0.0, size_y_mm: 1.0, size_z_mm: 1.0, resolution_mm: None }),
            Err(GeometryError::NonPositiveDimension("size_x_mm"))
        );
        assert_eq!(
            make_primitive(&PrimitiveSpec::RegularPrism { sides: 2, radius_mm: 1.0, height_mm: 1.0, resolution_mm: None }),
            Err(GeometryError::TooFewSides(2))
        );
    }
}
