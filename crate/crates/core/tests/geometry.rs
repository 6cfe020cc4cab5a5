//! BVH queries against linear scans, and geometric properties.

use pseudotouch_core::geometry::{make_primitive, parse_obj, transform, Bvh, ObjError, PrimitiveSpec, TriangleMesh};
use pseudotouch_core::geometry::triangle::{closest_point_on_triangle, ray_triangle};
use pseudotouch_core::math::{Mat3, Pose, Vec3};
use pseudotouch_core::presets::default8;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn scan_raycast(mesh: &TriangleMesh, o: Vec3, d: Vec3, t_max: f64) -> Option<(f64, u32)> {
    let mut best: Option<(f64, u32)> = None;
    for tri in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.corners(tri);
        if let Some((t, _, _)) = ray_triangle(o, d, t_max, a, b, c) {
            if best.is_none_or(|(bt, _)| t < bt) {
                best = Some((t, tri as u32));
            }
        }
    }
    best
}

fn scan_distance(mesh: &TriangleMesh, p: Vec3) -> (f64, u32) {
    let mut best = (f64::INFINITY, 0);
    for tri in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.corners(tri);
        let d = (closest_point_on_triangle(p, a, b, c).0 - p).norm();
        if d < best.0 {
            best = (d, tri as u32);
        }
    }
    best
}

fn unit<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if (1e-3..=1.0).contains(&v.norm()) {
            return v.normalize();
        }
    }
}

#[test]
fn bvh_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (name, spec) in default8() {
        let mesh = make_primitive(&spec).unwrap();
        let bvh = Bvh::build(mesh.clone()).unwrap();
        assert!(bvh.check_invariants(), "{name}");
        let c = mesh.bounds().center();
        let r = mesh.bounds().extent().norm();
        for _ in 0..300 {
            let o = c + unit(&mut rng) * (r * rng.random_range(0.0..1.5));
            // Aim near the object so most rays hit.
            let target = c + unit(&mut rng) * (r * 0.3);
            let d = (target - o).try_normalize().unwrap_or(Vec3::Z);
            let expected = scan_raycast(&mesh, o, d, 1.0);
            let got = bvh.raycast(o, d, 1.0).map(|h| (h.t, h.triangle));
            match (expected, got) {
                (None, None) => {}
                (Some((te, ie)), Some((tg, ig))) => {
                    assert!((te - tg).abs() <= 1e-9, "{name}: t {te} vs {tg}");
                    assert_eq!(ie, ig, "{name}: hit id");
                }
                other => panic!("{name}: {other:?}"),
            }
            // Axis-aligned ray through a vertex: origin coordinates lie on node bounds.
            let v = mesh.vertices()[rng.random_range(0..mesh.vertices().len())];
            let k = rng.random_range(0..3);
            let mut ao = v;
            let mut ad = Vec3::ZERO;
            match k {
                0 => (ao.x, ad.x) = (c.x + r, -1.0),
                1 => (ao.y, ad.y) = (c.y + r, -1.0),
                _ => (ao.z, ad.z) = (c.z + r, -1.0),
            }
            let expected = scan_raycast(&mesh, ao, ad, 1.0).map(|h| h.1);
            assert_eq!(bvh.raycast(ao, ad, 1.0).map(|h| h.triangle), expected, "{name}: axis ray");

            let p = c + unit(&mut rng) * (r * rng.random_range(0.0..1.5));
            let (de, _) = scan_distance(&mesh, p);
            let cp = bvh.closest_point(p);
            assert!((de - cp.distance).abs() <= 1e-9, "{name}: {de} vs {}", cp.distance);
        }
    }
}

#[test]
fn axis_ray_hits_box_face() {
    let mesh = make_primitive(&PrimitiveSpec::Box {
        size_x_mm: 20.0,
        size_y_mm: 20.0,
        size_z_mm: 20.0,
        resolution_mm: None,
    })
    .unwrap();
    let bvh = Bvh::build(mesh).unwrap();
    let hit = bvh.raycast(Vec3::new(0.001, 0.002, 0.1), -Vec3::Z, 1.0).unwrap();
    assert!((hit.t - 0.08).abs() < 1e-12);
    assert!((bvh.mesh().face_normal(hit.triangle as usize) - Vec3::Z).norm() < 1e-12);
    assert!(bvh.raycast(Vec3::new(0.001, 0.002, 0.1), Vec3::Z, 1.0).is_none());
}

fn sphere_bvh() -> Bvh {
    Bvh::build(
        make_primitive(&PrimitiveSpec::Sphere {
            radius_mm: 20.0,
            segments: 24,
            resolution_mm: None,
        })
        .unwrap(),
    )
    .unwrap()
}

fn arb_vec(scale: f64) -> impl Strategy<Value = Vec3> {
    (-scale..scale, -scale..scale, -scale..scale).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn arb_pose() -> impl Strategy<Value = Pose> {
    (arb_vec(1.0), 0.0..std::f64::consts::PI, arb_vec(0.2)).prop_filter_map("degenerate axis", |(a, ang, t)| {
        a.try_normalize().map(|axis| Pose::new(Mat3::from_axis_angle(axis, ang), t))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closest_point_is_no_farther_than_any_vertex(p in arb_vec(0.08)) {
        let bvh = sphere_bvh();
        let cp = bvh.closest_point(p);
        let nearest_vertex = bvh.mesh().vertices().iter().map(|v| (*v - p).norm()).fold(f64::INFINITY, f64::min);
        prop_assert!(cp.distance <= nearest_vertex + 1e-12);
        prop_assert!(((cp.point - p).norm() - cp.distance).abs() < 1e-12);
    }

    #[test]
    fn hit_points_lie_on_the_surface(o in arb_vec(0.08), target in arb_vec(0.01)) {
        let bvh = sphere_bvh();
        if let Some(d) = (target - o).try_normalize() {
            if let Some(hit) = bvh.raycast(o, d, 1.0) {
                prop_assert!(bvh.closest_point(hit.point).distance < 1e-12);
                prop_assert!(((hit.point - o).norm() - hit.t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn queries_are_rigidly_equivariant(pose in arb_pose(), p in arb_vec(0.06), target in arb_vec(0.01)) {
        let bvh = sphere_bvh();
        let moved = Bvh::build(transform(bvh.mesh(), &pose)).unwrap();
        let d0 = bvh.closest_point(p).distance;
        let d1 = moved.closest_point(pose.transform_point(p)).distance;
        prop_assert!((d0 - d1).abs() < 1e-12);
        if let Some(dir) = (target - p).try_normalize() {
            let a = bvh.raycast(p, dir, 1.0).map(|h| h.t);
            let b = moved.raycast(pose.transform_point(p), pose.transform_vector(dir), 1.0).map(|h| h.t);
            match (a, b) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-12),
                (None, None) => {}
                (a, b) => prop_assert!(false, "hit mismatch {:?} {:?}", a, b),
            }
        }
    }
}

const CUBE_OBJ: &str = "\
v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 1\nv 1 0 1\nv 1 1 1\nv 0 1 1
f 1 4 3 2\nf 5 6 7 8\nf 1 2 6 5\nf 2 3 7 6\nf 3 4 8 7\nf 4 1 5 8
";

#[test]
fn obj_unit_cube() {
    let m = parse_obj(CUBE_OBJ).unwrap();
    assert_eq!(m.triangle_count(), 12);
    assert!(m.is_watertight());
    assert!((m.signed_volume() - 1.0).abs() < 1e-12);
    for tri in 0..12 {
        let n = m.face_normal(tri);
        let ones = [n.x, n.y, n.z].iter().filter(|c| (c.abs() - 1.0).abs() < 1e-12).count();
        assert_eq!(ones, 1, "face {tri}: {n:?}");
    }
    for n in m.normals() {
        assert!((n.norm() - 1.0).abs() < 1e-12);
    }
    let bad = CUBE_OBJ.replace("f 4 1 5 8", "f 1 2 99");
    assert!(matches!(parse_obj(&bad), Err(ObjError::IndexOutOfRange { index: 99, vertex_count: 8, .. })));
}

/// Icosahedron with edge 2, faces found as mutually adjacent vertex triples.
fn icosahedron_obj(scale: f64) -> String {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::new();
    for a in [-1.0, 1.0] {
        for b in [-phi, phi] {
            v.push(Vec3::new(0.0, a, b));
            v.push(Vec3::new(a, b, 0.0));
            v.push(Vec3::new(b, 0.0, a));
        }
    }
    let adjacent = |i: usize, j: usize| ((v[i] - v[j]).norm() - 2.0).abs() < 1e-9;
    let mut text = String::new();
    for p in &v {
        text += &format!("v {} {} {}\n", p.x * scale, p.y * scale, p.z * scale);
    }
    let mut faces = 0;
    for i in 0..12 {
        for j in i + 1..12 {
            for k in j + 1..12 {
                if adjacent(i, j) && adjacent(j, k) && adjacent(i, k) {
                    let outward = (v[j] - v[i]).cross(v[k] - v[i]).dot(v[i]) > 0.0;
                    let (b, c) = if outward { (j, k) } else { (k, j) };
                    text += &format!("f {} {} {}\n", i + 1, b + 1, c + 1);
                    faces += 1;
                }
            }
        }
    }
    assert_eq!(faces, 20);
    text
}

#[test]
fn obj_icosahedron_area() {
    for scale in [1.0, 0.0125] {
        let a = 2.0 * scale;
        let m = parse_obj(&icosahedron_obj(scale)).unwrap();
        assert!(m.is_watertight());
        assert!(m.signed_volume() > 0.0);
        let want = 5.0 * 3f64.sqrt() * a * a;
        assert!((m.surface_area() - want).abs() < 1e-9 * want.max(1.0), "{} vs {want}", m.surface_area());
    }
}
