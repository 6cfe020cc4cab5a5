//! Named shape sets used by data generation, recognition and grasping.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::geometry::PrimitiveSpec;

/// Remeshing resolution for preset shapes, so vertex sampling covers faces.
pub const PRESET_RESOLUTION_MM: f64 = 3.0;

/// One object of each primitive kind, all about 40 mm across.
pub fn default8() -> Vec<(String, PrimitiveSpec)> {
    let r = Some(PRESET_RESOLUTION_MM);
    alloc::vec![
        ("box".into(), PrimitiveSpec::Box { size_x_mm: 40.0, size_y_mm: 40.0, size_z_mm: 40.0, resolution_mm: r }),
        ("cylinder".into(), PrimitiveSpec::Cylinder { radius_mm: 20.0, height_mm: 40.0, segments: 32, resolution_mm: r }),
        ("hexagonal_prism".into(), PrimitiveSpec::RegularPrism { sides: 6, radius_mm: 22.0, height_mm: 40.0, resolution_mm: r }),
        (
            "star_prism".into(),
            PrimitiveSpec::StarPrism { points: 5, inner_radius_mm: 11.0, outer_radius_mm: 22.0, height_mm: 40.0, resolution_mm: r },
        ),
        (
            "flower_prism".into(),
            PrimitiveSpec::FlowerPrism {
                lobes: 4,
                inner_radius_mm: 14.0,
                outer_radius_mm: 22.0,
                height_mm: 40.0,
                segments: 64,
                resolution_mm: r,
            },
        ),
        ("sphere".into(), PrimitiveSpec::Sphere { radius_mm: 20.0, segments: 32, resolution_mm: r }),
        (
            "capped_cone".into(),
            PrimitiveSpec::CappedCone { bottom_radius_mm: 22.0, top_radius_mm: 10.0, height_mm: 40.0, segments: 32, resolution_mm: r },
        ),
        (
            "ellipsoid".into(),
            PrimitiveSpec::Ellipsoid { radius_x_mm: 25.0, radius_y_mm: 15.0, radius_z_mm: 20.0, segments: 32, resolution_mm: r },
        ),
    ]
}

/// Five shapes of similar extent but distinct local geometry.
pub fn dissimilar5() -> Vec<(String, PrimitiveSpec)> {
    let r = Some(PRESET_RESOLUTION_MM);
    alloc::vec![
        ("box".into(), PrimitiveSpec::Box { size_x_mm: 40.0, size_y_mm: 40.0, size_z_mm: 40.0, resolution_mm: r }),
        ("cylinder".into(), PrimitiveSpec::Cylinder { radius_mm: 20.0, height_mm: 40.0, segments: 32, resolution_mm: r }),
        (
            "star_prism".into(),
            PrimitiveSpec::StarPrism { points: 5, inner_radius_mm: 10.0, outer_radius_mm: 22.0, height_mm: 40.0, resolution_mm: r },
        ),
        ("sphere".into(), PrimitiveSpec::Sphere { radius_mm: 20.0, segments: 32, resolution_mm: r }),
        (
            "capped_cone".into(),
            PrimitiveSpec::CappedCone { bottom_radius_mm: 22.0, top_radius_mm: 10.0, height_mm: 40.0, segments: 32, resolution_mm: r },
        ),
    ]
}

/// Random primitive with a nominal size (largest diameter) in `[20, 60]` mm.
pub fn random_primitive<R: Rng + ?Sized>(rng: &mut R) -> PrimitiveSpec {
    let size = rng.random_range(20.0..=60.0);
    let half = size / 2.0;
    let frac = |rng: &mut R| rng.random_range(0.5..=1.0);
    let r = Some(PRESET_RESOLUTION_MM);
    match rng.random_range(0..8u32) {
        0 => PrimitiveSpec::Box {
            size_x_mm: size,
            size_y_mm: size * frac(rng),
            size_z_mm: size * frac(rng),
            resolution_mm: r,
        },
        1 => PrimitiveSpec::Cylinder {
            radius_mm: half * frac(rng),
            height_mm: size,
            segments: 32,
            resolution_mm: r,
        },
        2 => PrimitiveSpec::RegularPrism {
            sides: rng.random_range(3..=8),
            radius_mm: half,
            height_mm: size * frac(rng),
            resolution_mm: r,
        },
        3 => PrimitiveSpec::StarPrism {
            points: rng.random_range(4..=7),
            inner_radius_mm: half * rng.random_range(0.45..=0.7),
            outer_radius_mm: half,
            height_mm: size * frac(rng),
            resolution_mm: r,
        },
        4 => PrimitiveSpec::FlowerPrism {
            lobes: rng.random_range(3..=6),
            inner_radius_mm: half * rng.random_range(0.55..=0.8),
            outer_radius_mm: half,
            height_mm: size * frac(rng),
            segments: 64,
            resolution_mm: r,
        },
        5 => PrimitiveSpec::Sphere {
            radius_mm: half,
            segments: 32,
            resolution_mm: r,
        },
        6 => PrimitiveSpec::CappedCone {
            bottom_radius_mm: half,
            top_radius_mm: half * rng.random_range(0.3..=0.8),
            height_mm: size * frac(rng),
            segments: 32,
            resolution_mm: r,
        },
        _ => PrimitiveSpec::Ellipsoid {
            radius_x_mm: half,
            radius_y_mm: half * frac(rng),
            radius_z_mm: half * frac(rng),
            segments: 32,
            resolution_mm: r,
        },
    }
}

/// `count` random primitives, named `object_<i>`.
pub fn procedural_objects<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<(String, PrimitiveSpec)> {
    (0..count).map(|i| (format!("object_{i:02}"), random_primitive(rng))).collect()
}
