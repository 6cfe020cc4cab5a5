//! Named object sets and the shape JSON format.

use std::fs;
use std::path::Path;

use pseudotouch_core::geometry::PrimitiveSpec;
use pseudotouch_core::presets::{default8, dissimilar5, procedural_objects};
use pseudotouch_core::recognition::{ObjectSet, RecognitionError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::FormatError;

/// One object of a set, as stored in dataset headers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub id: u32,
    pub name: String,
    pub spec: PrimitiveSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum FileShape {
    Named { name: String, spec: PrimitiveSpec },
    Bare(PrimitiveSpec),
}

/// Resolves a set selector: `default8`, `dissimilar5`, `procedural:<count>`
/// (drawn from `seed`) or a path to a JSON array of shapes.
///
/// File entries are either `{"name": .., "spec": {..}}` or a bare spec object.
pub fn resolve(selector: &str, seed: u64) -> Result<Vec<ShapeEntry>, FormatError> {
    let named = match selector {
        "default8" => default8(),
        "dissimilar5" => dissimilar5(),
        s if s.starts_with("procedural:") => {
            let count: usize = s["procedural:".len()..]
                .parse()
                .map_err(|_| FormatError::malformed("shape selector", s))?;
            procedural(count, seed)
        }
        path => parse_shapes_json(&fs::read_to_string(Path::new(path))?)?,
    };
    Ok(entries(named))
}

/// `count` random primitives drawn from `seed`.
pub fn procedural(count: usize, seed: u64) -> Vec<(String, PrimitiveSpec)> {
    procedural_objects(count, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn parse_shapes_json(text: &str) -> Result<Vec<(String, PrimitiveSpec)>, FormatError> {
    let shapes: Vec<FileShape> = serde_json::from_str(text)?;
    if shapes.is_empty() {
        return Err(FormatError::malformed("shape list", "no shapes"));
    }
    Ok(shapes
        .into_iter()
        .enumerate()
        .map(|(i, s)| match s {
            FileShape::Named { name, spec } => (name, spec),
            FileShape::Bare(spec) => (format!("{}_{i}", spec.kind_name()), spec),
        })
        .collect())
}

/// Ids follow list order, matching [`ObjectSet::from_specs`].
pub fn entries(named: Vec<(String, PrimitiveSpec)>) -> Vec<ShapeEntry> {
    named
        .into_iter()
        .enumerate()
        .map(|(i, (name, spec))| ShapeEntry { id: i as u32, name, spec })
        .collect()
}

pub fn object_set(entries: &[ShapeEntry]) -> Result<ObjectSet, RecognitionError> {
    for (i, e) in entries.iter().enumerate() {
        if e.id != i as u32 {
            return Err(RecognitionError::InvalidConfig("shape ids must be 0..n in order"));
        }
    }
    let named: Vec<(String, PrimitiveSpec)> = entries.iter().map(|e| (e.name.clone(), e.spec.clone())).collect();
    ObjectSet::from_specs(&named)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        assert_eq!(resolve("default8", 0).unwrap().len(), 8);
        assert_eq!(resolve("dissimilar5", 0).unwrap().len(), 5);
        let a = resolve("procedural:20", 7).unwrap();
        assert_eq!(a, resolve("procedural:20", 7).unwrap());
        assert_ne!(a, resolve("procedural:20", 8).unwrap());
        assert!(resolve("procedural:x", 0).is_err());
    }

    #[test]
    fn shape_json_accepts_named_and_bare_entries() {
        let text = r#"[
            {"kind":"cylinder","radius_mm":20,"height_mm":50,"segments":32},
            {"name":"die","spec":{"kind":"box","size_x_mm":30,"size_y_mm":30,"size_z_mm":30}}
        ]"#;
        let shapes = parse_shapes_json(text).unwrap();
        assert_eq!(shapes[0].0, "cylinder_0");
        assert_eq!(shapes[1].0, "die");
        assert!(object_set(&entries(shapes)).is_ok());
        assert!(parse_shapes_json("[]").is_err());
        assert!(parse_shapes_json(r#"[{"kind":"cube"}]"#).is_err());
    }
}
