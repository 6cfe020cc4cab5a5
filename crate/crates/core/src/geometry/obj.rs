//! Minimal Wavefront OBJ ingest: only `v` and `f` records are honored.

use alloc::vec::Vec;
use core::fmt;

use super::{GeometryError, TriangleMesh};
use crate::math::Vec3;

#[derive(Clone, Debug, PartialEq)]
pub enum ObjError {
    /// 1-based line number of a record that could not be parsed.
    Malformed { line: usize },
    IndexOutOfRange { line: usize, index: i64, vertex_count: usize },
    TooFewFaceVertices { line: usize, count: usize },
    Mesh(GeometryError),
}

impl fmt::Display for ObjError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjError::Malformed { line } => write!(f, "line {line}: malformed record"),
            ObjError::IndexOutOfRange { line, index, vertex_count } => {
                write!(f, "line {line}: vertex index {index} out of range (have {vertex_count})")
            }
            ObjError::TooFewFaceVertices { line, count } => {
                write!(f, "line {line}: face has {count} vertices, need at least 3")
            }
            ObjError::Mesh(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ObjError {}

/// Parses OBJ text into a mesh with coordinates taken as-is (meters).
///
/// Face corners may carry `/vt/vn` suffixes, which are ignored; negative
/// indices count back from the last vertex seen. Polygons are fan-triangulated
/// around their first corner. Indices must refer to vertices declared earlier.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, ObjError> {
    let mut vertices: Vec<Vec3> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    let mut corners: Vec<u32> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut tokens = body.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    *slot = tokens
                        .next()
                        .and_then(|t| t.parse::<f64>().ok())
                        .ok_or(ObjError::Malformed { line })?;
                }
                // An optional fourth (w) component is accepted and ignored.
                if tokens.nth(1).is_some() {
                    return Err(ObjError::Malformed { line });
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                corners.clear();
                for t in tokens {
                    let head = t.split('/').next().unwrap_or("");
                    let idx: i64 = head.parse().map_err(|_| ObjError::Malformed { line })?;
                    let n = vertices.len() as i64;
                    let resolved = if idx > 0 { idx - 1 } else { n + idx };
                    if idx == 0 || resolved < 0 || resolved >= n {
                        return Err(ObjError::IndexOutOfRange {
                            line,
                            index: idx,
                            vertex_count: vertices.len(),
                        });
                    }
                    corners.push(resolved as u32);
                }
                if corners.len() < 3 {
                    return Err(ObjError::TooFewFaceVertices { line, count: corners.len() });
                }
                for w in corners[1..].windows(2) {
                    triangles.push([corners[0], w[0], w[1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, triangles).map_err(ObjError::Mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_and_other_records_are_skipped() {
        let m = parse_obj("# tri\nvn 0 0 1\nv 0 0 0\nv 1 0 0 1.0\nv 0 1 0\nvt 0 0\nf 1/1/1 2//1 -1\n").unwrap();
        assert_eq!(m.triangle_count(), 1);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_obj("v 0 0\n").unwrap_err(), ObjError::Malformed { line: 1 });
        assert_eq!(
            parse_obj("v 0 0 0\nv 1 0 0\nf 1 2\n").unwrap_err(),
            ObjError::TooFewFaceVertices { line: 3, count: 2 }
        );
        assert_eq!(parse_obj("").unwrap_err(), ObjError::Mesh(GeometryError::EmptyMesh));
    }
}
