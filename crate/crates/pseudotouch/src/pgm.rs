//! Binary 16-bit PGM (`P5`, maxval 65535, big-endian samples).
//!
//! Depth images store depth in 0.1 mm units with 0 marking a missing pixel.

use std::fs;
use std::path::Path;

use pseudotouch_core::math::Pose;
use pseudotouch_core::patch::{DepthImage, DepthPatch, NormalizedPatch, PATCH_CELLS, PATCH_SIZE};

use crate::FormatError;

/// Depth represented by one PGM step, in millimeters.
pub const DEPTH_UNIT_MM: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pgm16 {
    pub width: usize,
    pub height: usize,
    pub samples: Vec<u16>,
}

impl Pgm16 {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n65535\n", self.width, self.height).into_bytes();
        for s in &self.samples {
            out.extend_from_slice(&s.to_be_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FormatError> {
        let mut pos = 0;
        let mut fields = [0usize; 3];
        if bytes.get(..2) != Some(b"P5") {
            return Err(FormatError::malformed("PGM", "missing P5 signature"));
        }
        pos += 2;
        for field in &mut fields {
            // Whitespace and `#` comments may precede each header number.
            loop {
                match bytes.get(pos) {
                    Some(b'#') => {
                        while bytes.get(pos).is_some_and(|&c| c != b'\n') {
                            pos += 1;
                        }
                    }
                    Some(c) if c.is_ascii_whitespace() => pos += 1,
                    _ => break,
                }
            }
            let start = pos;
            while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
                pos += 1;
            }
            *field = std::str::from_utf8(&bytes[start..pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| FormatError::malformed("PGM", "bad header number"))?;
        }
        if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
            return Err(FormatError::malformed("PGM", "header not terminated"));
        }
        pos += 1;
        let [width, height, maxval] = fields;
        if maxval != 65535 {
            return Err(FormatError::malformed("PGM", format!("maxval {maxval}, expected 65535")));
        }
        let n = width * height;
        let data = &bytes[pos..];
        if data.len() < 2 * n {
            return Err(FormatError::Truncated { offset: bytes.len() });
        }
        let samples = data[..2 * n].chunks_exact(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        Ok(Pgm16 { width, height, samples })
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        Ok(fs::write(path, self.encode())?)
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Self::decode(&fs::read(path)?)
    }

    /// Camera depth image in meters; zero samples stay missing.
    pub fn to_depth_image(&self) -> Result<DepthImage, FormatError> {
        let depth = self.samples.iter().map(|&s| s as f64 * DEPTH_UNIT_MM * 1e-3).collect();
        DepthImage::new(self.width, self.height, depth).map_err(|e| FormatError::malformed("PGM", e.to_string()))
    }
}

fn depth_sample(mm: f64) -> u16 {
    (mm / DEPTH_UNIT_MM).round().clamp(1.0, 65535.0) as u16
}

/// Valid cells in 0.1 mm units, invalid cells as 0.
pub fn patch_to_pgm(patch: &DepthPatch) -> Pgm16 {
    let samples = (0..PATCH_CELLS)
        .map(|i| if patch.valid[i] { depth_sample(patch.values[i] as f64) } else { 0 })
        .collect();
    Pgm16 { width: PATCH_SIZE, height: PATCH_SIZE, samples }
}

/// Inverse of [`patch_to_pgm`] up to the 0.1 mm quantization.
pub fn patch_from_pgm(pgm: &Pgm16, max_range_mm: f32, sensor_pose: Pose) -> Result<DepthPatch, FormatError> {
    if pgm.width != PATCH_SIZE || pgm.height != PATCH_SIZE {
        return Err(FormatError::malformed("PGM", format!("{}x{} is not a patch", pgm.width, pgm.height)));
    }
    let mut patch = DepthPatch::all_miss(max_range_mm, sensor_pose);
    for (i, &s) in pgm.samples.iter().enumerate() {
        if s != 0 {
            patch.values[i] = (s as f64 * DEPTH_UNIT_MM) as f32;
            patch.valid[i] = true;
        }
    }
    Ok(patch)
}

/// Normalized values scaled to the full 16-bit range.
pub fn normalized_to_pgm(patch: &NormalizedPatch) -> Pgm16 {
    let samples = patch.values.iter().map(|v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16).collect();
    Pgm16 { width: PATCH_SIZE, height: PATCH_SIZE, samples }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_in_header() {
        let p = Pgm16::decode(b"P5 # depth\n2 1\n# range\n65535\n\x00\x01\xff\xff").unwrap();
        assert_eq!(p, Pgm16 { width: 2, height: 1, samples: vec![1, 65535] });
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Pgm16::decode(b"P2\n1 1\n65535\n0").is_err());
        assert!(Pgm16::decode(b"P5\n1 1\n255\n\x00").is_err());
        assert!(matches!(Pgm16::decode(b"P5\n2 2\n65535\n\x00\x01"), Err(FormatError::Truncated { .. })));
    }
}
