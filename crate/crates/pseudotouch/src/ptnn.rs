//! Network parameter files.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "PTNN" | format version u16 | architecture u16 | tensor count u32
//! per tensor: rank u8, then rank × u32 dimensions
//! every tensor's f64 values, in declaration order
//! ```
//!
//! The architecture field distinguishes the tactile predictor from the grasp
//! classifier and changes whenever either network's layout does.

use std::fs;
use std::path::Path;

use pseudotouch_core::grasp::{GraspNetParams, GRASP_PARAM_COUNT, GRASP_TENSORS};
use pseudotouch_core::model::{NetworkParams, PARAM_COUNT, TENSORS};

use crate::binio::{Reader, Writer};
use crate::FormatError;

pub const MAGIC: [u8; 4] = *b"PTNN";
pub const FORMAT_VERSION: u16 = 1;

/// Layout identifier stored in the file header.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u16)]
pub enum Architecture {
    Tactile = 1,
    Grasp = 2,
}

impl Architecture {
    fn shapes(self) -> Vec<&'static [usize]> {
        match self {
            Architecture::Tactile => TENSORS.iter().map(|t| t.shape).collect(),
            Architecture::Grasp => GRASP_TENSORS.iter().map(|t| t.2).collect(),
        }
    }

    fn len(self) -> usize {
        match self {
            Architecture::Tactile => PARAM_COUNT,
            Architecture::Grasp => GRASP_PARAM_COUNT,
        }
    }

    fn from_u16(v: u16) -> Option<Self> {
        match v {
            1 => Some(Architecture::Tactile),
            2 => Some(Architecture::Grasp),
            _ => None,
        }
    }
}

pub fn encode(arch: Architecture, data: &[f64]) -> Vec<u8> {
    debug_assert_eq!(data.len(), arch.len());
    let shapes = arch.shapes();
    let mut w = Writer::default();
    w.bytes(&MAGIC);
    w.u16(FORMAT_VERSION);
    w.u16(arch as u16);
    w.u32(shapes.len() as u32);
    for s in &shapes {
        w.u8(s.len() as u8);
        for &d in *s {
            w.u32(d as u32);
        }
    }
    for &x in data {
        w.f64(x);
    }
    w.buf
}

/// Architecture recorded in a params file header.
pub fn peek_architecture(bytes: &[u8]) -> Result<u16, FormatError> {
    let mut r = Reader::new(bytes);
    check_preamble(&mut r)?;
    r.u16()
}

fn check_preamble(r: &mut Reader) -> Result<(), FormatError> {
    let found: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
    if found != MAGIC {
        return Err(FormatError::BadMagic { expected: MAGIC, found });
    }
    let version = r.u16()?;
    if version != FORMAT_VERSION {
        return Err(FormatError::Version { found: version, expected: FORMAT_VERSION });
    }
    Ok(())
}

pub fn decode(bytes: &[u8], expected: Architecture) -> Result<Vec<f64>, FormatError> {
    let mut r = Reader::new(bytes);
    check_preamble(&mut r)?;
    let arch = r.u16()?;
    if Architecture::from_u16(arch) != Some(expected) {
        return Err(FormatError::Architecture { found: arch, expected: expected as u16 });
    }
    let shapes = expected.shapes();
    let count = r.u32()? as usize;
    if count != shapes.len() {
        return Err(FormatError::ShapeMismatch(format!("{count} tensors, expected {}", shapes.len())));
    }
    for (k, want) in shapes.iter().enumerate() {
        let rank = r.u8()? as usize;
        let mut got = Vec::with_capacity(rank);
        for _ in 0..rank {
            got.push(r.u32()? as usize);
        }
        if got != *want {
            return Err(FormatError::ShapeMismatch(format!("tensor {k} is {got:?}, expected {want:?}")));
        }
    }
    let data = (0..expected.len()).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    if r.remaining() != 0 {
        return Err(FormatError::malformed("params file", format!("{} trailing bytes", r.remaining())));
    }
    Ok(data)
}

pub fn save_params(path: &Path, params: &NetworkParams) -> Result<(), FormatError> {
    Ok(fs::write(path, encode(Architecture::Tactile, params.as_slice()))?)
}

pub fn load_params(path: &Path) -> Result<NetworkParams, FormatError> {
    let data = decode(&fs::read(path)?, Architecture::Tactile)?;
    NetworkParams::from_vec(data).map_err(|e| FormatError::ShapeMismatch(e.to_string()))
}

pub fn save_grasp_params(path: &Path, params: &GraspNetParams) -> Result<(), FormatError> {
    Ok(fs::write(path, encode(Architecture::Grasp, params.as_slice()))?)
}

pub fn load_grasp_params(path: &Path) -> Result<GraspNetParams, FormatError> {
    let data = decode(&fs::read(path)?, Architecture::Grasp)?;
    GraspNetParams::from_vec(data).map_err(|e| FormatError::ShapeMismatch(e.to_string()))
}
