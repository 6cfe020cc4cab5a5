//! Little-endian primitives shared by the binary containers.

use pseudotouch_core::math::{Mat3, Pose, Vec3};
use pseudotouch_core::oracle::{TactileReading, READING_DIM};
use pseudotouch_core::patch::{DepthPatch, PATCH_CELLS};

use crate::FormatError;

/// Bytes of the validity bitmap: one bit per cell, LSB first.
pub const BITMAP_BYTES: usize = PATCH_CELLS.div_ceil(8);

#[derive(Default)]
pub struct Writer {
    pub buf: Vec<u8>,
}

impl Writer {
    pub fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn u16(&mut self, v: u16) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn u32(&mut self, v: u32) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn f32(&mut self, v: f32) {
        self.bytes(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.bytes(&v.to_le_bytes());
    }

    pub fn vec3(&mut self, v: Vec3) {
        self.f64(v.x);
        self.f64(v.y);
        self.f64(v.z);
    }

    /// Rotation rows then translation: 12 f64.
    pub fn pose(&mut self, p: &Pose) {
        for row in p.rotation.rows {
            for x in row {
                self.f64(x);
            }
        }
        self.vec3(p.translation);
    }

    pub fn reading(&mut self, r: &TactileReading) {
        for x in r.0 {
            self.f64(x);
        }
    }

    /// Depths, validity bitmap, max range, sensor pose.
    pub fn patch(&mut self, p: &DepthPatch) {
        for v in p.values {
            self.f32(v);
        }
        let mut bits = [0u8; BITMAP_BYTES];
        for (i, &ok) in p.valid.iter().enumerate() {
            if ok {
                bits[i / 8] |= 1 << (i % 8);
            }
        }
        self.bytes(&bits);
        self.f32(p.max_range_mm);
        self.pose(&p.sensor_pose);
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Reader { data, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }

    pub fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.remaining() < n {
            return Err(FormatError::Truncated { offset: self.data.len() });
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn array<const N: usize>(&mut self) -> Result<[u8; N], FormatError> {
        Ok(self.take(N)?.try_into().expect("slice has length N"))
    }

    pub fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }
    pub fn u16(&mut self) -> Result<u16, FormatError> {
        self.array().map(u16::from_le_bytes)
    }
    pub fn u32(&mut self) -> Result<u32, FormatError> {
        self.array().map(u32::from_le_bytes)
    }
    pub fn u64(&mut self) -> Result<u64, FormatError> {
        self.array().map(u64::from_le_bytes)
    }
    pub fn f32(&mut self) -> Result<f32, FormatError> {
        self.array().map(f32::from_le_bytes)
    }
    pub fn f64(&mut self) -> Result<f64, FormatError> {
        self.array().map(f64::from_le_bytes)
    }

    pub fn vec3(&mut self) -> Result<Vec3, FormatError> {
        Ok(Vec3::new(self.f64()?, self.f64()?, self.f64()?))
    }

    /// Stored bits are restored as-is, without re-orthonormalization.
    pub fn pose(&mut self) -> Result<Pose, FormatError> {
        let mut rows = [[0.0; 3]; 3];
        for row in &mut rows {
            for x in row.iter_mut() {
                *x = self.f64()?;
            }
        }
        Ok(Pose {
            rotation: Mat3 { rows },
            translation: self.vec3()?,
        })
    }

    pub fn reading(&mut self) -> Result<TactileReading, FormatError> {
        let mut r = [0.0; READING_DIM];
        for x in &mut r {
            *x = self.f64()?;
        }
        Ok(TactileReading(r))
    }

    pub fn patch(&mut self) -> Result<DepthPatch, FormatError> {
        let mut values = [0.0f32; PATCH_CELLS];
        for v in &mut values {
            *v = self.f32()?;
        }
        let bits = self.take(BITMAP_BYTES)?;
        let valid = std::array::from_fn(|i| bits[i / 8] & (1 << (i % 8)) != 0);
        Ok(DepthPatch {
            values,
            valid,
            max_range_mm: self.f32()?,
            sensor_pose: self.pose()?,
        })
    }
}
