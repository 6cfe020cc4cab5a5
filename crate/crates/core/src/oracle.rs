//! Synthetic tactile sensor: five magnetometer-like sites under the pad, each
//! reporting a 3-axis response to the indentation of the normalized patch.
//!
//! This is a fixed, geometry-sensitive stand-in for ground truth. It is not a
//! magnetics or elastomer model.

use core::fmt;
use core::ops::{Index, IndexMut, Sub};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::math::exp;
use crate::patch::{cell_offset_mm, NormalizedPatch, PATCH_CELLS};

pub const SITES: usize = 5;
pub const READING_DIM: usize = 3 * SITES;

/// Fifteen sensor values ordered site-major: `[x0, y0, z0, x1, y1, z1, ...]`.
/// The zero vector means no deviation from the ambient reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TactileReading(pub [f64; READING_DIM]);

impl TactileReading {
    pub const ZERO: TactileReading = TactileReading([0.0; READING_DIM]);

    pub fn site(&self, s: usize) -> [f64; 3] {
        [self.0[3 * s], self.0[3 * s + 1], self.0[3 * s + 2]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        crate::math::sqrt(self.0.iter().map(|v| v * v).sum())
    }

    pub fn distance(&self, other: &TactileReading) -> f64 {
        (*self - *other).norm()
    }
}

impl Index<usize> for TactileReading {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for TactileReading {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Sub for TactileReading {
    type Output = TactileReading;
    fn sub(self, rhs: TactileReading) -> TactileReading {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0.iter()) {
            *o -= r;
        }
        TactileReading(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum OracleError {
    NonPositiveKernelWidth,
    SiteOutsidePad(usize),
    NonFinite,
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::NonPositiveKernelWidth => write!(f, "kernel width must be positive"),
            OracleError::SiteOutsidePad(s) => write!(f, "site {s} lies outside the 17 mm pad"),
            OracleError::NonFinite => write!(f, "oracle parameters must be finite"),
        }
    }
}

impl core::error::Error for OracleError {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    /// Site centers `(u, v)` in millimeters on the sensor plane.
    pub site_positions: [(f64, f64); SITES],
    pub kernel_width_mm: f64,
    pub gain: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            site_positions: [(0.0, 0.0), (4.0, 4.0), (-4.0, 4.0), (-4.0, -4.0), (4.0, -4.0)],
            kernel_width_mm: 3.0,
            gain: 10.0,
        }
    }
}

impl OracleParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.gain.is_finite() && self.kernel_width_mm.is_finite()) {
            return Err(OracleError::NonFinite);
        }
        if self.kernel_width_mm <= 0.0 {
            return Err(OracleError::NonPositiveKernelWidth);
        }
        for (s, &(x, y)) in self.site_positions.iter().enumerate() {
            if !(x.abs() <= 8.5 && y.abs() <= 8.5) {
                return Err(OracleError::SiteOutsidePad(s));
            }
        }
        Ok(())
    }
}

/// Gaussian-weighted indentation moments around each site.
///
/// With indentation `i = 1 − value` and weight `w = exp(−r²/2ρ²)`, site `s`
/// reports `gain·Σ w·i·(u−x_s)/ρ`, `gain·Σ w·i·(v−y_s)/ρ` and `gain·Σ w·i`.
pub fn oracle_reading(patch: &NormalizedPatch, params: &OracleParams) -> TactileReading {
    let rho = params.kernel_width_mm;
    let inv_two_rho2 = 1.0 / (2.0 * rho * rho);
    let mut out = [0.0; READING_DIM];
    for (s, &(xs, ys)) in params.site_positions.iter().enumerate() {
        let (mut sx, mut sy, mut sz) = (0.0, 0.0, 0.0);
        for i in 0..PATCH_CELLS {
            let ind = 1.0 - patch.values[i];
            if ind == 0.0 {
                continue;
            }
            let (u, v) = cell_offset_mm(i);
            let (du, dv) = (u - xs, v - ys);
            let w = exp(-(du * du + dv * dv) * inv_two_rho2) * ind;
            sx += w * du;
            sy += w * dv;
            sz += w;
        }
        out[3 * s] = params.gain * sx / rho;
        out[3 * s + 1] = params.gain * sy / rho;
        out[3 * s + 2] = params.gain * sz;
    }
    TactileReading(out)
}

pub fn ambient_subtract(raw: &TactileReading, ambient: &TactileReading) -> TactileReading {
    *raw - *ambient
}

/// Adds i.i.d. `N(0, sd²)` noise to every component. Always draws 15 values.
pub fn add_sensor_noise<R: Rng + ?Sized>(reading: &TactileReading, rng: &mut R, sd: f64) -> TactileReading {
    debug_assert!(sd >= 0.0);
    let mut out = *reading;
    for v in out.0.iter_mut() {
        let n: f64 = StandardNormal.sample(rng);
        *v += sd * n;
    }
    out
}
