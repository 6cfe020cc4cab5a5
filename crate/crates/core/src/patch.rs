//! 17×17 depth patches over the 17 mm × 17 mm sensor footprint: rendering,
//! normalization, real-sensor degradation and extraction from camera images.
//!
//! The sensor looks along the −z axis of its pose. Cell `(row, col)` sits at
//! `u = col − 8` mm along the sensor x axis and `v = row − 8` mm along y;
//! grids are stored row-major.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::geometry::RayCaster;
use crate::math::{Pose, Vec3};

pub const PATCH_SIZE: usize = 17;
pub const PATCH_CELLS: usize = PATCH_SIZE * PATCH_SIZE;
/// Half width of the sensor footprint, millimeters.
pub const HALF_FOOTPRINT_MM: f64 = 8.5;
pub const DEFAULT_MAX_RANGE_MM: f64 = 10.0;
/// Number of smallest valid depths averaged into the normalization floor
/// (10 % of 289 cells, rounded up).
pub const FLOOR_CELLS: usize = 29;
/// Depth span mapped onto `[0, 1]` by normalization, millimeters.
pub const NORMALIZATION_RANGE_MM: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub enum PatchError {
    AllInvalid,
    CornerOutsideImage { corner: usize, x: f64, y: f64 },
    BehindCamera,
    ImageSizeMismatch { expected: usize, actual: usize },
}

impl fmt::Display for PatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatchError::AllInvalid => write!(f, "patch has no valid depth cell"),
            PatchError::CornerOutsideImage { corner, x, y } => write!(
                f,
                "sensor corner {corner} projects to ({x:.2}, {y:.2}), outside the image"
            ),
            PatchError::BehindCamera => write!(f, "touch pose lies behind the camera"),
            PatchError::ImageSizeMismatch { expected, actual } => write!(
                f,
                "depth image holds {actual} pixels, expected {expected}"
            ),
        }
    }
}

impl core::error::Error for PatchError {}

/// Sensor-plane offset `(u, v)` of a cell center, millimeters.
#[inline]
pub fn cell_offset_mm(index: usize) -> (f64, f64) {
    let row = index / PATCH_SIZE;
    let col = index % PATCH_SIZE;
    (col as f64 - 8.0, row as f64 - 8.0)
}

/// Raw depth patch in millimeters, measured from the sensor plane along −z.
///
/// Cells without a surface within range are invalid and hold `max_range_mm`.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthPatch {
    pub values: [f32; PATCH_CELLS],
    pub valid: [bool; PATCH_CELLS],
    pub max_range_mm: f32,
    pub sensor_pose: Pose,
}

impl DepthPatch {
    /// Patch with every cell at `depth_mm` and valid.
    pub fn constant(depth_mm: f32, max_range_mm: f32, sensor_pose: Pose) -> Self {
        DepthPatch {
            values: [depth_mm; PATCH_CELLS],
            valid: [true; PATCH_CELLS],
            max_range_mm,
            sensor_pose,
        }
    }

    /// Patch in which nothing was seen.
    pub fn all_miss(max_range_mm: f32, sensor_pose: Pose) -> Self {
        DepthPatch {
            values: [max_range_mm; PATCH_CELLS],
            valid: [false; PATCH_CELLS],
            max_range_mm,
            sensor_pose,
        }
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f32> {
        let i = row * PATCH_SIZE + col;
        self.valid[i].then_some(self.values[i])
    }

    /// Same patch with `u` negated (columns reversed).
    pub fn mirrored_u(&self) -> Self {
        let mut out = self.clone();
        for r in 0..PATCH_SIZE {
            for c in 0..PATCH_SIZE {
                let src = r * PATCH_SIZE + (PATCH_SIZE - 1 - c);
                out.values[r * PATCH_SIZE + c] = self.values[src];
                out.valid[r * PATCH_SIZE + c] = self.valid[src];
            }
        }
        out
    }
}

/// Normalized patch: depths relative to the contact floor, scaled to `[0, 1]`.
/// Zero means contact, one means at least 3 mm away (or unseen).
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedPatch {
    pub values: [f64; PATCH_CELLS],
    pub floor_mm: f64,
}

impl NormalizedPatch {
    /// Patch with no contact anywhere (every cell at 1).
    pub fn far() -> Self {
        NormalizedPatch {
            values: [1.0; PATCH_CELLS],
            floor_mm: f64::NAN,
        }
    }

    pub fn from_values(values: [f64; PATCH_CELLS]) -> Self {
        NormalizedPatch {
            values,
            floor_mm: 0.0,
        }
    }

    /// Same patch with `v` negated (rows reversed).
    pub fn mirrored_v(&self) -> Self {
        let mut out = self.clone();
        for r in 0..PATCH_SIZE {
            let src = (PATCH_SIZE - 1 - r) * PATCH_SIZE;
            out.values[r * PATCH_SIZE..(r + 1) * PATCH_SIZE]
                .copy_from_slice(&self.values[src..src + PATCH_SIZE]);
        }
        out
    }
}

/// Renderer settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderConfig {
    pub max_range_mm: f64,
    /// Rays start this far behind the sensor plane; surface found between the
    /// ray origin and the sensor plane counts as contact (depth 0).
    pub backoff_mm: f64,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            max_range_mm: DEFAULT_MAX_RANGE_MM,
            backoff_mm: 10.0,
        }
    }
}

impl RenderConfig {
    pub fn with_max_range(max_range_mm: f64) -> Self {
        RenderConfig {
            max_range_mm,
            ..RenderConfig::default()
        }
    }
}

/// Orthographic depth render of the sensor footprint: one ray per cell center
/// along the sensor's −z axis.
pub fn render_patch<C: RayCaster + ?Sized>(surface: &C, contact_pose: &Pose, cfg: &RenderConfig) -> DepthPatch {
    let x = contact_pose.x_axis();
    let y = contact_pose.y_axis();
    let z = contact_pose.z_axis();
    let backoff = cfg.backoff_mm * 1e-3;
    let t_max = backoff + cfg.max_range_mm * 1e-3;
    let max_range = cfg.max_range_mm as f32;
    let mut patch = DepthPatch::all_miss(max_range, *contact_pose);
    for i in 0..PATCH_CELLS {
        let (u, v) = cell_offset_mm(i);
        let origin = contact_pose.translation + x * (u * 1e-3) + y * (v * 1e-3) + z * backoff;
        if let Some(hit) = surface.cast_ray(origin, -z, t_max) {
            let depth_mm = ((hit.t - backoff) * 1e3).clamp(0.0, cfg.max_range_mm);
            patch.values[i] = depth_mm as f32;
            patch.valid[i] = true;
        }
    }
    patch
}

/// Subtracts the mean of the lowest 29 valid depths and maps a 3 mm span onto
/// `[0, 1]`, clamping outside it. Invalid cells become 1.
pub fn normalize_patch(patch: &DepthPatch) -> Result<NormalizedPatch, PatchError> {
    let mut valid: Vec<f64> = patch
        .values
        .iter()
        .zip(patch.valid.iter())
        .filter(|(_, &ok)| ok)
        .map(|(&v, _)| v as f64)
        .collect();
    if valid.is_empty() {
        return Err(PatchError::AllInvalid);
    }
    valid.sort_unstable_by(f64::total_cmp);
    let k = FLOOR_CELLS.min(valid.len());
    let floor = valid[..k].iter().sum::<f64>() / k as f64;
    let mut values = [1.0; PATCH_CELLS];
    for (i, out) in values.iter_mut().enumerate() {
        if patch.valid[i] {
            *out = ((patch.values[i] as f64 - floor) / NORMALIZATION_RANGE_MM).clamp(0.0, 1.0);
        }
    }
    Ok(NormalizedPatch {
        values,
        floor_mm: floor,
    })
}

/// Like [`normalize_patch`], but an all-invalid patch maps to [`NormalizedPatch::far`].
pub fn normalize_or_far(patch: &DepthPatch) -> NormalizedPatch {
    normalize_patch(patch).unwrap_or_else(|_| NormalizedPatch::far())
}

/// Emulated depth-camera artifacts applied to clean renders.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeConfig {
    pub noise_sd_mm: f64,
    pub blur_radius_cells: u32,
    pub dropout_prob: f64,
}

impl Default for DegradeConfig {
    fn default() -> Self {
        DegradeConfig {
            noise_sd_mm: 0.2,
            blur_radius_cells: 1,
            dropout_prob: 0.05,
        }
    }
}

impl DegradeConfig {
    pub const NONE: DegradeConfig = DegradeConfig {
        noise_sd_mm: 0.0,
        blur_radius_cells: 0,
        dropout_prob: 0.0,
    };

    pub fn is_valid(&self) -> bool {
        self.noise_sd_mm >= 0.0 && (0.0..1.0).contains(&self.dropout_prob)
    }
}

/// Adds Gaussian depth noise, box-blurs valid cells, then drops cells.
///
/// Consumes a fixed number of random draws per enabled stage, so a given seed
/// reproduces the output bit for bit.
pub fn degrade_patch<R: Rng + ?Sized>(patch: &DepthPatch, rng: &mut R, cfg: &DegradeConfig) -> DepthPatch {
    debug_assert!(cfg.is_valid());
    let max = patch.max_range_mm as f64;
    let mut depth: Vec<f64> = patch.values.iter().map(|&v| v as f64).collect();
    let mut valid = patch.valid;

    if cfg.noise_sd_mm > 0.0 {
        for (d, ok) in depth.iter_mut().zip(valid.iter()) {
            let n: f64 = StandardNormal.sample(rng);
            if *ok {
                *d = (*d + cfg.noise_sd_mm * n).clamp(0.0, max);
            }
        }
    }

    let r = cfg.blur_radius_cells as isize;
    if r > 0 {
        let src = depth.clone();
        for row in 0..PATCH_SIZE as isize {
            for col in 0..PATCH_SIZE as isize {
                let i = (row * PATCH_SIZE as isize + col) as usize;
                if !valid[i] {
                    continue;
                }
                let (mut sum, mut count) = (0.0, 0usize);
                for dr in -r..=r {
                    for dc in -r..=r {
                        let (rr, cc) = (row + dr, col + dc);
                        if rr < 0 || cc < 0 || rr >= PATCH_SIZE as isize || cc >= PATCH_SIZE as isize {
                            continue;
                        }
                        let j = (rr * PATCH_SIZE as isize + cc) as usize;
                        if valid[j] {
                            sum += src[j];
                            count += 1;
                        }
                    }
                }
                depth[i] = sum / count as f64;
            }
        }
    }

    if cfg.dropout_prob > 0.0 {
        for ok in valid.iter_mut() {
            let u: f64 = rng.random();
            if u < cfg.dropout_prob {
                *ok = false;
            }
        }
    }

    let mut out = patch.clone();
    for i in 0..PATCH_CELLS {
        out.valid[i] = valid[i];
        out.values[i] = if valid[i] { depth[i] as f32 } else { patch.max_range_mm };
    }
    out
}

/// Camera model for depth images. Camera frame: x right, y down, z forward.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Intrinsics {
    Pinhole { fx: f64, fy: f64, cx: f64, cy: f64 },
    /// Parallel projection; pixel = `(x·s + cx, y·s + cy)`.
    Orthographic { pixels_per_meter: f64, cx: f64, cy: f64 },
}

impl Intrinsics {
    /// Pixel coordinates of a camera-frame point, or `None` when it is behind
    /// a perspective camera.
    pub fn project(&self, p: Vec3) -> Option<(f64, f64)> {
        match *self {
            Intrinsics::Pinhole { fx, fy, cx, cy } => {
                (p.z > 0.0).then(|| (fx * p.x / p.z + cx, fy * p.y / p.z + cy))
            }
            Intrinsics::Orthographic {
                pixels_per_meter,
                cx,
                cy,
            } => Some((p.x * pixels_per_meter + cx, p.y * pixels_per_meter + cy)),
        }
    }

    /// Camera-frame point at pixel `(x, y)` with depth `z` along the optical axis.
    pub fn back_project(&self, x: f64, y: f64, z: f64) -> Vec3 {
        match *self {
            Intrinsics::Pinhole { fx, fy, cx, cy } => Vec3::new((x - cx) / fx * z, (y - cy) / fy * z, z),
            Intrinsics::Orthographic {
                pixels_per_meter,
                cx,
                cy,
            } => Vec3::new((x - cx) / pixels_per_meter, (y - cy) / pixels_per_meter, z),
        }
    }

    /// Camera-frame ray through pixel `(x, y)`: origin and unit direction.
    pub fn pixel_ray(&self, x: f64, y: f64) -> (Vec3, Vec3) {
        match *self {
            Intrinsics::Pinhole { .. } => (Vec3::ZERO, self.back_project(x, y, 1.0).normalize()),
            Intrinsics::Orthographic { .. } => (self.back_project(x, y, 0.0), Vec3::Z),
        }
    }
}

/// Row-major depth image in meters along the optical axis; non-positive or
/// non-finite pixels are missing.
#[derive(Clone, Debug, PartialEq)]
pub struct DepthImage {
    pub width: usize,
    pub height: usize,
    pub depth_m: Vec<f64>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, depth_m: Vec<f64>) -> Result<Self, PatchError> {
        if depth_m.len() != width * height {
            return Err(PatchError::ImageSizeMismatch {
                expected: width * height,
                actual: depth_m.len(),
            });
        }
        Ok(DepthImage { width, height, depth_m })
    }

    #[inline]
    fn at(&self, x: usize, y: usize) -> Option<f64> {
        let d = self.depth_m[y * self.width + x];
        (d > 0.0 && d.is_finite()).then_some(d)
    }

    /// Bilinear sample at continuous pixel coordinates; missing neighbors with
    /// non-zero weight make the sample missing.
    pub fn bilinear(&self, x: f64, y: f64) -> Option<f64> {
        if !(x >= 0.0 && y >= 0.0 && x <= (self.width - 1) as f64 && y <= (self.height - 1) as f64) {
            return None;
        }
        let x0 = (crate::math::floor(x) as usize).min(self.width - 1);
        let y0 = (crate::math::floor(y) as usize).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let mut acc = 0.0;
        for (px, py, w) in [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x1, y0, fx * (1.0 - fy)),
            (x0, y1, (1.0 - fx) * fy),
            (x1, y1, fx * fy),
        ] {
            if w == 0.0 {
                continue;
            }
            acc += w * self.at(px, py)?;
        }
        Some(acc)
    }
}

/// Synthesizes a depth image of `surface` seen from `camera_pose` (camera to world).
pub fn render_depth_image<C: RayCaster + ?Sized>(
    surface: &C,
    intrinsics: &Intrinsics,
    camera_pose: &Pose,
    width: usize,
    height: usize,
    max_depth_m: f64,
) -> DepthImage {
    let mut depth_m = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let (o, d) = intrinsics.pixel_ray(x as f64, y as f64);
            let origin = camera_pose.transform_point(o);
            let dir = camera_pose.transform_vector(d);
            if let Some(hit) = surface.cast_ray(origin, dir, max_depth_m / d.z) {
                // Depth along the optical axis.
                depth_m[y * width + x] = o.z + hit.t * d.z;
            }
        }
    }
    DepthImage {
        width,
        height,
        depth_m,
    }
}

/// Solves the 3×3 homography mapping four source points onto four targets.
fn homography(src: &[(f64, f64); 4], dst: &[(f64, f64); 4]) -> [f64; 9] {
    let mut a = [[0.0f64; 9]; 8];
    for k in 0..4 {
        let (x, y) = src[k];
        let (u, v) = dst[k];
        a[2 * k] = [x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y, u];
        a[2 * k + 1] = [0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y, v];
    }
    // Gaussian elimination with partial pivoting on the augmented 8×9 system.
    for col in 0..8 {
        let pivot = (col..8)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        let p = a[col][col];
        for j in col..9 {
            a[col][j] /= p;
        }
        for i in 0..8 {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in col..9 {
                        a[i][j] -= f * a[col][j];
                    }
                }
            }
        }
    }
    let mut h = [0.0; 9];
    for i in 0..8 {
        h[i] = a[i][8];
    }
    h[8] = 1.0;
    h
}

#[inline]
fn apply_homography(h: &[f64; 9], x: f64, y: f64) -> (f64, f64) {
    let w = h[6] * x + h[7] * y + h[8];
    ((h[0] * x + h[1] * y + h[2]) / w, (h[3] * x + h[4] * y + h[5]) / w)
}

/// Cuts the sensor footprint out of a camera depth image.
///
/// The footprint corners are projected into the image through the camera-from-
/// sensor transform `camera_pose⁻¹ · touch_pose`; the enclosed quadrilateral
/// is warped onto the 17×17 grid with a homography and bilinear sampling, and
/// every sample is converted to depth along the sensor's −z axis.
pub fn extract_patch_from_depth_image(
    image: &DepthImage,
    intrinsics: &Intrinsics,
    camera_pose: &Pose,
    touch_pose: &Pose,
    max_range_mm: f64,
) -> Result<DepthPatch, PatchError> {
    let cam_from_sensor = camera_pose.inverse().compose(touch_pose);
    let sensor_from_cam = cam_from_sensor.inverse();
    let h = HALF_FOOTPRINT_MM;
    let src = [(-h, -h), (h, -h), (h, h), (-h, h)];
    let mut dst = [(0.0, 0.0); 4];
    for (k, &(u, v)) in src.iter().enumerate() {
        let p = cam_from_sensor.transform_point(Vec3::new(u * 1e-3, v * 1e-3, 0.0));
        let (x, y) = intrinsics.project(p).ok_or(PatchError::BehindCamera)?;
        if !(x >= 0.0 && y >= 0.0 && x <= (image.width - 1) as f64 && y <= (image.height - 1) as f64) {
            return Err(PatchError::CornerOutsideImage { corner: k, x, y });
        }
        dst[k] = (x, y);
    }
    let hom = homography(&src, &dst);

    let mut patch = DepthPatch::all_miss(max_range_mm as f32, *touch_pose);
    for i in 0..PATCH_CELLS {
        let (u, v) = cell_offset_mm(i);
        let (x, y) = apply_homography(&hom, u, v);
        let Some(z) = image.bilinear(x, y) else {
            continue;
        };
        let p_sensor = sensor_from_cam.transform_point(intrinsics.back_project(x, y, z));
        let depth_mm = -p_sensor.z * 1e3;
        if depth_mm <= max_range_mm {
            patch.values[i] = depth_mm.max(0.0) as f32;
            patch.valid[i] = true;
        }
    }
    Ok(patch)
}
