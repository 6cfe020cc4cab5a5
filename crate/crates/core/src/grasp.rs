//! Tactile grasp-stability prediction.
//!
//! Virtual depth sensors at both fingertips see the object; the touch
//! predictor turns each patch into a reading, and a small classifier maps the
//! pair of readings to a success probability.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::datasets::{record_rng, record_seed};
use crate::geometry::Bvh;
use crate::math::{cos, exp, ln, sqrt, Mat3, Pose, Vec3};
use crate::model::{Adam, TrainConfig};
use crate::oracle::{TactileReading, READING_DIM};
use crate::patch::{cell_offset_mm, NORMALIZATION_RANGE_MM, normalize_or_far, render_patch, DepthPatch, RenderConfig, PATCH_CELLS};
use crate::recognition::{ObjectSet, TouchPredictor};

pub const DEFAULT_MAX_WIDTH: f64 = 0.08;
pub const INPUT_DIM: usize = 2 * READING_DIM;
pub const GRASP_HIDDEN: usize = 100;
pub const GRASP_PARAM_COUNT: usize = INPUT_DIM * GRASP_HIDDEN + GRASP_HIDDEN + GRASP_HIDDEN * GRASP_HIDDEN + GRASP_HIDDEN + GRASP_HIDDEN + 1;

const _: () = assert!(GRASP_PARAM_COUNT == 13_301);

/// Maximum angle between one contact normal and the reverse of the other.
pub const MAX_OPPOSITION_DEG: f64 = 30.0;
/// Maximum lateral offset of a contact region from the patch center, mm.
pub const MAX_LATERAL_OFFSET_MM: f64 = 6.0;
/// Cells this close to the nearest depth belong to the contact region, mm;
/// the depth range a normalized patch resolves.
pub const CONTACT_BAND_MM: f64 = NORMALIZATION_RANGE_MM;
/// Maximum difference of the two contact depths relative to the width.
pub const MAX_DEPTH_ASYMMETRY: f64 = 0.4;

#[derive(Clone, Debug, PartialEq)]
pub enum GraspError {
    WidthOutOfRange { width: f64, max_width: f64 },
    EmptySplit,
    ShapeMismatch { expected: usize, actual: usize },
    NonFiniteLoss { epoch: usize },
    InvalidConfig(&'static str),
}

impl fmt::Display for GraspError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraspError::WidthOutOfRange { width, max_width } => {
                write!(f, "width {width} m outside (0, {max_width}] m")
            }
            GraspError::EmptySplit => write!(f, "split is empty"),
            GraspError::ShapeMismatch { expected, actual } => {
                write!(f, "expected {expected} parameters, got {actual}")
            }
            GraspError::NonFiniteLoss { epoch } => write!(f, "loss became non-finite at epoch {epoch}"),
            GraspError::InvalidConfig(what) => write!(f, "invalid config: {what}"),
        }
    }
}

impl core::error::Error for GraspError {}

/// Parallel-jaw grasp. Gripper frame: z is the approach direction, x the
/// closing axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grasp {
    pub pose: Pose,
    pub max_width: f64,
}

impl Grasp {
    pub fn new(pose: Pose) -> Self {
        Grasp {
            pose,
            max_width: DEFAULT_MAX_WIDTH,
        }
    }
}

/// Sensor poses of the left (−x) and right (+x) fingertips, each looking
/// along its −z toward the other finger, with sensor y along gripper y.
pub fn fingertip_sensor_poses(grasp: &Grasp, width: f64) -> Result<(Pose, Pose), GraspError> {
    if !(width > 0.0 && width <= grasp.max_width) {
        return Err(GraspError::WidthOutOfRange {
            width,
            max_width: grasp.max_width,
        });
    }
    let h = width / 2.0;
    let left = Pose {
        rotation: Mat3::from_columns(Vec3::Z, Vec3::Y, -Vec3::X),
        translation: Vec3::new(-h, 0.0, 0.0),
    };
    let right = Pose {
        rotation: Mat3::from_columns(-Vec3::Z, Vec3::Y, Vec3::X),
        translation: Vec3::new(h, 0.0, 0.0),
    };
    Ok((grasp.pose.compose(&left), grasp.pose.compose(&right)))
}

/// Renders both fingertip patches with the range capped at the opening width.
pub fn render_finger_patches(bvh: &Bvh, grasp: &Grasp, width: f64) -> Result<(DepthPatch, DepthPatch), GraspError> {
    let (l, r) = fingertip_sensor_poses(grasp, width)?;
    let cfg = RenderConfig::with_max_range(width * 1e3);
    Ok((render_patch(bvh, &l, &cfg), render_patch(bvh, &r, &cfg)))
}

/// Lateral distance from the patch center to the centroid of the cells
/// within [`CONTACT_BAND_MM`] of the nearest valid depth, mm.
fn contact_region_offset_mm(patch: &DepthPatch) -> Option<f64> {
    let min = (0..PATCH_CELLS)
        .filter(|&i| patch.valid[i])
        .map(|i| patch.values[i] as f64)
        .fold(f64::INFINITY, f64::min);
    if !min.is_finite() {
        return None;
    }
    let (mut su, mut sv, mut n) = (0.0, 0.0, 0.0);
    for i in (0..PATCH_CELLS).filter(|&i| patch.valid[i] && patch.values[i] as f64 <= min + CONTACT_BAND_MM) {
        let (u, v) = cell_offset_mm(i);
        su += u;
        sv += v;
        n += 1.0;
    }
    Some(sqrt((su / n) * (su / n) + (sv / n) * (sv / n)))
}

/// Antipodal heuristic. A grasp succeeds when
/// (a) both central fingertip rays hit the outside of the object within the width,
/// (b) the two contact normals are anti-parallel within 30°,
/// (c) both contact regions are centered within 6 mm of their patch, and
/// (d) the contact distances differ by less than 40 % of the width.
pub fn synth_grasp_label(bvh: &Bvh, grasp: &Grasp, width: f64) -> bool {
    let Ok((l, r)) = fingertip_sensor_poses(grasp, width) else {
        return false;
    };
    let mut hits = [(0.0, Vec3::ZERO); 2];
    for (k, pose) in [l, r].iter().enumerate() {
        let dir = -pose.z_axis();
        match bvh.raycast(pose.translation, dir, width) {
            Some(h) if h.normal.dot(dir) < 0.0 => hits[k] = (h.t, h.normal),
            _ => return false,
        }
    }
    if hits[0].1.dot(hits[1].1) > -cos(MAX_OPPOSITION_DEG.to_radians()) {
        return false;
    }
    let Ok((pl, pr)) = render_finger_patches(bvh, grasp, width) else {
        return false;
    };
    for p in [&pl, &pr] {
        match contact_region_offset_mm(p) {
            Some(d) if d <= MAX_LATERAL_OFFSET_MM => {}
            _ => return false,
        }
    }
    (hits[0].0 - hits[1].0).abs() < MAX_DEPTH_ASYMMETRY * width
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraspRecord {
    pub object_id: u32,
    pub grasp: Grasp,
    pub width: f64,
    pub patch_left: DepthPatch,
    pub patch_right: DepthPatch,
    pub reading_left: TactileReading,
    pub reading_right: TactileReading,
    pub label: bool,
}

impl GraspRecord {
    /// Classifier input: left reading then right reading.
    pub fn features(&self) -> [f64; INPUT_DIM] {
        concat_readings(&self.reading_left, &self.reading_right)
    }
}

pub fn concat_readings(left: &TactileReading, right: &TactileReading) -> [f64; INPUT_DIM] {
    let mut x = [0.0; INPUT_DIM];
    x[..READING_DIM].copy_from_slice(&left.0);
    x[READING_DIM..].copy_from_slice(&right.0);
    x
}

/// Predicted readings of both fingertip patches.
pub fn finger_readings<P: TouchPredictor + ?Sized>(predictor: &P, left: &DepthPatch, right: &DepthPatch) -> (TactileReading, TactileReading) {
    (
        predictor.predict_reading(&normalize_or_far(left)),
        predictor.predict_reading(&normalize_or_far(right)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraspDatasetConfig {
    pub per_object_pos: usize,
    pub per_object_neg: usize,
    /// Sampling budget per label quota.
    pub max_attempts: usize,
    pub max_width: f64,
    /// Grasp centers are drawn uniformly in a ball of this many bounding
    /// radii around the object's box center.
    pub position_scale: f64,
    pub seed: u64,
}

impl Default for GraspDatasetConfig {
    fn default() -> Self {
        GraspDatasetConfig {
            per_object_pos: 5,
            per_object_neg: 5,
            max_attempts: 2000,
            max_width: DEFAULT_MAX_WIDTH,
            position_scale: 1.5,
            seed: 0,
        }
    }
}

/// Uniformly random orientation and a center uniform in a ball.
pub fn sample_grasp_pose<R: Rng + ?Sized>(center: Vec3, radius: f64, rng: &mut R) -> Pose {
    let q: [f64; 4] = core::array::from_fn(|_| StandardNormal.sample(rng));
    let rotation = Mat3::from_quaternion(q[0], q[1], q[2], q[3]);
    let dir = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng)).normalize();
    let r = radius * crate::math::cbrt(rng.random::<f64>());
    Pose::new(rotation, center + dir * r)
}

/// Box center of the object and the largest vertex distance from it.
pub fn bounding_sphere(bvh: &Bvh) -> (Vec3, f64) {
    let c = bvh.bounds().center();
    let r = bvh.mesh().vertices().iter().map(|v| (*v - c).norm()).fold(0.0, f64::max);
    (c, r)
}

#[derive(Clone, Debug, Default)]
pub struct GraspDataset {
    pub records: Vec<GraspRecord>,
    /// Objects whose label quota was not reached within the budget.
    pub skipped: Vec<u32>,
}

/// Rejection-samples grasps around one object until both label quotas are
/// filled, or returns `None` when the budget runs out.
pub fn generate_object_grasps<P: TouchPredictor + ?Sized>(
    bvh: &Bvh,
    object_id: u32,
    predictor: &P,
    cfg: &GraspDatasetConfig,
) -> Option<Vec<GraspRecord>> {
    let mut rng = record_rng(record_seed(cfg.seed, object_id as u64), 0);
    let (center, bounding) = bounding_sphere(bvh);
    let radius = cfg.position_scale * bounding;
    let (mut pos, mut neg) = (Vec::new(), Vec::new());
    let budget = cfg.max_attempts * 2;
    for _ in 0..budget {
        if pos.len() >= cfg.per_object_pos && neg.len() >= cfg.per_object_neg {
            break;
        }
        let grasp = Grasp {
            pose: sample_grasp_pose(center, radius, &mut rng),
            max_width: cfg.max_width,
        };
        let label = synth_grasp_label(bvh, &grasp, cfg.max_width);
        let quota = if label { &mut pos } else { &mut neg };
        let limit = if label { cfg.per_object_pos } else { cfg.per_object_neg };
        if quota.len() >= limit {
            continue;
        }
        let (patch_left, patch_right) = render_finger_patches(bvh, &grasp, cfg.max_width).ok()?;
        let (reading_left, reading_right) = finger_readings(predictor, &patch_left, &patch_right);
        quota.push(GraspRecord {
            object_id,
            grasp,
            width: cfg.max_width,
            patch_left,
            patch_right,
            reading_left,
            reading_right,
            label,
        });
    }
    if pos.len() < cfg.per_object_pos || neg.len() < cfg.per_object_neg {
        return None;
    }
    // Interleave so records alternate between labels.
    let mut out = Vec::with_capacity(pos.len() + neg.len());
    let mut pi = pos.into_iter();
    let mut ni = neg.into_iter();
    loop {
        match (pi.next(), ni.next()) {
            (None, None) => break,
            (a, b) => out.extend(a.into_iter().chain(b)),
        }
    }
    Some(out)
}

/// Balanced grasp records for every object of the set.
pub fn generate_grasp_dataset<P: TouchPredictor + ?Sized>(set: &ObjectSet, predictor: &P, cfg: &GraspDatasetConfig) -> GraspDataset {
    let mut out = GraspDataset::default();
    for obj in set.objects() {
        match generate_object_grasps(&obj.bvh, obj.id, predictor, cfg) {
            Some(r) => out.records.extend(r),
            None => out.skipped.push(obj.id),
        }
    }
    out
}

/// Classifier weights: 30→100 ReLU, 100→100 ReLU, 100→1 sigmoid.
#[derive(Clone, Debug, PartialEq)]
pub struct GraspNetParams {
    data: Vec<f64>,
}

const W1: usize = 0;
const B1: usize = W1 + INPUT_DIM * GRASP_HIDDEN;
const W2: usize = B1 + GRASP_HIDDEN;
const B2: usize = W2 + GRASP_HIDDEN * GRASP_HIDDEN;
const W3: usize = B2 + GRASP_HIDDEN;
const B3: usize = W3 + GRASP_HIDDEN;

/// Tensor names, offsets and shapes in storage order.
pub const GRASP_TENSORS: [(&str, usize, &[usize]); 6] = [
    ("layer1.weight", W1, &[GRASP_HIDDEN, INPUT_DIM]),
    ("layer1.bias", B1, &[GRASP_HIDDEN]),
    ("layer2.weight", W2, &[GRASP_HIDDEN, GRASP_HIDDEN]),
    ("layer2.bias", B2, &[GRASP_HIDDEN]),
    ("output.weight", W3, &[1, GRASP_HIDDEN]),
    ("output.bias", B3, &[1]),
];

impl GraspNetParams {
    pub fn zeros() -> Self {
        GraspNetParams {
            data: vec![0.0; GRASP_PARAM_COUNT],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Self, GraspError> {
        if data.len() != GRASP_PARAM_COUNT {
            return Err(GraspError::ShapeMismatch {
                expected: GRASP_PARAM_COUNT,
                actual: data.len(),
            });
        }
        Ok(GraspNetParams { data })
    }

    /// Same fan-in scaled uniform initialization as the touch network.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros();
        for (w, b, fan_in) in [(W1, B1, INPUT_DIM), (W2, B2, GRASP_HIDDEN), (W3, B3, GRASP_HIDDEN)] {
            let wl = sqrt(6.0 / fan_in as f64);
            for v in &mut p.data[w..b] {
                *v = rng.random_range(-wl..wl);
            }
            let bl = 1.0 / sqrt(fan_in as f64);
            let n_out = (b - w) / fan_in;
            for v in &mut p.data[b..b + n_out] {
                *v = rng.random_range(-bl..bl);
            }
        }
        p
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Success score in `[0, 1]`.
    pub fn score(&self, x: &[f64; INPUT_DIM]) -> f64 {
        sigmoid(self.logit_trace(x).2)
    }

    fn logit_trace(&self, x: &[f64; INPUT_DIM]) -> ([f64; GRASP_HIDDEN], [f64; GRASP_HIDDEN], f64) {
        let d = &self.data;
        let mut z1 = [0.0; GRASP_HIDDEN];
        for (k, z) in z1.iter_mut().enumerate() {
            let row = &d[W1 + k * INPUT_DIM..W1 + (k + 1) * INPUT_DIM];
            *z = d[B1 + k] + row.iter().zip(x.iter()).map(|(w, v)| w * v).sum::<f64>();
        }
        let mut z2 = [0.0; GRASP_HIDDEN];
        for (k, z) in z2.iter_mut().enumerate() {
            let row = &d[W2 + k * GRASP_HIDDEN..W2 + (k + 1) * GRASP_HIDDEN];
            *z = d[B2 + k] + row.iter().zip(z1.iter()).map(|(w, &v)| w * v.max(0.0)).sum::<f64>();
        }
        let logit = d[B3] + d[W3..B3].iter().zip(z2.iter()).map(|(w, &v)| w * v.max(0.0)).sum::<f64>();
        (z1, z2, logit)
    }

    /// Adds the gradient of the cross-entropy at `x` scaled by `k` to `grad`;
    /// returns the loss.
    fn accumulate(&self, x: &[f64; INPUT_DIM], label: bool, k: f64, grad: &mut [f64]) -> f64 {
        let (z1, z2, logit) = self.logit_trace(x);
        let y = if label { 1.0 } else { 0.0 };
        let d_logit = (sigmoid(logit) - y) * k;
        let d = &self.data;
        grad[B3] += d_logit;
        let mut d_z2 = [0.0; GRASP_HIDDEN];
        for j in 0..GRASP_HIDDEN {
            grad[W3 + j] += d_logit * z2[j].max(0.0);
            if z2[j] > 0.0 {
                d_z2[j] = d_logit * d[W3 + j];
            }
        }
        let mut d_z1 = [0.0; GRASP_HIDDEN];
        for j in 0..GRASP_HIDDEN {
            if d_z2[j] == 0.0 {
                continue;
            }
            grad[B2 + j] += d_z2[j];
            for i in 0..GRASP_HIDDEN {
                grad[W2 + j * GRASP_HIDDEN + i] += d_z2[j] * z1[i].max(0.0);
                if z1[i] > 0.0 {
                    d_z1[i] += d_z2[j] * d[W2 + j * GRASP_HIDDEN + i];
                }
            }
        }
        for i in 0..GRASP_HIDDEN {
            if d_z1[i] == 0.0 {
                continue;
            }
            grad[B1 + i] += d_z1[i];
            for (g, v) in grad[W1 + i * INPUT_DIM..W1 + (i + 1) * INPUT_DIM].iter_mut().zip(x.iter()) {
                *g += d_z1[i] * v;
            }
        }
        bce_from_logit(logit, label)
    }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + exp(-z))
    } else {
        let e = exp(z);
        e / (1.0 + e)
    }
}

/// Binary cross-entropy of `sigmoid(logit)`, computed stably.
pub fn bce_from_logit(logit: f64, label: bool) -> f64 {
    // −log σ(z) = softplus(−z); −log(1 − σ(z)) = softplus(z).
    let z = if label { -logit } else { logit };
    z.max(0.0) + ln(1.0 + exp(-z.abs()))
}

/// Classifier example: input features and label.
pub type GraspSample = ([f64; INPUT_DIM], bool);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraspEpoch {
    pub epoch: usize,
    pub step: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct GraspTrainOutcome {
    pub params: GraspNetParams,
    pub history: Vec<GraspEpoch>,
    pub selected_epoch: usize,
}

struct InputScaling {
    mean: [f64; INPUT_DIM],
    sd: [f64; INPUT_DIM],
}

impl InputScaling {
    fn fit(data: &[GraspSample], enabled: bool) -> Self {
        let mut s = InputScaling {
            mean: [0.0; INPUT_DIM],
            sd: [1.0; INPUT_DIM],
        };
        if !enabled {
            return s;
        }
        let n = data.len() as f64;
        for j in 0..INPUT_DIM {
            let m = data.iter().map(|(x, _)| x[j]).sum::<f64>() / n;
            let var = data.iter().map(|(x, _)| (x[j] - m) * (x[j] - m)).sum::<f64>() / n;
            s.mean[j] = m;
            s.sd[j] = if var > 1e-24 { sqrt(var) } else { 1.0 };
        }
        s
    }

    fn apply(&self, x: &[f64; INPUT_DIM]) -> [f64; INPUT_DIM] {
        core::array::from_fn(|j| (x[j] - self.mean[j]) / self.sd[j])
    }

    /// Params on raw inputs equivalent to `p` on scaled inputs.
    fn fold(&self, p: &GraspNetParams) -> GraspNetParams {
        let mut out = p.clone();
        for k in 0..GRASP_HIDDEN {
            let mut shift = 0.0;
            for j in 0..INPUT_DIM {
                let w = &mut out.data[W1 + k * INPUT_DIM + j];
                shift += *w * self.mean[j] / self.sd[j];
                *w /= self.sd[j];
            }
            out.data[B1 + k] -= shift;
        }
        out
    }
}

fn loss_and_accuracy(p: &GraspNetParams, data: &[GraspSample]) -> (f64, f64) {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, y) in data {
        let (_, _, logit) = p.logit_trace(x);
        loss += bce_from_logit(logit, *y);
        correct += ((sigmoid(logit) >= 0.5) == *y) as usize;
    }
    (loss / data.len() as f64, correct as f64 / data.len() as f64)
}

/// Mini-batch Adam on the binary cross-entropy, with per-feature input
/// standardization folded into the first layer when
/// `cfg.standardize_inputs` is set. Returns the params with the lowest
/// validation loss when a validation set is given, else the final params.
pub fn train_grasp_classifier(
    train: &[GraspSample],
    validation: Option<&[GraspSample]>,
    cfg: &TrainConfig,
) -> Result<GraspTrainOutcome, GraspError> {
    if train.is_empty() || validation.is_some_and(|v| v.is_empty()) {
        return Err(GraspError::EmptySplit);
    }
    if cfg.batch_size == 0 || !(cfg.learning_rate >= 0.0) {
        return Err(GraspError::InvalidConfig("batch size and learning rate"));
    }
    let scaling = InputScaling::fit(train, cfg.standardize_inputs);
    let inputs: Vec<[f64; INPUT_DIM]> = train.iter().map(|(x, _)| scaling.apply(x)).collect();
    let mut params = GraspNetParams::init(cfg.seed);
    let mut adam = Adam::new(cfg.adam, GRASP_PARAM_COUNT);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x4752_4153_5021);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut grad = vec![0.0; GRASP_PARAM_COUNT];

    let evaluate = |p: &GraspNetParams, epoch: usize, step: usize| {
        let folded = scaling.fold(p);
        let (train_loss, train_accuracy) = loss_and_accuracy(&folded, train);
        let val = validation.map(|v| loss_and_accuracy(&folded, v));
        let e = GraspEpoch {
            epoch,
            step,
            train_loss,
            train_accuracy,
            val_loss: val.map(|v| v.0),
            val_accuracy: val.map(|v| v.1),
        };
        (folded, e)
    };
    let (mut best, first) = evaluate(&params, 0, 0);
    let mut best_val = first.val_loss.unwrap_or(f64::INFINITY);
    let mut selected_epoch = 0;
    let mut history = vec![first];
    let mut step = 0;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            let k = 1.0 / batch.len() as f64;
            let mut loss = 0.0;
            for &i in batch {
                loss += params.accumulate(&inputs[i], train[i].1, k, &mut grad);
            }
            if !loss.is_finite() {
                return Err(GraspError::NonFiniteLoss { epoch });
            }
            adam.step(&mut params.data, &grad, cfg.learning_rate);
            step += 1;
        }
        let (folded, e) = evaluate(&params, epoch, step);
        history.push(e);
        match e.val_loss {
            Some(v) if v < best_val => {
                best_val = v;
                best = folded;
                selected_epoch = epoch;
            }
            Some(_) => {}
            None => {
                best = folded;
                selected_epoch = epoch;
            }
        }
    }
    Ok(GraspTrainOutcome {
        params: best,
        history,
        selected_epoch,
    })
}

/// Fraction of samples whose thresholded score (≥ 0.5) matches the label.
pub fn evaluate_grasp_accuracy(params: &GraspNetParams, test: &[GraspSample]) -> Result<f64, GraspError> {
    if test.is_empty() {
        return Err(GraspError::EmptySplit);
    }
    Ok(loss_and_accuracy(params, test).1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_grasp_fingertips() {
        let (l, r) = fingertip_sensor_poses(&Grasp::new(Pose::IDENTITY), 0.04).unwrap();
        assert!((l.translation - Vec3::new(-0.02, 0.0, 0.0)).norm() < 1e-15);
        assert!((r.translation - Vec3::new(0.02, 0.0, 0.0)).norm() < 1e-15);
        // Sensors look along −z: left toward +x, right toward −x.
        assert!((-l.z_axis() - Vec3::X).norm() < 1e-15);
        assert!((-r.z_axis() + Vec3::X).norm() < 1e-15);
        assert!(l.is_valid() && r.is_valid());
        assert!(fingertip_sensor_poses(&Grasp::new(Pose::IDENTITY), 0.09).is_err());
    }

    #[test]
    fn parameter_count() {
        assert_eq!(GraspNetParams::init(0).as_slice().len(), 13_301);
        let (_, last, shape) = GRASP_TENSORS[5];
        assert_eq!(last + shape[0], GRASP_PARAM_COUNT);
    }

    #[test]
    fn bce_is_stable() {
        assert!((bce_from_logit(0.0, true) - core::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_from_logit(-800.0, true) > 799.0);
        assert!(bce_from_logit(800.0, true) < 1e-300 + 1e-12);
    }
}
