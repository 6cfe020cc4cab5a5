//! The patch-to-reading network.
//!
//! Architecture: 3×3 conv (8 channels, stride 1, 17→15), ReLU, 3×3 conv
//! (16 channels, stride 2, 15→7), ReLU, global average pool (16), dense 64
//! with ReLU, dense 15 linear output.

mod net;
mod train;

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use net::{backward, forward, mse_loss, predict, Trace};
pub use train::{initial_params, train, Adam, AdamConfig, EpochLoss, LrSchedule, TargetScaling, TrainConfig, TrainOutcome};

pub const CONV1_CHANNELS: usize = 8;
pub const CONV2_CHANNELS: usize = 16;
pub const HIDDEN: usize = 64;
pub const KERNEL: usize = 3;
/// Side of the conv1 feature map.
pub const MAP1: usize = 15;
/// Side of the conv2 feature map.
pub const MAP2: usize = 7;

/// A contiguous parameter tensor within the flat vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: &'static str,
    pub offset: usize,
    pub shape: &'static [usize],
}

impl TensorSpec {
    pub const fn len(&self) -> usize {
        let mut n = 1;
        let mut i = 0;
        while i < self.shape.len() {
            n *= self.shape[i];
            i += 1;
        }
        n
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub const fn end(&self) -> usize {
        self.offset + self.len()
    }
}

pub const CONV1_W: TensorSpec = TensorSpec { name: "conv1.weight", offset: 0, shape: &[CONV1_CHANNELS, KERNEL, KERNEL] };
pub const CONV1_B: TensorSpec = TensorSpec { name: "conv1.bias", offset: CONV1_W.end(), shape: &[CONV1_CHANNELS] };
pub const CONV2_W: TensorSpec = TensorSpec {
    name: "conv2.weight",
    offset: CONV1_B.end(),
    shape: &[CONV2_CHANNELS, CONV1_CHANNELS, KERNEL, KERNEL],
};
pub const CONV2_B: TensorSpec = TensorSpec { name: "conv2.bias", offset: CONV2_W.end(), shape: &[CONV2_CHANNELS] };
pub const HIDDEN_W: TensorSpec = TensorSpec { name: "hidden.weight", offset: CONV2_B.end(), shape: &[HIDDEN, CONV2_CHANNELS] };
pub const HIDDEN_B: TensorSpec = TensorSpec { name: "hidden.bias", offset: HIDDEN_W.end(), shape: &[HIDDEN] };
pub const OUTPUT_W: TensorSpec = TensorSpec {
    name: "output.weight",
    offset: HIDDEN_B.end(),
    shape: &[crate::oracle::READING_DIM, HIDDEN],
};
pub const OUTPUT_B: TensorSpec = TensorSpec { name: "output.bias", offset: OUTPUT_W.end(), shape: &[crate::oracle::READING_DIM] };

/// Tensors in storage order.
pub const TENSORS: [TensorSpec; 8] = [CONV1_W, CONV1_B, CONV2_W, CONV2_B, HIDDEN_W, HIDDEN_B, OUTPUT_W, OUTPUT_B];
pub const PARAM_COUNT: usize = OUTPUT_B.end();

const _: () = assert!(PARAM_COUNT == 3311);

#[derive(Clone, Debug, PartialEq)]
pub enum ModelError {
    ShapeMismatch { expected: usize, actual: usize },
    NonFiniteParameter(usize),
    EmptyDataset,
    InvalidConfig(&'static str),
    NonFiniteLoss { epoch: usize, step: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::ShapeMismatch { expected, actual } => {
                write!(f, "expected {expected} parameters, got {actual}")
            }
            ModelError::NonFiniteParameter(i) => write!(f, "parameter {i} is not finite"),
            ModelError::EmptyDataset => write!(f, "training set is empty"),
            ModelError::InvalidConfig(what) => write!(f, "invalid training config: {what}"),
            ModelError::NonFiniteLoss { epoch, step } => {
                write!(f, "loss became non-finite at epoch {epoch}, step {step}")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// All network weights as one flat vector laid out per [`TENSORS`].
///
/// Gradients use the same type and layout.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkParams {
    data: Vec<f64>,
}

impl NetworkParams {
    pub fn zeros() -> Self {
        NetworkParams {
            data: vec![0.0; PARAM_COUNT],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Self, ModelError> {
        if data.len() != PARAM_COUNT {
            return Err(ModelError::ShapeMismatch {
                expected: PARAM_COUNT,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteParameter(i));
        }
        Ok(NetworkParams { data })
    }

    /// Uniform fan-in scaled initialization: weights in `±√(6/fan_in)`,
    /// biases in `±1/√fan_in`.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = Self::zeros();
        let layers = [(CONV1_W, CONV1_B, 9), (CONV2_W, CONV2_B, 72), (HIDDEN_W, HIDDEN_B, 16), (OUTPUT_W, OUTPUT_B, 64)];
        for (w, b, fan_in) in layers {
            let fan_in = fan_in as f64;
            let wl = crate::math::sqrt(6.0 / fan_in);
            for v in p.tensor_mut(w) {
                *v = rng.random_range(-wl..wl);
            }
            let bl = 1.0 / crate::math::sqrt(fan_in);
            for v in p.tensor_mut(b) {
                *v = rng.random_range(-bl..bl);
            }
        }
        p
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn tensor(&self, t: TensorSpec) -> &[f64] {
        &self.data[t.offset..t.end()]
    }

    pub fn tensor_mut(&mut self, t: TensorSpec) -> &mut [f64] {
        &mut self.data[t.offset..t.end()]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self += k · other`.
    pub fn add_scaled(&mut self, other: &NetworkParams, k: f64) {
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += k * b;
        }
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }
}
