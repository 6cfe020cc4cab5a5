use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::net::Trace;
use super::*;
use crate::math::{cos, sqrt};
use crate::oracle::{TactileReading, READING_DIM};
use crate::patch::{NormalizedPatch, PATCH_CELLS};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adaptive-moment optimizer state.
#[derive(Clone, Debug)]
pub struct Adam {
    cfg: AdamConfig,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig, len: usize) -> Self {
        Adam {
            cfg,
            m: alloc::vec![0.0; len],
            v: alloc::vec![0.0; len],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let AdamConfig { beta1, beta2, epsilon } = self.cfg;
        let c1 = 1.0 - crate::math::powi(beta1, self.t);
        let c2 = 1.0 - crate::math::powi(beta2, self.t);
        for i in 0..params.len() {
            let g = grad[i];
            self.m[i] = beta1 * self.m[i] + (1.0 - beta1) * g;
            self.v[i] = beta2 * self.v[i] + (1.0 - beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            params[i] -= lr * m_hat / (sqrt(v_hat) + epsilon);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Half-cosine decay from the base rate to zero over all steps.
    Cosine,
}

/// How targets are presented to the optimizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetScaling {
    Raw,
    /// Per-component zero mean and unit variance over the training targets;
    /// the affine map is folded into the output layer of returned params.
    Standardize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    pub schedule: LrSchedule,
    pub target_scaling: TargetScaling,
    /// Shift and scale patch values to zero mean and unit variance (one
    /// scalar pair over all training cells), folded into the first layer.
    pub standardize_inputs: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 32,
            epochs: 100,
            seed: 0,
            adam: AdamConfig::default(),
            schedule: LrSchedule::Constant,
            target_scaling: TargetScaling::Standardize,
            standardize_inputs: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), ModelError> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidConfig("learning_rate must be finite and non-negative"));
        }
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch_size must be positive"));
        }
        let a = self.adam;
        if !((0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.epsilon > 0.0) {
            return Err(ModelError::InvalidConfig("adam betas must lie in [0, 1) and epsilon be positive"));
        }
        Ok(())
    }
}

/// Losses after an epoch, in target units. Epoch 0 is the untrained network.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Optimizer steps taken so far.
    pub step: usize,
    pub train_mse: f64,
    pub val_mse: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub history: Vec<EpochLoss>,
    /// Epoch whose parameters were returned.
    pub selected_epoch: usize,
}

struct Scaling {
    mean: [f64; READING_DIM],
    sd: [f64; READING_DIM],
    input_mean: f64,
    input_sd: f64,
}

impl Scaling {
    fn fit(data: &[(NormalizedPatch, TactileReading)], cfg: &TrainConfig) -> Self {
        let mut s = Scaling {
            mean: [0.0; READING_DIM],
            sd: [1.0; READING_DIM],
            input_mean: 0.0,
            input_sd: 1.0,
        };
        let n = data.len() as f64;
        if cfg.standardize_inputs {
            let cells = n * PATCH_CELLS as f64;
            let mean = data.iter().flat_map(|(p, _)| p.values.iter()).sum::<f64>() / cells;
            let var = data
                .iter()
                .flat_map(|(p, _)| p.values.iter())
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / cells;
            if var > 1e-24 {
                s.input_mean = mean;
                s.input_sd = sqrt(var);
            }
        }
        if cfg.target_scaling == TargetScaling::Raw {
            return s;
        }
        for m in 0..READING_DIM {
            let mean = data.iter().map(|(_, t)| t[m]).sum::<f64>() / n;
            let var = data.iter().map(|(_, t)| (t[m] - mean) * (t[m] - mean)).sum::<f64>() / n;
            s.mean[m] = mean;
            s.sd[m] = if var > 1e-24 { sqrt(var) } else { 1.0 };
        }
        s
    }

    fn scale(&self, t: &TactileReading) -> [f64; READING_DIM] {
        let mut out = [0.0; READING_DIM];
        for m in 0..READING_DIM {
            out[m] = (t[m] - self.mean[m]) / self.sd[m];
        }
        out
    }

    fn scale_input(&self, x: &[f64; PATCH_CELLS]) -> [f64; PATCH_CELLS] {
        let mut out = *x;
        for v in out.iter_mut() {
            *v = (*v - self.input_mean) / self.input_sd;
        }
        out
    }

    /// Params acting on raw patches and producing target units, from params
    /// trained on scaled inputs and targets.
    fn fold(&self, p: &NetworkParams) -> NetworkParams {
        let mut out = p.clone();
        let k = KERNEL * KERNEL;
        for f in 0..CONV1_CHANNELS {
            let w = &mut out.tensor_mut(CONV1_W)[f * k..(f + 1) * k];
            let mut sum = 0.0;
            for v in w.iter_mut() {
                sum += *v;
                *v /= self.input_sd;
            }
            out.tensor_mut(CONV1_B)[f] -= self.input_mean / self.input_sd * sum;
        }
        let w = out.tensor_mut(OUTPUT_W);
        for m in 0..READING_DIM {
            for v in &mut w[m * HIDDEN..(m + 1) * HIDDEN] {
                *v *= self.sd[m];
            }
        }
        let b = out.tensor_mut(OUTPUT_B);
        for m in 0..READING_DIM {
            b[m] = b[m] * self.sd[m] + self.mean[m];
        }
        out
    }
}

fn dataset_mse(params: &NetworkParams, data: &[(NormalizedPatch, TactileReading)]) -> f64 {
    data.iter()
        .map(|(p, t)| mse_loss(&forward(params, p), t))
        .sum::<f64>()
        / data.len() as f64
}

/// Network the optimizer starts from, expressed in target units.
pub fn initial_params(train_set: &[(NormalizedPatch, TactileReading)], cfg: &TrainConfig) -> Result<NetworkParams, ModelError> {
    if train_set.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    Ok(Scaling::fit(train_set, cfg).fold(&NetworkParams::init(cfg.seed)))
}

/// Mini-batch Adam on the mean squared error.
///
/// The data order is reshuffled every epoch from `cfg.seed`. With a
/// validation set the params of the epoch with the lowest validation loss are
/// returned, otherwise the final params. Runs are bit-reproducible per seed.
pub fn train(
    train_set: &[(NormalizedPatch, TactileReading)],
    validation: Option<&[(NormalizedPatch, TactileReading)]>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome, ModelError> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let validation = validation.filter(|v| !v.is_empty());
    let scaling = Scaling::fit(train_set, cfg);
    let targets: Vec<[f64; READING_DIM]> = train_set.iter().map(|(_, t)| scaling.scale(t)).collect();
    let inputs: Vec<[f64; PATCH_CELLS]> = train_set.iter().map(|(p, _)| scaling.scale_input(&p.values)).collect();

    let mut params = NetworkParams::init(cfg.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5348_5546_464c_4521);
    let mut adam = Adam::new(cfg.adam, PARAM_COUNT);
    let mut grad = NetworkParams::zeros();
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let batches_per_epoch = train_set.len().div_ceil(cfg.batch_size);
    let total_steps = (batches_per_epoch * cfg.epochs).max(1);

    let evaluate = |p: &NetworkParams, epoch: usize, step: usize| -> (NetworkParams, EpochLoss) {
        let folded = scaling.fold(p);
        let loss = EpochLoss {
            epoch,
            step,
            train_mse: dataset_mse(&folded, train_set),
            val_mse: validation.map(|v| dataset_mse(&folded, v)),
        };
        (folded, loss)
    };

    let (mut best_params, first) = evaluate(&params, 0, 0);
    let mut best_val = first.val_mse.unwrap_or(f64::INFINITY);
    let mut selected_epoch = 0;
    let mut history = alloc::vec![first];
    let mut trace: Option<Trace> = None;
    let mut step = 0usize;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(cfg.batch_size) {
            grad.fill(0.0);
            let inv = 1.0 / batch.len() as f64;
            let mut batch_loss = 0.0;
            for &i in batch {
                let x = &inputs[i];
                let tr = match trace.as_mut() {
                    Some(tr) => {
                        tr.run(&params, x);
                        tr
                    }
                    None => trace.insert(Trace::new(&params, x)),
                };
                let mut d_out = [0.0; READING_DIM];
                for m in 0..READING_DIM {
                    let r = tr.output[m] - targets[i][m];
                    batch_loss += r * r;
                    d_out[m] = 2.0 * r * inv / READING_DIM as f64;
                }
                tr.accumulate_gradient(&params, x, &d_out, &mut grad);
            }
            if !batch_loss.is_finite() {
                return Err(ModelError::NonFiniteLoss { epoch, step });
            }
            let lr = match cfg.schedule {
                LrSchedule::Constant => cfg.learning_rate,
                LrSchedule::Cosine => {
                    cfg.learning_rate * 0.5 * (1.0 + cos(core::f64::consts::PI * step as f64 / total_steps as f64))
                }
            };
            adam.step(params.as_mut_slice(), grad.as_slice(), lr);
            step += 1;
        }
        let (folded, loss) = evaluate(&params, epoch, step);
        if !loss.train_mse.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch, step });
        }
        history.push(loss);
        match loss.val_mse {
            Some(v) if v < best_val => {
                best_val = v;
                best_params = folded;
                selected_epoch = epoch;
            }
            Some(_) => {}
            None => {
                best_params = folded;
                selected_epoch = epoch;
            }
        }
    }

    Ok(TrainOutcome {
        params: best_params,
        history,
        selected_epoch,
    })
}
