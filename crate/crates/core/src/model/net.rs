use super::*;
use crate::oracle::{TactileReading, READING_DIM};
use crate::patch::{NormalizedPatch, PATCH_SIZE};

const N1: usize = CONV1_CHANNELS * MAP1 * MAP1;
const N2: usize = CONV2_CHANNELS * MAP2 * MAP2;
const POOL_SCALE: f64 = 1.0 / (MAP2 * MAP2) as f64;

/// Pre-activations and pooled features of one forward pass.
#[derive(Clone, Debug)]
pub struct Trace {
    pub z1: [f64; N1],
    pub z2: [f64; N2],
    pub pooled: [f64; CONV2_CHANNELS],
    pub zh: [f64; HIDDEN],
    pub output: [f64; READING_DIM],
}

#[inline]
fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

impl Trace {
    pub fn new(params: &NetworkParams, input: &[f64; PATCH_SIZE * PATCH_SIZE]) -> Self {
        let mut t = Trace {
            z1: [0.0; N1],
            z2: [0.0; N2],
            pooled: [0.0; CONV2_CHANNELS],
            zh: [0.0; HIDDEN],
            output: [0.0; READING_DIM],
        };
        t.run(params, input);
        t
    }

    /// Recomputes the trace in place.
    pub fn run(&mut self, params: &NetworkParams, x: &[f64; PATCH_SIZE * PATCH_SIZE]) {
        let w1 = params.tensor(CONV1_W);
        let b1 = params.tensor(CONV1_B);
        for f in 0..CONV1_CHANNELS {
            let w = &w1[f * 9..f * 9 + 9];
            for i in 0..MAP1 {
                for j in 0..MAP1 {
                    let mut s = b1[f];
                    for ki in 0..KERNEL {
                        let row = (i + ki) * PATCH_SIZE + j;
                        s += w[ki * 3] * x[row] + w[ki * 3 + 1] * x[row + 1] + w[ki * 3 + 2] * x[row + 2];
                    }
                    self.z1[f * MAP1 * MAP1 + i * MAP1 + j] = s;
                }
            }
        }

        let mut a1 = [0.0; N1];
        for (a, &z) in a1.iter_mut().zip(self.z1.iter()) {
            *a = relu(z);
        }

        let w2 = params.tensor(CONV2_W);
        let b2 = params.tensor(CONV2_B);
        for o in 0..CONV2_CHANNELS {
            let mut pool = 0.0;
            for i in 0..MAP2 {
                for j in 0..MAP2 {
                    let mut s = b2[o];
                    for c in 0..CONV1_CHANNELS {
                        let w = &w2[o * 72 + c * 9..o * 72 + c * 9 + 9];
                        let base = c * MAP1 * MAP1;
                        for ki in 0..KERNEL {
                            let row = base + (2 * i + ki) * MAP1 + 2 * j;
                            s += w[ki * 3] * a1[row] + w[ki * 3 + 1] * a1[row + 1] + w[ki * 3 + 2] * a1[row + 2];
                        }
                    }
                    self.z2[o * MAP2 * MAP2 + i * MAP2 + j] = s;
                    pool += relu(s);
                }
            }
            self.pooled[o] = pool * POOL_SCALE;
        }

        let wh = params.tensor(HIDDEN_W);
        let bh = params.tensor(HIDDEN_B);
        for k in 0..HIDDEN {
            let row = &wh[k * CONV2_CHANNELS..(k + 1) * CONV2_CHANNELS];
            self.zh[k] = bh[k] + row.iter().zip(self.pooled.iter()).map(|(w, p)| w * p).sum::<f64>();
        }

        let wo = params.tensor(OUTPUT_W);
        let bo = params.tensor(OUTPUT_B);
        for m in 0..READING_DIM {
            let row = &wo[m * HIDDEN..(m + 1) * HIDDEN];
            self.output[m] = bo[m] + row.iter().zip(self.zh.iter()).map(|(w, &z)| w * relu(z)).sum::<f64>();
        }
    }

    /// Accumulates `∂L/∂θ` into `grad` given `∂L/∂output`.
    pub fn accumulate_gradient(
        &self,
        params: &NetworkParams,
        x: &[f64; PATCH_SIZE * PATCH_SIZE],
        d_out: &[f64; READING_DIM],
        grad: &mut NetworkParams,
    ) {
        let wo = params.tensor(OUTPUT_W);
        let mut d_zh = [0.0; HIDDEN];
        {
            let g = grad.as_mut_slice();
            for m in 0..READING_DIM {
                let d = d_out[m];
                g[OUTPUT_B.offset + m] += d;
                let gw = &mut g[OUTPUT_W.offset + m * HIDDEN..OUTPUT_W.offset + (m + 1) * HIDDEN];
                for k in 0..HIDDEN {
                    gw[k] += d * relu(self.zh[k]);
                }
            }
        }
        for (k, dz) in d_zh.iter_mut().enumerate() {
            if self.zh[k] > 0.0 {
                *dz = (0..READING_DIM).map(|m| d_out[m] * wo[m * HIDDEN + k]).sum();
            }
        }

        let wh = params.tensor(HIDDEN_W);
        let mut d_pool = [0.0; CONV2_CHANNELS];
        {
            let g = grad.as_mut_slice();
            for k in 0..HIDDEN {
                let d = d_zh[k];
                if d == 0.0 {
                    continue;
                }
                g[HIDDEN_B.offset + k] += d;
                for c in 0..CONV2_CHANNELS {
                    g[HIDDEN_W.offset + k * CONV2_CHANNELS + c] += d * self.pooled[c];
                    d_pool[c] += d * wh[k * CONV2_CHANNELS + c];
                }
            }
        }

        let mut a1 = [0.0; N1];
        for (a, &z) in a1.iter_mut().zip(self.z1.iter()) {
            *a = relu(z);
        }
        let w2 = params.tensor(CONV2_W);
        let mut d_a1 = [0.0; N1];
        {
            let g = grad.as_mut_slice();
            for o in 0..CONV2_CHANNELS {
                let dp = d_pool[o] * POOL_SCALE;
                if dp == 0.0 {
                    continue;
                }
                for i in 0..MAP2 {
                    for j in 0..MAP2 {
                        if self.z2[o * MAP2 * MAP2 + i * MAP2 + j] <= 0.0 {
                            continue;
                        }
                        g[CONV2_B.offset + o] += dp;
                        for c in 0..CONV1_CHANNELS {
                            let wbase = o * 72 + c * 9;
                            let abase = c * MAP1 * MAP1;
                            for ki in 0..KERNEL {
                                for kj in 0..KERNEL {
                                    let ai = abase + (2 * i + ki) * MAP1 + 2 * j + kj;
                                    g[CONV2_W.offset + wbase + ki * 3 + kj] += dp * a1[ai];
                                    d_a1[ai] += dp * w2[wbase + ki * 3 + kj];
                                }
                            }
                        }
                    }
                }
            }
        }

        let g = grad.as_mut_slice();
        for f in 0..CONV1_CHANNELS {
            for i in 0..MAP1 {
                for j in 0..MAP1 {
                    let idx = f * MAP1 * MAP1 + i * MAP1 + j;
                    if self.z1[idx] <= 0.0 {
                        continue;
                    }
                    let d = d_a1[idx];
                    if d == 0.0 {
                        continue;
                    }
                    g[CONV1_B.offset + f] += d;
                    for ki in 0..KERNEL {
                        for kj in 0..KERNEL {
                            g[CONV1_W.offset + f * 9 + ki * 3 + kj] += d * x[(i + ki) * PATCH_SIZE + j + kj];
                        }
                    }
                }
            }
        }
    }
}

pub fn forward(params: &NetworkParams, patch: &NormalizedPatch) -> TactileReading {
    TactileReading(Trace::new(params, &patch.values).output)
}

/// Inference with frozen parameters; identical to [`forward`].
pub fn predict(params: &NetworkParams, patch: &NormalizedPatch) -> TactileReading {
    forward(params, patch)
}

/// Mean over the 15 components of the squared difference.
pub fn mse_loss(pred: &TactileReading, target: &TactileReading) -> f64 {
    pred.0
        .iter()
        .zip(target.0.iter())
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        / READING_DIM as f64
}

/// Gradient of `mse_loss(forward(params, patch), target)`; ReLU kinks take
/// subgradient 0.
pub fn backward(params: &NetworkParams, patch: &NormalizedPatch, target: &TactileReading) -> NetworkParams {
    let trace = Trace::new(params, &patch.values);
    let mut d_out = [0.0; READING_DIM];
    for m in 0..READING_DIM {
        d_out[m] = 2.0 * (trace.output[m] - target[m]) / READING_DIM as f64;
    }
    let mut grad = NetworkParams::zeros();
    trace.accumulate_gradient(params, &patch.values, &d_out, &mut grad);
    grad
}
