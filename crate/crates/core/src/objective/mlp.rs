//! Small fully connected network: input → tanh hidden → softmax output with
//! cross-entropy loss. Parameters live in one flat vector so the protocol
//! layer can treat them like any other iterate.
//!
//! Layout: `[W1 (hidden×input, row-major), b1, W2 (output×hidden, row-major), b2]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::loss::Sample;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArch {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

impl Default for MlpArch {
    fn default() -> Self {
        MlpArch {
            input: 784,
            hidden: 32,
            output: 10,
        }
    }
}

impl MlpArch {
    pub fn param_count(&self) -> usize {
        self.hidden * self.input + self.hidden + self.output * self.hidden + self.output
    }

    fn split<'a>(&self, params: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64], &'a [f64]) {
        let (w1, rest) = params.split_at(self.hidden * self.input);
        let (b1, rest) = rest.split_at(self.hidden);
        let (w2, b2) = rest.split_at(self.output * self.hidden);
        (w1, b1, w2, b2)
    }

    fn split_mut<'a>(
        &self,
        params: &'a mut [f64],
    ) -> (&'a mut [f64], &'a mut [f64], &'a mut [f64], &'a mut [f64]) {
        let (w1, rest) = params.split_at_mut(self.hidden * self.input);
        let (b1, rest) = rest.split_at_mut(self.hidden);
        let (w2, b2) = rest.split_at_mut(self.output * self.hidden);
        (w1, b1, w2, b2)
    }

    /// Class scores (pre-softmax) for one input.
    pub fn logits(&self, params: &[f64], x: &[f64]) -> Vec<f64> {
        let (w1, b1, w2, b2) = self.split(params);
        let mut hidden = vec![0.0; self.hidden];
        for h in 0..self.hidden {
            let row = &w1[h * self.input..(h + 1) * self.input];
            let pre: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b1[h];
            hidden[h] = pre.tanh();
        }
        let mut out = vec![0.0; self.output];
        for o in 0..self.output {
            let row = &w2[o * self.hidden..(o + 1) * self.hidden];
            out[o] = row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + b2[o];
        }
        out
    }

    pub fn predict(&self, params: &[f64], x: &[f64]) -> usize {
        let logits = self.logits(params, x);
        let mut best = 0;
        for (k, &v) in logits.iter().enumerate() {
            if v > logits[best] {
                best = k;
            }
        }
        best
    }

    /// Cross-entropy loss of one sample (one-hot target `class`), gradient
    /// accumulated into `grad` by backpropagation.
    pub(crate) fn accumulate_sample(&self, params: &[f64], x: &[f64], class: usize, grad: &mut [f64]) -> f64 {
        let (w1, b1, w2, _b2) = self.split(params);
        let mut hidden = vec![0.0; self.hidden];
        for h in 0..self.hidden {
            let row = &w1[h * self.input..(h + 1) * self.input];
            let pre: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b1[h];
            hidden[h] = pre.tanh();
        }
        let logits = {
            let (_, _, w2s, b2s) = self.split(params);
            let mut out = vec![0.0; self.output];
            for o in 0..self.output {
                let row = &w2s[o * self.hidden..(o + 1) * self.hidden];
                out[o] = row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>() + b2s[o];
            }
            out
        };
        // Stable softmax cross-entropy.
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let loss = sum.ln() + max - logits[class];

        // delta_out = softmax - onehot
        let mut delta_out = vec![0.0; self.output];
        for o in 0..self.output {
            delta_out[o] = exps[o] / sum;
        }
        delta_out[class] -= 1.0;

        // Backprop into hidden.
        let mut delta_hidden = vec![0.0; self.hidden];
        for o in 0..self.output {
            let row = &w2[o * self.hidden..(o + 1) * self.hidden];
            for h in 0..self.hidden {
                delta_hidden[h] += delta_out[o] * row[h];
            }
        }
        for h in 0..self.hidden {
            delta_hidden[h] *= 1.0 - hidden[h] * hidden[h];
        }

        let (g_w1, g_b1, g_w2, g_b2) = self.split_mut(grad);
        for o in 0..self.output {
            let row = &mut g_w2[o * self.hidden..(o + 1) * self.hidden];
            for h in 0..self.hidden {
                row[h] += delta_out[o] * hidden[h];
            }
            g_b2[o] += delta_out[o];
        }
        for h in 0..self.hidden {
            let row = &mut g_w1[h * self.input..(h + 1) * self.input];
            let d = delta_hidden[h];
            for (g, &xi) in row.iter_mut().zip(x) {
                *g += d * xi;
            }
            g_b1[h] += d;
        }
        loss
    }
}

/// Mean cross-entropy loss and gradient over a batch; labels are class
/// indices interpreted as one-hot targets.
pub fn mlp_loss_grad(arch: &MlpArch, params: &[f64], batch: &[Sample]) -> Result<(f64, Vec<f64>)> {
    if batch.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if params.len() != arch.param_count() {
        return Err(Error::DimensionMismatch {
            expected: arch.param_count(),
            got: params.len(),
        });
    }
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    for z in batch {
        if z.features.len() != arch.input {
            return Err(Error::DimensionMismatch {
                expected: arch.input,
                got: z.features.len(),
            });
        }
        loss += arch.accumulate_sample(params, &z.features, z.class(), &mut grad);
    }
    let inv = 1.0 / batch.len() as f64;
    for g in &mut grad {
        *g *= inv;
    }
    Ok((loss * inv, grad))
}
