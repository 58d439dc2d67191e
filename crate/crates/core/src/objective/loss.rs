//! Per-sample losses, analytic gradients, and the finite-difference oracle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objective::mlp::MlpArch;

/// One training or test sample. For classification the label is the class
/// index (multi-class) or ±1 (binary); for regression it is the response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: f64,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: f64) -> Self {
        Sample { features, label }
    }

    pub fn class(&self) -> usize {
        self.label as usize
    }
}

/// Loss family. The convex families operate on the raw feature vector; the
/// one-vs-all variant stacks one squared-hinge classifier per class into a
/// single decision vector so the whole bank trains as one iterate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Family {
    SquaredHinge,
    LeastSquares,
    SquaredHingeOneVsAll { classes: usize },
    Mlp { arch: MlpArch },
}

/// A loss family together with its ℓ2 regularization strength and decision
/// dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub family: Family,
    /// ℓ2 coefficient; the convex families are `reg`-strongly convex when
    /// this is positive.
    pub reg: f64,
    /// Dimension of the decision vector `w`.
    pub dim: usize,
}

impl Objective {
    pub fn new(family: Family, reg: f64, feature_dim: usize) -> Self {
        let dim = match &family {
            Family::SquaredHinge | Family::LeastSquares => feature_dim,
            Family::SquaredHingeOneVsAll { classes } => classes * feature_dim,
            Family::Mlp { arch } => arch.param_count(),
        };
        Objective { family, reg, dim }
    }

    pub fn is_convex(&self) -> bool {
        !matches!(self.family, Family::Mlp { .. })
    }

    fn check_dims(&self, w: &[f64], z: &Sample) -> Result<()> {
        if w.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: w.len(),
            });
        }
        let feat = match &self.family {
            Family::SquaredHinge | Family::LeastSquares => self.dim,
            Family::SquaredHingeOneVsAll { classes } => self.dim / classes,
            Family::Mlp { arch } => arch.input,
        };
        if z.features.len() != feat {
            return Err(Error::DimensionMismatch {
                expected: feat,
                got: z.features.len(),
            });
        }
        Ok(())
    }

    /// Loss and analytic gradient of the regularized per-sample risk at `w`.
    pub fn loss_and_grad(&self, w: &[f64], z: &Sample) -> Result<(f64, Vec<f64>)> {
        self.check_dims(w, z)?;
        let mut grad = vec![0.0; w.len()];
        let mut loss = self.accumulate_data_term(w, z, &mut grad);
        // ℓ2 term added once per sample.
        let mut sq = 0.0;
        for (g, &wk) in grad.iter_mut().zip(w) {
            *g += self.reg * wk;
            sq += wk * wk;
        }
        loss += 0.5 * self.reg * sq;
        Ok((loss, grad))
    }

    /// Unregularized data term; accumulates the gradient into `grad`.
    pub(crate) fn accumulate_data_term(&self, w: &[f64], z: &Sample, grad: &mut [f64]) -> f64 {
        match &self.family {
            Family::LeastSquares => {
                let pred = dot(w, &z.features);
                let r = pred - z.label;
                for (g, &x) in grad.iter_mut().zip(&z.features) {
                    *g += r * x;
                }
                0.5 * r * r
            }
            Family::SquaredHinge => {
                squared_hinge_term(w, &z.features, z.label, grad)
            }
            Family::SquaredHingeOneVsAll { classes } => {
                let d = z.features.len();
                let mut loss = 0.0;
                for k in 0..*classes {
                    let y = if z.class() == k { 1.0 } else { -1.0 };
                    loss += squared_hinge_term(
                        &w[k * d..(k + 1) * d],
                        &z.features,
                        y,
                        &mut grad[k * d..(k + 1) * d],
                    );
                }
                loss
            }
            Family::Mlp { arch } => arch.accumulate_sample(w, &z.features, z.class(), grad),
        }
    }
}

fn squared_hinge_term(w: &[f64], x: &[f64], y: f64, grad: &mut [f64]) -> f64 {
    let margin = 1.0 - y * dot(w, x);
    if margin <= 0.0 {
        return 0.0;
    }
    let coeff = -2.0 * margin * y;
    for (g, &xi) in grad.iter_mut().zip(x) {
        *g += coeff * xi;
    }
    margin * margin
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean of the per-sample gradients over a node's local dataset
/// (regularization included once, as in the mean of regularized terms).
pub fn local_empirical_gradient(obj: &Objective, w: &[f64], data: &[Sample]) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut grad = vec![0.0; w.len()];
    for z in data {
        obj.check_dims(w, z)?;
        obj.accumulate_data_term(w, z, &mut grad);
    }
    let inv = 1.0 / data.len() as f64;
    for (g, &wk) in grad.iter_mut().zip(w) {
        *g = *g * inv + obj.reg * wk;
    }
    Ok(grad)
}

/// Mean regularized loss over a dataset.
pub fn empirical_loss(obj: &Objective, w: &[f64], data: &[Sample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut grad = vec![0.0; w.len()];
    let mut loss = 0.0;
    for z in data {
        obj.check_dims(w, z)?;
        loss += obj.accumulate_data_term(w, z, &mut grad);
    }
    let sq: f64 = w.iter().map(|x| x * x).sum();
    Ok(loss / data.len() as f64 + 0.5 * obj.reg * sq)
}

/// Central-difference gradient oracle: `(f(w + h e_k) - f(w - h e_k)) / 2h`
/// per coordinate. Test-side reference; independent of the analytic path.
pub fn finite_difference_gradient(obj: &Objective, w: &[f64], z: &Sample, h: f64) -> Vec<f64> {
    assert!(h > 0.0);
    let mut probe = w.to_vec();
    let mut grad = vec![0.0; w.len()];
    for k in 0..w.len() {
        probe[k] = w[k] + h;
        let (plus, _) = obj.loss_and_grad(&probe, z).expect("probe evaluation");
        probe[k] = w[k] - h;
        let (minus, _) = obj.loss_and_grad(&probe, z).expect("probe evaluation");
        probe[k] = w[k];
        grad[k] = (plus - minus) / (2.0 * h);
    }
    grad
}
