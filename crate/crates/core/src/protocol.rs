//! Per-node update rules: screened decentralized gradient descent, plain DGD,
//! local-only gradient descent, and the screened-Adam variant for nonconvex
//! objectives. All rules consume the round-t snapshot and produce the round
//! t+1 iterate; the gradient is always evaluated at the node's own pre-update
//! iterate (or, for the Adam path, at the post-consensus point).

use serde::{Deserialize, Serialize};

use crate::aggregation::screen_and_average;
use crate::error::Result;

/// Diminishing step-size schedule `rho(t) = 1 / (lambda * (t0 + t))`.
/// With `t0 > L / lambda` the first step is below `1 / L`, and the sequence
/// is non-summable while its squares are summable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub lambda: f64,
    pub t0: f64,
}

impl StepSchedule {
    pub fn new(lambda: f64, t0: f64) -> Self {
        assert!(lambda > 0.0 && t0 > 0.0);
        StepSchedule { lambda, t0 }
    }

    /// Pick `t0 = ceil(L / lambda) + 1` from a gradient-Lipschitz estimate.
    pub fn from_lipschitz(lambda: f64, lipschitz: f64) -> Self {
        Self::new(lambda, (lipschitz / lambda).ceil() + 1.0)
    }

    pub fn step_size(&self, t: u64) -> f64 {
        1.0 / (self.lambda * (self.t0 + t as f64))
    }
}

/// Which update rule an honest node runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    Bridge,
    Dgd,
    LocalGd,
    BridgeAdam,
    Adam,
}

impl Rule {
    pub fn screens(self) -> bool {
        matches!(self, Rule::Bridge | Rule::BridgeAdam)
    }

    pub fn uses_adam(self) -> bool {
        matches!(self, Rule::BridgeAdam | Rule::Adam)
    }
}

/// Adam hyperparameters; the usual defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub alpha: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        AdamParams {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            alpha: 1e-3,
        }
    }
}

/// Adam first/second moments and step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub steps: u64,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: vec![0.0; dim],
            v: vec![0.0; dim],
            steps: 0,
        }
    }

    /// One Adam step from `w` along `grad`; returns the new iterate.
    pub fn step(&mut self, w: &[f64], grad: &[f64], p: &AdamParams) -> Vec<f64> {
        self.steps += 1;
        let bc1 = 1.0 - p.beta1.powi(self.steps as i32);
        let bc2 = 1.0 - p.beta2.powi(self.steps as i32);
        let mut out = vec![0.0; w.len()];
        for k in 0..w.len() {
            self.m[k] = p.beta1 * self.m[k] + (1.0 - p.beta1) * grad[k];
            self.v[k] = p.beta2 * self.v[k] + (1.0 - p.beta2) * grad[k] * grad[k];
            let m_hat = self.m[k] / bc1;
            let v_hat = self.v[k] / bc2;
            out[k] = w[k] - p.alpha * m_hat / (v_hat.sqrt() + p.epsilon);
        }
        out
    }
}

/// Per-node mutable state.
#[derive(Debug, Clone)]
pub struct NodeState {
    pub id: usize,
    pub w: Vec<f64>,
    pub adam: Option<AdamState>,
}

impl NodeState {
    pub fn new(id: usize, dim: usize, rule: Rule, init: Option<&[f64]>) -> Self {
        let w = match init {
            Some(v) => v.to_vec(),
            None => vec![0.0; dim],
        };
        NodeState {
            id,
            w,
            adam: rule.uses_adam().then(|| AdamState::new(dim)),
        }
    }
}

/// Screened decentralized gradient step: trimmed-mean consensus of the round-t
/// iterates, minus `rho` times the local gradient evaluated at the pre-update
/// iterate.
pub fn bridge_update(
    w: &[f64],
    grad_at_w: &[f64],
    received: &[(usize, Vec<f64>)],
    rho: f64,
    b: usize,
) -> Result<Vec<f64>> {
    let mut next = screen_and_average(w, received, b)?;
    for (nk, &gk) in next.iter_mut().zip(grad_at_w) {
        *nk -= rho * gk;
    }
    Ok(next)
}

/// Plain decentralized gradient step with uniform weights
/// `1 / (|neighbors| + 1)`. Identical to `bridge_update` with `b = 0`,
/// including floating-point summation order; an isolated node degenerates to
/// a local gradient step.
pub fn dgd_update(
    w: &[f64],
    grad_at_w: &[f64],
    received: &[(usize, Vec<f64>)],
    rho: f64,
) -> Result<Vec<f64>> {
    if received.is_empty() {
        return Ok(local_gd_update(w, grad_at_w, rho));
    }
    bridge_update(w, grad_at_w, received, rho, 0)
}

/// Gradient descent on local data only.
pub fn local_gd_update(w: &[f64], grad_at_w: &[f64], rho: f64) -> Vec<f64> {
    w.iter().zip(grad_at_w).map(|(wk, gk)| wk - rho * gk).collect()
}

/// Consensus-then-Adam step for the nonconvex path: average the received
/// iterates (screened when `screen` is set), then take one Adam step on the
/// mini-batch gradient evaluated at the consensus point. The stored iterate
/// is the post-step value and the Adam moments are updated in place.
pub fn bridge_adam_update(
    w: &[f64],
    received: &[(usize, Vec<f64>)],
    b: usize,
    screen: bool,
    params: &AdamParams,
    adam: &mut AdamState,
    batch_gradient: impl FnOnce(&[f64]) -> Result<Vec<f64>>,
) -> Result<Vec<f64>> {
    let consensus = if received.is_empty() {
        w.to_vec()
    } else {
        screen_and_average(w, received, if screen { b } else { 0 })?
    };
    let grad = batch_gradient(&consensus)?;
    Ok(adam.step(&consensus, &grad, params))
}
