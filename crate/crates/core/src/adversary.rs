//! Byzantine node behaviors. A Byzantine node keeps the message shape (a
//! d-dimensional vector) but lies about the content; what it sends is a pure
//! function of its strategy, the update it would honestly have sent, and a
//! dedicated per-(node, round) random stream.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    /// Broadcast i.i.d. standard-normal entries times `scale`.
    RandomVector,
    /// Broadcast `-scale` times the honest update.
    SignFlip,
    /// Broadcast a shared fixed target vector.
    Coordinated,
    /// Broadcast `scale` times the honest update, with `scale >> 1`.
    LargeValue,
}

/// How a Byzantine node distributes its lies across neighbors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BroadcastPolicy {
    /// Same vector to every neighbor (the default attack).
    #[default]
    IdenticalToAll,
    /// Extension hook: one vector to even-id neighbors, another to odd.
    TwoFaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ByzantineStrategy {
    pub kind: StrategyKind,
    #[serde(default = "default_scale")]
    pub scale: f64,
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    #[serde(default)]
    pub policy: BroadcastPolicy,
}

fn default_scale() -> f64 {
    1.0
}

impl ByzantineStrategy {
    pub fn random_vector(scale: f64) -> Self {
        ByzantineStrategy {
            kind: StrategyKind::RandomVector,
            scale,
            target: None,
            policy: BroadcastPolicy::IdenticalToAll,
        }
    }
}

/// One adversarial message. `honest_update` is what the node would have sent
/// had it followed the protocol; `rng` is the stream owned by this
/// (node, round).
pub fn byzantine_message(
    strategy: &ByzantineStrategy,
    honest_update: &[f64],
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    let d = honest_update.len();
    match strategy.kind {
        StrategyKind::RandomVector => Ok((0..d)
            .map(|_| {
                let g: f64 = StandardNormal.sample(rng);
                strategy.scale * g
            })
            .collect()),
        StrategyKind::SignFlip => Ok(honest_update.iter().map(|v| -strategy.scale * v).collect()),
        StrategyKind::LargeValue => Ok(honest_update.iter().map(|v| strategy.scale * v).collect()),
        StrategyKind::Coordinated => {
            let target = strategy.target.as_ref().ok_or(Error::MissingTarget)?;
            if target.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: target.len(),
                });
            }
            Ok(target.clone())
        }
    }
}

/// Per-neighbor message map for one round. The default policy sends one
/// vector to everyone; the two-faced hook draws a second vector for odd ids.
pub fn broadcast_plan(
    strategy: &ByzantineStrategy,
    honest_update: &[f64],
    neighbors: &[usize],
    rng: &mut impl Rng,
) -> Result<BTreeMap<usize, Vec<f64>>> {
    let mut plan = BTreeMap::new();
    match strategy.policy {
        BroadcastPolicy::IdenticalToAll => {
            let message = byzantine_message(strategy, honest_update, rng)?;
            for &n in neighbors {
                plan.insert(n, message.clone());
            }
        }
        BroadcastPolicy::TwoFaced => {
            let even = byzantine_message(strategy, honest_update, rng)?;
            let odd = byzantine_message(strategy, honest_update, rng)?;
            for &n in neighbors {
                let msg = if n % 2 == 0 { &even } else { &odd };
                plan.insert(n, msg.clone());
            }
        }
    }
    Ok(plan)
}
