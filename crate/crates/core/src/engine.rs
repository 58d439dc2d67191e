//! Synchronous round-based simulation: build a world from a config, run
//! rounds (broadcast, then update, with a strict barrier between rounds),
//! and record metrics.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::seq::index::sample as index_sample;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adversary::{broadcast_plan, ByzantineStrategy};
use crate::error::{Error, Result};
use crate::objective::{
    empirical_loss, evaluate_accuracy_binary, evaluate_accuracy_stacked, load_csv,
    load_mnist_idx, local_empirical_gradient, synth_least_squares, Family, MlpArch, Objective,
    PartitionedDataset, Sample,
};
use crate::protocol::{
    bridge_adam_update, bridge_update, dgd_update, local_gd_update, AdamParams, NodeState, Rule,
    StepSchedule,
};
use crate::rng::{derive_rng, global_rng, Purpose};
use crate::topology::{generate_erdos_renyi, generate_erdos_renyi_with_min_degree, Graph};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum GraphSource {
    /// Symmetric Erdős–Rényi; resampled until the min-degree heuristic passes
    /// for the experiment's `b` unless `require_min_degree` is false.
    ErdosRenyi {
        nodes: usize,
        p: f64,
        #[serde(default)]
        graph_seed: Option<u64>,
        #[serde(default = "default_true")]
        require_min_degree: bool,
    },
    /// Edge-list file (header `M <count>`, one `i j` pair per line).
    File { path: PathBuf },
    Complete { nodes: usize },
    Empty { nodes: usize },
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryConfig {
    /// Fixed Byzantine ids; when absent, `count` nodes are sampled uniformly
    /// from the master seed.
    #[serde(default)]
    pub ids: Option<Vec<usize>>,
    #[serde(default)]
    pub count: usize,
    pub strategy: ByzantineStrategy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ObjectiveConfig {
    LeastSquares { reg: f64 },
    SquaredHinge { reg: f64 },
    SquaredHingeOneVsAll { reg: f64, classes: usize },
    Mlp {
        #[serde(default)]
        reg: f64,
        #[serde(default = "default_hidden")]
        hidden: usize,
    },
}

fn default_hidden() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum DatasetSource {
    SyntheticLeastSquares {
        nodes: usize,
        per_node: usize,
        dim: usize,
        noise_sd: f64,
        #[serde(default)]
        data_seed: Option<u64>,
        #[serde(default)]
        w_true: Option<Vec<f64>>,
    },
    /// IDX image/label files; the first `nodes * per_node` training samples
    /// are split contiguously across nodes, the full test set is shared.
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
        nodes: usize,
        per_node: usize,
        /// When set, labels collapse to ±1 against this digit.
        #[serde(default)]
        binary_target: Option<u8>,
    },
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConfig {
    /// Strong-convexity modulus; defaults to the objective's regularization.
    pub lambda: Option<f64>,
    /// Gradient-Lipschitz estimate used to pick `t0` when not given.
    pub lipschitz_estimate: f64,
    pub t0: Option<f64>,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            lambda: None,
            lipschitz_estimate: 10.0,
            t0: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub graph: GraphSource,
    #[serde(default)]
    pub b: usize,
    #[serde(default)]
    pub adversary: Option<AdversaryConfig>,
    pub objective: ObjectiveConfig,
    pub dataset: DatasetSource,
    pub rule: Rule,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub adam: AdamParams,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    pub rounds: u64,
    pub seed: u64,
    #[serde(default = "default_cadence")]
    pub metric_cadence: u64,
    #[serde(default)]
    pub init: Option<Vec<f64>>,
    #[serde(default = "default_consensus_epsilon")]
    pub consensus_epsilon: f64,
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_batch_size() -> usize {
    50
}

fn default_cadence() -> u64 {
    10
}

fn default_consensus_epsilon() -> f64 {
    1e-4
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }
}

/// What one node emits in one round.
#[derive(Debug, Clone)]
pub enum Outgoing {
    /// Honest broadcast: the same iterate to every out-neighbor.
    Uniform(Vec<f64>),
    /// Byzantine broadcast: an explicit per-neighbor map.
    PerNeighbor(BTreeMap<usize, Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub round: u64,
    pub consensus_diameter: f64,
    pub dist_wstar_mean: Option<f64>,
    pub dist_wstar_max: Option<f64>,
    pub risk: f64,
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub honest_ids: Vec<usize>,
    pub byzantine_ids: Vec<usize>,
    /// Honest final iterates, in `honest_ids` order.
    pub final_iterates: Vec<Vec<f64>>,
    /// Honest per-node final test accuracy, when a test set exists.
    pub final_per_node_accuracy: Option<Vec<f64>>,
    pub consensus_achieved: bool,
}

impl Trace {
    pub fn final_row(&self) -> &TraceRow {
        self.rows.last().expect("trace always has the initial row")
    }

    /// CSV serialization, one row per recorded round. Missing metrics render
    /// as empty fields.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("round,consensus_diameter,dist_wstar_mean,dist_wstar_max,risk,accuracy\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.round,
                r.consensus_diameter,
                opt(r.dist_wstar_mean),
                opt(r.dist_wstar_max),
                r.risk,
                opt(r.accuracy)
            ));
        }
        out
    }

    /// Final-metrics summary with a config echo.
    pub fn summary(&self, cfg: &ExperimentConfig) -> serde_json::Value {
        let last = self.final_row();
        json!({
            "schema_version": SCHEMA_VERSION,
            "seed": cfg.seed,
            "rounds": last.round,
            "final": {
                "consensus_diameter": last.consensus_diameter,
                "consensus_achieved": self.consensus_achieved,
                "dist_wstar_mean": last.dist_wstar_mean,
                "dist_wstar_max": last.dist_wstar_max,
                "risk": last.risk,
                "accuracy": last.accuracy,
                "per_node_accuracy_min": self.final_per_node_accuracy.as_ref()
                    .map(|a| a.iter().cloned().fold(f64::INFINITY, f64::min)),
                "per_node_accuracy_max": self.final_per_node_accuracy.as_ref()
                    .map(|a| a.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
            },
            "honest_ids": self.honest_ids,
            "byzantine_ids": self.byzantine_ids,
            "config": serde_json::to_value(cfg).expect("config serializes"),
        })
    }
}

/// Fully built simulation state.
pub struct World {
    pub graph: Graph,
    pub out_neighbors: Vec<Vec<usize>>,
    pub objective: Objective,
    pub dataset: PartitionedDataset,
    pub nodes: Vec<NodeState>,
    pub byzantine: Vec<bool>,
    pub strategy: Option<ByzantineStrategy>,
    pub schedule: StepSchedule,
    pub rule: Rule,
    pub b: usize,
    pub adam: AdamParams,
    pub batch_size: usize,
    pub seed: u64,
    pub round: u64,
    pub consensus_epsilon: f64,
}

fn build_graph(cfg: &ExperimentConfig) -> Result<Graph> {
    match &cfg.graph {
        GraphSource::ErdosRenyi {
            nodes,
            p,
            graph_seed,
            require_min_degree,
        } => {
            let seed = graph_seed.unwrap_or(cfg.seed);
            if *require_min_degree {
                generate_erdos_renyi_with_min_degree(*nodes, *p, cfg.b, seed, 100)
            } else {
                Ok(generate_erdos_renyi(*nodes, *p, seed))
            }
        }
        GraphSource::File { path } => Graph::load(path),
        GraphSource::Complete { nodes } => Ok(Graph::complete(*nodes)),
        GraphSource::Empty { nodes } => Ok(Graph::empty(*nodes)),
    }
}

fn build_dataset(cfg: &ExperimentConfig, node_count: usize) -> Result<PartitionedDataset> {
    match &cfg.dataset {
        DatasetSource::SyntheticLeastSquares {
            nodes,
            per_node,
            dim,
            noise_sd,
            data_seed,
            w_true,
        } => {
            if *nodes != node_count {
                return Err(Error::Config(format!(
                    "dataset spans {nodes} nodes but the graph has {node_count}"
                )));
            }
            let seed = data_seed.unwrap_or(cfg.seed);
            let w_true = match w_true {
                Some(v) => v.clone(),
                None => {
                    let mut rng = global_rng(seed.wrapping_add(7), Purpose::Data);
                    use rand_distr::{Distribution, StandardNormal};
                    (0..*dim)
                        .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                        .collect()
                }
            };
            Ok(synth_least_squares(*nodes, *per_node, *dim, &w_true, *noise_sd, seed))
        }
        DatasetSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
            nodes,
            per_node,
            binary_target,
        } => {
            if *nodes != node_count {
                return Err(Error::Config(format!(
                    "dataset spans {nodes} nodes but the graph has {node_count}"
                )));
            }
            let (train_x, train_y) = load_mnist_idx(train_images, train_labels)?;
            let (test_x, test_y) = load_mnist_idx(test_images, test_labels)?;
            let needed = nodes * per_node;
            if train_x.len() < needed {
                return Err(Error::Config(format!(
                    "need {needed} training samples, file has {}",
                    train_x.len()
                )));
            }
            let to_label = |raw: u8| -> f64 {
                match binary_target {
                    Some(t) => {
                        if raw == *t {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                    None => raw as f64,
                }
            };
            let node_data = (0..*nodes)
                .map(|j| {
                    (j * per_node..(j + 1) * per_node)
                        .map(|i| Sample::new(train_x[i].clone(), to_label(train_y[i])))
                        .collect()
                })
                .collect();
            let test = test_x
                .iter()
                .zip(&test_y)
                .map(|(x, &y)| Sample::new(x.clone(), to_label(y)))
                .collect();
            Ok(PartitionedDataset {
                node_data,
                test,
                w_true: None,
            })
        }
        DatasetSource::Csv { path } => load_csv(path),
    }
}

fn build_objective(cfg: &ExperimentConfig, feature_dim: usize) -> Objective {
    match &cfg.objective {
        ObjectiveConfig::LeastSquares { reg } => {
            Objective::new(Family::LeastSquares, *reg, feature_dim)
        }
        ObjectiveConfig::SquaredHinge { reg } => {
            Objective::new(Family::SquaredHinge, *reg, feature_dim)
        }
        ObjectiveConfig::SquaredHingeOneVsAll { reg, classes } => Objective::new(
            Family::SquaredHingeOneVsAll { classes: *classes },
            *reg,
            feature_dim,
        ),
        ObjectiveConfig::Mlp { reg, hidden } => {
            let arch = MlpArch {
                input: feature_dim,
                hidden: *hidden,
                output: 10,
            };
            Objective::new(Family::Mlp { arch }, *reg, feature_dim)
        }
    }
}

impl World {
    pub fn new(cfg: &ExperimentConfig) -> Result<World> {
        let graph = build_graph(cfg)?;
        let m = graph.node_count();
        let dataset = build_dataset(cfg, m)?;
        if dataset.node_count() != m {
            return Err(Error::Config(format!(
                "dataset has {} node partitions for {m} graph nodes",
                dataset.node_count()
            )));
        }
        let objective = build_objective(cfg, dataset.feature_dim());

        let mut byzantine = vec![false; m];
        let mut strategy = None;
        if let Some(adv) = &cfg.adversary {
            let ids: Vec<usize> = match &adv.ids {
                Some(ids) => ids.clone(),
                None => {
                    let mut rng = global_rng(cfg.seed, Purpose::AdversarySelection);
                    index_sample(&mut rng, m, adv.count.min(m)).into_iter().collect()
                }
            };
            if ids.len() > m {
                return Err(Error::Config("more adversaries than nodes".into()));
            }
            for &id in &ids {
                if id >= m {
                    return Err(Error::Config(format!("adversary id {id} out of range")));
                }
                byzantine[id] = true;
            }
            strategy = Some(adv.strategy.clone());
        }

        // Screening rules need enough neighbors at every honest node.
        if cfg.rule.screens() {
            for j in 0..m {
                if byzantine[j] {
                    continue;
                }
                let deg = graph.in_degree(j);
                if deg < 2 * cfg.b + 1 {
                    return Err(Error::InsufficientNeighbors {
                        node: j,
                        neighbors: deg,
                        b: cfg.b,
                        min: 2 * cfg.b + 1,
                    });
                }
            }
        }

        if let Some(init) = &cfg.init {
            if init.len() != objective.dim {
                return Err(Error::Config(format!(
                    "init vector has dimension {}, objective needs {}",
                    init.len(),
                    objective.dim
                )));
            }
        }

        // Adam rules ignore the diminishing schedule, so a dummy modulus is
        // fine when the objective is unregularized.
        let fallback = if cfg.rule.uses_adam() && objective.reg <= 0.0 {
            1.0
        } else {
            objective.reg
        };
        let lambda = cfg.schedule.lambda.unwrap_or(fallback);
        if lambda <= 0.0 {
            return Err(Error::Config(
                "step schedule needs lambda > 0 (set schedule.lambda or objective reg)".into(),
            ));
        }
        let schedule = match cfg.schedule.t0 {
            Some(t0) => StepSchedule::new(lambda, t0),
            None => StepSchedule::from_lipschitz(lambda, cfg.schedule.lipschitz_estimate),
        };

        let nodes = (0..m)
            .map(|id| NodeState::new(id, objective.dim, cfg.rule, cfg.init.as_deref()))
            .collect();
        let out_neighbors = graph.out_neighbors();

        Ok(World {
            graph,
            out_neighbors,
            objective,
            dataset,
            nodes,
            byzantine,
            strategy,
            schedule,
            rule: cfg.rule,
            b: cfg.b,
            adam: cfg.adam,
            batch_size: cfg.batch_size,
            seed: cfg.seed,
            round: 0,
            consensus_epsilon: cfg.consensus_epsilon,
        })
    }

    pub fn honest_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&j| !self.byzantine[j]).collect()
    }

    pub fn byzantine_ids(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&j| self.byzantine[j]).collect()
    }

    /// Broadcast phase: every node's outgoing traffic for this round.
    pub fn collect_messages(&self) -> Result<Vec<Outgoing>> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for (j, node) in self.nodes.iter().enumerate() {
            if self.byzantine[j] {
                let strategy = self
                    .strategy
                    .as_ref()
                    .expect("byzantine flag implies a strategy");
                let mut rng = derive_rng(self.seed, j as u64, self.round, Purpose::Adversary);
                let plan =
                    broadcast_plan(strategy, &node.w, &self.out_neighbors[j], &mut rng)?;
                out.push(Outgoing::PerNeighbor(plan));
            } else {
                out.push(Outgoing::Uniform(node.w.clone()));
            }
        }
        Ok(out)
    }

    fn received_for(&self, j: usize, messages: &[Outgoing]) -> Vec<(usize, Vec<f64>)> {
        self.graph
            .in_neighbors(j)
            .iter()
            .map(|&i| {
                let v = match &messages[i] {
                    Outgoing::Uniform(v) => v.clone(),
                    Outgoing::PerNeighbor(map) => map
                        .get(&j)
                        .expect("broadcast plan covers every out-neighbor")
                        .clone(),
                };
                (i, v)
            })
            .collect()
    }

    fn mini_batch(&self, j: usize) -> Vec<Sample> {
        let data = &self.dataset.node_data[j];
        let size = self.batch_size.min(data.len());
        let mut rng = derive_rng(self.seed, j as u64, self.round, Purpose::Batch);
        index_sample(&mut rng, data.len(), size)
            .into_iter()
            .map(|i| data[i].clone())
            .collect()
    }

    /// Update phase: every node (Byzantine nodes included — they keep an
    /// honestly updated local state that feeds the "would have sent" input of
    /// their strategy) consumes the round-t messages and produces the round
    /// t+1 iterate.
    pub fn apply_round(&mut self, messages: &[Outgoing]) -> Result<()> {
        let rho = self.schedule.step_size(self.round);
        let mut next: Vec<NodeState> = Vec::with_capacity(self.nodes.len());
        for j in 0..self.nodes.len() {
            let node = &self.nodes[j];
            let new_state = match self.rule {
                Rule::Bridge | Rule::Dgd | Rule::LocalGd => {
                    let grad = local_empirical_gradient(
                        &self.objective,
                        &node.w,
                        &self.dataset.node_data[j],
                    )?;
                    let w = match self.rule {
                        Rule::Bridge => {
                            let received = self.received_for(j, messages);
                            bridge_update(&node.w, &grad, &received, rho, self.b)?
                        }
                        Rule::Dgd => {
                            let received = self.received_for(j, messages);
                            dgd_update(&node.w, &grad, &received, rho)?
                        }
                        _ => local_gd_update(&node.w, &grad, rho),
                    };
                    NodeState {
                        id: j,
                        w,
                        adam: None,
                    }
                }
                Rule::BridgeAdam | Rule::Adam => {
                    let received = self.received_for(j, messages);
                    let batch = self.mini_batch(j);
                    let objective = &self.objective;
                    let mut adam = node.adam.clone().expect("adam rules carry adam state");
                    let w = bridge_adam_update(
                        &node.w,
                        &received,
                        self.b,
                        self.rule == Rule::BridgeAdam,
                        &self.adam,
                        &mut adam,
                        |point| local_empirical_gradient(objective, point, &batch),
                    )?;
                    NodeState {
                        id: j,
                        w,
                        adam: Some(adam),
                    }
                }
            };
            if !new_state.w.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteState {
                    node: j,
                    round: self.round,
                });
            }
            next.push(new_state);
        }
        self.nodes = next;
        self.round += 1;
        Ok(())
    }

    pub fn run_round(&mut self) -> Result<()> {
        let messages = self.collect_messages()?;
        self.apply_round(&messages)
    }

    fn honest_mean(&self) -> Vec<f64> {
        let honest = self.honest_ids();
        let mut mean = vec![0.0; self.objective.dim];
        for &j in &honest {
            for (m, &w) in mean.iter_mut().zip(&self.nodes[j].w) {
                *m += w;
            }
        }
        let inv = 1.0 / honest.len() as f64;
        for m in &mut mean {
            *m *= inv;
        }
        mean
    }

    fn accuracy_of(&self, w: &[f64]) -> Option<f64> {
        if self.dataset.test.is_empty() {
            return None;
        }
        match &self.objective.family {
            Family::LeastSquares => None,
            Family::SquaredHinge => evaluate_accuracy_binary(w, &self.dataset.test).ok(),
            Family::SquaredHingeOneVsAll { classes } => {
                evaluate_accuracy_stacked(w, *classes, &self.dataset.test).ok()
            }
            Family::Mlp { arch } => {
                let correct = self
                    .dataset
                    .test
                    .iter()
                    .filter(|z| arch.predict(w, &z.features) == z.class())
                    .count();
                Some(correct as f64 / self.dataset.test.len() as f64)
            }
        }
    }

    /// Metrics of the current state.
    pub fn metrics(&self) -> Result<TraceRow> {
        let honest = self.honest_ids();
        let states: Vec<&[f64]> = honest.iter().map(|&j| self.nodes[j].w.as_slice()).collect();
        let diameter = consensus_diameter(&states);
        let mean = self.honest_mean();
        let (dist_mean, dist_max) = match &self.dataset.w_true {
            Some(w_true) if w_true.len() == self.objective.dim => {
                let dists: Vec<f64> = states
                    .iter()
                    .map(|w| {
                        w.iter()
                            .zip(w_true)
                            .map(|(a, b)| (a - b).powi(2))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect();
                let mean_d = dists.iter().sum::<f64>() / dists.len() as f64;
                let max_d = dists.iter().cloned().fold(0.0, f64::max);
                (Some(mean_d), Some(max_d))
            }
            _ => (None, None),
        };
        let pooled: Vec<Sample> = honest
            .iter()
            .flat_map(|&j| self.dataset.node_data[j].iter().cloned())
            .collect();
        let risk = empirical_loss(&self.objective, &mean, &pooled)?;
        let accuracy = self.accuracy_of(&mean);
        Ok(TraceRow {
            round: self.round,
            consensus_diameter: diameter,
            dist_wstar_mean: dist_mean,
            dist_wstar_max: dist_max,
            risk,
            accuracy,
        })
    }
}

/// Maximum pairwise ℓ2 distance among honest iterates; 0 for a single node.
pub fn consensus_diameter(states: &[&[f64]]) -> f64 {
    let mut max = 0.0f64;
    for i in 0..states.len() {
        for j in (i + 1)..states.len() {
            let d: f64 = states[i]
                .iter()
                .zip(states[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            max = max.max(d);
        }
    }
    max
}

/// Least-squares slope of `log(diameter)` against `log(round)` over the rows
/// with `window.0 <= round <= window.1`. Zero-diameter rows are excluded;
/// if none remain the window is degenerate (exact consensus was reached).
pub fn consensus_rate_fit(rows: &[TraceRow], window: (u64, u64)) -> Result<f64> {
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.round >= window.0.max(1) && r.round <= window.1)
        .filter(|r| r.consensus_diameter > 0.0)
        .map(|r| ((r.round as f64).ln(), r.consensus_diameter.ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateConsensusWindow);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateConsensusWindow);
    }
    Ok((n * sxy - sx * sy) / denom)
}

/// Run a configured experiment start to finish, recording metrics at the
/// configured cadence (plus the initial and final states).
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Trace> {
    let mut world = World::new(cfg)?;
    let cadence = cfg.metric_cadence.max(1);
    let mut rows = vec![world.metrics()?];
    for t in 0..cfg.rounds {
        world.run_round()?;
        if (t + 1) % cadence == 0 || t + 1 == cfg.rounds {
            rows.push(world.metrics()?);
        }
    }
    let honest = world.honest_ids();
    let final_iterates: Vec<Vec<f64>> = honest.iter().map(|&j| world.nodes[j].w.clone()).collect();
    let final_per_node_accuracy = if world.dataset.test.is_empty() {
        None
    } else {
        let accs: Option<Vec<f64>> = honest
            .iter()
            .map(|&j| world.accuracy_of(&world.nodes[j].w))
            .collect();
        accs
    };
    let consensus_achieved =
        rows.last().map(|r| r.consensus_diameter < world.consensus_epsilon).unwrap_or(false);
    Ok(Trace {
        rows,
        honest_ids: honest,
        byzantine_ids: world.byzantine_ids(),
        final_iterates,
        final_per_node_accuracy,
        consensus_achieved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_config(rule: Rule, rounds: u64) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            graph: GraphSource::ErdosRenyi {
                nodes: 5,
                p: 0.8,
                graph_seed: None,
                require_min_degree: true,
            },
            b: 0,
            adversary: None,
            objective: ObjectiveConfig::LeastSquares { reg: 0.01 },
            dataset: DatasetSource::SyntheticLeastSquares {
                nodes: 5,
                per_node: 40,
                dim: 3,
                noise_sd: 0.0,
                data_seed: None,
                w_true: Some(vec![1.0, -0.5, 0.25]),
            },
            rule,
            schedule: ScheduleConfig::default(),
            adam: AdamParams::default(),
            batch_size: 50,
            rounds,
            seed: 42,
            metric_cadence: 10,
            init: None,
            consensus_epsilon: 1e-4,
        }
    }

    #[test]
    fn zero_rounds_gives_initial_metrics_only() {
        let trace = run_experiment(&synthetic_config(Rule::Dgd, 0)).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.rows[0].round, 0);
        assert_eq!(trace.rows[0].consensus_diameter, 0.0);
    }

    #[test]
    fn identical_seeds_give_identical_traces() {
        let cfg = synthetic_config(Rule::Dgd, 60);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn consensus_fixed_point_when_gradients_vanish() {
        // w_true = 0 with no noise makes all labels zero, so the unregularized
        // gradient at w = 0 vanishes and states must stay at zero.
        let mut cfg = synthetic_config(Rule::Dgd, 5);
        cfg.objective = ObjectiveConfig::LeastSquares { reg: 1e-3 };
        cfg.dataset = DatasetSource::SyntheticLeastSquares {
            nodes: 5,
            per_node: 10,
            dim: 3,
            noise_sd: 0.0,
            data_seed: None,
            w_true: Some(vec![0.0, 0.0, 0.0]),
        };
        let trace = run_experiment(&cfg).unwrap();
        for row in &trace.rows {
            assert_eq!(row.consensus_diameter, 0.0);
        }
        assert!(trace.final_iterates.iter().flatten().all(|&w| w == 0.0));
    }

    #[test]
    fn single_node_local_gd_takes_one_gradient_step() {
        let mut cfg = synthetic_config(Rule::LocalGd, 1);
        cfg.graph = GraphSource::Empty { nodes: 1 };
        cfg.dataset = DatasetSource::SyntheticLeastSquares {
            nodes: 1,
            per_node: 20,
            dim: 3,
            noise_sd: 0.0,
            data_seed: None,
            w_true: Some(vec![1.0, -0.5, 0.25]),
        };
        let mut world = World::new(&cfg).unwrap();
        let obj = world.objective.clone();
        let grad =
            local_empirical_gradient(&obj, &world.nodes[0].w, &world.dataset.node_data[0]).unwrap();
        let rho = world.schedule.step_size(0);
        let expected: Vec<f64> = grad.iter().map(|g| -rho * g).collect();
        world.run_round().unwrap();
        assert_eq!(world.nodes[0].w, expected);
    }

    #[test]
    fn three_node_line_dgd_hand_check() {
        // Line 0-1-2 with hand-set scalar states and zero data (zero gradient
        // except the regularization pull, disabled via reg in schedule only).
        let cfg = ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            graph: GraphSource::File {
                path: PathBuf::new(), // replaced below by direct World surgery
            },
            b: 0,
            adversary: None,
            objective: ObjectiveConfig::LeastSquares { reg: 0.0 },
            dataset: DatasetSource::SyntheticLeastSquares {
                nodes: 3,
                per_node: 1,
                dim: 1,
                noise_sd: 0.0,
                data_seed: None,
                w_true: Some(vec![0.0]),
            },
            rule: Rule::Dgd,
            schedule: ScheduleConfig {
                lambda: Some(1.0),
                lipschitz_estimate: 10.0,
                t0: None,
            },
            adam: AdamParams::default(),
            batch_size: 50,
            rounds: 1,
            seed: 1,
            metric_cadence: 1,
            init: None,
            consensus_epsilon: 1e-4,
        };
        let mut cfg = cfg;
        cfg.graph = GraphSource::Complete { nodes: 3 };
        let mut world = World::new(&cfg).unwrap();
        world.graph = Graph::from_undirected_edges(3, [(0, 1), (1, 2)]).unwrap();
        world.out_neighbors = world.graph.out_neighbors();
        world.nodes[0].w = vec![1.0];
        world.nodes[1].w = vec![4.0];
        world.nodes[2].w = vec![7.0];
        // Labels are all zero and features nonzero, so the gradient at w is
        // (w x - 0) x averaged; with one sample x each this is w * x^2.
        let x0 = world.dataset.node_data[0][0].features[0];
        let x1 = world.dataset.node_data[1][0].features[0];
        let x2 = world.dataset.node_data[2][0].features[0];
        let rho = world.schedule.step_size(0);
        let expected = [
            (1.0 + 4.0) / 2.0 - rho * 1.0 * x0 * x0,
            (1.0 + 4.0 + 7.0) / 3.0 - rho * 4.0 * x1 * x1,
            (4.0 + 7.0) / 2.0 - rho * 7.0 * x2 * x2,
        ];
        world.run_round().unwrap();
        for (j, e) in expected.iter().enumerate() {
            assert!(
                (world.nodes[j].w[0] - e).abs() < 1e-12,
                "node {j}: {} vs {e}",
                world.nodes[j].w[0]
            );
        }
    }

    #[test]
    fn faultless_dgd_reaches_closed_form_oracle() {
        use crate::objective::closed_form_least_squares;
        // A complete graph keeps the mixing weights uniform, so the limit is
        // the uniformly pooled ridge solution. On irregular graphs the
        // neighborhood averaging is only row-stochastic and the limit is a
        // degree-weighted blend of the local objectives.
        let mut cfg = synthetic_config(Rule::Dgd, 8000);
        cfg.graph = GraphSource::Complete { nodes: 5 };
        cfg.objective = ObjectiveConfig::LeastSquares { reg: 0.05 };
        let trace = run_experiment(&cfg).unwrap();
        let world = World::new(&cfg).unwrap();
        let pooled = world.dataset.pooled(&world.honest_ids());
        let wstar = closed_form_least_squares(pooled, 0.05).unwrap();
        for w in &trace.final_iterates {
            let err: f64 = w.iter().zip(&wstar).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(err < 1e-3, "distance to closed form {err}");
        }
    }

    #[test]
    fn replaying_serialized_messages_reproduces_the_round() {
        let cfg = synthetic_config(Rule::Dgd, 0);
        let mut a = World::new(&cfg).unwrap();
        for _ in 0..3 {
            a.run_round().unwrap();
        }
        let messages = a.collect_messages().unwrap();
        let mut b = World::new(&cfg).unwrap();
        for _ in 0..3 {
            b.run_round().unwrap();
        }
        let mut c = World::new(&cfg).unwrap();
        for _ in 0..3 {
            c.run_round().unwrap();
        }
        a.run_round().unwrap();
        b.apply_round(&messages).unwrap();
        // Honest updates depend only on (state, messages, t, config): replaying
        // the captured message set gives the same states, even if the replica's
        // datasets at other nodes are perturbed.
        c.dataset.node_data[2][0].label += 100.0;
        let messages_c = c.collect_messages().unwrap();
        c.apply_round(&messages_c).unwrap();
        for j in 0..5 {
            assert_eq!(a.nodes[j].w, b.nodes[j].w);
            if j != 2 {
                assert_eq!(a.nodes[j].w, c.nodes[j].w, "node {j} read foreign data");
            }
        }
    }

    #[test]
    fn bridge_with_byzantine_nodes_runs_and_isolates_honest_metrics() {
        let mut cfg = synthetic_config(Rule::Bridge, 50);
        cfg.graph = GraphSource::Complete { nodes: 6 };
        cfg.dataset = DatasetSource::SyntheticLeastSquares {
            nodes: 6,
            per_node: 30,
            dim: 2,
            noise_sd: 0.01,
            data_seed: None,
            w_true: Some(vec![1.0, 2.0]),
        };
        cfg.b = 1;
        cfg.adversary = Some(AdversaryConfig {
            ids: Some(vec![3]),
            count: 1,
            strategy: ByzantineStrategy::random_vector(5.0),
        });
        let trace = run_experiment(&cfg).unwrap();
        assert_eq!(trace.byzantine_ids, vec![3]);
        assert_eq!(trace.honest_ids, vec![0, 1, 2, 4, 5]);
        assert!(trace.rows.iter().all(|r| r.consensus_diameter.is_finite()));
        assert!(trace.final_row().dist_wstar_max.unwrap() < 1.0);
    }

    #[test]
    fn insufficient_neighbors_rejected_with_node_id() {
        let mut cfg = synthetic_config(Rule::Bridge, 10);
        cfg.b = 3; // complete graph K5 has degree 4 < 7
        cfg.graph = GraphSource::Complete { nodes: 5 };
        match World::new(&cfg) {
            Err(Error::InsufficientNeighbors { node, .. }) => assert_eq!(node, 0),
            Err(other) => panic!("expected neighbor validation failure, got {other:?}"),
            Ok(_) => panic!("expected neighbor validation failure"),
        }
    }

    #[test]
    fn diverging_run_reports_non_finite_state() {
        let mut cfg = synthetic_config(Rule::Dgd, 500);
        // Step size 1/(1e-4 (0.1 + t)) stays far past 2/L for thousands of
        // rounds, so the decay cannot rescue the run before it overflows.
        cfg.schedule = ScheduleConfig {
            lambda: Some(1e-4),
            lipschitz_estimate: 10.0,
            t0: Some(0.1),
        };
        match run_experiment(&cfg) {
            Err(Error::NonFiniteState { .. }) => {}
            other => panic!("expected divergence report, got {:?}", other.map(|t| t.rows.len())),
        }
    }

    #[test]
    fn diameter_hand_values() {
        assert_eq!(consensus_diameter(&[&[1.0, 2.0]]), 0.0);
        assert_eq!(consensus_diameter(&[&[0.0, 0.0], &[3.0, 4.0]]), 5.0);
        let a = [0.0, 0.0];
        let b = [1.0, 0.0];
        let c = [0.0, 2.0];
        let d = consensus_diameter(&[&a, &b, &c]);
        assert!((d - (1.0f64 + 4.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rate_fit_recovers_exact_power_law() {
        let rows: Vec<TraceRow> = (1..200u64)
            .map(|t| TraceRow {
                round: t,
                consensus_diameter: 3.0 / t as f64,
                dist_wstar_mean: None,
                dist_wstar_max: None,
                risk: 0.0,
                accuracy: None,
            })
            .collect();
        let slope = consensus_rate_fit(&rows, (1, 199)).unwrap();
        assert!((slope + 1.0).abs() < 1e-9);
    }

    #[test]
    fn rate_fit_constant_is_flat_and_zero_window_degenerates() {
        let rows: Vec<TraceRow> = (1..100u64)
            .map(|t| TraceRow {
                round: t,
                consensus_diameter: 0.5,
                dist_wstar_mean: None,
                dist_wstar_max: None,
                risk: 0.0,
                accuracy: None,
            })
            .collect();
        assert!(consensus_rate_fit(&rows, (1, 99)).unwrap().abs() < 1e-9);
        let zeros: Vec<TraceRow> = rows
            .iter()
            .map(|r| TraceRow {
                consensus_diameter: 0.0,
                ..r.clone()
            })
            .collect();
        assert!(matches!(
            consensus_rate_fit(&zeros, (1, 99)),
            Err(Error::DegenerateConsensusWindow)
        ));
    }

    #[test]
    fn config_json_round_trip_and_schema_check() {
        let cfg = synthetic_config(Rule::Bridge, 5);
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(cfg, back);
        let bad = text.replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(ExperimentConfig::from_json(&bad).is_err());
    }
}
