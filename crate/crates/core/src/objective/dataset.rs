//! Partitioned datasets, synthetic generators, the closed-form least-squares
//! oracle, and accuracy evaluation.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::objective::loss::{dot, Sample};
use crate::rng::{global_rng, Purpose};

/// Equal-sized per-node training sets plus a shared test set.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionedDataset {
    pub node_data: Vec<Vec<Sample>>,
    pub test: Vec<Sample>,
    /// Planted generating vector, when the data is synthetic.
    pub w_true: Option<Vec<f64>>,
}

impl PartitionedDataset {
    pub fn node_count(&self) -> usize {
        self.node_data.len()
    }

    pub fn local_size(&self) -> usize {
        self.node_data.first().map(Vec::len).unwrap_or(0)
    }

    pub fn feature_dim(&self) -> usize {
        self.node_data
            .iter()
            .chain(std::iter::once(&self.test))
            .flat_map(|v| v.first())
            .map(|z| z.features.len())
            .next()
            .unwrap_or(0)
    }

    /// All training samples of the listed nodes, pooled.
    pub fn pooled(&self, nodes: &[usize]) -> Vec<&Sample> {
        nodes
            .iter()
            .flat_map(|&j| self.node_data[j].iter())
            .collect()
    }
}

/// Linear-regression data: features standard normal, responses
/// `<w_true, x> + eps` with `eps ~ N(0, noise_sd^2)`, split evenly over `m`
/// nodes. Deterministic per seed.
pub fn synth_least_squares(
    m: usize,
    n: usize,
    d: usize,
    w_true: &[f64],
    noise_sd: f64,
    seed: u64,
) -> PartitionedDataset {
    assert!(m >= 1 && n >= 1 && d >= 1);
    assert_eq!(w_true.len(), d);
    let mut rng = global_rng(seed, Purpose::Data);
    let mut draw = |count: usize| -> Vec<Sample> {
        (0..count)
            .map(|_| {
                let x: Vec<f64> = (0..d)
                    .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                    .collect();
                let eps: f64 = rng.sample(StandardNormal);
                let y = dot(w_true, &x) + noise_sd * eps;
                Sample::new(x, y)
            })
            .collect()
    };
    let node_data: Vec<Vec<Sample>> = (0..m).map(|_| draw(n)).collect();
    let test = draw(n);
    PartitionedDataset {
        node_data,
        test,
        w_true: Some(w_true.to_vec()),
    }
}

/// Exact ridge solution of the pooled problem:
/// `(X^T X / n + reg I) w = X^T y / n`.
pub fn closed_form_least_squares<'a, I>(samples: I, reg: f64) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = &'a Sample>,
{
    let samples: Vec<&Sample> = samples.into_iter().collect();
    if samples.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let d = samples[0].features.len();
    let n = samples.len() as f64;
    let mut gram = DMatrix::<f64>::zeros(d, d);
    let mut rhs = DVector::<f64>::zeros(d);
    for z in &samples {
        for i in 0..d {
            let xi = z.features[i];
            rhs[i] += xi * z.label;
            for j in i..d {
                gram[(i, j)] += xi * z.features[j];
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            gram[(i, j)] = gram[(j, i)];
        }
    }
    gram /= n;
    rhs /= n;
    for i in 0..d {
        gram[(i, i)] += reg;
    }
    let solution = gram
        .full_piv_lu()
        .solve(&rhs)
        .ok_or(Error::SingularSystem)?;
    // Guard against a numerically near-singular unregularized system.
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(solution.iter().copied().collect())
}

/// Map digit labels to ±1 against a target digit.
pub fn one_vs_all_labels(labels: &[u8], target: u8) -> Vec<f64> {
    labels
        .iter()
        .map(|&l| if l == target { 1.0 } else { -1.0 })
        .collect()
}

/// Binary accuracy of a single linear classifier; a zero score predicts +1.
pub fn evaluate_accuracy_binary(w: &[f64], test: &[Sample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let correct = test
        .iter()
        .filter(|z| {
            let score = dot(w, &z.features);
            let pred = if score >= 0.0 { 1.0 } else { -1.0 };
            pred == z.label
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// One-vs-all accuracy of a stacked classifier bank: predict
/// `argmax_k <w_k, x>`; test labels are class indices.
pub fn evaluate_accuracy_stacked(w: &[f64], classes: usize, test: &[Sample]) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    let d = w.len() / classes;
    let correct = test
        .iter()
        .filter(|z| {
            let mut best = 0;
            let mut best_score = f64::NEG_INFINITY;
            for k in 0..classes {
                let score = dot(&w[k * d..(k + 1) * d], &z.features);
                if score > best_score {
                    best_score = score;
                    best = k;
                }
            }
            best == z.class()
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}

/// CSV dump: header `d,N,M,seed` with its value row, then one sample per row
/// as `<node>,<label>,<f0>,...` where node is `test` for test rows.
pub fn save_csv(ds: &PartitionedDataset, seed: u64, path: &Path) -> Result<()> {
    let mut out = String::from("d,N,M,seed\n");
    out.push_str(&format!(
        "{},{},{},{}\n",
        ds.feature_dim(),
        ds.local_size(),
        ds.node_count(),
        seed
    ));
    let mut push_row = |tag: &str, z: &Sample| {
        out.push_str(tag);
        out.push(',');
        out.push_str(&format!("{}", z.label));
        for f in &z.features {
            out.push_str(&format!(",{f}"));
        }
        out.push('\n');
    };
    for (j, node) in ds.node_data.iter().enumerate() {
        for z in node {
            push_row(&j.to_string(), z);
        }
    }
    for z in &ds.test {
        push_row("test", z);
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_csv(path: &Path) -> Result<PartitionedDataset> {
    let malformed = |reason: String| Error::MalformedDatasetFile {
        path: path.display().to_string(),
        reason,
    };
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| malformed("empty file".into()))?;
    if header.trim() != "d,N,M,seed" {
        return Err(malformed(format!("bad header `{header}`")));
    }
    let meta = lines
        .next()
        .ok_or_else(|| malformed("missing metadata row".into()))?;
    let fields: Vec<&str> = meta.split(',').collect();
    if fields.len() != 4 {
        return Err(malformed("metadata row needs 4 fields".into()));
    }
    let d: usize = fields[0].parse().map_err(|_| malformed("bad d".into()))?;
    let m: usize = fields[2].parse().map_err(|_| malformed("bad M".into()))?;
    let mut node_data = vec![Vec::new(); m];
    let mut test = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let tag = parts.next().ok_or_else(|| malformed("empty row".into()))?;
        let label: f64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad label".into()))?;
        let features: Vec<f64> = parts
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| malformed("bad feature value".into()))?;
        if features.len() != d {
            return Err(malformed(format!(
                "row has {} features, expected {d}",
                features.len()
            )));
        }
        let sample = Sample::new(features, label);
        if tag == "test" {
            test.push(sample);
        } else {
            let j: usize = tag.parse().map_err(|_| malformed("bad node tag".into()))?;
            if j >= m {
                return Err(malformed(format!("node {j} out of range")));
            }
            node_data[j].push(sample);
        }
    }
    Ok(PartitionedDataset {
        node_data,
        test,
        w_true: None,
    })
}
