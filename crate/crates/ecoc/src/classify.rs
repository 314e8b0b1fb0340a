//! The classification pipeline around a codebook: per-column binary
//! training partitions, differentiable binary learners, sign encoding,
//! Hamming decoding, class probability scores (raw and normalized),
//! accuracy, and error-correlation analysis, plus the synthetic 2d
//! Gaussian dataset generator.
//!
//! Class labels are 0-based in memory (matching codebook row indices) and
//! 1-based in CSV files, like every other wire format in the crate.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::codebook::{generalized_hamming, Codebook};
use crate::{derive_seed, Error, Result};

/// Labeled feature vectors with per-dimension clip bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    /// Row-major `n x d`.
    features: Vec<f64>,
    /// 0-based class labels in `0..k`.
    labels: Vec<u32>,
    n: usize,
    d: usize,
    k: usize,
    /// Observed `(min, max)` per dimension; the box for attack clipping.
    bounds: Vec<(f64, f64)>,
}

fn observed_bounds(features: &[f64], n: usize, d: usize) -> Vec<(f64, f64)> {
    let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); d];
    for i in 0..n {
        for (j, b) in bounds.iter_mut().enumerate() {
            let v = features[i * d + j];
            b.0 = b.0.min(v);
            b.1 = b.1.max(v);
        }
    }
    bounds
}

impl Dataset {
    /// Builds a dataset from per-example feature rows and 0-based labels.
    /// Clip bounds are the observed per-dimension minima and maxima.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<u32>, k: usize) -> Result<Dataset> {
        let n = features.len();
        if n == 0 {
            return Err(Error::invalid("dataset", "no examples".to_string()));
        }
        if labels.len() != n {
            return Err(Error::invalid(
                "dataset",
                format!("{n} feature rows but {} labels", labels.len()),
            ));
        }
        if k < 2 {
            return Err(Error::invalid("dataset", format!("need at least 2 classes, got k={k}")));
        }
        let d = features[0].len();
        if d == 0 {
            return Err(Error::invalid("dataset", "zero-dimensional features".to_string()));
        }
        let mut flat = Vec::with_capacity(n * d);
        for (i, row) in features.iter().enumerate() {
            if row.len() != d {
                return Err(Error::invalid(
                    "dataset",
                    format!("row {i} has {} features, expected {d}", row.len()),
                ));
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::invalid("dataset", format!("non-finite feature {v} in row {i}")));
                }
                flat.push(v);
            }
        }
        for (i, &label) in labels.iter().enumerate() {
            if label as usize >= k {
                return Err(Error::invalid(
                    "dataset",
                    format!("label {label} in row {i} outside 0..{k}"),
                ));
            }
        }
        let bounds = observed_bounds(&flat, n, d);
        Ok(Dataset {
            features: flat,
            labels,
            n,
            d,
            k,
            bounds,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Same examples with the given labels instead.
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Dataset> {
        let rows = (0..self.n).map(|i| self.row(i).to_vec()).collect();
        Dataset::new(rows, labels, self.k)
    }

    /// Header line, then one line per example with the 1-based label last.
    pub fn to_csv_string(&self) -> String {
        let mut s = (1..=self.d).map(|j| format!("f{j}")).collect::<Vec<_>>().join(",");
        s.push_str(",label\n");
        for i in 0..self.n {
            for v in self.row(i) {
                s.push_str(&format!("{v},"));
            }
            s.push_str(&format!("{}\n", self.labels[i] + 1));
        }
        s
    }

    /// Parses header-first CSV with the integer label in the last column,
    /// 1-based on the wire. The class count is the largest label seen.
    pub fn from_csv_str(text: &str, source_name: &str) -> Result<Dataset> {
        let mut lines = text.lines().enumerate();
        let Some((_, header)) = lines.next() else {
            return Err(Error::format(source_name, 1, "empty file; expected a header line"));
        };
        let d = header.split(',').count().saturating_sub(1);
        if d == 0 {
            return Err(Error::format(source_name, 1, "header needs at least one feature column and a label"));
        }
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != d + 1 {
                return Err(Error::format(
                    source_name,
                    line_no,
                    format!("expected {} fields, found {}", d + 1, fields.len()),
                ));
            }
            let mut row = Vec::with_capacity(d);
            for f in &fields[..d] {
                let v: f64 = f
                    .parse()
                    .map_err(|_| Error::format(source_name, line_no, format!("bad feature value '{f}'")))?;
                row.push(v);
            }
            let label: u32 = fields[d]
                .parse()
                .map_err(|_| Error::format(source_name, line_no, format!("bad label '{}'", fields[d])))?;
            if label == 0 {
                return Err(Error::format(source_name, line_no, "label 0; labels are 1-based"));
            }
            features.push(row);
            labels.push(label - 1);
        }
        let k = labels.iter().max().map_or(0, |&m| m as usize + 1).max(2);
        Dataset::new(features, labels, k)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Dataset> {
        let path = path.as_ref();
        Dataset::from_csv_str(&std::fs::read_to_string(path)?, &path.display().to_string())
    }
}

/// Samples `n_per_class` points per class from isotropic 2d Gaussians whose
/// means sit on a circle of the given radius, class `c` at angle `2 pi c / k`.
/// Deterministic given the seed; clip bounds are the observed extremes.
pub fn make_gaussian_toy(
    k: usize,
    n_per_class: usize,
    seed: u64,
    radius: f64,
    sigma: f64,
) -> Result<Dataset> {
    if k < 2 {
        return Err(Error::invalid("toy dataset", format!("need at least 2 classes, got k={k}")));
    }
    if n_per_class < 1 {
        return Err(Error::invalid("toy dataset", "need at least one point per class".to_string()));
    }
    if !(radius >= 0.0) || !(sigma >= 0.0) {
        return Err(Error::invalid("toy dataset", format!("radius {radius}, sigma {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(k * n_per_class);
    let mut labels = Vec::with_capacity(k * n_per_class);
    for c in 0..k {
        let angle = std::f64::consts::TAU * c as f64 / k as f64;
        let (mx, my) = (radius * angle.cos(), radius * angle.sin());
        for _ in 0..n_per_class {
            let (gx, gy): (f64, f64) = (rng.sample(StandardNormal), rng.sample(StandardNormal));
            features.push(vec![mx + sigma * gx, my + sigma * gy]);
            labels.push(c as u32);
        }
    }
    Dataset::new(features, labels, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LearnerKind {
    /// Regularized logistic regression by full-batch gradient descent.
    Logistic,
    /// Logistic regression on a random Fourier feature map approximating
    /// an RBF kernel.
    RbfFeaturesLogistic,
    /// Class-mean prototypes; not differentiable, so attack flows reject it.
    NearestCentroid,
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LearnerKind::Logistic => "logistic",
            LearnerKind::RbfFeaturesLogistic => "rbf-features-logistic",
            LearnerKind::NearestCentroid => "nearest-centroid",
        };
        write!(f, "{s}")
    }
}

impl FromStr for LearnerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "logistic" => Ok(LearnerKind::Logistic),
            "rbf-features-logistic" => Ok(LearnerKind::RbfFeaturesLogistic),
            "nearest-centroid" => Ok(LearnerKind::NearestCentroid),
            _ => Err(format!("unknown learner kind '{s}'")),
        }
    }
}

/// Learner choice and hyperparameters, shared by every column.
///
/// `seed` feeds the learner-internal randomness (the Fourier projection
/// draws); it combines with the training seed so both influence the fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryLearnerSpec {
    pub kind: LearnerKind,
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// Fourier feature count; rbf-features-logistic only.
    pub n_features: usize,
    /// RBF bandwidth; rbf-features-logistic only.
    pub kernel_width: f64,
    pub seed: u64,
}

impl Default for BinaryLearnerSpec {
    fn default() -> BinaryLearnerSpec {
        BinaryLearnerSpec {
            kind: LearnerKind::Logistic,
            learning_rate: 0.5,
            epochs: 300,
            l2: 1e-4,
            n_features: 100,
            kernel_width: 1.0,
            seed: 0,
        }
    }
}

impl BinaryLearnerSpec {
    fn check(&self) -> Result<()> {
        let bad = |detail: String| Err(Error::invalid("learner spec", detail));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning rate {}", self.learning_rate));
        }
        if self.epochs == 0 {
            return bad("zero epochs".to_string());
        }
        if !(self.l2 >= 0.0 && self.l2.is_finite()) {
            return bad(format!("l2 penalty {}", self.l2));
        }
        if self.kind == LearnerKind::RbfFeaturesLogistic {
            if self.n_features == 0 {
                return bad("zero Fourier features".to_string());
            }
            if !(self.kernel_width > 0.0 && self.kernel_width.is_finite()) {
                return bad(format!("kernel width {}", self.kernel_width));
            }
        }
        Ok(())
    }
}

/// Probabilities stay inside the open unit interval even when the logit
/// saturates, keeping downstream logs and gradients finite.
const PROB_MARGIN: f64 = 1e-12;

fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(PROB_MARGIN, 1.0 - PROB_MARGIN)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One trained binary scorer: maps a feature vector to the probability of
/// its column's positive side, with input gradients for the differentiable
/// kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Hypothesis {
    Logistic {
        weights: Vec<f64>,
        bias: f64,
    },
    RbfFeaturesLogistic {
        /// `n_features x d` frequency matrix.
        projection: Vec<Vec<f64>>,
        phases: Vec<f64>,
        weights: Vec<f64>,
        bias: f64,
    },
    NearestCentroid {
        positive: Vec<f64>,
        negative: Vec<f64>,
    },
}

impl Hypothesis {
    pub fn kind(&self) -> LearnerKind {
        match self {
            Hypothesis::Logistic { .. } => LearnerKind::Logistic,
            Hypothesis::RbfFeaturesLogistic { .. } => LearnerKind::RbfFeaturesLogistic,
            Hypothesis::NearestCentroid { .. } => LearnerKind::NearestCentroid,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Hypothesis::Logistic { weights, .. } => weights.len(),
            Hypothesis::RbfFeaturesLogistic { projection, .. } => {
                projection.first().map_or(0, Vec::len)
            }
            Hypothesis::NearestCentroid { positive, .. } => positive.len(),
        }
    }

    /// Probability of the positive side, in the open unit interval.
    pub fn probability(&self, x: &[f64]) -> f64 {
        match self {
            Hypothesis::Logistic { weights, bias } => sigmoid(dot(weights, x) + bias),
            Hypothesis::RbfFeaturesLogistic {
                projection,
                phases,
                weights,
                bias,
            } => {
                let scale = (2.0 / projection.len() as f64).sqrt();
                let z = projection
                    .iter()
                    .zip(phases)
                    .zip(weights)
                    .map(|((omega, &phase), &w)| w * scale * (dot(omega, x) + phase).cos())
                    .sum::<f64>();
                sigmoid(z + bias)
            }
            Hypothesis::NearestCentroid { positive, negative } => {
                let d2 = |c: &[f64]| x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                sigmoid(d2(negative) - d2(positive))
            }
        }
    }

    /// Gradient of the probability with respect to the input; `None` for
    /// the non-differentiable kind.
    pub fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        match self {
            Hypothesis::Logistic { weights, .. } => {
                let r = self.probability(x);
                Some(weights.iter().map(|&w| r * (1.0 - r) * w).collect())
            }
            Hypothesis::RbfFeaturesLogistic {
                projection,
                phases,
                weights,
                ..
            } => {
                let r = self.probability(x);
                let scale = (2.0 / projection.len() as f64).sqrt();
                let mut grad = vec![0.0; x.len()];
                for ((omega, &phase), &w) in projection.iter().zip(phases).zip(weights) {
                    let slope = -w * scale * (dot(omega, x) + phase).sin();
                    for (g, &o) in grad.iter_mut().zip(omega) {
                        *g += slope * o;
                    }
                }
                for g in &mut grad {
                    *g *= r * (1.0 - r);
                }
                Some(grad)
            }
            Hypothesis::NearestCentroid { .. } => None,
        }
    }
}

/// A codebook with one trained scorer per column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedEcoc {
    pub codebook: Codebook,
    pub hypotheses: Vec<Hypothesis>,
    pub spec: BinaryLearnerSpec,
}

impl TrainedEcoc {
    pub fn input_dim(&self) -> usize {
        self.hypotheses.first().map_or(0, Hypothesis::input_dim)
    }

    fn check_input(&self, x: &[f64], what: &'static str) -> Result<()> {
        if self.hypotheses.is_empty() {
            return Err(Error::EmptyCodebook { context: what.to_string() });
        }
        if x.len() != self.input_dim() {
            return Err(Error::invalid(
                what,
                format!("input has {} dimensions, model expects {}", x.len(), self.input_dim()),
            ));
        }
        Ok(())
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serialization is infallible");
        s.push('\n');
        s
    }

    pub fn from_json_str(text: &str) -> Result<TrainedEcoc> {
        let te: TrainedEcoc = serde_json::from_str(text)?;
        if te.hypotheses.len() != te.codebook.n_columns() {
            return Err(Error::invalid(
                "trained model",
                format!(
                    "{} hypotheses for {} columns",
                    te.hypotheses.len(),
                    te.codebook.n_columns()
                ),
            ));
        }
        let d = te.input_dim();
        if te.hypotheses.iter().any(|h| h.input_dim() != d) {
            return Err(Error::invalid("trained model", "inconsistent hypothesis dimensions".to_string()));
        }
        Ok(te)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<TrainedEcoc> {
        TrainedEcoc::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// The binary training view of one codebook column: dataset row indices
/// (original order) and their `+1`/`-1` labels. Zero-entry classes are
/// dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryPartition {
    pub indices: Vec<usize>,
    pub labels: Vec<i8>,
}

/// Relabels `ds` for column `col`: examples of classes with a positive
/// entry become `+1`, negative entries `-1`, zero entries are dropped.
/// A partition missing one of the two sides cannot train a scorer and is
/// reported as a degenerate column.
pub fn partition_labels(ds: &Dataset, m: &Codebook, col: usize) -> Result<BinaryPartition> {
    if col >= m.n_columns() {
        return Err(Error::invalid(
            "partition",
            format!("column {col} outside 0..{}", m.n_columns()),
        ));
    }
    if ds.k() != m.k() {
        return Err(Error::invalid(
            "partition",
            format!("dataset has {} classes, codebook {}", ds.k(), m.k()),
        ));
    }
    let mut indices = Vec::new();
    let mut labels = Vec::new();
    for i in 0..ds.n() {
        let entry = m.get(ds.label(i) as usize, col);
        if entry != 0 {
            indices.push(i);
            labels.push(entry);
        }
    }
    let has_pos = labels.contains(&1);
    let has_neg = labels.contains(&-1);
    if !has_pos || !has_neg {
        return Err(Error::DegenerateColumn { column: col });
    }
    Ok(BinaryPartition { indices, labels })
}

/// Full-batch gradient descent on the regularized logistic loss. Features
/// arrive flattened row-major; deterministic from the zero start.
fn fit_logistic(x: &[f64], n: usize, d: usize, targets: &[f64], spec: &BinaryLearnerSpec) -> (Vec<f64>, f64) {
    let mut weights = vec![0.0; d];
    let mut bias = 0.0;
    let inv_n = 1.0 / n as f64;
    let mut grad = vec![0.0; d];
    for _ in 0..spec.epochs {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut grad_bias = 0.0;
        for i in 0..n {
            let row = &x[i * d..(i + 1) * d];
            let err = sigmoid(dot(&weights, row) + bias) - targets[i];
            for (g, &v) in grad.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_bias += err;
        }
        for (w, g) in weights.iter_mut().zip(&grad) {
            *w -= spec.learning_rate * (*g * inv_n + spec.l2 * *w);
        }
        bias -= spec.learning_rate * grad_bias * inv_n;
    }
    (weights, bias)
}

fn fit_column(ds: &Dataset, part: &BinaryPartition, spec: &BinaryLearnerSpec, seed: u64) -> Hypothesis {
    let n = part.indices.len();
    let d = ds.dim();
    let targets: Vec<f64> = part.labels.iter().map(|&y| f64::from(y.max(0))).collect();
    match spec.kind {
        LearnerKind::Logistic => {
            let mut x = Vec::with_capacity(n * d);
            for &i in &part.indices {
                x.extend_from_slice(ds.row(i));
            }
            let (weights, bias) = fit_logistic(&x, n, d, &targets, spec);
            Hypothesis::Logistic { weights, bias }
        }
        LearnerKind::RbfFeaturesLogistic => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut projection = Vec::with_capacity(spec.n_features);
            let mut phases = Vec::with_capacity(spec.n_features);
            for _ in 0..spec.n_features {
                let omega: Vec<f64> = (0..d)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) / spec.kernel_width)
                    .collect();
                projection.push(omega);
                phases.push(rng.random_range(0.0..std::f64::consts::TAU));
            }
            let scale = (2.0 / spec.n_features as f64).sqrt();
            let mut z = Vec::with_capacity(n * spec.n_features);
            for &i in &part.indices {
                let row = ds.row(i);
                for (omega, &phase) in projection.iter().zip(&phases) {
                    z.push(scale * (dot(omega, row) + phase).cos());
                }
            }
            let (weights, bias) = fit_logistic(&z, n, spec.n_features, &targets, spec);
            Hypothesis::RbfFeaturesLogistic {
                projection,
                phases,
                weights,
                bias,
            }
        }
        LearnerKind::NearestCentroid => {
            let mut positive = vec![0.0; d];
            let mut negative = vec![0.0; d];
            let (mut n_pos, mut n_neg) = (0.0, 0.0);
            for (&i, &y) in part.indices.iter().zip(&part.labels) {
                let (acc, count) = if y > 0 {
                    (&mut positive, &mut n_pos)
                } else {
                    (&mut negative, &mut n_neg)
                };
                for (a, &v) in acc.iter_mut().zip(ds.row(i)) {
                    *a += v;
                }
                *count += 1.0;
            }
            positive.iter_mut().for_each(|a| *a /= n_pos);
            negative.iter_mut().for_each(|a| *a /= n_neg);
            Hypothesis::NearestCentroid { positive, negative }
        }
    }
}

/// Fits one scorer per codebook column on its binary partition, in
/// parallel across columns. The merge is order-preserving and each column
/// seeds its own generator, so the result is identical to a sequential
/// run and bitwise-deterministic given `(spec, seed)`.
pub fn train(ds: &Dataset, m: &Codebook, spec: &BinaryLearnerSpec, seed: u64) -> Result<TrainedEcoc> {
    spec.check()?;
    if ds.k() != m.k() {
        return Err(Error::invalid(
            "train",
            format!("dataset has {} classes, codebook {}", ds.k(), m.k()),
        ));
    }
    let master = derive_seed(seed, "learner", spec.seed);
    let hypotheses: Vec<Hypothesis> = (0..m.n_columns())
        .into_par_iter()
        .map(|col| {
            let part = partition_labels(ds, m, col)?;
            Ok(fit_column(ds, &part, spec, derive_seed(master, "column", col as u64)))
        })
        .collect::<Result<_>>()?;
    Ok(TrainedEcoc {
        codebook: m.clone(),
        hypotheses,
        spec: *spec,
    })
}

/// Per-column sign vector: `+1` where the scorer puts more than half its
/// mass on the positive side, `-1` otherwise (ties included).
pub fn encode(te: &TrainedEcoc, x: &[f64]) -> Result<Vec<i8>> {
    te.check_input(x, "encode")?;
    Ok(te
        .hypotheses
        .iter()
        .map(|h| if h.probability(x) > 0.5 { 1 } else { -1 })
        .collect())
}

/// Row with the smallest generalized Hamming distance to the sign vector;
/// ties resolve to the lowest class index.
pub fn decode_hamming(m: &Codebook, f: &[i8]) -> Result<u32> {
    if f.len() != m.n_columns() {
        return Err(Error::invalid(
            "decode",
            format!("sign vector has {} entries, codebook {} columns", f.len(), m.n_columns()),
        ));
    }
    if f.iter().any(|&v| v != 1 && v != -1) {
        return Err(Error::invalid("decode", "sign vector entries must be +1 or -1".to_string()));
    }
    let mut best = (f64::INFINITY, 0);
    for r in 0..m.k() {
        let d = generalized_hamming(m.row(r), f);
        if d < best.0 {
            best = (d, r as u32);
        }
    }
    Ok(best.1)
}

/// Class scores from per-column positive-side probabilities: each class
/// accumulates `r` over its `+1` entries and `1 - r` over its `-1`
/// entries. Normalization divides by the row's nonzero count.
pub fn class_scores_from_probs(m: &Codebook, probs: &[f64], normalized: bool) -> Vec<f64> {
    assert_eq!(probs.len(), m.n_columns(), "one probability per column");
    (0..m.k())
        .map(|i| {
            let mut score = 0.0;
            let mut support = 0u32;
            for (l, &r) in probs.iter().enumerate() {
                match m.get(i, l) {
                    1 => {
                        score += r;
                        support += 1;
                    }
                    -1 => {
                        score += 1.0 - r;
                        support += 1;
                    }
                    _ => {}
                }
            }
            if normalized && support > 0 {
                score / f64::from(support)
            } else {
                score
            }
        })
        .collect()
}

/// Differentiable class probability estimates at `x`, optionally
/// normalized by row support.
pub fn class_scores(te: &TrainedEcoc, x: &[f64], normalized: bool) -> Result<Vec<f64>> {
    te.check_input(x, "class scores")?;
    let probs: Vec<f64> = te.hypotheses.iter().map(|h| h.probability(x)).collect();
    Ok(class_scores_from_probs(&te.codebook, &probs, normalized))
}

/// Gradient of each raw class score with respect to the input: the signed
/// sum of scorer gradients over the class's nonzero entries. Normalized
/// scores scale each row by its support.
pub fn class_score_gradients(te: &TrainedEcoc, x: &[f64], normalized: bool) -> Result<Vec<Vec<f64>>> {
    te.check_input(x, "class score gradients")?;
    let mut grads = Vec::with_capacity(te.hypotheses.len());
    for (l, h) in te.hypotheses.iter().enumerate() {
        match h.gradient(x) {
            Some(g) => grads.push(g),
            None => {
                return Err(Error::NoGradient {
                    column: l,
                    kind: match h.kind() {
                        LearnerKind::Logistic => "logistic",
                        LearnerKind::RbfFeaturesLogistic => "rbf-features-logistic",
                        LearnerKind::NearestCentroid => "nearest-centroid",
                    },
                })
            }
        }
    }
    let m = &te.codebook;
    Ok((0..m.k())
        .map(|i| {
            let mut total = vec![0.0; x.len()];
            let mut support = 0u32;
            for (l, g) in grads.iter().enumerate() {
                let sign = match m.get(i, l) {
                    1 => 1.0,
                    -1 => -1.0,
                    _ => continue,
                };
                support += 1;
                for (t, &v) in total.iter_mut().zip(g) {
                    *t += sign * v;
                }
            }
            if normalized && support > 0 {
                let inv = 1.0 / f64::from(support);
                total.iter_mut().for_each(|t| *t *= inv);
            }
            total
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PredictMode {
    Hamming,
    ScoresRaw,
    ScoresNormalized,
}

impl fmt::Display for PredictMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PredictMode::Hamming => "hamming",
            PredictMode::ScoresRaw => "scores-raw",
            PredictMode::ScoresNormalized => "scores-normalized",
        };
        write!(f, "{s}")
    }
}

impl FromStr for PredictMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "hamming" => Ok(PredictMode::Hamming),
            "scores-raw" => Ok(PredictMode::ScoresRaw),
            "scores-normalized" => Ok(PredictMode::ScoresNormalized),
            _ => Err(format!("unknown prediction mode '{s}'")),
        }
    }
}

fn argmax_lowest(values: &[f64]) -> u32 {
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, &v) in values.iter().enumerate() {
        if v > best.0 {
            best = (v, i as u32);
        }
    }
    best.1
}

/// Predicted class of `x`: Hamming decoding of the sign vector, or argmax
/// of the class scores (ties to the lowest class index).
pub fn predict(te: &TrainedEcoc, x: &[f64], mode: PredictMode) -> Result<u32> {
    match mode {
        PredictMode::Hamming => decode_hamming(&te.codebook, &encode(te, x)?),
        PredictMode::ScoresRaw => Ok(argmax_lowest(&class_scores(te, x, false)?)),
        PredictMode::ScoresNormalized => Ok(argmax_lowest(&class_scores(te, x, true)?)),
    }
}

/// Fraction of examples whose prediction matches the label.
pub fn accuracy(te: &TrainedEcoc, ds: &Dataset, mode: PredictMode) -> Result<f64> {
    let mut correct = 0usize;
    for i in 0..ds.n() {
        if predict(te, ds.row(i), mode)? == ds.label(i) {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.n() as f64)
}

/// Pairwise error correlation of the binary hypotheses: for columns `i`
/// and `j`, the fraction of jointly valid examples on which both err,
/// among those where both err or both are correct.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCorrelationMatrix {
    /// `L x L`, symmetric; `None` marks an empty denominator.
    pub values: Vec<Vec<Option<f64>>>,
    pub n_test: usize,
}

impl ErrorCorrelationMatrix {
    /// Mean over the defined entries; 0 when none are defined.
    pub fn mean(&self) -> f64 {
        let defined: Vec<f64> = self.values.iter().flatten().filter_map(|&v| v).collect();
        if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        }
    }
}

/// Computes the error-correlation matrix of `te` on `ds`. A column's loss
/// is evaluated only on examples whose class has a nonzero entry there;
/// each pair uses the examples valid for both of its columns.
pub fn error_correlation(te: &TrainedEcoc, ds: &Dataset) -> Result<ErrorCorrelationMatrix> {
    let m = &te.codebook;
    if ds.k() != m.k() {
        return Err(Error::invalid(
            "error correlation",
            format!("dataset has {} classes, codebook {}", ds.k(), m.k()),
        ));
    }
    let n_cols = m.n_columns();
    // errs[l][i]: None when example i is invalid for column l.
    let mut errs: Vec<Vec<Option<bool>>> = vec![vec![None; ds.n()]; n_cols];
    for i in 0..ds.n() {
        let x = ds.row(i);
        te.check_input(x, "error correlation")?;
        for (l, h) in te.hypotheses.iter().enumerate() {
            let entry = m.get(ds.label(i) as usize, l);
            if entry == 0 {
                continue;
            }
            let predicted: i8 = if h.probability(x) > 0.5 { 1 } else { -1 };
            errs[l][i] = Some(predicted != entry);
        }
    }
    let mut values = vec![vec![None; n_cols]; n_cols];
    for a in 0..n_cols {
        for b in a..n_cols {
            let (mut both_err, mut both_correct) = (0u64, 0u64);
            for i in 0..ds.n() {
                if let (Some(ea), Some(eb)) = (errs[a][i], errs[b][i]) {
                    match (ea, eb) {
                        (true, true) => both_err += 1,
                        (false, false) => both_correct += 1,
                        _ => {}
                    }
                }
            }
            let value = if both_err + both_correct > 0 {
                Some(both_err as f64 / (both_err + both_correct) as f64)
            } else {
                None
            };
            values[a][b] = value;
            values[b][a] = value;
        }
    }
    Ok(ErrorCorrelationMatrix {
        values,
        n_test: ds.n(),
    })
}

/// Accuracy under every prediction mode, a confusion matrix for the
/// requested mode, and the error-correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_examples: usize,
    pub accuracy_hamming: f64,
    pub accuracy_scores_raw: f64,
    pub accuracy_scores_normalized: f64,
    pub confusion_mode: PredictMode,
    /// `k x k`; row = true class, column = predicted class.
    pub confusion: Vec<Vec<u64>>,
    pub correlation: ErrorCorrelationMatrix,
}

pub fn evaluate(te: &TrainedEcoc, ds: &Dataset, confusion_mode: PredictMode) -> Result<EvaluationReport> {
    let mut confusion = vec![vec![0u64; ds.k()]; ds.k()];
    for i in 0..ds.n() {
        let predicted = predict(te, ds.row(i), confusion_mode)?;
        confusion[ds.label(i) as usize][predicted as usize] += 1;
    }
    Ok(EvaluationReport {
        n_examples: ds.n(),
        accuracy_hamming: accuracy(te, ds, PredictMode::Hamming)?,
        accuracy_scores_raw: accuracy(te, ds, PredictMode::ScoresRaw)?,
        accuracy_scores_normalized: accuracy(te, ds, PredictMode::ScoresNormalized)?,
        confusion_mode,
        confusion,
        correlation: error_correlation(te, ds)?,
    })
}
