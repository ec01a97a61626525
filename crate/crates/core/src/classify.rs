//! Soft-margin linear SVM trained by Pegasos-style stochastic subgradient
//! descent, with stratified k-fold cross-validation.
//!
//! Feature vectors go in as-is: no standardization, since landscape
//! coordinates share the filtration-value unit and rescaling would distort
//! their geometry.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::summaries::{FeatureKind, FeatureVector};
use crate::util::atomic_write;

/// Feature vectors with aligned binary labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    vectors: Vec<FeatureVector>,
    labels: Vec<bool>,
}

impl LabeledDataset {
    pub fn new(vectors: Vec<FeatureVector>, labels: Vec<bool>) -> Result<Self> {
        if vectors.len() != labels.len() {
            return Err(Error::argument(format!(
                "{} vectors but {} labels",
                vectors.len(),
                labels.len()
            )));
        }
        if vectors.is_empty() {
            return Err(Error::argument("empty dataset"));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::argument("vectors of unequal length"));
        }
        Ok(LabeledDataset { vectors, labels })
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn vectors(&self) -> &[FeatureVector] {
        &self.vectors
    }

    pub fn labels(&self) -> &[bool] {
        &self.labels
    }

    fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&l| l).count();
        (self.labels.len() - pos, pos)
    }
}

/// Affine decision function: positive side predicts label `true`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict(&self, x: &[f64]) -> bool {
        self.decision(x) >= 0.0
    }

    pub fn accuracy(&self, data: &LabeledDataset) -> f64 {
        let correct = data
            .vectors
            .iter()
            .zip(&data.labels)
            .filter(|(v, &l)| self.predict(&v.values) == l)
            .count();
        correct as f64 / data.len() as f64
    }
}

/// Death part first, landscape part second.
pub fn concat_features(dv: &FeatureVector, ls_vec: &FeatureVector) -> FeatureVector {
    if dv.is_empty() {
        return ls_vec.clone();
    }
    let mut values = dv.values.clone();
    values.extend_from_slice(&ls_vec.values);
    FeatureVector { values, kind: FeatureKind::Concatenated, grid: None }
}

/// Regularized hinge objective: λ/2·‖w‖² + mean_i max(0, 1 − y_i·f(x_i)).
pub fn hinge_objective(data: &LabeledDataset, model: &LinearModel, lambda: f64) -> f64 {
    let reg = 0.5 * lambda * model.weights.iter().map(|w| w * w).sum::<f64>();
    let loss: f64 = data
        .vectors
        .iter()
        .zip(&data.labels)
        .map(|(v, &l)| {
            let y = if l { 1.0 } else { -1.0 };
            (1.0 - y * model.decision(&v.values)).max(0.0)
        })
        .sum();
    reg + loss / data.len() as f64
}

/// Pegasos: T = epochs·n steps of η_t = 1/(λt) stochastic subgradient
/// descent on the regularized hinge loss, returning the average of the
/// last half of the iterates. The bias rides along as a constant-feature
/// coordinate so it shares the stable Pegasos step size; with the small
/// default λ its regularization penalty is negligible.
pub fn train_svm(
    data: &LabeledDataset,
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<LinearModel> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::argument("lambda must be finite and > 0"));
    }
    if epochs < 1 {
        return Err(Error::argument("epochs must be >= 1"));
    }
    let (neg, pos) = data.class_counts();
    if neg == 0 || pos == 0 {
        return Err(Error::argument("training needs both classes present"));
    }
    let n = data.len();
    let dim = data.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // w[dim] is the bias coordinate, paired with an implicit feature 1.
    let mut w = vec![0.0; dim + 1];
    let total_steps = epochs * n;
    let tail_start = total_steps / 2 + 1;
    let mut w_avg = vec![0.0; dim + 1];
    let mut averaged: usize = 0;

    for t in 1..=total_steps {
        let i = rng.gen_range(0..n);
        let x = &data.vectors[i].values;
        let y = if data.labels[i] { 1.0 } else { -1.0 };
        let eta = 1.0 / (lambda * t as f64);
        let margin = y * (dot(&w[..dim], x) + w[dim]);
        let shrink = 1.0 - 1.0 / t as f64;
        if margin < 1.0 {
            for (wg, xg) in w[..dim].iter_mut().zip(x) {
                *wg = shrink * *wg + eta * y * xg;
            }
            w[dim] = shrink * w[dim] + eta * y;
        } else {
            for wg in &mut w {
                *wg *= shrink;
            }
        }
        if t >= tail_start {
            for (ag, wg) in w_avg.iter_mut().zip(&w) {
                *ag += wg;
            }
            averaged += 1;
        }
    }
    let k = averaged.max(1) as f64;
    for ag in &mut w_avg {
        *ag /= k;
    }
    let bias = w_avg[dim];
    w_avg.truncate(dim);
    Ok(LinearModel { weights: w_avg, bias })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cross-validation outcome: held-out accuracy per fold plus their mean.
/// `folds_used` can be lower than requested when a class is too small.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub folds_used: usize,
}

/// Stratified k-fold cross-validation: each class is shuffled by the seed
/// and dealt round-robin across folds, so every fold sees both classes.
/// Folds are reduced to the smaller class size when necessary.
pub fn cross_validate(
    data: &LabeledDataset,
    folds: usize,
    lambda: f64,
    epochs: usize,
    seed: u64,
) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::argument("cross-validation needs folds >= 2"));
    }
    if data.len() < folds {
        return Err(Error::argument(format!(
            "{} samples cannot fill {} folds",
            data.len(),
            folds
        )));
    }
    let (neg, pos) = data.class_counts();
    let folds_used = folds.min(neg).min(pos);
    if folds_used < 2 {
        return Err(Error::argument(
            "stratified cross-validation needs at least 2 samples in each class",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment: Vec<Vec<usize>> = vec![Vec::new(); folds_used];
    for class in [false, true] {
        let mut members: Vec<usize> = (0..data.len()).filter(|&i| data.labels[i] == class).collect();
        members.shuffle(&mut rng);
        for (pos, &i) in members.iter().enumerate() {
            assignment[pos % folds_used].push(i);
        }
    }
    let mut fold_accuracies = Vec::with_capacity(folds_used);
    for f in 0..folds_used {
        let test_idx = &assignment[f];
        let train_idx: Vec<usize> = (0..folds_used)
            .filter(|&g| g != f)
            .flat_map(|g| assignment[g].iter().copied())
            .collect();
        let model = train_svm(
            &data.subset(&train_idx),
            lambda,
            epochs,
            seed.wrapping_add(1 + f as u64),
        )?;
        fold_accuracies.push(model.accuracy(&data.subset(test_idx)));
    }
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / folds_used as f64;
    Ok(CvReport { fold_accuracies, mean_accuracy, folds_used })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub lambda: f64,
    pub epochs: usize,
    pub seed: u64,
}

pub fn write_model_json(record: &ModelRecord, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(record)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}

pub fn write_cv_report_json(report: &CvReport, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    atomic_write(path, text.as_bytes())
}
