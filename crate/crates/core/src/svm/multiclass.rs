//! One-vs-one multiclass classification over binary SMO-trained models,
//! with majority voting and deterministic tie-breaking.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::smo::{smo_train, BinarySvmModel, TrainConfig};
use crate::{Error, Result};

/// Labeled feature rows; the labels are arbitrary integers (for sub-range
/// classifiers they are sub-range indices).
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<i32>,
}

impl TrainingSet {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<i32>) -> Result<Self> {
        let set = Self { features, labels };
        set.validate()?;
        Ok(set)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Validation("empty training set".into()));
        }
        if self.features.len() != self.labels.len() {
            return Err(Error::Validation(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let dim = self.features[0].len();
        if dim == 0 || self.features.iter().any(|f| f.len() != dim) {
            return Err(Error::Validation(
                "feature rows must share one positive length".into(),
            ));
        }
        if self.features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "training features must be finite".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.features[0].len()
    }

    /// Distinct labels in increasing order.
    pub fn class_labels(&self) -> Vec<i32> {
        let mut labels: Vec<i32> = self.labels.clone();
        labels.sort_unstable();
        labels.dedup();
        labels
    }

    pub fn class_count(&self) -> usize {
        self.class_labels().len()
    }
}

/// One trained pairwise model: votes `pos` when the binary decision is +1,
/// `neg` when it is −1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub pos: i32,
    pub neg: i32,
    pub model: BinarySvmModel,
}

/// One-vs-one multiclass model mapping class labels to parameter sub-ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvmModel {
    pub class_labels: Vec<i32>,
    /// label → (low, high) in nm.
    pub class_to_subrange: BTreeMap<i32, (f64, f64)>,
    /// Exactly n(n−1)/2 models, in lexicographic (pos, neg) order.
    pub binary_models: Vec<PairModel>,
}

impl MulticlassSvmModel {
    pub fn validate(&self) -> Result<()> {
        let n = self.class_labels.len();
        if n < 2 {
            return Err(Error::Validation("need at least 2 classes".into()));
        }
        if self.binary_models.len() != n * (n - 1) / 2 {
            return Err(Error::Validation(format!(
                "{} classes require {} pairwise models, found {}",
                n,
                n * (n - 1) / 2,
                self.binary_models.len()
            )));
        }
        for label in &self.class_labels {
            if !self.class_to_subrange.contains_key(label) {
                return Err(Error::Validation(format!(
                    "class {label} has no sub-range mapping"
                )));
            }
        }
        Ok(())
    }
}

/// Trains all n(n−1)/2 pairwise binary models. Every class in
/// `class_to_subrange` must appear in the data and vice versa. The lower
/// label of each pair is the +1 class.
pub fn ovo_train(
    data: &TrainingSet,
    kernel: &KernelSpec,
    cfg: &TrainConfig,
    class_to_subrange: &BTreeMap<i32, (f64, f64)>,
) -> Result<MulticlassSvmModel> {
    data.validate()?;
    let class_labels = data.class_labels();
    if class_labels.len() < 2 {
        return Err(Error::Validation(
            "training data must contain at least 2 classes".into(),
        ));
    }
    for label in class_to_subrange.keys() {
        if !class_labels.contains(label) {
            return Err(Error::Validation(format!(
                "class {label} is mapped to a sub-range but absent from the data"
            )));
        }
    }
    for label in &class_labels {
        if !class_to_subrange.contains_key(label) {
            return Err(Error::Validation(format!(
                "class {label} appears in the data but has no sub-range"
            )));
        }
    }

    let pairs: Vec<(i32, i32)> = class_labels
        .iter()
        .enumerate()
        .flat_map(|(a, &pos)| class_labels[a + 1..].iter().map(move |&neg| (pos, neg)))
        .collect();

    let binary_models = pairs
        .par_iter()
        .map(|&(pos, neg)| {
            let mut features = Vec::new();
            let mut labels = Vec::new();
            for (f, &l) in data.features.iter().zip(&data.labels) {
                if l == pos {
                    features.push(f.clone());
                    labels.push(1);
                } else if l == neg {
                    features.push(f.clone());
                    labels.push(-1);
                }
            }
            let outcome = smo_train(&features, &labels, kernel, cfg)?;
            Ok(PairModel {
                pos,
                neg,
                model: outcome.model,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let model = MulticlassSvmModel {
        class_labels,
        class_to_subrange: class_to_subrange.clone(),
        binary_models,
    };
    model.validate()?;
    Ok(model)
}

/// Majority vote over all pairwise models; ties go to the lowest label.
/// Returns the winning label and its sub-range.
pub fn ovo_classify(model: &MulticlassSvmModel, x: &[f64]) -> Result<(i32, (f64, f64))> {
    model.validate()?;
    let mut votes: BTreeMap<i32, usize> = BTreeMap::new();
    for pair in &model.binary_models {
        let winner = if pair.model.decision(x)? == 1 {
            pair.pos
        } else {
            pair.neg
        };
        *votes.entry(winner).or_insert(0) += 1;
    }
    // BTreeMap iterates in ascending label order, and strict > keeps the
    // first (lowest) label on ties.
    let mut best_label = model.class_labels[0];
    let mut best_votes = 0usize;
    for (&label, &count) in &votes {
        if count > best_votes {
            best_votes = count;
            best_label = label;
        }
    }
    let subrange = model.class_to_subrange[&best_label];
    Ok((best_label, subrange))
}

/// Fraction of `test` rows whose predicted label matches.
pub fn classification_accuracy(model: &MulticlassSvmModel, test: &TrainingSet) -> Result<f64> {
    test.validate()?;
    let mut correct = 0usize;
    for (x, &label) in test.features.iter().zip(&test.labels) {
        if ovo_classify(model, x)?.0 == label {
            correct += 1;
        }
    }
    Ok(correct as f64 / test.features.len() as f64)
}
