//! Memory-based classification over categorical features.
//!
//! Two learners share one weighting step. IB1-IG stores every training
//! instance and classifies by majority vote over the nearest neighbors
//! under a weighted overlap distance, where each feature's weight is the
//! amount of information it contributes about the class. IGTree compresses
//! the same training data into a decision tree that tests features in
//! descending weight order and answers with node-default classes when no
//! branch matches.
//!
//! Determinism is a contract here: equal training data and equal queries
//! give equal answers on every platform, and equal models serialize to
//! byte-identical text.

mod memory;
pub(crate) mod persist;
mod tree;

pub use memory::{Classification, MemoryModel};
pub use persist::{load_model, save_model, Model, PersistError};
pub use tree::TreeModel;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::features::Instance;
use crate::math;

/// One non-negative weight per feature position.
pub type FeatureWeights = Vec<f64>;

/// How feature weights are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weighting {
    /// Plain information gain (the default).
    #[default]
    InfoGain,
    /// Information gain divided by the feature's own entropy.
    GainRatio,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LearnerError {
    /// Training requires at least one instance.
    NoInstances,
    /// An instance or query whose arity differs from the model's.
    ArityMismatch { expected: usize, found: usize },
    /// k must be at least one.
    BadNeighborCount,
}

impl core::fmt::Display for LearnerError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            LearnerError::NoInstances => f.write_str("no training instances"),
            LearnerError::ArityMismatch { expected, found } => {
                write!(f, "expected {expected} features, found {found}")
            }
            LearnerError::BadNeighborCount => f.write_str("k must be at least 1"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LearnerError {}

fn check_arity(instances: &[Instance]) -> Result<usize, LearnerError> {
    let arity = instances.first().ok_or(LearnerError::NoInstances)?.arity();
    for instance in instances {
        if instance.arity() != arity {
            return Err(LearnerError::ArityMismatch {
                expected: arity,
                found: instance.arity(),
            });
        }
    }
    Ok(arity)
}

/// Entropy in bits of a count distribution.
fn entropy(counts: impl Iterator<Item = u64>, total: u64) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    let mut h = 0.0;
    for count in counts {
        if count > 0 {
            let p = count as f64 / total;
            h -= p * math::log2(p);
        }
    }
    h
}

/// Information-gain weights: for each feature `f`,
/// `w_f = H(C) - sum_v P(v) * H(C | f = v)` with entropies in bits and
/// maximum-likelihood probabilities.
///
/// A feature whose value is constant across the training data gets weight
/// zero exactly.
pub fn information_gain_weights(instances: &[Instance]) -> Result<FeatureWeights, LearnerError> {
    feature_weights(instances, Weighting::InfoGain)
}

/// Weights under the chosen normalization; see [`Weighting`].
pub fn feature_weights(
    instances: &[Instance],
    weighting: Weighting,
) -> Result<FeatureWeights, LearnerError> {
    let arity = check_arity(instances)?;
    let total = instances.len() as u64;

    let mut class_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for instance in instances {
        *class_counts.entry(instance.label.as_str()).or_default() += 1;
    }
    let class_entropy = entropy(class_counts.values().copied(), total);

    let mut weights = Vec::with_capacity(arity);
    for f in 0..arity {
        // Per value: total count and class distribution.
        let mut by_value: BTreeMap<&str, (u64, BTreeMap<&str, u64>)> = BTreeMap::new();
        for instance in instances {
            let slot = by_value.entry(instance.features[f].as_str()).or_default();
            slot.0 += 1;
            *slot.1.entry(instance.label.as_str()).or_default() += 1;
        }
        let mut conditional = 0.0;
        let mut split_info = 0.0;
        for (count, classes) in by_value.values() {
            let p = *count as f64 / total as f64;
            conditional += p * entropy(classes.values().copied(), *count);
            split_info -= p * math::log2(p);
        }
        let gain = (class_entropy - conditional).max(0.0);
        let weight = match weighting {
            Weighting::InfoGain => gain,
            Weighting::GainRatio => {
                if split_info > 0.0 {
                    gain / split_info
                } else {
                    0.0
                }
            }
        };
        weights.push(weight);
    }
    Ok(weights)
}

/// Interned categorical values: id assignment in first-seen order.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct ValueTable {
    names: Vec<String>,
    index: BTreeMap<String, u32>,
}

impl ValueTable {
    pub(crate) fn intern(&mut self, name: &str) -> u32 {
        if let Some(&id) = self.index.get(name) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        id
    }

    pub(crate) fn lookup(&self, name: &str) -> Option<u32> {
        self.index.get(name).copied()
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub(crate) fn len(&self) -> usize {
        self.names.len()
    }

    pub(crate) fn names(&self) -> &[String] {
        &self.names
    }

    pub(crate) fn from_names(names: Vec<String>) -> Self {
        let index = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        ValueTable { names, index }
    }
}

/// Shared tie-breaking for class votes: higher score wins, then higher
/// training frequency, then lexicographically smaller class name.
pub(crate) fn argmax_class<'a>(
    scores: impl Iterator<Item = (u32, f64)>,
    class_counts: &[u64],
    classes: &'a ValueTable,
) -> Option<(u32, &'a str)> {
    let mut best: Option<(u32, f64)> = None;
    for (class, score) in scores {
        best = Some(match best {
            None => (class, score),
            Some((bc, bs)) => {
                let better = score > bs
                    || (score == bs
                        && (class_counts[class as usize] > class_counts[bc as usize]
                            || (class_counts[class as usize] == class_counts[bc as usize]
                                && classes.name(class) < classes.name(bc))));
                if better {
                    (class, score)
                } else {
                    (bc, bs)
                }
            }
        });
    }
    best.map(|(c, _)| (c, classes.name(c)))
}

/// Trains an IB1-IG model with information-gain weights.
pub fn ib1ig_train(instances: &[Instance], k: usize) -> Result<MemoryModel, LearnerError> {
    MemoryModel::train(instances, k, Weighting::InfoGain)
}

/// Classifies one feature vector with an IB1-IG model.
pub fn ib1ig_classify(
    model: &MemoryModel,
    features: &[String],
) -> Result<Classification, LearnerError> {
    model.classify_refs(&features.iter().map(String::as_str).collect::<Vec<_>>())
}

/// Builds an IGTree from training instances and precomputed weights.
pub fn igtree_build(instances: &[Instance], weights: &[f64]) -> Result<TreeModel, LearnerError> {
    TreeModel::build(instances, weights)
}

/// Classifies one feature vector with an IGTree.
pub fn igtree_classify(tree: &TreeModel, features: &[String]) -> Result<String, LearnerError> {
    tree.classify_refs(&features.iter().map(String::as_str).collect::<Vec<_>>())
        .map(|label| label.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn instance(features: &[&str], label: &str) -> Instance {
        Instance::new(features.iter().map(|f| f.to_string()).collect(), label)
    }

    #[test]
    fn perfectly_informative_feature_gets_the_class_entropy() {
        let mut instances = Vec::new();
        for _ in 0..5 {
            instances.push(instance(&["x"], "a"));
            instances.push(instance(&["y"], "b"));
        }
        let weights = information_gain_weights(&instances).unwrap();
        assert!((weights[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_feature_gets_zero_weight() {
        let instances = vec![instance(&["same", "p"], "a"), instance(&["same", "q"], "b")];
        let weights = information_gain_weights(&instances).unwrap();
        assert_eq!(weights[0], 0.0);
    }

    #[test]
    fn hand_computed_information_gain() {
        let instances = vec![
            instance(&["1"], "a"),
            instance(&["1"], "b"),
            instance(&["2"], "a"),
            instance(&["2"], "a"),
        ];
        let weights = information_gain_weights(&instances).unwrap();
        assert!((weights[0] - 0.3113).abs() < 1e-4);
    }

    #[test]
    fn weights_stay_within_class_entropy() {
        let instances = vec![
            instance(&["1", "x"], "a"),
            instance(&["2", "x"], "b"),
            instance(&["1", "y"], "a"),
            instance(&["3", "y"], "b"),
        ];
        let class_entropy = 1.0;
        for w in information_gain_weights(&instances).unwrap() {
            assert!(w >= 0.0 && w <= class_entropy + 1e-12);
        }
    }

    #[test]
    fn gain_ratio_divides_by_feature_entropy() {
        let instances = vec![
            instance(&["1"], "a"),
            instance(&["2"], "a"),
            instance(&["3"], "b"),
            instance(&["4"], "b"),
        ];
        // Gain is 1 bit; the feature's own entropy is 2 bits.
        let ig = feature_weights(&instances, Weighting::InfoGain).unwrap();
        let gr = feature_weights(&instances, Weighting::GainRatio).unwrap();
        assert!((ig[0] - 1.0).abs() < 1e-12);
        assert!((gr[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn empty_training_data_is_an_error() {
        assert_eq!(
            information_gain_weights(&[]).unwrap_err(),
            LearnerError::NoInstances
        );
    }

    #[test]
    fn mixed_arity_is_an_error() {
        let instances = vec![instance(&["a"], "x"), instance(&["a", "b"], "x")];
        assert_eq!(
            information_gain_weights(&instances).unwrap_err(),
            LearnerError::ArityMismatch {
                expected: 1,
                found: 2
            }
        );
    }
}
