//! IB1-IG: instance storage and weighted-overlap nearest-neighbor
//! classification.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::features::Instance;

use super::{argmax_class, check_arity, feature_weights, LearnerError, ValueTable, Weighting};

/// A stored training instance: interned feature values, class id, and the
/// number of times it occurred in the training data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Entry {
    pub(crate) features: Vec<u32>,
    pub(crate) class: u32,
    pub(crate) count: u64,
}

/// The trained IB1-IG model: deduplicated instances, feature weights, and
/// class statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryModel {
    pub(crate) arity: usize,
    pub(crate) k: usize,
    pub(crate) weights: Vec<f64>,
    pub(crate) values: ValueTable,
    pub(crate) classes: ValueTable,
    pub(crate) class_counts: Vec<u64>,
    pub(crate) entries: Vec<Entry>,
}

/// A classification outcome: the winning class plus the full score
/// distribution over classes seen in the neighbor set, in class-table
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: String,
    pub scores: Vec<(String, f64)>,
}

impl MemoryModel {
    /// Stores the training data. Identical (features, label) pairs collapse
    /// into one entry with a multiplicity count; this is an optimization
    /// with no effect on classification.
    pub fn train(
        instances: &[Instance],
        k: usize,
        weighting: Weighting,
    ) -> Result<MemoryModel, LearnerError> {
        if k == 0 {
            return Err(LearnerError::BadNeighborCount);
        }
        let arity = check_arity(instances)?;
        let weights = feature_weights(instances, weighting)?;

        let mut values = ValueTable::default();
        let mut classes = ValueTable::default();
        let mut dedup: BTreeMap<(Vec<u32>, u32), u64> = BTreeMap::new();
        for instance in instances {
            let row: Vec<u32> = instance.features.iter().map(|v| values.intern(v)).collect();
            let class = classes.intern(&instance.label);
            *dedup.entry((row, class)).or_default() += 1;
        }
        let mut class_counts = alloc::vec![0u64; classes.len()];
        let mut entries = Vec::with_capacity(dedup.len());
        for ((features, class), count) in dedup {
            class_counts[class as usize] += count;
            entries.push(Entry {
                features,
                class,
                count,
            });
        }
        Ok(MemoryModel {
            arity,
            k,
            weights,
            values,
            classes,
            class_counts,
            entries,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Number of distinct stored entries.
    pub fn stored(&self) -> usize {
        self.entries.len()
    }

    /// Total multiplicity, i.e. the training-set size.
    pub fn training_size(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Training frequency per class, keyed by class name.
    pub fn class_priors(&self) -> Vec<(String, u64)> {
        self.class_counts
            .iter()
            .enumerate()
            .map(|(id, &count)| (self.classes.name(id as u32).to_string(), count))
            .collect()
    }

    /// Classifies one feature vector.
    ///
    /// The distance to a stored entry is the sum, in feature order, of the
    /// weights of the positions where the two vectors differ; an unseen
    /// query value differs from everything. When entries at distance zero
    /// exist the vote is taken among those alone; otherwise every entry in
    /// the `k` smallest distinct distance shells votes with its
    /// multiplicity. Ties break toward the class with the higher training
    /// frequency, then the lexicographically smaller name.
    pub fn classify(&self, features: &[String]) -> Result<Classification, LearnerError> {
        self.classify_refs(&features.iter().map(String::as_str).collect::<Vec<_>>())
    }

    pub fn classify_refs(&self, features: &[&str]) -> Result<Classification, LearnerError> {
        if features.len() != self.arity {
            return Err(LearnerError::ArityMismatch {
                expected: self.arity,
                found: features.len(),
            });
        }
        let query: Vec<Option<u32>> = features.iter().map(|v| self.values.lookup(v)).collect();

        let mut distances = Vec::with_capacity(self.entries.len());
        for entry in &self.entries {
            let mut distance = 0.0;
            for (f, stored) in entry.features.iter().enumerate() {
                if query[f] != Some(*stored) {
                    distance += self.weights[f];
                }
            }
            distances.push(distance);
        }

        // The k smallest distinct distance values; an exact match collapses
        // the neighbor set to the zero-distance shell.
        let mut shells: Vec<f64> = distances.clone();
        shells.sort_by(f64::total_cmp);
        shells.dedup();
        let cutoff = if shells.first() == Some(&0.0) {
            0.0
        } else {
            shells[shells.len().min(self.k) - 1]
        };

        let mut scores: BTreeMap<u32, f64> = BTreeMap::new();
        for (entry, &distance) in self.entries.iter().zip(&distances) {
            if distance <= cutoff {
                *scores.entry(entry.class).or_default() += entry.count as f64;
            }
        }
        let (_, label) = argmax_class(
            scores.iter().map(|(&c, &s)| (c, s)),
            &self.class_counts,
            &self.classes,
        )
        .expect("non-empty model always yields a neighbor set");
        Ok(Classification {
            label: label.to_string(),
            scores: scores
                .into_iter()
                .map(|(c, s)| (self.classes.name(c).to_string(), s))
                .collect(),
        })
    }
}
