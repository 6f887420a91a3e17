//! IGTree: a decision-tree approximation of IB1-IG.
//!
//! Features are tested in descending weight order (ties broken by feature
//! position). Every node stores the most frequent class among the training
//! items that reach it; expansion stops when those items share one class or
//! no features remain. Classification walks matching branches and falls
//! back to the current node's default class when no branch matches.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::features::Instance;

use super::{argmax_class, check_arity, LearnerError, ValueTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct TreeNode {
    pub(crate) default_class: u32,
    /// Branches keyed by interned feature value, sorted by key.
    pub(crate) branches: Vec<(u32, TreeNode)>,
}

impl TreeNode {
    fn branch(&self, value: u32) -> Option<&TreeNode> {
        self.branches
            .binary_search_by_key(&value, |(v, _)| *v)
            .ok()
            .map(|i| &self.branches[i].1)
    }
}

/// The trained IGTree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeModel {
    pub(crate) arity: usize,
    /// Feature positions in test order (descending weight).
    pub(crate) feature_order: Vec<usize>,
    pub(crate) weights: Vec<f64>,
    pub(crate) values: ValueTable,
    pub(crate) classes: ValueTable,
    pub(crate) class_counts: Vec<u64>,
    pub(crate) root: TreeNode,
}

impl TreeModel {
    /// Builds the tree from training instances and their feature weights.
    pub fn build(instances: &[Instance], weights: &[f64]) -> Result<TreeModel, LearnerError> {
        let arity = check_arity(instances)?;
        if weights.len() != arity {
            return Err(LearnerError::ArityMismatch {
                expected: arity,
                found: weights.len(),
            });
        }
        let mut feature_order: Vec<usize> = (0..arity).collect();
        feature_order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then_with(|| a.cmp(&b)));

        let mut values = ValueTable::default();
        let mut classes = ValueTable::default();
        let rows: Vec<(Vec<u32>, u32)> = instances
            .iter()
            .map(|instance| {
                (
                    instance.features.iter().map(|v| values.intern(v)).collect(),
                    classes.intern(&instance.label),
                )
            })
            .collect();
        let mut class_counts = alloc::vec![0u64; classes.len()];
        for (_, class) in &rows {
            class_counts[*class as usize] += 1;
        }

        let items: Vec<usize> = (0..rows.len()).collect();
        let root = grow(&rows, &items, &feature_order, 0, &class_counts, &classes);
        Ok(TreeModel {
            arity,
            feature_order,
            weights: weights.to_vec(),
            values,
            classes,
            class_counts,
            root,
        })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Feature positions in the order the tree tests them.
    pub fn feature_order(&self) -> &[usize] {
        &self.feature_order
    }

    /// Classifies one feature vector.
    pub fn classify(&self, features: &[String]) -> Result<String, LearnerError> {
        self.classify_refs(&features.iter().map(String::as_str).collect::<Vec<_>>())
            .map(|label| label.to_string())
    }

    pub fn classify_refs(&self, features: &[&str]) -> Result<&str, LearnerError> {
        if features.len() != self.arity {
            return Err(LearnerError::ArityMismatch {
                expected: self.arity,
                found: features.len(),
            });
        }
        let mut node = &self.root;
        for &f in &self.feature_order {
            if node.branches.is_empty() {
                break;
            }
            let next = self
                .values
                .lookup(features[f])
                .and_then(|value| node.branch(value));
            match next {
                Some(child) => node = child,
                None => break,
            }
        }
        Ok(self.classes.name(node.default_class))
    }
}

fn grow(
    rows: &[(Vec<u32>, u32)],
    items: &[usize],
    feature_order: &[usize],
    depth: usize,
    class_counts: &[u64],
    classes: &ValueTable,
) -> TreeNode {
    let mut local: BTreeMap<u32, u64> = BTreeMap::new();
    for &i in items {
        *local.entry(rows[i].1).or_default() += 1;
    }
    let (default_class, _) = argmax_class(
        local.iter().map(|(&c, &n)| (c, n as f64)),
        class_counts,
        classes,
    )
    .expect("a node always covers at least one item");

    let pure = local.len() == 1;
    if pure || depth == feature_order.len() {
        return TreeNode {
            default_class,
            branches: Vec::new(),
        };
    }
    let feature = feature_order[depth];
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &i in items {
        groups.entry(rows[i].0[feature]).or_default().push(i);
    }
    let branches = groups
        .into_iter()
        .map(|(value, group)| {
            (
                value,
                grow(
                    rows,
                    &group,
                    feature_order,
                    depth + 1,
                    class_counts,
                    classes,
                ),
            )
        })
        .collect();
    TreeNode {
        default_class,
        branches,
    }
}
