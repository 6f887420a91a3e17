//! Versioned text persistence for trained models.
//!
//! The format is line-oriented and deterministic: equal models produce
//! byte-identical files. Layout (`memory` kind):
//!
//! ```text
//! npchunk-model 1
//! kind memory
//! arity <n>
//! k <n>
//! classes <n>
//! <name> <training count>     (one line per class, id order)
//! values <n>
//! <name>                      (one line per value, id order)
//! weights <n>
//! <w0> <w1> ...               (one line, full-precision decimals)
//! entries <n>
//! <f0> ... <fA-1> <class> <count>
//! end
//! ```
//!
//! The `tree` kind replaces `k` with a `order` line and `entries` with a
//! preorder `tree` section of `node <default> <branches>` and
//! `branch <value>` lines. Feature values and class names are stored
//! verbatim, one per line, so they must not contain newlines; names with
//! spaces or tabs are rejected at save time.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::memory::{Entry, MemoryModel};
use super::tree::{TreeModel, TreeNode};
use super::ValueTable;

const MAGIC: &str = "npchunk-model";
const VERSION: u32 = 1;

/// Either trained model kind, for format-agnostic loading.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Memory(MemoryModel),
    Tree(TreeModel),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PersistError {
    /// The file does not start with the expected header.
    NotAModelFile,
    /// A model written by an unsupported format version.
    VersionMismatch { found: String },
    /// Structural damage; carries the 1-based line and what went wrong.
    Corrupt { line: usize, reason: String },
    /// A name that cannot be stored in the line format.
    UnencodableName { name: String },
}

impl core::fmt::Display for PersistError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PersistError::NotAModelFile => f.write_str("not a model file (bad header)"),
            PersistError::VersionMismatch { found } => {
                write!(f, "unsupported model format version {found}")
            }
            PersistError::Corrupt { line, reason } => {
                write!(f, "corrupt model file at line {line}: {reason}")
            }
            PersistError::UnencodableName { name } => {
                write!(f, "name {name:?} cannot be stored (contains whitespace)")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PersistError {}

fn check_names(table: &ValueTable) -> Result<(), PersistError> {
    for name in table.names() {
        if name.is_empty() || name.contains([' ', '\t', '\n', '\r']) {
            return Err(PersistError::UnencodableName { name: name.clone() });
        }
    }
    Ok(())
}

fn push_floats(out: &mut String, floats: &[f64]) {
    for (i, w) in floats.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&format!("{w}"));
    }
    out.push('\n');
}

/// Serializes either model kind.
pub fn save_model(model: &Model) -> Result<String, PersistError> {
    match model {
        Model::Memory(m) => m.to_text(),
        Model::Tree(t) => t.to_text(),
    }
}

/// Loads either model kind, dispatching on the `kind` line.
pub fn load_model(text: &str) -> Result<Model, PersistError> {
    let mut lines = Lines::new(text);
    let model = read_model(&mut lines)?;
    lines.expect_no_trailing()?;
    Ok(model)
}

/// Reads one complete model (header through `end`) from a cursor, leaving
/// any following lines unconsumed. This is what lets larger containers
/// embed model sections verbatim.
pub(crate) fn read_model(lines: &mut Lines<'_>) -> Result<Model, PersistError> {
    lines.expect_header()?;
    let kind = lines.expect_field("kind")?;
    match kind.as_str() {
        "memory" => MemoryModel::parse_body(lines).map(Model::Memory),
        "tree" => TreeModel::parse_body(lines).map(Model::Tree),
        other => Err(lines.corrupt(format!("unknown model kind {other:?}"))),
    }
}

impl MemoryModel {
    /// Serializes the model; inverse of [`MemoryModel::from_text`].
    pub fn to_text(&self) -> Result<String, PersistError> {
        check_names(&self.classes)?;
        check_names(&self.values)?;
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} {VERSION}\nkind memory\n"));
        out.push_str(&format!("arity {}\nk {}\n", self.arity, self.k));
        out.push_str(&format!("classes {}\n", self.classes.len()));
        for (id, name) in self.classes.names().iter().enumerate() {
            out.push_str(&format!("{name} {}\n", self.class_counts[id]));
        }
        out.push_str(&format!("values {}\n", self.values.len()));
        for name in self.values.names() {
            out.push_str(name);
            out.push('\n');
        }
        out.push_str(&format!("weights {}\n", self.weights.len()));
        push_floats(&mut out, &self.weights);
        out.push_str(&format!("entries {}\n", self.entries.len()));
        for entry in &self.entries {
            let mut line = String::new();
            for f in &entry.features {
                line.push_str(&format!("{f} "));
            }
            line.push_str(&format!("{} {}", entry.class, entry.count));
            out.push_str(&line);
            out.push('\n');
        }
        out.push_str("end\n");
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<MemoryModel, PersistError> {
        match load_model(text)? {
            Model::Memory(m) => Ok(m),
            Model::Tree(_) => Err(PersistError::Corrupt {
                line: 2,
                reason: "expected a memory model, found a tree".to_string(),
            }),
        }
    }

    fn parse_body(lines: &mut Lines<'_>) -> Result<MemoryModel, PersistError> {
        let arity = lines.expect_usize("arity")?;
        let k = lines.expect_usize("k")?;
        let (classes, class_counts) = lines.read_classes()?;
        let values = lines.read_values()?;
        let weights = lines.read_weights(arity)?;
        let n_entries = lines.expect_usize("entries")?;
        let mut entries = Vec::with_capacity(n_entries);
        for _ in 0..n_entries {
            let fields = lines.next_fields()?;
            if fields.len() != arity + 2 {
                return Err(lines.corrupt(format!(
                    "entry needs {} fields, found {}",
                    arity + 2,
                    fields.len()
                )));
            }
            let features = fields[..arity]
                .iter()
                .map(|f| lines.parse_id(f, values.len()))
                .collect::<Result<Vec<u32>, _>>()?;
            let class = lines.parse_id(fields[arity], classes.len())?;
            let count: u64 = fields[arity + 1]
                .parse()
                .map_err(|_| lines.corrupt("bad entry count".to_string()))?;
            if count == 0 {
                return Err(lines.corrupt("entry count must be positive".to_string()));
            }
            entries.push(Entry {
                features,
                class,
                count,
            });
        }
        lines.expect_end()?;
        if k == 0 {
            return Err(lines.corrupt("k must be at least 1".to_string()));
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
}

impl TreeModel {
    /// Serializes the tree; inverse of [`TreeModel::from_text`].
    pub fn to_text(&self) -> Result<String, PersistError> {
        check_names(&self.classes)?;
        check_names(&self.values)?;
        let mut out = String::new();
        out.push_str(&format!("{MAGIC} {VERSION}\nkind tree\n"));
        out.push_str(&format!("arity {}\n", self.arity));
        out.push_str(&format!("order {}\n", self.feature_order.len()));
        let order_line: Vec<String> = self.feature_order.iter().map(|f| f.to_string()).collect();
        out.push_str(&order_line.join(" "));
        out.push('\n');
        out.push_str(&format!("classes {}\n", self.classes.len()));
        for (id, name) in self.classes.names().iter().enumerate() {
            out.push_str(&format!("{name} {}\n", self.class_counts[id]));
        }
        out.push_str(&format!("values {}\n", self.values.len()));
        for name in self.values.names() {
            out.push_str(name);
            out.push('\n');
        }
        out.push_str(&format!("weights {}\n", self.weights.len()));
        push_floats(&mut out, &self.weights);
        out.push_str("tree\n");
        write_node(&mut out, &self.root);
        out.push_str("end\n");
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<TreeModel, PersistError> {
        match load_model(text)? {
            Model::Tree(t) => Ok(t),
            Model::Memory(_) => Err(PersistError::Corrupt {
                line: 2,
                reason: "expected a tree model, found a memory model".to_string(),
            }),
        }
    }

    fn parse_body(lines: &mut Lines<'_>) -> Result<TreeModel, PersistError> {
        let arity = lines.expect_usize("arity")?;
        let n_order = lines.expect_usize("order")?;
        if n_order != arity {
            return Err(lines.corrupt("feature order length differs from arity".to_string()));
        }
        let fields = lines.next_fields()?;
        if fields.len() != arity {
            return Err(lines.corrupt("wrong number of feature positions".to_string()));
        }
        let mut feature_order = Vec::with_capacity(arity);
        let mut seen = alloc::vec![false; arity];
        for f in fields {
            let pos: usize = f
                .parse()
                .map_err(|_| lines.corrupt("bad feature position".to_string()))?;
            if pos >= arity || seen[pos] {
                return Err(lines.corrupt("feature order is not a permutation".to_string()));
            }
            seen[pos] = true;
            feature_order.push(pos);
        }
        let (classes, class_counts) = lines.read_classes()?;
        let values = lines.read_values()?;
        let weights = lines.read_weights(arity)?;
        lines.expect_literal("tree")?;
        let root = read_node(lines, classes.len(), values.len())?;
        lines.expect_end()?;
        Ok(TreeModel {
            arity,
            feature_order,
            weights,
            values,
            classes,
            class_counts,
            root,
        })
    }
}

fn write_node(out: &mut String, node: &TreeNode) {
    out.push_str(&format!(
        "node {} {}\n",
        node.default_class,
        node.branches.len()
    ));
    for (value, child) in &node.branches {
        out.push_str(&format!("branch {value}\n"));
        write_node(out, child);
    }
}

fn read_node(
    lines: &mut Lines<'_>,
    n_classes: usize,
    n_values: usize,
) -> Result<TreeNode, PersistError> {
    let fields = lines.next_fields()?;
    if fields.len() != 3 || fields[0] != "node" {
        return Err(lines.corrupt("expected a node line".to_string()));
    }
    let default_class = lines.parse_id(fields[1], n_classes)?;
    let n_branches: usize = fields[2]
        .parse()
        .map_err(|_| lines.corrupt("bad branch count".to_string()))?;
    let mut branches = Vec::with_capacity(n_branches);
    let mut last_value: Option<u32> = None;
    for _ in 0..n_branches {
        let fields = lines.next_fields()?;
        if fields.len() != 2 || fields[0] != "branch" {
            return Err(lines.corrupt("expected a branch line".to_string()));
        }
        let value = lines.parse_id(fields[1], n_values)?;
        if last_value.is_some_and(|prev| prev >= value) {
            return Err(lines.corrupt("branch values out of order".to_string()));
        }
        last_value = Some(value);
        branches.push((value, read_node(lines, n_classes, n_values)?));
    }
    Ok(TreeNode {
        default_class,
        branches,
    })
}

/// Line cursor with 1-based position tracking for error messages.
pub(crate) struct Lines<'a> {
    iter: core::str::Lines<'a>,
    line: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines(),
            line: 0,
        }
    }

    pub(crate) fn corrupt(&self, reason: String) -> PersistError {
        PersistError::Corrupt {
            line: self.line,
            reason,
        }
    }

    fn next_line(&mut self) -> Result<&'a str, PersistError> {
        self.line += 1;
        self.iter.next().ok_or(PersistError::Corrupt {
            line: self.line,
            reason: "unexpected end of file".to_string(),
        })
    }

    fn next_fields(&mut self) -> Result<Vec<&'a str>, PersistError> {
        Ok(self.next_line()?.split(' ').collect())
    }

    fn expect_header(&mut self) -> Result<(), PersistError> {
        let line = match self.next_line() {
            Ok(line) => line,
            Err(_) => return Err(PersistError::NotAModelFile),
        };
        let mut parts = line.split(' ');
        if parts.next() != Some(MAGIC) {
            return Err(PersistError::NotAModelFile);
        }
        match parts.next() {
            Some(v) if v == VERSION.to_string() => Ok(()),
            Some(v) => Err(PersistError::VersionMismatch {
                found: v.to_string(),
            }),
            None => Err(PersistError::NotAModelFile),
        }
    }

    pub(crate) fn expect_field(&mut self, key: &str) -> Result<String, PersistError> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.to_string()),
            _ => Err(self.corrupt(format!("expected {key:?} line, found {line:?}"))),
        }
    }

    pub(crate) fn expect_usize(&mut self, key: &str) -> Result<usize, PersistError> {
        self.expect_field(key)?
            .parse()
            .map_err(|_| self.corrupt(format!("bad {key} value")))
    }

    pub(crate) fn expect_literal(&mut self, literal: &str) -> Result<(), PersistError> {
        let line = self.next_line()?;
        if line == literal {
            Ok(())
        } else {
            Err(self.corrupt(format!("expected {literal:?}, found {line:?}")))
        }
    }

    pub(crate) fn expect_no_trailing(&mut self) -> Result<(), PersistError> {
        self.line += 1;
        match self.iter.next() {
            None => Ok(()),
            Some(extra) => Err(self.corrupt(format!("trailing content {extra:?}"))),
        }
    }

    fn expect_end(&mut self) -> Result<(), PersistError> {
        self.expect_literal("end")
    }

    fn parse_id(&self, field: &str, table_len: usize) -> Result<u32, PersistError> {
        let id: u32 = field
            .parse()
            .map_err(|_| self.corrupt(format!("bad id {field:?}")))?;
        if (id as usize) >= table_len {
            return Err(self.corrupt(format!("id {id} out of range (table has {table_len})")));
        }
        Ok(id)
    }

    fn read_classes(&mut self) -> Result<(ValueTable, Vec<u64>), PersistError> {
        let n = self.expect_usize("classes")?;
        let mut names = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        for _ in 0..n {
            let line = self.next_line()?;
            let (name, count) = line
                .split_once(' ')
                .ok_or_else(|| self.corrupt("expected `<class> <count>`".to_string()))?;
            let count: u64 = count
                .parse()
                .map_err(|_| self.corrupt("bad class count".to_string()))?;
            names.push(name.to_string());
            counts.push(count);
        }
        Ok((ValueTable::from_names(names), counts))
    }

    fn read_values(&mut self) -> Result<ValueTable, PersistError> {
        let n = self.expect_usize("values")?;
        let mut names = Vec::with_capacity(n);
        for _ in 0..n {
            names.push(self.next_line()?.to_string());
        }
        Ok(ValueTable::from_names(names))
    }

    fn read_weights(&mut self, arity: usize) -> Result<Vec<f64>, PersistError> {
        let n = self.expect_usize("weights")?;
        if n != arity {
            return Err(self.corrupt("weight count differs from arity".to_string()));
        }
        let fields = self.next_fields()?;
        if fields.len() != n {
            return Err(self.corrupt("wrong number of weights".to_string()));
        }
        let mut weights = Vec::with_capacity(n);
        for f in fields {
            let w: f64 = f
                .parse()
                .map_err(|_| self.corrupt(format!("bad weight {f:?}")))?;
            if !w.is_finite() || w < 0.0 {
                return Err(self.corrupt(format!("weight {f} is not a non-negative finite number")));
            }
            weights.push(w);
        }
        Ok(weights)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::Instance;
    use crate::learner::{information_gain_weights, Weighting};
    use alloc::vec;

    fn instance(features: &[&str], label: &str) -> Instance {
        Instance::new(features.iter().map(|f| f.to_string()).collect(), label)
    }

    fn sample_instances() -> Vec<Instance> {
        vec![
            instance(&["the", "DT", "I"], "I"),
            instance(&["gold", "NN", "I"], "O"),
            instance(&["fell", "VBD", "O"], "O"),
        ]
    }

    #[test]
    fn memory_model_round_trips_and_classifies_identically() {
        let model = MemoryModel::train(&sample_instances(), 3, Weighting::InfoGain).unwrap();
        let text = model.to_text().unwrap();
        let loaded = MemoryModel::from_text(&text).unwrap();
        assert_eq!(model, loaded);
        assert_eq!(loaded.to_text().unwrap(), text);
        for features in [
            ["the", "DT", "I"],
            ["gold", "VBD", "O"],
            ["unseen", "NN", "I"],
        ] {
            let q: Vec<String> = features.iter().map(|f| f.to_string()).collect();
            assert_eq!(model.classify(&q).unwrap(), loaded.classify(&q).unwrap());
        }
    }

    #[test]
    fn tree_model_round_trips() {
        let instances = sample_instances();
        let weights = information_gain_weights(&instances).unwrap();
        let tree = TreeModel::build(&instances, &weights).unwrap();
        let text = tree.to_text().unwrap();
        let loaded = TreeModel::from_text(&text).unwrap();
        assert_eq!(tree, loaded);
        assert_eq!(loaded.to_text().unwrap(), text);
    }

    #[test]
    fn generic_load_dispatches_on_kind() {
        let instances = sample_instances();
        let memory = MemoryModel::train(&instances, 3, Weighting::InfoGain).unwrap();
        let weights = information_gain_weights(&instances).unwrap();
        let tree = TreeModel::build(&instances, &weights).unwrap();
        assert!(matches!(
            load_model(&memory.to_text().unwrap()).unwrap(),
            Model::Memory(_)
        ));
        assert!(matches!(
            load_model(&tree.to_text().unwrap()).unwrap(),
            Model::Tree(_)
        ));
    }

    #[test]
    fn empty_file_is_corrupt() {
        assert_eq!(
            MemoryModel::from_text("").unwrap_err(),
            PersistError::NotAModelFile
        );
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let model = MemoryModel::train(&sample_instances(), 3, Weighting::InfoGain).unwrap();
        let text = model.to_text().unwrap();
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            MemoryModel::from_text(cut).unwrap_err(),
            PersistError::Corrupt { .. }
        ));
    }

    #[test]
    fn future_version_is_rejected() {
        let model = MemoryModel::train(&sample_instances(), 3, Weighting::InfoGain).unwrap();
        let text = model
            .to_text()
            .unwrap()
            .replace("npchunk-model 1", "npchunk-model 99");
        assert_eq!(
            MemoryModel::from_text(&text).unwrap_err(),
            PersistError::VersionMismatch {
                found: "99".to_string()
            }
        );
    }

    #[test]
    fn trailing_garbage_is_rejected() {
        let model = MemoryModel::train(&sample_instances(), 3, Weighting::InfoGain).unwrap();
        let mut text = model.to_text().unwrap();
        text.push_str("extra\n");
        assert!(matches!(
            MemoryModel::from_text(&text).unwrap_err(),
            PersistError::Corrupt { .. }
        ));
    }

    #[test]
    fn wrong_kind_is_reported() {
        let instances = sample_instances();
        let weights = information_gain_weights(&instances).unwrap();
        let tree = TreeModel::build(&instances, &weights).unwrap();
        assert!(MemoryModel::from_text(&tree.to_text().unwrap()).is_err());
    }
}
