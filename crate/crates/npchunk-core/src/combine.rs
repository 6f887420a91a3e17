//! Combining per-token outputs of multiple classifiers.
//!
//! Five voting schemes score each candidate tag and pick the highest total:
//!
//! * `Majority` — every classifier has weight 1; needs no tuning data.
//! * `TotPrecision` — a classifier votes with its tuning-data accuracy.
//! * `TagPrecision` — a classifier votes for tag `T` with its tuning-data
//!   precision for `T`.
//! * `PrecisionRecall` — as `TagPrecision`, plus each competing classifier
//!   that voted some other tag `T'` contributes `1 - recall(T')` to `T`.
//! * `TagPair` — every unordered classifier pair votes with the empirical
//!   distribution of true tags observed in tuning data under that pair's
//!   current output combination; a pair whose combination never occurred in
//!   tuning falls back to per-classifier tag precision for its two votes.
//!
//! Ties break toward the tag most frequent in the tuning gold standard,
//! then lexicographically. Beyond voting, aligned streams can be combined
//! by a stacked classifier trained on per-token instances whose features
//! are the classifier outputs, optionally extended with the token's POS
//! tag.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::features::Instance;
use crate::learner::{LearnerError, MemoryModel, TreeModel};

/// One classifier's per-token output, aligned with every other stream
/// being combined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputStream {
    pub classifier_id: String,
    pub tags: Vec<String>,
}

impl OutputStream {
    pub fn new(classifier_id: impl Into<String>, tags: Vec<String>) -> Self {
        OutputStream {
            classifier_id: classifier_id.into(),
            tags,
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }
}

/// The five voting schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VoteMethod {
    Majority,
    TotPrecision,
    TagPrecision,
    PrecisionRecall,
    TagPair,
}

impl VoteMethod {
    pub const ALL: [VoteMethod; 5] = [
        VoteMethod::Majority,
        VoteMethod::TotPrecision,
        VoteMethod::TagPrecision,
        VoteMethod::PrecisionRecall,
        VoteMethod::TagPair,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            VoteMethod::Majority => "majority",
            VoteMethod::TotPrecision => "totprecision",
            VoteMethod::TagPrecision => "tagprecision",
            VoteMethod::PrecisionRecall => "precision-recall",
            VoteMethod::TagPair => "tagpair",
        }
    }

    /// Whether this method needs weights from tuning data.
    pub fn needs_tuning(&self) -> bool {
        !matches!(self, VoteMethod::Majority)
    }
}

impl core::fmt::Display for VoteMethod {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

type PairKey = (usize, usize);
type PairRow = BTreeMap<String, f64>;

/// Voting weights estimated from tuning data.
///
/// Rates with a zero denominator (a tag a classifier never assigned, a gold
/// tag that never occurred) are stored as 0 and contribute nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct VoteWeights {
    method: VoteMethod,
    n_streams: usize,
    /// Token accuracy per classifier.
    accuracy: Vec<f64>,
    /// precision[classifier][tag].
    precision: Vec<BTreeMap<String, f64>>,
    /// recall[classifier][tag].
    recall: Vec<BTreeMap<String, f64>>,
    /// Distribution of gold tags per classifier pair and output pair.
    pair_table: BTreeMap<PairKey, BTreeMap<(String, String), PairRow>>,
    /// Gold-tag frequencies, used for deterministic tie-breaking.
    gold_counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CombineError {
    /// Streams (or the gold sequence) of different lengths.
    StreamLengthMismatch { expected: usize, found: usize },
    /// No streams supplied.
    NoStreams,
    /// Majority voting takes no tuning data.
    MajorityNeedsNoTuning,
    /// A vote with a different stream count than the weights were
    /// estimated from.
    StreamCountMismatch { expected: usize, found: usize },
    /// Tags + POS stacking needs a POS value per token.
    MissingPos,
    /// Stacked classification failed.
    Learner(LearnerError),
}

impl From<LearnerError> for CombineError {
    fn from(e: LearnerError) -> Self {
        CombineError::Learner(e)
    }
}

impl core::fmt::Display for CombineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CombineError::StreamLengthMismatch { expected, found } => {
                write!(f, "stream of {found} tokens, expected {expected}")
            }
            CombineError::NoStreams => f.write_str("no output streams to combine"),
            CombineError::MajorityNeedsNoTuning => {
                f.write_str("majority voting takes no tuning data")
            }
            CombineError::StreamCountMismatch { expected, found } => {
                write!(f, "{found} streams voted, weights cover {expected}")
            }
            CombineError::MissingPos => f.write_str("POS sequence required for Tags+POS stacking"),
            CombineError::Learner(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CombineError {}

fn check_alignment(streams: &[OutputStream], len: usize) -> Result<(), CombineError> {
    for stream in streams {
        if stream.len() != len {
            return Err(CombineError::StreamLengthMismatch {
                expected: len,
                found: stream.len(),
            });
        }
    }
    Ok(())
}

impl VoteWeights {
    /// Weights for majority voting over `n_streams` classifiers.
    pub fn majority(n_streams: usize) -> VoteWeights {
        VoteWeights {
            method: VoteMethod::Majority,
            n_streams,
            accuracy: Vec::new(),
            precision: Vec::new(),
            recall: Vec::new(),
            pair_table: BTreeMap::new(),
            gold_counts: BTreeMap::new(),
        }
    }

    /// Estimates voting weights from tuning data.
    pub fn estimate(
        streams: &[OutputStream],
        gold: &[String],
        method: VoteMethod,
    ) -> Result<VoteWeights, CombineError> {
        if !method.needs_tuning() {
            return Err(CombineError::MajorityNeedsNoTuning);
        }
        if streams.is_empty() {
            return Err(CombineError::NoStreams);
        }
        check_alignment(streams, gold.len())?;
        let n = gold.len();
        let n_streams = streams.len();

        let mut gold_counts: BTreeMap<String, u64> = BTreeMap::new();
        for tag in gold {
            *gold_counts.entry(tag.clone()).or_default() += 1;
        }

        let mut accuracy = Vec::with_capacity(n_streams);
        let mut precision = Vec::with_capacity(n_streams);
        let mut recall = Vec::with_capacity(n_streams);
        for stream in streams {
            let mut correct = 0u64;
            let mut assigned: BTreeMap<&str, (u64, u64)> = BTreeMap::new(); // tag -> (right, total)
            let mut found: BTreeMap<&str, u64> = BTreeMap::new(); // gold tag -> matched
            for (out, want) in stream.tags.iter().zip(gold) {
                let hit = out == want;
                correct += u64::from(hit);
                let slot = assigned.entry(out.as_str()).or_default();
                slot.0 += u64::from(hit);
                slot.1 += 1;
                if hit {
                    *found.entry(want.as_str()).or_default() += 1;
                }
            }
            accuracy.push(if n > 0 {
                correct as f64 / n as f64
            } else {
                0.0
            });
            precision.push(
                assigned
                    .iter()
                    .map(|(tag, (right, total))| (tag.to_string(), *right as f64 / *total as f64))
                    .collect(),
            );
            recall.push(
                gold_counts
                    .iter()
                    .map(|(tag, total)| {
                        let matched = found.get(tag.as_str()).copied().unwrap_or(0);
                        (tag.clone(), matched as f64 / *total as f64)
                    })
                    .collect(),
            );
        }

        let mut pair_table = BTreeMap::new();
        if method == VoteMethod::TagPair {
            for i in 0..n_streams {
                for j in (i + 1)..n_streams {
                    let mut counts: BTreeMap<(String, String), BTreeMap<String, u64>> =
                        BTreeMap::new();
                    for t in 0..n {
                        let key = (streams[i].tags[t].clone(), streams[j].tags[t].clone());
                        *counts
                            .entry(key)
                            .or_default()
                            .entry(gold[t].clone())
                            .or_default() += 1;
                    }
                    let rows: BTreeMap<(String, String), PairRow> = counts
                        .into_iter()
                        .map(|(key, golds)| {
                            let total: u64 = golds.values().sum();
                            let row = golds
                                .into_iter()
                                .map(|(tag, c)| (tag, c as f64 / total as f64))
                                .collect();
                            (key, row)
                        })
                        .collect();
                    pair_table.insert((i, j), rows);
                }
            }
        }

        Ok(VoteWeights {
            method,
            n_streams,
            accuracy,
            precision,
            recall,
            pair_table,
            gold_counts,
        })
    }

    pub fn method(&self) -> VoteMethod {
        self.method
    }

    pub fn n_streams(&self) -> usize {
        self.n_streams
    }

    /// Accuracy per classifier (empty for majority weights).
    pub fn accuracies(&self) -> &[f64] {
        &self.accuracy
    }

    fn precision_of(&self, classifier: usize, tag: &str) -> f64 {
        self.precision[classifier].get(tag).copied().unwrap_or(0.0)
    }

    fn recall_of(&self, classifier: usize, tag: &str) -> f64 {
        self.recall[classifier].get(tag).copied().unwrap_or(0.0)
    }

    /// Combines one token's votes into a single tag.
    pub fn vote(&self, votes: &[&str]) -> Result<String, CombineError> {
        if votes.is_empty() {
            return Err(CombineError::NoStreams);
        }
        if self.method.needs_tuning() && votes.len() != self.n_streams {
            return Err(CombineError::StreamCountMismatch {
                expected: self.n_streams,
                found: votes.len(),
            });
        }
        let mut scores: BTreeMap<String, f64> = BTreeMap::new();
        match self.method {
            VoteMethod::Majority => {
                for &vote in votes {
                    *scores.entry(vote.to_string()).or_default() += 1.0;
                }
            }
            VoteMethod::TotPrecision => {
                for (i, &vote) in votes.iter().enumerate() {
                    *scores.entry(vote.to_string()).or_default() += self.accuracy[i];
                }
            }
            VoteMethod::TagPrecision => {
                for (i, &vote) in votes.iter().enumerate() {
                    *scores.entry(vote.to_string()).or_default() += self.precision_of(i, vote);
                }
            }
            VoteMethod::PrecisionRecall => {
                for &vote in votes {
                    scores.entry(vote.to_string()).or_default();
                }
                let candidates: Vec<String> = scores.keys().cloned().collect();
                for candidate in candidates {
                    let mut score = 0.0;
                    for (i, &vote) in votes.iter().enumerate() {
                        if vote == candidate {
                            score += self.precision_of(i, vote);
                        } else {
                            score += 1.0 - self.recall_of(i, vote);
                        }
                    }
                    scores.insert(candidate, score);
                }
            }
            VoteMethod::TagPair => {
                for i in 0..votes.len() {
                    for j in (i + 1)..votes.len() {
                        let row = self.pair_table.get(&(i, j)).and_then(|rows| {
                            rows.get(&(votes[i].to_string(), votes[j].to_string()))
                        });
                        match row {
                            Some(row) => {
                                for (tag, p) in row {
                                    *scores.entry(tag.clone()).or_default() += p;
                                }
                            }
                            None => {
                                // Unseen output combination: the pair falls
                                // back to tag-precision votes for its two
                                // outputs.
                                *scores.entry(votes[i].to_string()).or_default() +=
                                    self.precision_of(i, votes[i]);
                                *scores.entry(votes[j].to_string()).or_default() +=
                                    self.precision_of(j, votes[j]);
                            }
                        }
                    }
                }
                // A single stream has no pairs; fall back to its own vote.
                if votes.len() == 1 {
                    scores.entry(votes[0].to_string()).or_default();
                }
            }
        }
        let mut best: Option<(&String, f64)> = None;
        for (tag, &score) in &scores {
            let better = match best {
                None => true,
                Some((btag, bscore)) => {
                    score > bscore
                        || (score == bscore && self.gold_count(tag) > self.gold_count(btag))
                }
            };
            if better {
                best = Some((tag, score));
            }
        }
        Ok(best.expect("at least one vote").0.clone())
    }

    fn gold_count(&self, tag: &str) -> u64 {
        self.gold_counts.get(tag).copied().unwrap_or(0)
    }

    /// Renders the weight tables in a line-oriented format for inspection.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&alloc::format!("method {}\n", self.method));
        out.push_str(&alloc::format!("streams {}\n", self.n_streams));
        for (i, acc) in self.accuracy.iter().enumerate() {
            out.push_str(&alloc::format!("accuracy {i} {acc:.6}\n"));
        }
        for i in 0..self.precision.len() {
            let mut tags: Vec<&String> = self.precision[i]
                .keys()
                .chain(self.recall[i].keys())
                .collect();
            tags.sort();
            tags.dedup();
            for tag in tags {
                out.push_str(&alloc::format!(
                    "tag {i} {tag} precision {:.6} recall {:.6}\n",
                    self.precision_of(i, tag),
                    self.recall_of(i, tag),
                ));
            }
        }
        for ((i, j), rows) in &self.pair_table {
            for ((a, b), row) in rows {
                for (tag, p) in row {
                    out.push_str(&alloc::format!("pair {i} {j} {a} {b} {tag} {p:.6}\n"));
                }
            }
        }
        out
    }
}

/// Estimates voting weights from tuning data (see [`VoteWeights::estimate`]).
pub fn estimate_weights(
    tuning_outputs: &[OutputStream],
    gold: &[String],
    method: VoteMethod,
) -> Result<VoteWeights, CombineError> {
    VoteWeights::estimate(tuning_outputs, gold, method)
}

/// Per-token feature vector for stacking: the tag each stream assigned, in
/// stream order, optionally followed by the token's POS tag.
pub fn stacking_features(
    streams: &[OutputStream],
    pos: Option<&[String]>,
    t: usize,
) -> Vec<String> {
    let mut features: Vec<String> = streams.iter().map(|s| s.tags[t].clone()).collect();
    if let Some(pos) = pos {
        features.push(pos[t].clone());
    }
    features
}

/// Builds stacking instances over aligned streams.
///
/// With `gold` supplied the instances carry training labels; without it the
/// label field is empty and only the features are meaningful.
pub fn build_stacking_instances(
    streams: &[OutputStream],
    pos: Option<&[String]>,
    gold: Option<&[String]>,
) -> Result<Vec<Instance>, CombineError> {
    if streams.is_empty() {
        return Err(CombineError::NoStreams);
    }
    let len = streams[0].len();
    check_alignment(streams, len)?;
    if let Some(pos) = pos {
        if pos.len() != len {
            return Err(CombineError::MissingPos);
        }
    }
    if let Some(gold) = gold {
        if gold.len() != len {
            return Err(CombineError::StreamLengthMismatch {
                expected: len,
                found: gold.len(),
            });
        }
    }
    let mut instances = Vec::with_capacity(len);
    for t in 0..len {
        let label = gold.map(|g| g[t].as_str()).unwrap_or("");
        instances.push(Instance::new(stacking_features(streams, pos, t), label));
    }
    Ok(instances)
}

/// A trained second-level classifier over stream outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum StackModel {
    Memory(MemoryModel),
    Tree(TreeModel),
}

impl StackModel {
    fn classify(&self, features: &[String]) -> Result<String, LearnerError> {
        match self {
            StackModel::Memory(m) => Ok(m.classify(features)?.label),
            StackModel::Tree(t) => t.classify(features),
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            StackModel::Memory(_) => "stack-memory",
            StackModel::Tree(_) => "stack-tree",
        }
    }
}

/// How aligned streams are merged into one.
#[derive(Debug, Clone, PartialEq)]
pub enum Combiner {
    Vote(VoteWeights),
    Stacked { model: StackModel, with_pos: bool },
}

impl Combiner {
    pub fn id(&self) -> String {
        match self {
            Combiner::Vote(w) => w.method().as_str().to_string(),
            Combiner::Stacked { model, with_pos } => {
                let mut id = model.id().to_string();
                id.push_str(if *with_pos { "-tags-pos" } else { "-tags" });
                id
            }
        }
    }
}

/// Combines aligned streams token by token into one output stream.
///
/// `pos` is required when the combiner is a Tags+POS stacked model.
pub fn combine_stream(
    streams: &[OutputStream],
    pos: Option<&[String]>,
    combiner: &Combiner,
) -> Result<OutputStream, CombineError> {
    if streams.is_empty() {
        return Err(CombineError::NoStreams);
    }
    let len = streams[0].len();
    check_alignment(streams, len)?;
    let mut tags = Vec::with_capacity(len);
    match combiner {
        Combiner::Vote(weights) => {
            for t in 0..len {
                let votes: Vec<&str> = streams.iter().map(|s| s.tags[t].as_str()).collect();
                tags.push(weights.vote(&votes)?);
            }
        }
        Combiner::Stacked { model, with_pos } => {
            let pos = if *with_pos {
                match pos {
                    Some(pos) if pos.len() == len => Some(pos),
                    _ => return Err(CombineError::MissingPos),
                }
            } else {
                None
            };
            for t in 0..len {
                let features = stacking_features(streams, pos, t);
                tags.push(model.classify(&features)?);
            }
        }
    }
    Ok(OutputStream::new(combiner.id(), tags))
}
