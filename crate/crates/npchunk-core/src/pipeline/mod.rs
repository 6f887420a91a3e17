//! Experiment orchestration.
//!
//! [`run_basenp`] is the whole method end to end: train one chunker per
//! selected representation (two-stage for the tagging schemes when
//! configured), convert every test output to open/close bracket label
//! streams, combine the open streams and the close streams independently
//! with the configured voting scheme or stacked classifier, pair the
//! combined brackets into chunks, and score everything.
//!
//! [`run_crossval`] applies it fold by fold over consecutive blocks and
//! concatenates token-level results before computing any rate, so the
//! reported numbers cover the whole dataset exactly once. The recursive
//! chunker for nested phrases lives in [`cascade`].
//!
//! Everything is deterministic given the configuration; the only
//! randomized step, the optional tuning-split shuffle, is seeded.

pub mod cascade;
pub mod report;

pub use cascade::{run_cascade, CascadeLevel, CascadeOutcome};
pub use report::ExperimentReport;

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::chunkrepr::{self, BracketSide, ChunkTag, ReprError, TagScheme};
use crate::combine::{
    build_stacking_instances, combine_stream, CombineError, Combiner, OutputStream, StackModel,
    VoteMethod, VoteWeights,
};
use crate::corpus::{self, ChunkSpan, CorpusError, Dataset, Sentence};
use crate::eval::EvalError;
use crate::features::{self, FeatureError};
use crate::learner::{
    ib1ig_train, igtree_build, information_gain_weights, LearnerError, MemoryModel, PersistError,
};
use crate::synth::Rng;

/// Folds used internally to produce realistic first-stage context for
/// second-stage training and realistic stream context for stacker training.
const INTERNAL_CV_FOLDS: usize = 5;

/// How the per-representation output streams are merged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combination {
    Vote(VoteMethod),
    Stacked {
        learner: StackLearner,
        with_pos: bool,
    },
}

/// Which learner backs a stacked combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StackLearner {
    Memory,
    Tree,
}

impl Combination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Combination::Vote(m) => m.as_str(),
            Combination::Stacked {
                learner: StackLearner::Memory,
                with_pos: false,
            } => "stack-memory-tags",
            Combination::Stacked {
                learner: StackLearner::Memory,
                with_pos: true,
            } => "stack-memory-tags-pos",
            Combination::Stacked {
                learner: StackLearner::Tree,
                with_pos: false,
            } => "stack-tree-tags",
            Combination::Stacked {
                learner: StackLearner::Tree,
                with_pos: true,
            } => "stack-tree-tags-pos",
        }
    }

    pub fn parse(name: &str) -> Option<Combination> {
        match name {
            "majority" => Some(Combination::Vote(VoteMethod::Majority)),
            "totprecision" => Some(Combination::Vote(VoteMethod::TotPrecision)),
            "tagprecision" => Some(Combination::Vote(VoteMethod::TagPrecision)),
            "precision-recall" => Some(Combination::Vote(VoteMethod::PrecisionRecall)),
            "tagpair" => Some(Combination::Vote(VoteMethod::TagPair)),
            "stack-memory-tags" => Some(Combination::Stacked {
                learner: StackLearner::Memory,
                with_pos: false,
            }),
            "stack-memory-tags-pos" => Some(Combination::Stacked {
                learner: StackLearner::Memory,
                with_pos: true,
            }),
            "stack-tree-tags" => Some(Combination::Stacked {
                learner: StackLearner::Tree,
                with_pos: false,
            }),
            "stack-tree-tags-pos" => Some(Combination::Stacked {
                learner: StackLearner::Tree,
                with_pos: true,
            }),
            _ => None,
        }
    }
}

impl core::fmt::Display for Combination {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which significance test experiment reports run when comparing the
/// combined system against the best individual representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SignificanceTest {
    #[default]
    ChiSquared,
    McNemar,
}

/// Everything a run needs; every field has a documented default.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// The representations to train, in report order.
    pub schemes: Vec<TagScheme>,
    /// 1 or 2 classification stages (stage two applies to the tagging
    /// schemes only; the bracket-pair representation is single-stage).
    pub stages: u8,
    /// Nearest-distance shells examined by the memory-based learner.
    pub k: usize,
    pub combination: Combination,
    /// Cross-validation folds.
    pub folds: usize,
    /// Fraction of training sentences held out as tuning data for the
    /// weighted voting methods; majority voting and stacking do not use it.
    pub tuning_fraction: f64,
    /// Draw the tuning sentences at random (seeded) instead of taking the
    /// last block.
    pub shuffle_tuning: bool,
    /// Depth cap for the nested-phrase cascade.
    pub cascade_max_levels: usize,
    /// Seed for the optional tuning shuffle, the only randomized step.
    pub seed: u64,
    pub significance: SignificanceTest,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schemes: TagScheme::ALL.to_vec(),
            stages: 2,
            k: 3,
            combination: Combination::Vote(VoteMethod::Majority),
            folds: 10,
            tuning_fraction: 0.1,
            shuffle_tuning: false,
            cascade_max_levels: 4,
            seed: 0,
            significance: SignificanceTest::ChiSquared,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.schemes.is_empty() {
            return Err(PipelineError::Config("no representations selected".into()));
        }
        for (i, a) in self.schemes.iter().enumerate() {
            if self.schemes[..i].contains(a) {
                return Err(PipelineError::Config(alloc::format!(
                    "representation {a} selected twice"
                )));
            }
        }
        if !(1..=2).contains(&self.stages) {
            return Err(PipelineError::Config("stages must be 1 or 2".into()));
        }
        if self.k == 0 {
            return Err(PipelineError::Config("k must be at least 1".into()));
        }
        if !(self.tuning_fraction > 0.0 && self.tuning_fraction <= 0.5) {
            return Err(PipelineError::Config(
                "tuning fraction must lie in (0, 0.5]".into(),
            ));
        }
        if self.cascade_max_levels == 0 {
            return Err(PipelineError::Config(
                "cascade needs at least one level".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineError {
    Config(String),
    EmptyDataset,
    Corpus(CorpusError),
    Repr(ReprError),
    Feature(FeatureError),
    Learner(LearnerError),
    Combine(CombineError),
    Eval(EvalError),
}

macro_rules! from_error {
    ($source:ty, $variant:ident) => {
        impl From<$source> for PipelineError {
            fn from(e: $source) -> Self {
                PipelineError::$variant(e)
            }
        }
    };
}
from_error!(CorpusError, Corpus);
from_error!(ReprError, Repr);
from_error!(FeatureError, Feature);
from_error!(LearnerError, Learner);
from_error!(CombineError, Combine);
from_error!(EvalError, Eval);

impl core::fmt::Display for PipelineError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            PipelineError::Config(reason) => write!(f, "bad configuration: {reason}"),
            PipelineError::EmptyDataset => f.write_str("dataset has no sentences"),
            PipelineError::Corpus(e) => write!(f, "{e}"),
            PipelineError::Repr(e) => write!(f, "{e}"),
            PipelineError::Feature(e) => write!(f, "{e}"),
            PipelineError::Learner(e) => write!(f, "{e}"),
            PipelineError::Combine(e) => write!(f, "{e}"),
            PipelineError::Eval(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for PipelineError {}

/// The rightmost token of a span, the head approximation used when the
/// cascade collapses a recognized phrase.
pub fn head_of_span(sentence: &Sentence, span: &ChunkSpan) -> Result<usize, PipelineError> {
    if span.begin > span.end || span.end >= sentence.len() {
        return Err(PipelineError::Repr(ReprError::SpanOutOfRange {
            begin: span.begin,
            end: span.end,
            len: sentence.len(),
        }));
    }
    Ok(span.end)
}

fn predict_stage1_tags(
    model: &MemoryModel,
    sentence: &Sentence,
    scheme: TagScheme,
) -> Result<Vec<ChunkTag>, PipelineError> {
    (0..sentence.len())
        .map(|t| {
            let features = features::stage1_features(sentence, t)?;
            let label = model.classify(&features)?.label;
            Ok(ChunkTag::parse(&label, scheme)?)
        })
        .collect()
}

/// First-stage predictions over `data` from models that never saw the
/// sentence they predict, via consecutive-fold cross-validation. With fewer
/// than two sentences the model predicts its own training data.
fn cv_stage1_tags(
    data: &Dataset,
    scheme: TagScheme,
    k: usize,
) -> Result<Vec<Vec<ChunkTag>>, PipelineError> {
    let folds = INTERNAL_CV_FOLDS.min(data.len());
    if folds < 2 {
        let model = ib1ig_train(&features::stage1_instances(data, scheme)?, k)?;
        return data
            .sentences
            .iter()
            .map(|s| predict_stage1_tags(&model, s, scheme))
            .collect();
    }
    let mut out = Vec::with_capacity(data.len());
    for (fold_train, fold_test) in corpus::split_folds(data, folds)? {
        let model = ib1ig_train(&features::stage1_instances(&fold_train, scheme)?, k)?;
        for sentence in &fold_test.sentences {
            out.push(predict_stage1_tags(&model, sentence, scheme)?);
        }
    }
    Ok(out)
}

enum StageOneModels {
    Tagging(MemoryModel),
    Brackets {
        open: MemoryModel,
        close: MemoryModel,
    },
}

/// A trained chunker for one representation: the first-stage model(s) and,
/// for the tagging schemes when configured, a second-stage model trained on
/// cross-validated first-stage context.
pub struct SchemeChunker {
    scheme: TagScheme,
    stage1: StageOneModels,
    stage2: Option<MemoryModel>,
}

impl SchemeChunker {
    pub fn train(
        data: &Dataset,
        scheme: TagScheme,
        stages: u8,
        k: usize,
    ) -> Result<SchemeChunker, PipelineError> {
        if data.token_count() == 0 {
            return Err(PipelineError::EmptyDataset);
        }
        if scheme.is_tagging() {
            let stage1 = ib1ig_train(&features::stage1_instances(data, scheme)?, k)?;
            let stage2 = if stages >= 2 {
                let context = cv_stage1_tags(data, scheme, k)?;
                Some(ib1ig_train(
                    &features::stage2_instances(data, scheme, &context)?,
                    k,
                )?)
            } else {
                None
            };
            Ok(SchemeChunker {
                scheme,
                stage1: StageOneModels::Tagging(stage1),
                stage2,
            })
        } else {
            let (open_instances, close_instances) = features::oc_instances(data)?;
            Ok(SchemeChunker {
                scheme,
                stage1: StageOneModels::Brackets {
                    open: ib1ig_train(&open_instances, k)?,
                    close: ib1ig_train(&close_instances, k)?,
                },
                stage2: None,
            })
        }
    }

    pub fn scheme(&self) -> TagScheme {
        self.scheme
    }

    pub fn has_second_stage(&self) -> bool {
        self.stage2.is_some()
    }

    pub(crate) fn stage_models(&self) -> (Vec<&MemoryModel>, Option<&MemoryModel>) {
        match &self.stage1 {
            StageOneModels::Tagging(m) => (alloc::vec![m], self.stage2.as_ref()),
            StageOneModels::Brackets { open, close } => (alloc::vec![open, close], None),
        }
    }

    pub(crate) fn from_parts(
        scheme: TagScheme,
        mut stage1: Vec<MemoryModel>,
        stage2: Option<MemoryModel>,
    ) -> Result<SchemeChunker, PipelineError> {
        let stage1 = if scheme.is_tagging() {
            if stage1.len() != 1 {
                return Err(PipelineError::Config(
                    "tagging chunker needs exactly one first-stage model".into(),
                ));
            }
            StageOneModels::Tagging(stage1.remove(0))
        } else {
            if stage1.len() != 2 || stage2.is_some() {
                return Err(PipelineError::Config(
                    "bracket chunker needs an open and a close model and no second stage".into(),
                ));
            }
            let close = stage1.remove(1);
            let open = stage1.remove(0);
            StageOneModels::Brackets { open, close }
        };
        Ok(SchemeChunker {
            scheme,
            stage1,
            stage2,
        })
    }

    /// Open and close bracket labels, one per token, for one sentence.
    pub fn predict_sentence(
        &self,
        sentence: &Sentence,
    ) -> Result<(Vec<String>, Vec<String>), PipelineError> {
        match &self.stage1 {
            StageOneModels::Tagging(stage1) => {
                let mut tags = predict_stage1_tags(stage1, sentence, self.scheme)?;
                if let Some(stage2) = &self.stage2 {
                    tags = (0..sentence.len())
                        .map(|t| {
                            let features = features::stage2_features(sentence, &tags, t)?;
                            let label = stage2.classify(&features)?.label;
                            Ok(ChunkTag::parse(&label, self.scheme)?)
                        })
                        .collect::<Result<Vec<ChunkTag>, PipelineError>>()?;
                }
                let (open, close) = chunkrepr::to_brackets(&tags, self.scheme)?;
                Ok((owned_labels(&open), owned_labels(&close)))
            }
            StageOneModels::Brackets { open, close } => {
                let mut open_labels = Vec::with_capacity(sentence.len());
                let mut close_labels = Vec::with_capacity(sentence.len());
                for t in 0..sentence.len() {
                    let features = features::stage1_features(sentence, t)?;
                    open_labels.push(open.classify(&features)?.label);
                    close_labels.push(close.classify(&features)?.label);
                }
                Ok((open_labels, close_labels))
            }
        }
    }

    /// Flattened open and close label streams over a whole dataset.
    pub fn predict(&self, data: &Dataset) -> Result<(Vec<String>, Vec<String>), PipelineError> {
        let mut open = Vec::with_capacity(data.token_count());
        let mut close = Vec::with_capacity(data.token_count());
        for sentence in &data.sentences {
            let (o, c) = self.predict_sentence(sentence)?;
            open.extend(o);
            close.extend(c);
        }
        Ok((open, close))
    }

    /// Chunk spans for one sentence, from its own bracket pairing alone.
    pub fn predict_spans(&self, sentence: &Sentence) -> Result<Vec<ChunkSpan>, PipelineError> {
        let (open, close) = self.predict_sentence(sentence)?;
        pair_label_streams(&open, &close)
    }
}

impl SchemeChunker {
    /// Serializes the chunker: a versioned container embedding the stage
    /// models in the learner's model format. Deterministic for equal
    /// chunkers.
    pub fn to_text(&self) -> Result<String, PersistError> {
        let (stage1, stage2) = self.stage_models();
        let mut out = String::new();
        out.push_str(&alloc::format!(
            "npchunk-chunker 1\nscheme {}\nstage1-models {}\nstage2-models {}\n",
            self.scheme,
            stage1.len(),
            u8::from(stage2.is_some()),
        ));
        for model in stage1 {
            out.push_str(&model.to_text()?);
        }
        if let Some(model) = stage2 {
            out.push_str(&model.to_text()?);
        }
        out.push_str("end\n");
        Ok(out)
    }

    /// Inverse of [`SchemeChunker::to_text`].
    pub fn from_text(text: &str) -> Result<SchemeChunker, PersistError> {
        use crate::learner::persist::{read_model, Lines};
        use crate::learner::Model;

        let mut lines = Lines::new(text);
        let header = lines.expect_field("npchunk-chunker")?;
        if header != "1" {
            return Err(PersistError::VersionMismatch { found: header });
        }
        let scheme_name = lines.expect_field("scheme")?;
        let scheme = TagScheme::parse(&scheme_name)
            .ok_or_else(|| lines.corrupt(alloc::format!("unknown scheme {scheme_name:?}")))?;
        let n_stage1 = lines.expect_usize("stage1-models")?;
        let n_stage2 = lines.expect_usize("stage2-models")?;
        if n_stage2 > 1 {
            return Err(lines.corrupt("at most one second-stage model".to_string()));
        }
        let read_memory = |lines: &mut Lines| -> Result<MemoryModel, PersistError> {
            match read_model(lines)? {
                Model::Memory(m) => Ok(m),
                Model::Tree(_) => {
                    Err(lines.corrupt("chunkers embed memory models only".to_string()))
                }
            }
        };
        let mut stage1 = Vec::with_capacity(n_stage1);
        for _ in 0..n_stage1 {
            stage1.push(read_memory(&mut lines)?);
        }
        let stage2 = if n_stage2 == 1 {
            Some(read_memory(&mut lines)?)
        } else {
            None
        };
        lines.expect_literal("end")?;
        lines.expect_no_trailing()?;
        SchemeChunker::from_parts(scheme, stage1, stage2)
            .map_err(|_| lines.corrupt("inconsistent model layout for scheme".to_string()))
    }
}

fn owned_labels(stream: &chunkrepr::BracketStream) -> Vec<String> {
    stream.labels().iter().map(|l| l.to_string()).collect()
}

fn pair_label_streams(open: &[String], close: &[String]) -> Result<Vec<ChunkSpan>, PipelineError> {
    let open_marks = open
        .iter()
        .map(|l| BracketSide::Open.mark_of(l))
        .collect::<Result<Vec<bool>, ReprError>>()?;
    let close_marks = close
        .iter()
        .map(|l| BracketSide::Close.mark_of(l))
        .collect::<Result<Vec<bool>, ReprError>>()?;
    Ok(chunkrepr::pair_brackets(
        &chunkrepr::BracketStream::new(BracketSide::Open, open_marks),
        &chunkrepr::BracketStream::new(BracketSide::Close, close_marks),
    )?)
}

/// Gold open/close label streams, flattened over all tokens.
fn flat_gold_labels(data: &Dataset) -> Result<(Vec<String>, Vec<String>), PipelineError> {
    let mut open = Vec::with_capacity(data.token_count());
    let mut close = Vec::with_capacity(data.token_count());
    for sentence in &data.sentences {
        let (o, c) = chunkrepr::encode_brackets(&sentence.spans, sentence.len())?;
        open.extend(owned_labels(&o));
        close.extend(owned_labels(&c));
    }
    Ok((open, close))
}

fn flat_pos(data: &Dataset) -> Vec<String> {
    data.sentences
        .iter()
        .flat_map(|s| s.tokens.iter().map(|t| t.pos.clone()))
        .collect()
}

/// The tuning split used by the weighted voting methods: by default the
/// last `tuning_fraction` of the training sentences; optionally a seeded
/// random draw. Both parts keep their original sentence order.
pub fn tuning_split(
    train: &Dataset,
    config: &ExperimentConfig,
) -> Result<(Dataset, Dataset), PipelineError> {
    let n = train.len();
    if n < 2 {
        return Err(PipelineError::Config(
            "tuned combination needs at least two training sentences".into(),
        ));
    }
    let count = (((n as f64) * config.tuning_fraction + 0.5) as usize).clamp(1, n - 1);
    let tune_indices: Vec<usize> = if config.shuffle_tuning {
        let mut indices: Vec<usize> = (0..n).collect();
        let mut rng = Rng::new(config.seed);
        for i in (1..n).rev() {
            indices.swap(i, rng.below(i + 1));
        }
        let mut chosen = indices[..count].to_vec();
        chosen.sort_unstable();
        chosen
    } else {
        (n - count..n).collect()
    };
    let mut rest = Vec::with_capacity(n - count);
    let mut tune = Vec::with_capacity(count);
    let mut next = tune_indices.iter().peekable();
    for (i, sentence) in train.sentences.iter().enumerate() {
        if next.peek() == Some(&&i) {
            tune.push(sentence.clone());
            next.next();
        } else {
            rest.push(sentence.clone());
        }
    }
    Ok((Dataset::new(rest), Dataset::new(tune)))
}

/// Everything one representation contributes to a combination run:
/// flattened bracket label streams over the test set and, depending on the
/// combination, over the tuning block or over the training set via
/// cross-validation.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeStreams {
    pub scheme: TagScheme,
    pub test_open: Vec<String>,
    pub test_close: Vec<String>,
    pub tune_open: Vec<String>,
    pub tune_close: Vec<String>,
    pub cv_open: Vec<String>,
    pub cv_close: Vec<String>,
}

/// Trains one representation and produces its streams. Independent across
/// schemes, so callers may run one invocation per scheme concurrently.
pub fn scheme_streams(
    train: &Dataset,
    test: &Dataset,
    scheme: TagScheme,
    config: &ExperimentConfig,
) -> Result<SchemeStreams, PipelineError> {
    let mut streams = SchemeStreams {
        scheme,
        test_open: Vec::new(),
        test_close: Vec::new(),
        tune_open: Vec::new(),
        tune_close: Vec::new(),
        cv_open: Vec::new(),
        cv_close: Vec::new(),
    };
    match config.combination {
        Combination::Vote(VoteMethod::Majority) => {
            let chunker = SchemeChunker::train(train, scheme, config.stages, config.k)?;
            (streams.test_open, streams.test_close) = chunker.predict(test)?;
        }
        Combination::Vote(_) => {
            // Weighted voting: the classifiers give up the tuning block,
            // whose predictions calibrate the weights.
            let (train_part, tune_part) = tuning_split(train, config)?;
            let chunker = SchemeChunker::train(&train_part, scheme, config.stages, config.k)?;
            (streams.tune_open, streams.tune_close) = chunker.predict(&tune_part)?;
            (streams.test_open, streams.test_close) = chunker.predict(test)?;
        }
        Combination::Stacked { .. } => {
            // Stacking: the stacker trains on cross-validated outputs over
            // the whole training set, so the base classifiers keep all of
            // it.
            let folds = INTERNAL_CV_FOLDS.min(train.len());
            if folds < 2 {
                let chunker = SchemeChunker::train(train, scheme, config.stages, config.k)?;
                (streams.cv_open, streams.cv_close) = chunker.predict(train)?;
                (streams.test_open, streams.test_close) = chunker.predict(test)?;
            } else {
                for (fold_train, fold_test) in corpus::split_folds(train, folds)? {
                    let chunker =
                        SchemeChunker::train(&fold_train, scheme, config.stages, config.k)?;
                    let (o, c) = chunker.predict(&fold_test)?;
                    streams.cv_open.extend(o);
                    streams.cv_close.extend(c);
                }
                let chunker = SchemeChunker::train(train, scheme, config.stages, config.k)?;
                (streams.test_open, streams.test_close) = chunker.predict(test)?;
            }
        }
    }
    Ok(streams)
}

/// The raw material of a scored run: per-scheme and combined label streams,
/// flattened over test tokens, plus the matching gold labels and spans.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStreams {
    pub scheme_ids: Vec<String>,
    pub open: Vec<Vec<String>>,
    pub close: Vec<Vec<String>>,
    pub combined_open: Vec<String>,
    pub combined_close: Vec<String>,
    pub gold_open: Vec<String>,
    pub gold_close: Vec<String>,
    pub combination: String,
}

/// A complete run: predicted chunks per test sentence, the underlying
/// streams, and the scored report.
#[derive(Debug, Clone, PartialEq)]
pub struct BasenpOutcome {
    pub pred_spans: Vec<Vec<ChunkSpan>>,
    pub gold_spans: Vec<Vec<ChunkSpan>>,
    pub streams: RunStreams,
    pub report: ExperimentReport,
}

fn build_combiner(
    side: BracketSide,
    schemes: &[SchemeStreams],
    train: &Dataset,
    config: &ExperimentConfig,
) -> Result<Combiner, PipelineError> {
    let side_of = |s: &SchemeStreams, tune: bool| -> Vec<String> {
        match (side, tune) {
            (BracketSide::Open, true) => s.tune_open.clone(),
            (BracketSide::Open, false) => s.cv_open.clone(),
            (BracketSide::Close, true) => s.tune_close.clone(),
            (BracketSide::Close, false) => s.cv_close.clone(),
        }
    };
    match config.combination {
        Combination::Vote(VoteMethod::Majority) => {
            Ok(Combiner::Vote(VoteWeights::majority(schemes.len())))
        }
        Combination::Vote(method) => {
            let (_, tune_part) = tuning_split(train, config)?;
            let (gold_open, gold_close) = flat_gold_labels(&tune_part)?;
            let gold = match side {
                BracketSide::Open => gold_open,
                BracketSide::Close => gold_close,
            };
            let streams: Vec<OutputStream> = schemes
                .iter()
                .map(|s| OutputStream::new(s.scheme.as_str(), side_of(s, true)))
                .collect();
            Ok(Combiner::Vote(VoteWeights::estimate(
                &streams, &gold, method,
            )?))
        }
        Combination::Stacked { learner, with_pos } => {
            let (gold_open, gold_close) = flat_gold_labels(train)?;
            let gold = match side {
                BracketSide::Open => gold_open,
                BracketSide::Close => gold_close,
            };
            let pos = with_pos.then(|| flat_pos(train));
            let streams: Vec<OutputStream> = schemes
                .iter()
                .map(|s| OutputStream::new(s.scheme.as_str(), side_of(s, false)))
                .collect();
            let instances = build_stacking_instances(&streams, pos.as_deref(), Some(&gold))?;
            let model = match learner {
                StackLearner::Memory => StackModel::Memory(ib1ig_train(&instances, config.k)?),
                StackLearner::Tree => {
                    let weights = information_gain_weights(&instances)?;
                    StackModel::Tree(igtree_build(&instances, &weights)?)
                }
            };
            Ok(Combiner::Stacked { model, with_pos })
        }
    }
}

/// Merges per-scheme streams into the combined system and scores the run.
pub fn combine_and_score(
    schemes: Vec<SchemeStreams>,
    train: &Dataset,
    test: &Dataset,
    config: &ExperimentConfig,
) -> Result<BasenpOutcome, PipelineError> {
    let (gold_open, gold_close) = flat_gold_labels(test)?;
    let test_pos = flat_pos(test);

    let open_streams: Vec<OutputStream> = schemes
        .iter()
        .map(|s| OutputStream::new(s.scheme.as_str(), s.test_open.clone()))
        .collect();
    let close_streams: Vec<OutputStream> = schemes
        .iter()
        .map(|s| OutputStream::new(s.scheme.as_str(), s.test_close.clone()))
        .collect();

    let open_combiner = build_combiner(BracketSide::Open, &schemes, train, config)?;
    let close_combiner = build_combiner(BracketSide::Close, &schemes, train, config)?;
    let combined_open = combine_stream(&open_streams, Some(&test_pos), &open_combiner)?;
    let combined_close = combine_stream(&close_streams, Some(&test_pos), &close_combiner)?;

    // Re-split the combined streams by sentence and pair brackets.
    let mut pred_spans = Vec::with_capacity(test.len());
    let mut offset = 0;
    for sentence in &test.sentences {
        let len = sentence.len();
        pred_spans.push(pair_label_streams(
            &combined_open.tags[offset..offset + len],
            &combined_close.tags[offset..offset + len],
        )?);
        offset += len;
    }

    let streams = RunStreams {
        scheme_ids: schemes.iter().map(|s| s.scheme.to_string()).collect(),
        open: schemes.iter().map(|s| s.test_open.clone()).collect(),
        close: schemes.iter().map(|s| s.test_close.clone()).collect(),
        combined_open: combined_open.tags,
        combined_close: combined_close.tags,
        gold_open,
        gold_close,
        combination: open_combiner.id(),
    };
    let gold_spans = test.gold_spans();
    let report = report::build_report(&streams, &pred_spans, &gold_spans, config.significance)?;
    Ok(BasenpOutcome {
        pred_spans,
        gold_spans,
        streams,
        report,
    })
}

/// Runs the full method once: per-representation training, bracket
/// conversion, combination, chunk reconstruction, and scoring.
pub fn run_basenp(
    train: &Dataset,
    test: &Dataset,
    config: &ExperimentConfig,
) -> Result<BasenpOutcome, PipelineError> {
    config.validate()?;
    if train.token_count() == 0 || test.token_count() == 0 {
        return Err(PipelineError::EmptyDataset);
    }
    let schemes = config
        .schemes
        .iter()
        .map(|&scheme| scheme_streams(train, test, scheme, config))
        .collect::<Result<Vec<SchemeStreams>, PipelineError>>()?;
    combine_and_score(schemes, train, test, config)
}

/// A cross-validation run: the concatenated predictions and the report
/// computed over them.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalOutcome {
    pub pred_spans: Vec<Vec<ChunkSpan>>,
    pub gold_spans: Vec<Vec<ChunkSpan>>,
    pub report: ExperimentReport,
}

/// Concatenates per-fold outcomes (in fold order) and scores the whole.
pub fn aggregate_folds(
    outcomes: Vec<BasenpOutcome>,
    significance: SignificanceTest,
) -> Result<CrossvalOutcome, PipelineError> {
    let first = outcomes
        .first()
        .ok_or(PipelineError::Config("no folds to aggregate".into()))?;
    let n_schemes = first.streams.scheme_ids.len();
    let mut merged = RunStreams {
        scheme_ids: first.streams.scheme_ids.clone(),
        open: alloc::vec![Vec::new(); n_schemes],
        close: alloc::vec![Vec::new(); n_schemes],
        combined_open: Vec::new(),
        combined_close: Vec::new(),
        gold_open: Vec::new(),
        gold_close: Vec::new(),
        combination: first.streams.combination.clone(),
    };
    let mut pred_spans = Vec::new();
    let mut gold_spans = Vec::new();
    for outcome in outcomes {
        for (i, stream) in outcome.streams.open.into_iter().enumerate() {
            merged.open[i].extend(stream);
        }
        for (i, stream) in outcome.streams.close.into_iter().enumerate() {
            merged.close[i].extend(stream);
        }
        merged.combined_open.extend(outcome.streams.combined_open);
        merged.combined_close.extend(outcome.streams.combined_close);
        merged.gold_open.extend(outcome.streams.gold_open);
        merged.gold_close.extend(outcome.streams.gold_close);
        pred_spans.extend(outcome.pred_spans);
        gold_spans.extend(outcome.gold_spans);
    }
    let report = report::build_report(&merged, &pred_spans, &gold_spans, significance)?;
    Ok(CrossvalOutcome {
        pred_spans,
        gold_spans,
        report,
    })
}

/// Cross-validation over consecutive near-equal blocks: every sentence is
/// tested exactly once, and all rates are computed over the concatenated
/// token-level results.
pub fn run_crossval(
    data: &Dataset,
    config: &ExperimentConfig,
) -> Result<CrossvalOutcome, PipelineError> {
    config.validate()?;
    let folds = corpus::split_folds(data, config.folds)?;
    let outcomes = folds
        .iter()
        .map(|(train, test)| run_basenp(train, test, config))
        .collect::<Result<Vec<BasenpOutcome>, PipelineError>>()?;
    aggregate_folds(outcomes, config.significance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;
    use alloc::vec;

    fn quick_config(combination: Combination) -> ExperimentConfig {
        ExperimentConfig {
            schemes: TagScheme::ALL.to_vec(),
            stages: 1,
            combination,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_validation_catches_bad_values() {
        let mut config = ExperimentConfig::default();
        config.schemes.clear();
        assert!(config.validate().is_err());
        let config = ExperimentConfig {
            schemes: vec![TagScheme::IOB1, TagScheme::IOB1],
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
        let config = ExperimentConfig {
            stages: 3,
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
        let config = ExperimentConfig {
            tuning_fraction: 0.6,
            ..ExperimentConfig::default()
        };
        assert!(config.validate().is_err());
        assert!(ExperimentConfig::default().validate().is_ok());
    }

    #[test]
    fn head_of_span_is_the_rightmost_token() {
        let data = synth::flat_corpus(1, 0);
        let sentence = &data.sentences[0];
        let span = ChunkSpan::np(0, 1);
        assert_eq!(head_of_span(sentence, &span).unwrap(), 1);
        let single = ChunkSpan::np(1, 1);
        assert_eq!(head_of_span(sentence, &single).unwrap(), 1);
        let bad = ChunkSpan::np(0, sentence.len());
        assert!(head_of_span(sentence, &bad).is_err());
    }

    #[test]
    fn tuning_split_takes_the_last_block_by_default() {
        let data = synth::flat_corpus(20, 0);
        let config = ExperimentConfig::default();
        let (rest, tune) = tuning_split(&data, &config).unwrap();
        assert_eq!(tune.len(), 2);
        assert_eq!(rest.len(), 18);
        assert_eq!(tune.sentences[0], data.sentences[18]);
        assert_eq!(rest.sentences, data.sentences[..18].to_vec());
    }

    #[test]
    fn shuffled_tuning_split_is_seeded_and_ordered() {
        let data = synth::flat_corpus(20, 0);
        let config = ExperimentConfig {
            shuffle_tuning: true,
            seed: 42,
            ..ExperimentConfig::default()
        };
        let (rest_a, tune_a) = tuning_split(&data, &config).unwrap();
        let (rest_b, tune_b) = tuning_split(&data, &config).unwrap();
        assert_eq!(tune_a, tune_b);
        assert_eq!(rest_a, rest_b);
        assert_eq!(tune_a.len() + rest_a.len(), 20);
        // Original order survives inside both parts.
        let mut merged = Vec::new();
        let mut ti = 0;
        let mut ri = 0;
        for sentence in &data.sentences {
            if ti < tune_a.len() && &tune_a.sentences[ti] == sentence {
                ti += 1;
            } else {
                assert_eq!(&rest_a.sentences[ri], sentence);
                ri += 1;
            }
            merged.push(sentence);
        }
        assert_eq!(ti, tune_a.len());
    }

    #[test]
    fn memorizing_run_reproduces_gold_chunks() {
        let data = synth::flat_corpus(12, 5);
        let config = quick_config(Combination::Vote(VoteMethod::Majority));
        let outcome = run_basenp(&data, &data, &config).unwrap();
        assert_eq!(outcome.report.chunks.f_score, 100.0);
        assert_eq!(outcome.pred_spans, data.gold_spans());
        assert_eq!(outcome.report.combined_open_accuracy, 100.0);
    }

    #[test]
    fn single_scheme_majority_passes_its_streams_through() {
        let data = synth::flat_corpus(10, 3);
        let config = ExperimentConfig {
            schemes: vec![TagScheme::IOE2],
            stages: 1,
            combination: Combination::Vote(VoteMethod::Majority),
            ..ExperimentConfig::default()
        };
        let outcome = run_basenp(&data, &data, &config).unwrap();
        assert_eq!(outcome.streams.combined_open, outcome.streams.open[0]);
        assert_eq!(outcome.streams.combined_close, outcome.streams.close[0]);
        assert!(outcome.report.agreement_open.is_none());
    }

    #[test]
    fn crossval_scores_every_sentence_once() {
        let data = synth::flat_corpus(8, 11);
        let config = ExperimentConfig {
            schemes: vec![TagScheme::IOB1, TagScheme::OC],
            stages: 1,
            folds: 2,
            combination: Combination::Vote(VoteMethod::Majority),
            ..ExperimentConfig::default()
        };
        let outcome = run_crossval(&data, &config).unwrap();
        assert_eq!(outcome.pred_spans.len(), data.len());
        assert_eq!(outcome.gold_spans, data.gold_spans());
        assert_eq!(outcome.report.test_tokens, data.token_count());
    }

    #[test]
    fn crossval_is_deterministic() {
        let data = synth::flat_corpus(8, 13);
        let config = ExperimentConfig {
            schemes: vec![TagScheme::IOB1, TagScheme::IOE1, TagScheme::OC],
            stages: 1,
            folds: 2,
            combination: Combination::Vote(VoteMethod::TagPrecision),
            ..ExperimentConfig::default()
        };
        let a = run_crossval(&data, &config).unwrap();
        let b = run_crossval(&data, &config).unwrap();
        assert_eq!(
            report::render_text(&a.report),
            report::render_text(&b.report)
        );
        assert_eq!(a.pred_spans, b.pred_spans);
    }

    #[test]
    fn stacked_combination_runs_end_to_end() {
        let data = synth::flat_corpus(10, 17);
        for learner in [StackLearner::Memory, StackLearner::Tree] {
            for with_pos in [false, true] {
                let config = quick_config(Combination::Stacked { learner, with_pos });
                let outcome = run_basenp(&data, &data, &config).unwrap();
                assert_eq!(outcome.streams.combined_open.len(), data.token_count());
            }
        }
    }

    #[test]
    fn tuned_voting_runs_end_to_end() {
        let data = synth::flat_corpus(12, 19);
        for method in [
            VoteMethod::TotPrecision,
            VoteMethod::TagPrecision,
            VoteMethod::PrecisionRecall,
            VoteMethod::TagPair,
        ] {
            let config = quick_config(Combination::Vote(method));
            let outcome = run_basenp(&data, &data, &config).unwrap();
            assert_eq!(outcome.streams.combination, method.as_str());
            assert_eq!(outcome.streams.combined_open.len(), data.token_count());
        }
    }

    #[test]
    fn empty_test_data_is_rejected_before_training() {
        let data = synth::flat_corpus(5, 0);
        let config = quick_config(Combination::Vote(VoteMethod::Majority));
        assert!(matches!(
            run_basenp(&data, &Dataset::default(), &config).unwrap_err(),
            PipelineError::EmptyDataset
        ));
    }

    #[test]
    fn chunker_files_round_trip() {
        let data = synth::flat_corpus(8, 2);
        for (scheme, stages) in [
            (TagScheme::IOB1, 2),
            (TagScheme::IOE2, 1),
            (TagScheme::OC, 1),
        ] {
            let chunker = SchemeChunker::train(&data, scheme, stages, 3).unwrap();
            let text = chunker.to_text().unwrap();
            let loaded = SchemeChunker::from_text(&text).unwrap();
            assert_eq!(loaded.scheme(), scheme);
            assert_eq!(loaded.to_text().unwrap(), text);
            for sentence in &data.sentences {
                assert_eq!(
                    chunker.predict_sentence(sentence).unwrap(),
                    loaded.predict_sentence(sentence).unwrap()
                );
            }
        }
    }

    #[test]
    fn truncated_chunker_file_is_rejected() {
        let data = synth::flat_corpus(5, 2);
        let chunker = SchemeChunker::train(&data, TagScheme::IOB1, 1, 3).unwrap();
        let text = chunker.to_text().unwrap();
        assert!(SchemeChunker::from_text(&text[..text.len() / 2]).is_err());
        assert!(SchemeChunker::from_text("").is_err());
    }

    #[test]
    fn combination_names_round_trip() {
        for name in [
            "majority",
            "totprecision",
            "tagprecision",
            "precision-recall",
            "tagpair",
            "stack-memory-tags",
            "stack-memory-tags-pos",
            "stack-tree-tags",
            "stack-tree-tags-pos",
        ] {
            let combination = Combination::parse(name).unwrap();
            assert_eq!(combination.as_str(), name);
        }
        assert!(Combination::parse("bogus").is_none());
    }
}
