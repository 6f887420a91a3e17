//! Feature extraction: fixed context windows turned into categorical
//! feature vectors.
//!
//! The first classification stage describes a token by itself, its POS tag,
//! and four word/POS pairs of context on each side (18 features). The
//! second stage narrows the word/POS context to three pairs per side and
//! adds the first stage's chunk tags at offsets -2, -1, +1 and +2 — the
//! focus token's own first-stage tag is deliberately not a feature — for
//! the same arity of 18.
//!
//! Positions beyond the sentence edge yield a reserved boundary value;
//! word, POS and chunk-tag slots use distinct sentinels so padding never
//! matches a real value from another slot kind.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::chunkrepr::{self, ChunkTag, ReprError, TagScheme};
use crate::corpus::{Dataset, Sentence};

/// Boundary sentinel for word slots.
pub const PAD_WORD: &str = "<pad-word>";
/// Boundary sentinel for POS slots.
pub const PAD_POS: &str = "<pad-pos>";
/// Boundary sentinel for chunk-tag slots.
pub const PAD_TAG: &str = "<pad-tag>";

/// A fixed-arity vector of categorical feature values plus a class label —
/// the unit consumed by the learners.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Instance {
    pub features: Vec<String>,
    pub label: String,
}

impl Instance {
    pub fn new(features: Vec<String>, label: impl Into<String>) -> Self {
        Instance {
            features,
            label: label.into(),
        }
    }

    pub fn arity(&self) -> usize {
        self.features.len()
    }
}

/// Window geometry: word/POS context on each side, plus chunk-tag context
/// on each side (zero in the first stage).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowSpec {
    pub word_left: usize,
    pub word_right: usize,
    pub tag_left: usize,
    pub tag_right: usize,
}

impl WindowSpec {
    /// First-stage window: word/POS context of four on each side.
    pub const STAGE1: WindowSpec = WindowSpec {
        word_left: 4,
        word_right: 4,
        tag_left: 0,
        tag_right: 0,
    };

    /// Second-stage window: word/POS context of three, chunk-tag context of
    /// two, on each side.
    pub const STAGE2: WindowSpec = WindowSpec {
        word_left: 3,
        word_right: 3,
        tag_left: 2,
        tag_right: 2,
    };

    pub fn arity(&self) -> usize {
        2 * (self.word_left + self.word_right + 1) + self.tag_left + self.tag_right
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureError {
    /// Focus token index past the end of the sentence.
    TokenOutOfRange { index: usize, len: usize },
    /// A chunk-tag context sequence whose length differs from the sentence.
    TagLengthMismatch { tags: usize, tokens: usize },
    /// Second-stage output missing for a sentence.
    MissingStageOneOutput { sentence: usize },
    /// Label encoding failed.
    Repr(ReprError),
}

impl From<ReprError> for FeatureError {
    fn from(e: ReprError) -> Self {
        FeatureError::Repr(e)
    }
}

impl core::fmt::Display for FeatureError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            FeatureError::TokenOutOfRange { index, len } => {
                write!(f, "token index {index} out of range for {len} tokens")
            }
            FeatureError::TagLengthMismatch { tags, tokens } => {
                write!(f, "{tags} chunk tags supplied for {tokens} tokens")
            }
            FeatureError::MissingStageOneOutput { sentence } => {
                write!(f, "no first-stage output for sentence {sentence}")
            }
            FeatureError::Repr(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for FeatureError {}

fn window_features(
    sentence: &Sentence,
    tags: Option<&[ChunkTag]>,
    t: usize,
    spec: WindowSpec,
) -> Result<Vec<String>, FeatureError> {
    let len = sentence.len();
    if t >= len {
        return Err(FeatureError::TokenOutOfRange { index: t, len });
    }
    if let Some(tags) = tags {
        if tags.len() != len {
            return Err(FeatureError::TagLengthMismatch {
                tags: tags.len(),
                tokens: len,
            });
        }
    }
    let at = |offset: isize| -> Option<usize> {
        let pos = t as isize + offset;
        (pos >= 0 && (pos as usize) < len).then_some(pos as usize)
    };
    let mut features = Vec::with_capacity(spec.arity());
    for offset in -(spec.word_left as isize)..=(spec.word_right as isize) {
        features.push(match at(offset) {
            Some(p) => sentence.tokens[p].word.clone(),
            None => PAD_WORD.to_string(),
        });
    }
    for offset in -(spec.word_left as isize)..=(spec.word_right as isize) {
        features.push(match at(offset) {
            Some(p) => sentence.tokens[p].pos.clone(),
            None => PAD_POS.to_string(),
        });
    }
    if spec.tag_left + spec.tag_right > 0 {
        let tags = tags.expect("tag context requested without tags");
        let tag_at = |offset: isize| -> String {
            match at(offset) {
                Some(p) => tags[p].as_str().to_string(),
                None => PAD_TAG.to_string(),
            }
        };
        for offset in -(spec.tag_left as isize)..0 {
            features.push(tag_at(offset));
        }
        for offset in 1..=(spec.tag_right as isize) {
            features.push(tag_at(offset));
        }
    }
    Ok(features)
}

/// First-stage feature vector for one token: words at offsets -4..=+4, then
/// POS tags at the same offsets.
pub fn stage1_features(sentence: &Sentence, t: usize) -> Result<Vec<String>, FeatureError> {
    window_features(sentence, None, t, WindowSpec::STAGE1)
}

/// Second-stage feature vector: words and POS at offsets -3..=+3, then the
/// first stage's chunk tags at offsets -2, -1, +1, +2.
///
/// `stage1_tags` must be the first stage's *output* on this sentence, not
/// gold tags; the second stage has to see the same distribution at training
/// and test time.
pub fn stage2_features(
    sentence: &Sentence,
    stage1_tags: &[ChunkTag],
    t: usize,
) -> Result<Vec<String>, FeatureError> {
    window_features(sentence, Some(stage1_tags), t, WindowSpec::STAGE2)
}

/// First-stage training instances for a tagging scheme: one per token,
/// labels from the gold spans.
pub fn stage1_instances(data: &Dataset, scheme: TagScheme) -> Result<Vec<Instance>, FeatureError> {
    let mut instances = Vec::with_capacity(data.token_count());
    for sentence in &data.sentences {
        let labels = chunkrepr::encode_tags(&sentence.spans, sentence.len(), scheme)?;
        for t in 0..sentence.len() {
            instances.push(Instance::new(
                stage1_features(sentence, t)?,
                labels[t].as_str(),
            ));
        }
    }
    Ok(instances)
}

/// Second-stage training instances: labels from the gold spans, chunk-tag
/// context from `stage1_output` (one tag sequence per sentence).
pub fn stage2_instances(
    data: &Dataset,
    scheme: TagScheme,
    stage1_output: &[Vec<ChunkTag>],
) -> Result<Vec<Instance>, FeatureError> {
    let mut instances = Vec::with_capacity(data.token_count());
    for (s, sentence) in data.sentences.iter().enumerate() {
        let tags = stage1_output
            .get(s)
            .ok_or(FeatureError::MissingStageOneOutput { sentence: s })?;
        let labels = chunkrepr::encode_tags(&sentence.spans, sentence.len(), scheme)?;
        for t in 0..sentence.len() {
            instances.push(Instance::new(
                stage2_features(sentence, tags, t)?,
                labels[t].as_str(),
            ));
        }
    }
    Ok(instances)
}

/// Open-side and close-side training instances for the bracket-pair scheme.
/// Both sides share the first-stage window; only the labels differ.
pub fn oc_instances(data: &Dataset) -> Result<(Vec<Instance>, Vec<Instance>), FeatureError> {
    let mut open_side = Vec::with_capacity(data.token_count());
    let mut close_side = Vec::with_capacity(data.token_count());
    for sentence in &data.sentences {
        let (open, close) = chunkrepr::encode_brackets(&sentence.spans, sentence.len())?;
        for t in 0..sentence.len() {
            let features = stage1_features(sentence, t)?;
            open_side.push(Instance::new(
                features.clone(),
                open.side.label(open.marks[t]),
            ));
            close_side.push(Instance::new(features, close.side.label(close.marks[t])));
        }
    }
    Ok((open_side, close_side))
}
