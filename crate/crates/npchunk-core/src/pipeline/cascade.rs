//! Recursive recognition of nested noun phrases.
//!
//! The cascade chunks repeatedly: the first level recognizes innermost
//! phrases with all five representations combined by majority voting, every
//! recognized phrase is collapsed to its head token carrying the reserved
//! POS tag, and the next level chunks the shortened sentences. Levels past
//! the first use the bracket-pair representation alone. The process stops
//! when a level finds nothing, when the training data runs out of deeper
//! levels, or at the configured cap; collapsed positions are then expanded
//! back to original token coordinates, which yields a properly nested span
//! set.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::chunkrepr::TagScheme;
use crate::combine::{combine_stream, Combiner, OutputStream, VoteWeights};
use crate::corpus::{ChunkSpan, Dataset, Sentence, Token};

use super::{
    head_of_span, pair_label_streams, ExperimentConfig, PipelineError, SchemeChunker, SchemeStreams,
};

/// POS tag carried by a collapsed phrase head. Deliberately not a Treebank
/// tag, so it cannot collide with real input.
pub const CASCADE_HEAD_POS: &str = "NP";

/// One level's collapses: for each sentence, the positions (in that level's
/// coordinates) that replaced a phrase, mapped to the replaced span in
/// original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeLevel {
    pub level: usize,
    pub rewrites: Vec<BTreeMap<usize, ChunkSpan>>,
}

/// The cascade's result: nested spans per test sentence in original token
/// coordinates, plus how deep training and prediction went.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeOutcome {
    pub pred_spans: Vec<Vec<ChunkSpan>>,
    pub levels: Vec<CascadeLevel>,
    pub levels_trained: usize,
}

/// Spans that contain no other span of the set (duplicates removed first).
fn leaf_spans(spans: &[ChunkSpan]) -> Vec<ChunkSpan> {
    let mut spans = spans.to_vec();
    spans.sort();
    spans.dedup();
    spans
        .iter()
        .filter(|a| !spans.iter().any(|b| a.strictly_contains(b)))
        .cloned()
        .collect()
}

/// Collapses each span (disjoint, sorted) to its head token and remaps the
/// remaining spans. Returns the rewritten sentence and, for each new token
/// position, the range of old positions it covers.
fn collapse(
    sentence: &Sentence,
    collapsed: &[ChunkSpan],
    keep: &[ChunkSpan],
) -> Result<(Sentence, Vec<(usize, usize)>), PipelineError> {
    let mut tokens = Vec::new();
    let mut covers = Vec::new();
    let mut new_of_old = alloc::vec![0usize; sentence.len()];
    let mut next = collapsed.iter().peekable();
    let mut t = 0;
    while t < sentence.len() {
        if let Some(span) = next.peek() {
            if span.begin == t {
                let head = head_of_span(sentence, span)?;
                for old in span.begin..=span.end {
                    new_of_old[old] = tokens.len();
                }
                covers.push((span.begin, span.end));
                tokens.push(Token::new(
                    sentence.tokens[head].word.clone(),
                    CASCADE_HEAD_POS,
                ));
                t = span.end + 1;
                next.next();
                continue;
            }
        }
        new_of_old[t] = tokens.len();
        covers.push((t, t));
        tokens.push(sentence.tokens[t].clone());
        t += 1;
    }
    let remapped = keep
        .iter()
        .map(|span| ChunkSpan::new(new_of_old[span.begin], new_of_old[span.end], &*span.label))
        .collect();
    let sentence = Sentence::new(tokens, remapped).map_err(PipelineError::Corpus)?;
    Ok((sentence, covers))
}

/// Stratifies nested training annotation into per-level datasets: level 1
/// carries the innermost spans, deeper levels are obtained by collapsing
/// each level's spans to their heads.
fn stratify(train: &Dataset, max_levels: usize) -> Result<Vec<Dataset>, PipelineError> {
    let mut levels = Vec::new();
    let mut current: Vec<Sentence> = train.sentences.clone();
    for _ in 0..max_levels {
        if current.iter().all(|s| s.spans.is_empty()) {
            break;
        }
        let mut annotated = Vec::with_capacity(current.len());
        let mut collapsed_next = Vec::with_capacity(current.len());
        for sentence in &current {
            let leaves = leaf_spans(&sentence.spans);
            let mut rest: Vec<ChunkSpan> = sentence.spans.clone();
            rest.sort();
            rest.dedup();
            rest.retain(|s| !leaves.contains(s));
            annotated.push(
                Sentence::new(sentence.tokens.clone(), leaves.clone())
                    .map_err(PipelineError::Corpus)?,
            );
            let (next_sentence, _) = collapse(
                &Sentence::new(sentence.tokens.clone(), Vec::new())
                    .map_err(PipelineError::Corpus)?,
                &leaves,
                &rest,
            )?;
            collapsed_next.push(next_sentence);
        }
        levels.push(Dataset::new(annotated));
        current = collapsed_next;
    }
    Ok(levels)
}

/// Chunks the current sentences once with the first-level system: all
/// selected representations combined by majority voting.
fn level_one_spans(
    train: &Dataset,
    test: &Dataset,
    config: &ExperimentConfig,
) -> Result<Vec<Vec<ChunkSpan>>, PipelineError> {
    let schemes = config
        .schemes
        .iter()
        .map(|&scheme| super::scheme_streams(train, test, scheme, config))
        .collect::<Result<Vec<SchemeStreams>, PipelineError>>()?;
    let open_streams: Vec<OutputStream> = schemes
        .iter()
        .map(|s| OutputStream::new(s.scheme.as_str(), s.test_open.clone()))
        .collect();
    let close_streams: Vec<OutputStream> = schemes
        .iter()
        .map(|s| OutputStream::new(s.scheme.as_str(), s.test_close.clone()))
        .collect();
    let combiner = Combiner::Vote(VoteWeights::majority(schemes.len()));
    let open = combine_stream(&open_streams, None, &combiner)?;
    let close = combine_stream(&close_streams, None, &combiner)?;
    split_and_pair(test, &open.tags, &close.tags)
}

fn split_and_pair(
    test: &Dataset,
    open: &[alloc::string::String],
    close: &[alloc::string::String],
) -> Result<Vec<Vec<ChunkSpan>>, PipelineError> {
    let mut out = Vec::with_capacity(test.len());
    let mut offset = 0;
    for sentence in &test.sentences {
        let len = sentence.len();
        out.push(pair_label_streams(
            &open[offset..offset + len],
            &close[offset..offset + len],
        )?);
        offset += len;
    }
    Ok(out)
}

/// Runs the cascade: trains per-level chunkers from depth-stratified gold
/// annotation and recognizes nested phrases in the test data.
pub fn run_cascade(
    train: &Dataset,
    test: &Dataset,
    config: &ExperimentConfig,
) -> Result<CascadeOutcome, PipelineError> {
    config.validate()?;
    if train.token_count() == 0 || test.token_count() == 0 {
        return Err(PipelineError::EmptyDataset);
    }
    let level_data = stratify(train, config.cascade_max_levels)?;
    let levels_trained = level_data.len();

    let mut pred_spans: Vec<Vec<ChunkSpan>> = alloc::vec![Vec::new(); test.len()];
    let mut levels = Vec::new();
    // Current rewritten test sentences and, per sentence, each current
    // position's coverage in original coordinates.
    let mut current: Vec<Sentence> = test.sentences.clone();
    let mut coverage: Vec<Vec<(usize, usize)>> = test
        .sentences
        .iter()
        .map(|s| (0..s.len()).map(|t| (t, t)).collect())
        .collect();

    for (depth, data) in level_data.iter().enumerate() {
        let current_data = Dataset::new(
            current
                .iter()
                .map(|s| Sentence {
                    tokens: s.tokens.clone(),
                    spans: Vec::new(),
                })
                .collect(),
        );
        // Level 1 combines all representations by majority voting; deeper
        // levels use the bracket-pair representation alone.
        let found = if depth == 0 {
            level_one_spans(data, &current_data, config)?
        } else {
            let chunker = SchemeChunker::train(data, TagScheme::OC, 1, config.k)?;
            current_data
                .sentences
                .iter()
                .map(|s| chunker.predict_spans(s))
                .collect::<Result<Vec<Vec<ChunkSpan>>, PipelineError>>()?
        };
        if found.iter().all(|s| s.is_empty()) {
            break;
        }
        // Record found spans in original coordinates, then collapse them
        // for the next level.
        let mut rewrites = Vec::with_capacity(current.len());
        for (i, spans) in found.iter().enumerate() {
            let mut sentence_rewrites = BTreeMap::new();
            let mut with_spans = current[i].clone();
            with_spans.spans = Vec::new();
            let (collapsed_sentence, covers) = collapse(&with_spans, spans, &[])?;
            let mut new_coverage = Vec::with_capacity(covers.len());
            for &(old_begin, old_end) in &covers {
                new_coverage.push((coverage[i][old_begin].0, coverage[i][old_end].1));
            }
            for span in spans {
                let original = ChunkSpan::np(coverage[i][span.begin].0, coverage[i][span.end].1);
                let new_pos = new_coverage
                    .iter()
                    .position(|&(b, e)| (b, e) == (original.begin, original.end))
                    .expect("collapsed span has a position");
                sentence_rewrites.insert(new_pos, original.clone());
                if !pred_spans[i].contains(&original) {
                    pred_spans[i].push(original);
                }
            }
            current[i] = collapsed_sentence;
            coverage[i] = new_coverage;
            rewrites.push(sentence_rewrites);
        }
        levels.push(CascadeLevel {
            level: depth + 1,
            rewrites,
        });
    }
    for spans in &mut pred_spans {
        spans.sort();
    }
    Ok(CascadeOutcome {
        pred_spans,
        levels,
        levels_trained,
    })
}
