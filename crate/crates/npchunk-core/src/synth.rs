//! Deterministic synthetic corpora.
//!
//! These generators produce small English-like corpora with a fixed
//! vocabulary and a seeded generator, so the same seed always yields the
//! same dataset on every platform. They exist for tests, benchmarks and
//! smoke runs; the grammar is deliberately simple (noun groups are
//! POS-predictable) so that chunking them is learnable.

use alloc::vec::Vec;

use crate::corpus::{ChunkSpan, Dataset, Sentence, Token};

/// A small xorshift64* generator: deterministic, platform-independent, and
/// good enough for shuffling and sampling test data.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        // Zero state would stick at zero.
        Rng(seed ^ 0x9e37_79b9_7f4a_7c15)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform value in `0..n`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// True with probability `num / den`.
    pub fn chance(&mut self, num: usize, den: usize) -> bool {
        self.below(den) < num
    }

    /// One element of a non-empty slice.
    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }
}

const DETERMINERS: &[&str] = &["the", "a", "this", "each", "its", "another"];

const ADJECTIVES: &[&str] = &[
    "big", "small", "red", "early", "late", "quick", "quiet", "sharp", "flat", "brave", "pale",
    "round", "stale", "loud", "thin", "vast",
];

const NOUNS: &[&str] = &[
    "fox", "dog", "gold", "trader", "market", "price", "ounce", "bank", "river", "stone", "paper",
    "window", "garden", "engine", "harbor", "signal", "bridge", "copper", "farmer", "meadow",
    "anchor", "bottle", "candle", "drawer", "fabric", "hammer", "island", "jacket", "kettle",
    "ladder", "mirror", "needle", "orchard", "pencil", "quarry", "ribbon", "saddle", "teapot",
    "valley", "wagon", "yarn", "zipper", "basket", "corner", "desk",
];

const NAMES: &[&str] = &[
    "Alice", "Bob", "Carol", "Davis", "Emma", "Frank", "Grace", "Henry", "Irene", "Jack", "Karen",
    "Lewis",
];

const VERBS: &[&str] = &[
    "sees", "buys", "sells", "holds", "paints", "moves", "lifts", "opens", "closes", "fixes",
    "carries", "watches",
];

const ADVERBS: &[&str] = &["today", "quickly", "quietly", "soon", "twice", "often"];

const PREPOSITIONS: &[&str] = &["in", "on", "near", "under", "behind", "beside"];

/// Appends a flat noun group and records its span.
fn push_base_np(rng: &mut Rng, tokens: &mut Vec<Token>, spans: &mut Vec<ChunkSpan>) {
    let begin = tokens.len();
    if rng.chance(1, 5) {
        tokens.push(Token::new(*rng.pick(NAMES), "NNP"));
    } else {
        if rng.chance(4, 5) {
            tokens.push(Token::new(*rng.pick(DETERMINERS), "DT"));
        }
        for _ in 0..rng.below(3) {
            tokens.push(Token::new(*rng.pick(ADJECTIVES), "JJ"));
        }
        tokens.push(Token::new(*rng.pick(NOUNS), "NN"));
    }
    spans.push(ChunkSpan::np(begin, tokens.len() - 1));
}

/// A corpus of simple transitive sentences whose noun groups are annotated
/// as non-overlapping chunks.
pub fn flat_corpus(sentences: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut tokens = Vec::new();
        let mut spans = Vec::new();
        push_base_np(&mut rng, &mut tokens, &mut spans);
        tokens.push(Token::new(*rng.pick(VERBS), "VBZ"));
        if rng.chance(4, 5) {
            push_base_np(&mut rng, &mut tokens, &mut spans);
        }
        if rng.chance(1, 2) {
            tokens.push(Token::new(*rng.pick(PREPOSITIONS), "IN"));
            push_base_np(&mut rng, &mut tokens, &mut spans);
        }
        if rng.chance(1, 4) {
            tokens.push(Token::new(*rng.pick(ADVERBS), "RB"));
        }
        tokens.push(Token::new(".", "."));
        out.push(Sentence::new(tokens, spans).expect("generated spans are valid"));
    }
    Dataset::new(out)
}

/// Appends a noun phrase that may embed further noun phrases through
/// prepositional attachment, recording every level's span.
fn push_nested_np(
    rng: &mut Rng,
    tokens: &mut Vec<Token>,
    spans: &mut Vec<ChunkSpan>,
    depth: usize,
) {
    let begin = tokens.len();
    push_base_np(rng, tokens, spans);
    if depth > 0 && rng.chance(1, 2) {
        tokens.push(Token::new(*rng.pick(PREPOSITIONS), "IN"));
        push_nested_np(rng, tokens, spans, depth - 1);
        // The embedding phrase covers everything from the head group
        // through the attached material.
        spans.push(ChunkSpan::np(begin, tokens.len() - 1));
    }
}

/// A corpus whose noun phrases nest up to three levels deep.
pub fn nested_corpus(sentences: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(sentences);
    for _ in 0..sentences {
        let mut tokens = Vec::new();
        let mut spans = Vec::new();
        push_nested_np(&mut rng, &mut tokens, &mut spans, 2);
        tokens.push(Token::new(*rng.pick(VERBS), "VBZ"));
        push_nested_np(&mut rng, &mut tokens, &mut spans, 2);
        tokens.push(Token::new(".", "."));
        let mut sentence = Sentence::new(tokens, spans).expect("generated spans are valid");
        sentence.spans.dedup();
        out.push(sentence);
    }
    Dataset::new(out)
}

/// A random valid span annotation for a sentence of `len` tokens:
/// non-overlapping, possibly adjacent, possibly empty.
pub fn random_span_set(rng: &mut Rng, len: usize) -> Vec<ChunkSpan> {
    let mut spans = Vec::new();
    let mut t = 0;
    while t < len {
        if rng.chance(2, 5) {
            let max_len = (len - t).min(4);
            let span_len = 1 + rng.below(max_len);
            spans.push(ChunkSpan::np(t, t + span_len - 1));
            t += span_len;
        } else {
            t += 1;
        }
    }
    spans
}
