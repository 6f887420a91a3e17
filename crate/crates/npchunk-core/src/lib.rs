//! Noun-phrase chunking by classifier combination.
//!
//! This crate implements a complete base-NP chunking toolkit built around a
//! single idea: train the same memory-based classifier on several different
//! encodings of the same chunking data, convert every output to open/close
//! bracket decisions, and combine those decisions by voting or by a stacked
//! classifier before reconstructing chunks.
//!
//! The main pieces:
//!
//! * [`corpus`] — the token/sentence/span data model plus the column file
//!   format and fold splitting.
//! * [`chunkrepr`] — conversions between chunk spans and the five tag
//!   representations (IOB1, IOB2, IOE1, IOE2 and the open/close bracket
//!   pair), including repair of inconsistent classifier output and
//!   shortest-phrase bracket pairing.
//! * [`features`] — fixed windows of word/POS (and, in the second stage,
//!   chunk-tag) context turned into categorical feature vectors.
//! * [`learner`] — IB1-IG (instance storage with information-gain weighted
//!   overlap distance) and IGTree (its decision-tree approximation), with a
//!   deterministic text persistence format.
//! * [`combine`] — five voting schemes and classifier stacking over aligned
//!   output streams.
//! * [`eval`] — token accuracy, exact-match chunk precision/recall/F,
//!   agreement tables and significance tests.
//! * [`pipeline`] — experiment orchestration: two-stage training per
//!   representation, bracket combination, cross-validation, and the
//!   recursive cascade for nested noun phrases.
//! * [`synth`] — deterministic synthetic corpora used by the test suite and
//!   handy for smoke-testing a build.
//!
//! The crate is `no_std`-compatible (requires `alloc`); disable the default
//! `std` feature and enable `libm` to build it without the standard library.
//! All operations are pure functions over immutable data, so everything here
//! can be shared freely across threads.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

#[cfg(all(not(feature = "std"), not(feature = "libm")))]
compile_error!("npchunk-core needs either the `std` feature or the `libm` feature");

pub mod chunkrepr;
pub mod combine;
pub mod corpus;
pub mod eval;
pub mod features;
pub mod learner;
pub mod pipeline;
pub mod synth;

pub use chunkrepr::{BracketSide, BracketStream, ChunkTag, TagScheme};
pub use corpus::{ChunkSpan, Dataset, Sentence, Token};
pub use features::Instance;

mod math {
    #[cfg(feature = "std")]
    #[inline]
    pub fn log2(x: f64) -> f64 {
        x.log2()
    }

    #[cfg(all(not(feature = "std"), feature = "libm"))]
    #[inline]
    pub fn log2(x: f64) -> f64 {
        libm::log2(x)
    }
}
