//! Conversions between chunk spans and the five tag representations.
//!
//! Four of the representations encode chunks as one tag per token:
//!
//! * `IOB1` — chunk words are `I`, outside words `O`; a chunk-initial word
//!   is `B` only when the previous token ends another chunk.
//! * `IOB2` — every chunk-initial word is `B`.
//! * `IOE1` — chunk words are `I`; a chunk-final word is `E` only when the
//!   next token starts another chunk.
//! * `IOE2` — every chunk-final word is `E`.
//!
//! The fifth, `OC`, is a pair of binary streams: one marks chunk-opening
//! tokens, the other chunk-closing tokens. Open/close streams are rebuilt
//! into spans by the shortest-phrase rule: each close bracket pairs with the
//! nearest preceding unconsumed open bracket.
//!
//! Decoding accepts inconsistent tag sequences (classifier output) and
//! repairs them: a chunk starts at any `I`/`B`/`E` that does not continue an
//! open chunk, `B` always starts a new chunk, `E` always ends one (forming a
//! one-token chunk when none is open), and an open chunk is closed before an
//! `O`, before a `B`, after an `E`, and at the end of the sentence. Decoding
//! never fails on tags drawn from the scheme's alphabet.

use alloc::vec::Vec;

use crate::corpus::ChunkSpan;

/// Tag written for a token that opens a chunk in the `OC` representation.
pub const OPEN_MARK: &str = "O-OPEN";
/// Tag written for a token that does not open a chunk.
pub const OPEN_NONE: &str = "O-NONE";
/// Tag written for a token that closes a chunk in the `OC` representation.
pub const CLOSE_MARK: &str = "C-CLOSE";
/// Tag written for a token that does not close a chunk.
pub const CLOSE_NONE: &str = "C-NONE";

/// One of the five chunk encodings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TagScheme {
    IOB1,
    IOB2,
    IOE1,
    IOE2,
    OC,
}

impl TagScheme {
    /// All five schemes, in their conventional order.
    pub const ALL: [TagScheme; 5] = [
        TagScheme::IOB1,
        TagScheme::IOB2,
        TagScheme::IOE1,
        TagScheme::IOE2,
        TagScheme::OC,
    ];

    /// The four single-stream tagging schemes (everything except `OC`).
    pub const TAGGING: [TagScheme; 4] = [
        TagScheme::IOB1,
        TagScheme::IOB2,
        TagScheme::IOE1,
        TagScheme::IOE2,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TagScheme::IOB1 => "IOB1",
            TagScheme::IOB2 => "IOB2",
            TagScheme::IOE1 => "IOE1",
            TagScheme::IOE2 => "IOE2",
            TagScheme::OC => "O+C",
        }
    }

    /// Parses a scheme name; accepts `O+C` and `OC` for the bracket pair.
    pub fn parse(name: &str) -> Option<TagScheme> {
        match name {
            "IOB1" | "iob1" => Some(TagScheme::IOB1),
            "IOB2" | "iob2" => Some(TagScheme::IOB2),
            "IOE1" | "ioe1" => Some(TagScheme::IOE1),
            "IOE2" | "ioe2" => Some(TagScheme::IOE2),
            "O+C" | "OC" | "o+c" | "oc" => Some(TagScheme::OC),
            _ => None,
        }
    }

    /// True for the four one-tag-per-token schemes.
    pub fn is_tagging(&self) -> bool {
        !matches!(self, TagScheme::OC)
    }

    /// Whether `tag` belongs to this scheme's alphabet.
    pub fn allows(&self, tag: ChunkTag) -> bool {
        match self {
            TagScheme::IOB1 | TagScheme::IOB2 => tag != ChunkTag::E,
            TagScheme::IOE1 | TagScheme::IOE2 => tag != ChunkTag::B,
            TagScheme::OC => false,
        }
    }
}

impl core::fmt::Display for TagScheme {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single chunk tag. `B` occurs only in the IOB schemes, `E` only in the
/// IOE schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChunkTag {
    I,
    O,
    B,
    E,
}

impl ChunkTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            ChunkTag::I => "I",
            ChunkTag::O => "O",
            ChunkTag::B => "B",
            ChunkTag::E => "E",
        }
    }

    /// Parses a tag and checks it against the scheme's alphabet.
    pub fn parse(text: &str, scheme: TagScheme) -> Result<ChunkTag, ReprError> {
        let tag = match text {
            "I" => ChunkTag::I,
            "O" => ChunkTag::O,
            "B" => ChunkTag::B,
            "E" => ChunkTag::E,
            _ => return Err(ReprError::UnknownTag { scheme }),
        };
        if !scheme.allows(tag) {
            return Err(ReprError::TagOutsideAlphabet { tag, scheme });
        }
        Ok(tag)
    }
}

impl core::fmt::Display for ChunkTag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side of the bracket pair a stream carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BracketSide {
    Open,
    Close,
}

impl BracketSide {
    /// The tag written for a mark (or its absence) on this side.
    pub fn label(&self, mark: bool) -> &'static str {
        match (self, mark) {
            (BracketSide::Open, true) => OPEN_MARK,
            (BracketSide::Open, false) => OPEN_NONE,
            (BracketSide::Close, true) => CLOSE_MARK,
            (BracketSide::Close, false) => CLOSE_NONE,
        }
    }

    /// Inverse of [`BracketSide::label`].
    pub fn mark_of(&self, label: &str) -> Result<bool, ReprError> {
        match (self, label) {
            (BracketSide::Open, OPEN_MARK) => Ok(true),
            (BracketSide::Open, OPEN_NONE) => Ok(false),
            (BracketSide::Close, CLOSE_MARK) => Ok(true),
            (BracketSide::Close, CLOSE_NONE) => Ok(false),
            _ => Err(ReprError::UnknownTag {
                scheme: TagScheme::OC,
            }),
        }
    }
}

impl core::fmt::Display for BracketSide {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            BracketSide::Open => "O",
            BracketSide::Close => "C",
        })
    }
}

/// One binary bracket decision per token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketStream {
    pub side: BracketSide,
    pub marks: Vec<bool>,
}

impl BracketStream {
    pub fn new(side: BracketSide, marks: Vec<bool>) -> Self {
        BracketStream { side, marks }
    }

    pub fn len(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    /// The marked token positions, ascending.
    pub fn positions(&self) -> Vec<usize> {
        self.marks
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
            .collect()
    }

    /// Renders the stream as one tag label per token.
    pub fn labels(&self) -> Vec<&'static str> {
        self.marks.iter().map(|&m| self.side.label(m)).collect()
    }
}

/// The encoding of one sentence under some scheme: a tag sequence for the
/// tagging schemes, a bracket pair for `OC`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SchemeEncoding {
    Tags(Vec<ChunkTag>),
    Brackets {
        open: BracketStream,
        close: BracketStream,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReprError {
    /// A span's token indices do not fit the sentence.
    SpanOutOfRange {
        begin: usize,
        end: usize,
        len: usize,
    },
    /// Two spans at the same level overlap.
    OverlappingSpans {
        first: (usize, usize),
        second: (usize, usize),
    },
    /// A tag string outside every scheme's alphabet.
    UnknownTag { scheme: TagScheme },
    /// A valid tag used under a scheme that does not contain it.
    TagOutsideAlphabet { tag: ChunkTag, scheme: TagScheme },
    /// Open and close streams of different lengths.
    StreamLengthMismatch { open: usize, close: usize },
    /// A tag-sequence operation applied to the bracket-pair scheme.
    NotATaggingScheme,
}

impl core::fmt::Display for ReprError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ReprError::SpanOutOfRange { begin, end, len } => write!(
                f,
                "span {begin}..={end} does not fit a sentence of {len} tokens"
            ),
            ReprError::OverlappingSpans { first, second } => write!(
                f,
                "spans {}..={} and {}..={} overlap",
                first.0, first.1, second.0, second.1
            ),
            ReprError::UnknownTag { scheme } => {
                write!(f, "tag not in the {scheme} alphabet")
            }
            ReprError::TagOutsideAlphabet { tag, scheme } => {
                write!(f, "tag {tag} is not part of the {scheme} alphabet")
            }
            ReprError::StreamLengthMismatch { open, close } => write!(
                f,
                "open stream has {open} tokens but close stream has {close}"
            ),
            ReprError::NotATaggingScheme => {
                f.write_str("operation requires a single-stream tagging scheme, not O+C")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReprError {}

/// Sorts spans by begin position and checks that they fit `len` and are
/// pairwise non-overlapping.
fn sorted_spans(spans: &[ChunkSpan], len: usize) -> Result<Vec<ChunkSpan>, ReprError> {
    let mut sorted: Vec<ChunkSpan> = spans.to_vec();
    sorted.sort_by_key(|s| (s.begin, s.end));
    for span in &sorted {
        if span.begin > span.end || span.end >= len {
            return Err(ReprError::SpanOutOfRange {
                begin: span.begin,
                end: span.end,
                len,
            });
        }
    }
    for pair in sorted.windows(2) {
        if pair[1].begin <= pair[0].end {
            return Err(ReprError::OverlappingSpans {
                first: (pair[0].begin, pair[0].end),
                second: (pair[1].begin, pair[1].end),
            });
        }
    }
    Ok(sorted)
}

/// Encodes a span set as one tag per token under a tagging scheme.
pub fn encode_tags(
    spans: &[ChunkSpan],
    len: usize,
    scheme: TagScheme,
) -> Result<Vec<ChunkTag>, ReprError> {
    if !scheme.is_tagging() {
        return Err(ReprError::NotATaggingScheme);
    }
    let spans = sorted_spans(spans, len)?;
    let mut tags = alloc::vec![ChunkTag::O; len];
    for (idx, span) in spans.iter().enumerate() {
        for t in span.begin..=span.end {
            tags[t] = ChunkTag::I;
        }
        let follows_chunk = idx > 0 && spans[idx - 1].end + 1 == span.begin;
        let precedes_chunk = idx + 1 < spans.len() && span.end + 1 == spans[idx + 1].begin;
        match scheme {
            TagScheme::IOB1 => {
                if follows_chunk {
                    tags[span.begin] = ChunkTag::B;
                }
            }
            TagScheme::IOB2 => tags[span.begin] = ChunkTag::B,
            TagScheme::IOE1 => {
                if precedes_chunk {
                    tags[span.end] = ChunkTag::E;
                }
            }
            TagScheme::IOE2 => tags[span.end] = ChunkTag::E,
            TagScheme::OC => unreachable!(),
        }
    }
    Ok(tags)
}

/// Encodes a span set as the open/close bracket stream pair.
pub fn encode_brackets(
    spans: &[ChunkSpan],
    len: usize,
) -> Result<(BracketStream, BracketStream), ReprError> {
    let spans = sorted_spans(spans, len)?;
    let mut open = alloc::vec![false; len];
    let mut close = alloc::vec![false; len];
    for span in &spans {
        open[span.begin] = true;
        close[span.end] = true;
    }
    Ok((
        BracketStream::new(BracketSide::Open, open),
        BracketStream::new(BracketSide::Close, close),
    ))
}

/// Encodes a span set under any of the five schemes.
pub fn encode(
    spans: &[ChunkSpan],
    len: usize,
    scheme: TagScheme,
) -> Result<SchemeEncoding, ReprError> {
    if scheme.is_tagging() {
        Ok(SchemeEncoding::Tags(encode_tags(spans, len, scheme)?))
    } else {
        let (open, close) = encode_brackets(spans, len)?;
        Ok(SchemeEncoding::Brackets { open, close })
    }
}

/// Decodes a tag sequence back into spans, repairing inconsistencies.
///
/// For any sequence produced by [`encode_tags`] this returns the original
/// span set exactly. For arbitrary in-alphabet sequences it returns a valid
/// non-overlapping span set under the repair convention described in the
/// module docs. The only error is a tag outside the scheme's alphabet.
pub fn decode_tags(tags: &[ChunkTag], scheme: TagScheme) -> Result<Vec<ChunkSpan>, ReprError> {
    if !scheme.is_tagging() {
        return Err(ReprError::NotATaggingScheme);
    }
    let mut spans = Vec::new();
    let mut open: Option<usize> = None;
    for (t, &tag) in tags.iter().enumerate() {
        if !scheme.allows(tag) {
            return Err(ReprError::TagOutsideAlphabet { tag, scheme });
        }
        match tag {
            ChunkTag::O => {
                if let Some(begin) = open.take() {
                    spans.push(ChunkSpan::np(begin, t - 1));
                }
            }
            ChunkTag::B => {
                if let Some(begin) = open.take() {
                    spans.push(ChunkSpan::np(begin, t - 1));
                }
                open = Some(t);
            }
            ChunkTag::I => {
                if open.is_none() {
                    open = Some(t);
                }
            }
            ChunkTag::E => {
                let begin = open.take().unwrap_or(t);
                spans.push(ChunkSpan::np(begin, t));
            }
        }
    }
    if let Some(begin) = open {
        spans.push(ChunkSpan::np(begin, tags.len() - 1));
    }
    Ok(spans)
}

/// Decodes any scheme encoding into spans.
pub fn decode(encoding: &SchemeEncoding, scheme: TagScheme) -> Result<Vec<ChunkSpan>, ReprError> {
    match encoding {
        SchemeEncoding::Tags(tags) => decode_tags(tags, scheme),
        SchemeEncoding::Brackets { open, close } => pair_brackets(open, close),
    }
}

/// Converts a tag sequence to the bracket streams of its repaired span set.
pub fn to_brackets(
    tags: &[ChunkTag],
    scheme: TagScheme,
) -> Result<(BracketStream, BracketStream), ReprError> {
    let spans = decode_tags(tags, scheme)?;
    encode_brackets(&spans, tags.len())
}

/// Rebuilds spans from an open and a close stream by the shortest-phrase
/// rule.
///
/// A single left-to-right scan keeps at most one pending open position; a
/// later open mark overwrites it, and a close mark at `j` with pending open
/// `i <= j` emits the span `(i, j)`. Marks left unmatched are discarded.
pub fn pair_brackets(
    open: &BracketStream,
    close: &BracketStream,
) -> Result<Vec<ChunkSpan>, ReprError> {
    if open.marks.len() != close.marks.len() {
        return Err(ReprError::StreamLengthMismatch {
            open: open.marks.len(),
            close: close.marks.len(),
        });
    }
    let mut spans = Vec::new();
    let mut pending: Option<usize> = None;
    for t in 0..open.marks.len() {
        if open.marks[t] {
            pending = Some(t);
        }
        if close.marks[t] {
            if let Some(begin) = pending.take() {
                spans.push(ChunkSpan::np(begin, t));
            }
        }
    }
    Ok(spans)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn spans(pairs: &[(usize, usize)]) -> Vec<ChunkSpan> {
        pairs.iter().map(|&(b, e)| ChunkSpan::np(b, e)).collect()
    }

    fn tags(text: &str, scheme: TagScheme) -> Vec<ChunkTag> {
        text.split_whitespace()
            .map(|t| ChunkTag::parse(t, scheme).unwrap())
            .collect()
    }

    fn tag_string(tags: &[ChunkTag]) -> alloc::string::String {
        let parts: Vec<&str> = tags.iter().map(|t| t.as_str()).collect();
        parts.join(" ")
    }

    // The 17-token example sentence used throughout: six chunks at
    // 1-2, 4-5, 6-6, 8-8, 12-13, 14-15.
    const EXAMPLE_SPANS: [(usize, usize); 6] = [(1, 2), (4, 5), (6, 6), (8, 8), (12, 13), (14, 15)];
    const EXAMPLE_LEN: usize = 17;

    #[test]
    fn encodes_example_sentence_iob1() {
        let encoded = encode_tags(&spans(&EXAMPLE_SPANS), EXAMPLE_LEN, TagScheme::IOB1).unwrap();
        assert_eq!(tag_string(&encoded), "O I I O I I B O I O O O I I B I O");
    }

    #[test]
    fn encodes_example_sentence_ioe2() {
        let encoded = encode_tags(&spans(&EXAMPLE_SPANS), EXAMPLE_LEN, TagScheme::IOE2).unwrap();
        assert_eq!(tag_string(&encoded), "O I E O I E E O E O O O I E I E O");
    }

    #[test]
    fn encodes_example_sentence_brackets() {
        let (open, close) = encode_brackets(&spans(&EXAMPLE_SPANS), EXAMPLE_LEN).unwrap();
        assert_eq!(open.positions(), vec![1, 4, 6, 8, 12, 14]);
        assert_eq!(close.positions(), vec![2, 5, 6, 8, 13, 15]);
    }

    #[test]
    fn example_sentence_round_trips_under_all_schemes() {
        let gold = spans(&EXAMPLE_SPANS);
        for scheme in TagScheme::ALL {
            let encoded = encode(&gold, EXAMPLE_LEN, scheme).unwrap();
            let decoded = decode(&encoded, scheme).unwrap();
            assert_eq!(decoded, gold, "round trip failed for {scheme}");
        }
    }

    #[test]
    fn decode_repairs_chunk_initial_i_in_iob2() {
        let decoded = decode_tags(&tags("I I O", TagScheme::IOB2), TagScheme::IOB2).unwrap();
        assert_eq!(decoded, spans(&[(0, 1)]));
    }

    #[test]
    fn decode_of_all_outside_is_empty() {
        let decoded = decode_tags(&tags("O O O O O", TagScheme::IOB1), TagScheme::IOB1).unwrap();
        assert!(decoded.is_empty());
    }

    #[test]
    fn decode_rejects_tags_outside_the_alphabet() {
        let err = decode_tags(&[ChunkTag::E], TagScheme::IOB1).unwrap_err();
        assert_eq!(
            err,
            ReprError::TagOutsideAlphabet {
                tag: ChunkTag::E,
                scheme: TagScheme::IOB1
            }
        );
    }

    #[test]
    fn lone_e_becomes_a_one_token_chunk() {
        let (open, close) = to_brackets(&[ChunkTag::E], TagScheme::IOE2).unwrap();
        assert_eq!(open.positions(), vec![0]);
        assert_eq!(close.positions(), vec![0]);
    }

    #[test]
    fn to_brackets_matches_the_example_sentence() {
        let iob1 = tags("O I I O I I B O I O O O I I B I O", TagScheme::IOB1);
        let (open, close) = to_brackets(&iob1, TagScheme::IOB1).unwrap();
        assert_eq!(open.positions(), vec![1, 4, 6, 8, 12, 14]);
        assert_eq!(close.positions(), vec![2, 5, 6, 8, 13, 15]);
    }

    #[test]
    fn to_brackets_of_all_outside_is_all_false() {
        let (open, close) = to_brackets(&tags("O O O", TagScheme::IOE1), TagScheme::IOE1).unwrap();
        assert!(open.positions().is_empty());
        assert!(close.positions().is_empty());
    }

    #[test]
    fn pair_brackets_recovers_example_spans() {
        let mut open = vec![false; EXAMPLE_LEN];
        let mut close = vec![false; EXAMPLE_LEN];
        for p in [1, 4, 6, 8, 12, 14] {
            open[p] = true;
        }
        for p in [2, 5, 6, 8, 13, 15] {
            close[p] = true;
        }
        let got = pair_brackets(
            &BracketStream::new(BracketSide::Open, open),
            &BracketStream::new(BracketSide::Close, close),
        )
        .unwrap();
        assert_eq!(got, spans(&EXAMPLE_SPANS));
    }

    #[test]
    fn pair_brackets_keeps_the_shortest_phrase() {
        let mut open = vec![false; 6];
        open[1] = true;
        open[3] = true;
        let mut close = vec![false; 6];
        close[4] = true;
        let got = pair_brackets(
            &BracketStream::new(BracketSide::Open, open),
            &BracketStream::new(BracketSide::Close, close),
        )
        .unwrap();
        assert_eq!(got, spans(&[(3, 4)]));
    }

    #[test]
    fn pair_brackets_discards_unmatched_close() {
        let open = BracketStream::new(BracketSide::Open, vec![false; 3]);
        let mut marks = vec![false; 3];
        marks[2] = true;
        let close = BracketStream::new(BracketSide::Close, marks);
        assert!(pair_brackets(&open, &close).unwrap().is_empty());
    }

    #[test]
    fn pair_brackets_checks_lengths() {
        let open = BracketStream::new(BracketSide::Open, vec![false; 3]);
        let close = BracketStream::new(BracketSide::Close, vec![false; 2]);
        assert_eq!(
            pair_brackets(&open, &close).unwrap_err(),
            ReprError::StreamLengthMismatch { open: 3, close: 2 }
        );
    }

    #[test]
    fn encode_rejects_overlapping_spans() {
        let err = encode_tags(&spans(&[(0, 2), (2, 3)]), 5, TagScheme::IOB1).unwrap_err();
        assert!(matches!(err, ReprError::OverlappingSpans { .. }));
    }

    #[test]
    fn encode_rejects_out_of_range_spans() {
        let err = encode_tags(&spans(&[(1, 5)]), 4, TagScheme::IOB2).unwrap_err();
        assert!(matches!(err, ReprError::SpanOutOfRange { .. }));
    }

    #[test]
    fn adjacent_chunks_under_every_tagging_scheme() {
        let gold = spans(&[(1, 2), (3, 4)]);
        let expect = [
            (TagScheme::IOB1, "O I I B I O"),
            (TagScheme::IOB2, "O B I B I O"),
            (TagScheme::IOE1, "O I E I I O"),
            (TagScheme::IOE2, "O I E I E O"),
        ];
        for (scheme, want) in expect {
            let encoded = encode_tags(&gold, 6, scheme).unwrap();
            assert_eq!(tag_string(&encoded), want, "{scheme}");
            assert_eq!(decode_tags(&encoded, scheme).unwrap(), gold, "{scheme}");
        }
    }

    #[test]
    fn bracket_labels_round_trip() {
        for side in [BracketSide::Open, BracketSide::Close] {
            for mark in [true, false] {
                assert_eq!(side.mark_of(side.label(mark)).unwrap(), mark);
            }
        }
        assert!(BracketSide::Open.mark_of("C-CLOSE").is_err());
    }
}
