//! Sentence/token/span data model and the column file formats.
//!
//! A corpus file carries one token per line. Fields are separated by runs of
//! ASCII spaces or tabs on input and by a single space on output; sentences
//! are separated by exactly one empty line and the file ends with a newline.
//! Three layouts exist:
//!
//! * tagging schemes — 3 columns: word, POS tag, chunk tag;
//! * the `O+C` scheme — 4 columns: word, POS tag, open tag
//!   (`O-OPEN`/`O-NONE`), close tag (`C-CLOSE`/`C-NONE`);
//! * nested annotation — 3 columns where the third is a bracket structure
//!   over the token, e.g. `((*`, `*)`, `(*)`: each `(` opens a phrase at
//!   this token, the mandatory `*` stands for the token itself, and each
//!   `)` closes the innermost open phrase here.
//!
//! Everything is byte-transparent apart from those separators, so words and
//! tags may contain any other bytes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::chunkrepr::{self, BracketSide, BracketStream, ChunkTag, ReprError, TagScheme};

/// The chunk label used throughout; the label field on [`ChunkSpan`] exists
/// for forward compatibility.
pub const NP_LABEL: &str = "NP";

/// A surface form plus its part-of-speech tag.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub word: String,
    pub pos: String,
}

impl Token {
    pub fn new(word: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            word: word.into(),
            pos: pos.into(),
        }
    }
}

/// One phrase, as an inclusive token-index interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChunkSpan {
    pub begin: usize,
    pub end: usize,
    pub label: String,
}

impl ChunkSpan {
    pub fn new(begin: usize, end: usize, label: impl Into<String>) -> Self {
        ChunkSpan {
            begin,
            end,
            label: label.into(),
        }
    }

    /// A noun-phrase span.
    pub fn np(begin: usize, end: usize) -> Self {
        ChunkSpan::new(begin, end, NP_LABEL)
    }

    pub fn len(&self) -> usize {
        self.end - self.begin + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether this span strictly contains `other` (contains it and differs
    /// in extent).
    pub fn strictly_contains(&self, other: &ChunkSpan) -> bool {
        self.begin <= other.begin
            && other.end <= self.end
            && (self.begin, self.end) != (other.begin, other.end)
    }
}

/// A tokenized sentence with its (possibly empty) span annotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub spans: Vec<ChunkSpan>,
}

impl Sentence {
    /// Builds a sentence, checking that span indices reference valid token
    /// positions. Spans are stored sorted by begin, then end.
    pub fn new(tokens: Vec<Token>, mut spans: Vec<ChunkSpan>) -> Result<Self, CorpusError> {
        for span in &spans {
            if span.begin > span.end || span.end >= tokens.len() {
                return Err(CorpusError::SpanOutOfRange {
                    begin: span.begin,
                    end: span.end,
                    len: tokens.len(),
                });
            }
        }
        spans.sort();
        Ok(Sentence { tokens, spans })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// An ordered list of sentences. Order is preserved exactly as read; fold
/// splitting depends on it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub sentences: Vec<Sentence>,
}

impl Dataset {
    pub fn new(sentences: Vec<Sentence>) -> Self {
        Dataset { sentences }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(|s| s.len()).sum()
    }

    /// Gold spans per sentence, cloned out for evaluation.
    pub fn gold_spans(&self) -> Vec<Vec<ChunkSpan>> {
        self.sentences.iter().map(|s| s.spans.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CorpusError {
    /// A token line with the wrong number of fields.
    FieldCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    /// A chunk tag outside the declared scheme's alphabet.
    UnknownTag { line: usize, tag: String },
    /// A malformed bracket-structure field in nested annotation.
    BadStructure { line: usize, reason: String },
    /// A span that does not fit its sentence.
    SpanOutOfRange {
        begin: usize,
        end: usize,
        len: usize,
    },
    /// More folds requested than sentences available, or fewer than two.
    BadFoldCount { folds: usize, sentences: usize },
    /// Spans that cannot be written under the requested format.
    Repr(ReprError),
}

impl From<ReprError> for CorpusError {
    fn from(e: ReprError) -> Self {
        CorpusError::Repr(e)
    }
}

impl core::fmt::Display for CorpusError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CorpusError::FieldCount {
                line,
                expected,
                found,
            } => write!(f, "line {line}: expected {expected} fields, found {found}"),
            CorpusError::UnknownTag { line, tag } => {
                write!(f, "line {line}: unknown chunk tag {tag:?}")
            }
            CorpusError::BadStructure { line, reason } => {
                write!(f, "line {line}: bad bracket structure: {reason}")
            }
            CorpusError::SpanOutOfRange { begin, end, len } => write!(
                f,
                "span {begin}..={end} does not fit a sentence of {len} tokens"
            ),
            CorpusError::BadFoldCount { folds, sentences } => {
                write!(f, "cannot split {sentences} sentences into {folds} folds")
            }
            CorpusError::Repr(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CorpusError {}

fn fields(line: &str) -> Vec<&str> {
    line.split([' ', '\t']).filter(|f| !f.is_empty()).collect()
}

/// Parses a corpus in column format under the given scheme.
///
/// Trailing blank lines are ignored and a final sentence without a trailing
/// blank line is accepted. The chunk-tag column(s) are decoded into spans,
/// repairing inconsistent sequences.
pub fn parse_column_file(text: &str, scheme: TagScheme) -> Result<Dataset, CorpusError> {
    let expected = if scheme.is_tagging() { 3 } else { 4 };
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut tags: Vec<ChunkTag> = Vec::new();
    let mut opens: Vec<bool> = Vec::new();
    let mut closes: Vec<bool> = Vec::new();

    let flush = |tokens: &mut Vec<Token>,
                 tags: &mut Vec<ChunkTag>,
                 opens: &mut Vec<bool>,
                 closes: &mut Vec<bool>,
                 sentences: &mut Vec<Sentence>|
     -> Result<(), CorpusError> {
        if tokens.is_empty() {
            return Ok(());
        }
        let spans = if scheme.is_tagging() {
            chunkrepr::decode_tags(tags, scheme)?
        } else {
            chunkrepr::pair_brackets(
                &BracketStream::new(BracketSide::Open, core::mem::take(opens)),
                &BracketStream::new(BracketSide::Close, core::mem::take(closes)),
            )?
        };
        tags.clear();
        opens.clear();
        closes.clear();
        sentences.push(Sentence::new(core::mem::take(tokens), spans)?);
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            flush(
                &mut tokens,
                &mut tags,
                &mut opens,
                &mut closes,
                &mut sentences,
            )?;
            continue;
        }
        let fields = fields(line);
        if fields.len() != expected {
            return Err(CorpusError::FieldCount {
                line: lineno,
                expected,
                found: fields.len(),
            });
        }
        tokens.push(Token::new(fields[0], fields[1]));
        if scheme.is_tagging() {
            let tag = ChunkTag::parse(fields[2], scheme).map_err(|_| CorpusError::UnknownTag {
                line: lineno,
                tag: fields[2].to_string(),
            })?;
            tags.push(tag);
        } else {
            let open =
                BracketSide::Open
                    .mark_of(fields[2])
                    .map_err(|_| CorpusError::UnknownTag {
                        line: lineno,
                        tag: fields[2].to_string(),
                    })?;
            let close =
                BracketSide::Close
                    .mark_of(fields[3])
                    .map_err(|_| CorpusError::UnknownTag {
                        line: lineno,
                        tag: fields[3].to_string(),
                    })?;
            opens.push(open);
            closes.push(close);
        }
    }
    flush(
        &mut tokens,
        &mut tags,
        &mut opens,
        &mut closes,
        &mut sentences,
    )?;
    Ok(Dataset::new(sentences))
}

/// Writes a corpus in column format under the given scheme.
///
/// Inverse of [`parse_column_file`] for any well-formed dataset: every
/// sentence is followed by one empty line, so the file ends with a newline.
pub fn write_column_file(data: &Dataset, scheme: TagScheme) -> Result<String, CorpusError> {
    let mut out = String::new();
    for sentence in &data.sentences {
        match chunkrepr::encode(&sentence.spans, sentence.len(), scheme)? {
            chunkrepr::SchemeEncoding::Tags(tags) => {
                for (token, tag) in sentence.tokens.iter().zip(&tags) {
                    out.push_str(&format!("{} {} {}\n", token.word, token.pos, tag));
                }
            }
            chunkrepr::SchemeEncoding::Brackets { open, close } => {
                for (t, token) in sentence.tokens.iter().enumerate() {
                    out.push_str(&format!(
                        "{} {} {} {}\n",
                        token.word,
                        token.pos,
                        BracketSide::Open.label(open.marks[t]),
                        BracketSide::Close.label(close.marks[t]),
                    ));
                }
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses nested annotation: 3 columns with a bracket-structure field.
///
/// Identical spans (a phrase coinciding exactly with an inner phrase) are
/// collapsed into one.
pub fn parse_nested_file(text: &str) -> Result<Dataset, CorpusError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    let mut spans: Vec<ChunkSpan> = Vec::new();
    // (open position, line that opened it)
    let mut stack: Vec<(usize, usize)> = Vec::new();

    let flush = |tokens: &mut Vec<Token>,
                 spans: &mut Vec<ChunkSpan>,
                 stack: &mut Vec<(usize, usize)>,
                 sentences: &mut Vec<Sentence>|
     -> Result<(), CorpusError> {
        if let Some(&(_, line)) = stack.first() {
            return Err(CorpusError::BadStructure {
                line,
                reason: "phrase opened here is never closed".to_string(),
            });
        }
        if tokens.is_empty() {
            return Ok(());
        }
        spans.sort();
        spans.dedup();
        sentences.push(Sentence::new(
            core::mem::take(tokens),
            core::mem::take(spans),
        )?);
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.is_empty() {
            flush(&mut tokens, &mut spans, &mut stack, &mut sentences)?;
            continue;
        }
        let fields = fields(line);
        if fields.len() != 3 {
            return Err(CorpusError::FieldCount {
                line: lineno,
                expected: 3,
                found: fields.len(),
            });
        }
        let t = tokens.len();
        let mut saw_token = false;
        for ch in fields[2].chars() {
            match ch {
                '(' if !saw_token => stack.push((t, lineno)),
                '*' if !saw_token => saw_token = true,
                ')' if saw_token => {
                    let (begin, _) = stack.pop().ok_or_else(|| CorpusError::BadStructure {
                        line: lineno,
                        reason: "close bracket without a matching open".to_string(),
                    })?;
                    spans.push(ChunkSpan::np(begin, t));
                }
                _ => {
                    return Err(CorpusError::BadStructure {
                        line: lineno,
                        reason: format!("unexpected {ch:?} in {:?}", fields[2]),
                    })
                }
            }
        }
        if !saw_token {
            return Err(CorpusError::BadStructure {
                line: lineno,
                reason: format!("missing `*` in {:?}", fields[2]),
            });
        }
        tokens.push(Token::new(fields[0], fields[1]));
    }
    flush(&mut tokens, &mut spans, &mut stack, &mut sentences)?;
    Ok(Dataset::new(sentences))
}

/// Writes nested annotation. Spans must be properly nested (pairwise nested
/// or disjoint); crossing spans are rejected.
pub fn write_nested_file(data: &Dataset) -> Result<String, CorpusError> {
    let mut out = String::new();
    for sentence in &data.sentences {
        let mut spans = sentence.spans.clone();
        spans.sort();
        spans.dedup();
        // Stack of currently open spans; a span reaching past the innermost
        // open one crosses it. Containing spans must be visited before
        // their contents, so this pass orders equal begins by end
        // descending.
        let mut by_extent = spans.clone();
        by_extent.sort_by(|a, b| a.begin.cmp(&b.begin).then(b.end.cmp(&a.end)));
        let mut open_spans: Vec<(usize, usize)> = Vec::new();
        for span in &by_extent {
            if span.begin > span.end || span.end >= sentence.len() {
                return Err(CorpusError::SpanOutOfRange {
                    begin: span.begin,
                    end: span.end,
                    len: sentence.len(),
                });
            }
            while open_spans.last().is_some_and(|&(_, end)| end < span.begin) {
                open_spans.pop();
            }
            if let Some(&inner) = open_spans.last() {
                if span.end > inner.1 {
                    return Err(CorpusError::Repr(ReprError::OverlappingSpans {
                        first: inner,
                        second: (span.begin, span.end),
                    }));
                }
            }
            open_spans.push((span.begin, span.end));
        }
        for (t, token) in sentence.tokens.iter().enumerate() {
            let mut field = String::new();
            for span in &spans {
                if span.begin == t {
                    field.push('(');
                }
            }
            field.push('*');
            for span in &spans {
                if span.end == t {
                    field.push(')');
                }
            }
            out.push_str(&format!("{} {} {field}\n", token.word, token.pos));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Splits a dataset into `k` consecutive blocks of near-equal size and
/// returns, for each block, the pair (train = everything else in original
/// order, test = the block).
///
/// When the sentence count is not divisible by `k`, the first `n mod k`
/// blocks each carry one extra sentence.
pub fn split_folds(data: &Dataset, k: usize) -> Result<Vec<(Dataset, Dataset)>, CorpusError> {
    let n = data.len();
    if k < 2 || k > n {
        return Err(CorpusError::BadFoldCount {
            folds: k,
            sentences: n,
        });
    }
    let base = n / k;
    let extra = n % k;
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        let end = start + size;
        let test = Dataset::new(data.sentences[start..end].to_vec());
        let mut train = Vec::with_capacity(n - size);
        train.extend_from_slice(&data.sentences[..start]);
        train.extend_from_slice(&data.sentences[end..]);
        folds.push((Dataset::new(train), test));
        start = end;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn parses_a_single_token_chunk() {
        let data = parse_column_file("gold NN I\n\n", TagScheme::IOB1).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.sentences[0].tokens, vec![Token::new("gold", "NN")]);
        assert_eq!(data.sentences[0].spans, vec![ChunkSpan::np(0, 0)]);
    }

    #[test]
    fn parses_the_example_sentence() {
        let words = [
            ("In", "IN", "O"),
            ("early", "JJ", "I"),
            ("trading", "NN", "I"),
            ("in", "IN", "O"),
            ("Hong", "NNP", "I"),
            ("Kong", "NNP", "I"),
            ("Monday", "NNP", "B"),
            (",", ",", "O"),
            ("gold", "NN", "I"),
            ("was", "VBD", "O"),
            ("quoted", "VBN", "O"),
            ("at", "IN", "O"),
            ("$", "$", "I"),
            ("366.50", "CD", "I"),
            ("an", "DT", "B"),
            ("ounce", "NN", "I"),
            (".", ".", "O"),
        ];
        let text: String = words
            .iter()
            .map(|(w, p, t)| format!("{w} {p} {t}\n"))
            .collect();
        let data = parse_column_file(&text, TagScheme::IOB1).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.sentences[0].len(), 17);
        let expected: Vec<ChunkSpan> = [(1, 2), (4, 5), (6, 6), (8, 8), (12, 13), (14, 15)]
            .iter()
            .map(|&(b, e)| ChunkSpan::np(b, e))
            .collect();
        assert_eq!(data.sentences[0].spans, expected);
    }

    #[test]
    fn reports_bad_field_count_with_line_number() {
        let err = parse_column_file("gold NN\n", TagScheme::IOB1).unwrap_err();
        assert_eq!(
            err,
            CorpusError::FieldCount {
                line: 1,
                expected: 3,
                found: 2
            }
        );
    }

    #[test]
    fn reports_unknown_tag_with_line_number() {
        let err = parse_column_file("a DT O\nb NN X\n", TagScheme::IOB1).unwrap_err();
        assert_eq!(
            err,
            CorpusError::UnknownTag {
                line: 2,
                tag: "X".to_string()
            }
        );
    }

    #[test]
    fn e_tag_is_unknown_under_iob_schemes() {
        let err = parse_column_file("a DT E\n", TagScheme::IOB2).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownTag { line: 1, .. }));
    }

    #[test]
    fn writes_empty_dataset_as_empty_string() {
        assert_eq!(
            write_column_file(&Dataset::default(), TagScheme::IOB1).unwrap(),
            ""
        );
    }

    #[test]
    fn writes_single_chunk_under_iob2() {
        let sentence =
            Sentence::new(vec![Token::new("gold", "NN")], vec![ChunkSpan::np(0, 0)]).unwrap();
        let text = write_column_file(&Dataset::new(vec![sentence]), TagScheme::IOB2).unwrap();
        assert_eq!(text, "gold NN B\n\n");
    }

    #[test]
    fn oc_files_carry_four_columns() {
        let sentence = Sentence::new(
            vec![Token::new("gold", "NN"), Token::new("fell", "VBD")],
            vec![ChunkSpan::np(0, 0)],
        )
        .unwrap();
        let data = Dataset::new(vec![sentence]);
        let text = write_column_file(&data, TagScheme::OC).unwrap();
        assert_eq!(text, "gold NN O-OPEN C-CLOSE\nfell VBD O-NONE C-NONE\n\n");
        assert_eq!(parse_column_file(&text, TagScheme::OC).unwrap(), data);
    }

    #[test]
    fn accepts_missing_trailing_blank_line_and_tab_separators() {
        let data = parse_column_file("a\tDT\tO\nb  NN  I", TagScheme::IOB1).unwrap();
        assert_eq!(data.len(), 1);
        assert_eq!(data.sentences[0].spans, vec![ChunkSpan::np(1, 1)]);
    }

    #[test]
    fn nested_format_round_trips() {
        let sentence = Sentence::new(
            vec![
                Token::new("the", "DT"),
                Token::new("price", "NN"),
                Token::new("of", "IN"),
                Token::new("gold", "NN"),
            ],
            vec![
                ChunkSpan::np(0, 3),
                ChunkSpan::np(0, 1),
                ChunkSpan::np(3, 3),
            ],
        )
        .unwrap();
        let data = Dataset::new(vec![sentence]);
        let text = write_nested_file(&data).unwrap();
        assert_eq!(text, "the DT ((*\nprice NN *)\nof IN *\ngold NN (*))\n\n");
        assert_eq!(parse_nested_file(&text).unwrap(), data);
    }

    #[test]
    fn nested_parse_rejects_unbalanced_brackets() {
        let err = parse_nested_file("a DT (*\nb NN *\n\n").unwrap_err();
        assert_eq!(
            err,
            CorpusError::BadStructure {
                line: 1,
                reason: "phrase opened here is never closed".to_string()
            }
        );
        let err = parse_nested_file("a DT *)\n\n").unwrap_err();
        assert!(matches!(err, CorpusError::BadStructure { line: 1, .. }));
    }

    #[test]
    fn nested_parse_requires_the_token_marker() {
        let err = parse_nested_file("a DT ()\n\n").unwrap_err();
        assert!(matches!(err, CorpusError::BadStructure { line: 1, .. }));
    }

    fn dataset_of(n: usize) -> Dataset {
        let sentences = (0..n)
            .map(|i| Sentence::new(vec![Token::new(format!("w{i}"), "NN")], vec![]).unwrap())
            .collect();
        Dataset::new(sentences)
    }

    #[test]
    fn ten_folds_of_ten_sentences_test_one_each() {
        let folds = split_folds(&dataset_of(10), 10).unwrap();
        assert_eq!(folds.len(), 10);
        for (train, test) in &folds {
            assert_eq!(test.len(), 1);
            assert_eq!(train.len(), 9);
        }
    }

    #[test]
    fn remainder_goes_to_the_first_blocks() {
        let folds = split_folds(&dataset_of(23), 10).unwrap();
        let sizes: Vec<usize> = folds.iter().map(|(_, test)| test.len()).collect();
        assert_eq!(sizes, vec![3, 3, 3, 2, 2, 2, 2, 2, 2, 2]);
        assert_eq!(sizes.iter().sum::<usize>(), 23);
    }

    #[test]
    fn folds_partition_the_dataset_in_order() {
        let data = dataset_of(23);
        let folds = split_folds(&data, 10).unwrap();
        let mut rebuilt = Vec::new();
        for (_, test) in &folds {
            rebuilt.extend_from_slice(&test.sentences);
        }
        assert_eq!(rebuilt, data.sentences);
        for (i, (train, test)) in folds.iter().enumerate() {
            let mut expect = Vec::new();
            for (j, (_, other)) in folds.iter().enumerate() {
                if j != i {
                    expect.extend_from_slice(&other.sentences);
                }
            }
            assert_eq!(train.sentences, expect);
            assert_eq!(train.len() + test.len(), data.len());
        }
    }

    #[test]
    fn too_many_folds_is_an_error() {
        assert_eq!(
            split_folds(&dataset_of(5), 6).unwrap_err(),
            CorpusError::BadFoldCount {
                folds: 6,
                sentences: 5
            }
        );
        assert!(split_folds(&dataset_of(5), 1).is_err());
    }
}
