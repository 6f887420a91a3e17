//! Evaluation: token accuracy, exact-match chunk scores, classifier
//! agreement tables, and significance tests.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::combine::OutputStream;
use crate::corpus::ChunkSpan;

/// Chunk precision, recall and F-score, all as percentages, with the raw
/// counts they came from.
///
/// Precision is 0 when nothing was predicted and recall is 0 when the gold
/// standard has no chunks; F is 0 when precision and recall are both 0.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkScore {
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub beta: f64,
    pub found_correct: u64,
    pub found_total: u64,
    pub gold_total: u64,
}

/// Token-level agreement between several classifiers, as percentages of
/// tokens. The four cells sum to 100.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementTable {
    pub all_correct: f64,
    pub majority_correct: f64,
    pub minority_correct: f64,
    pub all_wrong: f64,
}

/// Significance levels for a chi-squared statistic with one degree of
/// freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Significance {
    AtP001,
    AtP01,
    AtP05,
    NotSignificant,
}

impl Significance {
    /// Fixed critical values for one degree of freedom.
    pub fn of_statistic(statistic: f64) -> Significance {
        if statistic >= 10.828 {
            Significance::AtP001
        } else if statistic >= 6.635 {
            Significance::AtP01
        } else if statistic >= 3.841 {
            Significance::AtP05
        } else {
            Significance::NotSignificant
        }
    }
}

impl core::fmt::Display for Significance {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Significance::AtP001 => "p<0.001",
            Significance::AtP01 => "p<0.01",
            Significance::AtP05 => "p<0.05",
            Significance::NotSignificant => "not significant",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    /// Two sequences that must align have different lengths.
    LengthMismatch { left: usize, right: usize },
    /// An empty input where a rate is undefined.
    EmptyInput,
    /// Fewer streams than an agreement table needs.
    TooFewStreams { found: usize },
    /// Correct counts exceeding their totals, or zero totals.
    BadCounts,
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::LengthMismatch { left, right } => {
                write!(
                    f,
                    "sequences of {left} and {right} tokens cannot be compared"
                )
            }
            EvalError::EmptyInput => f.write_str("empty input"),
            EvalError::TooFewStreams { found } => {
                write!(f, "agreement table needs at least 3 streams, found {found}")
            }
            EvalError::BadCounts => {
                f.write_str("correct counts must not exceed totals, totals must be positive")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

/// Percentage of tokens classified correctly.
pub fn token_accuracy(pred: &[String], gold: &[String]) -> Result<f64, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    if pred.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let matches = pred.iter().zip(gold).filter(|(p, g)| p == g).count();
    Ok(100.0 * matches as f64 / pred.len() as f64)
}

/// Exact-match chunk score with the default beta of 1.
///
/// `pred` and `gold` hold one span set per sentence; a predicted chunk is
/// correct only when begin, end and label all match a gold chunk of the
/// same sentence.
pub fn chunk_score(
    pred: &[Vec<ChunkSpan>],
    gold: &[Vec<ChunkSpan>],
) -> Result<ChunkScore, EvalError> {
    chunk_score_beta(pred, gold, 1.0)
}

/// Exact-match chunk score with `F_beta = (1 + b^2) * p * r / (b^2 * p + r)`.
pub fn chunk_score_beta(
    pred: &[Vec<ChunkSpan>],
    gold: &[Vec<ChunkSpan>],
    beta: f64,
) -> Result<ChunkScore, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            left: pred.len(),
            right: gold.len(),
        });
    }
    let mut found_correct = 0u64;
    let mut found_total = 0u64;
    let mut gold_total = 0u64;
    for (p, g) in pred.iter().zip(gold) {
        let gold_set: BTreeSet<&ChunkSpan> = g.iter().collect();
        let pred_set: BTreeSet<&ChunkSpan> = p.iter().collect();
        found_total += pred_set.len() as u64;
        gold_total += gold_set.len() as u64;
        found_correct += pred_set.intersection(&gold_set).count() as u64;
    }
    Ok(score_from_counts(
        found_correct,
        found_total,
        gold_total,
        beta,
    ))
}

/// Assembles a [`ChunkScore`] from raw counts.
pub fn score_from_counts(
    found_correct: u64,
    found_total: u64,
    gold_total: u64,
    beta: f64,
) -> ChunkScore {
    let precision = if found_total > 0 {
        100.0 * found_correct as f64 / found_total as f64
    } else {
        0.0
    };
    let recall = if gold_total > 0 {
        100.0 * found_correct as f64 / gold_total as f64
    } else {
        0.0
    };
    let b2 = beta * beta;
    let f_score = if precision + recall > 0.0 {
        (1.0 + b2) * precision * recall / (b2 * precision + recall)
    } else {
        0.0
    };
    ChunkScore {
        precision,
        recall,
        f_score,
        beta,
        found_correct,
        found_total,
        gold_total,
    }
}

/// Per-token agreement of at least three aligned streams against the gold
/// standard: every stream right, a majority (but not all) right, a minority
/// (but not none) right, or none right.
pub fn agreement_table(
    streams: &[OutputStream],
    gold: &[String],
) -> Result<AgreementTable, EvalError> {
    if streams.len() < 3 {
        return Err(EvalError::TooFewStreams {
            found: streams.len(),
        });
    }
    for stream in streams {
        if stream.len() != gold.len() {
            return Err(EvalError::LengthMismatch {
                left: stream.len(),
                right: gold.len(),
            });
        }
    }
    if gold.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let total = gold.len() as f64;
    let n_streams = streams.len();
    let mut cells = [0u64; 4];
    for (t, want) in gold.iter().enumerate() {
        let right = streams.iter().filter(|s| &s.tags[t] == want).count();
        let cell = if right == n_streams {
            0
        } else if 2 * right > n_streams {
            1
        } else if right > 0 {
            2
        } else {
            3
        };
        cells[cell] += 1;
    }
    Ok(AgreementTable {
        all_correct: 100.0 * cells[0] as f64 / total,
        majority_correct: 100.0 * cells[1] as f64 / total,
        minority_correct: 100.0 * cells[2] as f64 / total,
        all_wrong: 100.0 * cells[3] as f64 / total,
    })
}

/// Chi-squared test (one degree of freedom, no continuity correction) for
/// the difference between two accuracy proportions.
///
/// The 2x2 contingency table is (correct, incorrect) x (system A, system
/// B). When any margin is zero the statistic is 0.
pub fn chi_squared_accuracy_test(
    a_correct: u64,
    a_total: u64,
    b_correct: u64,
    b_total: u64,
) -> Result<(f64, Significance), EvalError> {
    if a_total == 0 || b_total == 0 || a_correct > a_total || b_correct > b_total {
        return Err(EvalError::BadCounts);
    }
    let a = a_correct as f64;
    let b = (a_total - a_correct) as f64;
    let c = b_correct as f64;
    let d = (b_total - b_correct) as f64;
    let n = a + b + c + d;
    let denominator = (a + b) * (c + d) * (a + c) * (b + d);
    let statistic = if denominator == 0.0 {
        0.0
    } else {
        let cross = a * d - b * c;
        n * cross * cross / denominator
    };
    Ok((statistic, Significance::of_statistic(statistic)))
}

/// McNemar's paired test over discordant token counts: `only_a` tokens that
/// only system A got right, `only_b` that only system B got right. Same
/// critical values as the unpaired test. Off by default in reports; offered
/// for paired comparisons.
pub fn mcnemar_accuracy_test(only_a: u64, only_b: u64) -> (f64, Significance) {
    let b = only_a as f64;
    let c = only_b as f64;
    let statistic = if b + c == 0.0 {
        0.0
    } else {
        (b - c) * (b - c) / (b + c)
    };
    (statistic, Significance::of_statistic(statistic))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn tags(list: &[&str]) -> Vec<String> {
        list.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn identical_sequences_score_hundred() {
        let gold = tags(&["A", "B"]);
        assert_eq!(token_accuracy(&gold, &gold).unwrap(), 100.0);
    }

    #[test]
    fn accuracy_counts_matches() {
        let pred = tags(&["A", "B", "B", "B"]);
        let gold = tags(&["A", "B", "A", "B"]);
        assert_eq!(token_accuracy(&pred, &gold).unwrap(), 75.0);
    }

    #[test]
    fn empty_accuracy_is_an_error() {
        assert_eq!(token_accuracy(&[], &[]).unwrap_err(), EvalError::EmptyInput);
        assert!(matches!(
            token_accuracy(&tags(&["A"]), &[]).unwrap_err(),
            EvalError::LengthMismatch { .. }
        ));
    }

    #[test]
    fn headline_f_score_from_counts() {
        // Rates built from counts chosen to land on precision 93.63 and
        // recall 92.89.
        let score = score_from_counts(9289, 9921, 10000, 1.0);
        assert!((score.precision - 93.63).abs() < 0.005);
        assert!((score.recall - 92.89).abs() < 0.005);
        assert!((score.f_score - 93.26).abs() < 0.01);
    }

    #[test]
    fn perfect_prediction_scores_hundred() {
        let gold = vec![vec![
            ChunkSpan::np(1, 2),
            ChunkSpan::np(4, 5),
            ChunkSpan::np(6, 6),
            ChunkSpan::np(8, 8),
            ChunkSpan::np(12, 13),
            ChunkSpan::np(14, 15),
        ]];
        let score = chunk_score(&gold, &gold).unwrap();
        assert_eq!(score.precision, 100.0);
        assert_eq!(score.recall, 100.0);
        assert_eq!(score.f_score, 100.0);
        assert_eq!(score.found_correct, 6);
    }

    #[test]
    fn empty_prediction_scores_zero_by_convention() {
        let gold = vec![vec![ChunkSpan::np(0, 1)]];
        let pred = vec![vec![]];
        let score = chunk_score(&pred, &gold).unwrap();
        assert_eq!(score.precision, 0.0);
        assert_eq!(score.recall, 0.0);
        assert_eq!(score.f_score, 0.0);
    }

    #[test]
    fn chunk_score_is_exact_match() {
        let gold = vec![vec![ChunkSpan::np(0, 2)]];
        let pred = vec![vec![ChunkSpan::np(0, 1)]];
        let score = chunk_score(&pred, &gold).unwrap();
        assert_eq!(score.found_correct, 0);
    }

    #[test]
    fn chunk_score_ignores_sentence_order() {
        let a = vec![ChunkSpan::np(0, 1)];
        let b = vec![ChunkSpan::np(2, 3), ChunkSpan::np(5, 5)];
        let pred_one = vec![a.clone(), b.clone()];
        let pred_two = vec![b, a];
        let gold_one = pred_one.clone();
        let gold_two = pred_two.clone();
        assert_eq!(
            chunk_score(&pred_one, &gold_one).unwrap(),
            chunk_score(&pred_two, &gold_two).unwrap()
        );
    }

    #[test]
    fn f_is_symmetric_and_bounded() {
        let ab = score_from_counts(80, 100, 90, 1.0);
        let ba = score_from_counts(80, 90, 100, 1.0);
        assert!((ab.f_score - ba.f_score).abs() < 1e-12);
        assert!(ab.f_score <= ab.precision.max(ab.recall) + 1e-12);
        let equal = score_from_counts(80, 100, 100, 1.0);
        assert!((equal.f_score - equal.precision).abs() < 1e-12);
    }

    fn streams(rows: &[&[&str]]) -> Vec<OutputStream> {
        rows.iter()
            .enumerate()
            .map(|(i, row)| OutputStream::new(alloc::format!("s{i}"), tags(row)))
            .collect()
    }

    #[test]
    fn all_streams_correct_fills_the_first_cell() {
        let gold = tags(&["A", "B"]);
        let table =
            agreement_table(&streams(&[&["A", "B"], &["A", "B"], &["A", "B"]]), &gold).unwrap();
        assert_eq!(table.all_correct, 100.0);
        assert_eq!(table.all_wrong, 0.0);
    }

    #[test]
    fn three_of_five_right_is_majority_correct() {
        let gold = tags(&["A"]);
        let table =
            agreement_table(&streams(&[&["A"], &["A"], &["A"], &["B"], &["B"]]), &gold).unwrap();
        assert_eq!(table.majority_correct, 100.0);
    }

    #[test]
    fn one_token_per_cell_splits_evenly() {
        let gold = tags(&["A", "A", "A", "A"]);
        let rows: Vec<Vec<&str>> = vec![
            vec!["A", "A", "B", "B"],
            vec!["A", "A", "B", "B"],
            vec!["A", "A", "A", "B"],
            vec!["A", "B", "B", "B"],
            vec!["A", "B", "B", "B"],
        ];
        let row_refs: Vec<&[&str]> = rows.iter().map(|r| r.as_slice()).collect();
        let table = agreement_table(&streams(&row_refs), &gold).unwrap();
        assert_eq!(
            (
                table.all_correct,
                table.majority_correct,
                table.minority_correct,
                table.all_wrong
            ),
            (25.0, 25.0, 25.0, 25.0)
        );
    }

    #[test]
    fn agreement_cells_sum_to_hundred() {
        let gold = tags(&["A", "B", "A", "B", "A", "B", "A"]);
        let table = agreement_table(
            &streams(&[
                &["A", "B", "B", "B", "A", "A", "A"],
                &["A", "A", "A", "B", "B", "B", "A"],
                &["B", "B", "A", "A", "A", "B", "A"],
            ]),
            &gold,
        )
        .unwrap();
        let total =
            table.all_correct + table.majority_correct + table.minority_correct + table.all_wrong;
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn agreement_needs_three_streams() {
        let gold = tags(&["A"]);
        assert_eq!(
            agreement_table(&streams(&[&["A"], &["A"]]), &gold).unwrap_err(),
            EvalError::TooFewStreams { found: 2 }
        );
    }

    #[test]
    fn equal_proportions_give_zero_statistic() {
        let (statistic, significance) = chi_squared_accuracy_test(90, 100, 900, 1000).unwrap();
        assert_eq!(statistic, 0.0);
        assert_eq!(significance, Significance::NotSignificant);
    }

    #[test]
    fn chi_squared_matches_the_expected_count_form() {
        // Oracle: sum over cells of (observed - expected)^2 / expected.
        let cases = [
            (9800u64, 10000u64, 9700u64, 10000u64),
            (80, 100, 60, 100),
            (45, 50, 30, 60),
        ];
        for (ac, at, bc, bt) in cases {
            let (statistic, _) = chi_squared_accuracy_test(ac, at, bc, bt).unwrap();
            let table = [[ac as f64, (at - ac) as f64], [bc as f64, (bt - bc) as f64]];
            let n = (at + bt) as f64;
            let col = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
            let row = [at as f64, bt as f64];
            let mut oracle = 0.0;
            for (r, row_total) in row.iter().enumerate() {
                for (c, col_total) in col.iter().enumerate() {
                    let expected = row_total * col_total / n;
                    let diff = table[r][c] - expected;
                    oracle += diff * diff / expected;
                }
            }
            assert!((statistic - oracle).abs() < 1e-9, "{ac}/{at} vs {bc}/{bt}");
        }
    }

    #[test]
    fn clearly_different_proportions_are_significant() {
        let (statistic, significance) =
            chi_squared_accuracy_test(9800, 10000, 9700, 10000).unwrap();
        assert!(statistic > 10.828);
        assert_eq!(significance, Significance::AtP001);
    }

    #[test]
    fn chi_squared_is_symmetric_in_system_order() {
        let (ab, _) = chi_squared_accuracy_test(9800, 10000, 9700, 10000).unwrap();
        let (ba, _) = chi_squared_accuracy_test(9700, 10000, 9800, 10000).unwrap();
        assert!((ab - ba).abs() < 1e-12);
    }

    #[test]
    fn bad_counts_are_rejected() {
        assert_eq!(
            chi_squared_accuracy_test(11, 10, 5, 10).unwrap_err(),
            EvalError::BadCounts
        );
        assert_eq!(
            chi_squared_accuracy_test(1, 0, 5, 10).unwrap_err(),
            EvalError::BadCounts
        );
    }

    #[test]
    fn mcnemar_on_balanced_disagreements_is_zero() {
        let (statistic, significance) = mcnemar_accuracy_test(7, 7);
        assert_eq!(statistic, 0.0);
        assert_eq!(significance, Significance::NotSignificant);
        let (statistic, _) = mcnemar_accuracy_test(0, 0);
        assert_eq!(statistic, 0.0);
    }

    #[test]
    fn mcnemar_detects_one_sided_disagreement() {
        let (statistic, significance) = mcnemar_accuracy_test(50, 10);
        assert!((statistic - 1600.0 / 60.0).abs() < 1e-9);
        assert_eq!(significance, Significance::AtP001);
    }
}
