//! Scoring and rendering of experiment results.
//!
//! Reports come in two renderings: a human-readable text table (rates to
//! two decimals) and a machine-readable `key = value` listing (full
//! precision). Both are byte-deterministic for equal inputs.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::combine::OutputStream;
use crate::corpus::ChunkSpan;
use crate::eval::{
    agreement_table, chi_squared_accuracy_test, chunk_score, mcnemar_accuracy_test, token_accuracy,
    AgreementTable, ChunkScore, Significance,
};

use super::{PipelineError, RunStreams, SignificanceTest};

/// Accuracy of one representation's open and close streams.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRow {
    pub scheme: String,
    pub open_accuracy: f64,
    pub close_accuracy: f64,
}

/// The combined system compared against the best individual classifier on
/// one bracket side.
#[derive(Debug, Clone, PartialEq)]
pub struct SignificanceRow {
    pub baseline: String,
    pub statistic: f64,
    pub significance: Significance,
}

/// The scored result of a run, in the shape of the usual result tables:
/// per-representation accuracies, combined accuracies, agreement tables,
/// a significance comparison, and the final chunk scores.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub combination: String,
    pub test_tokens: usize,
    pub scheme_rows: Vec<SchemeRow>,
    pub combined_open_accuracy: f64,
    pub combined_close_accuracy: f64,
    pub agreement_open: Option<AgreementTable>,
    pub agreement_close: Option<AgreementTable>,
    pub significance_open: Option<SignificanceRow>,
    pub significance_close: Option<SignificanceRow>,
    pub chunks: ChunkScore,
}

fn correct_count(stream: &[String], gold: &[String]) -> u64 {
    stream.iter().zip(gold).filter(|(s, g)| s == g).count() as u64
}

fn significance_row(
    streams: &RunStreams,
    side_streams: &[Vec<String>],
    combined: &[String],
    gold: &[String],
    rows: &[(String, f64)],
    mode: SignificanceTest,
) -> Option<SignificanceRow> {
    // Best individual classifier for this side; ties keep scheme order.
    let (best_idx, _) = rows
        .iter()
        .enumerate()
        .max_by(|(ia, (_, a)), (ib, (_, b))| a.total_cmp(b).then(ib.cmp(ia)))?;
    let baseline = &streams.scheme_ids[best_idx];
    let best = &side_streams[best_idx];
    let total = gold.len() as u64;
    let (statistic, significance) = match mode {
        SignificanceTest::ChiSquared => chi_squared_accuracy_test(
            correct_count(combined, gold),
            total,
            correct_count(best, gold),
            total,
        )
        .ok()?,
        SignificanceTest::McNemar => {
            let mut only_combined = 0;
            let mut only_best = 0;
            for t in 0..gold.len() {
                let c = combined[t] == gold[t];
                let b = best[t] == gold[t];
                only_combined += u64::from(c && !b);
                only_best += u64::from(b && !c);
            }
            mcnemar_accuracy_test(only_combined, only_best)
        }
    };
    Some(SignificanceRow {
        baseline: baseline.clone(),
        statistic,
        significance,
    })
}

/// Scores a finished run.
pub fn build_report(
    streams: &RunStreams,
    pred_spans: &[Vec<ChunkSpan>],
    gold_spans: &[Vec<ChunkSpan>],
    significance: SignificanceTest,
) -> Result<ExperimentReport, PipelineError> {
    let mut scheme_rows = Vec::with_capacity(streams.scheme_ids.len());
    for (i, id) in streams.scheme_ids.iter().enumerate() {
        scheme_rows.push(SchemeRow {
            scheme: id.clone(),
            open_accuracy: token_accuracy(&streams.open[i], &streams.gold_open)?,
            close_accuracy: token_accuracy(&streams.close[i], &streams.gold_close)?,
        });
    }
    let combined_open_accuracy = token_accuracy(&streams.combined_open, &streams.gold_open)?;
    let combined_close_accuracy = token_accuracy(&streams.combined_close, &streams.gold_close)?;

    let as_output = |ids: &[String], side: &[Vec<String>]| -> Vec<OutputStream> {
        ids.iter()
            .zip(side)
            .map(|(id, tags)| OutputStream::new(id.clone(), tags.clone()))
            .collect()
    };
    let (agreement_open, agreement_close) = if streams.scheme_ids.len() >= 3 {
        (
            Some(agreement_table(
                &as_output(&streams.scheme_ids, &streams.open),
                &streams.gold_open,
            )?),
            Some(agreement_table(
                &as_output(&streams.scheme_ids, &streams.close),
                &streams.gold_close,
            )?),
        )
    } else {
        (None, None)
    };

    let open_rows: Vec<(String, f64)> = scheme_rows
        .iter()
        .map(|r| (r.scheme.clone(), r.open_accuracy))
        .collect();
    let close_rows: Vec<(String, f64)> = scheme_rows
        .iter()
        .map(|r| (r.scheme.clone(), r.close_accuracy))
        .collect();
    let significance_open = significance_row(
        streams,
        &streams.open,
        &streams.combined_open,
        &streams.gold_open,
        &open_rows,
        significance,
    );
    let significance_close = significance_row(
        streams,
        &streams.close,
        &streams.combined_close,
        &streams.gold_close,
        &close_rows,
        significance,
    );

    Ok(ExperimentReport {
        combination: streams.combination.clone(),
        test_tokens: streams.gold_open.len(),
        scheme_rows,
        combined_open_accuracy,
        combined_close_accuracy,
        agreement_open,
        agreement_close,
        significance_open,
        significance_close,
        chunks: chunk_score(pred_spans, gold_spans)?,
    })
}

/// Human-readable report: accuracy table, agreement tables, significance
/// lines, and the final chunk scores.
pub fn render_text(report: &ExperimentReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "Bracket accuracy ({} tokens)          O          C\n",
        report.test_tokens
    ));
    for row in &report.scheme_rows {
        out.push_str(&format!(
            "  {:<24}        {:>7.2}%   {:>7.2}%\n",
            row.scheme, row.open_accuracy, row.close_accuracy
        ));
    }
    out.push_str(&format!(
        "  {:<24}        {:>7.2}%   {:>7.2}%\n",
        format!("combined ({})", report.combination),
        report.combined_open_accuracy,
        report.combined_close_accuracy
    ));
    if let (Some(open), Some(close)) = (&report.agreement_open, &report.agreement_close) {
        out.push('\n');
        out.push_str("Agreement                             O          C\n");
        for (label, o, c) in [
            ("all correct", open.all_correct, close.all_correct),
            (
                "majority correct",
                open.majority_correct,
                close.majority_correct,
            ),
            (
                "minority correct",
                open.minority_correct,
                close.minority_correct,
            ),
            ("all wrong", open.all_wrong, close.all_wrong),
        ] {
            out.push_str(&format!("  {label:<24}        {o:>7.2}%   {c:>7.2}%\n"));
        }
    }
    if let (Some(open), Some(close)) = (&report.significance_open, &report.significance_close) {
        out.push('\n');
        out.push_str(&format!(
            "Combined vs best single   O: {} chi2={:.3} ({})   C: {} chi2={:.3} ({})\n",
            open.baseline,
            open.statistic,
            open.significance,
            close.baseline,
            close.statistic,
            close.significance
        ));
    }
    out.push('\n');
    out.push_str(&render_chunk_line(&report.chunks));
    out
}

/// The final precision/recall/F line shared by reports and `evaluate`.
pub fn render_chunk_line(score: &ChunkScore) -> String {
    format!(
        "Chunks: found {} correct {} gold {}; precision: {:.2}%; recall: {:.2}%; FB1: {:.2}\n",
        score.found_total,
        score.found_correct,
        score.gold_total,
        score.precision,
        score.recall,
        score.f_score
    )
}

/// The `evaluate` command's report: token accuracy plus the chunk line.
pub fn render_evaluation(tokens: usize, accuracy: f64, score: &ChunkScore) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "processed {} tokens; accuracy: {:.2}%\n",
        tokens, accuracy
    ));
    out.push_str(&render_chunk_line(score));
    out
}

/// Machine-readable `key = value` report with full-precision numbers.
pub fn render_keyvalue(report: &ExperimentReport) -> String {
    let mut out = String::new();
    let mut push = |key: &str, value: String| {
        out.push_str(key);
        out.push_str(" = ");
        out.push_str(&value);
        out.push('\n');
    };
    push("combination", report.combination.clone());
    push("test.tokens", report.test_tokens.to_string());
    for row in &report.scheme_rows {
        push(
            &format!("scheme.{}.accuracy.open", row.scheme),
            row.open_accuracy.to_string(),
        );
        push(
            &format!("scheme.{}.accuracy.close", row.scheme),
            row.close_accuracy.to_string(),
        );
    }
    push(
        "combined.accuracy.open",
        report.combined_open_accuracy.to_string(),
    );
    push(
        "combined.accuracy.close",
        report.combined_close_accuracy.to_string(),
    );
    for (side, table) in [
        ("open", &report.agreement_open),
        ("close", &report.agreement_close),
    ] {
        if let Some(table) = table {
            push(
                &format!("agreement.{side}.all_correct"),
                table.all_correct.to_string(),
            );
            push(
                &format!("agreement.{side}.majority_correct"),
                table.majority_correct.to_string(),
            );
            push(
                &format!("agreement.{side}.minority_correct"),
                table.minority_correct.to_string(),
            );
            push(
                &format!("agreement.{side}.all_wrong"),
                table.all_wrong.to_string(),
            );
        }
    }
    for (side, row) in [
        ("open", &report.significance_open),
        ("close", &report.significance_close),
    ] {
        if let Some(row) = row {
            push(
                &format!("significance.{side}.baseline"),
                row.baseline.clone(),
            );
            push(
                &format!("significance.{side}.statistic"),
                row.statistic.to_string(),
            );
            push(
                &format!("significance.{side}.level"),
                row.significance.to_string(),
            );
        }
    }
    push("chunks.found", report.chunks.found_total.to_string());
    push("chunks.correct", report.chunks.found_correct.to_string());
    push("chunks.gold", report.chunks.gold_total.to_string());
    push("chunks.precision", report.chunks.precision.to_string());
    push("chunks.recall", report.chunks.recall.to_string());
    push("chunks.f", report.chunks.f_score.to_string());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::score_from_counts;

    fn sample_report() -> ExperimentReport {
        ExperimentReport {
            combination: "majority".to_string(),
            test_tokens: 100,
            scheme_rows: alloc::vec![
                SchemeRow {
                    scheme: "IOB1".to_string(),
                    open_accuracy: 98.01,
                    close_accuracy: 98.14,
                },
                SchemeRow {
                    scheme: "O+C".to_string(),
                    open_accuracy: 97.92,
                    close_accuracy: 98.13,
                },
            ],
            combined_open_accuracy: 98.19,
            combined_close_accuracy: 98.30,
            agreement_open: None,
            agreement_close: None,
            significance_open: Some(SignificanceRow {
                baseline: "IOB1".to_string(),
                statistic: 12.5,
                significance: Significance::AtP001,
            }),
            significance_close: Some(SignificanceRow {
                baseline: "IOB1".to_string(),
                statistic: 2.0,
                significance: Significance::NotSignificant,
            }),
            chunks: score_from_counts(9289, 9921, 10000, 1.0),
        }
    }

    #[test]
    fn text_report_has_the_table_rows() {
        let text = render_text(&sample_report());
        assert!(text.contains("IOB1"));
        assert!(text.contains("combined (majority)"));
        assert!(text.contains("98.19%"));
        assert!(text.contains("FB1: 93.26"));
        assert!(text.contains("p<0.001"));
    }

    #[test]
    fn keyvalue_report_is_parseable() {
        let text = render_keyvalue(&sample_report());
        for line in text.lines() {
            let (key, value) = line.split_once(" = ").expect("every line is key = value");
            assert!(!key.is_empty() && !value.is_empty());
        }
        assert!(text.contains("combined.accuracy.open = 98.19\n"));
        assert!(text.contains("chunks.correct = 9289\n"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let report = sample_report();
        assert_eq!(render_text(&report), render_text(&report));
        assert_eq!(render_keyvalue(&report), render_keyvalue(&report));
    }
}
