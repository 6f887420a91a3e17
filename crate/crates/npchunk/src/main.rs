//! Command-line entry point.
//!
//! Exit codes: 0 on success, 1 on usage errors (message on stderr), 2 on
//! data or model errors.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use npchunk::config::parse_significance;
use npchunk::{config, io, parallel, Error};
use npchunk_core::chunkrepr::TagScheme;
use npchunk_core::corpus::{split_folds, Dataset, Sentence};
use npchunk_core::eval::{chunk_score, token_accuracy};
use npchunk_core::pipeline::report::{
    render_chunk_line, render_evaluation, render_keyvalue, render_text,
};
use npchunk_core::pipeline::{
    aggregate_folds, combine_and_score, run_cascade, scheme_streams, BasenpOutcome, Combination,
    ExperimentConfig, PipelineError, SchemeChunker, SchemeStreams,
};

fn scheme_value(value: &str) -> Result<TagScheme, String> {
    TagScheme::parse(value)
        .ok_or_else(|| format!("unknown scheme {value:?} (IOB1, IOB2, IOE1, IOE2, O+C)"))
}

fn method_value(value: &str) -> Result<Combination, String> {
    Combination::parse(value).ok_or_else(|| {
        format!(
            "unknown combination method {value:?} (majority, totprecision, tagprecision, \
             precision-recall, tagpair, stack-memory-tags, stack-memory-tags-pos, \
             stack-tree-tags, stack-tree-tags-pos)"
        )
    })
}

#[derive(Parser)]
#[command(
    name = "npchunk",
    version,
    about = "Noun-phrase chunking by combining classifiers over five data representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Transcode a corpus between chunk-tag representations.
    Convert {
        /// Representation of the input file.
        #[arg(long, value_parser = scheme_value)]
        from: TagScheme,
        /// Representation of the output file.
        #[arg(long, value_parser = scheme_value)]
        to: TagScheme,
        input: PathBuf,
        output: PathBuf,
    },
    /// Train a chunker for one representation and save it.
    Train {
        /// Representation to train [default: IOB1].
        #[arg(long, value_parser = scheme_value)]
        scheme: Option<TagScheme>,
        /// Classification stages, 1 or 2 [default: 2].
        #[arg(long)]
        stages: Option<u8>,
        /// Nearest-distance shells examined [default: 3].
        #[arg(long)]
        k: Option<usize>,
        /// Configuration file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        train: PathBuf,
        model: PathBuf,
    },
    /// Chunk a corpus with a saved model.
    Predict {
        /// Representation of the output file [default: IOB1].
        #[arg(long, value_parser = scheme_value, default_value = "IOB1")]
        to: TagScheme,
        model: PathBuf,
        /// Input corpus: two columns (word, POS) or the model's column
        /// format, whose annotation is ignored.
        input: PathBuf,
        output: PathBuf,
    },
    /// Compare a prediction file against a gold file.
    Evaluate {
        /// Representation both files are encoded in [default: IOB1].
        #[arg(long, value_parser = scheme_value, default_value = "IOB1")]
        scheme: TagScheme,
        gold: PathBuf,
        pred: PathBuf,
    },
    /// Cross-validate the combination experiment over one corpus (IOB1).
    Crossval {
        #[command(flatten)]
        experiment: ExperimentArgs,
        data: PathBuf,
    },
    /// Run the combination experiment on a train/test pair (IOB1 files).
    Experiment {
        #[command(flatten)]
        experiment: ExperimentArgs,
        train: PathBuf,
        test: PathBuf,
    },
    /// Recognize nested noun phrases by cascaded chunking
    /// (bracket-structure files).
    Cascade {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Write the recognized nested phrases to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        train: PathBuf,
        test: PathBuf,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// Configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated representations [default: IOB1,IOB2,IOE1,IOE2,O+C].
    #[arg(long, value_delimiter = ',', value_parser = scheme_value)]
    scheme: Option<Vec<TagScheme>>,
    /// Classification stages, 1 or 2 [default: 2].
    #[arg(long)]
    stages: Option<u8>,
    /// Nearest-distance shells examined [default: 3].
    #[arg(long)]
    k: Option<usize>,
    /// Combination method [default: majority].
    #[arg(long, value_parser = method_value)]
    method: Option<Combination>,
    /// Cross-validation folds [default: 10].
    #[arg(long)]
    folds: Option<usize>,
    /// Training fraction held out as tuning data for weighted voting
    /// [default: 0.1].
    #[arg(long = "tuning-fraction")]
    tuning_fraction: Option<f64>,
    /// Draw tuning sentences at random (seeded) instead of the last block.
    #[arg(long = "shuffle-tuning")]
    shuffle_tuning: bool,
    /// Depth cap for the cascade [default: 4].
    #[arg(long = "max-levels")]
    max_levels: Option<usize>,
    /// Seed for the tuning shuffle, the only randomized step [default: 0].
    #[arg(long)]
    seed: Option<u64>,
    /// Significance test in reports: chi2 or mcnemar [default: chi2].
    #[arg(long, value_parser = parse_significance)]
    significance: Option<npchunk_core::pipeline::SignificanceTest>,
    /// Worker-thread cap for folds and per-representation training
    /// [default: 1].
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the text report here as well as to standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write the machine-readable key = value report here.
    #[arg(long = "report-kv")]
    report_kv: Option<PathBuf>,
    /// Write the predictions here in IOB1 column format.
    #[arg(long)]
    pred: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut config = ExperimentConfig::default();
        if let Some(path) = &self.config {
            config::apply_file(&mut config, path)?;
        }
        if let Some(schemes) = &self.scheme {
            config.schemes = schemes.clone();
        }
        if let Some(stages) = self.stages {
            config.stages = stages;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(method) = self.method {
            config.combination = method;
        }
        if let Some(folds) = self.folds {
            config.folds = folds;
        }
        if let Some(fraction) = self.tuning_fraction {
            config.tuning_fraction = fraction;
        }
        if self.shuffle_tuning {
            config.shuffle_tuning = true;
        }
        if let Some(levels) = self.max_levels {
            config.cascade_max_levels = levels;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(significance) = self.significance {
            config.significance = significance;
        }
        config.validate().map_err(Error::Pipeline)?;
        Ok(config)
    }
}

fn main() {
    std::process::exit(run_cli());
}

fn run_cli() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("npchunk: {e}");
            2
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Convert {
            from,
            to,
            input,
            output,
        } => {
            let data = io::read_corpus(&input, from)?;
            io::write_corpus(&output, &data, to)
        }
        Command::Train {
            scheme,
            stages,
            k,
            config,
            train,
            model,
        } => {
            let mut defaults = ExperimentConfig::default();
            if let Some(path) = &config {
                config::apply_file(&mut defaults, path)?;
            }
            let scheme = scheme.unwrap_or(TagScheme::IOB1);
            let stages = stages.unwrap_or(defaults.stages);
            let k = k.unwrap_or(defaults.k);
            let data = io::read_corpus(&train, scheme)?;
            let chunker = SchemeChunker::train(&data, scheme, stages, k)?;
            io::write_chunker(&model, &chunker)
        }
        Command::Predict {
            to,
            model,
            input,
            output,
        } => {
            let chunker = io::read_chunker(&model)?;
            let data = io::read_corpus_flexible(&input, chunker.scheme())?;
            let mut chunked = Vec::with_capacity(data.len());
            for sentence in &data.sentences {
                let spans = chunker.predict_spans(sentence)?;
                chunked.push(Sentence {
                    tokens: sentence.tokens.clone(),
                    spans,
                });
            }
            io::write_corpus(&output, &Dataset::new(chunked), to)
        }
        Command::Evaluate { scheme, gold, pred } => evaluate(scheme, &gold, &pred),
        Command::Crossval { experiment, data } => {
            let config = experiment.resolve()?;
            let corpus = io::read_corpus(&data, TagScheme::IOB1)?;
            let folds = split_folds(&corpus, config.folds).map_err(PipelineError::Corpus)?;
            let outcomes: Vec<Result<BasenpOutcome, PipelineError>> =
                parallel::map_limit(folds, experiment.jobs, |(train, test)| {
                    npchunk_core::pipeline::run_basenp(&train, &test, &config)
                });
            let outcomes = outcomes
                .into_iter()
                .collect::<Result<Vec<BasenpOutcome>, PipelineError>>()?;
            let outcome = aggregate_folds(outcomes, config.significance)?;
            emit_report(&experiment, &outcome.report, &corpus, &outcome.pred_spans)
        }
        Command::Experiment {
            experiment,
            train,
            test,
        } => {
            let config = experiment.resolve()?;
            let train_data = io::read_corpus(&train, TagScheme::IOB1)?;
            let test_data = io::read_corpus(&test, TagScheme::IOB1)?;
            let streams: Vec<Result<SchemeStreams, PipelineError>> =
                parallel::map_limit(config.schemes.clone(), experiment.jobs, |scheme| {
                    scheme_streams(&train_data, &test_data, scheme, &config)
                });
            let streams = streams
                .into_iter()
                .collect::<Result<Vec<SchemeStreams>, PipelineError>>()?;
            let outcome = combine_and_score(streams, &train_data, &test_data, &config)?;
            emit_report(
                &experiment,
                &outcome.report,
                &test_data,
                &outcome.pred_spans,
            )
        }
        Command::Cascade {
            experiment,
            out,
            train,
            test,
        } => {
            let config = experiment.resolve()?;
            let train_data = io::read_nested_corpus(&train)?;
            let test_data = io::read_nested_corpus(&test)?;
            let outcome = run_cascade(&train_data, &test_data, &config)?;
            let score = chunk_score(&outcome.pred_spans, &test_data.gold_spans())
                .map_err(PipelineError::Eval)?;
            print!("{}", render_chunk_line(&score));
            if let Some(path) = out {
                let chunked: Vec<Sentence> = test_data
                    .sentences
                    .iter()
                    .zip(&outcome.pred_spans)
                    .map(|(sentence, spans)| Sentence {
                        tokens: sentence.tokens.clone(),
                        spans: spans.clone(),
                    })
                    .collect();
                io::write_nested_corpus(&path, &Dataset::new(chunked))?;
            }
            Ok(())
        }
    }
}

/// Raw tag columns of a corpus file, flattened over tokens: one column for
/// the tagging schemes, the open and close columns for O+C.
fn raw_tag_columns(text: &str, scheme: TagScheme) -> Vec<Vec<String>> {
    let mut columns = vec![Vec::new(); if scheme.is_tagging() { 1 } else { 2 }];
    for line in text.lines() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split([' ', '\t']).filter(|f| !f.is_empty()).collect();
        if scheme.is_tagging() {
            if let Some(tag) = fields.get(2) {
                columns[0].push(tag.to_string());
            }
        } else {
            if let Some(tag) = fields.get(2) {
                columns[0].push(tag.to_string());
            }
            if let Some(tag) = fields.get(3) {
                columns[1].push(tag.to_string());
            }
        }
    }
    columns
}

fn evaluate(scheme: TagScheme, gold: &Path, pred: &Path) -> Result<(), Error> {
    let gold_text = io::read_to_string(gold)?;
    let pred_text = io::read_to_string(pred)?;
    let gold_data =
        npchunk_core::corpus::parse_column_file(&gold_text, scheme).map_err(|error| {
            Error::Corpus {
                path: gold.to_path_buf(),
                error,
            }
        })?;
    let pred_data =
        npchunk_core::corpus::parse_column_file(&pred_text, scheme).map_err(|error| {
            Error::Corpus {
                path: pred.to_path_buf(),
                error,
            }
        })?;
    let score = chunk_score(&pred_data.gold_spans(), &gold_data.gold_spans())
        .map_err(PipelineError::Eval)?;
    let gold_columns = raw_tag_columns(&gold_text, scheme);
    let pred_columns = raw_tag_columns(&pred_text, scheme);
    let tokens = gold_data.token_count();
    if scheme.is_tagging() {
        let accuracy =
            token_accuracy(&pred_columns[0], &gold_columns[0]).map_err(PipelineError::Eval)?;
        print!("{}", render_evaluation(tokens, accuracy, &score));
    } else {
        let open =
            token_accuracy(&pred_columns[0], &gold_columns[0]).map_err(PipelineError::Eval)?;
        let close =
            token_accuracy(&pred_columns[1], &gold_columns[1]).map_err(PipelineError::Eval)?;
        println!(
            "processed {} tokens; accuracy O: {:.2}% C: {:.2}%",
            tokens, open, close
        );
        print!("{}", render_chunk_line(&score));
    }
    Ok(())
}

fn emit_report(
    args: &ExperimentArgs,
    report: &npchunk_core::pipeline::ExperimentReport,
    test_data: &Dataset,
    pred_spans: &[Vec<npchunk_core::corpus::ChunkSpan>],
) -> Result<(), Error> {
    let text = render_text(report);
    print!("{text}");
    if let Some(path) = &args.report {
        io::write_text(path, &text)?;
    }
    if let Some(path) = &args.report_kv {
        io::write_text(path, &render_keyvalue(report))?;
    }
    if let Some(path) = &args.pred {
        let chunked: Vec<Sentence> = test_data
            .sentences
            .iter()
            .zip(pred_spans)
            .map(|(sentence, spans)| Sentence {
                tokens: sentence.tokens.clone(),
                spans: spans.clone(),
            })
            .collect();
        io::write_corpus(path, &Dataset::new(chunked), TagScheme::IOB1)?;
    }
    Ok(())
}
