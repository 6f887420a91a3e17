//! Flat `key = value` experiment configuration files.
//!
//! One key per line, `#` starts a comment, blank lines are ignored.
//! Command-line flags override file values. Keys mirror the flags:
//!
//! ```text
//! scheme = IOB1,IOB2,IOE1,IOE2,O+C
//! stages = 2
//! k = 3
//! method = majority
//! folds = 10
//! tuning-fraction = 0.1
//! shuffle-tuning = false
//! max-levels = 4
//! seed = 0
//! significance = chi2
//! ```

use std::path::Path;

use npchunk_core::chunkrepr::TagScheme;
use npchunk_core::pipeline::{Combination, ExperimentConfig, SignificanceTest};

use crate::{io, Error};

pub fn parse_scheme_list(value: &str) -> Result<Vec<TagScheme>, String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| TagScheme::parse(name).ok_or_else(|| format!("unknown scheme {name:?}")))
        .collect()
}

pub fn parse_significance(value: &str) -> Result<SignificanceTest, String> {
    match value {
        "chi2" | "chi-squared" => Ok(SignificanceTest::ChiSquared),
        "mcnemar" => Ok(SignificanceTest::McNemar),
        other => Err(format!("unknown significance test {other:?}")),
    }
}

/// Applies a configuration file on top of `config`.
pub fn apply_file(config: &mut ExperimentConfig, path: &Path) -> Result<(), Error> {
    let text = io::read_to_string(path)?;
    let fail = |line: usize, reason: String| Error::Config {
        path: path.to_path_buf(),
        line,
        reason,
    };
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| fail(lineno, format!("expected `key = value`, found {raw:?}")))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |reason: String| fail(lineno, reason);
        match key {
            "scheme" | "schemes" => config.schemes = parse_scheme_list(value).map_err(bad)?,
            "stages" => {
                config.stages = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "k" => {
                config.k = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "method" => {
                config.combination = Combination::parse(value)
                    .ok_or_else(|| bad(format!("unknown combination method {value:?}")))?
            }
            "folds" => {
                config.folds = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "tuning-fraction" => {
                config.tuning_fraction = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "shuffle-tuning" => {
                config.shuffle_tuning = match value {
                    "true" | "yes" | "on" => true,
                    "false" | "no" | "off" => false,
                    _ => return Err(bad(format!("expected a boolean, found {value:?}"))),
                }
            }
            "max-levels" => {
                config.cascade_max_levels = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "seed" => {
                config.seed = value
                    .parse()
                    .map_err(|_| bad_number(key, value))
                    .map_err(bad)?
            }
            "significance" => config.significance = parse_significance(value).map_err(bad)?,
            other => return Err(fail(lineno, format!("unknown key {other:?}"))),
        }
    }
    Ok(())
}

fn bad_number(key: &str, value: &str) -> String {
    format!("bad numeric value {value:?} for {key}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use npchunk_core::combine::VoteMethod;

    #[test]
    fn file_values_land_in_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        io::write_text(
            &path,
            "# an experiment\nscheme = IOB1, O+C\nstages = 1\nk = 5\nmethod = tagpair\nfolds = 4 # inline comment\ntuning-fraction = 0.2\nshuffle-tuning = true\nseed = 7\nsignificance = mcnemar\n",
        )
        .unwrap();
        let mut config = ExperimentConfig::default();
        apply_file(&mut config, &path).unwrap();
        assert_eq!(config.schemes, vec![TagScheme::IOB1, TagScheme::OC]);
        assert_eq!(config.stages, 1);
        assert_eq!(config.k, 5);
        assert_eq!(config.combination, Combination::Vote(VoteMethod::TagPair));
        assert_eq!(config.folds, 4);
        assert_eq!(config.tuning_fraction, 0.2);
        assert!(config.shuffle_tuning);
        assert_eq!(config.seed, 7);
        assert_eq!(config.significance, SignificanceTest::McNemar);
    }

    #[test]
    fn unknown_keys_fail_with_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.conf");
        io::write_text(&path, "k = 3\nbogus = 1\n").unwrap();
        let err = apply_file(&mut ExperimentConfig::default(), &path).unwrap_err();
        let message = err.to_string();
        assert!(message.contains(":2:"), "{message}");
        assert!(message.contains("bogus"), "{message}");
    }
}
