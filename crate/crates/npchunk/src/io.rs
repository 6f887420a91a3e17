//! Path-based IO over the core string codecs.

use std::fs;
use std::path::Path;

use npchunk_core::chunkrepr::TagScheme;
use npchunk_core::corpus::{
    parse_column_file, parse_nested_file, write_column_file, write_nested_file, Dataset, Sentence,
    Token,
};
use npchunk_core::pipeline::SchemeChunker;

use crate::Error;

pub fn read_to_string(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads an annotated corpus in the column format of `scheme`.
pub fn read_corpus(path: &Path, scheme: TagScheme) -> Result<Dataset, Error> {
    let text = read_to_string(path)?;
    parse_column_file(&text, scheme).map_err(|error| Error::Corpus {
        path: path.to_path_buf(),
        error,
    })
}

/// Reads a corpus that may lack annotation: two columns (word, POS) parse
/// as unlabeled sentences, otherwise the file must match `scheme`.
pub fn read_corpus_flexible(path: &Path, scheme: TagScheme) -> Result<Dataset, Error> {
    let text = read_to_string(path)?;
    let two_column = text
        .lines()
        .find(|l| !l.is_empty())
        .map(|l| l.split([' ', '\t']).filter(|f| !f.is_empty()).count() == 2)
        .unwrap_or(false);
    let parsed = if two_column {
        parse_unlabeled(&text)
    } else {
        parse_column_file(&text, scheme)
    };
    parsed.map_err(|error| Error::Corpus {
        path: path.to_path_buf(),
        error,
    })
}

fn parse_unlabeled(text: &str) -> Result<Dataset, npchunk_core::corpus::CorpusError> {
    let mut sentences = Vec::new();
    let mut tokens: Vec<Token> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            if !tokens.is_empty() {
                sentences.push(Sentence::new(std::mem::take(&mut tokens), Vec::new())?);
            }
            continue;
        }
        let fields: Vec<&str> = line.split([' ', '\t']).filter(|f| !f.is_empty()).collect();
        if fields.len() != 2 {
            return Err(npchunk_core::corpus::CorpusError::FieldCount {
                line: idx + 1,
                expected: 2,
                found: fields.len(),
            });
        }
        tokens.push(Token::new(fields[0], fields[1]));
    }
    if !tokens.is_empty() {
        sentences.push(Sentence::new(tokens, Vec::new())?);
    }
    Ok(Dataset::new(sentences))
}

pub fn write_corpus(path: &Path, data: &Dataset, scheme: TagScheme) -> Result<(), Error> {
    let text = write_column_file(data, scheme).map_err(|error| Error::Corpus {
        path: path.to_path_buf(),
        error,
    })?;
    write_text(path, &text)
}

/// Reads nested annotation (bracket-structure column).
pub fn read_nested_corpus(path: &Path) -> Result<Dataset, Error> {
    let text = read_to_string(path)?;
    parse_nested_file(&text).map_err(|error| Error::Corpus {
        path: path.to_path_buf(),
        error,
    })
}

pub fn write_nested_corpus(path: &Path, data: &Dataset) -> Result<(), Error> {
    let text = write_nested_file(data).map_err(|error| Error::Corpus {
        path: path.to_path_buf(),
        error,
    })?;
    write_text(path, &text)
}

pub fn read_chunker(path: &Path) -> Result<SchemeChunker, Error> {
    let text = read_to_string(path)?;
    SchemeChunker::from_text(&text).map_err(|error| Error::Model {
        path: path.to_path_buf(),
        error,
    })
}

pub fn write_chunker(path: &Path, chunker: &SchemeChunker) -> Result<(), Error> {
    let text = chunker.to_text().map_err(|error| Error::Model {
        path: path.to_path_buf(),
        error,
    })?;
    write_text(path, &text)
}
