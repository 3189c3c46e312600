//! Greedy longest-match character transliteration.
//!
//! A [`RuleTable`] maps short roman substrings to native strings. A word is
//! scanned left to right; at each position the longest key that matches is
//! consumed and its output appended. Characters no key covers are copied
//! through unchanged.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read};

use thiserror::Error;

use crate::text::{is_word_char, normalize};

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("duplicate rule key {0:?} on line {1}")]
    DuplicateKey(String, usize),
    #[error("line {0}: expected `key<TAB>output`")]
    MalformedLine(usize),
    #[error("line {0}: empty rule key")]
    EmptyKey(usize),
    #[error("line {1}: rule key {0:?} contains non-word characters")]
    InvalidKey(String, usize),
    #[error("reading rules: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub key: String,
    pub output: String,
}

#[derive(Debug, Clone, Default)]
pub struct RuleTable {
    rules: Vec<Rule>,
    index: HashMap<String, usize>,
    max_key_len: usize,
}

impl RuleTable {
    /// Builds a table from `(key, output)` pairs. Keys are normalized; line
    /// numbers in errors are 1-based positions in `rules`.
    pub fn new<I, K, V>(rules: I) -> Result<Self, RuleError>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: Into<String>,
    {
        let mut table = RuleTable::default();
        for (i, (key, output)) in rules.into_iter().enumerate() {
            table.insert(key.as_ref(), output.into(), i + 1)?;
        }
        Ok(table)
    }

    /// Parses the rules TSV format: `key<TAB>output` per line, `#` comments,
    /// blank lines ignored, LF or CRLF line endings.
    pub fn from_reader<R: Read>(source: R) -> Result<Self, RuleError> {
        let mut table = RuleTable::default();
        for (i, line) in BufReader::new(source).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split('\t');
            let (Some(key), Some(output), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(RuleError::MalformedLine(line_no));
            };
            table.insert(key, output.to_string(), line_no)?;
        }
        Ok(table)
    }

    pub fn from_tsv_str(source: &str) -> Result<Self, RuleError> {
        Self::from_reader(source.as_bytes())
    }

    fn insert(&mut self, key: &str, output: String, line_no: usize) -> Result<(), RuleError> {
        let key = normalize(key).into_string();
        if key.is_empty() {
            return Err(RuleError::EmptyKey(line_no));
        }
        if !key.chars().all(is_word_char) {
            return Err(RuleError::InvalidKey(key, line_no));
        }
        if self.index.contains_key(&key) {
            return Err(RuleError::DuplicateKey(key, line_no));
        }
        self.max_key_len = self.max_key_len.max(key.chars().count());
        self.index.insert(key.clone(), self.rules.len());
        self.rules.push(Rule { key, output });
        Ok(())
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Length in codepoints of the longest key; 0 for an empty table.
    pub fn max_key_len(&self) -> usize {
        self.max_key_len
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.index.get(key).map(|&i| self.rules[i].output.as_str())
    }

    pub fn transliterate_word(&self, word: &str) -> String {
        // Byte offsets of every char boundary, including the end.
        let bounds: Vec<usize> = word
            .char_indices()
            .map(|(i, _)| i)
            .chain(std::iter::once(word.len()))
            .collect();
        let n_chars = bounds.len() - 1;
        let mut out = String::with_capacity(word.len() * 3);
        let mut pos = 0;
        while pos < n_chars {
            let longest = self.max_key_len.min(n_chars - pos);
            let hit = (1..=longest).rev().find_map(|len| {
                self.get(&word[bounds[pos]..bounds[pos + len]])
                    .map(|output| (len, output))
            });
            match hit {
                Some((len, output)) => {
                    out.push_str(output);
                    pos += len;
                }
                None => {
                    out.push_str(&word[bounds[pos]..bounds[pos + 1]]);
                    pos += 1;
                }
            }
        }
        out
    }
}
