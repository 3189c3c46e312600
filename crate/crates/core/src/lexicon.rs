//! Roman word to native candidate dictionary.
//!
//! Entries are indexed twice: by their exact roman key and by a vowel
//! skeleton of that key, so that ad-hoc spellings with dropped vowels
//! ("gdr" for "gedara") still find the dictionary word.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read};
use std::ops::Bound;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text::{is_word_char, normalize, normalize_native};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("duplicate lexicon pair ({0:?}, {1:?})")]
    DuplicatePair(String, String),
    #[error("malformed lexicon entry on line {0}")]
    MalformedEntry(usize),
    #[error("reading lexicon: {0}")]
    Io(#[from] std::io::Error),
}

/// Column layout of a two/three column TSV file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnOrder {
    /// `roman<TAB>native[<TAB>count]`
    #[default]
    RomanFirst,
    /// `native<TAB>roman[<TAB>count]`, the Dakshina lexicon layout.
    NativeFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    Exact,
    Skeleton,
    /// Completion of an unfinished word (live typing only).
    Prefix,
    Rules,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub roman: String,
    pub native: String,
    pub count: u64,
}

impl LexiconEntry {
    pub fn new(roman: impl Into<String>, native: impl Into<String>, count: u64) -> Self {
        LexiconEntry {
            roman: roman.into(),
            native: native.into(),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub native: String,
    pub count: u64,
    pub source: CandidateSource,
}

/// Native candidates for one roman word, most frequent first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Returns `None` for an empty list; a candidate set is never empty.
    pub fn new(candidates: Vec<Candidate>) -> Option<Self> {
        (!candidates.is_empty()).then_some(CandidateSet { candidates })
    }

    pub fn single(native: String, source: CandidateSource) -> Self {
        CandidateSet {
            candidates: vec![Candidate {
                native,
                count: 0,
                source,
            }],
        }
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn natives(&self) -> impl Iterator<Item = &str> {
        self.candidates.iter().map(|c| c.native.as_str())
    }

    pub fn into_candidates(self) -> Vec<Candidate> {
        self.candidates
    }
}

#[derive(Debug, Clone)]
struct Posting {
    native: String,
    count: u64,
}

/// Drops every vowel except one at the very start of the word.
pub fn skeleton(roman: &str) -> String {
    roman
        .char_indices()
        .filter(|&(i, c)| i == 0 || !matches!(c, 'a' | 'e' | 'i' | 'o' | 'u'))
        .map(|(_, c)| c)
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    exact: BTreeMap<String, Vec<Posting>>,
    skeletons: HashMap<String, Vec<Posting>>,
    entries: usize,
}

impl Lexicon {
    /// Builds both indexes. Errors report the 1-based position of the
    /// offending entry.
    pub fn build<I>(entries: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = LexiconEntry>,
    {
        let mut lexicon = Lexicon::default();
        for (i, entry) in entries.into_iter().enumerate() {
            lexicon.insert(entry, i + 1)?;
        }
        lexicon.finish();
        Ok(lexicon)
    }

    /// Loads the lexicon TSV format; a missing count column means count 1.
    pub fn from_reader<R: Read>(source: R, order: ColumnOrder) -> Result<Self, LexiconError> {
        let mut lexicon = Lexicon::default();
        for (i, line) in BufReader::new(source).lines().enumerate() {
            let line_no = i + 1;
            let line = line?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let entry = parse_line(line, order).ok_or(LexiconError::MalformedEntry(line_no))?;
            lexicon.insert(entry, line_no)?;
        }
        lexicon.finish();
        Ok(lexicon)
    }

    fn insert(&mut self, entry: LexiconEntry, line_no: usize) -> Result<(), LexiconError> {
        let roman = normalize(&entry.roman).into_string();
        let native = normalize_native(&entry.native).into_string();
        if roman.is_empty() || native.is_empty() || !roman.chars().all(is_word_char) {
            return Err(LexiconError::MalformedEntry(line_no));
        }
        let postings = self.exact.entry(roman.clone()).or_default();
        if postings.iter().any(|p| p.native == native) {
            return Err(LexiconError::DuplicatePair(roman, native));
        }
        postings.push(Posting {
            native: native.clone(),
            count: entry.count,
        });

        let merged = self.skeletons.entry(skeleton(&roman)).or_default();
        match merged.iter_mut().find(|p| p.native == native) {
            Some(p) => p.count = p.count.max(entry.count),
            None => merged.push(Posting {
                native,
                count: entry.count,
            }),
        }
        self.entries += 1;
        Ok(())
    }

    fn finish(&mut self) {
        // Stable: equal counts keep insertion order.
        for postings in self.exact.values_mut().chain(self.skeletons.values_mut()) {
            postings.sort_by_key(|c| std::cmp::Reverse(c.count));
        }
    }

    /// Number of (roman, native) entries.
    pub fn len(&self) -> usize {
        self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries == 0
    }

    pub fn lookup_exact(&self, word: &str) -> Option<CandidateSet> {
        self.exact
            .get(word)
            .and_then(|p| to_set(p, CandidateSource::Exact))
    }

    pub fn lookup_skeleton(&self, word: &str) -> Option<CandidateSet> {
        self.skeletons
            .get(&skeleton(word))
            .and_then(|p| to_set(p, CandidateSource::Skeleton))
    }

    /// Exact hit if any, else skeleton hit, else `None` (a miss).
    pub fn lookup(&self, word: &str) -> Option<CandidateSet> {
        self.lookup_exact(word).or_else(|| self.lookup_skeleton(word))
    }

    /// Candidates of keys that strictly extend `prefix`, most frequent
    /// first, at most `limit` distinct natives.
    pub fn prefix_matches(&self, prefix: &str, limit: usize) -> Vec<Candidate> {
        let mut found: Vec<Candidate> = Vec::new();
        let range = self
            .exact
            .range::<str, _>((Bound::Excluded(prefix), Bound::Unbounded))
            .take_while(|(key, _)| key.starts_with(prefix));
        for (_, postings) in range {
            for p in postings {
                match found.iter_mut().find(|c| c.native == p.native) {
                    Some(c) => c.count = c.count.max(p.count),
                    None => found.push(Candidate {
                        native: p.native.clone(),
                        count: p.count,
                        source: CandidateSource::Prefix,
                    }),
                }
            }
        }
        found.sort_by_key(|c| std::cmp::Reverse(c.count));
        found.truncate(limit);
        found
    }

    /// Roman keys in lexicographic order.
    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.exact.keys().map(String::as_str)
    }
}

fn to_set(postings: &[Posting], source: CandidateSource) -> Option<CandidateSet> {
    CandidateSet::new(
        postings
            .iter()
            .map(|p| Candidate {
                native: p.native.clone(),
                count: p.count,
                source,
            })
            .collect(),
    )
}

fn parse_line(line: &str, order: ColumnOrder) -> Option<LexiconEntry> {
    let cols: Vec<&str> = line.split('\t').collect();
    let count = match cols.len() {
        2 => 1,
        3 => cols[2].trim().parse().ok()?,
        _ => return None,
    };
    let (roman, native) = match order {
        ColumnOrder::RomanFirst => (cols[0], cols[1]),
        ColumnOrder::NativeFirst => (cols[1], cols[0]),
    };
    Some(LexiconEntry::new(roman, native, count))
}
