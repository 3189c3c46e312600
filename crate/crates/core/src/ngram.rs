//! Stupid-backoff n-gram model over native word tokens.
//!
//! Sentences are padded with `order - 1` begin markers and one end marker.
//! A k-gram is counted for every k-gram that ends on a non-begin token, so
//! begin-only contexts are never stored; their count is the number of
//! training sentences, which equals the end-marker unigram count.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Read, Write};

use thiserror::Error;

use crate::text::word_tokens;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

const BOS_ID: u32 = 0;
const EOS_ID: u32 = 1;
const UNK_ID: u32 = 2;

pub const DEFAULT_ORDER: usize = 3;
pub const DEFAULT_BACKOFF: f64 = 0.4;

const MAGIC: &str = "XLM";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum LmError {
    #[error("training corpus has no sentences")]
    EmptyCorpus,
    #[error("n-gram order must be at least 1")]
    InvalidOrder,
    #[error("backoff factor must be in (0, 1]")]
    InvalidBackoff,
    #[error("model file line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("model i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn format_err(line: usize, message: impl Into<String>) -> LmError {
    LmError::Format {
        line,
        message: message.into(),
    }
}

/// Log10 score of a token sequence. `per_token` has one entry per scored
/// token, the end marker included when the sentence was scored as complete.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScore {
    pub logprob: f64,
    pub per_token: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct NgramModel {
    order: usize,
    backoff: f64,
    ids: HashMap<String, u32>,
    words: Vec<String>,
    counts: HashMap<Box<[u32]>, u64>,
    unigram_total: u64,
}

impl NgramModel {
    fn empty(order: usize, backoff: f64) -> Result<Self, LmError> {
        if order == 0 {
            return Err(LmError::InvalidOrder);
        }
        if !(backoff > 0.0 && backoff <= 1.0) {
            return Err(LmError::InvalidBackoff);
        }
        let mut model = NgramModel {
            order,
            backoff,
            ids: HashMap::new(),
            words: Vec::new(),
            counts: HashMap::new(),
            unigram_total: 0,
        };
        for marker in [BOS, EOS, UNK] {
            model.intern(marker);
        }
        Ok(model)
    }

    fn intern(&mut self, token: &str) -> u32 {
        if let Some(&id) = self.ids.get(token) {
            return id;
        }
        let id = self.words.len() as u32;
        self.words.push(token.to_string());
        self.ids.insert(token.to_string(), id);
        id
    }

    fn id_of(&self, token: &str) -> u32 {
        match self.ids.get(token) {
            Some(&id) if id != BOS_ID && id != EOS_ID => id,
            _ => UNK_ID,
        }
    }

    /// Trains with the default backoff factor. Sentences are tokenized with
    /// the word tokenizer; sentences without any word are skipped.
    pub fn train<I, S>(corpus: I, order: usize) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self::train_with_backoff(corpus, order, DEFAULT_BACKOFF)
    }

    pub fn train_with_backoff<I, S>(corpus: I, order: usize, backoff: f64) -> Result<Self, LmError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut model = Self::empty(order, backoff)?;
        let mut sentences = 0usize;
        let mut padded: Vec<u32> = Vec::new();
        for sentence in corpus {
            let words = word_tokens(sentence.as_ref());
            if words.is_empty() {
                continue;
            }
            sentences += 1;
            padded.clear();
            padded.resize(order - 1, BOS_ID);
            for w in &words {
                let id = model.intern(w);
                padded.push(id);
            }
            padded.push(EOS_ID);
            for end in order - 1..padded.len() {
                for k in 1..=order {
                    *model
                        .counts
                        .entry(padded[end + 1 - k..=end].into())
                        .or_insert(0) += 1;
                }
            }
        }
        if sentences == 0 {
            return Err(LmError::EmptyCorpus);
        }
        model.recount_total();
        Ok(model)
    }

    fn recount_total(&mut self) {
        self.unigram_total = self
            .counts
            .iter()
            .filter(|(gram, _)| gram.len() == 1)
            .map(|(_, &c)| c)
            .sum();
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn backoff_factor(&self) -> f64 {
        self.backoff
    }

    /// Vocabulary: counted unigrams without the sentence markers.
    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.counts
            .keys()
            .filter(|g| g.len() == 1 && g[0] != EOS_ID)
            .map(|g| self.words[g[0] as usize].as_str())
    }

    /// Count of an n-gram given as tokens; markers may be written as
    /// [`BOS`] / [`EOS`]. Unknown tokens count 0.
    pub fn count(&self, gram: &[&str]) -> u64 {
        let ids: Option<Vec<u32>> = gram.iter().map(|t| self.ids.get(*t).copied()).collect();
        ids.and_then(|ids| self.counts.get(ids.as_slice()).copied())
            .unwrap_or(0)
    }

    /// All counted n-grams as token tuples, sorted by length then tokens.
    pub fn ngrams(&self) -> Vec<(Vec<&str>, u64)> {
        let mut out: Vec<(Vec<&str>, u64)> = self
            .counts
            .iter()
            .map(|(gram, &c)| {
                (
                    gram.iter().map(|&id| self.words[id as usize].as_str()).collect(),
                    c,
                )
            })
            .collect();
        out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
        out
    }

    fn context_count(&self, context: &[u32]) -> u64 {
        if context.iter().all(|&id| id == BOS_ID) {
            // Number of sentences.
            self.counts.get(&[EOS_ID][..]).copied().unwrap_or(0)
        } else {
            self.counts.get(context).copied().unwrap_or(0)
        }
    }

    fn unigram(&self, id: u32) -> f64 {
        let count = if id == UNK_ID {
            1
        } else {
            self.counts.get(&[id][..]).copied().unwrap_or(1)
        };
        count as f64 / (self.unigram_total + 1) as f64
    }

    /// Stupid-backoff score of `seq[at]` given everything before it.
    fn token_score(&self, seq: &[u32], at: usize) -> f64 {
        let max_ctx = (self.order - 1).min(at);
        let mut factor = 1.0;
        for k in (1..=max_ctx).rev() {
            let gram = &seq[at - k..=at];
            if let Some(&c) = self.counts.get(gram) {
                let denom = self.context_count(&gram[..k]);
                if denom > 0 {
                    return factor * c as f64 / denom as f64;
                }
            }
            factor *= self.backoff;
        }
        factor * self.unigram(seq[at])
    }

    fn score_ids(&self, words: impl Iterator<Item = u32>, complete: bool) -> SentenceScore {
        let mut seq: Vec<u32> = vec![BOS_ID; self.order - 1];
        seq.extend(words);
        if complete {
            seq.push(EOS_ID);
        }
        let per_token: Vec<f64> = (self.order - 1..seq.len())
            .map(|at| self.token_score(&seq, at).log10())
            .collect();
        SentenceScore {
            logprob: per_token.iter().sum(),
            per_token,
        }
    }

    /// Scores a complete sentence, end marker included.
    pub fn score<S: AsRef<str>>(&self, tokens: &[S]) -> SentenceScore {
        self.score_ids(tokens.iter().map(|t| self.id_of(t.as_ref())), true)
    }

    /// Scores a sentence prefix: no end-marker term.
    pub fn score_open<S: AsRef<str>>(&self, tokens: &[S]) -> SentenceScore {
        self.score_ids(tokens.iter().map(|t| self.id_of(t.as_ref())), false)
    }

    /// Writes the versioned text format: a header line
    /// `XLM 1 <order> <backoff>` followed by `<k>\t<tokens>\t<count>` lines.
    pub fn save<W: Write>(&self, mut out: W) -> Result<(), LmError> {
        writeln!(out, "{MAGIC} {FORMAT_VERSION} {} {}", self.order, self.backoff)?;
        for (gram, count) in self.ngrams() {
            writeln!(out, "{}\t{}\t{}", gram.len(), gram.join(" "), count)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn load<R: Read>(source: R) -> Result<Self, LmError> {
        let mut lines = BufReader::new(source).lines();
        let header = lines.next().ok_or_else(|| format_err(1, "missing header"))??;
        let fields: Vec<&str> = header.split(' ').collect();
        let [magic, version, order, backoff] = fields.as_slice() else {
            return Err(format_err(1, "malformed header"));
        };
        if *magic != MAGIC {
            return Err(format_err(1, "not an XLM model"));
        }
        if version.parse::<u32>().ok() != Some(FORMAT_VERSION) {
            return Err(format_err(1, format!("unsupported version {version}")));
        }
        let order: usize = order.parse().map_err(|_| format_err(1, "bad order"))?;
        let backoff: f64 = backoff.parse().map_err(|_| format_err(1, "bad backoff"))?;
        let mut model = Self::empty(order, backoff)?;

        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let [k, tokens, count] = cols.as_slice() else {
                return Err(format_err(line_no, "expected 3 tab-separated columns"));
            };
            let k: usize = k.parse().map_err(|_| format_err(line_no, "bad n-gram length"))?;
            let count: u64 = count.parse().map_err(|_| format_err(line_no, "bad count"))?;
            let tokens: Vec<&str> = tokens.split(' ').collect();
            if k == 0 || k > order || tokens.len() != k {
                return Err(format_err(line_no, "n-gram length mismatch"));
            }
            if count == 0 {
                return Err(format_err(line_no, "zero count"));
            }
            let gram: Box<[u32]> = tokens.iter().map(|t| model.intern(t)).collect();
            if model.counts.insert(gram, count).is_some() {
                return Err(format_err(line_no, "duplicate n-gram"));
            }
        }
        if !model.counts.contains_key(&[EOS_ID][..]) {
            return Err(LmError::EmptyCorpus);
        }
        model.recount_total();
        Ok(model)
    }
}
