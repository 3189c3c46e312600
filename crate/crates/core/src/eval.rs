//! Evaluation: test-set loading, WER / CER / BLEU, and report rendering.
//!
//! WER and CER are micro-averaged: total edit distance over the total
//! reference length of the test set. BLEU is corpus-level over 1..=4-grams
//! with uniform weights and no smoothing.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lexicon::ColumnOrder;
use crate::text::{normalize, normalize_native, word_tokens};

pub const MAX_NGRAM: usize = 4;

/// Printed above text reports so numbers are not compared across variants.
pub const METRIC_NOTE: &str = "# WER/CER: micro-averaged (total edits / total reference length); \
BLEU: corpus-level, 1-4 grams, uniform weights, no smoothing";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("malformed line {0}")]
    MalformedLine(usize),
    #[error("file has no evaluation pairs")]
    EmptyFile,
    #[error("reference is empty")]
    EmptyReference,
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("{hypotheses} hypotheses for {pairs} pairs")]
    CountMismatch { hypotheses: usize, pairs: usize },
    #[error("reading evaluation data: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalPair {
    pub source: String,
    pub reference: String,
}

/// Reads a two or three column TSV of (roman, native) pairs; a third
/// column (count) is ignored.
pub fn load_pairs<R: Read>(source: R, order: ColumnOrder) -> Result<Vec<EvalPair>, EvalError> {
    let mut pairs = Vec::new();
    for (i, line) in BufReader::new(source).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if !(2..=3).contains(&cols.len()) {
            return Err(EvalError::MalformedLine(line_no));
        }
        let (roman, native) = match order {
            ColumnOrder::RomanFirst => (cols[0], cols[1]),
            ColumnOrder::NativeFirst => (cols[1], cols[0]),
        };
        let source = normalize(roman).into_string();
        let reference = normalize_native(native).into_string();
        if source.is_empty() || reference.is_empty() {
            return Err(EvalError::MalformedLine(line_no));
        }
        pairs.push(EvalPair { source, reference });
    }
    if pairs.is_empty() {
        return Err(EvalError::EmptyFile);
    }
    Ok(pairs)
}

/// One hypothesis per line, aligned with the pairs file by line number.
pub fn load_hypotheses<R: Read>(source: R) -> Result<Vec<String>, EvalError> {
    BufReader::new(source)
        .lines()
        .map(|l| {
            let l = l?;
            Ok(l.strip_suffix('\r').map(str::to_string).unwrap_or(l))
        })
        .collect()
}

/// Unit-cost Levenshtein distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EditCounts {
    pub edits: usize,
    pub reference_len: usize,
}

impl EditCounts {
    pub fn rate(&self) -> Result<f64, EvalError> {
        if self.reference_len == 0 {
            return Err(EvalError::EmptyReference);
        }
        Ok(self.edits as f64 / self.reference_len as f64)
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.edits += rhs.edits;
        self.reference_len += rhs.reference_len;
    }
}

pub fn word_edits(reference: &str, hypothesis: &str) -> EditCounts {
    let r = word_tokens(reference);
    let h = word_tokens(hypothesis);
    EditCounts {
        edits: edit_distance(&r, &h),
        reference_len: r.len(),
    }
}

pub fn char_edits(reference: &str, hypothesis: &str) -> EditCounts {
    let r: Vec<char> = normalize_native(reference).as_str().chars().collect();
    let h: Vec<char> = normalize_native(hypothesis).as_str().chars().collect();
    EditCounts {
        edits: edit_distance(&r, &h),
        reference_len: r.len(),
    }
}

pub fn wer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    word_edits(reference, hypothesis).rate()
}

pub fn cer(reference: &str, hypothesis: &str) -> Result<f64, EvalError> {
    char_edits(reference, hypothesis).rate()
}

fn ngram_counts(tokens: &[String], n: usize) -> std::collections::HashMap<&[String], usize> {
    let mut counts = std::collections::HashMap::new();
    if tokens.len() >= n {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

/// Corpus BLEU over `(reference, hypothesis)` pairs.
///
/// Orders for which the hypotheses contain no n-gram at all are left out
/// of the geometric mean; any other order with zero matches gives 0.
pub fn bleu<R: AsRef<str>, H: AsRef<str>>(pairs: &[(R, H)]) -> Result<f64, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut matched = [0usize; MAX_NGRAM];
    let mut total = [0usize; MAX_NGRAM];
    let (mut ref_len, mut hyp_len) = (0usize, 0usize);
    for (reference, hypothesis) in pairs {
        let r = word_tokens(reference.as_ref());
        let h = word_tokens(hypothesis.as_ref());
        ref_len += r.len();
        hyp_len += h.len();
        for n in 1..=MAX_NGRAM {
            let ref_counts = ngram_counts(&r, n);
            for (gram, count) in ngram_counts(&h, n) {
                matched[n - 1] += count.min(ref_counts.get(gram).copied().unwrap_or(0));
                total[n - 1] += count;
            }
        }
    }
    if hyp_len == 0 {
        return Ok(0.0);
    }
    let mut log_sum = 0.0;
    let mut orders = 0;
    for n in 0..MAX_NGRAM {
        if total[n] == 0 {
            continue;
        }
        if matched[n] == 0 {
            return Ok(0.0);
        }
        log_sum += (matched[n] as f64 / total[n] as f64).ln();
        orders += 1;
    }
    let brevity = if hyp_len < ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    Ok(brevity * (log_sum / orders as f64).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub system: String,
    pub test_set: String,
    pub wer: f64,
    pub cer: f64,
    pub bleu: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

pub fn evaluate<H: AsRef<str>>(
    system: &str,
    hypotheses: &[H],
    pairs: &[EvalPair],
    test_set: &str,
) -> Result<ReportRow, EvalError> {
    if hypotheses.len() != pairs.len() {
        return Err(EvalError::CountMismatch {
            hypotheses: hypotheses.len(),
            pairs: pairs.len(),
        });
    }
    if pairs.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let mut words = EditCounts::default();
    let mut chars = EditCounts::default();
    for (pair, hyp) in pairs.iter().zip(hypotheses) {
        words += word_edits(&pair.reference, hyp.as_ref());
        chars += char_edits(&pair.reference, hyp.as_ref());
    }
    let corpus: Vec<(&str, &str)> = pairs
        .iter()
        .zip(hypotheses)
        .map(|(p, h)| (p.reference.as_str(), h.as_ref()))
        .collect();
    Ok(ReportRow {
        system: system.to_string(),
        test_set: test_set.to_string(),
        wer: words.rate()?,
        cer: chars.rate()?,
        bleu: bleu(&corpus)?,
        pair_count: pairs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

/// `"Team / Model"` system names fill both columns; others leave Model as `-`.
fn split_system(system: &str) -> (&str, &str) {
    system.split_once(" / ").unwrap_or((system, "-"))
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            serde_json::to_string_pretty(report).expect("report rows always serialize")
        }
        ReportFormat::Text => render_text(report),
    }
}

fn render_text(report: &EvalReport) -> String {
    let header = ["Team", "Model", "Test", "WER", "CER", "BLEU"];
    let rows: Vec<[String; 6]> = report
        .rows
        .iter()
        .map(|r| {
            let (team, model) = split_system(&r.system);
            [
                team.to_string(),
                model.to_string(),
                r.test_set.clone(),
                format!("{:.4}", r.wer),
                format!("{:.4}", r.cer),
                format!("{:.4}", r.bleu),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    out.push_str(METRIC_NOTE);
    out.push('\n');
    let mut line = |cells: [&str; 6]| {
        let mut l = String::new();
        for (i, cell) in cells.iter().enumerate() {
            let pad = widths[i] - cell.chars().count();
            if i >= 3 {
                // numbers right-aligned
                let _ = write!(l, "{}{}  ", " ".repeat(pad), cell);
            } else {
                let _ = write!(l, "{}{}  ", cell, " ".repeat(pad));
            }
        }
        out.push_str(l.trim_end());
        out.push('\n');
    };
    line(header);
    for row in &rows {
        line([&row[0], &row[1], &row[2], &row[3], &row[4], &row[5]].map(String::as_str));
    }
    out
}
