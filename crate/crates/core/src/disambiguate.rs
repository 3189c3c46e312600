//! Candidate lattice disambiguation.
//!
//! Each word of a sentence contributes a slot of native candidates. The
//! lattice is cut into chunks whose candidate product stays under a cap;
//! every combination inside a chunk is scored as a sentence (prefixed by
//! the words already chosen in earlier chunks) and the best one is kept.
//!
//! The chunking rule (greedy running product) and the candidate filter
//! (keep the first `top_k` by frequency) are fixed stand-ins; they are not
//! tuned to any particular scorer's call budget.

use std::ops::Range;

use thiserror::Error;

use crate::scorer::{ScorerError, SentenceScorer};
use crate::text::TokenKind;

pub const DEFAULT_TOP_K: usize = 5;
pub const DEFAULT_MAX_COMBINATIONS: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DisambiguationError {
    #[error("lattice is ambiguous but no scorer is available")]
    ScorerUnavailable,
    #[error(transparent)]
    Scorer(#[from] ScorerError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    pub position: usize,
    pub kind: TokenKind,
    pub candidates: Vec<String>,
}

impl Slot {
    pub fn word(position: usize, candidates: Vec<String>) -> Self {
        assert!(!candidates.is_empty(), "word slot needs at least one candidate");
        Slot {
            position,
            kind: TokenKind::Word,
            candidates,
        }
    }

    pub fn passthrough(position: usize, surface: impl Into<String>) -> Self {
        Slot {
            position,
            kind: TokenKind::Passthrough,
            candidates: vec![surface.into()],
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CandidateLattice {
    pub slots: Vec<Slot>,
}

impl CandidateLattice {
    pub fn new(slots: Vec<Slot>) -> Self {
        CandidateLattice { slots }
    }

    /// Product of candidate counts over all slots, saturating.
    pub fn combinations(&self) -> usize {
        product(&self.slots)
    }

    pub fn filtered(self, top_k: usize) -> Self {
        CandidateLattice {
            slots: self
                .slots
                .into_iter()
                .map(|s| filter_candidates(s, top_k))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chunk {
    pub slots: Range<usize>,
    pub combinations: usize,
}

/// Keeps the `top_k` most frequent candidates (the list is already sorted).
pub fn filter_candidates(mut slot: Slot, top_k: usize) -> Slot {
    assert!(top_k >= 1, "top_k must be at least 1");
    if slot.is_word() {
        slot.candidates.truncate(top_k);
    }
    slot
}

fn product(slots: &[Slot]) -> usize {
    slots
        .iter()
        .fold(1usize, |acc, s| acc.saturating_mul(s.candidates.len()))
}

/// Greedy left-to-right partition: a chunk grows while the product of its
/// candidate counts stays within `max_combinations`.
pub fn chunk_lattice(lattice: &CandidateLattice, max_combinations: usize) -> Vec<Chunk> {
    assert!(max_combinations >= 1, "max_combinations must be at least 1");
    let mut chunks = Vec::new();
    let mut start = 0;
    let mut running = 1usize;
    for (i, slot) in lattice.slots.iter().enumerate() {
        let n = slot.candidates.len();
        if i > start && running.saturating_mul(n) > max_combinations {
            chunks.push(Chunk {
                slots: start..i,
                combinations: running,
            });
            start = i;
            running = 1;
        }
        running = running.saturating_mul(n);
    }
    if start < lattice.slots.len() {
        chunks.push(Chunk {
            slots: start..lattice.slots.len(),
            combinations: running,
        });
    }
    chunks
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Chosen candidate index per slot, in slot order.
    pub assignment: Vec<usize>,
    /// Per slot, the best sentence score seen with each candidate; `None`
    /// when the slot's chunk needed no scoring.
    pub candidate_scores: Vec<Option<Vec<f64>>>,
    /// Number of sequences sent to the scorer.
    pub scored_sequences: usize,
}

/// Picks one candidate per slot. Within a chunk the combination with the
/// highest score wins; ties go to the lexicographically smallest index
/// vector, i.e. towards the more frequent candidates.
pub fn select(
    lattice: &CandidateLattice,
    scorer: Option<&dyn SentenceScorer>,
    max_combinations: usize,
) -> Result<Selection, DisambiguationError> {
    let slots = &lattice.slots;
    let mut assignment = vec![0usize; slots.len()];
    let mut candidate_scores: Vec<Option<Vec<f64>>> = vec![None; slots.len()];
    let mut scored_sequences = 0;
    let mut history: Vec<&str> = Vec::new();

    let last_word = slots.iter().rposition(Slot::is_word);

    for chunk in chunk_lattice(lattice, max_combinations) {
        let words: Vec<usize> = chunk.slots.clone().filter(|&i| slots[i].is_word()).collect();
        if chunk.combinations > 1 {
            let scorer = scorer.ok_or(DisambiguationError::ScorerUnavailable)?;
            let context_start = match scorer.context_window() {
                Some(w) => history.len().saturating_sub(w),
                None => 0,
            };
            let context = &history[context_start..];
            let complete = last_word.is_none_or(|l| l < chunk.slots.end);

            let combos = enumerate(&words, slots);
            let batch: Vec<Vec<&str>> = combos
                .iter()
                .map(|combo| {
                    let mut seq = context.to_vec();
                    for (&slot, &cand) in words.iter().zip(combo) {
                        seq.extend(slots[slot].candidates[cand].split_whitespace());
                    }
                    seq
                })
                .collect();
            let scores = scorer.score_batch(&batch, complete)?;
            if scores.len() != combos.len() {
                return Err(ScorerError::MalformedResponse(format!(
                    "expected {} scores, got {}",
                    combos.len(),
                    scores.len()
                ))
                .into());
            }
            scored_sequences += batch.len();

            let mut best = 0;
            for (i, &s) in scores.iter().enumerate() {
                if s > scores[best] {
                    best = i;
                }
            }
            for (&slot, &cand) in words.iter().zip(&combos[best]) {
                assignment[slot] = cand;
            }
            for (k, &slot) in words.iter().enumerate() {
                let mut per_cand = vec![f64::NEG_INFINITY; slots[slot].candidates.len()];
                for (combo, &s) in combos.iter().zip(&scores) {
                    let c = combo[k];
                    if s > per_cand[c] {
                        per_cand[c] = s;
                    }
                }
                candidate_scores[slot] = Some(per_cand);
            }
        }
        for &slot in &words {
            history.extend(slots[slot].candidates[assignment[slot]].split_whitespace());
        }
    }

    Ok(Selection {
        assignment,
        candidate_scores,
        scored_sequences,
    })
}

/// All index vectors over the given slots in lexicographic order.
fn enumerate(words: &[usize], slots: &[Slot]) -> Vec<Vec<usize>> {
    let radices: Vec<usize> = words.iter().map(|&i| slots[i].candidates.len()).collect();
    let total = radices.iter().product::<usize>();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; radices.len()];
    for _ in 0..total {
        out.push(current.clone());
        for d in (0..radices.len()).rev() {
            current[d] += 1;
            if current[d] < radices[d] {
                break;
            }
            current[d] = 0;
        }
    }
    out
}
