//! Reverse transliteration of romanized Indo-Aryan text into native script.
//!
//! The [`pipeline::Pipeline`] ties the pieces together: words are looked up
//! in a [`lexicon::Lexicon`] (exact or vowel-skeleton match), unknown words
//! go through the greedy [`rules::RuleTable`], and ambiguous words are
//! resolved by scoring candidate sentences with an
//! [`ngram::NgramModel`] or an external [`scorer::SentenceScorer`].
//! [`eval`] computes WER, CER and BLEU over test sets.

pub mod disambiguate;
pub mod eval;
pub mod lexicon;
pub mod ngram;
pub mod pipeline;
pub mod rules;
pub mod scorer;
pub mod text;

pub use disambiguate::{CandidateLattice, Chunk, Selection, Slot};
pub use eval::{EvalPair, EvalReport, ReportFormat, ReportRow};
pub use lexicon::{Candidate, CandidateSet, CandidateSource, ColumnOrder, Lexicon, LexiconEntry};
pub use ngram::{NgramModel, SentenceScore};
pub use pipeline::{Pipeline, PipelineConfig, PipelineError, TransliterateOptions, TransliterationResult};
pub use rules::RuleTable;
pub use scorer::{ExternalScorer, FallbackScorer, ScorerError, SentenceScorer};
pub use text::{NormalizedText, Token, TokenKind};
