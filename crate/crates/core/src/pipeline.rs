//! Sentence transliteration: normalize, tokenize, look up candidates per
//! word (lexicon first, rules for unknown words), disambiguate, and put the
//! sentence back together with its punctuation and spacing.

use std::collections::HashMap;
use std::fs::File;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::disambiguate::{
    select, CandidateLattice, DisambiguationError, Selection, Slot, DEFAULT_MAX_COMBINATIONS,
    DEFAULT_TOP_K,
};
use crate::lexicon::{Candidate, CandidateSet, CandidateSource, ColumnOrder, Lexicon, LexiconError};
use crate::ngram::{LmError, NgramModel};
use crate::rules::{RuleError, RuleTable};
use crate::scorer::{ExternalScorer, FallbackScorer, SentenceScorer, DEFAULT_TIMEOUT};
use crate::text::{detokenize, is_word_char, normalize, tokenize, NormalizedText, TextError, TokenKind};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing required resource: {0}")]
    ConfigMissing(String),
    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Text(#[from] TextError),
    #[error(transparent)]
    Disambiguation(#[from] DisambiguationError),
}

/// Resource paths and tuning knobs, read from a `key = value` file.
///
/// ```text
/// # paths are relative to the config file
/// rules = rules.tsv
/// lexicon = lexicon.tsv
/// lexicon_columns = roman-first    # or native-first (Dakshina)
/// lm = model.xlm
/// top_k = 5
/// max_combinations = 256
/// scorer_url = http://127.0.0.1:9000
/// scorer_timeout_ms = 1000
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub rules: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub lexicon_columns: ColumnOrder,
    pub lm: Option<PathBuf>,
    pub top_k: usize,
    pub max_combinations: usize,
    pub scorer_url: Option<String>,
    pub scorer_timeout: Duration,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rules: None,
            lexicon: None,
            lexicon_columns: ColumnOrder::RomanFirst,
            lm: None,
            top_k: DEFAULT_TOP_K,
            max_combinations: DEFAULT_MAX_COMBINATIONS,
            scorer_url: None,
            scorer_timeout: DEFAULT_TIMEOUT,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut config = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| PipelineError::Config {
                line: line_no,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad("expected `key = value`".into()))?;
            let positive = |v: &str| -> Result<usize, PipelineError> {
                v.parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 1)
                    .ok_or_else(|| bad(format!("{key} must be a positive integer")))
            };
            match key {
                "rules" => config.rules = Some(base_dir.join(value)),
                "lexicon" => config.lexicon = Some(base_dir.join(value)),
                "lm" => config.lm = Some(base_dir.join(value)),
                "lexicon_columns" => {
                    config.lexicon_columns = match value {
                        "roman-first" => ColumnOrder::RomanFirst,
                        "native-first" => ColumnOrder::NativeFirst,
                        other => return Err(bad(format!("unknown column order {other:?}"))),
                    }
                }
                "top_k" => config.top_k = positive(value)?,
                "max_combinations" => config.max_combinations = positive(value)?,
                "scorer_url" => config.scorer_url = Some(value.to_string()),
                "scorer_timeout_ms" => {
                    config.scorer_timeout = Duration::from_millis(positive(value)? as u64)
                }
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScoredCandidate {
    pub text: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub source: Option<CandidateSource>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SlotResult {
    pub surface: String,
    pub kind: TokenKind,
    pub candidates: Vec<ScoredCandidate>,
    pub chosen_index: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    pub incomplete: bool,
}

impl SlotResult {
    pub fn chosen(&self) -> &str {
        &self.candidates[self.chosen_index].text
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TransliterationResult {
    pub input: NormalizedText,
    pub output: String,
    pub slots: Vec<SlotResult>,
    pub latency_ms: f64,
}

impl TransliterationResult {
    pub fn word_slots(&self) -> impl Iterator<Item = &SlotResult> {
        self.slots.iter().filter(|s| s.kind == TokenKind::Word)
    }
}

/// Per-call overrides.
#[derive(Debug, Clone, Copy, Default)]
pub struct TransliterateOptions {
    /// Treat a trailing word that is not followed by a separator as still
    /// being typed.
    pub prefix_mode: bool,
    pub top_k: Option<usize>,
}

/// Loaded resources. Immutable; share it behind an `Arc` across threads.
pub struct Pipeline {
    rules: Option<RuleTable>,
    lexicon: Option<Lexicon>,
    lm: Option<Arc<NgramModel>>,
    scorer: Option<Box<dyn SentenceScorer>>,
    top_k: usize,
    max_combinations: usize,
}

#[derive(Default)]
pub struct PipelineBuilder {
    rules: Option<RuleTable>,
    lexicon: Option<Lexicon>,
    lm: Option<NgramModel>,
    external: Option<Box<dyn SentenceScorer>>,
    top_k: Option<usize>,
    max_combinations: Option<usize>,
}

impl PipelineBuilder {
    pub fn rules(mut self, rules: RuleTable) -> Self {
        self.rules = Some(rules);
        self
    }

    pub fn lexicon(mut self, lexicon: Lexicon) -> Self {
        self.lexicon = Some(lexicon);
        self
    }

    pub fn language_model(mut self, lm: NgramModel) -> Self {
        self.lm = Some(lm);
        self
    }

    /// Scorer consulted before the language model; the model (if any) is
    /// used when it fails.
    pub fn external_scorer(mut self, scorer: Box<dyn SentenceScorer>) -> Self {
        self.external = Some(scorer);
        self
    }

    pub fn top_k(mut self, top_k: usize) -> Self {
        self.top_k = Some(top_k);
        self
    }

    pub fn max_combinations(mut self, max: usize) -> Self {
        self.max_combinations = Some(max);
        self
    }

    pub fn build(self) -> Result<Pipeline, PipelineError> {
        if self.rules.is_none() && self.lexicon.is_none() {
            return Err(PipelineError::ConfigMissing("rules or lexicon".into()));
        }
        let top_k = self.top_k.unwrap_or(DEFAULT_TOP_K);
        let max_combinations = self.max_combinations.unwrap_or(DEFAULT_MAX_COMBINATIONS);
        if top_k == 0 || max_combinations == 0 {
            return Err(PipelineError::Config {
                line: 0,
                message: "top_k and max_combinations must be positive".into(),
            });
        }
        let lm = self.lm.map(Arc::new);
        let scorer: Option<Box<dyn SentenceScorer>> = match (self.external, &lm) {
            (Some(ext), lm) => Some(Box::new(FallbackScorer::new(ext, lm.clone()))),
            (None, Some(lm)) => Some(Box::new(lm.clone())),
            (None, None) => None,
        };
        Ok(Pipeline {
            rules: self.rules,
            lexicon: self.lexicon,
            lm,
            scorer,
            top_k,
            max_combinations,
        })
    }
}

fn open(path: &Path) -> Result<File, PipelineError> {
    File::open(path).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

impl Pipeline {
    pub fn builder() -> PipelineBuilder {
        PipelineBuilder::default()
    }

    pub fn from_config(config: &PipelineConfig) -> Result<Self, PipelineError> {
        let mut builder = Pipeline::builder()
            .top_k(config.top_k)
            .max_combinations(config.max_combinations);
        if let Some(path) = &config.rules {
            builder = builder.rules(RuleTable::from_reader(open(path)?)?);
        }
        if let Some(path) = &config.lexicon {
            builder = builder.lexicon(Lexicon::from_reader(open(path)?, config.lexicon_columns)?);
        }
        if let Some(path) = &config.lm {
            builder = builder.language_model(NgramModel::load(open(path)?)?);
        }
        if let Some(url) = &config.scorer_url {
            builder = builder.external_scorer(Box::new(ExternalScorer::new(url, config.scorer_timeout)));
        }
        builder.build()
    }

    pub fn has_rules(&self) -> bool {
        self.rules.is_some()
    }

    pub fn has_lexicon(&self) -> bool {
        self.lexicon.is_some()
    }

    pub fn has_lm(&self) -> bool {
        self.lm.is_some()
    }

    pub fn top_k(&self) -> usize {
        self.top_k
    }

    pub fn max_combinations(&self) -> usize {
        self.max_combinations
    }

    pub fn transliterate_sentence(&self, raw: &str) -> Result<TransliterationResult, PipelineError> {
        self.transliterate(raw, TransliterateOptions::default())
    }

    pub fn transliterate_prefix(&self, raw: &str) -> Result<TransliterationResult, PipelineError> {
        self.transliterate(
            raw,
            TransliterateOptions {
                prefix_mode: true,
                top_k: None,
            },
        )
    }

    fn rule_candidate(&self, word: &str) -> CandidateSet {
        let native = match &self.rules {
            Some(rules) => rules.transliterate_word(word),
            None => word.to_string(),
        };
        CandidateSet::single(native, CandidateSource::Rules)
    }

    fn complete_candidates(&self, word: &str) -> CandidateSet {
        self.lexicon
            .as_ref()
            .and_then(|lex| lex.lookup(word))
            .unwrap_or_else(|| self.rule_candidate(word))
    }

    fn partial_candidates(&self, word: &str, top_k: usize) -> CandidateSet {
        let Some(lex) = &self.lexicon else {
            return self.rule_candidate(word);
        };
        let mut merged: Vec<Candidate> = Vec::new();
        let sources = lex
            .lookup_exact(word)
            .into_iter()
            .chain(lex.lookup_skeleton(word))
            .flat_map(CandidateSet::into_candidates)
            .chain(lex.prefix_matches(word, top_k));
        for cand in sources {
            if !merged.iter().any(|c| c.native == cand.native) {
                merged.push(cand);
            }
        }
        CandidateSet::new(merged).unwrap_or_else(|| self.rule_candidate(word))
    }

    pub fn transliterate(
        &self,
        raw: &str,
        options: TransliterateOptions,
    ) -> Result<TransliterationResult, PipelineError> {
        let started = Instant::now();
        let top_k = options.top_k.unwrap_or(self.top_k).max(1);
        let input = normalize(raw);
        let tokens = tokenize(&input);

        let open_word = match tokens.last() {
            Some(last)
                if options.prefix_mode
                    && last.kind == TokenKind::Word
                    && raw.chars().last().is_some_and(is_word_char) =>
            {
                Some(last.position)
            }
            _ => None,
        };

        let mut sets: Vec<Option<CandidateSet>> = Vec::with_capacity(tokens.len());
        let mut slots = Vec::with_capacity(tokens.len());
        for token in &tokens {
            match token.kind {
                TokenKind::Passthrough => {
                    sets.push(None);
                    slots.push(Slot::passthrough(token.position, token.surface.clone()));
                }
                TokenKind::Word => {
                    let mut set = if open_word == Some(token.position) {
                        self.partial_candidates(&token.surface, top_k)
                    } else {
                        self.complete_candidates(&token.surface)
                    }
                    .into_candidates();
                    set.truncate(top_k);
                    slots.push(Slot::word(
                        token.position,
                        set.iter().map(|c| c.native.clone()).collect(),
                    ));
                    sets.push(CandidateSet::new(set));
                }
            }
        }
        let lattice = CandidateLattice::new(slots);

        let selection = match self.scorer.as_deref() {
            Some(scorer) => select(&lattice, Some(scorer), self.max_combinations)?,
            // No scorer loaded: keep the most frequent candidate everywhere.
            None => Selection {
                assignment: vec![0; lattice.slots.len()],
                candidate_scores: vec![None; lattice.slots.len()],
                scored_sequences: 0,
            },
        };

        let outputs: HashMap<usize, String> = lattice
            .slots
            .iter()
            .zip(&selection.assignment)
            .filter(|(slot, _)| slot.is_word())
            .map(|(slot, &i)| (slot.position, slot.candidates[i].clone()))
            .collect();
        let output = detokenize(&tokens, &outputs)?;

        let slot_results = tokens
            .iter()
            .zip(sets)
            .zip(selection.assignment.iter().zip(selection.candidate_scores))
            .map(|((token, set), (&chosen, scores))| {
                let candidates = match set {
                    Some(set) => set
                        .into_candidates()
                        .into_iter()
                        .enumerate()
                        .map(|(i, c)| ScoredCandidate {
                            text: c.native,
                            score: scores.as_ref().map(|s| s[i]),
                            source: Some(c.source),
                        })
                        .collect(),
                    None => vec![ScoredCandidate {
                        text: token.surface.clone(),
                        score: None,
                        source: None,
                    }],
                };
                SlotResult {
                    surface: token.surface.clone(),
                    kind: token.kind,
                    candidates,
                    chosen_index: chosen,
                    incomplete: open_word == Some(token.position),
                }
            })
            .collect();

        Ok(TransliterationResult {
            input,
            output,
            slots: slot_results,
            latency_ms: started.elapsed().as_secs_f64() * 1000.0,
        })
    }
}
