//! Normalization and word/passthrough tokenization.
//!
//! Every sentence that enters the engine goes through [`normalize`] and then
//! [`tokenize`]. Word tokens are transliterated; passthrough tokens (digits,
//! punctuation, whitespace, emoji) are copied to the output verbatim.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

const ZWNJ: char = '\u{200C}';
const ZWJ: char = '\u{200D}';

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("no output supplied for word token at position {0}")]
    MissingOutput(usize),
}

/// NFC text with Latin letters lowercased and whitespace collapsed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NormalizedText(String);

impl NormalizedText {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl AsRef<str> for NormalizedText {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NormalizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Passthrough,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
    pub position: usize,
}

/// Latin-script letters, the only codepoints that get case-folded.
fn is_latin(c: char) -> bool {
    matches!(c,
        'A'..='Z' | 'a'..='z'
        | '\u{00C0}'..='\u{024F}'
        | '\u{1E00}'..='\u{1EFF}'
        | '\u{2C60}'..='\u{2C7F}'
        | '\u{A720}'..='\u{A7FF}'
        | '\u{FF21}'..='\u{FF3A}'
        | '\u{FF41}'..='\u{FF5A}')
}

/// Characters that belong inside a word token.
///
/// Alphabetic codepoints and the apostrophe, plus combining marks and the
/// zero-width (non-)joiners: Indic viramas and ZWJ conjuncts are not
/// `Alphabetic` and would otherwise split native words apart.
pub fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '\'' || is_combining_mark(c) || c == ZWJ || c == ZWNJ
}

/// Normalizes roman input: NFC, Latin letters lowercased, whitespace runs
/// collapsed to one space, ends trimmed.
pub fn normalize(raw: &str) -> NormalizedText {
    normalize_with(raw, true)
}

/// Same as [`normalize`] without case folding; used for native-script text
/// (lexicon outputs, references, language model corpora).
pub fn normalize_native(raw: &str) -> NormalizedText {
    normalize_with(raw, false)
}

fn normalize_with(raw: &str, fold_latin: bool) -> NormalizedText {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.nfc() {
        if c.is_whitespace() {
            pending_space = !out.is_empty();
            continue;
        }
        if pending_space {
            out.push(' ');
            pending_space = false;
        }
        if fold_latin && is_latin(c) && c.is_uppercase() {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
    }
    // Lowercasing can in principle produce a non-composed sequence.
    if out.chars().any(is_combining_mark) {
        out = out.nfc().collect();
    }
    NormalizedText(out)
}

/// Splits normalized text into maximal runs of word and passthrough
/// characters. Positions are consecutive from 0.
pub fn tokenize(text: &NormalizedText) -> Vec<Token> {
    let mut tokens: Vec<Token> = Vec::new();
    let mut start = 0;
    let mut current: Option<TokenKind> = None;
    for (idx, c) in text.0.char_indices() {
        let kind = if is_word_char(c) {
            TokenKind::Word
        } else {
            TokenKind::Passthrough
        };
        match current {
            Some(k) if k == kind => {}
            Some(k) => {
                tokens.push(Token {
                    surface: text.0[start..idx].to_string(),
                    kind: k,
                    position: tokens.len(),
                });
                start = idx;
                current = Some(kind);
            }
            None => current = Some(kind),
        }
    }
    if let Some(k) = current {
        tokens.push(Token {
            surface: text.0[start..].to_string(),
            kind: k,
            position: tokens.len(),
        });
    }
    tokens
}

/// Word token surfaces of native text, in order. Used by the metrics and
/// the language model.
pub fn word_tokens(text: &str) -> Vec<String> {
    tokenize(&normalize_native(text))
        .into_iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.surface)
        .collect()
}

pub fn detokenize(tokens: &[Token], outputs: &HashMap<usize, String>) -> Result<String, TextError> {
    let mut out = String::new();
    for token in tokens {
        match token.kind {
            TokenKind::Passthrough => out.push_str(&token.surface),
            TokenKind::Word => {
                let word = outputs
                    .get(&token.position)
                    .ok_or(TextError::MissingOutput(token.position))?;
                out.push_str(word);
            }
        }
    }
    Ok(out)
}
