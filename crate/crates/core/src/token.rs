//! Word-level tokens, punctuation tags, and the sentence/segment containers
//! that flow between the pipeline stages.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token is empty")]
    Empty,
    #[error("token {0:?} is not lowercase")]
    NotLowercase(String),
    #[error("token {text:?} contains disallowed character {ch:?}")]
    DisallowedChar { text: String, ch: char },
    #[error("token {0:?} must start and end with an alphanumeric character")]
    Unanchored(String),
    #[error("unknown tag label {0:?}")]
    UnknownTag(String),
}

/// One spoken-form word: lowercase, no whitespace, alphanumerics plus
/// mid-word hyphens and apostrophes.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(text: impl Into<String>) -> Result<Self, TokenError> {
        let text = text.into();
        let (first, last) = match (text.chars().next(), text.chars().last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(TokenError::Empty),
        };
        if let Some(ch) = text.chars().find(|c| !is_word_char(*c)) {
            return Err(TokenError::DisallowedChar { text, ch });
        }
        if !first.is_alphanumeric() || !last.is_alphanumeric() {
            return Err(TokenError::Unanchored(text));
        }
        if text.to_lowercase() != text {
            return Err(TokenError::NotLowercase(text));
        }
        Ok(Token(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl TryFrom<String> for Token {
    type Error = TokenError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Token::new(value)
    }
}

impl TryFrom<&str> for Token {
    type Error = TokenError;

    fn try_from(value: &str) -> Result<Self, Self::Error> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(t: Token) -> String {
        t.0
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '-' || c == '\''
}

/// Splits one whitespace-delimited word into its cleaned token text and the
/// trailing punctuation cluster that followed its last alphanumeric character.
///
/// The cleaned text is lowercase, keeps only alphanumerics plus hyphens and
/// apostrophes, and is trimmed so it starts and ends on an alphanumeric. It
/// is empty when the word had no alphanumeric content, in which case the
/// whole word is returned as the cluster.
pub(crate) fn split_word(raw: &str) -> (String, String) {
    let lowered: String = raw
        .to_lowercase()
        .chars()
        .map(|c| {
            if c == '\u{2019}' || c == '\u{2018}' {
                '\''
            } else {
                c
            }
        })
        .collect();
    let cut = lowered
        .char_indices()
        .rfind(|(_, c)| c.is_alphanumeric())
        .map_or(0, |(i, c)| i + c.len_utf8());
    let (body, trailing) = lowered.split_at(cut);
    let kept: String = body.chars().filter(|c| is_word_char(*c)).collect();
    let text = kept
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string();
    (text, trailing.to_string())
}

/// Whitespace tokenization with lowercasing and symbol stripping. Words that
/// clean to nothing are skipped.
pub fn tokenize(text: &str) -> Vec<Token> {
    text.split_whitespace()
        .filter_map(|w| {
            let (clean, _) = split_word(w);
            if clean.is_empty() {
                None
            } else {
                Some(Token(clean))
            }
        })
        .collect()
}

/// Normalizes a single raw word the way [`tokenize`] would, if anything survives.
pub fn normalize_word(raw: &str) -> Option<Token> {
    let (clean, _) = split_word(raw);
    (!clean.is_empty()).then_some(Token(clean))
}

/// Per-word punctuation label. `None` is the "no punctuation" class.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
pub enum PunctTag {
    #[default]
    #[serde(rename = "O")]
    None,
    #[serde(rename = "COMMA")]
    Comma,
    #[serde(rename = "PERIOD")]
    Period,
    #[serde(rename = "QUESTION")]
    Question,
}

impl PunctTag {
    /// All tags in tie-break order.
    pub const ALL: [PunctTag; 4] = [
        PunctTag::None,
        PunctTag::Comma,
        PunctTag::Period,
        PunctTag::Question,
    ];

    /// The three scored punctuation classes.
    pub const PUNCTUATION: [PunctTag; 3] = [PunctTag::Comma, PunctTag::Period, PunctTag::Question];

    pub fn symbol(self) -> &'static str {
        match self {
            PunctTag::None => "",
            PunctTag::Comma => ",",
            PunctTag::Period => ".",
            PunctTag::Question => "?",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PunctTag::None => "O",
            PunctTag::Comma => "COMMA",
            PunctTag::Period => "PERIOD",
            PunctTag::Question => "QUESTION",
        }
    }

    pub fn from_label(label: &str) -> Result<Self, TokenError> {
        PunctTag::ALL
            .into_iter()
            .find(|t| t.label() == label)
            .ok_or_else(|| TokenError::UnknownTag(label.to_string()))
    }

    /// Period and question mark end a sentence.
    pub fn is_boundary(self) -> bool {
        matches!(self, PunctTag::Period | PunctTag::Question)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PunctTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TaggedToken {
    pub token: Token,
    pub tag: PunctTag,
}

impl TaggedToken {
    pub fn new(token: Token, tag: PunctTag) -> Self {
        TaggedToken { token, tag }
    }
}

impl fmt::Display for TaggedToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.token, self.tag.symbol())
    }
}

/// A decoder-style chunk of tokens, numbered by its position in the session.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Segment {
    pub tokens: Vec<Token>,
    pub source_index: usize,
}

impl Segment {
    pub fn new(tokens: Vec<Token>, source_index: usize) -> Self {
        Segment {
            tokens,
            source_index,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SentenceError {
    #[error("a sentence needs at least one token")]
    Empty,
    #[error("sentence must end with PERIOD or QUESTION, found {0}")]
    Unterminated(PunctTag),
    #[error("boundary tag at interior position {0}")]
    InteriorBoundary(usize),
}

/// A non-empty run of tagged tokens whose only boundary tag is the last one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Sentence(Vec<TaggedToken>);

impl Sentence {
    pub fn new(tagged: Vec<TaggedToken>) -> Result<Self, SentenceError> {
        let last = tagged.last().ok_or(SentenceError::Empty)?;
        if !last.tag.is_boundary() {
            return Err(SentenceError::Unterminated(last.tag));
        }
        if let Some(pos) = tagged[..tagged.len() - 1]
            .iter()
            .position(|t| t.tag.is_boundary())
        {
            return Err(SentenceError::InteriorBoundary(pos));
        }
        Ok(Sentence(tagged))
    }

    /// Builds a sentence from a boundary-free run, forcing a PERIOD onto the
    /// last token unless it already carries a boundary tag.
    pub(crate) fn terminated(mut tagged: Vec<TaggedToken>) -> Result<Self, SentenceError> {
        if let Some(last) = tagged.last_mut() {
            if !last.tag.is_boundary() {
                last.tag = PunctTag::Period;
            }
        }
        Sentence::new(tagged)
    }

    pub fn tagged(&self) -> &[TaggedToken] {
        &self.0
    }

    pub fn into_tagged(self) -> Vec<TaggedToken> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.0.iter().map(|t| &t.token)
    }

    pub fn tags(&self) -> impl Iterator<Item = PunctTag> + '_ {
        self.0.iter().map(|t| t.tag)
    }

    pub fn render(&self, capitalize: bool) -> String {
        crate::render::render(&self.0, capitalize)
    }
}

/// Splits a tagged run after every boundary tag. Returns the complete
/// sentences and the unterminated remainder.
pub fn split_sentences(tagged: Vec<TaggedToken>) -> (Vec<Sentence>, Vec<TaggedToken>) {
    let mut sentences = Vec::new();
    let mut current = Vec::new();
    for tt in tagged {
        let boundary = tt.tag.is_boundary();
        current.push(tt);
        if boundary {
            sentences.push(Sentence(std::mem::take(&mut current)));
        }
    }
    (sentences, current)
}

/// Convenience for tests and examples: builds tokens from string literals.
///
/// # Panics
///
/// Panics if any word is not a valid token.
pub fn toks<S: AsRef<str>>(words: &[S]) -> Vec<Token> {
    words
        .iter()
        .map(|w| Token::new(w.as_ref()).expect("valid token literal"))
        .collect()
}
