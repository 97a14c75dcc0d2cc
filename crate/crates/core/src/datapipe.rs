//! Turns punctuated written-form paragraphs into spoken-form tokens with
//! per-word punctuation tags, and handles the line-delimited labeled format.
//!
//! Cleaning keeps alphanumerics and mid-word hyphens/apostrophes, lowercases
//! everything, and removes punctuation. The tag for each word comes from the
//! punctuation run that trails it (see [`map_symbol`] for the symbol table).
//! Spoken-form number verbalization is not performed: `1500` stays `1500`.
//!
//! Labeled records are one JSON object per line:
//!
//! ```text
//! {"tokens":["it","can","happen"],"tags":["O","O","PERIOD"]}
//! ```

use std::io::{BufRead, Write};

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::token::{split_word, PunctTag, TaggedToken, Token};

pub const DEFAULT_VALID_FRACTION: f64 = 0.10;
pub const DEFAULT_VALID_CAP: usize = 50_000;
pub const DEFAULT_MAX_TOKENS: usize = 250;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("paragraph has no alphanumeric content")]
    EmptyAfterCleaning,
    #[error("{tokens} tokens but {tags} tags")]
    LengthMismatch { tokens: usize, tags: usize },
    #[error("line {line}: {source}")]
    Record {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One written-form paragraph with its original punctuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Paragraph(String);

impl Paragraph {
    /// Returns `None` for blank input.
    pub fn new(raw: impl Into<String>) -> Option<Self> {
        let raw = raw.into();
        (!raw.trim().is_empty()).then_some(Paragraph(raw))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

/// Parallel token and tag sequences of equal length.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "RawExample")]
pub struct LabeledExample {
    tokens: Vec<Token>,
    tags: Vec<PunctTag>,
}

#[derive(Deserialize)]
struct RawExample {
    tokens: Vec<Token>,
    tags: Vec<PunctTag>,
}

impl TryFrom<RawExample> for LabeledExample {
    type Error = DataError;

    fn try_from(raw: RawExample) -> Result<Self, DataError> {
        LabeledExample::new(raw.tokens, raw.tags)
    }
}

impl LabeledExample {
    pub fn new(tokens: Vec<Token>, tags: Vec<PunctTag>) -> Result<Self, DataError> {
        if tokens.len() != tags.len() {
            return Err(DataError::LengthMismatch {
                tokens: tokens.len(),
                tags: tags.len(),
            });
        }
        Ok(LabeledExample { tokens, tags })
    }

    pub fn from_tagged(tagged: impl IntoIterator<Item = TaggedToken>) -> Self {
        let (tokens, tags) = tagged.into_iter().map(|t| (t.token, t.tag)).unzip();
        LabeledExample { tokens, tags }
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn tags(&self) -> &[PunctTag] {
        &self.tags
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tagged(&self) -> Vec<TaggedToken> {
        self.tokens
            .iter()
            .cloned()
            .zip(self.tags.iter().copied())
            .map(|(t, g)| TaggedToken::new(t, g))
            .collect()
    }

    pub fn into_parts(self) -> (Vec<Token>, Vec<PunctTag>) {
        (self.tokens, self.tags)
    }

    fn truncated(&self, len: usize) -> Self {
        LabeledExample {
            tokens: self.tokens[..len].to_vec(),
            tags: self.tags[..len].to_vec(),
        }
    }
}

/// Maps a written punctuation symbol onto a supported tag. `None` means the
/// symbol is dropped without tagging anything.
///
/// | symbol            | tag      |
/// |-------------------|----------|
/// | `,` `;` `:`       | COMMA    |
/// | `.` `!` `…` `...` | PERIOD   |
/// | `?`               | QUESTION |
pub fn map_symbol(symbol: &str) -> Option<PunctTag> {
    match symbol {
        "," | ";" | ":" => Some(PunctTag::Comma),
        "." | "!" | "\u{2026}" | "..." => Some(PunctTag::Period),
        "?" => Some(PunctTag::Question),
        _ => None,
    }
}

fn map_char(c: char) -> Option<PunctTag> {
    let mut buf = [0u8; 4];
    map_symbol(c.encode_utf8(&mut buf))
}

/// Resolves a trailing punctuation run to one tag: a question mark anywhere
/// wins, otherwise the last mapped symbol does.
fn cluster_tag(cluster: &str) -> PunctTag {
    let mapped: Vec<PunctTag> = cluster.chars().filter_map(map_char).collect();
    if mapped.contains(&PunctTag::Question) {
        return PunctTag::Question;
    }
    mapped.last().copied().unwrap_or(PunctTag::None)
}

/// Strips punctuation from a paragraph and converts it to per-word tags.
///
/// Punctuation standing alone between spaces (`word , next`) attaches to the
/// preceding word.
pub fn strip_and_tag(p: &Paragraph) -> Result<LabeledExample, DataError> {
    let mut tokens = Vec::new();
    let mut clusters: Vec<String> = Vec::new();
    for raw in p.as_str().split_whitespace() {
        let (clean, trailing) = split_word(raw);
        if clean.is_empty() {
            if let Some(last) = clusters.last_mut() {
                last.push_str(&trailing);
            }
            continue;
        }
        tokens.push(Token::new(clean).expect("split_word yields valid tokens"));
        clusters.push(trailing);
    }
    if tokens.is_empty() {
        return Err(DataError::EmptyAfterCleaning);
    }
    let tags = clusters.iter().map(|c| cluster_tag(c)).collect();
    LabeledExample::new(tokens, tags)
}

/// Caps an example at `max_tokens`, cutting back to its last complete
/// sentence. Returns an empty example when no boundary fits within the limit.
pub fn trim_to_limit(ex: &LabeledExample, max_tokens: usize) -> LabeledExample {
    assert!(max_tokens >= 1, "max_tokens must be at least 1");
    if ex.len() <= max_tokens {
        return ex.clone();
    }
    match ex.tags[..max_tokens].iter().rposition(|t| t.is_boundary()) {
        Some(b) => ex.truncated(b + 1),
        None => LabeledExample::default(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusSplit {
    pub train: Vec<LabeledExample>,
    pub valid: Vec<LabeledExample>,
    pub seed: u64,
}

/// Number of validation examples for a corpus of `n`.
pub fn valid_size(n: usize, valid_fraction: f64, valid_cap: usize) -> usize {
    let frac = (valid_fraction * n as f64 + 1e-9).floor() as usize;
    frac.min(valid_cap).min(n)
}

/// Seeded random hold-out split. Both halves keep the corpus order.
pub fn split_corpus(
    examples: Vec<LabeledExample>,
    valid_fraction: f64,
    valid_cap: usize,
    seed: u64,
) -> CorpusSplit {
    let n = examples.len();
    let k = valid_size(n, valid_fraction, valid_cap);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut in_valid = vec![false; n];
    for i in index::sample(&mut rng, n, k) {
        in_valid[i] = true;
    }
    let (mut train, mut valid) = (Vec::with_capacity(n - k), Vec::with_capacity(k));
    for (ex, v) in examples.into_iter().zip(in_valid) {
        if v {
            valid.push(ex);
        } else {
            train.push(ex);
        }
    }
    CorpusSplit { train, valid, seed }
}

/// Counters reported by [`prepare_paragraphs`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PrepareStats {
    pub written: usize,
    pub empty_after_cleaning: usize,
    pub no_boundary_within_limit: usize,
}

/// Runs cleaning, tagging, and trimming over paragraph-per-line text.
pub fn prepare_paragraphs<R: BufRead>(
    input: R,
    max_tokens: usize,
    mut emit: impl FnMut(LabeledExample) -> Result<(), DataError>,
) -> Result<PrepareStats, DataError> {
    let mut stats = PrepareStats::default();
    for line in input.lines() {
        let line = line?;
        let Some(p) = Paragraph::new(line) else {
            continue;
        };
        match strip_and_tag(&p) {
            Ok(ex) => {
                let trimmed = trim_to_limit(&ex, max_tokens);
                if trimmed.is_empty() {
                    stats.no_boundary_within_limit += 1;
                } else {
                    emit(trimmed)?;
                    stats.written += 1;
                }
            }
            Err(DataError::EmptyAfterCleaning) => stats.empty_after_cleaning += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(stats)
}

pub fn write_labeled<W: Write>(mut w: W, ex: &LabeledExample) -> Result<(), DataError> {
    serde_json::to_writer(&mut w, ex).map_err(|e| DataError::Io(e.into()))?;
    w.write_all(b"\n")?;
    Ok(())
}

/// Streams labeled records; blank lines are skipped.
pub fn read_labeled<R: BufRead>(
    input: R,
) -> impl Iterator<Item = Result<LabeledExample, DataError>> {
    input
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(DataError::Io(e))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(
                serde_json::from_str(&l).map_err(|source| DataError::Record {
                    line: i + 1,
                    source,
                }),
            ),
        })
}

pub fn read_labeled_all<R: BufRead>(input: R) -> Result<Vec<LabeledExample>, DataError> {
    read_labeled(input).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::render;
    use crate::token::toks;
    use proptest::prelude::*;
    use PunctTag::*;

    fn para(s: &str) -> Paragraph {
        Paragraph::new(s).unwrap()
    }

    #[test]
    fn symbol_table() {
        assert_eq!(map_symbol("?"), Some(Question));
        assert_eq!(map_symbol("!"), Some(Period));
        assert_eq!(map_symbol("("), Option::None);
        assert_eq!(map_symbol(","), Some(Comma));
        assert_eq!(map_symbol(";"), Some(Comma));
        assert_eq!(map_symbol(":"), Some(Comma));
        assert_eq!(map_symbol("..."), Some(Period));
        assert_eq!(map_symbol("\u{2026}"), Some(Period));
        assert_eq!(map_symbol("\""), Option::None);
        assert_eq!(map_symbol("-"), Option::None);
    }

    #[test]
    fn strips_display_sentence() {
        let ex = strip_and_tag(&para("It can happen in New York City, right?")).unwrap();
        assert_eq!(
            ex.tokens(),
            toks(&["it", "can", "happen", "in", "new", "york", "city", "right"])
        );
        assert_eq!(
            ex.tags(),
            [None, None, None, None, None, None, Comma, Question]
        );
    }

    #[test]
    fn strips_simple_cases() {
        let ex = strip_and_tag(&para("hello")).unwrap();
        assert_eq!(ex.tokens(), toks(&["hello"]));
        assert_eq!(ex.tags(), [None]);

        let ex = strip_and_tag(&para("Stop! Now...")).unwrap();
        assert_eq!(ex.tokens(), toks(&["stop", "now"]));
        assert_eq!(ex.tags(), [Period, Period]);
    }

    #[test]
    fn clusters_and_detached_marks() {
        let ex = strip_and_tag(&para("He said \"why?\" -- then (quietly), left ; ok !")).unwrap();
        assert_eq!(
            ex.tokens(),
            toks(&["he", "said", "why", "then", "quietly", "left", "ok"])
        );
        assert_eq!(
            ex.tags(),
            [None, None, Question, None, Comma, Comma, Period]
        );
    }

    #[test]
    fn symbols_only_paragraph_is_empty() {
        assert!(matches!(
            strip_and_tag(&para("--- !!! ...")),
            Err(DataError::EmptyAfterCleaning)
        ));
        assert!(Paragraph::new("   ").is_none());
    }

    fn ex(tags: &[PunctTag]) -> LabeledExample {
        let words: Vec<String> = (0..tags.len()).map(|i| format!("w{i}")).collect();
        LabeledExample::new(toks(&words), tags.to_vec()).unwrap()
    }

    #[test]
    fn trim_examples() {
        let new_york = strip_and_tag(&para("It can happen in New York City, right?")).unwrap();
        assert_eq!(trim_to_limit(&new_york, 250), new_york);

        let t = trim_to_limit(&ex(&[None, Period, None, None]), 3);
        assert_eq!(t.len(), 2);
        assert_eq!(t.tags(), [None, Period]);

        assert!(trim_to_limit(&ex(&[None, None]), 1).is_empty());
    }

    #[test]
    fn split_sizes() {
        let corpus: Vec<_> = (0..100).map(|i| ex(&vec![Period; 1 + i % 3])).collect();
        let s = split_corpus(corpus.clone(), DEFAULT_VALID_FRACTION, DEFAULT_VALID_CAP, 7);
        assert_eq!(s.valid.len(), 10);
        assert_eq!(s.train.len(), 90);
        assert_eq!(
            s,
            split_corpus(corpus, DEFAULT_VALID_FRACTION, DEFAULT_VALID_CAP, 7)
        );

        assert_eq!(valid_size(1_000_000, 0.10, 50_000), 50_000);
        let one = split_corpus(vec![ex(&[Period])], 0.10, 50_000, 3);
        assert_eq!((one.valid.len(), one.train.len()), (0, 1));
        assert_eq!(valid_size(30, 0.10, 50_000), 3);
    }

    #[test]
    fn split_seeds_change_membership_not_sizes() {
        let corpus: Vec<_> = (0..200).map(|i| ex(&vec![Comma; 1 + i])).collect();
        let a = split_corpus(corpus.clone(), 0.1, 50_000, 1);
        let b = split_corpus(corpus, 0.1, 50_000, 2);
        assert_eq!(a.valid.len(), b.valid.len());
        assert_ne!(a.valid, b.valid);
        for v in &a.valid {
            assert!(!a.train.contains(v));
        }
    }

    #[test]
    fn labeled_record_format() {
        let e = LabeledExample::new(toks(&["it", "can"]), vec![None, Period]).unwrap();
        let mut buf = Vec::new();
        write_labeled(&mut buf, &e).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "{\"tokens\":[\"it\",\"can\"],\"tags\":[\"O\",\"PERIOD\"]}\n"
        );
        let back = read_labeled_all(&buf[..]).unwrap();
        assert_eq!(back, vec![e]);

        let bad = b"{\"tokens\":[\"it\"],\"tags\":[]}\n";
        assert!(matches!(
            read_labeled_all(&bad[..]),
            Err(DataError::Record { line: 1, .. })
        ));
        let upper = b"{\"tokens\":[\"It\"],\"tags\":[\"O\"]}\n";
        assert!(read_labeled_all(&upper[..]).is_err());
    }

    #[test]
    fn prepare_counts_drops() {
        let text = "It can happen in New York City, right?\n\n--- ...\nno boundary here at all\n";
        let mut out = Vec::new();
        let stats = prepare_paragraphs(text.as_bytes(), 3, |e| {
            out.push(e);
            Ok(())
        })
        .unwrap();
        assert_eq!(stats.written, 0);
        assert_eq!(stats.empty_after_cleaning, 1);
        assert_eq!(stats.no_boundary_within_limit, 2);
    }

    fn labeled() -> impl Strategy<Value = LabeledExample> {
        proptest::collection::vec(("[a-z0-9]{1,5}(-[a-z]{1,3})?", 0usize..4), 1..30).prop_map(|v| {
            let (words, tags): (Vec<_>, Vec<_>) =
                v.into_iter().map(|(w, t)| (w, PunctTag::ALL[t])).unzip();
            LabeledExample::new(toks(&words), tags).unwrap()
        })
    }

    proptest! {
        #[test]
        fn render_then_strip_is_identity(e in labeled()) {
            let text = render(&e.tagged(), false);
            let back = strip_and_tag(&Paragraph::new(text).unwrap()).unwrap();
            prop_assert_eq!(back, e);
        }

        #[test]
        fn trimmed_is_empty_or_ends_on_boundary(e in labeled(), max in 1usize..30) {
            let t = trim_to_limit(&e, max);
            prop_assert!(t.len() <= max);
            if t.len() < e.len() && !t.is_empty() {
                prop_assert!(t.tags().last().unwrap().is_boundary());
            }
            prop_assert_eq!(t.tokens().len(), t.tags().len());
        }
    }
}
