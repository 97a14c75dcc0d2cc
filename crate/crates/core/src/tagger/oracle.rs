use std::sync::atomic::{AtomicUsize, Ordering};

use super::{Tagger, TaggerError};
use crate::datapipe::LabeledExample;
use crate::token::{PunctTag, Token};

/// Returns reference tags for any contiguous slice of a reference stream.
///
/// With an offset ([`Tagger::predict_at`]) the lookup is exact. Without one,
/// the slice is located by search starting at the last matched position, so
/// callers walking forward through the stream get the occurrence they meant
/// even when short slices repeat.
#[derive(Debug)]
pub struct OracleTagger {
    tokens: Vec<Token>,
    tags: Vec<PunctTag>,
    cursor: AtomicUsize,
}

impl OracleTagger {
    pub fn new(tokens: Vec<Token>, tags: Vec<PunctTag>) -> Self {
        assert_eq!(
            tokens.len(),
            tags.len(),
            "reference tokens and tags must align"
        );
        OracleTagger {
            tokens,
            tags,
            cursor: AtomicUsize::new(0),
        }
    }

    pub fn from_example(ex: &LabeledExample) -> Self {
        OracleTagger::new(ex.tokens().to_vec(), ex.tags().to_vec())
    }

    /// Reference built from several examples laid end to end.
    pub fn from_examples<'a>(examples: impl IntoIterator<Item = &'a LabeledExample>) -> Self {
        let (mut tokens, mut tags) = (Vec::new(), Vec::new());
        for ex in examples {
            tokens.extend_from_slice(ex.tokens());
            tags.extend_from_slice(ex.tags());
        }
        OracleTagger::new(tokens, tags)
    }

    pub fn reference_tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn reference_tags(&self) -> &[PunctTag] {
        &self.tags
    }

    fn matches_at(&self, tokens: &[Token], start: usize) -> bool {
        self.tokens
            .get(start..start + tokens.len())
            .is_some_and(|r| r == tokens)
    }

    fn find(&self, tokens: &[Token]) -> Option<usize> {
        let last = self.tokens.len().checked_sub(tokens.len())?;
        let hint = self.cursor.load(Ordering::Relaxed).min(last);
        (hint..=last)
            .chain(0..hint)
            .find(|&s| self.matches_at(tokens, s))
    }
}

impl Tagger for OracleTagger {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        if tokens.is_empty() {
            return Ok(Vec::new());
        }
        let start = self.find(tokens).ok_or(TaggerError::SliceMismatch {
            position: self.cursor.load(Ordering::Relaxed),
        })?;
        self.cursor.store(start, Ordering::Relaxed);
        Ok(self.tags[start..start + tokens.len()].to_vec())
    }

    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        if let Some(i) = tokens
            .iter()
            .enumerate()
            .position(|(i, t)| self.tokens.get(offset + i) != Some(t))
        {
            return Err(TaggerError::SliceMismatch {
                position: offset + i,
            });
        }
        self.cursor.store(offset, Ordering::Relaxed);
        Ok(self.tags[offset..offset + tokens.len()].to_vec())
    }
}
