//! Punctuation taggers.
//!
//! A [`Tagger`] maps a token window to one tag per token. Taggers hold no
//! streaming state; the [`stream`](crate::stream) engine decides which window
//! to tag and what to commit.

mod external;
mod linear;
mod oracle;

pub use external::ExternalTagger;
pub use linear::{
    featurize, load_model, predict_linear, save_model, train, LinearTaggerModel, ModelError,
    TrainOptions, MODEL_FORMAT_VERSION, PAD,
};
pub use oracle::OracleTagger;

use thiserror::Error;

use crate::token::{PunctTag, Token};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("tokens do not match the reference at position {position}")]
    SliceMismatch { position: usize },
    #[error("tagger returned {got} tags for {expected} tokens")]
    LengthMismatch { expected: usize, got: usize },
    #[error("external tagger protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub trait Tagger: Send + Sync {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError>;

    /// Tags a window whose first token sits at `offset` in the session's token
    /// stream. Only position-aware taggers need to override this.
    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        let _ = offset;
        self.predict(tokens)
    }
}

impl<T: Tagger + ?Sized> Tagger for &T {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict(tokens)
    }

    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict_at(tokens, offset)
    }
}

impl<T: Tagger + ?Sized> Tagger for Box<T> {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict(tokens)
    }

    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict_at(tokens, offset)
    }
}

impl<T: Tagger + ?Sized> Tagger for std::sync::Arc<T> {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict(tokens)
    }

    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        (**self).predict_at(tokens, offset)
    }
}

/// Tags everything `NONE`. Useful as a floor and in tests.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullTagger;

impl Tagger for NullTagger {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        Ok(vec![PunctTag::None; tokens.len()])
    }
}

pub(crate) fn check_len(
    expected: usize,
    tags: Vec<PunctTag>,
) -> Result<Vec<PunctTag>, TaggerError> {
    if tags.len() == expected {
        Ok(tags)
    } else {
        Err(TaggerError::LengthMismatch {
            expected,
            got: tags.len(),
        })
    }
}
