//! Streaming punctuation restoration and sentence segmentation for
//! unpunctuated, lowercased word streams such as ASR output.
//!
//! The pieces:
//!
//! - [`token`] and [`render`]: tokens, tags, sentences, display text.
//! - [`datapipe`]: turns punctuated paragraphs into labeled examples.
//! - [`tagger`]: the [`Tagger`](tagger::Tagger) trait, a trainable averaged
//!   perceptron, a reference oracle, and a subprocess adapter.
//! - [`stream`]: the dynamic decoding window plus the fixed-context baselines.
//! - [`segsim`]: upstream segmentation simulators.
//! - [`metrics`]: punctuation and segmentation scoring.
//! - [`experiment`]: the mode × segmentation-policy comparison grid.
//! - [`synth`]: seeded synthetic corpora for tests and demos.

pub mod cli;
pub mod datapipe;
pub mod experiment;
pub mod metrics;
pub mod render;
pub mod segsim;
pub mod stream;
pub mod synth;
pub mod tagger;
pub mod token;

pub use datapipe::{strip_and_tag, LabeledExample, Paragraph};
pub use metrics::{evaluate, fbeta, relative_gain, EvalReport};
pub use segsim::{simulate, SegKind, SegPolicy};
pub use stream::{open_session, run_batch, Mode, Session, SessionConfig, StepResult};
pub use tagger::{LinearTaggerModel, OracleTagger, Tagger};
pub use token::{tokenize, PunctTag, Segment, Sentence, TaggedToken, Token};
