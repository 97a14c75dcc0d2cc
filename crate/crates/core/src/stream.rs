//! Streaming punctuation sessions.
//!
//! A [`Session`] receives decoder segments one at a time and emits finalized
//! sentences. In [`Mode::Streaming`] the decoder's segment boundaries are
//! ignored: every step re-tags the whole unfinalized buffer plus the new
//! segment, emits every sentence that ends before the last predicted
//! boundary, and keeps the tail as the next buffer. Nothing in the buffer is
//! committed, so later context can still change its punctuation.
//!
//! The other modes are per-segment baselines:
//!
//! * [`Mode::InSegment`] tags each segment alone and ends it with a boundary.
//! * [`Mode::LeftContext`] prepends the previous segment as context but only
//!   applies tags to the current one, which is also forced to end a sentence.
//! * [`Mode::RightContext`] holds each segment until the next arrives and tags
//!   it with that segment as right context. Segment ends are not forced;
//!   finalized tags accumulate until a boundary completes a sentence.

use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::render::render;
use crate::tagger::{Tagger, TaggerError};
use crate::token::{split_sentences, PunctTag, Segment, Sentence, TaggedToken, Token};

pub const DEFAULT_MAX_BUFFER_TOKENS: usize = 200;

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("segment {got} arrived but {expected} was expected")]
    OutOfOrderSegment { expected: usize, got: usize },
    #[error("max_buffer_tokens must be at least 1")]
    InvalidConfig,
    #[error("segments do not concatenate to the token stream")]
    SegmentationMismatch,
    #[error(transparent)]
    Tagger(#[from] TaggerError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    InSegment,
    LeftContext,
    RightContext,
    Streaming,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::InSegment,
        Mode::LeftContext,
        Mode::RightContext,
        Mode::Streaming,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::InSegment => "in-segment",
            Mode::LeftContext => "left-context",
            Mode::RightContext => "right-context",
            Mode::Streaming => "streaming",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    mode: Mode,
    max_buffer_tokens: usize,
    capitalize_output: bool,
}

impl SessionConfig {
    pub fn new(mode: Mode, max_buffer_tokens: usize) -> Result<Self, StreamError> {
        if max_buffer_tokens == 0 {
            return Err(StreamError::InvalidConfig);
        }
        Ok(SessionConfig {
            mode,
            max_buffer_tokens,
            capitalize_output: true,
        })
    }

    pub fn with_capitalize(mut self, capitalize: bool) -> Self {
        self.capitalize_output = capitalize;
        self
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn max_buffer_tokens(&self) -> usize {
        self.max_buffer_tokens
    }

    pub fn capitalize_output(&self) -> bool {
        self.capitalize_output
    }
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            mode: Mode::Streaming,
            max_buffer_tokens: DEFAULT_MAX_BUFFER_TOKENS,
            capitalize_output: true,
        }
    }
}

/// Output of one push or flush. `finalized` is never revised later;
/// `hypothesis` is the provisional tagging of whatever is still pending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StepResult {
    pub finalized: Vec<Sentence>,
    pub hypothesis: Vec<TaggedToken>,
}

/// Line-delimited form of a [`StepResult`] as written by `streampunct stream`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub finalized: Vec<String>,
    pub hypothesis: String,
}

impl StepResult {
    pub fn to_record(&self, capitalize: bool) -> StepRecord {
        StepRecord {
            finalized: self
                .finalized
                .iter()
                .map(|s| s.render(capitalize))
                .collect(),
            hypothesis: render(&self.hypothesis, capitalize),
        }
    }
}

/// A single streaming session. One owner pushes segments in order; the
/// tagger is only borrowed and may be shared by any number of sessions.
pub struct Session<'t, T: Tagger + ?Sized> {
    config: SessionConfig,
    tagger: &'t T,
    /// STREAMING: untagged tail. RIGHT_CONTEXT: tokens whose tags are final
    /// but whose sentence has not ended yet live in `committed` instead.
    buffer: Vec<Token>,
    committed: Vec<TaggedToken>,
    prev_segment: Vec<Token>,
    held: Option<Vec<Token>>,
    next_index: usize,
    /// Tokens pushed so far.
    consumed: usize,
    emitted_count: usize,
}

pub fn open_session<T: Tagger + ?Sized>(config: SessionConfig, tagger: &T) -> Session<'_, T> {
    Session::new(config, tagger)
}

impl<'t, T: Tagger + ?Sized> Session<'t, T> {
    pub fn new(config: SessionConfig, tagger: &'t T) -> Self {
        Session {
            config,
            tagger,
            buffer: Vec::new(),
            committed: Vec::new(),
            prev_segment: Vec::new(),
            held: None,
            next_index: 0,
            consumed: 0,
            emitted_count: 0,
        }
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    /// Sentences emitted so far.
    pub fn emitted_count(&self) -> usize {
        self.emitted_count
    }

    /// Index the next pushed segment must carry.
    pub fn next_index(&self) -> usize {
        self.next_index
    }

    /// Tokens pushed but not yet emitted, in stream order.
    pub fn pending_tokens(&self) -> Vec<Token> {
        let mut out: Vec<Token> = self.committed.iter().map(|t| t.token.clone()).collect();
        out.extend(self.buffer.iter().cloned());
        if let Some(h) = &self.held {
            out.extend(h.iter().cloned());
        }
        out
    }

    /// The STREAMING re-tag buffer.
    pub fn buffer(&self) -> &[Token] {
        &self.buffer
    }

    /// Pushes tokens as the next segment in sequence.
    pub fn push_tokens(&mut self, tokens: Vec<Token>) -> Result<StepResult, StreamError> {
        let seg = Segment::new(tokens, self.next_index);
        self.push_segment(seg)
    }

    pub fn push_segment(&mut self, seg: Segment) -> Result<StepResult, StreamError> {
        if seg.source_index != self.next_index {
            return Err(StreamError::OutOfOrderSegment {
                expected: self.next_index,
                got: seg.source_index,
            });
        }
        let start = self.consumed;
        let len = seg.tokens.len();
        let result = match self.config.mode {
            Mode::Streaming => self.push_streaming(seg.tokens, start),
            Mode::InSegment => self.push_in_segment(seg.tokens, start),
            Mode::LeftContext => self.push_left_context(seg.tokens, start),
            Mode::RightContext => self.push_right_context(seg.tokens, start),
        }?;
        self.next_index += 1;
        self.consumed += len;
        self.emitted_count += result.finalized.len();
        Ok(result)
    }

    /// Ends the session: everything pending is tagged and emitted, with a
    /// PERIOD forced onto the final token if the tagger did not end it.
    pub fn flush(&mut self) -> Result<StepResult, StreamError> {
        let end = self.consumed;
        let mut tail = std::mem::take(&mut self.committed);
        if !self.buffer.is_empty() {
            let offset = end - self.buffer.len();
            let tags = self.tag(&self.buffer, offset)?;
            tail.extend(zip_tagged(&self.buffer, &tags));
        }
        if let Some(held) = &self.held {
            let tags = self.tag(held, end - held.len())?;
            tail.extend(zip_tagged(held, &tags));
        }
        self.buffer.clear();
        self.held = None;
        let finalized = finalize_all(tail);
        self.emitted_count += finalized.len();
        Ok(StepResult {
            finalized,
            hypothesis: Vec::new(),
        })
    }

    fn tag(&self, window: &[Token], offset: usize) -> Result<Vec<PunctTag>, StreamError> {
        let tags = self.tagger.predict_at(window, offset)?;
        if tags.len() != window.len() {
            return Err(TaggerError::LengthMismatch {
                expected: window.len(),
                got: tags.len(),
            }
            .into());
        }
        Ok(tags)
    }

    fn push_streaming(&mut self, seg: Vec<Token>, start: usize) -> Result<StepResult, StreamError> {
        if seg.is_empty() {
            return self.streaming_hypothesis_unchanged(start);
        }
        let offset = start - self.buffer.len();
        let mut window = self.buffer.clone();
        window.extend(seg);
        let tags = self.tag(&window, offset)?;
        let tagged = zip_tagged(&window, &tags);
        let (mut finalized, mut rest) = split_sentences(tagged);

        let cap = self.config.max_buffer_tokens;
        while rest.len() > cap {
            let tail = rest.split_off(cap);
            finalized.push(Sentence::terminated(rest).expect("non-empty chunk"));
            rest = tail;
        }
        self.buffer = rest.iter().map(|t| t.token.clone()).collect();
        Ok(StepResult {
            finalized,
            hypothesis: rest,
        })
    }

    /// An empty push changes nothing; the hypothesis is re-derived so callers
    /// still get one record per step.
    fn streaming_hypothesis_unchanged(&self, start: usize) -> Result<StepResult, StreamError> {
        let hypothesis = if self.buffer.is_empty() {
            Vec::new()
        } else {
            let tags = self.tag(&self.buffer, start - self.buffer.len())?;
            zip_tagged(&self.buffer, &tags)
        };
        Ok(StepResult {
            finalized: Vec::new(),
            hypothesis,
        })
    }

    fn push_in_segment(
        &mut self,
        seg: Vec<Token>,
        start: usize,
    ) -> Result<StepResult, StreamError> {
        if seg.is_empty() {
            return Ok(StepResult::default());
        }
        let tags = self.tag(&seg, start)?;
        Ok(StepResult {
            finalized: finalize_all(zip_tagged(&seg, &tags)),
            hypothesis: Vec::new(),
        })
    }

    fn push_left_context(
        &mut self,
        seg: Vec<Token>,
        start: usize,
    ) -> Result<StepResult, StreamError> {
        if seg.is_empty() {
            return Ok(StepResult::default());
        }
        let ctx = self.prev_segment.len();
        let mut window = self.prev_segment.clone();
        window.extend(seg.iter().cloned());
        let tags = self.tag(&window, start - ctx)?;
        let finalized = finalize_all(zip_tagged(&seg, &tags[ctx..]));
        self.prev_segment = seg;
        Ok(StepResult {
            finalized,
            hypothesis: Vec::new(),
        })
    }

    fn push_right_context(
        &mut self,
        seg: Vec<Token>,
        start: usize,
    ) -> Result<StepResult, StreamError> {
        if seg.is_empty() {
            return Ok(StepResult {
                finalized: Vec::new(),
                hypothesis: self.right_context_hypothesis(start)?,
            });
        }
        let mut finalized = Vec::new();
        if let Some(held) = &self.held {
            let n = held.len();
            let mut window = held.clone();
            window.extend(seg.iter().cloned());
            let tags = self.tag(&window, start - n)?;
            let mut pending = std::mem::take(&mut self.committed);
            pending.extend(zip_tagged(held, &tags[..n]));
            let (sentences, mut rest) = split_sentences(pending);
            finalized = sentences;
            let cap = self.config.max_buffer_tokens;
            while rest.len() > cap {
                let tail = rest.split_off(cap);
                finalized.push(Sentence::terminated(rest).expect("non-empty chunk"));
                rest = tail;
            }
            self.committed = rest;
        }
        self.held = Some(seg);
        let end = start + self.held.as_ref().map_or(0, Vec::len);
        Ok(StepResult {
            finalized,
            hypothesis: self.right_context_hypothesis(end)?,
        })
    }

    fn right_context_hypothesis(&self, end: usize) -> Result<Vec<TaggedToken>, StreamError> {
        let mut hyp = self.committed.clone();
        if let Some(held) = &self.held {
            let tags = self.tag(held, end - held.len())?;
            hyp.extend(zip_tagged(held, &tags));
        }
        Ok(hyp)
    }
}

fn zip_tagged(tokens: &[Token], tags: &[PunctTag]) -> Vec<TaggedToken> {
    tokens
        .iter()
        .cloned()
        .zip(tags.iter().copied())
        .map(|(t, g)| TaggedToken::new(t, g))
        .collect()
}

/// Splits at every boundary and closes any unterminated remainder with a
/// forced PERIOD.
fn finalize_all(tagged: Vec<TaggedToken>) -> Vec<Sentence> {
    let (mut sentences, rest) = split_sentences(tagged);
    if !rest.is_empty() {
        sentences.push(Sentence::terminated(rest).expect("non-empty remainder"));
    }
    sentences
}

/// Runs a whole pre-segmented stream through a fresh session and returns
/// every sentence in order.
pub fn run_batch<T: Tagger + ?Sized>(
    tokens: &[Token],
    segments: &[Segment],
    config: SessionConfig,
    tagger: &T,
) -> Result<Vec<Sentence>, StreamError> {
    let total: usize = segments.iter().map(Segment::len).sum();
    if total != tokens.len()
        || !segments
            .iter()
            .flat_map(|s| &s.tokens)
            .zip(tokens)
            .all(|(a, b)| a == b)
    {
        return Err(StreamError::SegmentationMismatch);
    }
    let mut session = Session::new(config, tagger);
    let mut out = Vec::new();
    for seg in segments {
        out.extend(session.push_segment(seg.clone())?.finalized);
    }
    out.extend(session.flush()?.finalized);
    Ok(out)
}

/// Flattens sentences back into one tag per token.
pub fn sentence_tags(sentences: &[Sentence]) -> Vec<PunctTag> {
    sentences.iter().flat_map(Sentence::tags).collect()
}
