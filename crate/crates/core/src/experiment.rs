//! The mode × segmentation-policy comparison grid.
//!
//! Every cell replays the same test streams, cut by the same seeded
//! segmenter, through one decoding mode, and scores the result. Gains are
//! reported against IN_SEGMENT under the same policy.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datapipe::{read_labeled_all, DataError, LabeledExample};
use crate::metrics::{evaluate, verify_alignment, EvalReport, MetricsError};
use crate::segsim::{simulate, SegError, SegPolicy};
use crate::stream::{
    run_batch, sentence_tags, Mode, SessionConfig, StreamError, DEFAULT_MAX_BUFFER_TOKENS,
};
use crate::tagger::{
    load_model, ExternalTagger, LinearTaggerModel, ModelError, OracleTagger, Tagger, TaggerError,
};

/// Paragraphs per simulated session unless configured otherwise.
pub const DEFAULT_SESSION_PARAGRAPHS: usize = 10;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("an experiment needs at least one mode and one policy")]
    EmptyGrid,
    #[error("session_paragraphs must be at least 1")]
    BadSessionSize,
    #[error("unknown tagger spec {0:?}; use oracle, model:PATH or external:COMMAND")]
    BadTaggerSpec(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Segmentation(#[from] SegError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaggerSpec {
    /// Reference tags of the test data itself.
    Oracle,
    Model(PathBuf),
    External(String),
}

impl std::str::FromStr for TaggerSpec {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "oracle" {
            Ok(TaggerSpec::Oracle)
        } else if let Some(p) = s.strip_prefix("model:") {
            Ok(TaggerSpec::Model(p.into()))
        } else if let Some(c) = s.strip_prefix("external:") {
            Ok(TaggerSpec::External(c.into()))
        } else {
            Err(ExperimentError::BadTaggerSpec(s.into()))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub corpus: PathBuf,
    pub tagger: TaggerSpec,
    pub policies: Vec<SegPolicy>,
    pub modes: Vec<Mode>,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub max_buffer_tokens: usize,
    pub session_paragraphs: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.modes.is_empty() || self.policies.is_empty() {
            return Err(ExperimentError::EmptyGrid);
        }
        if self.session_paragraphs == 0 {
            return Err(ExperimentError::BadSessionSize);
        }
        for p in &self.policies {
            p.validate()?;
        }
        Ok(())
    }

    pub fn grid_options(&self) -> GridOptions {
        GridOptions {
            seed: self.seed,
            max_buffer_tokens: self.max_buffer_tokens,
            session_paragraphs: self.session_paragraphs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridOptions {
    pub seed: u64,
    pub max_buffer_tokens: usize,
    pub session_paragraphs: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            seed: 0,
            max_buffer_tokens: DEFAULT_MAX_BUFFER_TOKENS,
            session_paragraphs: DEFAULT_SESSION_PARAGRAPHS,
        }
    }
}

/// Where predictions come from in a grid run.
pub enum GridTagger<'a> {
    /// A fresh oracle over each session's reference.
    Oracle,
    Shared(&'a dyn Tagger),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub mode: Mode,
    pub policy: String,
    pub segments: usize,
    pub tokens: usize,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub cells: Vec<CellResult>,
}

impl GridReport {
    pub fn cell(&self, mode: Mode, policy: &str) -> Option<&CellResult> {
        self.cells
            .iter()
            .find(|c| c.mode == mode && c.policy == policy)
    }

    pub fn to_jsonl(&self) -> String {
        self.cells
            .iter()
            .map(|c| serde_json::to_string(c).expect("report serializes") + "\n")
            .collect()
    }

    /// One row per cell: punctuation F1, segmentation P/R/F1/F0.5 and gains
    /// over IN_SEGMENT. Values rounded to integers, gains to one decimal.
    pub fn to_table(&self) -> String {
        use std::fmt::Write as _;
        let width = self
            .cells
            .iter()
            .map(|c| c.policy.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:<13} {:>8}  {:>5} {:>5} {:>5} {:>5}  {:>8} {:>9}",
            "POLICY", "MODE", "PUNCT-F1", "P", "R", "F1", "F0.5", "F1-GAIN", "F0.5-GAIN"
        );
        for c in &self.cells {
            let s = &c.report.segmentation;
            let (g1, g05) = match &c.report.gains {
                Some(g) => (
                    format!("{:+.1}%", g.segmentation_f1),
                    format!("{:+.1}%", g.segmentation_f05),
                ),
                None => ("-".into(), "-".into()),
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:<13} {:>8.0}  {:>5.0} {:>5.0} {:>5.0} {:>5.0}  {:>8} {:>9}",
                c.policy,
                c.mode.name(),
                c.report.punctuation.overall.f1,
                s.precision,
                s.recall,
                s.f1,
                s.f05,
                g1,
                g05
            );
        }
        out
    }
}

/// Per-session segmentation seed, shared by every mode so that modes see
/// identical cuts.
fn session_seed(policy_seed: u64, base: u64, session: usize) -> u64 {
    policy_seed ^ base.rotate_left(17) ^ (session as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_cell(
    sessions: &[Vec<&LabeledExample>],
    tagger: &GridTagger<'_>,
    mode: Mode,
    policy: &SegPolicy,
    opts: &GridOptions,
) -> Result<CellResult, ExperimentError> {
    let config = SessionConfig::new(mode, opts.max_buffer_tokens)?;
    let (mut reference, mut hypothesis) = (Vec::new(), Vec::new());
    let mut n_segments = 0;
    for (i, group) in sessions.iter().enumerate() {
        let oracle = OracleTagger::from_examples(group.iter().copied());
        let tokens = oracle.reference_tokens();
        let tags = oracle.reference_tags();
        let p = policy.with_seed(session_seed(policy.seed, opts.seed, i));
        let segments = simulate(tokens, tags, &p)?;
        n_segments += segments.len();
        let sentences = match tagger {
            GridTagger::Oracle => run_batch(tokens, &segments, config, &oracle)?,
            GridTagger::Shared(t) => run_batch(tokens, &segments, config, *t)?,
        };
        let hyp_tokens: Vec<_> = sentences.iter().flat_map(|s| s.tokens().cloned()).collect();
        verify_alignment(tokens, &hyp_tokens)?;
        reference.extend_from_slice(tags);
        hypothesis.extend(sentence_tags(&sentences));
    }
    Ok(CellResult {
        mode,
        policy: policy.label(),
        segments: n_segments,
        tokens: reference.len(),
        report: evaluate(&reference, &hypothesis)?,
    })
}

/// Runs every (policy, mode) cell, in parallel across cells.
///
/// Rows come back grouped by policy, in the order given, with modes in the
/// order given; any cell with an IN_SEGMENT sibling gets gains filled in.
pub fn run_grid(
    examples: &[LabeledExample],
    tagger: GridTagger<'_>,
    policies: &[SegPolicy],
    modes: &[Mode],
    opts: &GridOptions,
) -> Result<GridReport, ExperimentError> {
    if modes.is_empty() || policies.is_empty() {
        return Err(ExperimentError::EmptyGrid);
    }
    if opts.session_paragraphs == 0 {
        return Err(ExperimentError::BadSessionSize);
    }
    let sessions: Vec<Vec<&LabeledExample>> = examples
        .iter()
        .filter(|e| !e.is_empty())
        .collect::<Vec<_>>()
        .chunks(opts.session_paragraphs)
        .map(<[_]>::to_vec)
        .collect();

    let grid: Vec<(&SegPolicy, Mode)> = policies
        .iter()
        .flat_map(|p| modes.iter().map(move |m| (p, *m)))
        .collect();
    let mut cells = grid
        .par_iter()
        .map(|(p, m)| run_cell(&sessions, &tagger, *m, p, opts))
        .collect::<Result<Vec<_>, _>>()?;

    let baselines: Vec<Option<EvalReport>> = cells
        .iter()
        .map(|c| {
            cells
                .iter()
                .find(|b| b.mode == Mode::InSegment && b.policy == c.policy)
                .map(|b| b.report.clone())
        })
        .collect();
    for (c, b) in cells.iter_mut().zip(baselines) {
        if let Some(b) = b {
            c.report = c.report.clone().with_gains_over(&b);
        }
    }
    Ok(GridReport { cells })
}

fn read_corpus(path: &Path) -> Result<Vec<LabeledExample>, ExperimentError> {
    Ok(read_labeled_all(BufReader::new(File::open(path)?))?)
}

/// Loads the corpus and tagger named by `spec`, runs the grid, and writes
/// `report.jsonl` and `report.txt` into the output directory if one is set.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<GridReport, ExperimentError> {
    spec.validate()?;
    let examples = read_corpus(&spec.corpus)?;
    let opts = spec.grid_options();
    let report = match &spec.tagger {
        TaggerSpec::Oracle => run_grid(
            &examples,
            GridTagger::Oracle,
            &spec.policies,
            &spec.modes,
            &opts,
        )?,
        TaggerSpec::Model(path) => {
            let model: LinearTaggerModel = load_model(path)?;
            run_grid(
                &examples,
                GridTagger::Shared(&model),
                &spec.policies,
                &spec.modes,
                &opts,
            )?
        }
        TaggerSpec::External(cmd) => {
            let ext = ExternalTagger::spawn(cmd)?;
            run_grid(
                &examples,
                GridTagger::Shared(&ext),
                &spec.policies,
                &spec.modes,
                &opts,
            )?
        }
    };
    if let Some(dir) = &spec.output_dir {
        std::fs::create_dir_all(dir)?;
        let mut w = BufWriter::new(File::create(dir.join("report.jsonl"))?);
        w.write_all(report.to_jsonl().as_bytes())?;
        w.flush()?;
        std::fs::write(dir.join("report.txt"), report.to_table())?;
    }
    Ok(report)
}
