//! Command-line surface: `prepare`, `split`, `train`, `tag`, `simulate`,
//! `stream`, `eval` and `experiment`.
//!
//! Every command takes `--seed`, `--config FILE` and `--format`. A config
//! file is flat TOML whose keys are long flag names; flags given on the
//! command line win over it. Exit codes: 0 success, 1 usage, 2 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use flate2::read::MultiGzDecoder;
use thiserror::Error;

use crate::datapipe::{
    prepare_paragraphs, read_labeled_all, split_corpus, write_labeled, DataError, LabeledExample,
    DEFAULT_MAX_TOKENS, DEFAULT_VALID_CAP, DEFAULT_VALID_FRACTION,
};
use crate::experiment::{
    run_experiment, ExperimentError, ExperimentSpec, TaggerSpec, DEFAULT_SESSION_PARAGRAPHS,
};
use crate::metrics::{evaluate, verify_alignment, MetricsError};
use crate::render::render;
use crate::segsim::{simulate, SegError, SegKind, SegPolicy};
use crate::stream::{Mode, Session, SessionConfig, StreamError, DEFAULT_MAX_BUFFER_TOKENS};
use crate::tagger::{
    load_model, save_model, train, ExternalTagger, ModelError, OracleTagger, Tagger, TaggerError,
    TrainOptions,
};
use crate::token::{tokenize, Segment, TaggedToken, Token};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
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
    Experiment(#[from] ExperimentError),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
    #[error("bad input line {line}: {message}")]
    Input { line: usize, message: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            _ => 2,
        }
    }
}

impl From<io::Error> for CliError {
    fn from(source: io::Error) -> Self {
        CliError::Io {
            context: "i/o".into(),
            source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Jsonl,
    Table,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Seed for every random choice the command makes.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Flat TOML file of default flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct SegArgs {
    #[arg(long, default_value = "pause-noise")]
    pub seg_kind: SegKind,
    #[arg(long, default_value_t = 8)]
    pub seg_mean: usize,
    #[arg(long, default_value_t = 40)]
    pub seg_max: usize,
    #[arg(long, default_value_t = 0.0)]
    pub seg_affinity: f64,
}

impl SegArgs {
    fn policy(&self, seed: u64) -> Result<SegPolicy, SegError> {
        SegPolicy::new(
            self.seg_kind,
            self.seg_mean,
            self.seg_max,
            self.seg_affinity,
            seed,
        )
    }
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct TaggerArgs {
    /// Linear model file written by `train`.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Labeled file whose tags are replayed as predictions.
    #[arg(long)]
    pub oracle: Option<PathBuf>,
    /// Command speaking the line-delimited tagging protocol.
    #[arg(long)]
    pub external: Option<String>,
}

#[derive(Debug, Parser)]
#[command(
    name = "streampunct",
    version,
    about = "Streaming punctuation and sentence segmentation"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Paragraph-per-line text (optionally .gz) to labeled JSONL.
    Prepare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "-")]
        input: PathBuf,
        #[arg(long, default_value = "-")]
        output: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_TOKENS)]
        max_tokens: usize,
    },
    /// Seeded train/validation split of a labeled file.
    Split {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        train_out: PathBuf,
        #[arg(long)]
        valid_out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_VALID_FRACTION)]
        valid_fraction: f64,
        #[arg(long, default_value_t = DEFAULT_VALID_CAP)]
        valid_cap: usize,
    },
    /// Train the linear tagger.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 4)]
        look_behind: usize,
        #[arg(long, default_value_t = 4)]
        look_ahead: usize,
        #[arg(long, default_value_t = 0.5)]
        prefix_augmentation: f64,
    },
    /// Tag one window per input line. Lines are plain text or JSON with a
    /// `tokens` field; output is labeled JSONL, so `tag` can also serve as
    /// an external tagger.
    Tag {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tagger: TaggerArgs,
    },
    /// Cut a labeled file into decoder-style segments.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seg: SegArgs,
        #[arg(long, default_value = "-")]
        input: PathBuf,
    },
    /// Punctuate segments read line by line from standard input.
    Stream {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        tagger: TaggerArgs,
        #[arg(long, default_value = "streaming")]
        mode: Mode,
        #[arg(long, default_value_t = DEFAULT_MAX_BUFFER_TOKENS)]
        max_buffer_tokens: usize,
        #[arg(long)]
        no_capitalize: bool,
    },
    /// Score hypothesis tags against a reference; both labeled JSONL.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        hypothesis: PathBuf,
    },
    /// Run the mode × segmentation-policy grid.
    Experiment {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seg: SegArgs,
        #[arg(long)]
        corpus: PathBuf,
        /// oracle, model:PATH or external:COMMAND.
        #[arg(long, default_value = "oracle")]
        tagger: String,
        #[arg(long, value_delimiter = ',', action = ArgAction::Set,
              default_value = "in-segment,left-context,right-context,streaming")]
        modes: Vec<Mode>,
        /// Policies as kind:mean[:max[:affinity]], comma separated. Overrides
        /// the --seg-* flags.
        #[arg(long, value_delimiter = ',', action = ArgAction::Set)]
        policies: Vec<String>,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_MAX_BUFFER_TOKENS)]
        max_buffer_tokens: usize,
        #[arg(long, default_value_t = DEFAULT_SESSION_PARAGRAPHS)]
        session_paragraphs: usize,
    },
}

const SUBCOMMANDS: &[&str] = &[
    "prepare",
    "split",
    "train",
    "tag",
    "simulate",
    "stream",
    "eval",
    "experiment",
];

fn io_err(context: impl AsRef<Path>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.as_ref().display().to_string();
    move |source| CliError::Io { context, source }
}

fn toml_to_args(table: &toml::Table) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (key, value) in table {
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &toml::Value| -> Result<String, CliError> {
            match v {
                toml::Value::String(s) => Ok(s.clone()),
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                other => Err(CliError::Usage(format!(
                    "config key {key}: unsupported value {other}"
                ))),
            }
        };
        match value {
            toml::Value::Boolean(true) => out.push(flag.into()),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let joined = items
                    .iter()
                    .map(scalar)
                    .collect::<Result<Vec<_>, _>>()?
                    .join(",");
                out.push(format!("{flag}={joined}").into());
            }
            v => out.push(format!("{flag}={}", scalar(v)?).into()),
        }
    }
    Ok(out)
}

/// Splices config-file values in right after the subcommand name, so any
/// flag repeated later on the command line overrides them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = s.strip_prefix("--config=") {
            path = Some(p.into());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = std::fs::read_to_string(&path).map_err(io_err(&path))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("config {}: {e}", Path::new(&path).display())))?;
    let extra = toml_to_args(&table)?;
    let Some(at) = args
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.to_string_lossy().as_ref()))
    else {
        return Ok(args);
    };
    let mut out = args[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&args[at + 1..]);
    Ok(out)
}

fn open_input<'a>(
    path: &Path,
    stdin: &'a mut dyn BufRead,
) -> Result<Box<dyn BufRead + 'a>, CliError> {
    if path == Path::new("-") {
        return Ok(Box::new(stdin));
    }
    let file = File::open(path).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

fn open_output<'a>(
    path: &Path,
    stdout: &'a mut dyn Write,
) -> Result<Box<dyn Write + 'a>, CliError> {
    if path == Path::new("-") {
        Ok(Box::new(stdout))
    } else {
        Ok(Box::new(BufWriter::new(
            File::create(path).map_err(io_err(path))?,
        )))
    }
}

fn read_labeled_file(path: &Path) -> Result<Vec<LabeledExample>, CliError> {
    let mut empty = BufReader::new(io::empty());
    let examples = read_labeled_all(open_input(path, &mut empty)?)?;
    Ok(examples)
}

fn build_tagger(args: &TaggerArgs) -> Result<Box<dyn Tagger>, CliError> {
    if let Some(p) = &args.model {
        Ok(Box::new(load_model(p)?))
    } else if let Some(p) = &args.oracle {
        Ok(Box::new(OracleTagger::from_examples(&read_labeled_file(
            p,
        )?)))
    } else if let Some(c) = &args.external {
        Ok(Box::new(ExternalTagger::spawn(c)?))
    } else {
        Err(CliError::Usage(
            "one of --model, --oracle, --external is required".into(),
        ))
    }
}

/// A plain-text line is tokenized; a line starting with `{` must be JSON
/// with a `tokens` array of already-normalized tokens.
fn parse_tokens(line: &str, line_no: usize) -> Result<Vec<Token>, CliError> {
    let trimmed = line.trim();
    if trimmed.starts_with('{') {
        #[derive(serde::Deserialize)]
        struct Tokens {
            tokens: Vec<Token>,
        }
        let t: Tokens = serde_json::from_str(trimmed).map_err(|e| CliError::Input {
            line: line_no,
            message: e.to_string(),
        })?;
        Ok(t.tokens)
    } else {
        Ok(tokenize(trimmed))
    }
}

fn json_line(w: &mut dyn Write, value: &impl serde::Serialize) -> Result<(), CliError> {
    serde_json::to_writer(&mut *w, value).map_err(|e| CliError::Io {
        context: "output".into(),
        source: e.into(),
    })?;
    w.write_all(b"\n")?;
    Ok(())
}

fn cmd_prepare(
    input: &Path,
    output: &Path,
    max_tokens: usize,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let reader = open_input(input, stdin)?;
    let mut out = open_output(output, stdout)?;
    let stats = prepare_paragraphs(reader, max_tokens, |ex| write_labeled(&mut out, &ex))?;
    out.flush()?;
    writeln!(
        stderr,
        "prepare: wrote {}, dropped {} empty after cleaning, {} without a boundary within {} tokens",
        stats.written, stats.empty_after_cleaning, stats.no_boundary_within_limit, max_tokens
    )?;
    Ok(())
}

fn write_labeled_file(path: &Path, examples: &[LabeledExample]) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    for ex in examples {
        write_labeled(&mut w, ex)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_tag(
    tagger: &dyn Tagger,
    format: Format,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        if stdin.read_line(&mut line)? == 0 {
            return Ok(());
        }
        n += 1;
        let tokens = parse_tokens(&line, n)?;
        let tags = tagger.predict(&tokens)?;
        match format {
            Format::Jsonl => json_line(stdout, &LabeledExample::new(tokens, tags)?)?,
            Format::Table => {
                let tagged: Vec<_> = tokens
                    .into_iter()
                    .zip(tags)
                    .map(|(t, g)| TaggedToken::new(t, g))
                    .collect();
                writeln!(stdout, "{}", render(&tagged, true))?;
            }
        }
        stdout.flush()?;
    }
}

fn cmd_simulate(
    examples: &[LabeledExample],
    policy: &SegPolicy,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let (mut tokens, mut tags) = (Vec::new(), Vec::new());
    for ex in examples {
        tokens.extend_from_slice(ex.tokens());
        tags.extend_from_slice(ex.tags());
    }
    for seg in simulate(&tokens, &tags, policy)? {
        match format {
            Format::Jsonl => json_line(stdout, &seg)?,
            Format::Table => {
                let words: Vec<&str> = seg.tokens.iter().map(Token::as_str).collect();
                writeln!(stdout, "{}", words.join(" "))?;
            }
        }
    }
    Ok(())
}

fn cmd_stream(
    tagger: &dyn Tagger,
    config: SessionConfig,
    format: Format,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let capitalize = config.capitalize_output();
    let mut session = Session::new(config, tagger);
    let emit = |out: &mut dyn Write, step: crate::stream::StepResult| -> Result<(), CliError> {
        let record = step.to_record(capitalize);
        match format {
            Format::Jsonl => json_line(out, &record)?,
            Format::Table => {
                for s in &record.finalized {
                    writeln!(out, "{s}")?;
                }
            }
        }
        out.flush()?;
        Ok(())
    };
    let mut line = String::new();
    let mut n = 0;
    loop {
        line.clear();
        if stdin.read_line(&mut line)? == 0 {
            break;
        }
        n += 1;
        let tokens = parse_tokens(&line, n)?;
        let index = session.next_index();
        let step = session.push_segment(Segment::new(tokens, index))?;
        emit(stdout, step)?;
    }
    let step = session.flush()?;
    emit(stdout, step)
}

fn cmd_eval(
    reference: &Path,
    hypothesis: &Path,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    let flatten = |exs: Vec<LabeledExample>| {
        let (mut tokens, mut tags) = (Vec::new(), Vec::new());
        for ex in exs {
            let (a, b) = ex.into_parts();
            tokens.extend(a);
            tags.extend(b);
        }
        (tokens, tags)
    };
    let (ref_tokens, ref_tags) = flatten(read_labeled_file(reference)?);
    let (hyp_tokens, hyp_tags) = flatten(read_labeled_file(hypothesis)?);
    verify_alignment(&ref_tokens, &hyp_tokens)?;
    let report = evaluate(&ref_tags, &hyp_tags)?;
    match format {
        Format::Jsonl => json_line(stdout, &report)?,
        Format::Table => stdout.write_all(report.to_table().as_bytes())?,
    }
    Ok(())
}

fn dispatch(
    cli: Cli,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match cli.command {
        Command::Prepare {
            input,
            output,
            max_tokens,
            ..
        } => cmd_prepare(&input, &output, max_tokens, stdin, stdout, stderr),
        Command::Split {
            common,
            input,
            train_out,
            valid_out,
            valid_fraction,
            valid_cap,
        } => {
            if !(0.0..=1.0).contains(&valid_fraction) {
                return Err(CliError::Usage(format!(
                    "--valid-fraction {valid_fraction} outside [0, 1]"
                )));
            }
            let split = split_corpus(
                read_labeled_file(&input)?,
                valid_fraction,
                valid_cap,
                common.seed,
            );
            write_labeled_file(&train_out, &split.train)?;
            write_labeled_file(&valid_out, &split.valid)?;
            writeln!(
                stderr,
                "split: {} train, {} valid",
                split.train.len(),
                split.valid.len()
            )?;
            Ok(())
        }
        Command::Train {
            common,
            input,
            output,
            epochs,
            look_behind,
            look_ahead,
            prefix_augmentation,
        } => {
            if !(0.0..=1.0).contains(&prefix_augmentation) {
                return Err(CliError::Usage(
                    "--prefix-augmentation must be in [0, 1]".into(),
                ));
            }
            let corpus = read_labeled_file(&input)?;
            let opts = TrainOptions {
                epochs,
                look_behind,
                look_ahead,
                seed: common.seed,
                prefix_augmentation,
            };
            let model = train(&corpus, &opts)?;
            save_model(&model, &output)?;
            writeln!(
                stderr,
                "train: {} examples, {} features",
                corpus.len(),
                model.num_features()
            )?;
            Ok(())
        }
        Command::Tag { common, tagger } => {
            let t = build_tagger(&tagger)?;
            cmd_tag(
                t.as_ref(),
                common.format.unwrap_or(Format::Jsonl),
                stdin,
                stdout,
            )
        }
        Command::Simulate { common, seg, input } => {
            let policy = seg.policy(common.seed)?;
            let examples = read_labeled_all(open_input(&input, stdin)?)?;
            cmd_simulate(
                &examples,
                &policy,
                common.format.unwrap_or(Format::Jsonl),
                stdout,
            )
        }
        Command::Stream {
            common,
            tagger,
            mode,
            max_buffer_tokens,
            no_capitalize,
        } => {
            let config =
                SessionConfig::new(mode, max_buffer_tokens)?.with_capitalize(!no_capitalize);
            let t = build_tagger(&tagger)?;
            cmd_stream(
                t.as_ref(),
                config,
                common.format.unwrap_or(Format::Jsonl),
                stdin,
                stdout,
            )
        }
        Command::Eval {
            common,
            reference,
            hypothesis,
        } => cmd_eval(
            &reference,
            &hypothesis,
            common.format.unwrap_or(Format::Table),
            stdout,
        ),
        Command::Experiment {
            common,
            seg,
            corpus,
            tagger,
            modes,
            policies,
            output_dir,
            max_buffer_tokens,
            session_paragraphs,
        } => {
            let policies = if policies.is_empty() {
                vec![seg.policy(common.seed)?]
            } else {
                policies
                    .iter()
                    .map(|p| p.parse::<SegPolicy>().map(|p| p.with_seed(common.seed)))
                    .collect::<Result<_, _>>()?
            };
            let spec = ExperimentSpec {
                corpus,
                tagger: tagger
                    .parse::<TaggerSpec>()
                    .map_err(|e| CliError::Usage(e.to_string()))?,
                policies,
                modes,
                seed: common.seed,
                output_dir,
                max_buffer_tokens,
                session_paragraphs,
            };
            let report = run_experiment(&spec)?;
            match common.format.unwrap_or(Format::Table) {
                Format::Jsonl => stdout.write_all(report.to_jsonl().as_bytes())?,
                Format::Table => stdout.write_all(report.to_table().as_bytes())?,
            }
            Ok(())
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code; diagnostics go to `stderr`.
pub fn run<I, S>(
    args: I,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(cli, stdin, stdout, stderr) {
        Ok(()) => {
            let _ = stdout.flush();
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point used by the binary.
pub fn main_from_env() -> i32 {
    let stdin = io::stdin();
    let mut stdin = stdin.lock();
    let stdout = io::stdout();
    let mut stdout = stdout.lock();
    let stderr = io::stderr();
    let mut stderr = stderr.lock();
    run(std::env::args_os(), &mut stdin, &mut stdout, &mut stderr)
}
