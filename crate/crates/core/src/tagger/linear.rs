//! Averaged-perceptron punctuation tagger over a fixed token window.
//!
//! Each position is classified independently from the words in
//! `[i - look_behind, i + look_ahead]`. Offsets that fall outside the input
//! produce the [`PAD`] word, so the model learns what "no right context yet"
//! looks like.
//!
//! # Model file
//!
//! Plain UTF-8 text, one record per line, features sorted by name:
//!
//! ```text
//! streampunct-linear 1
//! look_behind 4
//! look_ahead 4
//! features 2
//! bias<TAB>0.25 -0.5 0.125 0
//! w0=right<TAB>-1 0 0.5 2.75
//! end
//! ```
//!
//! Weights are listed in tag order `O COMMA PERIOD QUESTION` using Rust's
//! shortest round-trip float formatting, so a load reproduces the exact
//! weights. Readers reject any version other than the one they were built for.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::{Tagger, TaggerError};
use crate::datapipe::LabeledExample;
use crate::token::{PunctTag, Token};

pub const PAD: &str = "<pad>";
pub const MODEL_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "streampunct-linear";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("training corpus is empty")]
    EmptyCorpus,
    #[error("epochs must be at least 1")]
    ZeroEpochs,
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt model file: {0}")]
    CorruptFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

type Weights = [f64; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTaggerModel {
    weights: HashMap<String, Weights>,
    look_behind: usize,
    look_ahead: usize,
    version: u32,
}

impl LinearTaggerModel {
    /// A model with no weights: every position falls to the `NONE` tie-break.
    pub fn zero(look_behind: usize, look_ahead: usize) -> Self {
        LinearTaggerModel {
            weights: HashMap::new(),
            look_behind,
            look_ahead,
            version: MODEL_FORMAT_VERSION,
        }
    }

    pub fn look_behind(&self) -> usize {
        self.look_behind
    }

    pub fn look_ahead(&self) -> usize {
        self.look_ahead
    }

    pub fn version(&self) -> u32 {
        self.version
    }

    pub fn num_features(&self) -> usize {
        self.weights.len()
    }

    fn tag_at(&self, tokens: &[Token], i: usize) -> PunctTag {
        let mut scores = [0.0f64; 4];
        for f in featurize(tokens, i, self.look_behind, self.look_ahead) {
            if let Some(w) = self.weights.get(&f) {
                for (s, x) in scores.iter_mut().zip(w) {
                    *s += x;
                }
            }
        }
        PunctTag::ALL[argmax(&scores)]
    }
}

impl Tagger for LinearTaggerModel {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        Ok(predict_linear(self, tokens))
    }
}

/// Highest score wins; ties go to the earliest tag in `PunctTag::ALL`.
fn argmax(scores: &Weights) -> usize {
    let mut best = 0;
    for k in 1..scores.len() {
        if scores[k] > scores[best] {
            best = k;
        }
    }
    best
}

fn word_at(tokens: &[Token], pos: isize) -> &str {
    if pos < 0 {
        return PAD;
    }
    tokens.get(pos as usize).map_or(PAD, Token::as_str)
}

fn position_bucket(i: usize) -> &'static str {
    match i {
        0 => "0",
        1 => "1",
        2 => "2",
        3 => "3",
        4..=5 => "4-5",
        6..=9 => "6-9",
        10..=19 => "10-19",
        _ => "20+",
    }
}

/// Feature strings for position `i`.
///
/// Emits a bias, the current word, every neighbour within the window keyed by
/// signed offset, the bigram across the gap after `i` (and the one after it),
/// a digit-shape flag, and a bucket of the distance from the window start.
pub fn featurize(tokens: &[Token], i: usize, look_behind: usize, look_ahead: usize) -> Vec<String> {
    assert!(i < tokens.len(), "position {i} out of range");
    let at = |k: isize| word_at(tokens, i as isize + k);
    let w0 = at(0);
    let mut f = Vec::with_capacity(6 + look_behind + look_ahead);
    f.push("bias".to_string());
    f.push(format!("w0={w0}"));
    for k in 1..=look_behind as isize {
        f.push(format!("w-{k}={}", at(-k)));
    }
    for k in 1..=look_ahead as isize {
        f.push(format!("w+{k}={}", at(k)));
    }
    if look_ahead >= 1 {
        f.push(format!("gap={w0}|{}", at(1)));
    }
    if look_ahead >= 2 {
        f.push(format!("next={}|{}", at(1), at(2)));
    }
    if w0.chars().any(|c| c.is_ascii_digit()) {
        f.push("shape=num".to_string());
    }
    f.push(format!("pos={}", position_bucket(i)));
    f
}

pub fn predict_linear(model: &LinearTaggerModel, tokens: &[Token]) -> Vec<PunctTag> {
    (0..tokens.len()).map(|i| model.tag_at(tokens, i)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOptions {
    pub epochs: usize,
    pub look_behind: usize,
    pub look_ahead: usize,
    pub seed: u64,
    /// Chance of adding a copy of each example cut at a random point, so the
    /// model also sees inputs that stop mid-sentence.
    pub prefix_augmentation: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            epochs: 5,
            look_behind: 4,
            look_ahead: 4,
            seed: 0,
            prefix_augmentation: 0.5,
        }
    }
}

struct Instance<'a> {
    features: Vec<Vec<u32>>,
    gold: &'a [PunctTag],
}

/// Averaged perceptron with lazy weight averaging. Deterministic for a given
/// corpus order and seed.
struct Perceptron {
    weights: Vec<Weights>,
    totals: Vec<Weights>,
    stamps: Vec<[u64; 4]>,
    clock: u64,
}

impl Perceptron {
    fn new(n: usize) -> Self {
        Perceptron {
            weights: vec![[0.0; 4]; n],
            totals: vec![[0.0; 4]; n],
            stamps: vec![[0; 4]; n],
            clock: 0,
        }
    }

    fn guess(&self, feats: &[u32]) -> usize {
        let mut scores = [0.0; 4];
        for &f in feats {
            for (s, w) in scores.iter_mut().zip(&self.weights[f as usize]) {
                *s += w;
            }
        }
        argmax(&scores)
    }

    fn nudge(&mut self, f: usize, class: usize, delta: f64) {
        let elapsed = (self.clock - self.stamps[f][class]) as f64;
        self.totals[f][class] += elapsed * self.weights[f][class];
        self.stamps[f][class] = self.clock;
        self.weights[f][class] += delta;
    }

    fn step(&mut self, feats: &[u32], truth: usize) {
        self.clock += 1;
        let guess = self.guess(feats);
        if guess == truth {
            return;
        }
        for &f in feats {
            self.nudge(f as usize, truth, 1.0);
            self.nudge(f as usize, guess, -1.0);
        }
    }

    fn averaged(self) -> Vec<Weights> {
        let clock = self.clock.max(1) as f64;
        let now = self.clock;
        self.weights
            .iter()
            .zip(&self.totals)
            .zip(&self.stamps)
            .map(|((w, t), s)| {
                let mut avg = [0.0; 4];
                for k in 0..4 {
                    avg[k] = (t[k] + (now - s[k]) as f64 * w[k]) / clock;
                }
                avg
            })
            .collect()
    }
}

pub fn train(
    corpus: &[LabeledExample],
    opts: &TrainOptions,
) -> Result<LinearTaggerModel, ModelError> {
    if corpus.iter().all(LabeledExample::is_empty) {
        return Err(ModelError::EmptyCorpus);
    }
    if opts.epochs == 0 {
        return Err(ModelError::ZeroEpochs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut names: Vec<String> = Vec::new();
    let mut ids: HashMap<String, u32> = HashMap::new();
    let mut intern = |tokens: &[Token]| -> Vec<Vec<u32>> {
        (0..tokens.len())
            .map(|i| {
                featurize(tokens, i, opts.look_behind, opts.look_ahead)
                    .into_iter()
                    .map(|f| {
                        *ids.entry(f).or_insert_with_key(|k| {
                            names.push(k.clone());
                            (names.len() - 1) as u32
                        })
                    })
                    .collect()
            })
            .collect()
    };

    let mut instances = Vec::new();
    for ex in corpus.iter().filter(|e| !e.is_empty()) {
        instances.push(Instance {
            features: intern(ex.tokens()),
            gold: ex.tags(),
        });
        if ex.len() >= 2 && rng.gen_bool(opts.prefix_augmentation.clamp(0.0, 1.0)) {
            let cut = rng.gen_range(1..ex.len());
            instances.push(Instance {
                features: intern(&ex.tokens()[..cut]),
                gold: &ex.tags()[..cut],
            });
        }
    }

    let mut model = Perceptron::new(names.len());
    let mut order: Vec<usize> = (0..instances.len()).collect();
    for _ in 0..opts.epochs {
        order.shuffle(&mut rng);
        for &k in &order {
            let inst = &instances[k];
            for (feats, tag) in inst.features.iter().zip(inst.gold) {
                model.step(feats, tag.index());
            }
        }
    }

    let weights = names
        .into_iter()
        .zip(model.averaged())
        .filter(|(_, w)| w.iter().any(|x| *x != 0.0))
        .collect();
    Ok(LinearTaggerModel {
        weights,
        look_behind: opts.look_behind,
        look_ahead: opts.look_ahead,
        version: MODEL_FORMAT_VERSION,
    })
}

pub fn save_model(model: &LinearTaggerModel, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, model_to_string(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LinearTaggerModel, ModelError> {
    let text = fs::read_to_string(path)?;
    model_from_str(&text)
}

pub(crate) fn model_to_string(model: &LinearTaggerModel) -> String {
    let mut names: Vec<&String> = model.weights.keys().collect();
    names.sort();
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC} {}", model.version);
    let _ = writeln!(out, "look_behind {}", model.look_behind);
    let _ = writeln!(out, "look_ahead {}", model.look_ahead);
    let _ = writeln!(out, "features {}", names.len());
    for name in names {
        let w = &model.weights[name];
        let _ = writeln!(out, "{name}\t{:?} {:?} {:?} {:?}", w[0], w[1], w[2], w[3]);
    }
    out.push_str("end\n");
    out
}

fn corrupt(msg: impl Into<String>) -> ModelError {
    ModelError::CorruptFile(msg.into())
}

fn header_value(line: Option<&str>, key: &str) -> Result<usize, ModelError> {
    let line = line.ok_or_else(|| corrupt(format!("missing {key}")))?;
    line.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| corrupt(format!("bad {key} line: {line:?}")))
}

pub(crate) fn model_from_str(text: &str) -> Result<LinearTaggerModel, ModelError> {
    let mut lines = text.lines();
    let first = lines.next().ok_or_else(|| corrupt("empty file"))?;
    let version = first
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.strip_prefix(' '))
        .and_then(|v| v.parse::<u32>().ok())
        .ok_or_else(|| corrupt("missing header"))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version,
            expected: MODEL_FORMAT_VERSION,
        });
    }
    let look_behind = header_value(lines.next(), "look_behind")?;
    let look_ahead = header_value(lines.next(), "look_ahead")?;
    let count = header_value(lines.next(), "features")?;
    let mut weights = HashMap::with_capacity(count);
    for n in 0..count {
        let line = lines
            .next()
            .ok_or_else(|| corrupt(format!("truncated after {n} of {count} features")))?;
        let (name, values) = line
            .split_once('\t')
            .ok_or_else(|| corrupt(format!("bad feature line {line:?}")))?;
        let parsed: Vec<f64> = values
            .split(' ')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|_| corrupt(format!("bad weights for {name:?}")))?;
        let w: Weights = parsed
            .try_into()
            .map_err(|_| corrupt(format!("expected 4 weights for {name:?}")))?;
        if weights.insert(name.to_string(), w).is_some() {
            return Err(corrupt(format!("duplicate feature {name:?}")));
        }
    }
    if lines.next() != Some("end") {
        return Err(corrupt("missing end marker"));
    }
    Ok(LinearTaggerModel {
        weights,
        look_behind,
        look_ahead,
        version,
    })
}
