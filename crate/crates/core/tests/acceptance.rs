//! Acceptance run: eight criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so the summary is always
//! printed; exits non-zero if any criterion fails.

use std::fs::File;
use std::io::{BufReader, Cursor};
use std::path::PathBuf;
use std::time::Instant;

use flate2::read::MultiGzDecoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use streampunct::cli;
use streampunct::datapipe::{
    prepare_paragraphs, split_corpus, strip_and_tag, write_labeled, LabeledExample, Paragraph,
};
use streampunct::experiment::{run_grid, GridOptions, GridTagger};
use streampunct::metrics::{evaluate, fbeta, relative_gain};
use streampunct::render::render;
use streampunct::segsim::{SegKind, SegPolicy};
use streampunct::stream::{run_batch, sentence_tags, Mode, Session, SessionConfig};
use streampunct::synth;
use streampunct::tagger::{
    load_model, predict_linear, save_model, train, LinearTaggerModel, OracleTagger, Tagger,
    TaggerError, TrainOptions,
};
use streampunct::token::{PunctTag, Segment, Token};

type Outcome = Result<String, String>;

fn criterion_1_metric_arithmetic() -> Outcome {
    // (P, R, beta, published integer)
    let rows = [
        (64.0, 82.0, 1.0, 72.0),
        (64.0, 82.0, 0.5, 67.0),
        (80.0, 69.0, 1.0, 74.0),
        (80.0, 69.0, 0.5, 78.0),
        (79.0, 69.0, 1.0, 73.0),
        (79.0, 69.0, 0.5, 77.0),
    ];
    let mut misses = Vec::new();
    let mut shown = Vec::new();
    for (p, r, b, want) in rows {
        let got = fbeta(p, r, b);
        shown.push(format!("F{b}({p},{r})={got:.2}"));
        if (got - want).abs() > 0.5 {
            misses.push(format!("F{b}({p},{r})={got:.2}, expected {want}±0.5"));
        }
    }
    let gains = [(72.0, 73.0, 1.4, 0.05), (67.0, 78.0, 15.8, 1.0)];
    for (b, c, want, tol) in gains {
        let g = relative_gain(b, c).map_err(|e| e.to_string())?;
        if (g - want).abs() > tol {
            misses.push(format!("gain {b}->{c}={g:.2}, expected {want}±{tol}"));
        }
    }
    if misses.is_empty() {
        Ok(shown.join(" "))
    } else {
        Err(misses.join("; "))
    }
}

fn criterion_2_segmentation_invariance() -> Outcome {
    let (sentences, ex) = synth::sentence_stream(500, 2024);
    let tokens = ex.tokens().to_vec();
    let oracle = OracleTagger::from_example(&ex);
    let config = SessionConfig::new(Mode::Streaming, tokens.len()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let trials = 1000;
    let mut worst_f05 = 100.0f64;
    let mut worst_f1 = 100.0f64;
    for trial in 0..trials {
        let max_len = rng.gen_range(1..=40);
        let mut segments = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let n = rng.gen_range(0..=max_len).min(tokens.len() - i);
            segments.push(Segment::new(tokens[i..i + n].to_vec(), segments.len()));
            i += n;
        }
        let out = run_batch(&tokens, &segments, config, &oracle).map_err(|e| e.to_string())?;
        if out != sentences {
            return Err(format!(
                "partition {trial} ({} segments) changed the sentences",
                segments.len()
            ));
        }
        let report = evaluate(ex.tags(), &sentence_tags(&out)).map_err(|e| e.to_string())?;
        worst_f1 = worst_f1.min(report.punctuation.overall.f1);
        worst_f05 = worst_f05.min(report.segmentation.f05);
    }
    if worst_f1 != 100.0 || worst_f05 != 100.0 {
        return Err(format!("min punct F1 {worst_f1}, min seg F0.5 {worst_f05}"));
    }
    Ok(format!(
        "{trials} partitions of {} sentences / {} tokens reproduce the reference; punct F1=100, seg F0.5=100",
        sentences.len(),
        tokens.len()
    ))
}

fn corpus_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sotu_paragraphs.txt.gz")
}

struct RealData {
    paragraphs: usize,
    valid: Vec<LabeledExample>,
    model: LinearTaggerModel,
    mean_sentence_len: f64,
}

fn load_real_data() -> Result<RealData, String> {
    let file =
        File::open(corpus_path()).map_err(|e| format!("{}: {e}", corpus_path().display()))?;
    let reader = BufReader::new(MultiGzDecoder::new(file));
    let mut all = Vec::new();
    prepare_paragraphs(reader, 250, |ex| {
        all.push(ex);
        Ok(())
    })
    .map_err(|e| e.to_string())?;
    let paragraphs = all.len();
    let split = split_corpus(all, 0.1, 50_000, 7);
    let model = train(&split.train, &TrainOptions::default()).map_err(|e| e.to_string())?;
    let (tokens, boundaries) = split.valid.iter().fold((0usize, 0usize), |(t, b), ex| {
        (
            t + ex.len(),
            b + ex.tags().iter().filter(|t| t.is_boundary()).count(),
        )
    });
    Ok(RealData {
        paragraphs,
        valid: split.valid,
        model,
        mean_sentence_len: tokens as f64 / boundaries.max(1) as f64,
    })
}

fn real_policy(data: &RealData) -> SegPolicy {
    let mean = ((data.mean_sentence_len / 2.0).floor() as usize).max(1);
    SegPolicy::new(SegKind::PauseNoise, mean, mean * 5, 0.3, 11).expect("valid policy")
}

fn criteria_3_4(data: &RealData) -> (Outcome, Outcome) {
    if data.paragraphs < 10_000 {
        let e = format!("corpus has {} paragraphs, need 10000", data.paragraphs);
        return (Err(e.clone()), Err(e));
    }
    let policy = real_policy(data);
    let grid = match run_grid(
        &data.valid,
        GridTagger::Shared(&data.model),
        &[policy],
        &Mode::ALL,
        &GridOptions::default(),
    ) {
        Ok(g) => g,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let label = policy.label();
    let seg = |m: Mode| {
        grid.cell(m, &label)
            .expect("cell present")
            .report
            .segmentation
            .clone()
    };
    let (ins, lc, rc, st) = (
        seg(Mode::InSegment),
        seg(Mode::LeftContext),
        seg(Mode::RightContext),
        seg(Mode::Streaming),
    );

    let setup = format!(
        "{} paragraphs, {} held out, mean sentence {:.1} tokens, {}",
        data.paragraphs,
        data.valid.len(),
        data.mean_sentence_len,
        label
    );
    let c3 = format!(
        "{setup}: STREAMING F0.5 {:.1} vs IN_SEGMENT F0.5 {:.1}; IN_SEGMENT P {:.1} R {:.1}",
        st.f05, ins.f05, ins.precision, ins.recall
    );
    let r3 = if st.f05 > ins.f05 && ins.recall > ins.precision {
        Ok(c3)
    } else {
        Err(c3)
    };

    let c4 = format!(
        "F0.5 RC {:.1} >= LC {:.1} >= IN {:.1}; gaps RC {:+.1} vs LC {:+.1}",
        rc.f05,
        lc.f05,
        ins.f05,
        rc.f05 - ins.f05,
        lc.f05 - ins.f05
    );
    let r4 = if rc.f05 >= lc.f05 && lc.f05 >= ins.f05 && rc.f05 - ins.f05 > lc.f05 - ins.f05 {
        Ok(c4)
    } else {
        Err(c4)
    };
    (r3, r4)
}

fn criterion_5_round_trip() -> Outcome {
    let examples = synth::paragraphs(10_000, 5);
    for (i, ex) in examples.iter().enumerate() {
        let text = render(&ex.tagged(), i % 2 == 0);
        let para =
            Paragraph::new(text.clone()).ok_or_else(|| format!("example {i} rendered empty"))?;
        let back = strip_and_tag(&para).map_err(|e| format!("example {i}: {e}"))?;
        if &back != ex {
            return Err(format!("example {i} differs after round trip: {text:?}"));
        }
    }
    Ok(format!("{} examples, 100% exact", examples.len()))
}

/// Tags depend on absolute position, window offset and window length, so
/// every re-tag of the same token can disagree with the last one.
struct NoisyTagger(u64);

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl Tagger for NoisyTagger {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        self.predict_at(tokens, 0)
    }

    fn predict_at(&self, tokens: &[Token], offset: usize) -> Result<Vec<PunctTag>, TaggerError> {
        Ok((0..tokens.len())
            .map(|i| {
                let h = mix(self.0
                    ^ mix(((offset + i) as u64) << 20
                        ^ (offset as u64) << 8
                        ^ tokens.len() as u64));
                match h % 10 {
                    0 => PunctTag::Period,
                    1 => PunctTag::Question,
                    2 | 3 => PunctTag::Comma,
                    _ => PunctTag::None,
                }
            })
            .collect())
    }
}

fn criterion_6_buffer_and_conservation() -> Outcome {
    let sessions = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut steps = 0usize;
    let vocab: Vec<Token> = ["a", "b", "c", "d", "e"]
        .iter()
        .map(|w| Token::new(*w).unwrap())
        .collect();
    for s in 0..sessions {
        let mode = Mode::ALL[s % 4];
        let cap = rng.gen_range(1..=60);
        let config = SessionConfig::new(mode, cap).map_err(|e| e.to_string())?;
        let tagger = NoisyTagger(rng.gen());
        let mut session = Session::new(config, &tagger);
        let (mut pushed, mut emitted) = (Vec::new(), Vec::new());
        for _ in 0..rng.gen_range(0..=25) {
            let n = rng.gen_range(0..=50);
            let seg: Vec<Token> = (0..n)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].clone())
                .collect();
            pushed.extend(seg.iter().cloned());
            let step = session.push_tokens(seg).map_err(|e| e.to_string())?;
            emitted.extend(step.finalized.iter().flat_map(|x| x.tokens().cloned()));
            steps += 1;
            if session.buffer().len() > cap {
                return Err(format!(
                    "session {s} ({mode}): buffer {} > cap {cap}",
                    session.buffer().len()
                ));
            }
            let mut seen = emitted.clone();
            seen.extend(session.pending_tokens());
            if seen != pushed {
                return Err(format!(
                    "session {s} ({mode}): emitted ++ pending != pushed"
                ));
            }
        }
        let step = session.flush().map_err(|e| e.to_string())?;
        emitted.extend(step.finalized.iter().flat_map(|x| x.tokens().cloned()));
        if emitted != pushed || !session.pending_tokens().is_empty() {
            return Err(format!(
                "session {s} ({mode}): tokens lost or duplicated at flush"
            ));
        }
    }
    Ok(format!(
        "{sessions} sessions, {steps} steps, zero violations"
    ))
}

fn criterion_7_locality(model: &LinearTaggerModel, probe: &[LabeledExample]) -> Outcome {
    let (lb, la) = (model.look_behind(), model.look_ahead());
    let vocab: Vec<Token> = probe
        .iter()
        .flat_map(|e| e.tokens().iter().cloned())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut trials = 0;
    while trials < 1000 {
        let ex = &probe[rng.gen_range(0..probe.len())];
        let n = ex.len();
        if n < lb + la + 3 {
            continue;
        }
        let i = rng.gen_range(0..n);
        let far: Vec<usize> = (0..n).filter(|&j| j + lb < i || j > i + la).collect();
        if far.is_empty() {
            continue;
        }
        let j = far[rng.gen_range(0..far.len())];
        let mut mutated = ex.tokens().to_vec();
        mutated[j] = vocab[rng.gen_range(0..vocab.len())].clone();
        let before = predict_linear(model, ex.tokens())[i];
        let after = predict_linear(model, &mutated)[i];
        if before != after {
            return Err(format!(
                "trial {trials}: changing position {j} moved the tag at {i}"
            ));
        }
        trials += 1;
    }
    Ok(format!(
        "{trials} mutation trials outside a {lb}/{la} window, zero violations"
    ))
}

fn criterion_8_persistence(model: &LinearTaggerModel, probe: &[LabeledExample]) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.txt");
    save_model(model, &path).map_err(|e| e.to_string())?;
    let loaded = load_model(&path).map_err(|e| e.to_string())?;

    let write_hyp = |m: &LinearTaggerModel, name: &str| -> Result<PathBuf, String> {
        let mut buf = Vec::new();
        for ex in probe {
            let tags = predict_linear(m, ex.tokens());
            write_labeled(
                &mut buf,
                &LabeledExample::new(ex.tokens().to_vec(), tags).unwrap(),
            )
            .unwrap();
        }
        let p = dir.path().join(name);
        std::fs::write(&p, buf).map_err(|e| e.to_string())?;
        Ok(p)
    };
    let reference = dir.path().join("ref.jsonl");
    let mut buf = Vec::new();
    for ex in probe {
        write_labeled(&mut buf, ex).unwrap();
    }
    std::fs::write(&reference, buf).map_err(|e| e.to_string())?;
    let h1 = write_hyp(model, "hyp-trained.jsonl")?;
    let h2 = write_hyp(&loaded, "hyp-loaded.jsonl")?;
    if std::fs::read(&h1).unwrap() != std::fs::read(&h2).unwrap() {
        return Err("loaded model predicts differently".into());
    }

    let eval = |hyp: &PathBuf, format: &str| -> Result<Vec<u8>, String> {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let args = [
            "streampunct".into(),
            "eval".into(),
            "--reference".into(),
            reference.clone().into_os_string(),
            "--hypothesis".into(),
            hyp.clone().into_os_string(),
            "--format".into(),
            format.into(),
        ];
        let code = cli::run(args, &mut Cursor::new(Vec::new()), &mut out, &mut err);
        if code != 0 {
            return Err(String::from_utf8_lossy(&err).into_owned());
        }
        Ok(out)
    };
    for format in ["table", "jsonl"] {
        if eval(&h1, format)? != eval(&h2, format)? {
            return Err(format!("eval {format} reports differ"));
        }
    }
    Ok(format!(
        "{} probe examples, identical predictions and byte-identical eval reports",
        probe.len()
    ))
}

fn main() {
    let mut results: Vec<(u8, &str, Outcome, f64)> = Vec::new();
    let mut run = |n: u8, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        results.push((n, name, r, t.elapsed().as_secs_f64()));
    };

    run(1, "metric arithmetic", &mut criterion_1_metric_arithmetic);
    run(
        2,
        "segmentation invariance (oracle)",
        &mut criterion_2_segmentation_invariance,
    );

    let t = Instant::now();
    let data = load_real_data();
    let load_secs = t.elapsed().as_secs_f64();
    match &data {
        Ok(d) => {
            let (r3, r4) = criteria_3_4(d);
            results.push((3, "over-segmentation reproduction", r3, load_secs));
            results.push((4, "context-mode ordering", r4, 0.0));
        }
        Err(e) => {
            results.push((
                3,
                "over-segmentation reproduction",
                Err(e.clone()),
                load_secs,
            ));
            results.push((4, "context-mode ordering", Err(e.clone()), 0.0));
        }
    }

    let mut run = |n: u8, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        results.push((n, name, r, t.elapsed().as_secs_f64()));
    };
    run(5, "pipeline round trip", &mut criterion_5_round_trip);
    run(
        6,
        "buffer bound and token conservation",
        &mut criterion_6_buffer_and_conservation,
    );
    match &data {
        Ok(d) => {
            run(7, "tagger locality", &mut || {
                criterion_7_locality(&d.model, &d.valid)
            });
            let probe: Vec<LabeledExample> = d.valid.iter().take(1000).cloned().collect();
            run(8, "model persistence", &mut || {
                if probe.len() < 1000 {
                    return Err(format!("only {} probe examples", probe.len()));
                }
                criterion_8_persistence(&d.model, &probe)
            });
        }
        Err(e) => {
            run(7, "tagger locality", &mut || Err(e.clone()));
            run(8, "model persistence", &mut || Err(e.clone()));
        }
    }

    println!();
    let mut failed = 0;
    for (n, name, r, secs) in &results {
        match r {
            Ok(detail) => println!("criterion {n} PASS [{name}] ({secs:.1}s): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n} FAIL [{name}] ({secs:.1}s): {detail}");
            }
        }
    }
    println!(
        "\nacceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
