//! Scoring: per-class punctuation, merged-boundary segmentation, F-beta and
//! relative gains.
//!
//!     cargo run --example evaluate

use streampunct::metrics::{evaluate, fbeta, relative_gain};
use streampunct::token::PunctTag::*;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let reference = [
        None, None, Comma, None, Period, None, None, Question, None, Comma, None, Period,
    ];
    let baseline = [
        None, None, None, Period, Period, None, Period, Question, Period, Comma, None, Period,
    ];
    let improved = [
        None, None, Comma, None, Period, None, None, Period, None, None, None, Period,
    ];

    let base = evaluate(&reference, &baseline)?;
    let better = evaluate(&reference, &improved)?.with_gains_over(&base);
    println!(
        "baseline\n{}\nimproved\n{}",
        base.to_table(),
        better.to_table()
    );

    // Turning published precision/recall pairs back into F scores.
    for (p, r) in [(64.0, 82.0), (71.0, 70.0), (80.0, 69.0)] {
        println!(
            "P={p} R={r}: F1={:.1} F0.5={:.1}",
            fbeta(p, r, 1.0),
            fbeta(p, r, 0.5)
        );
    }
    println!("F0.5 67 -> 78 is a {:.1}% gain", relative_gain(67.0, 78.0)?);
    Ok(())
}
