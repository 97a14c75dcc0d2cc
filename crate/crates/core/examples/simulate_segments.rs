//! What the decoder-segmentation simulator produces under each policy.
//!
//!     cargo run --example simulate_segments

use streampunct::segsim::{mid_sentence_cuts, simulate, SegKind, SegPolicy};
use streampunct::synth;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (_, ex) = synth::sentence_stream(30, 1);
    let policies = [
        SegPolicy::fixed(6)?,
        SegPolicy::new(SegKind::Geometric, 6, 30, 0.0, 1)?,
        SegPolicy::new(SegKind::PauseNoise, 6, 30, 0.0, 1)?,
        SegPolicy::new(SegKind::PauseNoise, 6, 30, 0.3, 1)?,
        SegPolicy::new(SegKind::PauseNoise, 6, 30, 1.0, 1)?,
    ];
    println!(
        "{} tokens, {} sentences\n",
        ex.len(),
        ex.tags().iter().filter(|t| t.is_boundary()).count()
    );
    for p in policies {
        let segs = simulate(ex.tokens(), ex.tags(), &p)?;
        let first: Vec<String> = segs
            .iter()
            .take(4)
            .map(|s| {
                s.tokens
                    .iter()
                    .map(|t| t.as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        println!(
            "{:<40} {:>3} segments, {:>3} cut mid-sentence  | {}",
            p.label(),
            segs.len(),
            mid_sentence_cuts(&segs, ex.tags()),
            first.join(" / ")
        );
    }
    Ok(())
}
