//! The full comparison: train on the speech corpus, then replay the
//! held-out paragraphs through every decoding mode under noisy decoder
//! segmentation.
//!
//!     cargo run --release --example experiment_grid

use std::fs::File;
use std::io::BufReader;

use flate2::read::MultiGzDecoder;
use streampunct::datapipe::{prepare_paragraphs, split_corpus};
use streampunct::experiment::{run_grid, GridOptions, GridTagger};
use streampunct::segsim::{SegKind, SegPolicy};
use streampunct::stream::Mode;
use streampunct::tagger::{train, TrainOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = concat!(env!("CARGO_MANIFEST_DIR"), "/data/sotu_paragraphs.txt.gz");
    let mut all = Vec::new();
    prepare_paragraphs(
        BufReader::new(MultiGzDecoder::new(File::open(corpus)?)),
        250,
        |ex| {
            all.push(ex);
            Ok(())
        },
    )?;
    let split = split_corpus(all, 0.1, 50_000, 7);
    let model = train(&split.train, &TrainOptions::default())?;

    let policies = [
        SegPolicy::new(SegKind::PauseNoise, 14, 70, 0.3, 11)?,
        SegPolicy::new(SegKind::PauseNoise, 8, 40, 0.0, 11)?,
        SegPolicy::new(SegKind::PauseNoise, 14, 70, 1.0, 11)?,
    ];
    let grid = run_grid(
        &split.valid,
        GridTagger::Shared(&model),
        &policies,
        &Mode::ALL,
        &GridOptions::default(),
    )?;
    print!("{}", grid.to_table());

    // The oracle shows the ceiling: streaming recovers every sentence no
    // matter where the cuts fall.
    let oracle = run_grid(
        &split.valid,
        GridTagger::Oracle,
        &policies[1..2],
        &Mode::ALL,
        &GridOptions::default(),
    )?;
    print!("\noracle tagger\n{}", oracle.to_table());
    Ok(())
}
