//! Train the averaged-perceptron tagger on the bundled speech corpus, save
//! it, reload it, and punctuate a few unpunctuated lines.
//!
//!     cargo run --release --example train_tagger [-- model.txt]

use std::fs::File;
use std::io::BufReader;

use flate2::read::MultiGzDecoder;
use streampunct::datapipe::{prepare_paragraphs, split_corpus};
use streampunct::metrics::evaluate;
use streampunct::render::render;
use streampunct::tagger::{load_model, predict_linear, save_model, train, TrainOptions};
use streampunct::token::{tokenize, TaggedToken};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "target/sotu-model.txt".into());
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
    println!("training on {} paragraphs", split.train.len());

    let model = train(&split.train, &TrainOptions::default())?;
    save_model(&model, &out)?;
    let model = load_model(&out)?;
    println!("{} features, saved to {out}", model.num_features());

    let (mut r, mut h) = (Vec::new(), Vec::new());
    for ex in &split.valid {
        r.extend_from_slice(ex.tags());
        h.extend(predict_linear(&model, ex.tokens()));
    }
    println!(
        "\nheld-out, whole paragraphs:\n{}",
        evaluate(&r, &h)?.to_table()
    );

    for line in [
        "we must act now because the future of our children depends on it what else can we do",
        "the congress has done its part the rest is up to the people",
    ] {
        let tokens = tokenize(line);
        let tags = predict_linear(&model, &tokens);
        let tagged: Vec<_> = tokens
            .into_iter()
            .zip(tags)
            .map(|(t, g)| TaggedToken::new(t, g))
            .collect();
        println!("{}", render(&tagged, true));
    }
    Ok(())
}
