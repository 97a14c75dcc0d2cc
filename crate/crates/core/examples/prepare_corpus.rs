//! Paragraph text → labeled examples → train/valid split.
//!
//!     cargo run --example prepare_corpus

use std::io::Cursor;

use streampunct::datapipe::{prepare_paragraphs, split_corpus, LabeledExample};
use streampunct::render::render;

const TEXT: &str = "\
It can happen in New York City, right? It happens all the time.
Mr Smith arrived late; nobody minded. The meeting went on...
?!?
We need three things: time, money, and patience. Do we have them?
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut examples: Vec<LabeledExample> = Vec::new();
    let stats = prepare_paragraphs(Cursor::new(TEXT), 250, |ex| {
        examples.push(ex);
        Ok(())
    })?;
    println!("{stats:?}\n");

    for ex in &examples {
        println!("{}", serde_json::to_string(ex)?);
        println!("  -> {}\n", render(&ex.tagged(), true));
    }

    let split = split_corpus(examples, 0.34, 50_000, 1);
    println!("train {} / valid {}", split.train.len(), split.valid.len());
    Ok(())
}
