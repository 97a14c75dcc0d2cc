//! Same words, same cuts, four decoding modes. With a perfect tagger only
//! the segment boundaries differ, which isolates what each mode does with
//! them.
//!
//!     cargo run --example context_modes

use streampunct::stream::{run_batch, Mode, SessionConfig};
use streampunct::tagger::OracleTagger;
use streampunct::token::{toks, PunctTag::*, Segment};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let words = toks(&[
        "it", "can", "happen", "in", "new", "york", "city", "right", "yes", "it", "happened", "to",
        "me", "last", "week",
    ]);
    let tags = vec![
        None, None, None, None, None, None, Comma, Question, Period, None, None, None, None, None,
        Period,
    ];
    let tagger = OracleTagger::new(words.clone(), tags);
    let cuts = [0, 3, 5, 8, 11, 15];
    let segments: Vec<Segment> = cuts
        .windows(2)
        .enumerate()
        .map(|(i, w)| Segment::new(words[w[0]..w[1]].to_vec(), i))
        .collect();

    for mode in Mode::ALL {
        let sentences = run_batch(&words, &segments, SessionConfig::new(mode, 200)?, &tagger)?;
        println!("{mode:>14}:");
        for s in sentences {
            println!("    {}", s.render(true));
        }
    }
    Ok(())
}
