//! Step through a streaming session by hand and watch the buffer: nothing
//! is emitted until a sentence is known to be complete.
//!
//!     cargo run --example stream_session

use streampunct::stream::{Mode, Session, SessionConfig};
use streampunct::tagger::OracleTagger;
use streampunct::token::{toks, PunctTag::*};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let words = [
        "it", "can", "happen", "in", "new", "york", "city", "right", "i", "think", "so",
    ];
    let tags = vec![
        None, None, None, None, None, None, Comma, Question, None, None, Period,
    ];
    let tagger = OracleTagger::new(toks(&words), tags);

    let mut session = Session::new(SessionConfig::new(Mode::Streaming, 200)?, &tagger);
    for seg in [&words[..3], &words[3..5], &words[5..9], &words[9..]] {
        let step = session.push_tokens(toks(seg))?;
        let rec = step.to_record(true);
        println!(
            "push {:<28} finalized={:?}  buffer={:?}",
            format!("{seg:?}"),
            rec.finalized,
            rec.hypothesis
        );
    }
    let rec = session.flush()?.to_record(true);
    println!("flush {:>28} finalized={:?}", "", rec.finalized);
    Ok(())
}
