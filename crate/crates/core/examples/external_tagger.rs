//! Plugging in a tagger that lives in another process. Anything that reads
//! `{"tokens":[...]}` lines and answers `{"tags":[...]}` lines works; here a
//! few lines of shell + python stand in for a neural model server.
//!
//!     cargo run --example external_tagger

use streampunct::stream::{Mode, Session, SessionConfig};
use streampunct::tagger::ExternalTagger;
use streampunct::token::tokenize;

// Ends a sentence after "right", "ok" or "thanks"; commas after "well".
const SERVER: &str = r#"python3 -u -c '
import json, sys
for line in sys.stdin:
    toks = json.loads(line)["tokens"]
    tags = ["QUESTION" if t == "right" else "PERIOD" if t in ("ok", "thanks") else "COMMA" if t == "well" else "O" for t in toks]
    print(json.dumps({"tags": tags}))
'"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let tagger = ExternalTagger::spawn(SERVER)?;
    let mut session = Session::new(SessionConfig::new(Mode::Streaming, 200)?, &tagger);
    for segment in [
        "well we could meet",
        "on tuesday right sounds good",
        "ok see you",
        "then thanks",
    ] {
        for s in session.push_tokens(tokenize(segment))?.finalized {
            println!("{}", s.render(true));
        }
    }
    for s in session.flush()?.finalized {
        println!("{}", s.render(true));
    }
    Ok(())
}
