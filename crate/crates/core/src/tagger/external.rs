use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{check_len, Tagger, TaggerError};
use crate::token::{PunctTag, Token};

#[derive(Serialize)]
struct Request<'a> {
    tokens: &'a [Token],
}

#[derive(Deserialize)]
struct Response {
    tags: Vec<PunctTag>,
}

struct Pipes {
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
}

/// Delegates tagging to a child process speaking one JSON line per request:
/// `{"tokens":[...]}` in, `{"tags":[...]}` out. Extra response fields are
/// ignored, so `streampunct tag` itself can serve as the child.
pub struct ExternalTagger {
    child: Child,
    pipes: Mutex<Pipes>,
}

impl ExternalTagger {
    /// Runs `command` through `sh -c`.
    pub fn spawn(command: &str) -> Result<Self, TaggerError> {
        let mut cmd = Command::new("sh");
        cmd.arg("-c").arg(command);
        Self::from_command(cmd)
    }

    pub fn from_command(mut cmd: Command) -> Result<Self, TaggerError> {
        let mut child = cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(ExternalTagger {
            child,
            pipes: Mutex::new(Pipes { stdin, stdout }),
        })
    }
}

impl Tagger for ExternalTagger {
    fn predict(&self, tokens: &[Token]) -> Result<Vec<PunctTag>, TaggerError> {
        let mut pipes = self
            .pipes
            .lock()
            .map_err(|_| TaggerError::Protocol("tagger pipe poisoned".into()))?;
        let mut line = serde_json::to_string(&Request { tokens })
            .map_err(|e| TaggerError::Protocol(e.to_string()))?;
        line.push('\n');
        pipes.stdin.write_all(line.as_bytes())?;
        pipes.stdin.flush()?;

        let mut reply = String::new();
        if pipes.stdout.read_line(&mut reply)? == 0 {
            return Err(TaggerError::Protocol("tagger closed its output".into()));
        }
        let resp: Response =
            serde_json::from_str(&reply).map_err(|e| TaggerError::Protocol(e.to_string()))?;
        check_len(tokens.len(), resp.tags)
    }
}

impl Drop for ExternalTagger {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::token::toks;

    #[test]
    fn talks_to_a_shell_child() {
        // Answers every request with two tags regardless of length.
        let t =
            ExternalTagger::spawn(r#"while read -r line; do echo '{"tags":["O","PERIOD"]}'; done"#)
                .unwrap();
        assert_eq!(
            t.predict(&toks(&["a", "b"])).unwrap(),
            [PunctTag::None, PunctTag::Period]
        );
        assert!(matches!(
            t.predict(&toks(&["a"])),
            Err(TaggerError::LengthMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn dead_child_is_an_error() {
        let t = ExternalTagger::spawn("exit 0").unwrap();
        assert!(t.predict(&toks(&["a"])).is_err());
    }
}
