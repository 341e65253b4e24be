//! Child-process oracle speaking a line protocol over stdio.
//!
//! Request: `EVAL <id> <fp-hex> <block-ids-comma-separated>` (`-` when there
//! are no block ids). Reply: `<id> <v1> ... <vD>` with raw values, or
//! `ERR <id> <message>`.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::{Oracle, OracleError, OracleRequest, OracleResult};
use crate::pareto::ObjectiveSpec;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Session {
    fn spawn(program: &[String]) -> Result<Self, OracleError> {
        let mut child = Command::new(&program[0])
            .args(&program[1..])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| OracleError::Io(format!("spawning {}: {e}", program[0])))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            child,
            stdin,
            lines,
        })
    }
}

impl Drop for Session {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub struct ExternalOracle {
    spec: ObjectiveSpec,
    program: Vec<String>,
    timeout: Duration,
    session: Mutex<Option<Session>>,
}

impl ExternalOracle {
    pub fn new(
        spec: ObjectiveSpec,
        program: Vec<String>,
        timeout: Duration,
    ) -> Result<Self, OracleError> {
        if program.is_empty() {
            return Err(OracleError::Input("empty oracle command".into()));
        }
        Ok(Self {
            spec,
            program,
            timeout,
            session: Mutex::new(None),
        })
    }

    /// Runs `command` through `sh -c`.
    pub fn from_shell(
        spec: ObjectiveSpec,
        command: &str,
        timeout: Duration,
    ) -> Result<Self, OracleError> {
        Self::new(
            spec,
            vec!["sh".into(), "-c".into(), command.into()],
            timeout,
        )
    }

    fn request_line(request: &OracleRequest) -> Result<String, OracleError> {
        let bad = |what: &str| {
            OracleError::Input(format!(
                "{what} must be non-empty and free of whitespace/commas"
            ))
        };
        if request.entity_id.is_empty() || request.entity_id.contains(char::is_whitespace) {
            return Err(bad("entity id"));
        }
        if request
            .block_ids
            .iter()
            .any(|b| b.is_empty() || b.contains(char::is_whitespace) || b.contains(','))
        {
            return Err(bad("block ids"));
        }
        let blocks = if request.block_ids.is_empty() {
            "-".to_string()
        } else {
            request.block_ids.join(",")
        };
        let fp = if request.fingerprint.width().is_multiple_of(4) {
            request.fingerprint.to_hex()
        } else {
            return Err(OracleError::Input(
                "fingerprint width must be a multiple of 4".into(),
            ));
        };
        Ok(format!("EVAL {} {} {}\n", request.entity_id, fp, blocks))
    }

    fn parse_reply(&self, id: &str, line: &str) -> Result<OracleResult, OracleError> {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("ERR") => {
                let got = tokens.next().unwrap_or_default();
                if got != id {
                    return Err(OracleError::Protocol(format!(
                        "error reply for {got}, expected {id}"
                    )));
                }
                let message = tokens.collect::<Vec<_>>().join(" ");
                Err(OracleError::Remote {
                    id: id.to_string(),
                    message,
                })
            }
            Some(got) if got == id => {
                let raw = tokens
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| {
                        OracleError::Protocol(format!("bad value in reply {line:?}: {e}"))
                    })?;
                if raw.len() != self.spec.dim() {
                    return Err(OracleError::Protocol(format!(
                        "reply has {} values, expected {}",
                        raw.len(),
                        self.spec.dim()
                    )));
                }
                OracleResult::from_raw(&self.spec, raw)
            }
            _ => Err(OracleError::Protocol(format!(
                "unexpected reply {line:?} for {id}"
            ))),
        }
    }
}

impl Oracle for ExternalOracle {
    fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    fn evaluate(&self, request: &OracleRequest) -> Result<OracleResult, OracleError> {
        let line = Self::request_line(request)?;
        let mut guard = self.session.lock().unwrap();
        if guard.is_none() {
            *guard = Some(Session::spawn(&self.program)?);
        }
        let session = guard.as_mut().unwrap();

        let sent = session
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| session.stdin.flush());
        if let Err(e) = sent {
            *guard = None;
            return Err(OracleError::Io(format!("writing request: {e}")));
        }
        let reply = match session.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => reply,
            Ok(Err(e)) => {
                *guard = None;
                return Err(OracleError::Io(format!("reading reply: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                // the stream may now be out of step; restart on next call
                *guard = None;
                return Err(OracleError::Timeout(self.timeout.as_millis()));
            }
            Err(RecvTimeoutError::Disconnected) => {
                *guard = None;
                return Err(OracleError::Protocol(
                    "oracle process closed its output".into(),
                ));
            }
        };
        let result = self.parse_reply(&request.entity_id, &reply);
        if matches!(result, Err(OracleError::Protocol(_))) {
            *guard = None;
        }
        result
    }
}
