//! Interactive sessions over newline-delimited JSON on a TCP stream.
//!
//! Server frames: `hello`, `node`, `query`, `done`, `err`. The client sends
//! `answer` frames. One session runs at a time; other connections receive
//! `{"t":"err","code":"busy"}` and are closed.

use std::fs::File;
use std::io::{BufRead, BufReader, ErrorKind, Write};
use std::net::{Shutdown, TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use crate::ground::GroundProblem;
use crate::plantree::PlanTree;

use super::{run, ExecError, ExecutionLog, LogRecord, OutcomeProvider, Query};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct SessionOptions {
    /// How long to wait for each answer.
    pub timeout: Duration,
    /// JSON-lines log, appended record by record.
    pub log_path: Option<PathBuf>,
}

impl Default for SessionOptions {
    fn default() -> Self {
        SessionOptions { timeout: Duration::from_secs(120), log_path: None }
    }
}

fn send(w: &mut TcpStream, v: &Value) -> Result<(), ExecError> {
    let mut line = serde_json::to_string(v).expect("frame serializes");
    line.push('\n');
    w.write_all(line.as_bytes()).and_then(|_| w.flush()).map_err(|e| ExecError::Io(e.to_string()))
}

fn err_frame(code: &str, message: &str) -> Value {
    json!({"t": "err", "code": code, "message": message})
}

struct Wire {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
    log: Option<File>,
    /// Set once an `err` frame went out.
    reported: bool,
}

impl Wire {
    fn fail(&mut self, code: &str, e: ExecError) -> ExecError {
        if send(&mut self.writer, &err_frame(code, &e.to_string())).is_ok() {
            self.reported = true;
        }
        e
    }
}

impl OutcomeProvider for Wire {
    fn visit(&mut self, rec: &LogRecord) -> Result<(), ExecError> {
        let mut v = json!({"t": "node", "id": rec.node_id, "kind": rec.kind, "action": rec.action});
        if let Some(p) = &rec.prompt_text {
            v["prompt"] = json!(p);
        }
        send(&mut self.writer, &v)
    }

    fn logged(&mut self, rec: &LogRecord) -> Result<(), ExecError> {
        if let Some(f) = &mut self.log {
            let line = serde_json::to_string(rec).expect("record serializes") + "\n";
            f.write_all(line.as_bytes()).and_then(|_| f.flush()).map_err(|e| ExecError::Io(e.to_string()))?;
        }
        Ok(())
    }

    fn choose(&mut self, q: &Query) -> Result<String, ExecError> {
        send(&mut self.writer, &json!({"t": "query", "id": q.node, "prompt": q.prompt, "outcomes": q.outcomes}))?;
        let mut line = String::new();
        match self.reader.read_line(&mut line) {
            Ok(0) => return Err(ExecError::Protocol("client closed the session".into())),
            Ok(_) => {}
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {
                return Err(self.fail("timeout", ExecError::Timeout));
            }
            Err(e) => return Err(ExecError::Io(e.to_string())),
        }
        let frame: Value = match serde_json::from_str(line.trim()) {
            Ok(v) => v,
            Err(e) => return Err(self.fail("malformed", ExecError::Protocol(format!("malformed frame: {e}")))),
        };
        let id = frame.get("id").and_then(Value::as_u64);
        let outcome = frame.get("outcome").and_then(Value::as_str);
        match (frame.get("t").and_then(Value::as_str), id, outcome) {
            (Some("answer"), Some(id), Some(o)) if id as usize == q.node => {
                if q.outcomes.iter().any(|x| x == o) {
                    Ok(o.to_string())
                } else {
                    let e = ExecError::InvalidOutcome { node: q.node, outcome: o.into(), expected: q.outcomes.clone() };
                    Err(self.fail("invalid-outcome", e))
                }
            }
            (Some("answer"), Some(id), Some(_)) => Err(self.fail(
                "invalid-outcome",
                ExecError::Protocol(format!("answer for node {id} while node {} is pending", q.node)),
            )),
            _ => Err(self.fail("malformed", ExecError::Protocol(format!("unexpected frame {}", line.trim())))),
        }
    }
}

/// Accepts one client on `listener` and executes `t` with its answers.
/// Further clients are refused while the session runs.
pub fn serve_session(
    t: &PlanTree,
    p: &GroundProblem,
    listener: &TcpListener,
    opts: &SessionOptions,
) -> Result<ExecutionLog, ExecError> {
    let io = |e: std::io::Error| ExecError::Io(e.to_string());
    let (stream, peer) = listener.accept().map_err(io)?;
    log::info!("session with {peer}");

    let done = Arc::new(AtomicBool::new(false));
    let addr = listener.local_addr().map_err(io)?;
    let gate = listener.try_clone().map_err(io)?;
    let refuser = {
        let done = done.clone();
        thread::spawn(move || {
            for mut other in gate.incoming().flatten() {
                if done.load(Ordering::SeqCst) {
                    break;
                }
                let _ = send(&mut other, &err_frame("busy", "another session is running"));
                let _ = other.shutdown(Shutdown::Both);
            }
        })
    };

    let result = (|| {
        stream.set_read_timeout(Some(opts.timeout)).map_err(io)?;
        let log = match &opts.log_path {
            Some(path) => Some(File::create(path).map_err(io)?),
            None => None,
        };
        let mut wire = Wire { reader: BufReader::new(stream.try_clone().map_err(io)?), writer: stream, log, reported: false };
        send(&mut wire.writer, &json!({"t": "hello", "version": PROTOCOL_VERSION, "root": t.root}))?;
        match run(t, p, &mut wire) {
            Ok(log) => {
                send(&mut wire.writer, &json!({"t": "done", "log": log.records}))?;
                Ok(log)
            }
            Err(e) => {
                if !wire.reported {
                    let _ = send(&mut wire.writer, &err_frame("aborted", &e.to_string()));
                }
                Err(e)
            }
        }
    })();

    done.store(true, Ordering::SeqCst);
    let _ = TcpStream::connect(addr);
    let _ = refuser.join();
    result
}
