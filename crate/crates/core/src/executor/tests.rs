use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Duration;

use serde_json::{json, Value};

use super::*;
use crate::assembly::{generate_instance, AssemblyInstanceParams};
use crate::ground::GroundOptions;
use crate::planner::{expand_tree, PlannerConfig};

fn planned(params: AssemblyInstanceParams) -> (PlanTree, GroundProblem) {
    let g = generate_instance(&params).unwrap();
    let p = g.ground(&GroundOptions::default()).unwrap();
    let t = expand_tree(&p, &PlannerConfig::default()).unwrap();
    (t, p)
}

fn baseline() -> (PlanTree, GroundProblem) {
    planned(AssemblyInstanceParams::baseline())
}

#[test]
fn leftmost_answers_follow_the_first_edges() {
    let (t, p) = baseline();
    let log = run(&t, &p, &mut ScriptedProvider::leftmost()).unwrap();
    let mut id = t.root;
    for r in &log.records {
        assert_eq!(r.node_id, id);
        if let Some(e) = t.node(id).children.first() {
            id = e.child;
        }
    }
    assert_eq!(log.leaf(), Some(t.paths()[0].last().copied().unwrap()));
}

#[test]
fn random_runs_repeat_for_a_seed() {
    let (t, p) = baseline();
    let a = run(&t, &p, &mut RandomProvider::new(7)).unwrap();
    let b = run(&t, &p, &mut RandomProvider::new(7)).unwrap();
    assert_eq!(a.answers(), b.answers());
    assert_eq!(a.leaf(), b.leaf());
}

#[test]
fn random_runs_reach_every_leaf() {
    let (t, p) = planned(AssemblyInstanceParams::with_parts(3, 1, 0, 2, 2));
    let dn = crate::plantree::Metrics::of(&t).DN;
    assert!((1..=3).contains(&dn), "{dn}");
    let leaves: BTreeSet<usize> = t.paths().iter().map(|p| *p.last().unwrap()).collect();
    let reached: BTreeSet<usize> =
        (0..200).map(|seed| run(&t, &p, &mut RandomProvider::new(seed)).unwrap().leaf().unwrap()).collect();
    assert_eq!(reached, leaves);
}

#[test]
fn unknown_answer_aborts() {
    let (t, p) = baseline();
    let err = run(&t, &p, &mut ScriptedProvider::new(vec!["maybe".into()])).unwrap_err();
    assert!(matches!(err, ExecError::InvalidOutcome { .. }));
    let err = run(&t, &p, &mut ScriptedProvider::new(vec![])).unwrap_err();
    assert!(matches!(err, ExecError::ScriptExhausted(_)));
}

#[test]
fn log_lines_parse_back() {
    let (t, p) = baseline();
    let log = run(&t, &p, &mut ScriptedProvider::leftmost()).unwrap();
    let back: Vec<LogRecord> =
        log.to_json_lines().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(back, log.records);
    assert!(log.records.iter().any(|r| r.prompt_text.as_deref() == Some("I cannot reach leg2. Could you attach leg2 to top1?")));
}

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
        Client { reader: BufReader::new(s.try_clone().unwrap()), writer: s }
    }

    fn recv(&mut self) -> Value {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or(Value::Null)
    }

    fn send(&mut self, v: Value) {
        writeln!(self.writer, "{v}").unwrap();
    }

    /// Reads frames until a query or a terminal frame.
    fn next_query(&mut self) -> Value {
        loop {
            let f = self.recv();
            if f["t"] != "node" {
                return f;
            }
        }
    }
}

fn serve(
    t: PlanTree,
    p: GroundProblem,
    opts: SessionOptions,
) -> (std::net::SocketAddr, thread::JoinHandle<Result<ExecutionLog, ExecError>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    (addr, thread::spawn(move || serve_session(&t, &p, &listener, &opts)))
}

#[test]
fn scripted_client_reaches_a_leaf() {
    let (t, p) = baseline();
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("exec.jsonl");
    let opts = SessionOptions { log_path: Some(log_path.clone()), ..SessionOptions::default() };
    let (addr, server) = serve(t.clone(), p, opts);
    let mut c = Client::connect(addr);
    assert_eq!(c.recv(), json!({"t": "hello", "version": 1, "root": 0}));
    let mut answered = Vec::new();
    let done = loop {
        let f = c.next_query();
        match f["t"].as_str() {
            Some("query") => {
                let outcomes = f["outcomes"].as_array().unwrap();
                let o = outcomes.last().unwrap().as_str().unwrap().to_string();
                answered.push(o.clone());
                c.send(json!({"t": "answer", "id": f["id"], "outcome": o}));
            }
            Some("done") => break f,
            other => panic!("unexpected frame {other:?}: {f}"),
        }
    };
    let log = server.join().unwrap().unwrap();
    assert_eq!(log.answers(), answered);
    assert_eq!(done["log"].as_array().unwrap().len(), log.records.len());
    let leaf = log.leaf().unwrap();
    assert!(t.node(leaf).children.is_empty());
    let on_disk: Vec<LogRecord> =
        std::fs::read_to_string(log_path).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(on_disk, log.records);
}

#[test]
fn invalid_outcome_gets_an_error_frame() {
    let (t, p) = baseline();
    let (addr, server) = serve(t, p, SessionOptions::default());
    let mut c = Client::connect(addr);
    c.recv();
    let q = c.next_query();
    c.send(json!({"t": "answer", "id": q["id"], "outcome": "perhaps"}));
    assert_eq!(c.recv()["code"], "invalid-outcome");
    assert!(matches!(server.join().unwrap(), Err(ExecError::InvalidOutcome { .. })));
}

#[test]
fn second_client_is_refused_while_busy() {
    let (t, p) = baseline();
    let (addr, server) = serve(t, p, SessionOptions::default());
    let mut first = Client::connect(addr);
    first.recv();
    let q = first.next_query();
    let mut second = Client::connect(addr);
    assert_eq!(second.recv()["code"], "busy");
    first.send(json!({"t": "answer", "id": q["id"], "outcome": "nonsense"}));
    first.recv();
    server.join().unwrap().unwrap_err();
}

#[test]
fn silent_client_times_out() {
    let (t, p) = baseline();
    let opts = SessionOptions { timeout: Duration::from_millis(200), ..SessionOptions::default() };
    let (addr, server) = serve(t, p, opts);
    let mut c = Client::connect(addr);
    c.recv();
    assert_eq!(c.next_query()["t"], "query");
    assert_eq!(c.recv()["code"], "timeout");
    assert_eq!(server.join().unwrap().unwrap_err(), ExecError::Timeout);
}
