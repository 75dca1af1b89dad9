//! Walking a plan tree at execution time. Actuation and deterministic
//! communication nodes advance on their own; decision nodes ask an
//! [`OutcomeProvider`].

mod prompt;
mod session;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ground::{BeliefState, GroundProblem};
use crate::plantree::{NodeKind, PlanTree};

pub use prompt::{outcome_labels, prompt_text, sensing_text};
pub use session::{serve_session, SessionOptions, PROTOCOL_VERSION};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("node {node}: `{outcome}` is not one of {expected:?}")]
    InvalidOutcome { node: usize, outcome: String, expected: Vec<String> },
    #[error("no answer within the timeout")]
    Timeout,
    #[error("scripted answers ran out at node {0}")]
    ScriptExhausted(usize),
    #[error("node {node}: {message}")]
    Replay { node: usize, message: String },
    #[error("{0}")]
    Protocol(String),
    #[error("i/o: {0}")]
    Io(String),
}

/// A decision waiting for an answer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub node: usize,
    pub kind: NodeKind,
    pub action: String,
    pub prompt: String,
    pub outcomes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LogRecord {
    pub node_id: usize,
    pub kind: NodeKind,
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub prompt_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub chosen_outcome: Option<String>,
    /// Seconds since the run started.
    pub wallclock: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLog {
    pub records: Vec<LogRecord>,
}

impl ExecutionLog {
    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }

    pub fn leaf(&self) -> Option<usize> {
        self.records.last().filter(|r| r.kind == NodeKind::Leaf).map(|r| r.node_id)
    }

    /// The answers given, in order.
    pub fn answers(&self) -> Vec<String> {
        self.records.iter().filter_map(|r| r.chosen_outcome.clone()).collect()
    }
}

pub trait OutcomeProvider {
    fn choose(&mut self, q: &Query) -> Result<String, ExecError>;

    /// Called when a node is reached, before any question is asked.
    fn visit(&mut self, _rec: &LogRecord) -> Result<(), ExecError> {
        Ok(())
    }

    /// Called once a record is complete.
    fn logged(&mut self, _rec: &LogRecord) -> Result<(), ExecError> {
        Ok(())
    }
}

/// Answers from a fixed list. `leftmost` picks the first outcome whenever the
/// list is exhausted.
#[derive(Debug, Clone, Default)]
pub struct ScriptedProvider {
    answers: Vec<String>,
    next: usize,
    leftmost: bool,
}

impl ScriptedProvider {
    pub fn new(answers: Vec<String>) -> Self {
        ScriptedProvider { answers, next: 0, leftmost: false }
    }

    pub fn leftmost() -> Self {
        ScriptedProvider { leftmost: true, ..Self::default() }
    }
}

impl OutcomeProvider for ScriptedProvider {
    fn choose(&mut self, q: &Query) -> Result<String, ExecError> {
        match self.answers.get(self.next) {
            Some(a) => {
                self.next += 1;
                Ok(a.clone())
            }
            None if self.leftmost => Ok(q.outcomes[0].clone()),
            None => Err(ExecError::ScriptExhausted(q.node)),
        }
    }
}

/// Uniform choice among the offered outcomes.
#[derive(Debug, Clone)]
pub struct RandomProvider {
    rng: ChaCha8Rng,
}

impl RandomProvider {
    pub fn new(seed: u64) -> Self {
        RandomProvider { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl OutcomeProvider for RandomProvider {
    fn choose(&mut self, q: &Query) -> Result<String, ExecError> {
        Ok(q.outcomes[self.rng.gen_range(0..q.outcomes.len())].clone())
    }
}

/// Prompt for a node: the utterance for communication, the question for
/// sensing, nothing otherwise.
pub fn node_prompt(t: &PlanTree, id: usize) -> Option<String> {
    let n = t.node(id);
    let action = n.action.as_deref()?;
    let outcomes: Vec<String> = n.children.iter().filter_map(|e| e.outcome.clone()).collect();
    match n.kind {
        NodeKind::Sensing => Some(sensing_text(action, &n.args, &outcomes)),
        k if k.is_communication() => {
            Some(prompt_text(action, &n.args, &outcomes).unwrap_or_else(|| format!("{}?", n.label())))
        }
        _ => None,
    }
}

/// Walks `t` from the root, replaying each step on `p`, until a leaf.
pub fn run(t: &PlanTree, p: &GroundProblem, provider: &mut dyn OutcomeProvider) -> Result<ExecutionLog, ExecError> {
    let start = Instant::now();
    let mut log = ExecutionLog::default();
    let mut state: BeliefState = p.init.clone();
    let mut id = t.root;
    loop {
        let n = t.node(id);
        let mut rec = LogRecord {
            node_id: id,
            kind: n.kind,
            action: n.label(),
            prompt_text: node_prompt(t, id),
            chosen_outcome: None,
            wallclock: 0.0,
        };
        let Some(name) = &n.action else {
            if !p.is_goal(&state) {
                return Err(ExecError::Replay { node: id, message: "leaf does not satisfy the goal".into() });
            }
            rec.wallclock = start.elapsed().as_secs_f64();
            provider.visit(&rec)?;
            provider.logged(&rec)?;
            log.records.push(rec);
            return Ok(log);
        };
        let args: Vec<&str> = n.args.iter().map(String::as_str).collect();
        let replay = |message: String| ExecError::Replay { node: id, message };
        let a = p.find_action(name, &args).ok_or_else(|| replay(format!("unknown action {}", n.label())))?;
        if !p.pre_holds(&state, a) {
            return Err(replay(format!("{} is not applicable", n.label())));
        }
        let (outcome, next_id) = if n.kind.is_decision() {
            let outcomes: Vec<String> = n.children.iter().filter_map(|e| e.outcome.clone()).collect();
            provider.visit(&rec)?;
            let q = Query {
                node: id,
                kind: n.kind,
                action: n.label(),
                prompt: rec.prompt_text.clone().unwrap_or_default(),
                outcomes: outcomes.clone(),
            };
            let answer = provider.choose(&q)?;
            let Some(pos) = outcomes.iter().position(|o| *o == answer) else {
                return Err(ExecError::InvalidOutcome { node: id, outcome: answer, expected: outcomes });
            };
            let o = p.actions[a]
                .outcomes
                .iter()
                .position(|o| o.label == answer)
                .ok_or_else(|| replay(format!("{answer} is not an outcome of {}", n.label())))?;
            (Some((o, answer)), n.children[pos].child)
        } else {
            provider.visit(&rec)?;
            (None, n.children[0].child)
        };
        state = p.successor(&state, a, outcome.as_ref().map(|(o, _)| *o)).map_err(|e| replay(e.to_string()))?;
        rec.chosen_outcome = outcome.map(|(_, label)| label);
        rec.wallclock = start.elapsed().as_secs_f64();
        provider.logged(&rec)?;
        log.records.push(rec);
        id = next_id;
    }
}

#[cfg(test)]
mod tests;
