use crate::ground::{BeliefState, GroundProblem};

use super::{NodeKind, PlanTree};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Violation {
    #[error("malformed tree: {0}")]
    Structure(String),
    #[error("node {node}: unknown action `{label}`")]
    UnknownAction { node: usize, label: String },
    #[error("node {node}: kind {found} does not match `{label}`")]
    KindMismatch { node: usize, label: String, found: String },
    #[error("node {node}: `{label}` is not applicable")]
    NotApplicable { node: usize, label: String },
    #[error("node {node}: outcomes {found:?} but {expected:?} are consistent")]
    OutcomeMismatch { node: usize, expected: Vec<String>, found: Vec<String> },
    #[error("node {node}: {reason}")]
    Transition { node: usize, reason: String },
    #[error("leaf {node} does not satisfy the goal")]
    NotGoal { node: usize },
}

/// Replays every root-to-leaf path from the initial state. Empty when the
/// tree is a valid plan for `p`.
pub fn replay_validate(t: &PlanTree, p: &GroundProblem) -> Vec<Violation> {
    let mut out: Vec<Violation> = t.structure_errors().into_iter().map(Violation::Structure).collect();
    if !out.is_empty() {
        return out;
    }
    let mut stack: Vec<(usize, BeliefState)> = vec![(t.root, p.init.clone())];
    while let Some((id, s)) = stack.pop() {
        let node = t.node(id);
        let Some(name) = &node.action else {
            if !p.is_goal(&s) {
                out.push(Violation::NotGoal { node: id });
            }
            continue;
        };
        let label = node.label();
        let args: Vec<&str> = node.args.iter().map(String::as_str).collect();
        let Some(a) = p.find_action(name, &args) else {
            out.push(Violation::UnknownAction { node: id, label });
            continue;
        };
        let act = &p.actions[a];
        if NodeKind::from_action(act.kind) != node.kind {
            out.push(Violation::KindMismatch { node: id, label, found: node.kind.as_str().into() });
            continue;
        }
        if !p.pre_holds(&s, a) {
            out.push(Violation::NotApplicable { node: id, label });
            continue;
        }
        if act.is_decision() {
            let succ = p.consistent_successors(&s, a);
            let expected: Vec<String> = succ.iter().map(|(o, _)| act.outcomes[*o].label.clone()).collect();
            let found: Vec<String> = node.children.iter().map(|e| e.outcome.clone().unwrap_or_default()).collect();
            if expected != found || expected.len() < 2 {
                out.push(Violation::OutcomeMismatch { node: id, expected, found });
                continue;
            }
            for (e, (_, next)) in node.children.iter().zip(succ).rev() {
                stack.push((e.child, next));
            }
        } else {
            match p.successor(&s, a, None) {
                Ok(next) => stack.push((node.children[0].child, next)),
                Err(e) => out.push(Violation::Transition { node: id, reason: e.to_string() }),
            }
        }
    }
    out.sort_by_key(|v| match v {
        Violation::Structure(_) => 0,
        Violation::UnknownAction { node, .. }
        | Violation::KindMismatch { node, .. }
        | Violation::NotApplicable { node, .. }
        | Violation::OutcomeMismatch { node, .. }
        | Violation::Transition { node, .. }
        | Violation::NotGoal { node } => *node,
    });
    out
}
