//! Plan trees: structure, metrics, replay validation and serialization.

mod dot;
mod json;
mod metrics;
mod replay;

use serde::{Deserialize, Serialize};

use crate::adl::ActionKind;

pub use dot::to_dot;
pub use json::{from_json, to_json, SafetyFacts, Timings, TreeFile, TreeFormatError};
pub use metrics::{Metrics, METRICS_HEADER};
pub use replay::{replay_validate, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum NodeKind {
    Actuation,
    Sensing,
    CommDet,
    CommNondet,
    Leaf,
}

impl NodeKind {
    pub fn from_action(k: ActionKind) -> Self {
        match k {
            ActionKind::Actuation => NodeKind::Actuation,
            ActionKind::Sensing => NodeKind::Sensing,
            ActionKind::CommDet => NodeKind::CommDet,
            ActionKind::CommNondet => NodeKind::CommNondet,
        }
    }

    pub fn is_decision(self) -> bool {
        matches!(self, NodeKind::Sensing | NodeKind::CommNondet)
    }

    pub fn is_communication(self) -> bool {
        matches!(self, NodeKind::CommDet | NodeKind::CommNondet)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Actuation => "actuation",
            NodeKind::Sensing => "sensing",
            NodeKind::CommDet => "commDet",
            NodeKind::CommNondet => "commNondet",
            NodeKind::Leaf => "leaf",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    /// Outcome label; `None` below actuation and deterministic nodes.
    pub outcome: Option<String>,
    pub child: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: usize,
    pub kind: NodeKind,
    /// Schema name; `None` for goal leaves.
    pub action: Option<String>,
    pub args: Vec<String>,
    pub depth: usize,
    pub children: Vec<Edge>,
}

impl Node {
    pub fn label(&self) -> String {
        match &self.action {
            None => "goal".into(),
            Some(a) if self.args.is_empty() => a.clone(),
            Some(a) => format!("{a}({})", self.args.join(",")),
        }
    }
}

/// Nodes are stored by id; ids are dense and follow a depth-first preorder
/// with children in outcome order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanTree {
    pub nodes: Vec<Node>,
    pub root: usize,
}

impl PlanTree {
    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    /// Root-to-leaf paths as node id lists, leftmost first.
    pub fn paths(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![self.root]];
        while let Some(path) = stack.pop() {
            let last = &self.nodes[*path.last().unwrap()];
            if last.children.is_empty() {
                out.push(path);
                continue;
            }
            for e in last.children.iter().rev() {
                let mut p = path.clone();
                p.push(e.child);
                stack.push(p);
            }
        }
        out
    }

    /// Structural problems: wrong child counts, duplicate labels, bad ids.
    pub fn structure_errors(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let mut seen = vec![0usize; self.nodes.len()];
        if self.root >= self.nodes.len() {
            return vec![format!("root {} does not exist", self.root)];
        }
        seen[self.root] += 1;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                errs.push(format!("node at index {i} has id {}", n.id));
            }
            let k = n.children.len();
            match n.kind {
                NodeKind::Leaf if k != 0 => errs.push(format!("leaf {i} has {k} children")),
                NodeKind::Actuation | NodeKind::CommDet if k != 1 => {
                    errs.push(format!("{} node {i} has {k} children", n.kind.as_str()))
                }
                NodeKind::Sensing | NodeKind::CommNondet if k < 2 => {
                    errs.push(format!("decision node {i} has {k} children"))
                }
                _ => {}
            }
            let mut labels: Vec<&Option<String>> = n.children.iter().map(|e| &e.outcome).collect();
            labels.sort();
            labels.dedup();
            if labels.len() != k {
                errs.push(format!("node {i} repeats an outcome label"));
            }
            for e in &n.children {
                match self.nodes.get(e.child) {
                    Some(c) => {
                        seen[e.child] += 1;
                        if c.depth != n.depth + 1 {
                            errs.push(format!("node {} has depth {} under depth {}", e.child, c.depth, n.depth));
                        }
                    }
                    None => errs.push(format!("node {i} points to missing node {}", e.child)),
                }
                if n.kind.is_decision() != e.outcome.is_some() {
                    errs.push(format!("edge {i}->{} label does not match the node kind", e.child));
                }
            }
        }
        for (i, &c) in seen.iter().enumerate() {
            if c != 1 {
                errs.push(format!("node {i} has {c} parents"));
            }
        }
        errs
    }
}

/// Recursive builder used by the planner; flattened with [`TreeBuilder::finish`].
#[derive(Debug, Default)]
pub struct TreeBuilder {
    nodes: Vec<Node>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node and returns its id. Children are attached later.
    pub fn push(&mut self, kind: NodeKind, action: Option<String>, args: Vec<String>, depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node { id, kind, action, args, depth, children: Vec::new() });
        id
    }

    pub fn link(&mut self, parent: usize, outcome: Option<String>, child: usize) {
        self.nodes[parent].children.push(Edge { outcome, child });
    }

    pub fn finish(self) -> PlanTree {
        PlanTree { nodes: self.nodes, root: 0 }
    }
}
