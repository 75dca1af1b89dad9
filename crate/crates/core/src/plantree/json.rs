//! Plan-tree JSON, version 1. Keys are emitted sorted so identical trees
//! serialize to identical bytes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ground::GroundProblem;

use super::{Edge, Metrics, Node, NodeKind, PlanTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeFormatError {
    #[error("malformed JSON at {line}:{col}: {message}")]
    Json { line: usize, col: usize, message: String },
    #[error("invalid plan tree: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub plan_s: f64,
    pub checks_s: f64,
}

/// Static facts a viewer needs to flag risky nodes without the domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SafetyFacts {
    pub dangerous_parts: Vec<String>,
    pub unsafe_regions: Vec<String>,
    pub locations: BTreeMap<String, String>,
}

impl SafetyFacts {
    pub fn from_problem(p: &GroundProblem) -> Self {
        let tuples = |name: &str| -> Vec<Vec<String>> {
            let mut v: Vec<Vec<String>> = p
                .statics
                .get(name)
                .into_iter()
                .flatten()
                .map(|t| t.iter().map(|c| p.consts[*c as usize].clone()).collect())
                .collect();
            v.sort();
            v
        };
        SafetyFacts {
            dangerous_parts: tuples("dangerous").into_iter().map(|t| t[0].clone()).collect(),
            unsafe_regions: tuples("unsafeRegion").into_iter().map(|t| t[0].clone()).collect(),
            locations: tuples("loc").into_iter().map(|t| (t[0].clone(), t[1].clone())).collect(),
        }
    }
}

/// A tree together with what gets written next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeFile {
    pub tree: PlanTree,
    pub metrics: Metrics,
    pub safety: SafetyFacts,
    /// Omitted from the output when absent so that files stay reproducible.
    pub timings: Option<Timings>,
}

impl TreeFile {
    pub fn new(tree: PlanTree, safety: SafetyFacts) -> Self {
        let metrics = Metrics::of(&tree);
        TreeFile { tree, metrics, safety, timings: None }
    }
}

fn node_value(n: &Node) -> Value {
    let children: Vec<Value> = n.children.iter().map(|e| json!({"outcome": e.outcome, "id": e.child})).collect();
    json!({
        "id": n.id,
        "kind": n.kind,
        "action": n.action,
        "args": n.args,
        "children": children,
    })
}

pub fn to_json(f: &TreeFile) -> String {
    let mut v = json!({
        "version": 1,
        "root": f.tree.root,
        "nodes": f.tree.nodes.iter().map(node_value).collect::<Vec<_>>(),
        "metrics": f.metrics,
        "safety": f.safety,
    });
    if let Some(t) = f.timings {
        v["timings"] = json!(t);
    }
    let mut s = serde_json::to_string_pretty(&v).expect("tree serializes");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    outcome: Option<String>,
    id: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: usize,
    kind: NodeKind,
    action: Option<String>,
    #[serde(default)]
    args: Vec<String>,
    children: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    version: u32,
    nodes: Vec<RawNode>,
    root: Option<usize>,
    metrics: Option<Metrics>,
    #[serde(default)]
    safety: SafetyFacts,
    timings: Option<Timings>,
}

pub fn from_json(text: &str) -> Result<TreeFile, TreeFormatError> {
    let raw: RawFile = serde_json::from_str(text)
        .map_err(|e| TreeFormatError::Json { line: e.line(), col: e.column(), message: e.to_string() })?;
    let bad = |m: String| Err(TreeFormatError::Invalid(m));
    if raw.version != 1 {
        return bad(format!("unsupported version {}", raw.version));
    }
    let Some(root) = raw.root else { return bad("no root".into()) };
    if raw.nodes.is_empty() {
        return bad("no nodes".into());
    }
    let n = raw.nodes.len();
    let mut nodes = Vec::with_capacity(n);
    for (i, r) in raw.nodes.into_iter().enumerate() {
        if r.id != i {
            return bad(format!("node at position {i} has id {}", r.id));
        }
        if r.action.is_none() != (r.kind == NodeKind::Leaf) {
            return bad(format!("node {i}: only leaves have no action"));
        }
        if let Some(e) = r.children.iter().find(|e| e.id >= n) {
            return bad(format!("node {i} points to missing node {}", e.id));
        }
        let children = r.children.into_iter().map(|e| Edge { outcome: e.outcome, child: e.id }).collect();
        nodes.push(Node { id: i, kind: r.kind, action: r.action, args: r.args, depth: usize::MAX, children });
    }
    if root >= n {
        return bad(format!("root {root} does not exist"));
    }
    nodes[root].depth = 0;
    let mut stack = vec![root];
    let mut visited = 0;
    while let Some(id) = stack.pop() {
        visited += 1;
        if visited > n {
            return bad("the node graph has a cycle".into());
        }
        let d = nodes[id].depth;
        let kids: Vec<usize> = nodes[id].children.iter().map(|e| e.child).collect();
        for c in kids {
            if nodes[c].depth != usize::MAX {
                return bad(format!("node {c} is reached twice"));
            }
            nodes[c].depth = d + 1;
            stack.push(c);
        }
    }
    if visited != n {
        return bad(format!("{} nodes are unreachable from the root", n - visited));
    }
    let tree = PlanTree { nodes, root };
    let errs = tree.structure_errors();
    if let Some(e) = errs.first() {
        return bad(e.clone());
    }
    let metrics = Metrics::of(&tree);
    if raw.metrics.is_some_and(|m| m != metrics) {
        return bad("stored metrics do not match the tree".into());
    }
    Ok(TreeFile { tree, metrics, safety: raw.safety, timings: raw.timings })
}
