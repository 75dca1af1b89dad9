use std::fmt::Write;

use super::{NodeKind, PlanTree};

fn color(k: NodeKind) -> &'static str {
    match k {
        NodeKind::Actuation => "gray",
        NodeKind::Sensing => "yellow",
        NodeKind::CommNondet => "lightblue",
        NodeKind::CommDet => "lightblue",
        NodeKind::Leaf => "white",
    }
}

/// Graphviz rendering. Actuation nodes are gray, sensing yellow and
/// communication blue; decision nodes are drawn as diamonds.
pub fn to_dot(t: &PlanTree) -> String {
    let mut out = String::from("digraph plan {\n  node [style=filled, fontname=\"Helvetica\"];\n");
    for n in &t.nodes {
        let shape = match n.kind {
            NodeKind::Leaf => "doublecircle",
            k if k.is_decision() => "diamond",
            _ => "box",
        };
        writeln!(out, "  n{} [label=\"{}\", shape={shape}, fillcolor={}];", n.id, n.label(), color(n.kind)).unwrap();
    }
    for n in &t.nodes {
        for e in &n.children {
            match &e.outcome {
                Some(o) => writeln!(out, "  n{} -> n{} [label=\"{o}\"];", n.id, e.child).unwrap(),
                None => writeln!(out, "  n{} -> n{};", n.id, e.child).unwrap(),
            }
        }
    }
    out.push_str("}\n");
    out
}
