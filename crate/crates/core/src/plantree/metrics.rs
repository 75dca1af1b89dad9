use serde::{Deserialize, Serialize};

use super::{NodeKind, PlanTree};

pub const METRICS_HEADER: &str = "inst,U,P,R,L,D,A,S,C,K,O,Cc,Rq,DN,BF,N,plan_s,checks_s";

/// Tree size figures. `D = A + S + C` on the leftmost longest branch; the
/// K/O/Cc/Rq counts are over the whole tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Metrics {
    pub L: usize,
    pub D: usize,
    pub A: usize,
    pub S: usize,
    pub C: usize,
    pub K: usize,
    pub O: usize,
    pub Cc: usize,
    pub Rq: usize,
    pub DN: usize,
    pub BF: usize,
    pub N: usize,
}

impl Metrics {
    pub fn of(t: &PlanTree) -> Self {
        let mut m = Metrics { N: t.nodes.len(), ..Metrics::default() };
        for n in &t.nodes {
            match n.kind {
                NodeKind::Leaf => m.L += 1,
                k if k.is_decision() => {
                    m.DN += 1;
                    m.BF = m.BF.max(n.children.len());
                }
                _ => {}
            }
            match n.action.as_deref() {
                Some("askHelp") => m.K += 1,
                Some("offerHelp") => m.O += 1,
                Some("confirmAttach") => m.Cc += 1,
                Some(a) if a.starts_with("request") => m.Rq += 1,
                _ => {}
            }
        }
        let mut longest: Option<Vec<usize>> = None;
        for p in t.paths() {
            if longest.as_ref().is_none_or(|l| p.len() > l.len()) {
                longest = Some(p);
            }
        }
        for id in longest.unwrap_or_default() {
            match t.nodes[id].kind {
                NodeKind::Actuation => m.A += 1,
                NodeKind::Sensing => m.S += 1,
                NodeKind::CommDet | NodeKind::CommNondet => m.C += 1,
                NodeKind::Leaf => {}
            }
        }
        m.D = m.A + m.S + m.C;
        m
    }

    /// Total communication nodes in the tree.
    pub fn communication(&self) -> usize {
        self.K + self.O + self.Cc + self.Rq
    }

    /// One CSV row without the instance columns and timings.
    pub fn csv_fields(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.L, self.D, self.A, self.S, self.C, self.K, self.O, self.Cc, self.Rq, self.DN, self.BF, self.N
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plantree::TreeBuilder;

    fn chain(b: &mut TreeBuilder, parent: usize, outcome: Option<&str>, name: &str, depth: usize) -> usize {
        let id = b.push(NodeKind::Actuation, Some(name.into()), vec![], depth);
        b.link(parent, outcome.map(String::from), id);
        id
    }

    fn leaf(b: &mut TreeBuilder, parent: usize, depth: usize) {
        let id = b.push(NodeKind::Leaf, None, vec![], depth);
        b.link(parent, None, id);
    }

    #[test]
    fn single_path() {
        let mut b = TreeBuilder::new();
        let r = b.push(NodeKind::Actuation, Some("hold".into()), vec![], 0);
        let a = chain(&mut b, r, None, "attach", 1);
        leaf(&mut b, a, 2);
        let m = Metrics::of(&b.finish());
        assert_eq!((m.L, m.D, m.A, m.S, m.C, m.DN, m.N), (1, 2, 2, 0, 0, 0, 3));
    }

    #[test]
    fn one_binary_decision() {
        let mut b = TreeBuilder::new();
        let r = b.push(NodeKind::Sensing, Some("sense".into()), vec![], 0);
        let y = chain(&mut b, r, Some("yes"), "attach", 1);
        leaf(&mut b, y, 2);
        let n = chain(&mut b, r, Some("no"), "attach", 1);
        leaf(&mut b, n, 2);
        let t = b.finish();
        assert!(t.structure_errors().is_empty());
        let m = Metrics::of(&t);
        assert_eq!((m.L, m.DN, m.BF, m.N, m.D, m.S, m.A), (2, 1, 2, 5, 2, 1, 1));
    }
}
