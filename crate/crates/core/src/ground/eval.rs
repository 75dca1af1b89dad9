//! Ground conditions and their evaluation over belief states.

use crate::adl::CountCmp;

use super::state::{AtomId, BeliefState};

/// A condition with all variables substituted and every state-independent
/// part already folded to a constant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GCond {
    Const(bool),
    /// The atom is known to have this value.
    Known(AtomId, bool),
    Not(Box<GCond>),
    And(Vec<GCond>),
    Or(Vec<GCond>),
    /// `offset + #{a in atoms | a known true} cmp bound`.
    Count { atoms: Vec<AtomId>, offset: u32, cmp: CountCmp, bound: u32 },
}

impl GCond {
    pub fn holds(&self, s: &BeliefState) -> bool {
        match self {
            GCond::Const(b) => *b,
            GCond::Known(a, v) => s.is(*a, *v),
            GCond::Not(c) => !c.holds(s),
            GCond::And(cs) => cs.iter().all(|c| c.holds(s)),
            GCond::Or(cs) => cs.iter().any(|c| c.holds(s)),
            GCond::Count { atoms, offset, cmp, bound } => {
                let n = offset + atoms.iter().filter(|&&a| s.is(a, true)).count() as u32;
                cmp.test(n, *bound)
            }
        }
    }

    pub fn is_false(&self) -> bool {
        *self == GCond::Const(false)
    }

    pub fn negate(c: GCond) -> GCond {
        match c {
            GCond::Const(b) => GCond::Const(!b),
            GCond::Not(inner) => *inner,
            other => GCond::Not(Box::new(other)),
        }
    }

    pub fn and(items: Vec<GCond>) -> GCond {
        let mut out = Vec::new();
        for c in items {
            match c {
                GCond::Const(true) => {}
                GCond::Const(false) => return GCond::Const(false),
                GCond::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => GCond::Const(true),
            1 => out.pop().unwrap(),
            _ => GCond::And(out),
        }
    }

    pub fn or(items: Vec<GCond>) -> GCond {
        let mut out = Vec::new();
        for c in items {
            match c {
                GCond::Const(false) => {}
                GCond::Const(true) => return GCond::Const(true),
                GCond::Or(inner) => out.extend(inner),
                other => {
                    if !out.contains(&other) {
                        out.push(other)
                    }
                }
            }
        }
        match out.len() {
            0 => GCond::Const(false),
            1 => out.pop().unwrap(),
            _ => GCond::Or(out),
        }
    }

    /// Count test with constant folding when it cannot depend on the state.
    pub fn count(atoms: Vec<AtomId>, offset: u32, cmp: CountCmp, bound: u32) -> GCond {
        let lo = offset;
        let hi = offset + atoms.len() as u32;
        let always = (lo..=hi).all(|n| cmp.test(n, bound));
        let never = (lo..=hi).all(|n| !cmp.test(n, bound));
        if always {
            GCond::Const(true)
        } else if never {
            GCond::Const(false)
        } else {
            GCond::Count { atoms, offset, cmp, bound }
        }
    }

    /// Atoms the condition reads.
    pub fn atoms(&self, out: &mut Vec<AtomId>) {
        match self {
            GCond::Const(_) => {}
            GCond::Known(a, _) => out.push(*a),
            GCond::Not(c) => c.atoms(out),
            GCond::And(cs) | GCond::Or(cs) => cs.iter().for_each(|c| c.atoms(out)),
            GCond::Count { atoms, .. } => out.extend(atoms),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn count_over_unknown_atoms_is_zero() {
        let s = BeliefState::unknown(4);
        let c = GCond::count(vec![0, 1], 0, CountCmp::Le, 0);
        assert!(c.holds(&s));
    }

    #[test]
    fn default_negation_of_unknown_holds() {
        let mut s = BeliefState::unknown(2);
        let c = GCond::negate(GCond::Known(0, true));
        assert!(c.holds(&s));
        s.set(0, true);
        assert!(!c.holds(&s));
    }

    #[test]
    fn folding() {
        assert_eq!(GCond::and(vec![GCond::Const(true), GCond::Known(1, true)]), GCond::Known(1, true));
        assert_eq!(GCond::or(vec![GCond::Const(false)]), GCond::Const(false));
        assert_eq!(GCond::count(vec![], 2, CountCmp::Ge, 2), GCond::Const(true));
        assert_eq!(GCond::count(vec![0], 0, CountCmp::Ge, 2), GCond::Const(false));
        assert_eq!(GCond::negate(GCond::negate(GCond::Known(0, false))), GCond::Known(0, false));
    }
}
