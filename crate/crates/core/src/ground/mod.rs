//! Grounding and the belief-state transition semantics searched by the
//! planner.

mod build;
pub mod eval;
pub mod state;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use crate::adl::ActionKind;
use crate::feasibility::FeasibilityError;

pub use build::ground;
pub use eval::GCond;
pub use state::{AtomId, BeliefState, Truth};

pub type ConstId = u32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroundError {
    #[error("no implementation registered for external `{0}`")]
    MissingExternal(String),
    #[error("grounding needs {atoms} atoms, over the budget of {budget}")]
    Budget { atoms: u64, budget: u64 },
    #[error(transparent)]
    Feasibility(#[from] FeasibilityError),
    #[error("unbound variable `{var}` in {context}")]
    Unbound { var: String, context: String },
    #[error("count guard in {0} depends on the belief state")]
    DynamicGuard(String),
    #[error("ill-sorted atom `{0}`")]
    IllSorted(String),
    #[error("`does` outside a constraint in {0}")]
    MisplacedDoes(String),
    #[error("initial state is inconsistent: {0}")]
    InitialInconsistent(String),
    #[error("applying `{action}` violates {reason}")]
    ConstraintViolation { action: String, reason: String },
    #[error("outcome {outcome} of `{action}` is not consistent here")]
    BadOutcome { action: String, outcome: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOptions {
    pub atom_budget: u64,
    /// Safety constraints are hard; otherwise each violation costs
    /// `safety_penalty` at a level above every weak constraint.
    pub safety_strict: bool,
    pub safety_penalty: u32,
    /// Weight overrides for labelled weak constraints.
    pub weight_overrides: BTreeMap<String, u32>,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions {
            atom_budget: 2_000_000,
            safety_strict: true,
            safety_penalty: 100,
            weight_overrides: BTreeMap::new(),
        }
    }
}

/// Accumulated weak-constraint weight per level. Compared lexicographically
/// from the highest level down; absent levels count as zero.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct WeightedCost {
    by_level: Vec<u64>,
}

impl WeightedCost {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn add(&mut self, level: u32, weight: u64) {
        if weight == 0 {
            return;
        }
        let l = level as usize;
        if self.by_level.len() <= l {
            self.by_level.resize(l + 1, 0);
        }
        self.by_level[l] += weight;
    }

    pub fn add_cost(&mut self, other: &WeightedCost) {
        for (l, w) in other.levels() {
            self.add(l, w);
        }
    }

    pub fn at(&self, level: u32) -> u64 {
        self.by_level.get(level as usize).copied().unwrap_or(0)
    }

    /// Nonzero levels, lowest first.
    pub fn levels(&self) -> impl Iterator<Item = (u32, u64)> + '_ {
        self.by_level.iter().enumerate().filter(|(_, w)| **w > 0).map(|(l, w)| (l as u32, *w))
    }

    pub fn is_zero(&self) -> bool {
        self.by_level.iter().all(|w| *w == 0)
    }
}

impl Ord for WeightedCost {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.by_level.len().max(other.by_level.len());
        for l in (0..n).rev() {
            let a = self.by_level.get(l).copied().unwrap_or(0);
            let b = other.by_level.get(l).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for WeightedCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for WeightedCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.levels().collect::<Vec<_>>().iter().rev().map(|(l, w)| format!("{w}@{l}")).collect();
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" "))
        }
    }
}

/// Literal over a ground atom: `(atom, value)`.
pub type GLit = (AtomId, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundOutcome {
    pub label: String,
    /// Observed literals; must agree with what is already known.
    pub observe: Vec<GLit>,
    /// Consequences; may overwrite known values.
    pub then: Vec<GLit>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub action: usize,
    pub outcome: Option<usize>,
    pub next: BeliefState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakTerm {
    pub cond: GCond,
    pub level: u32,
    pub weight: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub args: Vec<String>,
    pub schema: usize,
    pub kind: ActionKind,
    /// Preconditions conjoined with the negation of every action-occurrence
    /// constraint that matches this action.
    pub pre: GCond,
    pub effects: Vec<GLit>,
    pub outcomes: Vec<GroundOutcome>,
    /// Weak constraints mentioning this action.
    pub weak: Vec<WeakTerm>,
}

impl GroundAction {
    pub fn label(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(","))
        }
    }

    pub fn is_decision(&self) -> bool {
        self.kind.is_decision()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomInstance {
    pub when: GCond,
    pub atoms: Vec<AtomId>,
    pub lo: u32,
    pub hi: u32,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateConstraint {
    pub cond: GCond,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundStats {
    pub atoms: usize,
    pub actions: usize,
    pub live_actions: usize,
    pub external_calls: u64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct GroundProblem {
    pub consts: Vec<String>,
    pub const_index: HashMap<String, ConstId>,
    pub sorts: Vec<(String, Vec<ConstId>)>,
    pub fluent_names: Vec<String>,
    /// `(fluent index, args)` for every ground atom.
    pub atoms: Vec<(usize, Vec<ConstId>)>,
    pub atom_index: HashMap<(usize, Vec<ConstId>), AtomId>,
    pub partial: Vec<bool>,
    pub actions: Vec<GroundAction>,
    /// Actions whose preconditions are not statically false, in order.
    pub live: Vec<usize>,
    pub constraints: Vec<StateConstraint>,
    pub axioms: Vec<AxiomInstance>,
    /// Weak constraints that do not mention actions; charged on every step.
    pub state_weak: Vec<WeakTerm>,
    pub statics: HashMap<String, HashSet<Vec<ConstId>>>,
    pub failures: HashMap<String, HashSet<Vec<ConstId>>>,
    pub init: BeliefState,
    pub goal: Vec<GLit>,
    pub stats: GroundStats,
}

impl GroundProblem {
    pub fn atom_name(&self, a: AtomId) -> String {
        let (f, args) = &self.atoms[a as usize];
        if args.is_empty() {
            self.fluent_names[*f].clone()
        } else {
            let args: Vec<&str> = args.iter().map(|c| self.consts[*c as usize].as_str()).collect();
            format!("{}({})", self.fluent_names[*f], args.join(","))
        }
    }

    pub fn lit_name(&self, (a, v): GLit) -> String {
        if v {
            self.atom_name(a)
        } else {
            format!("-{}", self.atom_name(a))
        }
    }

    fn ids(&self, args: &[&str]) -> Option<Vec<ConstId>> {
        args.iter().map(|a| self.const_index.get(*a).copied()).collect()
    }

    pub fn atom_id(&self, fluent: &str, args: &[&str]) -> Option<AtomId> {
        let f = self.fluent_names.iter().position(|n| n == fluent)?;
        self.atom_index.get(&(f, self.ids(args)?)).copied()
    }

    pub fn find_action(&self, name: &str, args: &[&str]) -> Option<usize> {
        self.actions.iter().position(|a| a.name == name && a.args.iter().map(String::as_str).eq(args.iter().copied()))
    }

    pub fn static_holds(&self, name: &str, args: &[&str]) -> bool {
        match (self.statics.get(name), self.ids(args)) {
            (Some(set), Some(ids)) => set.contains(&ids),
            _ => false,
        }
    }

    pub fn failure_holds(&self, name: &str, args: &[&str]) -> bool {
        match (self.failures.get(name), self.ids(args)) {
            (Some(set), Some(ids)) => set.contains(&ids),
            _ => false,
        }
    }

    pub fn members(&self, sort: &str) -> Vec<&str> {
        self.sorts
            .iter()
            .find(|(s, _)| s == sort)
            .map(|(_, m)| m.iter().map(|c| self.consts[*c as usize].as_str()).collect())
            .unwrap_or_default()
    }

    pub fn is_goal(&self, s: &BeliefState) -> bool {
        self.goal.iter().all(|&(a, v)| s.is(a, v))
    }

    /// Axiom propagation to a fixpoint followed by the hard state
    /// constraints. Returns the reason on failure.
    pub fn close(&self, s: &mut BeliefState) -> Result<(), String> {
        loop {
            let mut changed = false;
            for ax in &self.axioms {
                if !ax.when.holds(s) {
                    continue;
                }
                let t = ax.atoms.iter().filter(|&&a| s.is(a, true)).count() as u32;
                let u = ax.atoms.iter().filter(|&&a| s.get(a) == Truth::Unknown).count() as u32;
                if t > ax.hi || t + u < ax.lo {
                    return Err(format!("axiom {}", ax.text));
                }
                if u > 0 && (t == ax.hi || t + u == ax.lo) {
                    let v = t != ax.hi;
                    for &a in &ax.atoms {
                        if s.get(a) == Truth::Unknown {
                            s.set(a, v);
                        }
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        match self.constraints.iter().find(|c| c.cond.holds(s)) {
            Some(c) => Err(format!("constraint {}", c.text)),
            None => Ok(()),
        }
    }

    fn apply(&self, s: &BeliefState, lits: &[GLit]) -> BeliefState {
        let mut next = s.clone();
        for &(a, v) in lits {
            next.set(a, v);
        }
        next
    }

    /// Successor state of outcome `o` if it is consistent with `s`.
    pub fn outcome_successor(&self, s: &BeliefState, a: &GroundAction, o: usize) -> Option<BeliefState> {
        let out = &a.outcomes[o];
        if out.observe.iter().any(|&(atom, v)| s.is(atom, !v)) {
            return None;
        }
        let mut next = self.apply(s, &out.observe);
        for &(atom, v) in &out.then {
            next.set(atom, v);
        }
        self.close(&mut next).ok().map(|_| next)
    }

    /// Consistent outcomes of a decision action, in declared order, with
    /// their successor states.
    pub fn consistent_successors(&self, s: &BeliefState, a: usize) -> Vec<(usize, BeliefState)> {
        let act = &self.actions[a];
        (0..act.outcomes.len()).filter_map(|o| self.outcome_successor(s, act, o).map(|n| (o, n))).collect()
    }

    pub fn consistent_outcomes(&self, s: &BeliefState, a: usize) -> Vec<usize> {
        self.consistent_successors(s, a).into_iter().map(|(o, _)| o).collect()
    }

    /// Precondition test only; decision actions may still be degenerate.
    pub fn pre_holds(&self, s: &BeliefState, a: usize) -> bool {
        self.actions[a].pre.holds(s)
    }

    /// Applicable actions in the global order. Decision actions with fewer
    /// than two consistent outcomes are left out.
    pub fn applicable(&self, s: &BeliefState) -> Vec<usize> {
        self.live
            .iter()
            .copied()
            .filter(|&a| {
                self.pre_holds(s, a) && (!self.actions[a].is_decision() || self.consistent_outcomes(s, a).len() >= 2)
            })
            .collect()
    }

    /// Every applicable `(action, outcome)` pair with its successor, in the
    /// global order. Deterministic steps that would break a hard constraint
    /// are left out.
    pub fn transitions(&self, s: &BeliefState) -> Vec<Transition> {
        let mut out = Vec::new();
        for &a in &self.live {
            if !self.pre_holds(s, a) {
                continue;
            }
            let act = &self.actions[a];
            if act.is_decision() {
                let succ = self.consistent_successors(s, a);
                if succ.len() >= 2 {
                    out.extend(succ.into_iter().map(|(o, next)| Transition { action: a, outcome: Some(o), next }));
                }
            } else {
                let mut next = self.apply(s, &act.effects);
                if self.close(&mut next).is_ok() {
                    out.push(Transition { action: a, outcome: None, next });
                }
            }
        }
        out
    }

    pub fn successor(&self, s: &BeliefState, a: usize, o: Option<usize>) -> Result<BeliefState, GroundError> {
        let act = &self.actions[a];
        match (act.is_decision(), o) {
            (true, Some(o)) if o < act.outcomes.len() => self
                .outcome_successor(s, act, o)
                .ok_or_else(|| GroundError::BadOutcome { action: act.label(), outcome: o }),
            (false, None) => {
                let mut next = self.apply(s, &act.effects);
                self.close(&mut next)
                    .map_err(|reason| GroundError::ConstraintViolation { action: act.label(), reason })?;
                Ok(next)
            }
            _ => Err(GroundError::BadOutcome { action: act.label(), outcome: o.unwrap_or(usize::MAX) }),
        }
    }

    /// Weak-constraint cost of executing `a` in `s`: every satisfied ground
    /// body contributes its weight.
    pub fn step_cost(&self, s: &BeliefState, a: usize) -> WeightedCost {
        let mut c = WeightedCost::zero();
        for t in self.actions[a].weak.iter().chain(&self.state_weak) {
            if t.cond.holds(s) {
                c.add(t.level, u64::from(t.weight));
            }
        }
        c
    }

    pub fn action_label(&self, a: usize) -> String {
        self.actions[a].label()
    }
}
