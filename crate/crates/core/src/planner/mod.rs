//! Hybrid conditional planning: optimal sequential branches, then one
//! contingency branch for every other outcome of every decision node.

mod search;
#[cfg(test)]
mod tests;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rayon::prelude::*;

use crate::adl::{parse_domain, parse_instance, validate, ParseError};
use crate::feasibility::{FeasibilityOracle, Workspace};
use crate::ground::{ground, BeliefState, GroundError, GroundOptions, GroundProblem, WeightedCost};
use crate::plantree::{NodeKind, PlanTree, SafetyFacts, Timings, TreeBuilder, TreeFile};

pub const DEFAULT_MAX_HORIZON: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerConfig {
    pub max_horizon: usize,
    pub workers: usize,
    /// Atom budget, safety mode and weak-constraint weight overrides.
    pub ground: GroundOptions,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig { max_horizon: DEFAULT_MAX_HORIZON, workers: 1, ground: GroundOptions::default() }
    }
}

/// One step of a branch: a ground action and, for decision actions, the
/// outcome taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Step {
    pub action: usize,
    pub outcome: Option<usize>,
}

impl Step {
    pub fn label(&self, p: &GroundProblem) -> String {
        let act = &p.actions[self.action];
        match self.outcome {
            Some(o) => format!("{}={}", act.label(), act.outcomes[o].label),
            None => act.label(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Branch {
    pub prefix: Vec<Step>,
    pub terminal: BeliefState,
    /// Weak-constraint cost of the steps added by the last search.
    pub cost: WeightedCost,
    pub horizon: usize,
}

impl Branch {
    pub fn empty(p: &GroundProblem) -> Self {
        Branch { prefix: Vec::new(), terminal: p.init.clone(), cost: WeightedCost::zero(), horizon: 0 }
    }

    /// Replays `steps` from the initial state.
    pub fn replay(p: &GroundProblem, steps: &[Step]) -> Result<Self, GroundError> {
        let mut s = p.init.clone();
        for st in steps {
            let act = &p.actions[st.action];
            if !p.applicable(&s).contains(&st.action) {
                return Err(GroundError::BadOutcome { action: act.label(), outcome: st.outcome.unwrap_or(usize::MAX) });
            }
            s = p.successor(&s, st.action, st.outcome)?;
        }
        Ok(Branch { prefix: steps.to_vec(), terminal: s, cost: WeightedCost::zero(), horizon: steps.len() })
    }

    /// States before each step, then the terminal state.
    pub fn states(&self, p: &GroundProblem) -> Vec<BeliefState> {
        let mut out = vec![p.init.clone()];
        for st in &self.prefix {
            let next = p.successor(out.last().unwrap(), st.action, st.outcome).expect("branch replays");
            out.push(next);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("no goal-reaching branch within horizon {max_horizon} after [{}]", .prefix.join(", "))]
pub struct Unsolvable {
    /// Labels of the steps leading to the dead end, with outcomes.
    pub prefix: Vec<String>,
    pub max_horizon: usize,
}

/// Extends `fixed` to the goal with the fewest steps, then the least suffix
/// cost, then the first branch in the global action and outcome order.
pub fn plan_branch(p: &GroundProblem, fixed: &Branch, cfg: &PlannerConfig) -> Result<Branch, Unsolvable> {
    let budget = cfg.max_horizon.saturating_sub(fixed.prefix.len());
    let unsolvable =
        || Unsolvable { prefix: fixed.prefix.iter().map(|s| s.label(p)).collect(), max_horizon: cfg.max_horizon };
    let (suffix, cost) = search::shortest(p, &fixed.terminal, budget).ok_or_else(unsolvable)?;
    let mut s = fixed.terminal.clone();
    for st in &suffix {
        s = p.successor(&s, st.action, st.outcome).expect("search steps replay");
    }
    let mut prefix = fixed.prefix.clone();
    prefix.extend(suffix);
    Ok(Branch { horizon: prefix.len(), prefix, terminal: s, cost })
}

/// Plan subtree rooted at a state, shared between identical contingencies.
#[derive(Debug)]
enum Sub {
    Leaf,
    Step { step: Step, children: Vec<(Option<String>, Arc<Sub>)> },
}

struct Expander<'a> {
    p: &'a GroundProblem,
    max_horizon: usize,
    memo: Mutex<HashMap<BeliefState, (Arc<Sub>, usize)>>,
}

impl Expander<'_> {
    /// Subtree for `s` reached after `depth` steps, with its height.
    fn subtree(&self, s: &BeliefState, depth: usize) -> Result<(Arc<Sub>, usize), Unsolvable> {
        let fail = |prefix| Unsolvable { prefix, max_horizon: self.max_horizon };
        if let Some((sub, h)) = self.memo.lock().unwrap().get(s).cloned() {
            return if depth + h <= self.max_horizon { Ok((sub, h)) } else { Err(fail(Vec::new())) };
        }
        let p = self.p;
        let budget = self.max_horizon.saturating_sub(depth);
        let (steps, _) = search::shortest(p, s, budget).ok_or_else(|| fail(Vec::new()))?;
        let mut states = vec![s.clone()];
        for st in &steps {
            states.push(p.successor(states.last().unwrap(), st.action, st.outcome).expect("search steps replay"));
        }

        // Contingencies: every consistent outcome not taken on the branch.
        let mut jobs = Vec::new();
        for (i, st) in steps.iter().enumerate() {
            if let Some(taken) = st.outcome {
                for (o, next) in p.consistent_successors(&states[i], st.action) {
                    if o != taken {
                        jobs.push((i, o, next));
                    }
                }
            }
        }
        let solved: Vec<Result<(Arc<Sub>, usize), Unsolvable>> =
            jobs.par_iter().map(|(i, _, next)| self.subtree(next, depth + i + 1)).collect();
        let mut contingencies: HashMap<(usize, usize), (Arc<Sub>, usize)> = HashMap::new();
        for ((i, o, _), r) in jobs.iter().zip(solved) {
            let r = r.map_err(|mut e| {
                let mut prefix: Vec<String> = steps[..*i].iter().map(|st| st.label(p)).collect();
                prefix.push(Step { action: steps[*i].action, outcome: Some(*o) }.label(p));
                prefix.append(&mut e.prefix);
                e.prefix = prefix;
                e
            })?;
            contingencies.insert((*i, *o), r);
        }

        let mut node = Arc::new(Sub::Leaf);
        let mut height = 0;
        for (i, st) in steps.iter().enumerate().rev() {
            let act = &p.actions[st.action];
            let children = match st.outcome {
                None => vec![(None, node)],
                Some(taken) => {
                    let mut h = height;
                    let kids = p
                        .consistent_outcomes(&states[i], st.action)
                        .into_iter()
                        .map(|o| {
                            let sub = if o == taken {
                                node.clone()
                            } else {
                                let (sub, sh) = &contingencies[&(i, o)];
                                h = h.max(*sh);
                                sub.clone()
                            };
                            (Some(act.outcomes[o].label.clone()), sub)
                        })
                        .collect();
                    height = h;
                    kids
                }
            };
            node = Arc::new(Sub::Step { step: *st, children });
            height += 1;
        }
        if depth + height > self.max_horizon {
            return Err(fail(Vec::new()));
        }
        self.memo.lock().unwrap().insert(s.clone(), (node.clone(), height));
        Ok((node, height))
    }
}

fn flatten(p: &GroundProblem, sub: &Sub, depth: usize, b: &mut TreeBuilder) -> usize {
    match sub {
        Sub::Leaf => b.push(NodeKind::Leaf, None, Vec::new(), depth),
        Sub::Step { step, children } => {
            let act = &p.actions[step.action];
            let id = b.push(NodeKind::from_action(act.kind), Some(act.name.clone()), act.args.clone(), depth);
            for (label, child) in children {
                let c = flatten(p, child, depth + 1, b);
                b.link(id, label.clone(), c);
            }
            id
        }
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    pool.install(f)
}

/// The full conditional plan. Node ids follow a depth-first preorder with
/// children in outcome order, so the result does not depend on `workers`.
pub fn expand_tree(p: &GroundProblem, cfg: &PlannerConfig) -> Result<PlanTree, Unsolvable> {
    let ex = Expander { p, max_horizon: cfg.max_horizon, memo: Mutex::new(HashMap::new()) };
    let (root, _) = with_workers(cfg.workers, || ex.subtree(&p.init, 0))?;
    let mut b = TreeBuilder::new();
    flatten(p, &root, 0, &mut b);
    Ok(b.finish())
}

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("domain: {0}")]
    Domain(ParseError),
    #[error("domain: {0}")]
    Invalid(String),
    #[error("instance: {0}")]
    Instance(ParseError),
    #[error(transparent)]
    Ground(#[from] GroundError),
    #[error(transparent)]
    Unsolvable(#[from] Unsolvable),
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub problem: Arc<GroundProblem>,
    pub file: TreeFile,
}

impl Solution {
    pub fn timings(&self) -> Timings {
        self.file.timings.expect("solve records timings")
    }
}

/// Parse, ground, expand and measure. `plan_s` is the wall time of the
/// tree expansion; `checks_s` the time spent inside feasibility checks.
pub fn solve(dom_text: &str, inst_text: &str, ws: &Workspace, cfg: &PlannerConfig) -> Result<Solution, SolveError> {
    let dom = parse_domain(dom_text).map_err(SolveError::Domain)?;
    if let Some(d) = validate(&dom).into_iter().find(|d| d.is_error()) {
        return Err(SolveError::Invalid(d.to_string()));
    }
    let inst = parse_instance(inst_text, &dom).map_err(SolveError::Instance)?;
    let oracle = FeasibilityOracle::for_workspace(ws.clone());
    let p = ground(&dom, &inst, &oracle, &cfg.ground)?;
    solve_ground(Arc::new(p), &oracle, cfg)
}

/// Expansion and measurement for an already grounded problem.
pub fn solve_ground(
    p: Arc<GroundProblem>,
    oracle: &FeasibilityOracle,
    cfg: &PlannerConfig,
) -> Result<Solution, SolveError> {
    let start = Instant::now();
    let tree = expand_tree(&p, cfg)?;
    let plan_s = start.elapsed().as_secs_f64();
    let checks_s = oracle.check_stats().seconds;
    log::info!("plan nodes={} plan_s={plan_s:.6} checks_s={checks_s:.6}", tree.nodes.len());
    let mut file = TreeFile::new(tree, SafetyFacts::from_problem(&p));
    file.timings = Some(Timings { plan_s, checks_s });
    Ok(Solution { problem: p, file })
}
