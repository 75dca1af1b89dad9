//! Test-side oracles shared by the integration targets.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use cohap::adl::{parse_domain, parse_instance};
use cohap::feasibility::FeasibilityOracle;
use cohap::ground::{ground, BeliefState, GroundOptions, GroundProblem, WeightedCost};
use cohap::plantree::PlanTree;

/// Weight per level; zero entries are dropped.
pub type Cost = BTreeMap<u32, u64>;

pub fn cost_of(w: &WeightedCost) -> Cost {
    w.levels().filter(|&(_, v)| v > 0).collect()
}

fn add(a: &Cost, b: &Cost) -> Cost {
    let mut out = a.clone();
    for (l, v) in b {
        *out.entry(*l).or_default() += v;
    }
    out
}

/// Higher levels dominate.
pub fn cmp_cost(a: &Cost, b: &Cost) -> Ordering {
    let mut levels: Vec<u32> = a.keys().chain(b.keys()).copied().collect();
    levels.sort_unstable_by(|x, y| y.cmp(x));
    levels.dedup();
    for l in levels {
        let (x, y) = (a.get(&l).copied().unwrap_or(0), b.get(&l).copied().unwrap_or(0));
        if x != y {
            return x.cmp(&y);
        }
    }
    Ordering::Equal
}

pub fn cmp_value(a: &(usize, Cost), b: &(usize, Cost)) -> Ordering {
    a.0.cmp(&b.0).then_with(|| cmp_cost(&a.1, &b.1))
}

/// Cost of taking action `a` in `s`, summed directly from the weak terms.
pub fn step_cost(p: &GroundProblem, s: &BeliefState, a: usize) -> Cost {
    let mut c = Cost::new();
    for t in p.actions[a].weak.iter().chain(&p.state_weak) {
        if t.cond.holds(s) {
            *c.entry(t.level).or_default() += u64::from(t.weight);
        }
    }
    c.retain(|_, v| *v > 0);
    c
}

/// Every `(action, outcome, successor)` from `s`, scanning all ground
/// actions. Decisions count only with two or more consistent outcomes.
pub fn moves(p: &GroundProblem, s: &BeliefState) -> Vec<(usize, Option<usize>, BeliefState)> {
    let mut out = Vec::new();
    for (a, act) in p.actions.iter().enumerate() {
        if !act.pre.holds(s) {
            continue;
        }
        if act.is_decision() {
            let succ: Vec<_> =
                (0..act.outcomes.len()).filter_map(|o| p.outcome_successor(s, act, o).map(|n| (o, n))).collect();
            if succ.len() >= 2 {
                out.extend(succ.into_iter().map(|(o, n)| (a, Some(o), n)));
            }
        } else if let Ok(n) = p.successor(s, a, None) {
            out.push((a, None, n));
        }
    }
    out
}

/// Exhaustive depth-limited search for the best `(steps, cost)` run to the
/// goal, where nondeterministic outcomes are chosen freely.
pub struct BruteForce<'a> {
    p: &'a GroundProblem,
    memo: HashMap<(BeliefState, usize), Option<(usize, Cost)>>,
}

impl<'a> BruteForce<'a> {
    pub fn new(p: &'a GroundProblem) -> Self {
        BruteForce { p, memo: HashMap::new() }
    }

    pub fn best(&mut self, s: &BeliefState, limit: usize) -> Option<(usize, Cost)> {
        if self.p.goal.iter().all(|&(a, v)| s.is(a, v)) {
            return Some((0, Cost::new()));
        }
        if limit == 0 {
            return None;
        }
        if let Some(v) = self.memo.get(&(s.clone(), limit)) {
            return v.clone();
        }
        let mut best: Option<(usize, Cost)> = None;
        for (a, _, next) in moves(self.p, s) {
            if let Some((n, c)) = self.best(&next, limit - 1) {
                let cand = (n + 1, add(&step_cost(self.p, s, a), &c));
                if best.as_ref().is_none_or(|b| cmp_value(&cand, b) == Ordering::Less) {
                    best = Some(cand);
                }
            }
        }
        self.memo.insert((s.clone(), limit), best.clone());
        best
    }
}

/// Belief state at every tree node, replayed from the labels.
pub fn node_states(t: &PlanTree, p: &GroundProblem) -> Vec<BeliefState> {
    let mut states: Vec<Option<BeliefState>> = vec![None; t.nodes.len()];
    states[t.root] = Some(p.init.clone());
    let mut stack = vec![t.root];
    while let Some(id) = stack.pop() {
        let n = t.node(id);
        let s = states[id].clone().unwrap();
        let Some(name) = &n.action else { continue };
        let args: Vec<&str> = n.args.iter().map(String::as_str).collect();
        let a = p.find_action(name, &args).unwrap();
        for e in &n.children {
            let o = e.outcome.as_ref().map(|l| p.actions[a].outcomes.iter().position(|x| &x.label == l).unwrap());
            states[e.child] = Some(p.successor(&s, a, o).unwrap());
            stack.push(e.child);
        }
    }
    states.into_iter().map(Option::unwrap).collect()
}

/// For every node, the best `(steps, cost)` over the root-to-leaf runs
/// through its subtree, measured from the node.
pub fn subtree_best(t: &PlanTree, p: &GroundProblem, states: &[BeliefState]) -> Vec<(usize, Cost)> {
    fn go(t: &PlanTree, p: &GroundProblem, states: &[BeliefState], id: usize, out: &mut Vec<Option<(usize, Cost)>>) {
        let n = t.node(id);
        let mut best: Option<(usize, Cost)> = None;
        if n.children.is_empty() {
            best = Some((0, Cost::new()));
        }
        for e in &n.children {
            go(t, p, states, e.child, out);
            let (len, c) = out[e.child].clone().unwrap();
            let args: Vec<&str> = n.args.iter().map(String::as_str).collect();
            let a = p.find_action(n.action.as_deref().unwrap(), &args).unwrap();
            let cand = (len + 1, add(&step_cost(p, &states[id], a), &c));
            if best.as_ref().is_none_or(|b| cmp_value(&cand, b) == Ordering::Less) {
                best = Some(cand);
            }
        }
        out[id] = best;
    }
    let mut out = vec![None; t.nodes.len()];
    go(t, p, states, t.root, &mut out);
    out.into_iter().map(Option::unwrap).collect()
}

/// Depth of every node below the root.
pub fn depths(t: &PlanTree) -> Vec<usize> {
    let mut d = vec![0; t.nodes.len()];
    let mut stack = vec![t.root];
    while let Some(id) = stack.pop() {
        for e in &t.node(id).children {
            d[e.child] = d[id] + 1;
            stack.push(e.child);
        }
    }
    d
}

pub fn micro_problem(dom: &str, inst: &str) -> GroundProblem {
    let d = parse_domain(dom).unwrap();
    let i = parse_instance(inst, &d).unwrap();
    ground(&d, &i, &FeasibilityOracle::new(), &GroundOptions::default()).unwrap()
}

/// Sensing before a choice between a fast and a slow action.
pub const CHECK_THEN_ACT: &str = "
sort thing = a, b.
fluent ready partial.
fluent done(thing).
sensing check
    outcome yes: ready;
    outcome no: -ready;
actuation fast(x:thing)
    pre ready;
    effect done(x);
actuation slow(x:thing)
    pre -ready;
    effect done(x);
actuation slowest(x:thing)
    effect done(x);
weak does slowest(x) [1@1].
";

/// A cheap two-step route competes with an expensive one-step route.
pub const DETOUR: &str = "
sort spot = s1, s2, s3.
fluent at(spot).
static link(spot, spot).
actuation walk(x:spot, y:spot)
    pre link(x, y), at(x), not at(y);
    effect at(y), -at(x);
actuation jump(x:spot)
    pre not at(x);
    effect at(x);
weak does jump(x) [3@1].
weak does walk(x, y) [1@1].
";

/// Asking a partner whose answer is unknown; declining leaves a longer way.
pub const ASK: &str = "
sort item = i1, i2.
fluent placed(item).
fluent willing partial.
fluent lifted(item).
communication ask(x:item)
    pre not placed(x);
    outcome accept: willing => placed(x);
    outcome decline: -willing;
actuation lift(x:item)
    effect lifted(x);
actuation place(x:item)
    pre lifted(x);
    effect placed(x);
weak does lift(x) [1@2].
";

/// One micro planning problem for the oracle comparison.
pub struct Micro {
    pub name: String,
    pub problem: GroundProblem,
}

/// Small problems: hand-written domains plus three-part assemblies.
pub fn micro_instances() -> Vec<Micro> {
    let mut out: Vec<Micro> = [
        ("check-one", CHECK_THEN_ACT, r#"{"goal": ["done(a)"]}"#),
        ("check-two", CHECK_THEN_ACT, r#"{"goal": ["done(a)", "done(b)"]}"#),
        ("detour-far", DETOUR, r#"{"statics": {"link": [["s1","s2"],["s2","s3"]]}, "init": ["at(s1)"], "goal": ["at(s3)"]}"#),
        ("detour-both", DETOUR, r#"{"statics": {"link": [["s1","s2"],["s2","s3"]]}, "init": ["at(s1)"], "goal": ["at(s3)", "at(s2)"]}"#),
        ("ask-one", ASK, r#"{"goal": ["placed(i1)"]}"#),
        ("ask-two", ASK, r#"{"goal": ["placed(i1)", "placed(i2)"]}"#),
    ]
    .into_iter()
    .map(|(name, dom, inst)| Micro { name: name.into(), problem: micro_problem(dom, inst) })
    .collect();
    for (u, p, r, seed) in [(0, 0, 0, 1), (1, 0, 0, 2), (0, 1, 0, 3), (0, 0, 1, 4), (1, 1, 0, 5), (0, 1, 1, 6)] {
        let params = cohap::assembly::AssemblyInstanceParams::with_parts(2, u, p, r, seed);
        let g = cohap::assembly::generate_instance(&params).unwrap();
        out.push(Micro { name: format!("assembly-u{u}p{p}r{r}"), problem: g.ground(&GroundOptions::default()).unwrap() });
    }
    out
}

/// Steps from the root to every node.
pub fn node_prefixes(t: &PlanTree, p: &GroundProblem) -> Vec<Vec<cohap::planner::Step>> {
    let mut out = vec![Vec::new(); t.nodes.len()];
    let mut stack = vec![t.root];
    while let Some(id) = stack.pop() {
        let n = t.node(id);
        let Some(name) = &n.action else { continue };
        let args: Vec<&str> = n.args.iter().map(String::as_str).collect();
        let a = p.find_action(name, &args).unwrap();
        for e in &n.children {
            let o = e.outcome.as_ref().map(|l| p.actions[a].outcomes.iter().position(|x| &x.label == l).unwrap());
            let mut pre = out[id].clone();
            pre.push(cohap::planner::Step { action: a, outcome: o });
            out[e.child] = pre;
            stack.push(e.child);
        }
    }
    out
}

/// Compares the planner with [`BruteForce`] on `p`: the root branch, the
/// branch planned after every node of the tree, and the best run below every
/// node. Returns the number of comparisons or the mismatches.
pub fn compare_with_oracle(p: &GroundProblem, max_horizon: usize) -> Result<usize, Vec<String>> {
    use cohap::planner::{expand_tree, plan_branch, Branch, PlannerConfig};
    let cfg = PlannerConfig { max_horizon, ..PlannerConfig::default() };
    let mut bf = BruteForce::new(p);
    let mut errs = Vec::new();
    let t = match expand_tree(p, &cfg) {
        Ok(t) => t,
        Err(e) => {
            return match bf.best(&p.init, max_horizon) {
                None => Ok(1),
                Some(v) => Err(vec![format!("planner gave up ({e}) but the oracle found {v:?}")]),
            }
        }
    };
    let states = node_states(&t, p);
    let below = subtree_best(&t, p, &states);
    let prefixes = node_prefixes(&t, p);
    let mut checked = 0;
    for id in 0..t.nodes.len() {
        let depth = prefixes[id].len();
        let want = bf.best(&states[id], max_horizon - depth);
        checked += 1;
        if want.as_ref().map(|w| cmp_value(w, &below[id]).is_eq()) != Some(true) {
            errs.push(format!("node {id} ({}): tree best {:?}, oracle {want:?}", t.node(id).label(), below[id]));
        }
        let fixed = Branch::replay(p, &prefixes[id]).unwrap();
        let got = plan_branch(p, &fixed, &cfg).ok().map(|b| (b.horizon - depth, cost_of(&b.cost)));
        checked += 1;
        let same = match (&got, &want) {
            (Some(g), Some(w)) => cmp_value(g, w).is_eq(),
            (None, None) => true,
            _ => false,
        };
        if !same {
            errs.push(format!("branch after node {id}: planner {got:?}, oracle {want:?}"));
        }
    }
    if errs.is_empty() {
        Ok(checked)
    } else {
        Err(errs)
    }
}
