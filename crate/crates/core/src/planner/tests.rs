use super::*;
use crate::adl::{parse_domain, parse_instance};
use crate::assembly::{generate_instance, AssemblyInstanceParams};
use crate::plantree::{replay_validate, to_json, Metrics};

const CHECK_THEN_ACT: &str = "
sort thing = a.
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
";

fn problem(dom: &str, inst: &str) -> GroundProblem {
    let d = parse_domain(dom).unwrap();
    let i = parse_instance(inst, &d).unwrap();
    ground(&d, &i, &FeasibilityOracle::new(), &GroundOptions::default()).unwrap()
}

fn labels(p: &GroundProblem, b: &Branch) -> Vec<String> {
    b.prefix.iter().map(|s| s.label(p)).collect()
}

#[test]
fn binary_sensing_gives_two_leaves() {
    let p = problem(CHECK_THEN_ACT, r#"{"goal": ["done(a)"]}"#);
    let t = expand_tree(&p, &PlannerConfig::default()).unwrap();
    let m = Metrics::of(&t);
    assert_eq!((m.DN, m.L, m.BF, m.N), (1, 2, 2, 5));
    assert!(replay_validate(&t, &p).is_empty());
    assert_eq!(t.node(t.root).label(), "check");
    assert_eq!(t.node(t.node(0).children[1].child).label(), "slow(a)");
}

#[test]
fn dead_end_outcome_is_reported() {
    let dom = CHECK_THEN_ACT.replace("actuation slow(x:thing)\n    pre -ready;\n    effect done(x);\n", "");
    let p = problem(&dom, r#"{"goal": ["done(a)"]}"#);
    let err = expand_tree(&p, &PlannerConfig::default()).unwrap_err();
    assert_eq!(err.prefix, ["check=no"]);
}

#[test]
fn satisfied_goal_needs_no_steps() {
    let p = problem(CHECK_THEN_ACT, r#"{"init": ["done(a)"], "goal": ["done(a)"]}"#);
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(b.horizon, 0);
    let t = expand_tree(&p, &PlannerConfig::default()).unwrap();
    assert_eq!(Metrics::of(&t).N, 1);
    let prefix = Branch::replay(&p, &[Step { action: 0, outcome: Some(0) }]).unwrap();
    let b = plan_branch(&p, &prefix, &PlannerConfig::default()).unwrap();
    assert_eq!(b.horizon, 1);
    assert!(b.cost.is_zero());
}

#[test]
fn horizon_limit_is_respected() {
    let p = problem(CHECK_THEN_ACT, r#"{"goal": ["done(a)"]}"#);
    let cfg = PlannerConfig { max_horizon: 1, ..PlannerConfig::default() };
    assert!(plan_branch(&p, &Branch::empty(&p), &cfg).is_err());
    assert!(expand_tree(&p, &cfg).is_err());
}

#[test]
fn deterministic_domain_gives_a_single_path() {
    let dom = "
sort thing = a, b.
fluent done(thing).
actuation make(x:thing)
    pre not done(x);
    effect done(x);
";
    let p = problem(dom, r#"{"goal": ["done(a)", "done(b)"]}"#);
    let t = expand_tree(&p, &PlannerConfig::default()).unwrap();
    let m = Metrics::of(&t);
    assert_eq!((m.L, m.DN, m.D, m.N), (1, 0, 2, 3));
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(labels(&p, &b), ["make(a)", "make(b)"]);
}

#[test]
fn cheaper_branch_wins_among_equal_horizons() {
    let dom = "
sort thing = a.
fluent done(thing).
actuation costly(x:thing)
    effect done(x);
actuation cheap(x:thing)
    effect done(x);
weak does costly(x) [3@1].
weak does cheap(x) [1@1].
";
    let p = problem(dom, r#"{"goal": ["done(a)"]}"#);
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(labels(&p, &b), ["cheap(a)"]);
    assert_eq!(b.cost.at(1), 1);
    // A higher level dominates any amount at lower levels.
    let dom = dom.replace("[1@1]", "[1@2]");
    let p = problem(&dom, r#"{"goal": ["done(a)"]}"#);
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(labels(&p, &b), ["costly(a)"]);
}

#[test]
fn one_reachable_part_is_held_then_attached() {
    let mut params = AssemblyInstanceParams::with_parts(1, 0, 0, 1, 3);
    params.n_feet = 0;
    let g = generate_instance(&params).unwrap();
    let p = g.ground(&GroundOptions::default()).unwrap();
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(b.horizon, 2);
    let l = labels(&p, &b);
    assert!(l[0].starts_with("hold(") && l[0].ends_with(",leg1)"), "{l:?}");
    assert!(l[1].starts_with("attach(") && l[1].ends_with(",leg1,top1,c1)"), "{l:?}");
}

#[test]
fn unreachable_safe_part_is_handed_to_the_human() {
    let params = AssemblyInstanceParams::with_parts(1, 0, 1, 0, 3);
    let g = generate_instance(&params).unwrap();
    let p = g.ground(&GroundOptions::default()).unwrap();
    let b = plan_branch(&p, &Branch::empty(&p), &PlannerConfig::default()).unwrap();
    assert_eq!(labels(&p, &b), ["askHelp(leg1,top1,c1)=accept"]);
    assert_eq!(b.cost.at(1), 1);
    let t = expand_tree(&p, &PlannerConfig::default()).unwrap();
    assert!(replay_validate(&t, &p).is_empty());
    assert_eq!(Metrics::of(&t).L, 2);
}

#[test]
fn worker_count_does_not_change_the_tree() {
    let g = generate_instance(&AssemblyInstanceParams::with_parts(4, 2, 1, 0, 5)).unwrap();
    let p = Arc::new(g.ground(&GroundOptions::default()).unwrap());
    let json = |workers| {
        let cfg = PlannerConfig { workers, ..PlannerConfig::default() };
        let t = expand_tree(&p, &cfg).unwrap();
        to_json(&TreeFile::new(t, SafetyFacts::from_problem(&p)))
    };
    assert_eq!(json(1), json(4));
}

#[test]
fn solve_runs_the_whole_pipeline() {
    let g = generate_instance(&AssemblyInstanceParams::baseline()).unwrap();
    let sol = solve(crate::assembly::DOMAIN, &g.instance.to_json(), &g.workspace, &PlannerConfig::default()).unwrap();
    assert!(replay_validate(&sol.file.tree, &sol.problem).is_empty());
    let t = sol.timings();
    assert!(t.checks_s < t.plan_s);
    assert!(matches!(
        solve("sort x", "{}", &g.workspace, &PlannerConfig::default()),
        Err(SolveError::Domain(_))
    ));
}
