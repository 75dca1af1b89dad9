//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
//! failure. Run with `cargo test --test acceptance`.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use cohap::assembly::{bench_sweep, generate_instance, AssemblyInstanceParams, Axis, BenchRow};
use cohap::ground::GroundProblem;
use cohap::planner::{expand_tree, PlannerConfig, DEFAULT_MAX_HORIZON};
use cohap::plantree::{replay_validate, NodeKind, PlanTree};

use common::{compare_with_oracle, micro_instances, node_states};

const SEED: u64 = 1;
const SWEEP: std::ops::RangeInclusive<usize> = 2..=6;

struct Report {
    failed: usize,
}

impl Report {
    fn line(&mut self, name: &str, ok: bool, detail: String) {
        if !ok {
            self.failed += 1;
        }
        println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
}

fn oracle_equivalence(r: &mut Report) {
    let start = Instant::now();
    let micros = micro_instances();
    let mut errs = Vec::new();
    let mut checks = 0;
    for m in &micros {
        match compare_with_oracle(&m.problem, 8) {
            Ok(n) => checks += n,
            Err(e) => errs.push(format!("{}: {}", m.name, e.join("; "))),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = errs.is_empty() && micros.len() >= 10 && secs < 60.0;
    let detail = if errs.is_empty() {
        format!("{} instances, {checks} comparisons, {secs:.2}s", micros.len())
    } else {
        errs.join(" | ")
    };
    r.line("oracle equivalence", ok, detail);
}

/// Problems with the shape of `t` over `p`, checked without the planner.
fn structure_errors(t: &PlanTree, p: &GroundProblem) -> Vec<String> {
    let mut errs: Vec<String> = replay_validate(t, p).iter().map(|v| v.to_string()).collect();
    if !errs.is_empty() {
        return errs;
    }
    let states = node_states(t, p);
    for n in &t.nodes {
        let want = match n.kind {
            NodeKind::Leaf => Some(0),
            NodeKind::Actuation | NodeKind::CommDet => Some(1),
            NodeKind::Sensing | NodeKind::CommNondet => None,
        };
        match want {
            Some(w) if n.children.len() != w => errs.push(format!("node {} has {} children", n.id, n.children.len())),
            None if n.children.len() < 2 => errs.push(format!("decision node {} has {} children", n.id, n.children.len())),
            None => {
                let args: Vec<&str> = n.args.iter().map(String::as_str).collect();
                let a = p.find_action(n.action.as_deref().unwrap(), &args).unwrap();
                let act = &p.actions[a];
                let possible: BTreeSet<&str> = (0..act.outcomes.len())
                    .filter(|&o| p.outcome_successor(&states[n.id], act, o).is_some())
                    .map(|o| act.outcomes[o].label.as_str())
                    .collect();
                let present: BTreeSet<&str> = n.children.iter().filter_map(|e| e.outcome.as_deref()).collect();
                if possible != present {
                    errs.push(format!("node {}: outcomes {present:?}, possible {possible:?}", n.id));
                }
            }
            _ => {}
        }
    }
    errs
}

fn structural_suite(r: &mut Report, sweeps: &[(Axis, Vec<BenchRow>)]) {
    let mut trees = 0;
    let mut errs = Vec::new();
    for (_, rows) in sweeps {
        for row in rows {
            match &row.solution {
                Some(s) => {
                    trees += 1;
                    errs.extend(structure_errors(&s.file.tree, &s.problem).into_iter().map(|e| format!("{}: {e}", row.inst)));
                }
                None => errs.push(format!("{}: no tree", row.inst)),
            }
        }
    }
    for movable in 2..=4 {
        for (u, p, rr) in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, 1)] {
            if u + p + rr > movable {
                continue;
            }
            for seed in 1..=3 {
                let g = generate_instance(&AssemblyInstanceParams::with_parts(movable, u, p, rr, seed)).unwrap();
                let prob = g.ground(&Default::default()).unwrap();
                match expand_tree(&prob, &PlannerConfig::default()) {
                    Ok(t) => {
                        trees += 1;
                        errs.extend(structure_errors(&t, &prob).into_iter().map(|e| format!("m{movable}u{u}p{p}r{rr}s{seed}: {e}")));
                    }
                    Err(e) => errs.push(format!("m{movable}u{u}p{p}r{rr}s{seed}: {e}")),
                }
            }
        }
    }
    let detail = if errs.is_empty() { format!("{trees} trees, zero violations") } else { errs.join(" | ") };
    r.line("structural suite", errs.is_empty(), detail);
}

/// Communication actions that hand a part to the human.
const TOWARD_HUMAN: [&str; 4] = ["askHelp", "requestToAttach", "requestToUnhold", "confirmAttach"];

fn safety(r: &mut Report, sweeps: &[(Axis, Vec<BenchRow>)]) {
    let mut errs = Vec::new();
    let (mut comm, mut asks) = (0, 0);
    for (axis, rows) in sweeps {
        for (k, row) in SWEEP.zip(rows) {
            let Some(s) = &row.solution else { continue };
            let g = generate_instance(&axis.params(k, SEED)).unwrap();
            let ws = &g.workspace;
            let p = &s.problem;
            let dangerous: BTreeSet<&str> = s.file.safety.dangerous_parts.iter().map(String::as_str).collect();
            for n in &s.file.tree.nodes {
                let Some(action) = n.action.as_deref() else { continue };
                if !n.kind.is_communication() {
                    continue;
                }
                comm += 1;
                let part = n.args[0].as_str();
                if TOWARD_HUMAN.contains(&action) && dangerous.contains(part) {
                    errs.push(format!("{}: {} on a dangerous part", row.inst, n.label()));
                }
                if action == "askHelp" {
                    asks += 1;
                    let region = p.members("region").into_iter().find(|reg| p.static_holds("loc", &[part, reg])).unwrap();
                    for m in p.members("manip") {
                        if ws.reachable(m, region).unwrap() {
                            errs.push(format!("{}: {} although {m} reaches {region}", row.inst, n.label()));
                        }
                    }
                }
            }
        }
    }
    let detail = if errs.is_empty() {
        format!("{comm} communication nodes, {asks} askHelp nodes, zero violations")
    } else {
        errs.join(" | ")
    };
    r.line("safety", errs.is_empty(), detail);
}

fn nondecreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

fn trends(r: &mut Report, sweeps: &[(Axis, Vec<BenchRow>, f64)]) {
    let mut errs = Vec::new();
    let mut summary = Vec::new();
    let mut comm = std::collections::BTreeMap::new();
    for (axis, rows, secs) in sweeps {
        let ok_rows: Vec<_> = rows.iter().filter_map(|row| row.result.as_ref().ok()).collect();
        if ok_rows.len() != rows.len() {
            errs.push(format!("{axis}: unsolved instances"));
            continue;
        }
        let n: Vec<f64> = ok_rows.iter().map(|(m, _)| m.N as f64).collect();
        let t: Vec<f64> = ok_rows.iter().map(|(_, t)| t.plan_s).collect();
        if !nondecreasing(&n) {
            errs.push(format!("{axis}: N {n:?}"));
        }
        if !nondecreasing(&t) {
            errs.push(format!("{axis}: plan_s {t:?}"));
        }
        if *secs >= 900.0 {
            errs.push(format!("{axis}: sweep took {secs:.0}s"));
        }
        let o: Vec<f64> = ok_rows.iter().map(|(m, _)| m.O as f64).collect();
        let rq: Vec<f64> = ok_rows.iter().map(|(m, _)| m.Rq as f64).collect();
        if *axis == Axis::U && !nondecreasing(&o) {
            errs.push(format!("U: O {o:?}"));
        }
        if *axis == Axis::P && !nondecreasing(&rq) {
            errs.push(format!("P: Rq {rq:?}"));
        }
        let c: Vec<usize> = ok_rows.iter().map(|(m, _)| m.communication()).collect();
        summary.push(format!("{axis}: N {n:?} comm {c:?} {secs:.1}s"));
        comm.insert(axis.to_string(), c);
    }
    if let (Some(u), Some(p), Some(rr)) = (comm.get("U"), comm.get("P"), comm.get("R")) {
        let total = |v: &Vec<usize>| v.iter().sum::<usize>();
        if !(total(rr) < total(u) && total(rr) < total(p)) {
            errs.push(format!("communication totals U {} P {} R {}", total(u), total(p), total(rr)));
        }
        for i in 0..rr.len() {
            if !(rr[i] < u[i] && rr[i] < p[i]) {
                errs.push(format!("k={}: communication U {} P {} R {}", i + 2, u[i], p[i], rr[i]));
            }
        }
    }
    let detail = if errs.is_empty() { summary.join("; ") } else { errs.join(" | ") };
    r.line("trend reproduction", errs.is_empty(), detail);
}

fn check_split(r: &mut Report, sweeps: &[(Axis, Vec<BenchRow>)]) {
    let mut errs = Vec::new();
    let mut worst: f64 = 0.0;
    for (_, rows) in sweeps {
        for row in rows {
            match &row.result {
                Ok((_, t)) if t.checks_s < t.plan_s => worst = worst.max(t.checks_s / t.plan_s),
                Ok((_, t)) => errs.push(format!("{}: checks {:.6}s, plan {:.6}s", row.inst, t.checks_s, t.plan_s)),
                Err(e) => errs.push(format!("{}: {e}", row.inst)),
            }
        }
    }
    let detail =
        if errs.is_empty() { format!("largest checks/plan ratio {worst:.4}") } else { errs.join(" | ") };
    r.line("checks vs plan time", errs.is_empty(), detail);
}

fn determinism(r: &mut Report, sweeps: &[(Axis, Vec<BenchRow>)]) {
    let dir = tempfile::tempdir().unwrap();
    let mut errs = Vec::new();
    let mut cases: Vec<(String, Option<std::path::PathBuf>)> = vec![("default".into(), None)];
    for axis in [Axis::U, Axis::P, Axis::R] {
        let g = generate_instance(&axis.params(3, SEED)).unwrap();
        let inst = dir.path().join(format!("{axis}3.json"));
        std::fs::write(&inst, g.instance.to_json()).unwrap();
        std::fs::write(dir.path().join("bench.json"), g.workspace.to_json()).unwrap();
        cases.push((format!("{axis}3"), Some(inst)));
    }
    for (name, inst) in &cases {
        let plan = |jobs: &str| {
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_cohap"));
            cmd.args(["plan", "--jobs", jobs]);
            if let Some(i) = inst {
                cmd.arg("--instance").arg(i);
            }
            let out = cmd.output().unwrap();
            assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
            out.stdout
        };
        let runs = [plan("1"), plan("1"), plan("8"), plan("8")];
        if runs.iter().any(|x| *x != runs[0]) {
            errs.push(format!("{name}: tree bytes differ"));
        }
    }
    let unstable: Vec<&str> =
        sweeps.iter().flat_map(|(_, rows)| rows).filter(|row| !row.deterministic).map(|row| row.inst.as_str()).collect();
    if !unstable.is_empty() {
        errs.push(format!("repeated sweep runs differ on {unstable:?}"));
    }
    let detail = if errs.is_empty() {
        format!("{} instances, serial and 8 jobs byte-identical", cases.len())
    } else {
        errs.join(" | ")
    };
    r.line("determinism", errs.is_empty(), detail);
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut r = Report { failed: 0 };
    oracle_equivalence(&mut r);

    let cfg = PlannerConfig { max_horizon: DEFAULT_MAX_HORIZON, ..PlannerConfig::default() };
    let timed: Vec<(Axis, Vec<BenchRow>, f64)> = [Axis::U, Axis::P, Axis::R]
        .into_iter()
        .map(|axis| {
            let start = Instant::now();
            let rows = bench_sweep(axis, SWEEP, SEED, &cfg, 5).unwrap();
            (axis, rows, start.elapsed().as_secs_f64())
        })
        .collect();
    for (_, rows, _) in &timed {
        print!("{}", cohap::assembly::rows_csv(rows).lines().skip(1).map(|l| format!("  {l}\n")).collect::<String>());
    }
    let sweeps: Vec<(Axis, Vec<BenchRow>)> = timed.iter().map(|(a, rows, _)| (*a, rows.clone())).collect();

    structural_suite(&mut r, &sweeps);
    safety(&mut r, &sweeps);
    trends(&mut r, &timed);
    check_split(&mut r, &sweeps);
    determinism(&mut r, &sweeps);

    if r.failed > 0 {
        println!("{} criteria failed", r.failed);
        std::process::exit(1);
    }
}
