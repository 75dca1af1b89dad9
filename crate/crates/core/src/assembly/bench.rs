//! Instance families along the U, P and R axes and their metrics table.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use crate::feasibility::FeasibilityOracle;
use crate::ground::ground;
use crate::planner::{solve_ground, PlannerConfig, Solution, SolveError};
use crate::plantree::{to_json, Metrics, Timings, TreeFile, METRICS_HEADER};

use super::{generate_instance, AssemblyInstanceParams, GenerateError, DOMAIN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    U,
    P,
    R,
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "U" | "u" => Ok(Axis::U),
            "P" | "p" => Ok(Axis::P),
            "R" | "r" => Ok(Axis::R),
            _ => Err(format!("unknown axis `{s}`, expected U, P or R")),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::U => "U",
            Axis::P => "P",
            Axis::R => "R",
        })
    }
}

impl Axis {
    /// Instance with `k` parts on this axis out of `k + 1` movable parts.
    /// The other axes keep one part each where the layout allows it.
    pub fn params(self, k: usize, seed: u64) -> AssemblyInstanceParams {
        let (u, p, r) = match self {
            Axis::U => (k, 1, 0),
            Axis::P => (1, k, 0),
            Axis::R => (1, 0, k),
        };
        AssemblyInstanceParams::with_parts(k + 1, u, p, r, seed)
    }
}

/// `a..b` (inclusive) or a single number.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad range `{s}`"));
    let r = match s.split_once("..") {
        Some((a, b)) => num(a)?..=num(b.trim_start_matches('='))?,
        None => {
            let n = num(s)?;
            n..=n
        }
    };
    if r.is_empty() {
        return Err(format!("empty range `{s}`"));
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub inst: String,
    pub u: usize,
    pub p: usize,
    pub r: usize,
    /// `Err` keeps the row for instances that could not be planned.
    pub result: Result<(Metrics, Timings), String>,
    /// Every repetition produced the same tree bytes.
    pub deterministic: bool,
    /// The first solution, kept for inspection.
    pub solution: Option<Solution>,
}

impl BenchRow {
    pub fn csv(&self) -> String {
        match &self.result {
            Ok((m, t)) => format!(
                "{},{},{},{},{},{:.6},{:.6}",
                self.inst,
                self.u,
                self.p,
                self.r,
                m.csv_fields(),
                t.plan_s,
                t.checks_s
            ),
            Err(e) => {
                let blanks = ["NA"; 12].join(",");
                format!("{},{},{},{},{blanks},NA,NA # {}", self.inst, self.u, self.p, self.r, e.replace(',', ";"))
            }
        }
    }
}

pub fn rows_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv());
        out.push('\n');
    }
    out
}

/// Seconds of planning after which an instance is not repeated further.
const REPEAT_BUDGET_S: f64 = 2.0;

/// Plans every instance of the sweep up to `reps` times, stopping early
/// once an instance has used [`REPEAT_BUDGET_S`]. Times are the minimum
/// over the repetitions.
pub fn bench_sweep(
    axis: Axis,
    range: RangeInclusive<usize>,
    seed: u64,
    cfg: &PlannerConfig,
    reps: usize,
) -> Result<Vec<BenchRow>, GenerateError> {
    let dom = crate::adl::parse_domain(DOMAIN).expect("bundled domain parses");
    let mut rows = Vec::new();
    for k in range {
        let params = axis.params(k, seed);
        let g = generate_instance(&params)?;
        let mut best: Option<(Metrics, Timings)> = None;
        let mut first_json: Option<String> = None;
        let mut solution = None;
        let mut deterministic = true;
        let mut error = None;
        let mut spent = 0.0;
        for _ in 0..reps.max(1) {
            if spent >= REPEAT_BUDGET_S {
                break;
            }
            let oracle = FeasibilityOracle::for_workspace(g.workspace.clone());
            let run = ground(&dom, &g.instance, &oracle, &cfg.ground)
                .map_err(SolveError::from)
                .and_then(|p| solve_ground(Arc::new(p), &oracle, cfg));
            match run {
                Ok(sol) => {
                    let json = to_json(&TreeFile { timings: None, ..sol.file.clone() });
                    deterministic &= first_json.as_ref().is_none_or(|j| *j == json);
                    first_json.get_or_insert(json);
                    let t = sol.timings();
                    spent += t.plan_s;
                    let metrics = sol.file.metrics;
                    solution.get_or_insert(sol);
                    best = Some(match best {
                        None => (metrics, t),
                        Some((m, b)) => (m, Timings { plan_s: b.plan_s.min(t.plan_s), checks_s: b.checks_s.min(t.checks_s) }),
                    });
                }
                Err(e) => {
                    error = Some(e.to_string());
                    break;
                }
            }
        }
        let result = match (error, best) {
            (Some(e), _) => Err(e),
            (None, Some(b)) => Ok(b),
            (None, None) => unreachable!("at least one repetition runs"),
        };
        log::info!("bench {axis}{k} done");
        rows.push(BenchRow { inst: format!("{axis}{k}"), u: params.u, p: params.p, r: params.r, result, deterministic, solution });
    }
    Ok(rows)
}
