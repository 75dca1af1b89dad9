//! Command-line front end. Exit status: 0 on success, 1 when the inputs or
//! the planning problem are at fault, 2 on usage errors.

use std::fs;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::adl::{parse_domain, parse_instance, validate, InstanceSpec};
use crate::assembly::{self, bench_sweep, parse_range, rows_csv, AssemblyInstanceParams, Axis, Shape};
use crate::executor::{self, ExecutionLog, OutcomeProvider, RandomProvider, ScriptedProvider, SessionOptions};
use crate::feasibility::{FeasibilityOracle, Workspace};
use crate::ground::{ground, GroundOptions, GroundProblem};
use crate::planner::{solve_ground, PlannerConfig, DEFAULT_MAX_HORIZON};
use crate::plantree::{self, TreeFile, METRICS_HEADER};

#[derive(Parser, Debug)]
#[command(name = "cohap", version, about = "Hybrid conditional planner for human-robot collaborative assembly")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute a conditional plan tree.
    Plan(PlanArgs),
    /// Print the metrics row of a tree file.
    Stats {
        tree: PathBuf,
    },
    /// Replay every branch of a tree against its problem.
    Validate {
        tree: PathBuf,
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Render a tree file as Graphviz.
    ExportDot {
        tree: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Execute a tree with a scripted, random or interactive teammate.
    Exec(ExecArgs),
    /// Generate an assembly instance.
    Gen(GenArgs),
    /// Sweep an instance family and print the metrics table.
    Bench(BenchArgs),
    /// One feasibility query against a workspace.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// ADL-H domain; the bundled assembly domain when omitted.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Instance JSON; the bundled default instance when omitted.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Workspace JSON; otherwise the instance's `workspace` entry, then the
    /// bundled bench.
    #[arg(long)]
    pub workspace: Option<PathBuf>,
    /// Treat safety constraints as heavily weighted instead of hard.
    #[arg(long)]
    pub soft_safety: bool,
    /// Override a labelled weak constraint, e.g. `verbosity=3`.
    #[arg(long = "weight", value_parser = parse_weight)]
    pub weights: Vec<(String, u32)>,
    #[arg(long, default_value_t = 2_000_000)]
    pub atom_budget: u64,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Where to write the tree JSON; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
    pub max_horizon: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Record plan and check times in the tree file.
    #[arg(long)]
    pub with_timings: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProviderKind {
    Scripted,
    Random,
    Interactive,
}

#[derive(Args, Debug)]
pub struct ExecArgs {
    #[arg(long)]
    pub tree: PathBuf,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = ProviderKind::Scripted)]
    pub provider: ProviderKind,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// One outcome per line; without it the scripted teammate always picks
    /// the first outcome.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:7878")]
    pub listen: String,
    /// Seconds to wait for each interactive answer.
    #[arg(long, default_value_t = 120)]
    pub timeout: u64,
    /// JSON-lines execution log.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, default_value_t = 2)]
    pub legs: usize,
    #[arg(long, default_value_t = 1)]
    pub feet: usize,
    /// Comma-separated foot shapes (square, triangle, circle).
    #[arg(long, value_delimiter = ',', value_parser = |s: &str| s.parse::<Shape>())]
    pub foot_shapes: Vec<Shape>,
    #[arg(short = 'U', long = "unsafe", default_value_t = 1)]
    pub u: usize,
    #[arg(short = 'P', long = "human-only", default_value_t = 1)]
    pub p: usize,
    #[arg(short = 'R', long = "robot-only", default_value_t = 1)]
    pub r: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the workspace the instance refers to.
    #[arg(long)]
    pub workspace_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_parser = |s: &str| s.parse::<Axis>())]
    pub axis: Axis,
    #[arg(long, default_value = "2..6", value_parser = parse_range)]
    pub range: std::ops::RangeInclusive<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Repetitions per instance; times are the minimum.
    #[arg(long, default_value_t = 3)]
    pub reps: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    #[arg(long, default_value_t = DEFAULT_MAX_HORIZON)]
    pub max_horizon: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(long)]
    pub workspace: Option<PathBuf>,
    #[arg(long)]
    pub manip: String,
    /// Region to reach.
    #[arg(long, conflicts_with = "cell", required_unless_present = "cell")]
    pub region: Option<String>,
    /// Single cell `x,y`.
    #[arg(long, value_parser = parse_cell)]
    pub cell: Option<(i32, i32)>,
}

fn parse_weight(s: &str) -> Result<(String, u32), String> {
    let (l, w) = s.split_once('=').ok_or("expected label=weight")?;
    let w: u32 = w.parse().map_err(|_| format!("bad weight `{w}`"))?;
    if w == 0 {
        return Err("weights are at least 1".into());
    }
    Ok((l.to_string(), w))
}

fn parse_cell(s: &str) -> Result<(i32, i32), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let n = |t: &str| t.trim().parse::<i32>().map_err(|_| format!("bad coordinate `{t}`"));
    Ok((n(x)?, n(y)?))
}

/// Error shown to the user; exit status 1.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Loaded and grounded inputs.
pub struct Loaded {
    pub problem: GroundProblem,
    pub oracle: FeasibilityOracle,
    pub instance: InstanceSpec,
}

impl ProblemArgs {
    fn ground_options(&self) -> GroundOptions {
        GroundOptions {
            atom_budget: self.atom_budget,
            safety_strict: !self.soft_safety,
            weight_overrides: self.weights.iter().cloned().collect(),
            ..GroundOptions::default()
        }
    }

    pub fn load(&self) -> Result<Loaded, Failure> {
        let (dom_text, dom_name) = match &self.domain {
            Some(p) => (read(p)?, p.display().to_string()),
            None => (assembly::DOMAIN.to_string(), "assembly domain".into()),
        };
        let dom = parse_domain(&dom_text).map_err(|e| Failure(format!("{dom_name}:{e}")))?;
        let diags = validate(&dom);
        for d in &diags {
            log::warn!("{dom_name}:{d}");
        }
        if let Some(d) = diags.iter().find(|d| d.is_error()) {
            return Err(Failure(format!("{dom_name}:{d}")));
        }
        let (inst_text, inst_name) = match &self.instance {
            Some(p) => (read(p)?, p.display().to_string()),
            None => (assembly::DEFAULT_INSTANCE.to_string(), "default instance".into()),
        };
        let instance = parse_instance(&inst_text, &dom).map_err(|e| Failure(format!("{inst_name}:{e}")))?;
        let ws = match (&self.workspace, &instance.workspace, &self.instance) {
            (Some(p), _, _) => Workspace::from_json(&read(p)?)?,
            (None, Some(rel), Some(inst_path)) => {
                let p = inst_path.parent().unwrap_or(Path::new(".")).join(rel);
                if p.exists() {
                    Workspace::from_json(&read(&p)?)?
                } else {
                    log::warn!("{} not found, using the bundled workspace", p.display());
                    assembly::bench_workspace()
                }
            }
            _ => assembly::bench_workspace(),
        };
        let oracle = FeasibilityOracle::for_workspace(ws);
        let problem = ground(&dom, &instance, &oracle, &self.ground_options())?;
        Ok(Loaded { problem, oracle, instance })
    }
}

fn load_tree(path: &Path) -> Result<TreeFile, Failure> {
    plantree::from_json(&read(path)?).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_plan(a: &PlanArgs) -> Result<(), Failure> {
    let l = a.problem.load()?;
    let cfg = PlannerConfig {
        max_horizon: a.max_horizon,
        workers: a.jobs as usize,
        ground: a.problem.ground_options(),
    };
    let sol = solve_ground(Arc::new(l.problem), &l.oracle, &cfg)?;
    let t = sol.timings();
    eprintln!("{} nodes, plan {:.3}s, checks {:.3}s", sol.file.tree.nodes.len(), t.plan_s, t.checks_s);
    let mut file = sol.file;
    if !a.with_timings {
        file.timings = None;
    }
    write_or_print(a.out.as_deref(), &plantree::to_json(&file))
}

fn cmd_stats(path: &Path) -> Result<(), Failure> {
    let f = load_tree(path)?;
    let (plan, checks) = match f.timings {
        Some(t) => (format!("{:.6}", t.plan_s), format!("{:.6}", t.checks_s)),
        None => ("NA".into(), "NA".into()),
    };
    println!("{METRICS_HEADER}");
    println!("{},{},NA,NA,{},{plan},{checks}", stem(path), f.safety.dangerous_parts.len(), f.metrics.csv_fields());
    Ok(())
}

fn cmd_validate(path: &Path, problem: &ProblemArgs) -> Result<bool, Failure> {
    let f = load_tree(path)?;
    let l = problem.load()?;
    let v = plantree::replay_validate(&f.tree, &l.problem);
    for x in &v {
        eprintln!("{x}");
    }
    if v.is_empty() {
        println!("ok: {} paths replay to the goal", f.tree.paths().len());
    }
    Ok(v.is_empty())
}

fn cmd_exec(a: &ExecArgs) -> Result<(), Failure> {
    let f = load_tree(&a.tree)?;
    let l = a.problem.load()?;
    let violations = plantree::replay_validate(&f.tree, &l.problem);
    if let Some(v) = violations.first() {
        return Err(Failure(format!("tree does not fit the problem: {v}")));
    }
    let log: ExecutionLog = match a.provider {
        ProviderKind::Interactive => {
            let listener = TcpListener::bind(&a.listen)?;
            eprintln!("waiting for a teammate on {}", listener.local_addr()?);
            let opts = SessionOptions { timeout: Duration::from_secs(a.timeout), log_path: a.log.clone() };
            executor::serve_session(&f.tree, &l.problem, &listener, &opts)?
        }
        kind => {
            let mut provider: Box<dyn OutcomeProvider> = match (kind, &a.script) {
                (ProviderKind::Random, _) => Box::new(RandomProvider::new(a.seed)),
                (_, Some(p)) => Box::new(ScriptedProvider::new(
                    read(p)?.lines().map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect(),
                )),
                (_, None) => Box::new(ScriptedProvider::leftmost()),
            };
            let log = executor::run(&f.tree, &l.problem, provider.as_mut())?;
            if let Some(p) = &a.log {
                fs::write(p, log.to_json_lines())?;
            }
            log
        }
    };
    for r in &log.records {
        match (&r.prompt_text, &r.chosen_outcome) {
            (Some(p), Some(o)) => println!("[{}] {}  \"{p}\" -> {o}", r.node_id, r.action),
            (Some(p), None) => println!("[{}] {}  \"{p}\"", r.node_id, r.action),
            (None, _) => println!("[{}] {}", r.node_id, r.action),
        }
    }
    Ok(())
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let params = AssemblyInstanceParams {
        n_legs: a.legs,
        n_feet: a.feet,
        foot_shapes: a.foot_shapes.clone(),
        u: a.u,
        p: a.p,
        r: a.r,
        seed: a.seed,
    };
    let g = assembly::generate_instance(&params)?;
    if let Some(w) = &a.workspace_out {
        fs::write(w, g.workspace.to_json())?;
    }
    write_or_print(a.out.as_deref(), &g.instance.to_json())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    let cfg = PlannerConfig { max_horizon: a.max_horizon, workers: a.jobs as usize, ground: GroundOptions::default() };
    let rows = bench_sweep(a.axis, a.range.clone(), a.seed, &cfg, a.reps)?;
    write_or_print(a.out.as_deref(), &rows_csv(&rows))
}

fn cmd_check(a: &CheckArgs) -> Result<(), Failure> {
    let ws = match &a.workspace {
        Some(p) => Workspace::from_json(&read(p)?)?,
        None => assembly::bench_workspace(),
    };
    let ok = match (&a.region, a.cell) {
        (Some(r), _) => ws.reachable(&a.manip, r)?,
        (None, Some(c)) => ws.collision_free(&a.manip, c)?,
        (None, None) => unreachable!("clap requires one target"),
    };
    println!("{ok}");
    Ok(())
}

/// Runs one parsed command and returns the exit status.
pub fn dispatch(cli: Cli) -> i32 {
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a).map(|_| true),
        Command::Stats { tree } => cmd_stats(tree).map(|_| true),
        Command::Validate { tree, problem } => cmd_validate(tree, problem),
        Command::ExportDot { tree, out } => {
            load_tree(tree).and_then(|f| write_or_print(out.as_deref(), &plantree::to_dot(&f.tree))).map(|_| true)
        }
        Command::Exec(a) => cmd_exec(a).map(|_| true),
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Bench(a) => cmd_bench(a).map(|_| true),
        Command::Check(a) => cmd_check(a).map(|_| true),
    };
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure(m)) => {
            eprintln!("error: {m}");
            1
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
