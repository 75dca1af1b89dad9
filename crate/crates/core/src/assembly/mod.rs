//! The collaborative table-assembly domain, its instance generator and the
//! benchmark sweeps.

mod bench;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adl::{GroundLiteral, InstanceSpec};
use crate::feasibility::{FeasibilityOracle, Workspace};
use crate::ground::{ground, GroundError, GroundOptions, GroundProblem};

pub use bench::{bench_sweep, parse_range, rows_csv, Axis, BenchRow};

pub const DOMAIN: &str = include_str!("../../assets/assembly.adlh");
pub const BENCH_WORKSPACE: &str = include_str!("../../assets/bench.json");
pub const DEFAULT_INSTANCE: &str = include_str!("../../assets/default-instance.json");

const HUMAN_ACCESS: [&str; 3] = ["shared", "stamp", "humanOnly"];
const ROBOT_REGIONS: [&str; 2] = ["robotLeft", "robotRight"];

pub fn bench_workspace() -> Workspace {
    Workspace::from_json(BENCH_WORKSPACE).expect("bundled workspace is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Triangle,
    Circle,
}

impl std::str::FromStr for Shape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Shape::ALL
            .into_iter()
            .find(|x| x.suffix().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown shape `{s}` (square, triangle, circle)"))
    }
}

impl Shape {
    const ALL: [Shape; 3] = [Shape::Square, Shape::Triangle, Shape::Circle];

    fn suffix(self) -> &'static str {
        match self {
            Shape::Square => "Square",
            Shape::Triangle => "Triangle",
            Shape::Circle => "Circle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssemblyInstanceParams {
    pub n_legs: usize,
    pub n_feet: usize,
    /// Shape of each foot; empty means drawn from the legs' shapes by seed.
    #[serde(default)]
    pub foot_shapes: Vec<Shape>,
    /// Dangerous parts, always placed in the shared region.
    pub u: usize,
    /// Parts placed in the human-only region.
    pub p: usize,
    /// Parts placed in a robot-only region.
    pub r: usize,
    pub seed: u64,
}

impl AssemblyInstanceParams {
    /// Two legs split between robot and human, one dangerous foot in the
    /// shared region and the top.
    pub fn baseline() -> Self {
        AssemblyInstanceParams { n_legs: 2, n_feet: 1, foot_shapes: vec![], u: 1, p: 1, r: 1, seed: 1 }
    }

    /// `movable` parts split into legs and feet as evenly as possible.
    pub fn with_parts(movable: usize, u: usize, p: usize, r: usize, seed: u64) -> Self {
        AssemblyInstanceParams { n_legs: movable.div_ceil(2), n_feet: movable / 2, foot_shapes: vec![], u, p, r, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("{0}")]
    Infeasible(String),
}

/// Generated instance plus the workspace it refers to.
#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: InstanceSpec,
    pub workspace: Workspace,
}

impl Generated {
    /// Ground the bundled domain over this instance.
    pub fn ground(&self, opts: &GroundOptions) -> Result<GroundProblem, GroundError> {
        let dom = crate::adl::parse_domain(DOMAIN).expect("bundled domain parses");
        let oracle = FeasibilityOracle::for_workspace(self.workspace.clone());
        ground(&dom, &self.instance, &oracle, opts)
    }
}

pub fn generate_instance(params: &AssemblyInstanceParams) -> Result<Generated, GenerateError> {
    let n = params.n_legs + params.n_feet;
    let bad = |m: String| Err(GenerateError::Infeasible(m));
    if params.n_legs == 0 {
        return bad("at least one leg is required".into());
    }
    if params.n_feet > params.n_legs {
        return bad("every foot needs its own leg".into());
    }
    if params.u > n {
        return bad(format!("{} dangerous parts but only {n} parts", params.u));
    }
    if params.u + params.p + params.r > n {
        return bad(format!("U+P+R = {} exceeds the {n} movable parts", params.u + params.p + params.r));
    }
    if !params.foot_shapes.is_empty() && params.foot_shapes.len() != params.n_feet {
        return bad("one shape per foot is required".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let legs: Vec<String> = (1..=params.n_legs).map(|i| format!("leg{i}")).collect();
    let feet: Vec<String> = (1..=params.n_feet).map(|i| format!("foot{i}")).collect();
    let leg_shapes: Vec<Shape> = (0..params.n_legs).map(|i| Shape::ALL[i % 3]).collect();
    // Each foot needs its own leg with a matching hole.
    let foot_shapes: Vec<Shape> = if params.foot_shapes.is_empty() {
        let mut legs_left: Vec<Shape> = leg_shapes.clone();
        (0..params.n_feet).map(|_| legs_left.swap_remove(rng.gen_range(0..legs_left.len()))).collect()
    } else {
        params.foot_shapes.clone()
    };
    for s in Shape::ALL {
        let feet = foot_shapes.iter().filter(|&&f| f == s).count();
        let holes = leg_shapes.iter().filter(|&&l| l == s).count();
        if feet > holes {
            return bad(format!("{feet} {s:?} feet but only {holes} legs with a {s:?} hole"));
        }
    }

    // Dangerous parts are taken from the end (feet first); the rest are
    // assigned to robot-only, then human-only, then the shared region.
    let movable: Vec<&String> = legs.iter().chain(&feet).collect();
    let (rest, dangerous) = movable.split_at(n - params.u);
    let mut loc: Vec<(String, String)> = Vec::new();
    for (i, part) in rest.iter().enumerate() {
        let region = if i < params.r {
            ROBOT_REGIONS[rng.gen_range(0..ROBOT_REGIONS.len())]
        } else if i < params.r + params.p {
            "humanOnly"
        } else {
            "shared"
        };
        loc.push((part.to_string(), region.to_string()));
    }
    for part in dangerous {
        loc.push((part.to_string(), "shared".into()));
    }
    loc.push(("top1".into(), "shared".into()));
    let order: Vec<&str> = std::iter::once("top1").chain(movable.iter().map(|s| s.as_str())).collect();
    loc.sort_by_key(|(p, _)| order.iter().position(|o| o == p));

    let workspace = crate::assembly::bench_workspace();
    let conns: Vec<String> = (1..=params.n_legs).map(|i| format!("c{i}")).chain(["hole".to_string()]).collect();
    let mut classes: Vec<String> = vec!["top".into()];
    for s in Shape::ALL {
        if leg_shapes.contains(&s) {
            classes.push(format!("leg{}", s.suffix()));
        }
    }
    for s in Shape::ALL {
        if foot_shapes.contains(&s) {
            classes.push(format!("foot{}", s.suffix()));
        }
    }

    let mut objects = BTreeMap::new();
    objects.insert("manip".to_string(), workspace.manipulators.iter().map(|m| m.name.clone()).collect());
    objects.insert("part".to_string(), order.iter().map(|s| s.to_string()).collect());
    objects.insert("region".to_string(), workspace.regions.iter().map(|r| r.name.clone()).collect());
    objects.insert("conn".to_string(), conns.clone());
    objects.insert("cls".to_string(), classes.clone());

    let tuple = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut statics: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut put = |name: &str, t: Vec<String>| statics.entry(name.to_string()).or_default().push(t);
    put("class", tuple(&["top", "top1"]));
    for (l, s) in legs.iter().zip(&leg_shapes) {
        put("class", tuple(&[&format!("leg{}", s.suffix()), l]));
    }
    for (f, s) in feet.iter().zip(&foot_shapes) {
        put("class", tuple(&[&format!("foot{}", s.suffix()), f]));
    }
    for c in classes.iter().filter(|c| c.starts_with("leg")) {
        put("attachable", tuple(&[c, "top"]));
    }
    for c in classes.iter().filter(|c| c.starts_with("foot")) {
        put("attachable", tuple(&[c, &c.replacen("foot", "leg", 1)]));
    }
    for c in conns.iter().filter(|c| *c != "hole") {
        put("point", tuple(&["top1", c]));
    }
    for l in &legs {
        put("point", tuple(&[l, "hole"]));
    }
    for (p, r) in &loc {
        put("loc", tuple(&[p, r]));
    }
    for p in &movable {
        put("movable", tuple(&[p]));
    }
    for p in dangerous {
        put("dangerous", tuple(&[p]));
    }
    for r in HUMAN_ACCESS {
        put("humanAccess", tuple(&[r]));
    }
    for r in workspace.regions.iter().filter(|r| r.is_unsafe) {
        put("unsafeRegion", tuple(&[&r.name]));
    }

    let mut init: Vec<GroundLiteral> =
        workspace.manipulators.iter().map(|m| GroundLiteral::positive("free", &[&m.name])).collect();
    for t in &statics["point"] {
        init.push(GroundLiteral::positive("pointFree", &[&t[0], &t[1]]));
    }
    let goal = movable.iter().map(|p| GroundLiteral::positive("assembled", &[p])).collect();

    let instance = InstanceSpec { objects, statics, init, goal, workspace: Some("bench.json".into()) };
    Ok(Generated { instance, workspace })
}
