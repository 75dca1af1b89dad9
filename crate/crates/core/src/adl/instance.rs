//! Instance files: object universe, static facts, initial belief and goal.
//!
//! ```json
//! {"objects": {"part": ["leg1", "top1"]},
//!  "statics": {"loc": [["leg1", "shared"]]},
//!  "init": ["free(left)", "-humanHolding"],
//!  "goal": ["assembled(leg1)"],
//!  "workspace": "bench.json"}
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ast::{DomainSpec, Span};
use super::ParseError;

/// A ground fluent or relation literal such as `attached(leg1,top1,c1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundLiteral {
    pub name: String,
    pub args: Vec<String>,
    pub negated: bool,
}

impl GroundLiteral {
    pub fn positive(name: &str, args: &[&str]) -> Self {
        GroundLiteral { name: name.into(), args: args.iter().map(|s| s.to_string()).collect(), negated: false }
    }

    pub fn atom_string(&self) -> String {
        if self.args.is_empty() {
            self.name.clone()
        } else {
            format!("{}({})", self.name, self.args.join(","))
        }
    }
}

impl fmt::Display for GroundLiteral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "-")?;
        }
        write!(f, "{}", self.atom_string())
    }
}

impl FromStr for GroundLiteral {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (negated, rest) = match s.strip_prefix('-') {
            Some(r) => (true, r.trim_start()),
            None => (false, s),
        };
        let ident = |x: &str| !x.is_empty() && x.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        let (name, args) = match rest.find('(') {
            None => (rest, Vec::new()),
            Some(i) => {
                let inner = rest[i + 1..]
                    .strip_suffix(')')
                    .ok_or_else(|| format!("malformed literal `{s}`"))?;
                (&rest[..i], inner.split(',').map(|a| a.trim().to_string()).collect())
            }
        };
        if !ident(name) || !args.iter().all(|a| ident(a)) {
            return Err(format!("malformed literal `{s}`"));
        }
        Ok(GroundLiteral { name: name.to_string(), args, negated })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    #[serde(default)]
    objects: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    statics: BTreeMap<String, Vec<Vec<String>>>,
    #[serde(default)]
    init: Vec<String>,
    #[serde(default)]
    goal: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    workspace: Option<String>,
}

/// Type-checked instance. Unmentioned partial fluents start unknown and
/// unmentioned full fluents start false.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InstanceSpec {
    /// Objects added per sort, on top of members declared in the domain.
    pub objects: BTreeMap<String, Vec<String>>,
    pub statics: BTreeMap<String, Vec<Vec<String>>>,
    pub init: Vec<GroundLiteral>,
    pub goal: Vec<GroundLiteral>,
    pub workspace: Option<String>,
}

impl InstanceSpec {
    /// Members of `sort`: domain-declared constants first, then instance objects.
    pub fn members<'a>(&'a self, dom: &'a DomainSpec, sort: &str) -> Vec<&'a str> {
        let mut out: Vec<&str> = dom.sort(sort).map(|s| s.members.iter().map(String::as_str).collect()).unwrap_or_default();
        if let Some(objs) = self.objects.get(sort) {
            out.extend(objs.iter().map(String::as_str));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let file = InstanceFile {
            objects: self.objects.clone(),
            statics: self.statics.clone(),
            init: self.init.iter().map(ToString::to_string).collect(),
            goal: self.goal.iter().map(ToString::to_string).collect(),
            workspace: self.workspace.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
        s.push('\n');
        s
    }
}

/// Position of the first occurrence of `"needle"` in `text`.
fn locate(text: &str, needle: &str) -> Span {
    let quoted = format!("\"{needle}\"");
    let idx = text.find(&quoted).or_else(|| text.find(needle)).unwrap_or(0);
    let before = &text[..idx];
    let line = before.matches('\n').count() as u32 + 1;
    let col = before.rfind('\n').map_or(idx, |n| idx - n - 1) as u32 + 1;
    Span::new(line, col)
}

pub fn parse_instance(text: &str, dom: &DomainSpec) -> Result<InstanceSpec, ParseError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| {
        ParseError::new(Span::new(e.line() as u32, e.column() as u32), format!("invalid instance JSON: {e}"))
    })?;
    let err = |needle: &str, msg: String| ParseError::new(locate(text, needle), msg);

    let mut sort_of: HashMap<&str, &str> = HashMap::new();
    for s in &dom.sorts {
        for m in &s.members {
            sort_of.insert(m, &s.name);
        }
    }
    for (sort, objs) in &file.objects {
        if dom.sort(sort).is_none() {
            return Err(err(sort, format!("unknown sort `{sort}`")));
        }
        for o in objs {
            if let Some(prev) = sort_of.insert(o, sort) {
                return Err(err(o, format!("constant `{o}` assigned to both `{prev}` and `{sort}`")));
            }
        }
    }

    for (name, tuples) in &file.statics {
        let Some(decl) = dom.static_decl(name) else {
            return Err(err(name, format!("unknown static relation `{name}`")));
        };
        for t in tuples {
            if t.len() != decl.arity {
                return Err(err(name, format!("static `{name}` takes {} arguments, got {}", decl.arity, t.len())));
            }
            for (i, c) in t.iter().enumerate() {
                let expected = decl.arg_sorts.as_ref().map(|s| s[i].as_str());
                match (sort_of.get(c.as_str()), expected) {
                    (None, _) => return Err(err(c, format!("unsorted constant `{c}` in static `{name}`"))),
                    (Some(actual), Some(s)) if *actual != s => {
                        return Err(err(c, format!("constant `{c}` has sort `{actual}`, expected `{s}` in static `{name}`")))
                    }
                    _ => {}
                }
            }
        }
    }

    let check_lit = |raw: &str, what: &str| -> Result<GroundLiteral, ParseError> {
        let lit: GroundLiteral = raw.parse().map_err(|m: String| err(raw, m))?;
        let Some(f) = dom.fluent(&lit.name) else {
            return Err(err(raw, format!("{what} references undeclared fluent `{}`", lit.name)));
        };
        if f.arg_sorts.len() != lit.args.len() {
            return Err(err(raw, format!("fluent `{}` takes {} arguments, got {}", lit.name, f.arg_sorts.len(), lit.args.len())));
        }
        for (a, s) in lit.args.iter().zip(&f.arg_sorts) {
            match sort_of.get(a.as_str()) {
                Some(actual) if actual == s => {}
                Some(actual) => {
                    return Err(err(raw, format!("constant `{a}` has sort `{actual}`, expected `{s}`")))
                }
                None => return Err(err(raw, format!("unsorted constant `{a}`"))),
            }
        }
        Ok(lit)
    };

    let mut init = Vec::new();
    let mut seen: HashMap<String, bool> = HashMap::new();
    for raw in &file.init {
        let lit = check_lit(raw, "initial state")?;
        match seen.insert(lit.atom_string(), lit.negated) {
            Some(prev) if prev != lit.negated => {
                return Err(err(raw, format!("contradictory initial literals for `{}`", lit.atom_string())))
            }
            _ => {}
        }
        init.push(lit);
    }
    let goal = file.goal.iter().map(|g| check_lit(g, "goal")).collect::<Result<Vec<_>, _>>()?;

    Ok(InstanceSpec { objects: file.objects, statics: file.statics, init, goal, workspace: file.workspace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adl::parse_domain;

    fn dom() -> DomainSpec {
        parse_domain("sort part.\nfluent humanHolding partial.\nfluent assembled(part).\nstatic dangerous/1.").unwrap()
    }

    #[test]
    fn four_parts() {
        let inst = parse_instance(
            r#"{"objects": {"part": ["leg1", "leg2", "foot1", "top1"]},
                "goal": ["assembled(leg1)", "assembled(leg2)", "assembled(foot1)"]}"#,
            &dom(),
        )
        .unwrap();
        assert_eq!(inst.members(&dom(), "part").len(), 4);
        assert_eq!(inst.goal.len(), 3);
    }

    #[test]
    fn empty_goal_is_valid() {
        let inst = parse_instance(r#"{"objects": {"part": ["a"]}}"#, &dom()).unwrap();
        assert!(inst.goal.is_empty());
    }

    #[test]
    fn contradiction_is_rejected_with_position() {
        let text = "{\"init\": [\"humanHolding\",\n  \"-humanHolding\"]}";
        let e = parse_instance(text, &dom()).unwrap_err();
        assert!(e.message.contains("contradictory"));
        assert_eq!((e.line, e.col), (2, 3));
    }

    #[test]
    fn undeclared_goal_fluent_and_unsorted_constant() {
        let e = parse_instance(r#"{"goal": ["ghost(a)"]}"#, &dom()).unwrap_err();
        assert!(e.message.contains("undeclared fluent"));
        let e = parse_instance(r#"{"goal": ["assembled(zz)"]}"#, &dom()).unwrap_err();
        assert!(e.message.contains("unsorted constant"));
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"objects": {"part": ["a"]}, "statics": {"dangerous": [["a"]]}, "init": ["-humanHolding"], "goal": ["assembled(a)"]}"#;
        let inst = parse_instance(text, &dom()).unwrap();
        assert_eq!(parse_instance(&inst.to_json(), &dom()).unwrap(), inst);
    }

    #[test]
    fn literal_syntax() {
        let l: GroundLiteral = "-attached(a, b,c)".parse().unwrap();
        assert!(l.negated);
        assert_eq!(l.to_string(), "-attached(a,b,c)");
        assert!("f(".parse::<GroundLiteral>().is_err());
    }
}
