//! Canonical pretty printer. Output reparses to an equal AST.

use std::fmt::Write;

use super::ast::*;

pub fn pretty_print(d: &DomainSpec) -> String {
    let mut out = String::new();
    for s in &d.sorts {
        if s.members.is_empty() {
            writeln!(out, "sort {}.", s.name).unwrap();
        } else {
            writeln!(out, "sort {} = {}.", s.name, s.members.join(", ")).unwrap();
        }
    }
    for f in &d.fluents {
        let args = if f.arg_sorts.is_empty() { String::new() } else { format!("({})", f.arg_sorts.join(", ")) };
        let partial = if f.observability == Observability::Partial { " partial" } else { "" };
        writeln!(out, "fluent {}{args}{partial}.", f.name).unwrap();
    }
    for s in &d.statics {
        relation(&mut out, "static", s);
    }
    for s in &d.externals {
        relation(&mut out, "external", s);
    }
    for r in &d.failures {
        writeln!(out, "failure {}{} when {}.", r.name, params(&r.params), clause(&r.body)).unwrap();
    }
    for a in &d.actions {
        action(&mut out, a);
    }
    for c in &d.constraints {
        let kw = if c.safety { "safety" } else { "constraint" };
        writeln!(out, "{kw} {}.", clause(&c.body)).unwrap();
    }
    for w in &d.weak {
        let label = w.label.as_ref().map(|l| format!("{l}: ")).unwrap_or_default();
        writeln!(out, "weak {label}{} [{}@{}].", clause(&w.body), w.weight, w.level).unwrap();
    }
    for ax in &d.axioms {
        let p = params(&ax.params);
        let p = if p.is_empty() { p } else { format!("{p} ") };
        let when = ax.when.as_ref().map(|w| format!(" when {}", clause(w))).unwrap_or_default();
        writeln!(out, "axiom {p}{}{{{}{}}}{}{when}.", ax.lo, atom(&ax.template), guard(&ax.guard), ax.hi).unwrap();
    }
    out
}

fn relation(out: &mut String, kw: &str, r: &RelationDecl) {
    match &r.arg_sorts {
        Some(sorts) => writeln!(out, "{kw} {}({}).", r.name, sorts.join(", ")).unwrap(),
        None => writeln!(out, "{kw} {}/{}.", r.name, r.arity).unwrap(),
    }
}

fn action(out: &mut String, a: &ActionSchema) {
    let kw = match a.kind {
        ActionKind::Actuation => "actuation",
        ActionKind::Sensing => "sensing",
        ActionKind::CommDet | ActionKind::CommNondet => "communication",
    };
    writeln!(out, "{kw} {}{}", a.name, params(&a.params)).unwrap();
    for p in &a.pre {
        writeln!(out, "    pre {};", clause(p)).unwrap();
    }
    if !a.effects.is_empty() {
        writeln!(out, "    effect {};", literals(&a.effects)).unwrap();
    }
    match &a.outcomes {
        Some(OutcomeSet::Enumerated(os)) => {
            for o in os {
                writeln!(out, "    outcome {}: {}{};", o.name, literals(&o.observe), then(&o.then)).unwrap();
            }
        }
        Some(OutcomeSet::Ranged { template, sort, then: t, .. }) => {
            writeln!(out, "    outcome one {} over {sort}{};", literal(template), then(t)).unwrap();
        }
        None => {}
    }
}

fn then(lits: &[Literal]) -> String {
    if lits.is_empty() {
        String::new()
    } else {
        format!(" => {}", literals(lits))
    }
}

fn params(ps: &[Param]) -> String {
    if ps.is_empty() {
        return String::new();
    }
    let inner: Vec<String> = ps.iter().map(|p| format!("{}:{}", p.name, p.sort)).collect();
    format!("({})", inner.join(", "))
}

pub fn atom(a: &Atom) -> String {
    if a.args.is_empty() {
        a.name.clone()
    } else {
        let args: Vec<&str> = a.args.iter().map(Term::name).collect();
        format!("{}({})", a.name, args.join(", "))
    }
}

pub fn literal(l: &Literal) -> String {
    if l.negated {
        format!("-{}", atom(&l.atom))
    } else {
        atom(&l.atom)
    }
}

fn literals(ls: &[Literal]) -> String {
    ls.iter().map(literal).collect::<Vec<_>>().join(", ")
}

fn guard(g: &[GuardItem]) -> String {
    if g.is_empty() {
        return String::new();
    }
    let items: Vec<String> = g
        .iter()
        .map(|i| match i {
            GuardItem::Bind { var, sort, .. } => format!("{var}:{sort}"),
            GuardItem::Test(c) => item(c),
        })
        .collect();
    format!(" : {}", items.join(", "))
}

/// Clause body: a conjunction of two or more items prints without parens.
pub fn clause(c: &Condition) -> String {
    match c {
        Condition::And(items) if items.len() >= 2 => items.iter().map(item).collect::<Vec<_>>().join(", "),
        other => item(other),
    }
}

pub fn item(c: &Condition) -> String {
    match c {
        Condition::Fluent(l) => literal(l),
        Condition::Relation(a) => atom(a),
        Condition::Not(inner) => format!("not {}", item(inner)),
        Condition::And(items) => format!("({})", items.iter().map(item).collect::<Vec<_>>().join(", ")),
        Condition::Count { template, guard: g, cmp, bound, .. } => {
            format!("count{{{}{}}} {} {bound}", atom(template), guard(g), cmp.symbol())
        }
        Condition::External(a) => format!("&{}", atom(a)),
        Condition::Compare { lhs, op, rhs, .. } => format!("{} {} {}", lhs.name(), op.symbol(), rhs.name()),
        Condition::Does(DoesTarget::Action(a), _) => format!("does {}", atom(a)),
        Condition::Does(DoesTarget::Kind(k), _) => format!("does {}", k.keyword()),
    }
}
