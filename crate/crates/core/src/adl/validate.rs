use std::collections::HashSet;
use std::fmt;

use super::ast::*;
use super::walk::{self, AtomRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Error, message: message.into(), span }
    }

    fn warning(span: Span, message: impl Into<String>) -> Self {
        Diagnostic { severity: Severity::Warning, message: message.into(), span }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{}:{}: {}: {}", self.span.line, self.span.col, sev, self.message)
    }
}

/// Structural checks over a domain AST. Never fails; problems are returned
/// as diagnostics in source order of discovery.
pub fn validate(d: &DomainSpec) -> Vec<Diagnostic> {
    let mut out = arity_diagnostics(d);
    check_actions(d, &mut out);
    check_bindings(d, &mut out);
    check_placement(d, &mut out);
    check_unused_sorts(d, &mut out);
    out
}

/// Declaration lookups for every atom: unknown names and arity mismatches.
pub fn arity_diagnostics(d: &DomainSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    walk::visit_domain(d, &mut |atom, role| {
        let n = atom.args.len();
        let declared: Option<(usize, &str)> = match role {
            AtomRole::Fluent => d.fluent(&atom.name).map(|f| (f.arg_sorts.len(), "fluent")),
            AtomRole::Relation => relation_arity(d, &atom.name).map(|k| (k, "relation")),
            AtomRole::External => d.external(&atom.name).map(|e| (e.arity, "external")),
            AtomRole::Does => d.action(&atom.name).map(|a| (a.params.len(), "action")),
            AtomRole::Template => d
                .fluent(&atom.name)
                .map(|f| (f.arg_sorts.len(), "fluent"))
                .or_else(|| relation_arity(d, &atom.name).map(|k| (k, "relation"))),
        };
        match declared {
            None => {
                let what = match role {
                    AtomRole::Fluent => "undeclared fluent",
                    AtomRole::External => "undeclared external",
                    AtomRole::Does => "undeclared action",
                    _ => "undeclared fluent or relation",
                };
                out.push(Diagnostic::error(atom.span, format!("{what} `{}`", atom.name)));
            }
            Some((k, what)) if k != n => out.push(Diagnostic::error(
                atom.span,
                format!("arity mismatch: {what} `{}` takes {k} arguments, got {n}", atom.name),
            )),
            _ => {}
        }
    });
    out
}

fn relation_arity(d: &DomainSpec, name: &str) -> Option<usize> {
    d.static_decl(name)
        .map(|s| s.arity)
        .or_else(|| d.failure(name).map(|f| f.params.len()))
}

fn sort_size(d: &DomainSpec, sort: &str) -> Option<usize> {
    d.sort(sort).map(|s| s.members.len())
}

fn check_actions(d: &DomainSpec, out: &mut Vec<Diagnostic>) {
    for a in &d.actions {
        for p in &a.params {
            if d.sort(&p.sort).is_none() {
                out.push(Diagnostic::error(a.span, format!("unknown sort `{}` for parameter `{}`", p.sort, p.name)));
            }
        }
        let deterministic = matches!(a.kind, ActionKind::Actuation | ActionKind::CommDet);
        if deterministic && (a.effects.is_empty() || a.outcomes.is_some()) {
            out.push(Diagnostic::error(a.span, format!("deterministic action `{}` needs effects and no outcome set", a.name)));
        }
        if !deterministic && (a.outcomes.is_none() || !a.effects.is_empty()) {
            out.push(Diagnostic::error(a.span, format!("action `{}` needs an outcome set and no direct effects", a.name)));
        }
        match &a.outcomes {
            Some(OutcomeSet::Enumerated(os)) => {
                if os.len() < 2 {
                    out.push(Diagnostic::warning(a.span, format!("degenerate decision node: `{}` has fewer than two outcomes", a.name)));
                }
                for (i, x) in os.iter().enumerate() {
                    for y in &os[i + 1..] {
                        if !contradict(&x.observe, &y.observe) {
                            out.push(Diagnostic::error(
                                y.span,
                                format!("outcomes `{}` and `{}` of `{}` do not contradict on any fluent", x.name, y.name, a.name),
                            ));
                        }
                    }
                }
            }
            Some(OutcomeSet::Ranged { template, var, sort, span, .. }) => {
                if !walk::vars_of(&template.atom.args).any(|v| v == var) {
                    out.push(Diagnostic::error(*span, format!("ranged variable `{var}` does not occur in the template")));
                }
                match sort_size(d, sort) {
                    None => out.push(Diagnostic::error(*span, format!("unknown sort `{sort}`"))),
                    Some(1) => out.push(Diagnostic::warning(
                        *span,
                        format!("degenerate decision node: `{}` ranges over the one-member sort `{sort}`", a.name),
                    )),
                    _ => {}
                }
            }
            None => {}
        }
    }
    for w in &d.weak {
        if w.weight == 0 || w.level == 0 {
            out.push(Diagnostic::error(w.span, "weak constraint weight and level must be at least 1"));
        }
    }
}

fn contradict(a: &[Literal], b: &[Literal]) -> bool {
    a.iter().any(|x| b.iter().any(|y| x.atom.name == y.atom.name && x.atom.args == y.atom.args && x.negated != y.negated))
}

/// `does` only belongs in constraints and weak constraints; failure rules
/// must not depend on the belief state.
fn check_placement(d: &DomainSpec, out: &mut Vec<Diagnostic>) {
    for a in &d.actions {
        for p in &a.pre {
            if walk::contains_does(p) {
                out.push(Diagnostic::error(a.span, format!("`does` is not allowed in preconditions of `{}`", a.name)));
            }
        }
    }
    for r in &d.failures {
        if walk::is_dynamic(&r.body, d) {
            out.push(Diagnostic::error(r.span, format!("failure rule `{}` must be state independent", r.name)));
        }
    }
    for ax in &d.axioms {
        if ax.when.as_ref().is_some_and(walk::contains_does) {
            out.push(Diagnostic::error(ax.span, "`does` is not allowed in axioms"));
        }
    }
}

fn check_unused_sorts(d: &DomainSpec, out: &mut Vec<Diagnostic>) {
    let mut used: HashSet<&str> = HashSet::new();
    for f in &d.fluents {
        used.extend(f.arg_sorts.iter().map(String::as_str));
    }
    for a in &d.actions {
        used.extend(a.params.iter().map(|p| p.sort.as_str()));
        if let Some(OutcomeSet::Ranged { sort, .. }) = &a.outcomes {
            used.insert(sort);
        }
    }
    for r in &d.failures {
        used.extend(r.params.iter().map(|p| p.sort.as_str()));
    }
    for r in d.statics.iter().chain(&d.externals) {
        used.extend(r.arg_sorts.iter().flatten().map(String::as_str));
    }
    for ax in &d.axioms {
        used.extend(ax.params.iter().map(|p| p.sort.as_str()));
    }
    fn guards_in<'a>(c: &'a Condition, acc: &mut Vec<&'a [GuardItem]>) {
        match c {
            Condition::Count { guard, .. } => {
                acc.push(guard);
                for g in guard {
                    if let GuardItem::Test(t) = g {
                        guards_in(t, acc);
                    }
                }
            }
            Condition::Not(i) => guards_in(i, acc),
            Condition::And(items) => items.iter().for_each(|i| guards_in(i, acc)),
            _ => {}
        }
    }
    let mut guards = Vec::new();
    for a in &d.actions {
        a.pre.iter().for_each(|p| guards_in(p, &mut guards));
    }
    d.constraints.iter().for_each(|c| guards_in(&c.body, &mut guards));
    d.weak.iter().for_each(|w| guards_in(&w.body, &mut guards));
    d.failures.iter().for_each(|r| guards_in(&r.body, &mut guards));
    for ax in &d.axioms {
        guards.push(&ax.guard);
        if let Some(w) = &ax.when {
            guards_in(w, &mut guards);
        }
    }
    for g in guards {
        for item in g {
            if let GuardItem::Bind { sort, .. } = item {
                used.insert(sort.as_str());
            }
        }
    }
    for s in &d.sorts {
        if !used.contains(s.name.as_str()) {
            out.push(Diagnostic::warning(s.span, format!("unused sort `{}`", s.name)));
        }
    }
}

fn check_bindings(d: &DomainSpec, out: &mut Vec<Diagnostic>) {
    for a in &d.actions {
        let scope: Vec<&str> = a.params.iter().map(|p| p.name.as_str()).collect();
        for p in &a.pre {
            check_conj(p, &scope, a.span, out);
        }
        for l in &a.effects {
            check_args(&l.atom.args, &scope, l.atom.span, out);
        }
        match &a.outcomes {
            Some(OutcomeSet::Enumerated(os)) => {
                for o in os {
                    for l in o.observe.iter().chain(o.then.iter()) {
                        check_args(&l.atom.args, &scope, l.atom.span, out);
                    }
                }
            }
            Some(OutcomeSet::Ranged { template, var, then, .. }) => {
                let mut s = scope.clone();
                s.push(var);
                for l in std::iter::once(template).chain(then.iter()) {
                    check_args(&l.atom.args, &s, l.atom.span, out);
                }
            }
            None => {}
        }
    }
    for c in &d.constraints {
        check_conj(&c.body, &[], c.span, out);
    }
    for w in &d.weak {
        check_conj(&w.body, &[], w.span, out);
    }
    for r in &d.failures {
        let scope: Vec<&str> = r.params.iter().map(|p| p.name.as_str()).collect();
        check_conj(&r.body, &scope, r.span, out);
    }
    for ax in &d.axioms {
        let mut scope: Vec<&str> = ax.params.iter().map(|p| p.name.as_str()).collect();
        if let Some(w) = &ax.when {
            scope.extend(conj_binders(w));
            check_conj(w, &scope, ax.span, out);
        }
        for g in &ax.guard {
            if let GuardItem::Bind { var, .. } = g {
                scope.push(var);
            }
        }
        check_args(&ax.template.args, &scope, ax.template.span, out);
        for g in &ax.guard {
            if let GuardItem::Test(t) = g {
                check_conj(t, &scope, ax.span, out);
            }
        }
    }
}

/// Variables bound at this conjunction level: positive fluent literals,
/// positive relation atoms and `does` atoms.
pub fn conj_binders(c: &Condition) -> Vec<&str> {
    let mut out = Vec::new();
    for item in walk::conjuncts(c) {
        match item {
            Condition::Fluent(l) => out.extend(walk::vars_of(&l.atom.args)),
            Condition::Relation(a) => out.extend(walk::vars_of(&a.args)),
            Condition::Does(DoesTarget::Action(a), _) => out.extend(walk::vars_of(&a.args)),
            _ => {}
        }
    }
    out
}

fn check_conj(c: &Condition, outer: &[&str], span: Span, out: &mut Vec<Diagnostic>) {
    let mut scope: Vec<&str> = outer.to_vec();
    scope.extend(conj_binders(c));
    for item in walk::conjuncts(c) {
        check_item(item, &scope, span, out);
    }
}

/// Under default negation nothing new gets bound.
fn check_negated(c: &Condition, scope: &[&str], span: Span, out: &mut Vec<Diagnostic>) {
    for item in walk::conjuncts(c) {
        check_item(item, scope, span, out);
    }
}

fn check_item(c: &Condition, scope: &[&str], span: Span, out: &mut Vec<Diagnostic>) {
    match c {
        Condition::Fluent(l) => check_args(&l.atom.args, scope, l.atom.span, out),
        Condition::Relation(a) | Condition::External(a) => check_args(&a.args, scope, a.span, out),
        Condition::Does(DoesTarget::Action(a), _) => check_args(&a.args, scope, a.span, out),
        Condition::Does(DoesTarget::Kind(_), _) => {}
        Condition::Not(inner) => check_negated(inner, scope, span, out),
        Condition::And(_) => check_conj(c, scope, span, out),
        Condition::Compare { lhs, rhs, span, .. } => {
            check_args(&[lhs.clone(), rhs.clone()], scope, *span, out)
        }
        Condition::Count { template, guard, span, .. } => {
            let mut s = scope.to_vec();
            for g in guard {
                if let GuardItem::Bind { var, .. } = g {
                    s.push(var);
                }
            }
            for g in guard {
                if let GuardItem::Test(t) = g {
                    s.extend(conj_binders(t));
                }
            }
            check_args(&template.args, &s, *span, out);
            for g in guard {
                if let GuardItem::Test(t) = g {
                    check_conj(t, &s, *span, out);
                }
            }
        }
    }
}

fn check_args(args: &[Term], scope: &[&str], span: Span, out: &mut Vec<Diagnostic>) {
    for v in walk::vars_of(args) {
        if !scope.contains(&v) {
            out.push(Diagnostic::error(span, format!("unbound variable `{v}`")));
        }
    }
}
