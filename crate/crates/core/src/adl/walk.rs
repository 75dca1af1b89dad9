//! Read-only traversal helpers over conditions and actions.

use super::ast::*;

/// Where an atom occurs; decides which declaration table it resolves in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomRole {
    Fluent,
    Relation,
    External,
    Does,
    /// Count template: fluent or relation.
    Template,
}

pub fn visit_condition<'a>(c: &'a Condition, f: &mut dyn FnMut(&'a Atom, AtomRole)) {
    match c {
        Condition::Fluent(l) => f(&l.atom, AtomRole::Fluent),
        Condition::Relation(a) => f(a, AtomRole::Relation),
        Condition::Not(inner) => visit_condition(inner, f),
        Condition::And(items) => items.iter().for_each(|i| visit_condition(i, f)),
        Condition::Count { template, guard, .. } => {
            f(template, AtomRole::Template);
            visit_guard(guard, f);
        }
        Condition::External(a) => f(a, AtomRole::External),
        Condition::Compare { .. } => {}
        Condition::Does(DoesTarget::Action(a), _) => f(a, AtomRole::Does),
        Condition::Does(DoesTarget::Kind(_), _) => {}
    }
}

pub fn visit_guard<'a>(guard: &'a [GuardItem], f: &mut dyn FnMut(&'a Atom, AtomRole)) {
    for g in guard {
        if let GuardItem::Test(c) = g {
            visit_condition(c, f);
        }
    }
}

/// Every atom in the domain together with its role.
pub fn visit_domain<'a>(d: &'a DomainSpec, f: &mut dyn FnMut(&'a Atom, AtomRole)) {
    for a in &d.actions {
        visit_action(a, f);
    }
    for c in &d.constraints {
        visit_condition(&c.body, f);
    }
    for w in &d.weak {
        visit_condition(&w.body, f);
    }
    for r in &d.failures {
        visit_condition(&r.body, f);
    }
    for ax in &d.axioms {
        f(&ax.template, AtomRole::Fluent);
        visit_guard(&ax.guard, f);
        if let Some(w) = &ax.when {
            visit_condition(w, f);
        }
    }
}

pub fn visit_action<'a>(a: &'a ActionSchema, f: &mut dyn FnMut(&'a Atom, AtomRole)) {
    for p in &a.pre {
        visit_condition(p, f);
    }
    for l in &a.effects {
        f(&l.atom, AtomRole::Fluent);
    }
    match &a.outcomes {
        Some(OutcomeSet::Enumerated(os)) => {
            for o in os {
                for l in o.observe.iter().chain(o.then.iter()) {
                    f(&l.atom, AtomRole::Fluent);
                }
            }
        }
        Some(OutcomeSet::Ranged { template, then, .. }) => {
            f(&template.atom, AtomRole::Fluent);
            for l in then {
                f(&l.atom, AtomRole::Fluent);
            }
        }
        None => {}
    }
}

/// True if the condition mentions the belief state (fluents) or an action.
pub fn is_dynamic(c: &Condition, d: &DomainSpec) -> bool {
    let mut dynamic = false;
    visit_condition(c, &mut |a, role| match role {
        AtomRole::Fluent | AtomRole::Does => dynamic = true,
        AtomRole::Template
            if d.fluent(&a.name).is_some() => {
                dynamic = true
            }
        _ => {}
    });
    if contains_does_kind(c) {
        dynamic = true;
    }
    dynamic
}

pub fn contains_does(c: &Condition) -> bool {
    let mut found = contains_does_kind(c);
    visit_condition(c, &mut |_, role| {
        if role == AtomRole::Does {
            found = true
        }
    });
    found
}

fn contains_does_kind(c: &Condition) -> bool {
    match c {
        Condition::Does(DoesTarget::Kind(_), _) => true,
        Condition::Not(inner) => contains_does_kind(inner),
        Condition::And(items) => items.iter().any(contains_does_kind),
        Condition::Count { guard, .. } => guard.iter().any(|g| match g {
            GuardItem::Test(c) => contains_does_kind(c),
            _ => false,
        }),
        _ => false,
    }
}

/// Flattens a clause body into its top-level conjuncts.
pub fn conjuncts(c: &Condition) -> Vec<&Condition> {
    match c {
        Condition::And(items) => items.iter().collect(),
        other => vec![other],
    }
}

/// Variables occurring in a term list.
pub fn vars_of(args: &[Term]) -> impl Iterator<Item = &str> {
    args.iter().filter_map(|t| match t {
        Term::Var(v) => Some(v.as_str()),
        Term::Const(_) => None,
    })
}
