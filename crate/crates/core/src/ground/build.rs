//! Exhaustive grounding over well-sorted substitutions.
//!
//! Conjunctions are grounded by a small join: items whose variables are all
//! bound are folded first, then positive atoms bind the remaining variables
//! (action occurrences, then relations, then fluents). State-independent
//! parts become constants, so only fluent tests survive into [`GCond`].

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::Instant;

use crate::adl::printer;
use crate::adl::walk;
use crate::adl::*;
use crate::feasibility::FeasibilityOracle;

use super::*;

type Binding = HashMap<String, ConstId>;

struct Ctx<'c> {
    /// The action whose occurrence `does` tests refer to.
    action: Option<(&'c str, ActionKind, &'c [ConstId])>,
    what: &'c str,
}

struct Builder<'a> {
    dom: &'a DomainSpec,
    oracle: &'a FeasibilityOracle,
    consts: Vec<String>,
    const_index: HashMap<String, ConstId>,
    sort_members: HashMap<String, Vec<ConstId>>,
    fluent_index: HashMap<String, usize>,
    atom_index: HashMap<(usize, Vec<ConstId>), AtomId>,
    relation_tuples: HashMap<String, Vec<Vec<ConstId>>>,
    relations: HashMap<String, HashSet<Vec<ConstId>>>,
    ext_cache: HashMap<(String, Vec<ConstId>), bool>,
}

pub fn ground(
    dom: &DomainSpec,
    inst: &InstanceSpec,
    oracle: &FeasibilityOracle,
    opts: &GroundOptions,
) -> Result<GroundProblem, GroundError> {
    let start = Instant::now();
    for e in &dom.externals {
        if !oracle.is_registered(&e.name) {
            return Err(GroundError::MissingExternal(e.name.clone()));
        }
    }
    let mut b = Builder {
        dom,
        oracle,
        consts: Vec::new(),
        const_index: HashMap::new(),
        sort_members: HashMap::new(),
        fluent_index: HashMap::new(),
        atom_index: HashMap::new(),
        relation_tuples: HashMap::new(),
        relations: HashMap::new(),
        ext_cache: HashMap::new(),
    };

    let mut sorts = Vec::new();
    for s in &dom.sorts {
        let mut ids = Vec::new();
        for m in inst.members(dom, &s.name) {
            let next = b.consts.len() as ConstId;
            let id = *b.const_index.entry(m.to_string()).or_insert(next);
            if id == next {
                b.consts.push(m.to_string());
            }
            ids.push(id);
        }
        b.sort_members.insert(s.name.clone(), ids.clone());
        sorts.push((s.name.clone(), ids));
    }

    let needed: u64 = dom
        .fluents
        .iter()
        .map(|f| f.arg_sorts.iter().map(|s| b.sort_members[s].len() as u64).product::<u64>())
        .sum();
    if needed > opts.atom_budget {
        return Err(GroundError::Budget { atoms: needed, budget: opts.atom_budget });
    }

    let mut atoms = Vec::new();
    let mut partial = Vec::new();
    for (fi, f) in dom.fluents.iter().enumerate() {
        b.fluent_index.insert(f.name.clone(), fi);
        let arg_sorts: Vec<&str> = f.arg_sorts.iter().map(String::as_str).collect();
        for t in b.tuples(&arg_sorts) {
            b.atom_index.insert((fi, t.clone()), atoms.len() as AtomId);
            atoms.push((fi, t));
            partial.push(f.observability == Observability::Partial);
        }
    }

    for s in &dom.statics {
        let mut tuples = Vec::new();
        for raw in inst.statics.get(&s.name).into_iter().flatten() {
            let ids: Option<Vec<ConstId>> = raw.iter().map(|c| b.const_index.get(c).copied()).collect();
            let ids = ids.ok_or_else(|| GroundError::IllSorted(format!("{}({})", s.name, raw.join(","))))?;
            if !tuples.contains(&ids) {
                tuples.push(ids);
            }
        }
        b.add_relation(&s.name, tuples);
    }
    for r in &dom.failures {
        let what = format!("failure rule `{}`", r.name);
        let sorts: Vec<&str> = r.params.iter().map(|p| p.sort.as_str()).collect();
        let mut tuples = Vec::new();
        for t in b.tuples(&sorts) {
            let binding: Binding = r.params.iter().map(|p| p.name.clone()).zip(t.iter().copied()).collect();
            match b.cond_or(&r.body, &binding, &Ctx { action: None, what: &what })? {
                GCond::Const(true) => tuples.push(t),
                GCond::Const(false) => {}
                _ => return Err(GroundError::DynamicGuard(what)),
            }
        }
        b.add_relation(&r.name, tuples);
    }

    let weak_level = dom.weak.iter().map(|w| w.level).max().unwrap_or(0) + 1;
    let mut actions = Vec::new();
    for (si, schema) in dom.actions.iter().enumerate() {
        let sorts: Vec<&str> = schema.params.iter().map(|p| p.sort.as_str()).collect();
        for t in b.tuples(&sorts) {
            actions.push(b.action(si, schema, &t, opts, weak_level)?);
        }
    }
    let live: Vec<usize> = (0..actions.len()).filter(|&i| !actions[i].pre.is_false()).collect();

    let none = |what: &'static str| Ctx { action: None, what };
    let mut constraints = Vec::new();
    let mut state_weak = Vec::new();
    for c in &dom.constraints {
        if walk::contains_does(&c.body) {
            continue;
        }
        if c.safety && !opts.safety_strict {
            for cond in b.conj_all(&c.body, &Binding::new(), &none("safety constraint"))? {
                state_weak.push(WeakTerm { cond, level: weak_level, weight: opts.safety_penalty });
            }
            continue;
        }
        let cond = b.cond_or(&c.body, &Binding::new(), &none("constraint"))?;
        if !cond.is_false() {
            constraints.push(StateConstraint { cond, text: printer::clause(&c.body) });
        }
    }
    for w in &dom.weak {
        if walk::contains_does(&w.body) {
            continue;
        }
        let weight = weak_weight(w, opts);
        for cond in b.conj_all(&w.body, &Binding::new(), &none("weak constraint"))? {
            state_weak.push(WeakTerm { cond, level: w.level, weight });
        }
    }

    let mut axioms = Vec::new();
    for ax in &dom.axioms {
        let sorts: Vec<&str> = ax.params.iter().map(|p| p.sort.as_str()).collect();
        for t in b.tuples(&sorts) {
            let binding: Binding = ax.params.iter().map(|p| p.name.clone()).zip(t.iter().copied()).collect();
            let ctx = none("axiom");
            let when = match &ax.when {
                Some(w) => b.cond_or(w, &binding, &ctx)?,
                None => GCond::Const(true),
            };
            if when.is_false() {
                continue;
            }
            let (atom_set, _) = b.count_members(&ax.template, &ax.guard, &binding, &ctx)?;
            let args: Vec<&str> = t.iter().map(|c| b.consts[*c as usize].as_str()).collect();
            let text = format!(
                "{}{{{}}}{}{}",
                ax.lo,
                printer::atom(&ax.template),
                ax.hi,
                if args.is_empty() { String::new() } else { format!(" for ({})", args.join(",")) }
            );
            axioms.push(AxiomInstance { when, atoms: atom_set.into_iter().collect(), lo: ax.lo, hi: ax.hi, text });
        }
    }

    let lookup = |b: &Builder, l: &GroundLiteral| -> Result<GLit, GroundError> {
        let fi = b.fluent_index.get(&l.name).ok_or_else(|| GroundError::IllSorted(l.to_string()))?;
        let ids: Option<Vec<ConstId>> = l.args.iter().map(|c| b.const_index.get(c).copied()).collect();
        let id = ids
            .and_then(|ids| b.atom_index.get(&(*fi, ids)).copied())
            .ok_or_else(|| GroundError::IllSorted(l.to_string()))?;
        Ok((id, !l.negated))
    };
    let mut init = BeliefState::unknown(atoms.len());
    for (i, p) in partial.iter().enumerate() {
        if !p {
            init.set(i as AtomId, false);
        }
    }
    for l in &inst.init {
        let (a, v) = lookup(&b, l)?;
        init.set(a, v);
    }
    let goal = inst.goal.iter().map(|l| lookup(&b, l)).collect::<Result<Vec<_>, _>>()?;

    let stats = GroundStats {
        atoms: atoms.len(),
        actions: actions.len(),
        live_actions: live.len(),
        external_calls: b.ext_cache.len() as u64,
        seconds: start.elapsed().as_secs_f64(),
    };
    log::info!(
        "ground atoms={} actions={} live={} external_calls={} seconds={:.6}",
        stats.atoms,
        stats.actions,
        stats.live_actions,
        stats.external_calls,
        stats.seconds
    );

    let statics = dom.statics.iter().map(|s| (s.name.clone(), b.relations[&s.name].clone())).collect();
    let failures = dom.failures.iter().map(|r| (r.name.clone(), b.relations[&r.name].clone())).collect();
    let mut gp = GroundProblem {
        consts: b.consts,
        const_index: b.const_index,
        sorts,
        fluent_names: dom.fluents.iter().map(|f| f.name.clone()).collect(),
        atoms,
        atom_index: b.atom_index,
        partial,
        actions,
        live,
        constraints,
        axioms,
        state_weak,
        statics,
        failures,
        init: init.clone(),
        goal,
        stats,
    };
    gp.close(&mut init).map_err(GroundError::InitialInconsistent)?;
    gp.init = init;
    Ok(gp)
}

fn weak_weight(w: &WeakConstraint, opts: &GroundOptions) -> u32 {
    w.label.as_ref().and_then(|l| opts.weight_overrides.get(l)).copied().unwrap_or(w.weight)
}

impl<'a> Builder<'a> {
    fn add_relation(&mut self, name: &str, tuples: Vec<Vec<ConstId>>) {
        self.relations.insert(name.to_string(), tuples.iter().cloned().collect());
        self.relation_tuples.insert(name.to_string(), tuples);
    }

    /// Cartesian product of sort members in declaration order.
    fn tuples(&self, sorts: &[&str]) -> Vec<Vec<ConstId>> {
        let mut out = vec![Vec::new()];
        for s in sorts {
            let members = &self.sort_members[*s];
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    members.iter().map(move |m| {
                        let mut t = prefix.clone();
                        t.push(*m);
                        t
                    })
                })
                .collect();
        }
        out
    }

    fn action(
        &mut self,
        si: usize,
        schema: &'a ActionSchema,
        args: &[ConstId],
        opts: &GroundOptions,
        safety_level: u32,
    ) -> Result<GroundAction, GroundError> {
        let binding: Binding = schema.params.iter().map(|p| p.name.clone()).zip(args.iter().copied()).collect();
        let arg_names: Vec<String> = args.iter().map(|c| self.consts[*c as usize].clone()).collect();
        let what = format!("action `{}`", schema.name);
        let plain = Ctx { action: None, what: &what };
        let occ = Ctx { action: Some((&schema.name, schema.kind, args)), what: &what };

        let mut pre = Vec::new();
        for p in &schema.pre {
            pre.push(self.cond_or(p, &binding, &plain)?);
            if pre.last() == Some(&GCond::Const(false)) {
                break;
            }
        }
        let mut weak = Vec::new();
        let dom = self.dom;
        if !pre.iter().any(GCond::is_false) {
            for c in dom.constraints.iter().filter(|c| walk::contains_does(&c.body)) {
                if c.safety && !opts.safety_strict {
                    for cond in self.conj_all(&c.body, &Binding::new(), &occ)? {
                        weak.push(WeakTerm { cond, level: safety_level, weight: opts.safety_penalty });
                    }
                } else {
                    let forbidden = self.cond_or(&c.body, &Binding::new(), &occ)?;
                    pre.push(GCond::negate(forbidden));
                }
            }
            for w in dom.weak.iter().filter(|w| walk::contains_does(&w.body)) {
                let weight = weak_weight(w, opts);
                for cond in self.conj_all(&w.body, &Binding::new(), &occ)? {
                    weak.push(WeakTerm { cond, level: w.level, weight });
                }
            }
        }

        let effects = schema.effects.iter().map(|l| self.ground_lit(l, &binding, &what)).collect::<Result<_, _>>()?;
        let outcomes = match &schema.outcomes {
            None => Vec::new(),
            Some(OutcomeSet::Enumerated(os)) => {
                let mut out = Vec::new();
                for o in os {
                    let observe = o.observe.iter().map(|l| self.ground_lit(l, &binding, &what)).collect::<Result<_, _>>()?;
                    let then = o.then.iter().map(|l| self.ground_lit(l, &binding, &what)).collect::<Result<_, _>>()?;
                    out.push(GroundOutcome { label: o.name.clone(), observe, then });
                }
                out
            }
            Some(OutcomeSet::Ranged { template, var, sort, then, .. }) => {
                let mut cands = Vec::new();
                for &m in &self.sort_members[sort] {
                    let mut nb = binding.clone();
                    nb.insert(var.clone(), m);
                    let ids = self.ground_args(&template.atom.args, &nb, &what)?;
                    let fi = self.fluent_index[&template.atom.name];
                    if let Some(&id) = self.atom_index.get(&(fi, ids)) {
                        cands.push((m, id, nb));
                    }
                }
                let mut out = Vec::new();
                for (i, (m, id, nb)) in cands.iter().enumerate() {
                    let mut observe = vec![(*id, !template.negated)];
                    for (j, (_, other, _)) in cands.iter().enumerate() {
                        if i != j {
                            observe.push((*other, template.negated));
                        }
                    }
                    let then = then.iter().map(|l| self.ground_lit(l, nb, &what)).collect::<Result<_, _>>()?;
                    out.push(GroundOutcome { label: self.consts[*m as usize].clone(), observe, then });
                }
                out
            }
        };
        Ok(GroundAction {
            name: schema.name.clone(),
            args: arg_names,
            schema: si,
            kind: schema.kind,
            pre: GCond::and(pre),
            effects,
            outcomes,
            weak,
        })
    }

    fn ground_args(&self, args: &[Term], b: &Binding, what: &str) -> Result<Vec<ConstId>, GroundError> {
        args.iter()
            .map(|t| match t {
                Term::Const(c) => self
                    .const_index
                    .get(c)
                    .copied()
                    .ok_or_else(|| GroundError::IllSorted(format!("constant `{c}` in {what}"))),
                Term::Var(v) => {
                    b.get(v).copied().ok_or_else(|| GroundError::Unbound { var: v.clone(), context: what.to_string() })
                }
            })
            .collect()
    }

    fn ground_lit(&self, l: &Literal, b: &Binding, what: &str) -> Result<GLit, GroundError> {
        let ids = self.ground_args(&l.atom.args, b, what)?;
        let fi = self.fluent_index[&l.atom.name];
        let text = || {
            let names: Vec<&str> = ids.iter().map(|c| self.consts[*c as usize].as_str()).collect();
            format!("{}({}) in {what}", l.atom.name, names.join(","))
        };
        match self.atom_index.get(&(fi, ids.clone())) {
            Some(&id) => Ok((id, !l.negated)),
            None => Err(GroundError::IllSorted(text())),
        }
    }

    /// Disjunction over all groundings of a conjunction.
    fn cond_or(&mut self, c: &'a Condition, b: &Binding, ctx: &Ctx) -> Result<GCond, GroundError> {
        Ok(GCond::or(self.conj_all(c, b, ctx)?))
    }

    /// One ground condition per grounding of a conjunction.
    fn conj_all(&mut self, c: &'a Condition, b: &Binding, ctx: &Ctx) -> Result<Vec<GCond>, GroundError> {
        let mut out = Vec::new();
        self.conj(walk::conjuncts(c), b, ctx, Vec::new(), &mut out)?;
        Ok(out)
    }

    fn conj(
        &mut self,
        items: Vec<&'a Condition>,
        b: &Binding,
        ctx: &Ctx,
        acc: Vec<GCond>,
        out: &mut Vec<GCond>,
    ) -> Result<(), GroundError> {
        if items.is_empty() {
            let g = GCond::and(acc);
            if !g.is_false() {
                out.push(g);
            }
            return Ok(());
        }
        let ready = items.iter().position(|c| is_atomic(c) && unbound(c, b).is_empty());
        let binder = || {
            let pick = |f: &dyn Fn(&Condition) -> bool| items.iter().position(|c| f(c));
            pick(&|c| matches!(c, Condition::Does(DoesTarget::Action(_), _)) && ctx.action.is_some())
                .or_else(|| pick(&|c| matches!(c, Condition::Relation(_))))
                .or_else(|| pick(&|c| matches!(c, Condition::Fluent(_))))
        };
        let i = match ready {
            Some(i) => i,
            None => match binder() {
                Some(i) => {
                    for nb in self.bindings_for(items[i], b, ctx)? {
                        self.conj(items.clone(), &nb, ctx, acc.clone(), out)?;
                    }
                    return Ok(());
                }
                None => 0,
            },
        };
        let g = self.item(items[i], b, ctx)?;
        if g.is_false() {
            return Ok(());
        }
        let mut rest = items;
        rest.remove(i);
        let mut acc = acc;
        acc.push(g);
        self.conj(rest, b, ctx, acc, out)
    }

    /// Extensions of `b` binding the free variables of a positive atom.
    fn bindings_for(&self, c: &Condition, b: &Binding, ctx: &Ctx) -> Result<Vec<Binding>, GroundError> {
        let (args, candidates): (&[Term], Vec<Vec<ConstId>>) = match c {
            Condition::Does(DoesTarget::Action(a), _) => {
                let (name, _, act_args) = ctx.action.expect("binder requires an action");
                let cands = if a.name == name { vec![act_args.to_vec()] } else { Vec::new() };
                (&a.args, cands)
            }
            Condition::Relation(a) => (&a.args, self.relation_tuples.get(&a.name).cloned().unwrap_or_default()),
            Condition::Fluent(l) => {
                let f = &self.dom.fluents[self.fluent_index[&l.atom.name]];
                let sorts: Vec<&str> = f.arg_sorts.iter().map(String::as_str).collect();
                (&l.atom.args, self.tuples(&sorts))
            }
            _ => unreachable!("not a binder"),
        };
        let mut out = Vec::new();
        'cand: for t in candidates {
            let mut nb = b.clone();
            for (term, &v) in args.iter().zip(&t) {
                match term {
                    Term::Const(name) => {
                        if self.const_index.get(name) != Some(&v) {
                            continue 'cand;
                        }
                    }
                    Term::Var(x) => match nb.get(x) {
                        Some(&bound) if bound != v => continue 'cand,
                        Some(_) => {}
                        None => {
                            nb.insert(x.clone(), v);
                        }
                    },
                }
            }
            if args.len() == t.len() {
                out.push(nb);
            }
        }
        let _ = ctx.what;
        Ok(out)
    }

    fn external(&mut self, a: &Atom, b: &Binding, what: &str) -> Result<bool, GroundError> {
        let ids = self.ground_args(&a.args, b, what)?;
        let key = (a.name.clone(), ids);
        if let Some(&v) = self.ext_cache.get(&key) {
            return Ok(v);
        }
        let names: Vec<String> = key.1.iter().map(|c| self.consts[*c as usize].clone()).collect();
        let v = self.oracle.eval(&a.name, &names)?;
        self.ext_cache.insert(key, v);
        Ok(v)
    }

    fn item(&mut self, c: &'a Condition, b: &Binding, ctx: &Ctx) -> Result<GCond, GroundError> {
        Ok(match c {
            Condition::Fluent(l) => {
                let ids = self.ground_args(&l.atom.args, b, ctx.what)?;
                match self.atom_index.get(&(self.fluent_index[&l.atom.name], ids)) {
                    Some(&id) => GCond::Known(id, !l.negated),
                    None => GCond::Const(false),
                }
            }
            Condition::Relation(a) => {
                let ids = self.ground_args(&a.args, b, ctx.what)?;
                GCond::Const(self.relations.get(&a.name).is_some_and(|r| r.contains(&ids)))
            }
            Condition::External(a) => GCond::Const(self.external(a, b, ctx.what)?),
            Condition::Compare { lhs, op, rhs, .. } => {
                let ids = self.ground_args(&[lhs.clone(), rhs.clone()], b, ctx.what)?;
                GCond::Const(match op {
                    TermCmp::Eq => ids[0] == ids[1],
                    TermCmp::Ne => ids[0] != ids[1],
                    TermCmp::Lt => ids[0] < ids[1],
                })
            }
            Condition::Does(target, _) => {
                let Some((name, kind, act_args)) = ctx.action else {
                    return Err(GroundError::MisplacedDoes(ctx.what.to_string()));
                };
                GCond::Const(match target {
                    DoesTarget::Kind(k) => k.matches(kind),
                    DoesTarget::Action(a) => a.name == name && self.ground_args(&a.args, b, ctx.what)? == act_args,
                })
            }
            Condition::Not(inner) => GCond::negate(self.cond_or(inner, b, ctx)?),
            Condition::And(_) => self.cond_or(c, b, ctx)?,
            Condition::Count { template, guard, cmp, bound, .. } => {
                let (atoms, offset) = self.count_members(template, guard, b, ctx)?;
                GCond::count(atoms.into_iter().collect(), offset, *cmp, *bound)
            }
        })
    }

    /// Distinct fluent atoms and the number of true relation atoms selected
    /// by a count template under its guard.
    fn count_members(
        &mut self,
        template: &Atom,
        guard: &'a [GuardItem],
        b: &Binding,
        ctx: &Ctx,
    ) -> Result<(BTreeSet<AtomId>, u32), GroundError> {
        let mut vars = Vec::new();
        let mut sorts = Vec::new();
        for g in guard {
            if let GuardItem::Bind { var, sort, .. } = g {
                vars.push(var.clone());
                sorts.push(sort.as_str());
            }
        }
        let mut atoms = BTreeSet::new();
        let mut rel = BTreeSet::new();
        let fluent = self.fluent_index.get(&template.name).copied();
        'tuple: for t in self.tuples(&sorts) {
            let mut nb = b.clone();
            for (v, c) in vars.iter().zip(t) {
                nb.insert(v.clone(), c);
            }
            for g in guard {
                if let GuardItem::Test(test) = g {
                    match self.cond_or(test, &nb, ctx)? {
                        GCond::Const(true) => {}
                        GCond::Const(false) => continue 'tuple,
                        _ => return Err(GroundError::DynamicGuard(ctx.what.to_string())),
                    }
                }
            }
            let ids = self.ground_args(&template.args, &nb, ctx.what)?;
            match fluent {
                Some(fi) => {
                    if let Some(&id) = self.atom_index.get(&(fi, ids)) {
                        atoms.insert(id);
                    }
                }
                None => {
                    if self.relations.get(&template.name).is_some_and(|r| r.contains(&ids)) {
                        rel.insert(ids);
                    }
                }
            }
        }
        Ok((atoms, rel.len() as u32))
    }
}

fn is_atomic(c: &Condition) -> bool {
    matches!(
        c,
        Condition::Fluent(_) | Condition::Relation(_) | Condition::External(_) | Condition::Compare { .. } | Condition::Does(..)
    )
}

fn unbound<'c>(c: &'c Condition, b: &Binding) -> Vec<&'c str> {
    let args: Vec<&Term> = match c {
        Condition::Fluent(l) => l.atom.args.iter().collect(),
        Condition::Relation(a) | Condition::External(a) => a.args.iter().collect(),
        Condition::Compare { lhs, rhs, .. } => vec![lhs, rhs],
        Condition::Does(DoesTarget::Action(a), _) => a.args.iter().collect(),
        _ => Vec::new(),
    };
    args.into_iter()
        .filter_map(|t| match t {
            Term::Var(v) if !b.contains_key(v) => Some(v.as_str()),
            _ => None,
        })
        .collect()
}
