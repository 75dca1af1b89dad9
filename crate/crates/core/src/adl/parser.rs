//! Recursive-descent parser for ADL-H domain files.
//!
//! Parsing runs in two passes: a declaration scan collects every declared
//! name (so clauses may reference failure atoms or actions defined further
//! down), then the full parse resolves each atom against that table.

use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::ParseError;

const KEYWORDS: &[&str] = &[
    "sort", "fluent", "partial", "static", "external", "actuation", "sensing", "communication",
    "pre", "effect", "outcome", "one", "over", "constraint", "safety", "weak", "failure", "when",
    "not", "count", "does", "axiom",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    Fluent(usize),
    Static(usize),
    Failure(usize),
    External(usize),
    Action(usize),
}

#[derive(Default)]
struct Symbols {
    names: HashMap<String, Sym>,
    sorts: HashSet<String>,
    constants: HashSet<String>,
}

pub fn parse_domain(src: &str) -> Result<DomainSpec, ParseError> {
    let toks = tokenize(src)?;
    let symbols = scan_declarations(&toks)?;
    let mut p = Parser { toks, pos: 0, sym: symbols };
    p.domain()
}

fn scan_declarations(toks: &[Token]) -> Result<Symbols, ParseError> {
    let mut sym = Symbols::default();
    let mut i = 0;
    let mut counts: HashMap<&'static str, usize> = HashMap::new();
    let mut depth = 0i32;
    while i + 1 < toks.len() {
        match &toks[i].tok {
            Tok::LParen | Tok::LBrace | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBrace | Tok::RBracket => depth -= 1,
            _ => {}
        }
        if depth != 0 {
            i += 1;
            continue;
        }
        let (Tok::Ident(kw), Tok::Ident(name)) = (&toks[i].tok, &toks[i + 1].tok) else {
            i += 1;
            continue;
        };
        // `does sensing` etc. never precede an identifier, so only real
        // declarations reach here.
        let class: Option<&'static str> = match kw.as_str() {
            "fluent" => Some("fluent"),
            "static" => Some("static"),
            "external" => Some("external"),
            "failure" => Some("failure"),
            "actuation" | "sensing" | "communication" => {
                let prev_does = i > 0 && toks[i - 1].tok == Tok::Ident("does".into());
                if prev_does {
                    None
                } else {
                    Some("action")
                }
            }
            "sort" => {
                if !sym.sorts.insert(name.clone()) {
                    return Err(ParseError::new(
                        toks[i + 1].span,
                        format!("duplicate declaration of sort `{name}`"),
                    ));
                }
                if toks.get(i + 2).map(|t| &t.tok) == Some(&Tok::Eq) {
                    let mut j = i + 3;
                    while let Some(Token { tok: Tok::Ident(m), .. }) = toks.get(j) {
                        sym.constants.insert(m.clone());
                        j += 1;
                        if toks.get(j).map(|t| &t.tok) == Some(&Tok::Comma) {
                            j += 1;
                        } else {
                            break;
                        }
                    }
                }
                None
            }
            _ => None,
        };
        if let Some(class) = class {
            if KEYWORDS.contains(&name.as_str()) {
                i += 1;
                continue;
            }
            let n = counts.entry(class).or_insert(0);
            let entry = match class {
                "fluent" => Sym::Fluent(*n),
                "static" => Sym::Static(*n),
                "external" => Sym::External(*n),
                "failure" => Sym::Failure(*n),
                _ => Sym::Action(*n),
            };
            *n += 1;
            if sym.names.insert(name.clone(), entry).is_some() {
                return Err(ParseError::new(
                    toks[i + 1].span,
                    format!("duplicate declaration of `{name}`"),
                ));
            }
        }
        i += 1;
    }
    Ok(sym)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    sym: Symbols,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let mut e = ParseError::new(
            self.span(),
            format!("unexpected {}", self.peek().describe()),
        );
        e.expected = expected.iter().map(|s| s.to_string()).collect();
        e
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, ParseError> {
        if *self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&[tok.symbol()]))
        }
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn int(&mut self) -> Result<u32, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn domain(&mut self) -> Result<DomainSpec, ParseError> {
        let mut d = DomainSpec::default();
        loop {
            let kw = match self.peek() {
                Tok::Eof => break,
                Tok::Ident(s) => s.clone(),
                _ => return Err(self.unexpected(&["declaration"])),
            };
            match kw.as_str() {
                "sort" => d.sorts.push(self.sort_decl()?),
                "fluent" => d.fluents.push(self.fluent_decl()?),
                "static" => d.statics.push(self.relation_decl()?),
                "external" => d.externals.push(self.relation_decl()?),
                "actuation" | "sensing" | "communication" => d.actions.push(self.action()?),
                "constraint" | "safety" => d.constraints.push(self.constraint()?),
                "weak" => d.weak.push(self.weak()?),
                "failure" => d.failures.push(self.failure()?),
                "axiom" => d.axioms.push(self.axiom()?),
                _ => {
                    return Err(self.unexpected(&[
                        "sort", "fluent", "static", "external", "actuation", "sensing",
                        "communication", "constraint", "safety", "weak", "failure", "axiom",
                    ]))
                }
            }
        }
        self.check_sorts(&d)?;
        check_arities(&d)?;
        Ok(d)
    }

    fn check_sort(&self, name: &str, span: Span) -> Result<(), ParseError> {
        if self.sym.sorts.contains(name) {
            Ok(())
        } else {
            Err(ParseError::new(span, format!("unknown sort `{name}`")))
        }
    }

    fn check_sorts(&self, d: &DomainSpec) -> Result<(), ParseError> {
        for f in &d.fluents {
            for s in &f.arg_sorts {
                self.check_sort(s, f.span)?;
            }
        }
        for s in &d.sorts {
            let mut seen = HashSet::new();
            for m in &s.members {
                if !seen.insert(m) {
                    return Err(ParseError::new(
                        s.span,
                        format!("duplicate member `{m}` in sort `{}`", s.name),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sort_decl(&mut self) -> Result<SortDecl, ParseError> {
        self.bump();
        let (name, span) = self.ident()?;
        let mut members = Vec::new();
        if self.eat(&Tok::Eq) {
            loop {
                members.push(self.ident()?.0);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::Dot)?;
        Ok(SortDecl { name, members, span })
    }

    fn fluent_decl(&mut self) -> Result<FluentSchema, ParseError> {
        self.bump();
        let (name, span) = self.ident()?;
        let mut arg_sorts = Vec::new();
        if self.eat(&Tok::LParen) {
            if *self.peek() != Tok::RParen {
                loop {
                    let (s, sspan) = self.ident()?;
                    self.check_sort(&s, sspan)?;
                    arg_sorts.push(s);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        let observability = if self.is_kw("partial") {
            self.bump();
            Observability::Partial
        } else {
            Observability::Full
        };
        self.expect(Tok::Dot)?;
        Ok(FluentSchema { name, arg_sorts, observability, span })
    }

    fn relation_decl(&mut self) -> Result<RelationDecl, ParseError> {
        self.bump();
        let (name, span) = self.ident()?;
        let (arity, arg_sorts) = if self.eat(&Tok::Slash) {
            (self.int()? as usize, None)
        } else {
            self.expect(Tok::LParen)?;
            let mut sorts = Vec::new();
            loop {
                let (s, sspan) = self.ident()?;
                self.check_sort(&s, sspan)?;
                sorts.push(s);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
            (sorts.len(), Some(sorts))
        };
        self.expect(Tok::Dot)?;
        Ok(RelationDecl { name, arity, arg_sorts, span })
    }

    fn typed_params(&mut self) -> Result<Vec<Param>, ParseError> {
        let mut params = Vec::new();
        if !self.eat(&Tok::LParen) {
            return Ok(params);
        }
        if *self.peek() != Tok::RParen {
            loop {
                let (name, _) = self.ident()?;
                self.expect(Tok::Colon)?;
                let (sort, sspan) = self.ident()?;
                self.check_sort(&sort, sspan)?;
                if params.iter().any(|p: &Param| p.name == name) {
                    return Err(ParseError::new(sspan, format!("duplicate parameter `{name}`")));
                }
                params.push(Param { name, sort });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        Ok(params)
    }

    fn action(&mut self) -> Result<ActionSchema, ParseError> {
        let (kw, _) = self.ident()?;
        let (name, span) = self.ident()?;
        let params = self.typed_params()?;
        let mut pre = Vec::new();
        let mut effects = Vec::new();
        let mut enumerated: Vec<NamedOutcome> = Vec::new();
        let mut ranged: Option<OutcomeSet> = None;
        loop {
            if self.is_kw("pre") {
                self.bump();
                pre.push(self.clause_condition()?);
                self.expect(Tok::Semi)?;
            } else if self.is_kw("effect") {
                self.bump();
                loop {
                    effects.push(self.literal()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
                self.expect(Tok::Semi)?;
            } else if self.is_kw("outcome") {
                let ospan = self.bump().span;
                if self.is_kw("one") {
                    self.bump();
                    if ranged.is_some() || !enumerated.is_empty() {
                        return Err(ParseError::new(ospan, "a ranged outcome must be the only outcome clause"));
                    }
                    ranged = Some(self.ranged_outcome(&params, ospan)?);
                } else {
                    if ranged.is_some() {
                        return Err(ParseError::new(ospan, "a ranged outcome must be the only outcome clause"));
                    }
                    let (oname, nspan) = self.ident()?;
                    if enumerated.iter().any(|o| o.name == oname) {
                        return Err(ParseError::new(nspan, format!("duplicate outcome `{oname}`")));
                    }
                    self.expect(Tok::Colon)?;
                    let observe = self.literal_list()?;
                    let then = if self.eat(&Tok::Arrow) { self.literal_list()? } else { Vec::new() };
                    enumerated.push(NamedOutcome { name: oname, observe, then, span: nspan });
                }
                self.expect(Tok::Semi)?;
            } else {
                break;
            }
        }
        let outcomes = match ranged {
            Some(r) => Some(r),
            None if !enumerated.is_empty() => Some(OutcomeSet::Enumerated(enumerated)),
            None => None,
        };
        let kind = match (kw.as_str(), outcomes.is_some()) {
            ("actuation", _) => ActionKind::Actuation,
            ("sensing", _) => ActionKind::Sensing,
            (_, true) => ActionKind::CommNondet,
            (_, false) => ActionKind::CommDet,
        };
        match kind {
            ActionKind::Actuation | ActionKind::CommDet => {
                if outcomes.is_some() {
                    return Err(ParseError::new(span, format!("action `{name}` is deterministic and cannot declare outcomes")));
                }
                if effects.is_empty() {
                    return Err(ParseError::new(span, format!("deterministic action `{name}` needs at least one effect")));
                }
            }
            ActionKind::Sensing | ActionKind::CommNondet => {
                if outcomes.is_none() {
                    return Err(ParseError::new(span, format!("sensing action `{name}` needs an outcome set")));
                }
                if !effects.is_empty() {
                    return Err(ParseError::new(span, format!("action `{name}` has outcomes and cannot declare direct effects")));
                }
            }
        }
        Ok(ActionSchema { name, kind, params, pre, effects, outcomes, span })
    }

    fn ranged_outcome(&mut self, params: &[Param], span: Span) -> Result<OutcomeSet, ParseError> {
        let template = self.literal()?;
        if !self.is_kw("over") {
            return Err(self.unexpected(&["over"]));
        }
        self.bump();
        let (sort, sspan) = self.ident()?;
        self.check_sort(&sort, sspan)?;
        let free: Vec<&str> = template
            .atom
            .args
            .iter()
            .filter_map(|t| match t {
                Term::Var(v) if !params.iter().any(|p| &p.name == v) => Some(v.as_str()),
                _ => None,
            })
            .collect();
        let var = match free.as_slice() {
            [v] => v.to_string(),
            [] => return Err(ParseError::new(span, "ranged outcome template has no free variable")),
            _ => return Err(ParseError::new(span, "ranged outcome template has more than one free variable")),
        };
        let then = if self.eat(&Tok::Arrow) { self.literal_list()? } else { Vec::new() };
        Ok(OutcomeSet::Ranged { template, var, sort, then, span })
    }

    fn literal_list(&mut self) -> Result<Vec<Literal>, ParseError> {
        let mut out = vec![self.literal()?];
        while self.eat(&Tok::Comma) {
            out.push(self.literal()?);
        }
        Ok(out)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        let negated = self.eat(&Tok::Minus);
        let atom = self.atom()?;
        match self.sym.names.get(&atom.name) {
            Some(Sym::Fluent(_)) => Ok(Literal { atom, negated }),
            _ => Err(ParseError::new(atom.span, format!("unknown fluent `{}`", atom.name))),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let (name, span) = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) {
            return Err(ParseError::new(span, format!("keyword `{name}` cannot be used as a term")));
        }
        Ok(if self.sym.constants.contains(&name) { Term::Const(name) } else { Term::Var(name) })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let (name, span) = self.ident()?;
        let mut args = Vec::new();
        if self.eat(&Tok::LParen) {
            if *self.peek() != Tok::RParen {
                loop {
                    args.push(self.term()?);
                    if !self.eat(&Tok::Comma) {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen)?;
        }
        Ok(Atom { name, args, span })
    }

    /// Top-level condition of a clause: one item, or a bare conjunction.
    fn clause_condition(&mut self) -> Result<Condition, ParseError> {
        let mut items = vec![self.cond_item()?];
        while self.eat(&Tok::Comma) {
            items.push(self.cond_item()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Condition::And(items) })
    }

    fn cond_item(&mut self) -> Result<Condition, ParseError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let mut items = vec![self.cond_item()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.cond_item()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Condition::And(items))
            }
            Tok::Minus => Ok(Condition::Fluent(self.literal()?)),
            Tok::Amp => {
                self.bump();
                let atom = self.atom()?;
                match self.sym.names.get(&atom.name) {
                    Some(Sym::External(_)) => Ok(Condition::External(atom)),
                    _ => Err(ParseError::new(atom.span, format!("unknown external `{}`", atom.name))),
                }
            }
            Tok::Ident(word) => match word.as_str() {
                "not" => {
                    self.bump();
                    Ok(Condition::Not(Box::new(self.cond_item()?)))
                }
                "count" => self.count(),
                "does" => {
                    self.bump();
                    if let Tok::Ident(k) = self.peek().clone() {
                        let kind = match k.as_str() {
                            "actuation" => Some(DoesKind::Actuation),
                            "sensing" => Some(DoesKind::Sensing),
                            "communication" => Some(DoesKind::Communication),
                            _ => None,
                        };
                        if let Some(kind) = kind {
                            self.bump();
                            return Ok(Condition::Does(DoesTarget::Kind(kind), span));
                        }
                    }
                    let atom = self.atom()?;
                    match self.sym.names.get(&atom.name) {
                        Some(Sym::Action(_)) => Ok(Condition::Does(DoesTarget::Action(atom), span)),
                        _ => Err(ParseError::new(atom.span, format!("unknown action `{}`", atom.name))),
                    }
                }
                _ => {
                    if matches!(self.peek_at(1), Tok::Eq | Tok::Ne | Tok::Lt) {
                        let lhs = self.term()?;
                        let op = match self.bump().tok {
                            Tok::Eq => TermCmp::Eq,
                            Tok::Ne => TermCmp::Ne,
                            _ => TermCmp::Lt,
                        };
                        let rhs = self.term()?;
                        return Ok(Condition::Compare { lhs, op, rhs, span });
                    }
                    let atom = self.atom()?;
                    self.resolve_atom(atom)
                }
            },
            _ => Err(self.unexpected(&["condition"])),
        }
    }

    fn resolve_atom(&self, atom: Atom) -> Result<Condition, ParseError> {
        match self.sym.names.get(&atom.name) {
            Some(Sym::Fluent(_)) => Ok(Condition::Fluent(Literal { atom, negated: false })),
            Some(Sym::Static(_)) | Some(Sym::Failure(_)) => Ok(Condition::Relation(atom)),
            Some(Sym::External(_)) => Err(ParseError::new(
                atom.span,
                format!("external `{}` must be written `&{}`", atom.name, atom.name),
            )),
            Some(Sym::Action(_)) => Err(ParseError::new(
                atom.span,
                format!("action `{}` can only be tested with `does`", atom.name),
            )),
            None => Err(ParseError::new(
                atom.span,
                format!("unknown fluent or relation `{}`", atom.name),
            )),
        }
    }

    fn count(&mut self) -> Result<Condition, ParseError> {
        let span = self.bump().span;
        self.expect(Tok::LBrace)?;
        let template = self.atom()?;
        self.check_template(&template)?;
        let guard = self.guard()?;
        self.expect(Tok::RBrace)?;
        let cmp = match self.peek() {
            Tok::Le => CountCmp::Le,
            Tok::Eq => CountCmp::Eq,
            Tok::Ge => CountCmp::Ge,
            _ => return Err(self.unexpected(&["<=", "=", ">="])),
        };
        self.bump();
        let bound = self.int()?;
        Ok(Condition::Count { template, guard, cmp, bound, span })
    }

    fn check_template(&self, atom: &Atom) -> Result<(), ParseError> {
        match self.sym.names.get(&atom.name) {
            Some(Sym::Fluent(_)) | Some(Sym::Static(_)) | Some(Sym::Failure(_)) => Ok(()),
            _ => Err(ParseError::new(
                atom.span,
                format!("unknown fluent or relation `{}`", atom.name),
            )),
        }
    }

    fn guard(&mut self) -> Result<Vec<GuardItem>, ParseError> {
        let mut guard = Vec::new();
        if !self.eat(&Tok::Colon) {
            return Ok(guard);
        }
        loop {
            if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon {
                let (var, span) = self.ident()?;
                self.bump();
                let (sort, sspan) = self.ident()?;
                self.check_sort(&sort, sspan)?;
                guard.push(GuardItem::Bind { var, sort, span });
            } else {
                guard.push(GuardItem::Test(self.cond_item()?));
            }
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        Ok(guard)
    }

    fn constraint(&mut self) -> Result<Constraint, ParseError> {
        let (kw, span) = self.ident()?;
        let body = self.clause_condition()?;
        self.expect(Tok::Dot)?;
        Ok(Constraint { body, safety: kw == "safety", span })
    }

    fn weak(&mut self) -> Result<WeakConstraint, ParseError> {
        let span = self.bump().span;
        let mut label = None;
        if matches!(self.peek(), Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()))
            && *self.peek_at(1) == Tok::Colon
        {
            label = Some(self.ident()?.0);
            self.bump();
        }
        let body = self.clause_condition()?;
        self.expect(Tok::LBracket)?;
        let weight = self.int()?;
        self.expect(Tok::At)?;
        let level = self.int()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::Dot)?;
        if weight == 0 || level == 0 {
            return Err(ParseError::new(span, "weak constraint weight and level must be at least 1"));
        }
        Ok(WeakConstraint { label, body, weight, level, span })
    }

    fn failure(&mut self) -> Result<FailureRule, ParseError> {
        self.bump();
        let (name, span) = self.ident()?;
        let params = self.typed_params()?;
        if !self.is_kw("when") {
            return Err(self.unexpected(&["when"]));
        }
        self.bump();
        let body = self.clause_condition()?;
        self.expect(Tok::Dot)?;
        Ok(FailureRule { name, params, body, span })
    }

    fn axiom(&mut self) -> Result<Axiom, ParseError> {
        let span = self.bump().span;
        let params = self.typed_params()?;
        let lo = self.int()?;
        self.expect(Tok::LBrace)?;
        let template = self.atom()?;
        match self.sym.names.get(&template.name) {
            Some(Sym::Fluent(_)) => {}
            _ => {
                return Err(ParseError::new(
                    template.span,
                    format!("axiom template `{}` must be a fluent", template.name),
                ))
            }
        }
        let guard = self.guard()?;
        self.expect(Tok::RBrace)?;
        let hi = self.int()?;
        let when = if self.is_kw("when") {
            self.bump();
            Some(self.clause_condition()?)
        } else {
            None
        };
        self.expect(Tok::Dot)?;
        if lo > hi {
            return Err(ParseError::new(span, "axiom lower bound exceeds upper bound"));
        }
        Ok(Axiom { params, lo, template, guard, hi, when, span })
    }
}

fn check_arities(d: &DomainSpec) -> Result<(), ParseError> {
    match super::validate::arity_diagnostics(d).into_iter().next() {
        Some(diag) => Err(ParseError::new(diag.span, diag.message)),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adl::pretty_print;

    const HOLD: &str = "sort manip.\nsort part.\nsort region.\nstatic loc/2.\nexternal reachable/2.\n\
        fluent holding(manip, part).\nfluent free(manip).\n\
        failure reachabilityFail(m:manip, p:part) when loc(p,r), not &reachable(m,r).\n";

    #[test]
    fn hold_schema() {
        let src = format!(
            "{HOLD}actuation hold(m:manip, p:part) pre free(m); pre not reachabilityFail(m,p); effect holding(m,p); effect -free(m);"
        );
        let d = parse_domain(&src).unwrap();
        let a = d.action("hold").unwrap();
        assert_eq!(a.kind, ActionKind::Actuation);
        assert_eq!((a.params.len(), a.pre.len(), a.effects.len()), (2, 2, 2));
        assert!(a.effects[1].negated);
    }

    #[test]
    fn empty_source_is_an_empty_domain() {
        assert!(parse_domain("").unwrap().is_empty());
        assert!(parse_domain("  % nothing\n").unwrap().is_empty());
    }

    #[test]
    fn communication_kind_follows_outcomes() {
        let d = parse_domain(
            "sort part.\nfluent ok(part) partial.\n\
             communication ask(p:part) outcome yes: ok(p); outcome no: -ok(p);\n\
             communication tell(p:part) effect ok(p);",
        )
        .unwrap();
        assert_eq!(d.actions[0].kind, ActionKind::CommNondet);
        assert_eq!(d.actions[1].kind, ActionKind::CommDet);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_domain("sort part.\nfluent f(part).\nconstraint f(a, b).").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(e.message.contains("arity"), "{e}");
        let e = parse_domain("sort part.\nfluent f(widget).").unwrap_err();
        assert!(e.message.contains("unknown sort"));
        let e = parse_domain("sort part.\nsort part.").unwrap_err();
        assert!(e.message.contains("duplicate"));
        let e = parse_domain("sort part.\nconstraint g(x).").unwrap_err();
        assert!(e.message.contains("unknown fluent or relation"));
        let e = parse_domain("sort part\nfluent f.").unwrap_err();
        assert_eq!(e.expected, vec!["."]);
        let e = parse_domain("external e/1.\nsort s.\nconstraint &q(x).").unwrap_err();
        assert!(e.message.contains("unknown external"));
    }

    #[test]
    fn round_trip_with_every_construct() {
        let src = format!(
            "{HOLD}actuation hold(m:manip, p:part) pre free(m); effect holding(m,p), -free(m);\nsort conn = c1, c2.\nfluent at(part, conn) partial.\nstatic dangerous/1.\n\
             sensing where(p:part) pre not (free(m), holding(m,p)); outcome one at(p,c) over conn => -free(x);\n\
             communication ask(p:part) pre count{{holding(m,q): m:manip, q != p}} <= 0, -at(p,c1); outcome yes: at(p,c2); outcome no: -at(p,c2) => -at(p,c1);\n\
             constraint count{{at(p,c): c:conn, c1 < c}} >= 2, holding(m,p).\n\
             safety does ask(p), dangerous(p).\n\
             weak noisy: does sensing [2@2].\nweak does hold(m,p), reachabilityFail(m,p) [2@1].\n\
             axiom (p:part) 0{{at(p,c) : c:conn}}1 when not free(m), holding(m,p).\naxiom 0{{free(m)}}2."
        );
        let d = parse_domain(&src).unwrap();
        let printed = pretty_print(&d);
        let again = parse_domain(&printed).unwrap_or_else(|e| panic!("{e}\n{printed}"));
        assert_eq!(again, d);
        assert_eq!(pretty_print(&again), printed);
    }
}
