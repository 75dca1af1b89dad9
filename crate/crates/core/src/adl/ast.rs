//! Abstract syntax of the ADL-H action description language.
//!
//! Every node that came from source text carries a [`Span`]. Spans never take
//! part in equality, so an AST reparsed from its pretty-printed form compares
//! equal to the original.

use std::fmt;

/// Line/column of a syntax element (both 1-based).
#[derive(Debug, Clone, Copy, Default, Eq)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl Span {
    pub fn new(line: u32, col: u32) -> Self {
        Span { line, col }
    }
}

impl PartialEq for Span {
    fn eq(&self, _other: &Self) -> bool {
        true
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Const(String),
}

impl Term {
    pub fn name(&self) -> &str {
        match self {
            Term::Var(s) | Term::Const(s) => s,
        }
    }
}

/// `name(t1, ..., tn)`; zero-arity atoms print without parentheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub name: String,
    pub args: Vec<Term>,
    pub span: Span,
}

/// A fluent atom, possibly classically negated (`-f(x)`: known false).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observability {
    Full,
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    Actuation,
    Sensing,
    CommDet,
    CommNondet,
}

impl ActionKind {
    pub fn is_decision(self) -> bool {
        matches!(self, ActionKind::Sensing | ActionKind::CommNondet)
    }

    pub fn is_communication(self) -> bool {
        matches!(self, ActionKind::CommDet | ActionKind::CommNondet)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ActionKind::Actuation => "actuation",
            ActionKind::Sensing => "sensing",
            ActionKind::CommDet => "commDet",
            ActionKind::CommNondet => "commNondet",
        }
    }
}

/// Comparison used by count tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountCmp {
    Le,
    Eq,
    Ge,
}

impl CountCmp {
    pub fn test(self, count: u32, bound: u32) -> bool {
        match self {
            CountCmp::Le => count <= bound,
            CountCmp::Eq => count == bound,
            CountCmp::Ge => count >= bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CountCmp::Le => "<=",
            CountCmp::Eq => "=",
            CountCmp::Ge => ">=",
        }
    }
}

/// Term comparison; `<` orders constants by declaration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermCmp {
    Eq,
    Ne,
    Lt,
}

impl TermCmp {
    pub fn symbol(self) -> &'static str {
        match self {
            TermCmp::Eq => "=",
            TermCmp::Ne => "!=",
            TermCmp::Lt => "<",
        }
    }
}

/// Item of a count guard: a sort binder `v:sort` or a static test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardItem {
    Bind { var: String, sort: String, span: Span },
    Test(Condition),
}

/// Target of a `does` test inside constraints and weak constraints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DoesTarget {
    Action(Atom),
    Kind(DoesKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DoesKind {
    Actuation,
    Sensing,
    Communication,
}

impl DoesKind {
    pub fn matches(self, kind: ActionKind) -> bool {
        match self {
            DoesKind::Actuation => kind == ActionKind::Actuation,
            DoesKind::Sensing => kind == ActionKind::Sensing,
            DoesKind::Communication => kind.is_communication(),
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            DoesKind::Actuation => "actuation",
            DoesKind::Sensing => "sensing",
            DoesKind::Communication => "communication",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    /// Fluent literal over the belief state.
    Fluent(Literal),
    /// Static relation or failure atom; state independent.
    Relation(Atom),
    /// Default negation: "not known true".
    Not(Box<Condition>),
    /// Parenthesised conjunction (also the top level of a clause).
    And(Vec<Condition>),
    Count {
        template: Atom,
        guard: Vec<GuardItem>,
        cmp: CountCmp,
        bound: u32,
        span: Span,
    },
    External(Atom),
    Compare {
        lhs: Term,
        op: TermCmp,
        rhs: Term,
        span: Span,
    },
    Does(DoesTarget, Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub sort: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedOutcome {
    pub name: String,
    pub observe: Vec<Literal>,
    pub then: Vec<Literal>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OutcomeSet {
    Enumerated(Vec<NamedOutcome>),
    /// Exactly one instance of `template` over `var:sort` becomes true; the
    /// chosen member also applies `then`.
    Ranged {
        template: Literal,
        var: String,
        sort: String,
        then: Vec<Literal>,
        span: Span,
    },
}

impl OutcomeSet {
    pub fn is_empty(&self) -> bool {
        match self {
            OutcomeSet::Enumerated(v) => v.is_empty(),
            OutcomeSet::Ranged { .. } => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub kind: ActionKind,
    pub params: Vec<Param>,
    pub pre: Vec<Condition>,
    pub effects: Vec<Literal>,
    pub outcomes: Option<OutcomeSet>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
    pub members: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FluentSchema {
    pub name: String,
    pub arg_sorts: Vec<String>,
    pub observability: Observability,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDecl {
    pub name: String,
    pub arity: usize,
    /// Argument sorts when declared as `static name(s1, s2)`.
    pub arg_sorts: Option<Vec<String>>,
    pub span: Span,
}

/// Hard constraint. With `safety` set it is hard only in strict mode and a
/// weighted penalty otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub body: Condition,
    pub safety: bool,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeakConstraint {
    pub label: Option<String>,
    pub body: Condition,
    pub weight: u32,
    pub level: u32,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureRule {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Condition,
    pub span: Span,
}

/// Cardinality axiom `lo{template : guard}hi when cond`, propagated over
/// belief states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Axiom {
    pub params: Vec<Param>,
    pub lo: u32,
    pub template: Atom,
    pub guard: Vec<GuardItem>,
    pub hi: u32,
    pub when: Option<Condition>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DomainSpec {
    pub sorts: Vec<SortDecl>,
    pub fluents: Vec<FluentSchema>,
    pub statics: Vec<RelationDecl>,
    pub externals: Vec<RelationDecl>,
    pub actions: Vec<ActionSchema>,
    pub constraints: Vec<Constraint>,
    pub weak: Vec<WeakConstraint>,
    pub failures: Vec<FailureRule>,
    pub axioms: Vec<Axiom>,
}

impl DomainSpec {
    pub fn sort(&self, name: &str) -> Option<&SortDecl> {
        self.sorts.iter().find(|s| s.name == name)
    }

    pub fn fluent(&self, name: &str) -> Option<&FluentSchema> {
        self.fluents.iter().find(|f| f.name == name)
    }

    pub fn action(&self, name: &str) -> Option<&ActionSchema> {
        self.actions.iter().find(|a| a.name == name)
    }

    pub fn static_decl(&self, name: &str) -> Option<&RelationDecl> {
        self.statics.iter().find(|s| s.name == name)
    }

    pub fn external(&self, name: &str) -> Option<&RelationDecl> {
        self.externals.iter().find(|s| s.name == name)
    }

    pub fn failure(&self, name: &str) -> Option<&FailureRule> {
        self.failures.iter().find(|s| s.name == name)
    }

    pub fn is_empty(&self) -> bool {
        *self == DomainSpec::default()
    }
}
