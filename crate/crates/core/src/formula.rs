//! Abstract syntax for the two-layer law language.
//!
//! The relational layer is monadic first-order logic with equality and
//! integer comparisons over unary functions; the temporal layer is
//! propositional LTL over finite traces. Both share the boolean connectives.
//!
//! Formulas compare structurally: [`SourceSpan`]s are carried for
//! diagnostics but ignored by `==` and `Hash`.

use std::collections::BTreeSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::signature::Layer;

/// Location of a node in the text it was parsed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    /// Byte offset of the first byte.
    pub begin: usize,
    /// Byte offset one past the last byte.
    pub end: usize,
    /// 1-based line of `begin`.
    pub line: usize,
    /// 1-based column (in characters) of `begin`.
    pub column: usize,
}

impl SourceSpan {
    pub fn cover(self, other: SourceSpan) -> SourceSpan {
        if other.begin < self.begin {
            SourceSpan {
                end: self.end.max(other.end),
                ..other
            }
        } else {
            SourceSpan {
                end: self.end.max(other.end),
                ..self
            }
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    pub fn apply<T: Ord>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Terms of the relational layer. Variables denote individuals; literals
/// and function applications denote integers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    Int(i64),
    App { func: String, var: String },
}

impl Term {
    pub fn is_individual(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn app(func: impl Into<String>, var: impl Into<String>) -> Term {
        Term::App {
            func: func.into(),
            var: var.into(),
        }
    }

    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    fn variable(&self) -> Option<&str> {
        match self {
            Term::Var(v) | Term::App { var: v, .. } => Some(v),
            Term::Int(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    True,
    False,
    // relational atoms
    Pred {
        name: String,
        var: String,
    },
    Cmp {
        lhs: Term,
        op: CmpOp,
        rhs: Term,
    },
    /// `same(x, y) except f1, ..., fk`: agreement of two individuals on every
    /// predicate and every function outside `excluded`.
    SameExcept {
        left: String,
        right: String,
        excluded: Vec<String>,
    },
    // temporal atom
    Atom(String),
    // shared connectives
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    // quantifiers
    Forall {
        var: String,
        body: Box<Formula>,
    },
    Exists {
        var: String,
        body: Box<Formula>,
    },
    // temporal operators
    Next(Box<Formula>),
    WeakNext(Box<Formula>),
    Eventually(Box<Formula>),
    Globally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Release(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Clone)]
pub struct Formula {
    pub kind: FormulaKind,
    pub span: Option<SourceSpan>,
}

impl PartialEq for Formula {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Formula {}

impl Hash for Formula {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.kind.hash(state)
    }
}

impl From<FormulaKind> for Formula {
    fn from(kind: FormulaKind) -> Self {
        Formula { kind, span: None }
    }
}

impl Formula {
    pub fn new(kind: FormulaKind, span: SourceSpan) -> Self {
        Formula {
            kind,
            span: Some(span),
        }
    }

    pub fn truth() -> Self {
        FormulaKind::True.into()
    }

    pub fn falsity() -> Self {
        FormulaKind::False.into()
    }

    pub fn pred(name: impl Into<String>, var: impl Into<String>) -> Self {
        FormulaKind::Pred {
            name: name.into(),
            var: var.into(),
        }
        .into()
    }

    pub fn cmp(lhs: Term, op: CmpOp, rhs: Term) -> Self {
        FormulaKind::Cmp { lhs, op, rhs }.into()
    }

    pub fn same_except<S: Into<String>>(
        left: impl Into<String>,
        right: impl Into<String>,
        excluded: impl IntoIterator<Item = S>,
    ) -> Self {
        FormulaKind::SameExcept {
            left: left.into(),
            right: right.into(),
            excluded: excluded.into_iter().map(Into::into).collect(),
        }
        .into()
    }

    pub fn atom(name: impl Into<String>) -> Self {
        FormulaKind::Atom(name.into()).into()
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        FormulaKind::Not(Box::new(f)).into()
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        FormulaKind::And(Box::new(a), Box::new(b)).into()
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        FormulaKind::Or(Box::new(a), Box::new(b)).into()
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        FormulaKind::Implies(Box::new(a), Box::new(b)).into()
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        FormulaKind::Iff(Box::new(a), Box::new(b)).into()
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        FormulaKind::Forall {
            var: var.into(),
            body: Box::new(body),
        }
        .into()
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        FormulaKind::Exists {
            var: var.into(),
            body: Box::new(body),
        }
        .into()
    }

    pub fn next(f: Formula) -> Self {
        FormulaKind::Next(Box::new(f)).into()
    }

    pub fn weak_next(f: Formula) -> Self {
        FormulaKind::WeakNext(Box::new(f)).into()
    }

    pub fn eventually(f: Formula) -> Self {
        FormulaKind::Eventually(Box::new(f)).into()
    }

    pub fn globally(f: Formula) -> Self {
        FormulaKind::Globally(Box::new(f)).into()
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        FormulaKind::Until(Box::new(a), Box::new(b)).into()
    }

    pub fn release(a: Formula, b: Formula) -> Self {
        FormulaKind::Release(Box::new(a), Box::new(b)).into()
    }

    /// Left-folded conjunction; the empty conjunction is `true`.
    pub fn conjunction(parts: impl IntoIterator<Item = Formula>) -> Self {
        parts
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or_else(Formula::truth)
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        use FormulaKind::*;
        match &self.kind {
            True | False | Pred { .. } | Cmp { .. } | SameExcept { .. } | Atom(_) => vec![],
            Not(a) | Next(a) | WeakNext(a) | Eventually(a) | Globally(a) => vec![a],
            Forall { body, .. } | Exists { body, .. } => vec![body],
            And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) | Until(a, b) | Release(a, b) => {
                vec![a, b]
            }
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Maximal nesting depth of quantifiers.
    pub fn quantifier_rank(&self) -> usize {
        let below = self
            .children()
            .into_iter()
            .map(Formula::quantifier_rank)
            .max()
            .unwrap_or(0);
        match self.kind {
            FormulaKind::Forall { .. } | FormulaKind::Exists { .. } => below + 1,
            _ => below,
        }
    }

    /// The layer this formula is forced into by its own nodes, if any.
    /// Formulas built only from `true`, `false` and connectives fit both.
    pub fn layer(&self) -> Option<Layer> {
        use FormulaKind::*;
        match &self.kind {
            Pred { .. } | Cmp { .. } | SameExcept { .. } | Forall { .. } | Exists { .. } => {
                Some(Layer::Relational)
            }
            Atom(_) | Next(_) | WeakNext(_) | Eventually(_) | Globally(_) | Until(..)
            | Release(..) => Some(Layer::Temporal),
            _ => self.children().into_iter().find_map(Formula::layer),
        }
    }

    /// Whether relational and temporal nodes are mixed somewhere inside.
    pub fn is_mixed(&self) -> bool {
        let mut layers = BTreeSet::new();
        self.visit(&mut |f| {
            if let Some(l) = f.own_layer() {
                layers.insert(l);
            }
        });
        layers.len() > 1
    }

    fn own_layer(&self) -> Option<Layer> {
        use FormulaKind::*;
        match &self.kind {
            Pred { .. } | Cmp { .. } | SameExcept { .. } | Forall { .. } | Exists { .. } => {
                Some(Layer::Relational)
            }
            Atom(_) | Next(_) | WeakNext(_) | Eventually(_) | Globally(_) | Until(..)
            | Release(..) => Some(Layer::Temporal),
            _ => None,
        }
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let mut note = |v: &str, bound: &Vec<String>| {
            if !bound.iter().any(|b| b == v) {
                out.insert(v.to_string());
            }
        };
        match &self.kind {
            FormulaKind::Pred { var, .. } => note(var, bound),
            FormulaKind::Cmp { lhs, rhs, .. } => {
                for v in [lhs, rhs].into_iter().filter_map(Term::variable) {
                    note(v, bound);
                }
            }
            FormulaKind::SameExcept { left, right, .. } => {
                note(left, bound);
                note(right, bound);
            }
            FormulaKind::Forall { var, body } | FormulaKind::Exists { var, body } => {
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            _ => {
                for c in self.children() {
                    c.collect_free(bound, out);
                }
            }
        }
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Whether any `same(..) except ..` node remains.
    pub fn has_macros(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| found |= matches!(f.kind, FormulaKind::SameExcept { .. }));
        found
    }

    /// Predicate names used, in first-occurrence order.
    pub fn predicates_used(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |f| {
            if let FormulaKind::Pred { name, .. } = &f.kind {
                if !out.contains(name) {
                    out.push(name.clone());
                }
            }
        });
        out
    }

    /// Function names used in terms (not counting `except` lists).
    pub fn functions_used(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |f| {
            if let FormulaKind::Cmp { lhs, rhs, .. } = &f.kind {
                for t in [lhs, rhs] {
                    if let Term::App { func, .. } = t {
                        if !out.contains(func) {
                            out.push(func.clone());
                        }
                    }
                }
            }
        });
        out
    }

    /// Atom names used, sorted.
    pub fn atoms_used(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let FormulaKind::Atom(a) = &f.kind {
                out.insert(a.clone());
            }
        });
        out
    }

    /// Copy with every span removed.
    pub fn without_spans(&self) -> Formula {
        self.map_children(|c| c.without_spans()).with_span(None)
    }

    fn with_span(mut self, span: Option<SourceSpan>) -> Formula {
        self.span = span;
        self
    }

    /// Rebuilds this node with `f` applied to each immediate subformula;
    /// the node's own span is kept.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        use FormulaKind::*;
        let mut g = |b: &Formula| Box::new(f(b));
        let kind = match &self.kind {
            True | False | Pred { .. } | Cmp { .. } | SameExcept { .. } | Atom(_) => {
                self.kind.clone()
            }
            Not(a) => Not(g(a)),
            Next(a) => Next(g(a)),
            WeakNext(a) => WeakNext(g(a)),
            Eventually(a) => Eventually(g(a)),
            Globally(a) => Globally(g(a)),
            Forall { var, body } => Forall {
                var: var.clone(),
                body: g(body),
            },
            Exists { var, body } => Exists {
                var: var.clone(),
                body: g(body),
            },
            And(a, b) => {
                let a = g(a);
                And(a, g(b))
            }
            Or(a, b) => {
                let a = g(a);
                Or(a, g(b))
            }
            Implies(a, b) => {
                let a = g(a);
                Implies(a, g(b))
            }
            Iff(a, b) => {
                let a = g(a);
                Iff(a, g(b))
            }
            Until(a, b) => {
                let a = g(a);
                Until(a, g(b))
            }
            Release(a, b) => {
                let a = g(a);
                Release(a, g(b))
            }
        };
        Formula {
            kind,
            span: self.span,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::render::render(self))
    }
}
