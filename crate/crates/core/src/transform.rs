//! Semantics-preserving rewrites: macro expansion and negation normal form.

use thiserror::Error;

use crate::formula::{CmpOp, Formula, FormulaKind, Term};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MacroError {
    #[error("`except` names {0}, which is not a declared function")]
    UnknownExclusion(String),
}

/// Replaces every `same(x, y) except E` by the explicit agreement
/// conjunction: `P(x) <-> P(y)` for each predicate, then `f(x) = f(y)` for
/// each function not in `E`, both in declaration order.
pub fn expand_macros(f: &Formula, sig: &Signature) -> Result<Formula, MacroError> {
    if let FormulaKind::SameExcept { left, right, excluded } = &f.kind {
        if let Some(bad) = excluded.iter().find(|e| sig.function_range(e).is_none()) {
            return Err(MacroError::UnknownExclusion(bad.clone()));
        }
        let preds = sig
            .predicates()
            .iter()
            .map(|p| Formula::iff(Formula::pred(p, left), Formula::pred(p, right)));
        let funcs = sig
            .functions()
            .iter()
            .filter(|(name, _)| !excluded.contains(name))
            .map(|(name, _)| Formula::cmp(Term::app(name, left), CmpOp::Eq, Term::app(name, right)));
        let mut expanded = Formula::conjunction(preds.chain(funcs));
        expanded.span = f.span;
        return Ok(expanded);
    }
    let mut err = None;
    let out = f.map_children(|c| match expand_macros(c, sig) {
        Ok(e) => e,
        Err(e) => {
            err.get_or_insert(e);
            c.clone()
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// Negation normal form: implications and biconditionals are eliminated and
/// negation is pushed down to predicates, comparisons and atoms, using the
/// quantifier dualities and the finite-trace temporal dualities
/// (`!X a = N !a`, `!N a = X !a`, `!(a U b) = !a R !b`, `!F a = G !a`, ...).
/// `!true` and `!false` fold to constants.
pub fn nnf(f: &Formula) -> Formula {
    positive(f)
}

fn positive(f: &Formula) -> Formula {
    use FormulaKind::*;
    match &f.kind {
        Not(a) => negative(a),
        Implies(a, b) => Formula::or(negative(a), positive(b)),
        Iff(a, b) => Formula::and(
            Formula::or(negative(a), positive(b)),
            Formula::or(negative(b), positive(a)),
        ),
        _ => f.map_children(positive).without_own_span(),
    }
}

fn negative(f: &Formula) -> Formula {
    use FormulaKind::*;
    match &f.kind {
        True => Formula::falsity(),
        False => Formula::truth(),
        Pred { .. } | Cmp { .. } | SameExcept { .. } | Atom(_) => Formula::not(f.without_spans()),
        Not(a) => positive(a),
        And(a, b) => Formula::or(negative(a), negative(b)),
        Or(a, b) => Formula::and(negative(a), negative(b)),
        Implies(a, b) => Formula::and(positive(a), negative(b)),
        Iff(a, b) => Formula::or(
            Formula::and(positive(a), negative(b)),
            Formula::and(positive(b), negative(a)),
        ),
        Forall { var, body } => Formula::exists(var.clone(), negative(body)),
        Exists { var, body } => Formula::forall(var.clone(), negative(body)),
        Next(a) => Formula::weak_next(negative(a)),
        WeakNext(a) => Formula::next(negative(a)),
        Eventually(a) => Formula::globally(negative(a)),
        Globally(a) => Formula::eventually(negative(a)),
        Until(a, b) => Formula::release(negative(a), negative(b)),
        Release(a, b) => Formula::until(negative(a), negative(b)),
    }
}

impl Formula {
    fn without_own_span(mut self) -> Formula {
        self.span = None;
        self
    }

    /// Whether negation is applied only to predicates, comparisons and atoms
    /// and no `->`/`<->` remains.
    pub fn is_nnf(&self) -> bool {
        use FormulaKind::*;
        match &self.kind {
            Not(a) => matches!(a.kind, Pred { .. } | Cmp { .. } | SameExcept { .. } | Atom(_)),
            Implies(..) | Iff(..) => false,
            _ => self.children().into_iter().all(Formula::is_nnf),
        }
    }
}
