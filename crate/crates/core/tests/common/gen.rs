//! Seeded random formulas, structures and traces.

use std::collections::BTreeSet;

use lexdialog_core::{CmpOp, Formula, Range, Signature, StructureModel, Term, Trace};
use rand::seq::SliceRandom;
use rand::Rng;

/// Temporal formula with exactly `size` nodes over `atoms`.
pub fn temporal(rng: &mut impl Rng, atoms: &[&str], size: usize) -> Formula {
    assert!(size >= 1);
    if size == 1 {
        return match rng.gen_range(0..8) {
            0 => Formula::truth(),
            1 => Formula::falsity(),
            _ => Formula::atom(*atoms.choose(rng).unwrap()),
        };
    }
    let unary = size == 2 || rng.gen_bool(0.4);
    if unary {
        let g = temporal(rng, atoms, size - 1);
        match rng.gen_range(0..5) {
            0 => Formula::not(g),
            1 => Formula::next(g),
            2 => Formula::weak_next(g),
            3 => Formula::eventually(g),
            _ => Formula::globally(g),
        }
    } else {
        let left = rng.gen_range(1..size - 1);
        let a = temporal(rng, atoms, left);
        let b = temporal(rng, atoms, size - 1 - left);
        match rng.gen_range(0..6) {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            2 => Formula::implies(a, b),
            3 => Formula::iff(a, b),
            4 => Formula::until(a, b),
            _ => Formula::release(a, b),
        }
    }
}

/// Relational vocabulary used by the generators: the given predicates and
/// functions (all names assumed declared in `sig`).
pub struct RelGen<'a> {
    pub preds: Vec<&'a str>,
    pub funcs: Vec<(&'a str, Range)>,
    pub vars: Vec<&'a str>,
}

impl RelGen<'_> {
    pub fn for_signature(sig: &Signature) -> RelGen<'_> {
        RelGen {
            preds: sig.predicates().iter().map(String::as_str).collect(),
            funcs: sig.functions().iter().map(|(n, r)| (n.as_str(), *r)).collect(),
            vars: vec!["x", "y"],
        }
    }

    fn leaf(&self, rng: &mut impl Rng, scope: &[String]) -> Formula {
        if scope.is_empty() {
            return if rng.gen_bool(0.5) { Formula::truth() } else { Formula::falsity() };
        }
        let var = |rng: &mut _| scope.choose(rng).unwrap().clone();
        let op = |rng: &mut _| *[CmpOp::Eq, CmpOp::Ne, CmpOp::Lt, CmpOp::Le, CmpOp::Gt, CmpOp::Ge].choose(rng).unwrap();
        loop {
            match rng.gen_range(0..10) {
                0..=3 if !self.preds.is_empty() => {
                    return Formula::pred(*self.preds.choose(rng).unwrap(), var(rng));
                }
                4..=5 if !self.funcs.is_empty() => {
                    let (f, _) = *self.funcs.choose(rng).unwrap();
                    let (g, _) = *self.funcs.choose(rng).unwrap();
                    return Formula::cmp(Term::app(f, var(rng)), op(rng), Term::app(g, var(rng)));
                }
                6 if !self.funcs.is_empty() => {
                    let (f, r) = *self.funcs.choose(rng).unwrap();
                    let k = rng.gen_range(r.lo - 1..=r.hi + 1);
                    let (lhs, rhs) = (Term::app(f, var(rng)), Term::Int(k));
                    return if rng.gen_bool(0.5) {
                        Formula::cmp(lhs, op(rng), rhs)
                    } else {
                        Formula::cmp(rhs, op(rng), lhs)
                    };
                }
                7 => {
                    let eq = if rng.gen_bool(0.5) { CmpOp::Eq } else { CmpOp::Ne };
                    return Formula::cmp(Term::var(var(rng)), eq, Term::var(var(rng)));
                }
                8 => {
                    let excluded: Vec<&str> = self.funcs.iter().map(|(f, _)| *f).filter(|_| rng.gen_bool(0.5)).collect();
                    return Formula::same_except(var(rng), var(rng), excluded);
                }
                9 => return if rng.gen_bool(0.5) { Formula::truth() } else { Formula::falsity() },
                _ => {}
            }
        }
    }

    /// A formula with at most `size` nodes, quantifier rank at most `rank`,
    /// whose free variables come from `scope`.
    pub fn formula(&self, rng: &mut impl Rng, size: usize, rank: usize, scope: &mut Vec<String>) -> Formula {
        if size <= 1 {
            return self.leaf(rng, scope);
        }
        let quantify = rank > 0 && (scope.is_empty() || rng.gen_bool(0.35));
        if quantify {
            let v = self.vars.choose(rng).unwrap().to_string();
            scope.push(v.clone());
            let body = self.formula(rng, size - 1, rank - 1, scope);
            scope.pop();
            return if rng.gen_bool(0.5) {
                Formula::forall(v, body)
            } else {
                Formula::exists(v, body)
            };
        }
        if size == 2 || rng.gen_bool(0.25) {
            return Formula::not(self.formula(rng, size - 1, rank, scope));
        }
        let left = rng.gen_range(1..size - 1);
        let a = self.formula(rng, left, rank, scope);
        let b = self.formula(rng, size - 1 - left, rank, scope);
        match rng.gen_range(0..4) {
            0 => Formula::and(a, b),
            1 => Formula::or(a, b),
            2 => Formula::implies(a, b),
            _ => Formula::iff(a, b),
        }
    }

    pub fn sentence(&self, rng: &mut impl Rng, size: usize, rank: usize) -> Formula {
        self.formula(rng, size, rank, &mut Vec::new())
    }
}

pub fn trace(rng: &mut impl Rng, atoms: &[&str], max_len: usize) -> Trace {
    let len = rng.gen_range(1..=max_len);
    Trace::new(
        (0..len)
            .map(|_| {
                atoms
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|a| a.to_string())
                    .collect::<BTreeSet<String>>()
            })
            .collect(),
    )
}

pub fn structure(rng: &mut impl Rng, sig: &Signature, max_size: usize) -> StructureModel {
    let n = rng.gen_range(1..=max_size);
    let domain: Vec<String> = (0..n).map(|i| format!("i{i}")).collect();
    let predicates = sig
        .predicates()
        .iter()
        .map(|p| (p.clone(), (0..n).filter(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    let functions = sig
        .functions()
        .iter()
        .map(|(f, r)| (f.clone(), (0..n).map(|_| rng.gen_range(r.lo..=r.hi)).collect()))
        .collect();
    StructureModel::from_tables(domain, predicates, functions)
}
