//! Model checking: truth of a law in one case.
//!
//! Relational formulas are first compiled to an index-based form (variables
//! become slots, names become table positions) so that the bounded model
//! finder can evaluate one formula against many candidate structures cheaply.

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::{CaseModel, StructureModel, Trace};
use crate::formula::{CmpOp, Formula, FormulaKind, Term};
use crate::signature::Layer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("a {law} law cannot be checked against a {model} case")]
    LayerMismatch { law: Layer, model: Layer },
    #[error("{0} is not part of the case's vocabulary")]
    UnknownSymbol(String),
    #[error("variable {0} is not bound")]
    UnboundVariable(String),
    #[error("individual {0:?} is not in the domain")]
    UnknownIndividual(String),
}

/// Variable assignment, variable ↦ individual identifier, in binding order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Environment(pub IndexMap<String, String>);

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, var: impl Into<String>, individual: impl Into<String>) -> Self {
        self.0.insert(var.into(), individual.into());
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }
}

impl fmt::Display for Environment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, i)| format!("{v} = {i}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Read access to a finite structure by index.
pub(crate) trait Interpretation {
    fn size(&self) -> usize;
    fn pred(&self, p: usize, e: usize) -> bool;
    fn func(&self, f: usize, e: usize) -> i64;
}

impl Interpretation for StructureModel {
    fn size(&self) -> usize {
        self.domain.len()
    }

    fn pred(&self, p: usize, e: usize) -> bool {
        self.predicates[p].1.contains(&e)
    }

    fn func(&self, f: usize, e: usize) -> i64 {
        self.functions[f].1[e]
    }
}

#[derive(Debug, Clone)]
enum CTerm {
    Var(usize),
    Int(i64),
    App(usize, usize),
}

#[derive(Debug, Clone)]
enum Node {
    Const(bool),
    Pred(usize, usize),
    Cmp(CTerm, CmpOp, CTerm),
    Same {
        left: usize,
        right: usize,
        preds: Vec<usize>,
        funcs: Vec<usize>,
    },
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    Forall(usize, Box<Node>),
    Exists(usize, Box<Node>),
}

/// A relational formula resolved against a vocabulary.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    root: Node,
    slots: usize,
}

struct Compiler<'a> {
    predicates: &'a [&'a str],
    functions: &'a [&'a str],
    scope: Vec<String>,
    max: usize,
}

impl Compiler<'_> {
    fn var(&self, v: &str) -> Result<usize, EvalError> {
        self.scope
            .iter()
            .rposition(|s| s == v)
            .ok_or_else(|| EvalError::UnboundVariable(v.to_string()))
    }

    fn pred(&self, p: &str) -> Result<usize, EvalError> {
        self.predicates
            .iter()
            .position(|q| *q == p)
            .ok_or_else(|| EvalError::UnknownSymbol(p.to_string()))
    }

    fn func(&self, f: &str) -> Result<usize, EvalError> {
        self.functions
            .iter()
            .position(|g| *g == f)
            .ok_or_else(|| EvalError::UnknownSymbol(f.to_string()))
    }

    fn term(&self, t: &Term) -> Result<CTerm, EvalError> {
        Ok(match t {
            Term::Var(v) => CTerm::Var(self.var(v)?),
            Term::Int(i) => CTerm::Int(*i),
            Term::App { func, var } => CTerm::App(self.func(func)?, self.var(var)?),
        })
    }

    fn node(&mut self, f: &Formula) -> Result<Node, EvalError> {
        use FormulaKind::*;
        let bin = |s: &mut Self, a: &Formula, b: &Formula| -> Result<(Box<Node>, Box<Node>), EvalError> {
            Ok((Box::new(s.node(a)?), Box::new(s.node(b)?)))
        };
        Ok(match &f.kind {
            True => Node::Const(true),
            False => Node::Const(false),
            Pred { name, var } => Node::Pred(self.pred(name)?, self.var(var)?),
            Cmp { lhs, op, rhs } => Node::Cmp(self.term(lhs)?, *op, self.term(rhs)?),
            SameExcept { left, right, excluded } => {
                for e in excluded {
                    self.func(e)?;
                }
                Node::Same {
                    left: self.var(left)?,
                    right: self.var(right)?,
                    preds: (0..self.predicates.len()).collect(),
                    funcs: (0..self.functions.len())
                        .filter(|&i| !excluded.iter().any(|e| e == self.functions[i]))
                        .collect(),
                }
            }
            Not(a) => Node::Not(Box::new(self.node(a)?)),
            And(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Node::And(a, b)
            }
            Or(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Node::Or(a, b)
            }
            Implies(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Node::Implies(a, b)
            }
            Iff(a, b) => {
                let (a, b) = bin(self, a, b)?;
                Node::Iff(a, b)
            }
            Forall { var, body } | Exists { var, body } => {
                let slot = self.scope.len();
                self.scope.push(var.clone());
                self.max = self.max.max(self.scope.len());
                let body = self.node(body);
                self.scope.pop();
                let body = Box::new(body?);
                if matches!(f.kind, Forall { .. }) {
                    Node::Forall(slot, body)
                } else {
                    Node::Exists(slot, body)
                }
            }
            Atom(a) => return Err(EvalError::UnknownSymbol(a.clone())),
            Next(_) | WeakNext(_) | Eventually(_) | Globally(_) | Until(..) | Release(..) => {
                return Err(EvalError::LayerMismatch {
                    law: Layer::Temporal,
                    model: Layer::Relational,
                })
            }
        })
    }
}

impl Compiled {
    /// Resolves `f` against the given vocabulary; `free` lists the variables
    /// that will be supplied, in slot order.
    pub(crate) fn new(
        f: &Formula,
        predicates: &[&str],
        functions: &[&str],
        free: &[String],
    ) -> Result<Self, EvalError> {
        let mut c = Compiler {
            predicates,
            functions,
            scope: free.to_vec(),
            max: free.len(),
        };
        let root = c.node(f)?;
        Ok(Compiled { root, slots: c.max })
    }

    pub(crate) fn for_model(m: &StructureModel, f: &Formula, free: &[String]) -> Result<Self, EvalError> {
        let preds: Vec<&str> = m.predicates.iter().map(|(n, _)| n.as_str()).collect();
        let funcs: Vec<&str> = m.functions.iter().map(|(n, _)| n.as_str()).collect();
        Compiled::new(f, &preds, &funcs, free)
    }

    /// Truth under an assignment of the free variables (by slot).
    pub(crate) fn eval(&self, m: &impl Interpretation, free: &[usize]) -> bool {
        let mut asg = vec![0; self.slots.max(free.len())];
        asg[..free.len()].copy_from_slice(free);
        eval_node(&self.root, m, &mut asg)
    }
}

fn term_value(t: &CTerm, m: &impl Interpretation, asg: &[usize]) -> i64 {
    match t {
        CTerm::Var(s) => asg[*s] as i64,
        CTerm::Int(i) => *i,
        CTerm::App(f, s) => m.func(*f, asg[*s]),
    }
}

fn eval_node(n: &Node, m: &impl Interpretation, asg: &mut [usize]) -> bool {
    match n {
        Node::Const(b) => *b,
        Node::Pred(p, s) => m.pred(*p, asg[*s]),
        Node::Cmp(a, op, b) => op.apply(term_value(a, m, asg), term_value(b, m, asg)),
        Node::Same {
            left,
            right,
            preds,
            funcs,
        } => {
            let (x, y) = (asg[*left], asg[*right]);
            preds.iter().all(|&p| m.pred(p, x) == m.pred(p, y))
                && funcs.iter().all(|&f| m.func(f, x) == m.func(f, y))
        }
        Node::Not(a) => !eval_node(a, m, asg),
        Node::And(a, b) => eval_node(a, m, asg) && eval_node(b, m, asg),
        Node::Or(a, b) => eval_node(a, m, asg) || eval_node(b, m, asg),
        Node::Implies(a, b) => !eval_node(a, m, asg) || eval_node(b, m, asg),
        Node::Iff(a, b) => eval_node(a, m, asg) == eval_node(b, m, asg),
        Node::Forall(s, body) => (0..m.size()).all(|e| {
            asg[*s] = e;
            eval_node(body, m, asg)
        }),
        Node::Exists(s, body) => (0..m.size()).any(|e| {
            asg[*s] = e;
            eval_node(body, m, asg)
        }),
    }
}

/// Tarskian truth of a relational formula in `m` under `env`. `same(..)`
/// nodes are evaluated directly: agreement on every predicate of the model
/// and every function not excluded.
pub fn eval_fo(m: &StructureModel, f: &Formula, env: &Environment) -> Result<bool, EvalError> {
    let vars: Vec<String> = env.0.keys().cloned().collect();
    let mut values = Vec::with_capacity(vars.len());
    for ind in env.0.values() {
        values.push(m.index_of(ind).ok_or_else(|| EvalError::UnknownIndividual(ind.clone()))?);
    }
    Ok(Compiled::for_model(m, f, &vars)?.eval(m, &values))
}

/// Truth value of `f` at every position of `t`, computed bottom-up.
pub fn ltlf_truth(t: &Trace, f: &Formula) -> Vec<bool> {
    use FormulaKind::*;
    let n = t.len();
    // Backward sweep for the fixpoint operators: `step(i, here, later)`.
    let backward = |base: &dyn Fn(usize) -> bool, step: &dyn Fn(usize, bool) -> bool| {
        let mut v = vec![false; n];
        v[n - 1] = base(n - 1);
        for i in (0..n - 1).rev() {
            v[i] = step(i, v[i + 1]);
        }
        v
    };
    match &f.kind {
        True => vec![true; n],
        False => vec![false; n],
        Atom(a) => (0..n).map(|i| t.holds(i, a)).collect(),
        Not(a) => ltlf_truth(t, a).into_iter().map(|b| !b).collect(),
        And(a, b) | Or(a, b) | Implies(a, b) | Iff(a, b) => {
            let (a, b) = (ltlf_truth(t, a), ltlf_truth(t, b));
            a.into_iter()
                .zip(b)
                .map(|(a, b)| match &f.kind {
                    And(..) => a && b,
                    Or(..) => a || b,
                    Implies(..) => !a || b,
                    _ => a == b,
                })
                .collect()
        }
        Next(a) => {
            let a = ltlf_truth(t, a);
            (0..n).map(|i| i + 1 < n && a[i + 1]).collect()
        }
        WeakNext(a) => {
            let a = ltlf_truth(t, a);
            (0..n).map(|i| i + 1 >= n || a[i + 1]).collect()
        }
        Eventually(a) => {
            let a = ltlf_truth(t, a);
            backward(&|i| a[i], &|i, later| a[i] || later)
        }
        Globally(a) => {
            let a = ltlf_truth(t, a);
            backward(&|i| a[i], &|i, later| a[i] && later)
        }
        Until(a, b) => {
            let (a, b) = (ltlf_truth(t, a), ltlf_truth(t, b));
            backward(&|i| b[i], &|i, later| b[i] || (a[i] && later))
        }
        Release(a, b) => {
            let (a, b) = (ltlf_truth(t, a), ltlf_truth(t, b));
            backward(&|i| b[i], &|i, later| b[i] && (a[i] || later))
        }
        // Relational nodes have no meaning on a trace.
        Pred { .. } | Cmp { .. } | SameExcept { .. } | Forall { .. } | Exists { .. } => vec![false; n],
    }
}

/// Finite-trace truth of `f` at position `i` of `t`.
///
/// # Panics
/// If `i` is not a position of `t`.
pub fn eval_ltlf(t: &Trace, i: usize, f: &Formula) -> bool {
    assert!(i < t.len(), "position {i} outside a trace of length {}", t.len());
    ltlf_truth(t, f)[i]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Holds => "Holds",
            Outcome::Fails => "Fails",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictWitness {
    /// Assignment to the law's leading quantifier block.
    Assignment(Environment),
    /// First position where the body of a leading `G` is false.
    Position(usize),
}

impl fmt::Display for VerdictWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerdictWitness::Assignment(env) => env.fmt(f),
            VerdictWitness::Position(i) => write!(f, "position {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<VerdictWitness>,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }

    /// Re-evaluates the part of `law` the witness speaks about and confirms
    /// it reproduces the outcome. A verdict without witness re-checks the
    /// outcome itself.
    pub fn recheck(&self, model: &CaseModel, law: &Formula) -> bool {
        match (&self.witness, model) {
            (None, _) => check(model, law).map(|v| v.outcome == self.outcome).unwrap_or(false),
            (Some(VerdictWitness::Assignment(env)), CaseModel::Structure(m)) => {
                let (vars, matrix) = quantifier_block(law);
                if vars.len() != env.0.len() || vars.iter().zip(env.0.keys()).any(|(a, b)| a != b) {
                    return false;
                }
                eval_fo(m, matrix, env).map(|b| b == self.holds()).unwrap_or(false)
            }
            (Some(VerdictWitness::Position(i)), CaseModel::Trace(t)) => match &law.kind {
                FormulaKind::Globally(body) if *i < t.len() && !self.holds() => !eval_ltlf(t, *i, body),
                _ => false,
            },
            _ => false,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.witness {
            None => self.outcome.fmt(f),
            Some(w) => write!(f, "{}, witness {w}", self.outcome),
        }
    }
}

/// The maximal leading block of quantifiers of one kind and its matrix. The
/// block stops before a quantifier that rebinds one of its variables, so an
/// assignment to the block never loses a binding.
fn quantifier_block(f: &Formula) -> (Vec<String>, &Formula) {
    let universal = matches!(f.kind, FormulaKind::Forall { .. });
    let mut vars = Vec::new();
    let mut cur = f;
    loop {
        match &cur.kind {
            FormulaKind::Forall { var, body } if universal && !vars.contains(var) => {
                vars.push(var.clone());
                cur = body;
            }
            FormulaKind::Exists { var, body } if !universal && !vars.contains(var) => {
                vars.push(var.clone());
                cur = body;
            }
            _ => return (vars, cur),
        }
    }
}

/// Iterates all assignments of `k` variables over `n` individuals in
/// lexicographic domain order, returning the first one accepted.
fn first_assignment(n: usize, k: usize, mut accept: impl FnMut(&[usize]) -> bool) -> Option<Vec<usize>> {
    let mut cur = vec![0; k];
    loop {
        if accept(&cur) {
            return Some(cur);
        }
        let mut i = k;
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < n {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Decides whether the case satisfies the law and attaches a witness where
/// one is meaningful: the lexicographically first falsifying assignment of a
/// failing universal prefix, the first satisfying assignment of a holding
/// existential prefix, or the first violating position of a failing `G`.
pub fn check(model: &CaseModel, law: &Formula) -> Result<Verdict, EvalError> {
    if let Some(layer) = law.layer() {
        if layer != model.layer() {
            return Err(EvalError::LayerMismatch {
                law: layer,
                model: model.layer(),
            });
        }
    }
    if let Some(v) = law.free_vars().into_iter().next() {
        return Err(EvalError::UnboundVariable(v));
    }
    match model {
        CaseModel::Structure(m) => check_structure(m, law),
        CaseModel::Trace(t) => Ok(check_trace(t, law)),
    }
}

fn check_structure(m: &StructureModel, law: &Formula) -> Result<Verdict, EvalError> {
    let holds = Compiled::for_model(m, law, &[])?.eval(m, &[]);
    let outcome = if holds { Outcome::Holds } else { Outcome::Fails };
    let (vars, matrix) = quantifier_block(law);
    let universal = matches!(law.kind, FormulaKind::Forall { .. });
    let wanted = match (universal, holds) {
        (true, false) => Some(false),
        (false, true) if !vars.is_empty() => Some(true),
        _ => None,
    };
    let witness = match wanted {
        None => None,
        Some(target) => {
            let compiled = Compiled::for_model(m, matrix, &vars)?;
            first_assignment(m.len(), vars.len(), |a| compiled.eval(m, a) == target).map(|a| {
                VerdictWitness::Assignment(Environment(
                    vars.iter()
                        .cloned()
                        .zip(a.iter().map(|&i| m.domain[i].clone()))
                        .collect(),
                ))
            })
        }
    };
    Ok(Verdict { outcome, witness })
}

fn check_trace(t: &Trace, law: &Formula) -> Verdict {
    let holds = eval_ltlf(t, 0, law);
    let witness = match &law.kind {
        FormulaKind::Globally(body) if !holds => ltlf_truth(t, body)
            .iter()
            .position(|b| !b)
            .map(VerdictWitness::Position),
        _ => None,
    };
    Verdict {
        outcome: if holds { Outcome::Holds } else { Outcome::Fails },
        witness,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::load_structure;
    use crate::parser::parse;
    use crate::signature::{Range, Signature};

    fn syri() -> Signature {
        Signature::relational(
            ["Employed"],
            [("NrOfPassports", Range::new(0, 3)), ("Score", Range::new(0, 10))],
        )
        .unwrap()
    }

    const BIAS: &str = "forall x. forall y. (NrOfPassports(x) != NrOfPassports(y) & same(x, y) except NrOfPassports, Score) -> Score(x) = Score(y)";

    fn m1(score_b: i64) -> StructureModel {
        let json = format!(
            r#"{{"individuals": ["a", "b"], "predicates": {{"Employed": ["a", "b"]}},
                "functions": {{"NrOfPassports": {{"a": 1, "b": 2}}, "Score": {{"a": 0, "b": {score_b}}}}}}}"#
        );
        load_structure(json.as_bytes(), &syri()).unwrap()
    }

    #[test]
    fn bias_sentence_on_m1() {
        let law = parse(BIAS, &syri()).unwrap();
        assert!(!eval_fo(&m1(7), &law, &Environment::new()).unwrap());
        let v = check(&m1(7).into(), &law).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        assert_eq!(
            v.witness,
            Some(VerdictWitness::Assignment(Environment::new().bind("x", "a").bind("y", "b")))
        );
        assert!(v.recheck(&m1(7).into(), &law));
        assert!(check(&m1(0).into(), &law).unwrap().holds());
        // Expanded and unexpanded forms agree.
        let expanded = crate::transform::expand_macros(&law, &syri()).unwrap();
        assert!(!eval_fo(&m1(7), &expanded, &Environment::new()).unwrap());
    }

    #[test]
    fn singleton_holds_vacuously() {
        let json = r#"{"individuals": ["a"], "predicates": {"Employed": []},
            "functions": {"NrOfPassports": {"a": 0}, "Score": {"a": 0}}}"#;
        let m = load_structure(json.as_bytes(), &syri()).unwrap();
        assert!(check(&m.into(), &parse(BIAS, &syri()).unwrap()).unwrap().holds());
    }

    #[test]
    fn simple_quantifiers() {
        let sig = syri();
        let m = m1(7);
        let all = parse("forall x. Employed(x)", &sig).unwrap();
        assert!(eval_fo(&m, &all, &Environment::new()).unwrap());
        let m12 = m.with_value("Score", 0, 1).with_value("Score", 1, 2);
        let zero = parse("exists x. Score(x) = 0", &sig).unwrap();
        assert!(!eval_fo(&m12, &zero, &Environment::new()).unwrap());
        let v = check(&m.clone().into(), &zero).unwrap();
        assert_eq!(
            v.witness,
            Some(VerdictWitness::Assignment(Environment::new().bind("x", "a")))
        );
        let open = parse("forall y. x = y", &sig);
        assert!(open.is_err());
    }

    #[test]
    fn finite_trace_semantics() {
        let sig = Signature::temporal(["drive", "rest", "p"]).unwrap();
        let t = Trace::from_letters([vec!["drive"], vec!["rest"]]);
        assert!(eval_ltlf(&t, 0, &parse("G (drive -> F rest)", &sig).unwrap()));
        let p = Trace::from_letters([vec!["p"]]);
        assert!(!eval_ltlf(&p, 0, &parse("X p", &sig).unwrap()));
        assert!(eval_ltlf(&p, 0, &parse("N p", &sig).unwrap()));
        assert!(!eval_ltlf(&p, 0, &parse("X true", &sig).unwrap()));
        assert!(eval_ltlf(&p, 0, &parse("false R p", &sig).unwrap()));
        let bad = Trace::from_letters([vec!["drive"], vec![], vec!["drive"]]);
        let law = parse("G (drive -> X rest)", &sig).unwrap();
        let v = check(&bad.clone().into(), &law).unwrap();
        assert_eq!(v.witness, Some(VerdictWitness::Position(0)));
        assert!(v.recheck(&bad.into(), &law));
    }

    #[test]
    fn layer_mismatch() {
        let t = Trace::from_letters([vec!["p"]]);
        let law = parse("forall x. Employed(x)", &syri()).unwrap();
        assert!(matches!(
            check(&t.into(), &law),
            Err(EvalError::LayerMismatch { law: Layer::Relational, .. })
        ));
    }
}
