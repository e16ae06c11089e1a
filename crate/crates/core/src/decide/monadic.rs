//! Bounded model search for monadic sentences.
//!
//! Over unary predicates and range-bounded unary functions every individual
//! has a *type*: which predicates hold of it and what each function returns.
//! A sentence of quantifier rank q cannot tell apart two structures whose
//! type multiplicities agree after truncation at q. Consequently:
//!
//! * structures are only enumerated up to isomorphism, as nondecreasing
//!   sequences of types (individual e1 gets the smallest type);
//! * no type needs more than `max(q, 1)` copies, which also caps the useful
//!   domain size at `max(q, 1)` times the number of types;
//! * `q · 2^|predicates| · Π |range|` domain elements always suffice — the
//!   completeness bound.
//!
//! Only symbols occurring in the sentence contribute to types; the rest are
//! fixed (empty predicates, functions at the bottom of their range) in the
//! reported witness. Types that violate a top-level universal conjunct with
//! a quantifier-free body are discarded up front.

use std::collections::BTreeSet;

use crate::case::{CaseModel, StructureModel};
use crate::eval::{Compiled, Interpretation};
use crate::formula::{Formula, FormulaKind};
use crate::signature::{Range, Signature};
use crate::transform::{expand_macros, nnf};

use super::{DecideError, DecisionConfig, DecisionResult, Status};

/// `max(1, qr(f) · 2^|predicates| · Π |range|)` over the signature,
/// saturating at `u64::MAX`.
pub fn completeness_bound(f: &Formula, sig: &Signature) -> u64 {
    let types = sig
        .functions()
        .iter()
        .fold(pow2(sig.predicates().len()), |acc, (_, r)| acc.saturating_mul(r.size()));
    (f.quantifier_rank() as u64).saturating_mul(types).max(1)
}

fn pow2(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        1 << k
    }
}

/// Element types over the symbols a sentence uses. Type `t` has predicate
/// bits `t mod 2^|P|` and function values given by the mixed-radix digits of
/// `t / 2^|P|`, first function most significant.
struct Types {
    preds: usize,
    ranges: Vec<Range>,
}

impl Types {
    fn count(&self) -> Option<u64> {
        self.ranges
            .iter()
            .try_fold(1u64.checked_shl(self.preds as u32)?, |acc, r| acc.checked_mul(r.size()))
            .filter(|_| self.preds < 64)
    }

    fn decode(&self, t: u64) -> (u64, Vec<i64>) {
        let bits = t & (pow2(self.preds).wrapping_sub(1));
        let mut rest = t >> self.preds;
        let mut values = vec![0; self.ranges.len()];
        for (i, r) in self.ranges.iter().enumerate().rev() {
            values[i] = r.lo + (rest % r.size()) as i64;
            rest /= r.size();
        }
        (bits, values)
    }
}

struct Candidate<'a> {
    bits: &'a [u64],
    values: &'a [Vec<i64>],
    elems: &'a [usize],
}

impl Interpretation for Candidate<'_> {
    fn size(&self) -> usize {
        self.elems.len()
    }

    fn pred(&self, p: usize, e: usize) -> bool {
        self.bits[self.elems[e]] >> p & 1 == 1
    }

    fn func(&self, f: usize, e: usize) -> i64 {
        self.values[self.elems[e]][f]
    }
}

fn conjuncts(f: &Formula) -> Vec<&Formula> {
    match &f.kind {
        FormulaKind::And(a, b) => {
            let mut v = conjuncts(a);
            v.extend(conjuncts(b));
            v
        }
        _ => vec![f],
    }
}

/// `forall x1 .. xk. body` with a quantifier-free body, as (vars, body).
fn universal_constraint(f: &Formula) -> Option<(Vec<String>, &Formula)> {
    let mut vars = Vec::new();
    let mut cur = f;
    while let FormulaKind::Forall { var, body } = &cur.kind {
        vars.push(var.clone());
        cur = body;
    }
    (!vars.is_empty() && cur.quantifier_rank() == 0).then_some((vars, cur))
}

enum Flow {
    Continue,
    Found,
}

struct Enumerator<'a> {
    allowed: &'a [usize],
    cap: usize,
    formula: &'a Compiled,
    bits: &'a [u64],
    values: &'a [Vec<i64>],
    cfg: &'a DecisionConfig,
    candidates: u64,
    elems: Vec<usize>,
}

impl Enumerator<'_> {
    /// Visits multisets of `remaining` more types drawn from `allowed[i..]`
    /// in lexicographic order of their sorted sequences.
    fn walk(&mut self, i: usize, remaining: usize) -> Result<Flow, DecideError> {
        if remaining == 0 {
            return self.visit();
        }
        if i == self.allowed.len() || remaining > self.cap * (self.allowed.len() - i) {
            return Ok(Flow::Continue);
        }
        for k in (0..=self.cap.min(remaining)).rev() {
            let len = self.elems.len();
            self.elems.extend(std::iter::repeat_n(i, k));
            let flow = self.walk(i + 1, remaining - k)?;
            if let Flow::Found = flow {
                return Ok(flow);
            }
            self.elems.truncate(len);
        }
        Ok(Flow::Continue)
    }

    fn visit(&mut self) -> Result<Flow, DecideError> {
        self.candidates += 1;
        if self.candidates > self.cfg.candidate_budget {
            return Err(DecideError::ResourceLimit(format!(
                "bounded search exceeded {} candidate structures",
                self.cfg.candidate_budget
            )));
        }
        if self.candidates.is_multiple_of(4096) && self.cfg.cancelled() {
            return Err(DecideError::Cancelled);
        }
        let m = Candidate {
            bits: self.bits,
            values: self.values,
            elems: &self.elems,
        };
        Ok(if self.formula.eval(&m, &[]) {
            Flow::Found
        } else {
            Flow::Continue
        })
    }
}

pub(crate) fn search(f: &Formula, sig: &Signature, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    let expanded = expand_macros(f, sig)?;
    let complete = completeness_bound(&expanded, sig);
    let bound = cfg.bound.unwrap_or(complete).max(1);
    let status_if_none = if bound >= complete {
        Status::Unsat
    } else {
        Status::UnsatUpToBound
    };
    if cfg.cancelled() {
        return Err(DecideError::Cancelled);
    }

    let used_preds = expanded.predicates_used();
    let used_funcs = expanded.functions_used();
    let preds: Vec<&str> = sig
        .predicates()
        .iter()
        .map(String::as_str)
        .filter(|p| used_preds.iter().any(|u| u == p))
        .collect();
    let funcs: Vec<(&str, Range)> = sig
        .functions()
        .iter()
        .filter(|(n, _)| used_funcs.contains(n))
        .map(|(n, r)| (n.as_str(), *r))
        .collect();
    let func_names: Vec<&str> = funcs.iter().map(|(n, _)| *n).collect();
    let types = Types {
        preds: preds.len(),
        ranges: funcs.iter().map(|(_, r)| *r).collect(),
    };
    let too_many = || {
        DecideError::ResourceLimit(format!(
            "{} predicates and functions give more element types than the budget of {} allows",
            preds.len() + funcs.len(),
            cfg.candidate_budget
        ))
    };
    let type_count = types.count().filter(|&c| c <= cfg.candidate_budget).ok_or_else(too_many)?;

    let formula = Compiled::new(&expanded, &preds, &func_names, &[])?;
    let normal = nnf(&expanded);
    let constraints = conjuncts(&normal)
        .into_iter()
        .filter_map(universal_constraint)
        .map(|(vars, body)| Compiled::new(body, &preds, &func_names, &vars).map(|c| (vars.len(), c)))
        .collect::<Result<Vec<_>, _>>()?;

    let mut bits = Vec::new();
    let mut values = Vec::new();
    let mut allowed_types = Vec::new();
    for t in 0..type_count {
        if t % 4096 == 0 && cfg.cancelled() {
            return Err(DecideError::Cancelled);
        }
        let (b, v) = types.decode(t);
        let one = Candidate {
            bits: std::slice::from_ref(&b),
            values: std::slice::from_ref(&v),
            elems: &[0],
        };
        if constraints.iter().all(|(k, c)| c.eval(&one, &vec![0; *k])) {
            bits.push(b);
            values.push(v);
            allowed_types.push(t);
        }
    }
    let allowed: Vec<usize> = (0..allowed_types.len()).collect();

    let cap = expanded.quantifier_rank().max(1);
    let useful = (cap as u64).saturating_mul(allowed.len() as u64);
    let mut walk = Enumerator {
        allowed: &allowed,
        cap,
        formula: &formula,
        bits: &bits,
        values: &values,
        cfg,
        candidates: type_count,
        elems: Vec::new(),
    };
    for n in 1..=bound.min(useful) {
        if let Flow::Found = walk.walk(0, n as usize)? {
            let witness = build_witness(sig, &preds, &func_names, &walk.elems, &bits, &values);
            return Ok(DecisionResult {
                status: Status::Sat,
                witness: Some(CaseModel::Structure(witness)),
                bound_used: Some(bound),
            });
        }
    }
    Ok(DecisionResult {
        status: status_if_none,
        witness: None,
        bound_used: Some(bound),
    })
}

fn build_witness(
    sig: &Signature,
    preds: &[&str],
    funcs: &[&str],
    elems: &[usize],
    bits: &[u64],
    values: &[Vec<i64>],
) -> StructureModel {
    let domain: Vec<String> = (1..=elems.len()).map(|i| format!("e{i}")).collect();
    let predicates = sig
        .predicates()
        .iter()
        .map(|p| {
            let ext: BTreeSet<usize> = match preds.iter().position(|q| q == p) {
                Some(j) => (0..elems.len()).filter(|&e| bits[elems[e]] >> j & 1 == 1).collect(),
                None => BTreeSet::new(),
            };
            (p.clone(), ext)
        })
        .collect();
    let functions = sig
        .functions()
        .iter()
        .map(|(name, r)| {
            let table = match funcs.iter().position(|g| g == name) {
                Some(j) => elems.iter().map(|&t| values[t][j]).collect(),
                None => vec![r.lo; elems.len()],
            };
            (name.clone(), table)
        })
        .collect();
    StructureModel::from_tables(domain, predicates, functions)
}
