//! Brute-force reference semantics, written directly from the textbook
//! definitions and sharing no code with the library's evaluator or
//! decision procedures.

use std::collections::{BTreeSet, HashMap};

use lexdialog_core::{CmpOp, Formula, FormulaKind, StructureModel, Term, Trace};

pub type Letter = BTreeSet<String>;

/// Truth of `f` at position `i` of `t`, by the quantifier-over-positions
/// definitions (no memoization, no shared sub-results).
pub fn ltl_holds(t: &[Letter], i: usize, f: &Formula) -> bool {
    use FormulaKind::*;
    let n = t.len();
    match &f.kind {
        True => true,
        False => false,
        Atom(a) => t[i].contains(a),
        Not(g) => !ltl_holds(t, i, g),
        And(g, h) => ltl_holds(t, i, g) && ltl_holds(t, i, h),
        Or(g, h) => ltl_holds(t, i, g) || ltl_holds(t, i, h),
        Implies(g, h) => !ltl_holds(t, i, g) || ltl_holds(t, i, h),
        Iff(g, h) => ltl_holds(t, i, g) == ltl_holds(t, i, h),
        Next(g) => i + 1 < n && ltl_holds(t, i + 1, g),
        WeakNext(g) => i + 1 >= n || ltl_holds(t, i + 1, g),
        Until(g, h) => (i..n).any(|k| ltl_holds(t, k, h) && (i..k).all(|j| ltl_holds(t, j, g))),
        Release(g, h) => (i..n).all(|k| ltl_holds(t, k, h) || (i..k).any(|j| ltl_holds(t, j, g))),
        Eventually(g) => (i..n).any(|k| ltl_holds(t, k, g)),
        Globally(g) => (i..n).all(|k| ltl_holds(t, k, g)),
        other => panic!("not a temporal node: {other:?}"),
    }
}

/// Letters over `atoms` ordered by size, then lexicographically by the
/// sorted member names.
pub fn alphabet(atoms: &[&str]) -> Vec<Letter> {
    let mut sorted: Vec<&str> = atoms.to_vec();
    sorted.sort();
    let mut letters: Vec<Vec<&str>> = (0..1u32 << sorted.len())
        .map(|m| (0..sorted.len()).filter(|i| m >> i & 1 == 1).map(|i| sorted[i]).collect())
        .collect();
    letters.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    letters
        .into_iter()
        .map(|l| l.into_iter().map(String::from).collect())
        .collect()
}

/// Every trace of exactly `len` states, in lexicographic order of letters.
pub fn traces_of_length(letters: &[Letter], len: usize) -> Vec<Vec<Letter>> {
    let k = letters.len();
    let total = k.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let mut digits = vec![0; len];
            for d in digits.iter_mut().rev() {
                *d = code % k;
                code /= k;
            }
            digits.into_iter().map(|d| letters[d].clone()).collect()
        })
        .collect()
}

/// The first satisfying trace in (length, letter-lexicographic) order with
/// at most `max_len` states.
pub fn ltl_shortest(f: &Formula, atoms: &[&str], max_len: usize) -> Option<Vec<Letter>> {
    let letters = alphabet(atoms);
    (1..=max_len).find_map(|len| {
        traces_of_length(&letters, len)
            .into_iter()
            .find(|t| ltl_holds(t, 0, f))
    })
}

/// Every trace over one alphabet up to a fixed length, enumerated once and
/// shared between queries.
pub struct TraceSpace {
    by_len: Vec<Vec<Vec<Letter>>>,
}

impl TraceSpace {
    pub fn new(atoms: &[&str], max_len: usize) -> Self {
        let letters = alphabet(atoms);
        TraceSpace {
            by_len: (1..=max_len).map(|n| traces_of_length(&letters, n)).collect(),
        }
    }

    pub fn max_len(&self) -> usize {
        self.by_len.len()
    }

    /// First trace (by length, then letter order) of at most `max_len`
    /// states on which `accept` holds.
    pub fn first(&self, max_len: usize, mut accept: impl FnMut(&[Letter]) -> bool) -> Option<&Vec<Letter>> {
        self.by_len
            .iter()
            .take(max_len)
            .flat_map(|ts| ts.iter())
            .find(|t| accept(t))
    }
}

pub fn trace_letters(t: &Trace) -> Vec<Letter> {
    t.states().to_vec()
}

/// A finite structure as plain vectors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawModel {
    pub size: usize,
    /// `preds[p][e]`
    pub preds: Vec<Vec<bool>>,
    /// `funcs[f][e]`
    pub funcs: Vec<Vec<i64>>,
}

/// Vocabulary for [`RawModel`]s: names in declaration order plus ranges.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub preds: Vec<String>,
    pub funcs: Vec<(String, i64, i64)>,
}

impl Vocabulary {
    fn pred(&self, name: &str) -> usize {
        self.preds.iter().position(|p| p == name).expect("declared predicate")
    }

    fn func(&self, name: &str) -> usize {
        self.funcs.iter().position(|f| f.0 == name).expect("declared function")
    }

    pub fn raw(&self, m: &StructureModel) -> RawModel {
        RawModel {
            size: m.len(),
            preds: self
                .preds
                .iter()
                .map(|p| (0..m.len()).map(|e| m.holds(p, e).expect("predicate present")).collect())
                .collect(),
            funcs: self
                .funcs
                .iter()
                .map(|(f, _, _)| m.table(f).expect("function present").to_vec())
                .collect(),
        }
    }

    /// All structures with exactly `n` elements: predicate bits as a binary
    /// counter over (individual, predicate), then function values from the
    /// bottom of each range upward.
    pub fn structures(&self, n: usize) -> Vec<RawModel> {
        let pbits = n * self.preds.len();
        let mut tables: Vec<Vec<Vec<i64>>> = vec![vec![]];
        for (_, lo, hi) in &self.funcs {
            let mut next = Vec::new();
            for partial in &tables {
                let count = (hi - lo + 1) as usize;
                for code in 0..count.pow(n as u32) {
                    let mut c = code;
                    let mut table = vec![0; n];
                    for slot in table.iter_mut() {
                        *slot = lo + (c % count) as i64;
                        c /= count;
                    }
                    let mut t = partial.clone();
                    t.push(table);
                    next.push(t);
                }
            }
            tables = next;
        }
        let mut out = Vec::new();
        for mask in 0..1u64 << pbits {
            let preds = (0..self.preds.len())
                .map(|p| (0..n).map(|e| mask >> (e * self.preds.len() + p) & 1 == 1).collect())
                .collect::<Vec<Vec<bool>>>();
            for funcs in &tables {
                out.push(RawModel {
                    size: n,
                    preds: preds.clone(),
                    funcs: funcs.clone(),
                });
            }
        }
        out
    }

    fn term(&self, m: &RawModel, env: &HashMap<String, usize>, t: &Term) -> i64 {
        match t {
            Term::Var(v) => env[v] as i64,
            Term::Int(i) => *i,
            Term::App { func, var } => m.funcs[self.func(func)][env[var]],
        }
    }

    /// Tarskian truth, with `same(x, y) except E` read as agreement on every
    /// predicate and every function outside `E`.
    pub fn holds(&self, m: &RawModel, env: &mut HashMap<String, usize>, f: &Formula) -> bool {
        use FormulaKind::*;
        match &f.kind {
            True => true,
            False => false,
            Pred { name, var } => m.preds[self.pred(name)][env[var]],
            Cmp { lhs, op, rhs } => {
                let (a, b) = (self.term(m, env, lhs), self.term(m, env, rhs));
                match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => a < b,
                    CmpOp::Le => a <= b,
                    CmpOp::Gt => a > b,
                    CmpOp::Ge => a >= b,
                }
            }
            SameExcept { left, right, excluded } => {
                let (x, y) = (env[left], env[right]);
                m.preds.iter().all(|p| p[x] == p[y])
                    && self
                        .funcs
                        .iter()
                        .enumerate()
                        .filter(|(_, (name, _, _))| !excluded.contains(name))
                        .all(|(i, _)| m.funcs[i][x] == m.funcs[i][y])
            }
            Not(g) => !self.holds(m, env, g),
            And(g, h) => self.holds(m, env, g) && self.holds(m, env, h),
            Or(g, h) => self.holds(m, env, g) || self.holds(m, env, h),
            Implies(g, h) => !self.holds(m, env, g) || self.holds(m, env, h),
            Iff(g, h) => self.holds(m, env, g) == self.holds(m, env, h),
            Forall { var, body } | Exists { var, body } => {
                let saved = env.get(var).copied();
                let universal = matches!(f.kind, Forall { .. });
                let mut result = universal;
                for e in 0..m.size {
                    env.insert(var.clone(), e);
                    if self.holds(m, env, body) != universal {
                        result = !universal;
                        break;
                    }
                }
                match saved {
                    Some(s) => env.insert(var.clone(), s),
                    None => env.remove(var),
                };
                result
            }
            other => panic!("not a relational node: {other:?}"),
        }
    }

    pub fn sentence_holds(&self, m: &RawModel, f: &Formula) -> bool {
        self.holds(m, &mut HashMap::new(), f)
    }

    /// Some structure with at most `bound` elements satisfying `f`.
    pub fn find_model(&self, f: &Formula, bound: usize) -> Option<RawModel> {
        (1..=bound).find_map(|n| self.structures(n).into_iter().find(|m| self.sentence_holds(m, f)))
    }

    /// `qr · 2^|P| · Π |range|`, at least 1.
    pub fn completeness_bound(&self, f: &Formula) -> u64 {
        let types = self
            .funcs
            .iter()
            .fold(1u64 << self.preds.len(), |acc, (_, lo, hi)| acc * (hi - lo + 1) as u64);
        (quantifier_rank(f) as u64 * types).max(1)
    }
}

pub fn quantifier_rank(f: &Formula) -> usize {
    use FormulaKind::*;
    match &f.kind {
        Forall { body, .. } | Exists { body, .. } => 1 + quantifier_rank(body),
        Not(g) => quantifier_rank(g),
        And(g, h) | Or(g, h) | Implies(g, h) | Iff(g, h) => quantifier_rank(g).max(quantifier_rank(h)),
        _ => 0,
    }
}
