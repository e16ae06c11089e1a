//! Finite-trace satisfiability by breadth-first search over obligation sets.
//!
//! A state is a set of pending obligations on the *next* position: strong
//! ones (`X g`: a next position must exist and satisfy `g`) and weak ones
//! (`N g`: if a next position exists it satisfies `g`). Reading a letter
//! expands every obligation one step into a disjunction of successor sets;
//! a trace may end in a state that holds no strong obligation. States are
//! subsets of the (finite) closure, so the search terminates.
//!
//! Breadth-first search with letters tried in a fixed order returns the
//! shortest model, and among those the lexicographically least.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::case::Trace;
use crate::formula::{Formula, FormulaKind};
use crate::transform::nnf;

use super::{DecideError, DecisionConfig};

type Id = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    True,
    False,
    Atom(usize),
    NotAtom(usize),
    And(Id, Id),
    Or(Id, Id),
    Next(Id),
    WeakNext(Id),
    Until(Id, Id),
    Release(Id, Id),
    Eventually(Id),
    Globally(Id),
}

/// Hash-consed negation-normal-form formulas.
#[derive(Default)]
struct Arena {
    nodes: Vec<Node>,
    index: HashMap<Node, Id>,
}

impl Arena {
    fn intern(&mut self, n: Node) -> Id {
        if let Some(&id) = self.index.get(&n) {
            return id;
        }
        let id = self.nodes.len() as Id;
        self.nodes.push(n);
        self.index.insert(n, id);
        id
    }

    fn build(&mut self, f: &Formula, atoms: &[String]) -> Id {
        use FormulaKind::*;
        let atom = |a: &str| atoms.iter().position(|x| x == a).expect("atoms are collected from the formula");
        let n = match &f.kind {
            True => Node::True,
            False => Node::False,
            Atom(a) => Node::Atom(atom(a)),
            Not(inner) => match &inner.kind {
                Atom(a) => Node::NotAtom(atom(a)),
                _ => unreachable!("input is in negation normal form"),
            },
            And(a, b) => Node::And(self.build(a, atoms), self.build(b, atoms)),
            Or(a, b) => Node::Or(self.build(a, atoms), self.build(b, atoms)),
            Next(a) => Node::Next(self.build(a, atoms)),
            WeakNext(a) => Node::WeakNext(self.build(a, atoms)),
            Until(a, b) => Node::Until(self.build(a, atoms), self.build(b, atoms)),
            Release(a, b) => Node::Release(self.build(a, atoms), self.build(b, atoms)),
            Eventually(a) => Node::Eventually(self.build(a, atoms)),
            Globally(a) => Node::Globally(self.build(a, atoms)),
            _ => unreachable!("relational or non-normal node in a temporal search"),
        };
        self.intern(n)
    }
}

/// An obligation on the next position: `(formula, strong)`.
type Obligation = (Id, bool);
/// A set of obligations, kept sorted and free of redundancy.
type State = Vec<Obligation>;
/// Disjunctive normal form: alternatives, each a set of obligations.
type Dnf = BTreeSet<BTreeSet<Obligation>>;

fn unit() -> Dnf {
    BTreeSet::from([BTreeSet::new()])
}

fn single(o: Obligation) -> Dnf {
    BTreeSet::from([BTreeSet::from([o])])
}

fn product(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = BTreeSet::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).copied().collect());
        }
    }
    out
}

struct Expander<'a> {
    arena: &'a Arena,
    letter: u64,
    memo: HashMap<Id, Dnf>,
}

impl Expander<'_> {
    /// What must hold from the next position on for `id` to hold here.
    fn step(&mut self, id: Id) -> Dnf {
        if let Some(d) = self.memo.get(&id) {
            return d.clone();
        }
        let d = match self.arena.nodes[id as usize] {
            Node::True => unit(),
            Node::False => Dnf::new(),
            Node::Atom(a) => {
                if self.letter >> a & 1 == 1 {
                    unit()
                } else {
                    Dnf::new()
                }
            }
            Node::NotAtom(a) => {
                if self.letter >> a & 1 == 0 {
                    unit()
                } else {
                    Dnf::new()
                }
            }
            Node::And(a, b) => {
                let (a, b) = (self.step(a), self.step(b));
                product(&a, &b)
            }
            Node::Or(a, b) => {
                let mut a = self.step(a);
                a.extend(self.step(b));
                a
            }
            Node::Next(a) => single((a, true)),
            Node::WeakNext(a) => single((a, false)),
            Node::Until(a, b) => {
                let mut now = self.step(b);
                now.extend(product(&self.step(a), &single((id, true))));
                now
            }
            Node::Release(a, b) => {
                let mut keep = self.step(a);
                keep.insert(BTreeSet::from([(id, false)]));
                product(&self.step(b), &keep)
            }
            Node::Eventually(a) => {
                let mut now = self.step(a);
                now.insert(BTreeSet::from([(id, true)]));
                now
            }
            Node::Globally(a) => product(&self.step(a), &single((id, false))),
        };
        self.memo.insert(id, d.clone());
        d
    }
}

/// Drops obligations that cannot matter: `N true`, and `N g` next to `X g`.
/// Returns `None` for an alternative that can never be met (`X false`).
fn normalize(arena: &Arena, set: &BTreeSet<Obligation>) -> Option<State> {
    let mut out = Vec::with_capacity(set.len());
    for &(g, strong) in set {
        match (arena.nodes[g as usize], strong) {
            (Node::False, true) => return None,
            (Node::True, false) => continue,
            _ => {}
        }
        if !strong && set.contains(&(g, true)) {
            continue;
        }
        out.push((g, strong));
    }
    Some(out)
}

fn accepting(s: &State) -> bool {
    s.iter().all(|&(_, strong)| !strong)
}

/// Letters over `k` atoms as bitmasks, smaller sets first, then
/// lexicographic by atom name (atoms are sorted, bit i is atom i).
fn letters(k: usize) -> Vec<u64> {
    let mut all: Vec<u64> = (0..1u64 << k).collect();
    let key = |m: &u64| {
        let members: Vec<u32> = (0..k as u32).filter(|i| m >> i & 1 == 1).collect();
        (members.len(), members)
    };
    all.sort_by_key(key);
    all
}

/// The shortest (then lexicographically least) trace satisfying `f`, or
/// `None` if it has no finite model.
pub fn shortest_model(f: &Formula, cfg: &DecisionConfig) -> Result<Option<Trace>, DecideError> {
    let atoms: Vec<String> = f.atoms_used().into_iter().collect();
    if atoms.len() > 20 {
        return Err(DecideError::ResourceLimit(format!(
            "{} distinct atoms give too many letters to enumerate",
            atoms.len()
        )));
    }
    let mut arena = Arena::default();
    let root = arena.build(&nnf(f), &atoms);
    let alphabet = letters(atoms.len());
    let decode = |m: u64| -> Vec<String> {
        (0..atoms.len())
            .filter(|i| m >> i & 1 == 1)
            .map(|i| atoms[i].clone())
            .collect()
    };

    // The initial state demands `f` at a first position that must exist.
    let initial: State = vec![(root, true)];
    let mut states: Vec<State> = vec![initial.clone()];
    let mut parent: Vec<Option<(usize, u64)>> = vec![None];
    let mut seen: HashMap<State, usize> = HashMap::from([(initial, 0)]);
    let mut queue = VecDeque::from([0usize]);

    while let Some(current) = queue.pop_front() {
        if cfg.cancelled() {
            return Err(DecideError::Cancelled);
        }
        for &letter in &alphabet {
            let mut ex = Expander {
                arena: &arena,
                letter,
                memo: HashMap::new(),
            };
            let mut successors = unit();
            for &(g, _) in &states[current] {
                successors = product(&successors, &ex.step(g));
                if successors.is_empty() {
                    break;
                }
            }
            let mut next: Vec<State> = successors.iter().filter_map(|s| normalize(&arena, s)).collect();
            next.sort();
            next.dedup();
            for s in next {
                if seen.contains_key(&s) {
                    continue;
                }
                if states.len() >= cfg.state_budget {
                    return Err(DecideError::ResourceLimit(format!(
                        "temporal search exceeded {} states",
                        cfg.state_budget
                    )));
                }
                let id = states.len();
                let done = accepting(&s);
                seen.insert(s.clone(), id);
                states.push(s);
                parent.push(Some((current, letter)));
                if done {
                    let mut word = Vec::new();
                    let mut at = id;
                    while let Some((p, l)) = parent[at] {
                        word.push(decode(l));
                        at = p;
                    }
                    word.reverse();
                    return Ok(Some(Trace::from_letters(word)));
                }
                queue.push_back(id);
            }
        }
    }
    Ok(None)
}
