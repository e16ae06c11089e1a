//! Consistency, validity and implication of laws.
//!
//! The temporal layer is decided completely by an explicit search over
//! obligation sets ([`ltlf`]). The relational layer is decided by bounded
//! model search ([`monadic`]); its default bound is the small-model bound for
//! monadic logic, so results are exact unless the caller lowers it.

pub mod ltlf;
pub mod monadic;

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::CaseModel;
use crate::eval::{check, EvalError};
use crate::formula::Formula;
use crate::signature::{Layer, Signature};
use crate::transform::MacroError;

pub use monadic::completeness_bound;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Sat,
    UnsatUpToBound,
    Unsat,
    Valid,
    InvalidWithCounterexample,
    ValidUpToBound,
}

impl Status {
    /// Whether the answer is the "good" one for the question asked:
    /// satisfiable for consistency, valid for validity and implication.
    pub fn is_positive(self) -> bool {
        matches!(self, Status::Sat | Status::Valid | Status::ValidUpToBound)
    }

    fn dual(self) -> Status {
        match self {
            Status::Sat => Status::InvalidWithCounterexample,
            Status::Unsat => Status::Valid,
            Status::UnsatUpToBound => Status::ValidUpToBound,
            other => other,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DecisionResult {
    pub status: Status,
    /// A model for `Sat`, a counterexample for `InvalidWithCounterexample`.
    pub witness: Option<CaseModel>,
    /// Largest domain size searched (relational layer only).
    pub bound_used: Option<u64>,
}

impl DecisionResult {
    /// Confirms the witness with the evaluator: a model must satisfy `f`
    /// for `Sat`, a counterexample must falsify it for
    /// `InvalidWithCounterexample`. Results without witness pass trivially.
    pub fn witness_rechecks(&self, f: &Formula) -> bool {
        let expected = match self.status {
            Status::Sat => true,
            Status::InvalidWithCounterexample => false,
            _ => return self.witness.is_none(),
        };
        match &self.witness {
            Some(w) => check(w, f).map(|v| v.holds() == expected).unwrap_or(false),
            None => false,
        }
    }
}

impl fmt::Display for DecisionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.status)?;
        if let (Some(b), Status::UnsatUpToBound | Status::ValidUpToBound) = (self.bound_used, self.status) {
            write!(f, " (domains up to {b})")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct DecisionConfig {
    /// Largest domain size to search; `None` means the completeness bound.
    pub bound: Option<u64>,
    /// Automaton states the temporal search may create.
    pub state_budget: usize,
    /// Candidate structures the relational search may evaluate.
    pub candidate_budget: u64,
    /// Polled during long searches; set to abandon the query.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl Default for DecisionConfig {
    fn default() -> Self {
        DecisionConfig {
            bound: None,
            state_budget: 1 << 20,
            candidate_budget: 10_000_000,
            cancel: None,
        }
    }
}

impl DecisionConfig {
    pub fn with_bound(mut self, bound: Option<u64>) -> Self {
        self.bound = bound;
        self
    }

    pub(crate) fn cancelled(&self) -> bool {
        self.cancel.as_ref().is_some_and(|c| c.load(Ordering::Relaxed))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("query cancelled")]
    Cancelled,
    #[error("a {formula} formula cannot be decided over a {signature} signature")]
    LayerMismatch { formula: Layer, signature: Layer },
    #[error("variable {0} is free; only sentences can be decided")]
    NotASentence(String),
    #[error(transparent)]
    Macro(#[from] MacroError),
    #[error(transparent)]
    Vocabulary(#[from] EvalError),
}

fn require_sentence(f: &Formula, sig: &Signature) -> Result<(), DecideError> {
    if let Some(layer) = f.layer() {
        if layer != sig.kind() {
            return Err(DecideError::LayerMismatch {
                formula: layer,
                signature: sig.kind(),
            });
        }
    }
    match f.free_vars().into_iter().next() {
        Some(v) => Err(DecideError::NotASentence(v)),
        None => Ok(()),
    }
}

/// Finite-trace satisfiability (complete).
pub fn sat_ltlf(f: &Formula, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    if f.layer() == Some(Layer::Relational) {
        return Err(DecideError::LayerMismatch {
            formula: Layer::Relational,
            signature: Layer::Temporal,
        });
    }
    let witness = ltlf::shortest_model(f, cfg)?;
    Ok(DecisionResult {
        status: if witness.is_some() { Status::Sat } else { Status::Unsat },
        witness: witness.map(CaseModel::Trace),
        bound_used: None,
    })
}

/// Finite-trace validity: `f` is valid iff `!f` has no model.
pub fn valid_ltlf(f: &Formula, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    let r = sat_ltlf(&Formula::not(f.clone()), cfg)?;
    Ok(DecisionResult {
        status: r.status.dual(),
        ..r
    })
}

/// Bounded satisfiability of a relational sentence, exact when the bound
/// reaches the completeness bound.
pub fn sat_fo_bounded(f: &Formula, sig: &Signature, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    require_sentence(f, sig)?;
    if sig.kind() != Layer::Relational {
        return Err(DecideError::LayerMismatch {
            formula: Layer::Relational,
            signature: sig.kind(),
        });
    }
    monadic::search(f, sig, cfg)
}

/// Is there a model of `f`? Dispatches on the signature's layer.
pub fn consistent(f: &Formula, sig: &Signature, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    require_sentence(f, sig)?;
    match sig.kind() {
        Layer::Temporal => sat_ltlf(f, cfg),
        Layer::Relational => sat_fo_bounded(f, sig, cfg),
    }
}

/// Does `f` hold in every model?
pub fn valid(f: &Formula, sig: &Signature, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    require_sentence(f, sig)?;
    match sig.kind() {
        Layer::Temporal => valid_ltlf(f, cfg),
        Layer::Relational => {
            let r = sat_fo_bounded(&Formula::not(f.clone()), sig, cfg)?;
            Ok(DecisionResult {
                status: r.status.dual(),
                ..r
            })
        }
    }
}

/// Does `phi` entail `psi`, i.e. is `phi -> psi` valid? A counterexample is
/// a model of `phi` in which `psi` fails.
pub fn implies(phi: &Formula, psi: &Formula, sig: &Signature, cfg: &DecisionConfig) -> Result<DecisionResult, DecideError> {
    require_sentence(phi, sig)?;
    require_sentence(psi, sig)?;
    match sig.kind() {
        Layer::Temporal => valid_ltlf(&Formula::implies(phi.clone(), psi.clone()), cfg),
        Layer::Relational => {
            let r = sat_fo_bounded(&Formula::and(phi.clone(), Formula::not(psi.clone())), sig, cfg)?;
            Ok(DecisionResult {
                status: r.status.dual(),
                ..r
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::case::Trace;
    use crate::parser::parse;
    use crate::signature::Range;

    fn temporal() -> Signature {
        Signature::temporal(["p", "q", "drive", "rest"]).unwrap()
    }

    fn decide_t(src: &str, op: fn(&Formula, &Signature, &DecisionConfig) -> Result<DecisionResult, DecideError>) -> DecisionResult {
        let sig = temporal();
        op(&parse(src, &sig).unwrap(), &sig, &DecisionConfig::default()).unwrap()
    }

    fn trace(letters: &[&[&str]]) -> Option<CaseModel> {
        Some(CaseModel::Trace(Trace::from_letters(letters.iter().map(|l| l.to_vec()))))
    }

    #[test]
    fn temporal_examples() {
        assert_eq!(decide_t("p & !p", consistent).status, Status::Unsat);
        assert_eq!(decide_t("G p & F !p", consistent).status, Status::Unsat);
        let r = decide_t("p U q", consistent);
        assert_eq!((r.status, r.witness), (Status::Sat, trace(&[&["q"]])));
        assert_eq!(decide_t("p -> p", valid).status, Status::Valid);
        assert_eq!(decide_t("G p -> F p", valid).status, Status::Valid);
        let r = decide_t("F p -> G p", valid);
        assert_eq!((r.status, r.witness.clone()), (Status::InvalidWithCounterexample, trace(&[&[], &["p"]])));
        assert!(r.witness_rechecks(&parse("F p -> G p", &temporal()).unwrap()));
        let r = decide_t("G (drive -> X rest)", consistent);
        assert_eq!(r.witness, trace(&[&[]]));
        assert_eq!(decide_t("true", consistent).status, Status::Sat);
        // Strong next needs a successor, weak next does not.
        assert_eq!(decide_t("X p & G !p", consistent).status, Status::Unsat);
        assert_eq!(decide_t("N p & G !p", consistent).witness, trace(&[&[]]));
        assert_eq!(decide_t("X X true", consistent).witness, trace(&[&[], &[], &[]]));
    }

    fn syri() -> Signature {
        Signature::relational(
            ["Employed"],
            [("NrOfPassports", Range::new(0, 3)), ("Score", Range::new(0, 10))],
        )
        .unwrap()
    }

    const BIAS: &str = "forall x. forall y. (NrOfPassports(x) != NrOfPassports(y) & same(x, y) except NrOfPassports, Score) -> Score(x) = Score(y)";

    #[test]
    fn relational_examples() {
        let sig = Signature::relational(["P"], [("f", Range::new(0, 1))]).unwrap();
        let cfg = DecisionConfig::default();
        let r = consistent(&parse("exists x. exists y. x != y", &sig).unwrap(), &sig, &cfg).unwrap();
        assert_eq!(r.status, Status::Sat);
        let CaseModel::Structure(m) = r.witness.unwrap() else { panic!() };
        assert_eq!(m.domain(), ["e1", "e2"]);
        let r = consistent(&parse("(forall x. P(x)) & (exists x. !P(x))", &sig).unwrap(), &sig, &cfg).unwrap();
        assert_eq!(r.status, Status::Unsat);
        let capped = cfg.clone().with_bound(Some(1));
        let r = consistent(&parse("(forall x. P(x)) & (exists x. !P(x))", &sig).unwrap(), &sig, &capped).unwrap();
        assert_eq!((r.status, r.bound_used), (Status::UnsatUpToBound, Some(1)));

        let syri = syri();
        let bias = parse(BIAS, &syri).unwrap();
        let r = consistent(&bias, &syri, &cfg).unwrap();
        assert_eq!(r.status, Status::Sat);
        let CaseModel::Structure(m) = r.witness.clone().unwrap() else { panic!() };
        assert_eq!(m.len(), 1);
        assert_eq!(m.extension("Employed").unwrap().len(), 0);
        assert_eq!(m.value("NrOfPassports", 0), Some(0));
        assert_eq!(m.value("Score", 0), Some(0));
        assert!(r.witness_rechecks(&bias));

        let zero = parse("forall x. Score(x) = 0", &syri).unwrap();
        let r = implies(&zero, &bias, &syri, &cfg).unwrap();
        assert_eq!(r.status, Status::Valid);
        let r = valid(&bias, &syri, &cfg).unwrap();
        assert_eq!(r.status, Status::InvalidWithCounterexample);
        assert!(r.witness_rechecks(&bias));
    }

    #[test]
    fn layers_are_checked() {
        let sig = syri();
        let f = parse("G p", &temporal()).unwrap();
        assert!(matches!(
            consistent(&f, &sig, &DecisionConfig::default()),
            Err(DecideError::LayerMismatch { .. })
        ));
    }

    #[test]
    fn budgets_and_cancellation() {
        let sig = temporal();
        let f = parse("F p & F q & F drive & F rest & G (p -> X q)", &sig).unwrap();
        let tiny = DecisionConfig {
            state_budget: 2,
            ..DecisionConfig::default()
        };
        assert!(matches!(consistent(&f, &sig, &tiny), Err(DecideError::ResourceLimit(_))));
        let flag = Arc::new(AtomicBool::new(true));
        let cancelled = DecisionConfig {
            cancel: Some(flag),
            ..DecisionConfig::default()
        };
        assert_eq!(consistent(&f, &sig, &cancelled), Err(DecideError::Cancelled));
    }
}
