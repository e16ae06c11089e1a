//! Counterfactual bias audit: individuals that differ in a protected
//! attribute but agree on everything else (score aside) must get the same
//! score.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::case::StructureModel;
use crate::formula::{CmpOp, Formula, Term};
use crate::signature::Signature;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("{0} is not a declared function")]
    UnknownFunction(String),
    #[error("the protected attribute and the score must be different functions")]
    ProtectedEqualsScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BiasOutcome {
    Unbiased,
    Biased,
}

impl fmt::Display for BiasOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Violation {
    pub x: String,
    pub y: String,
    pub score_x: i64,
    pub score_y: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BiasReport {
    pub outcome: BiasOutcome,
    /// Every violating ordered pair, sorted by domain order of (x, y).
    pub violations: Vec<Violation>,
    /// The audited sentence, rendered.
    pub formula: String,
}

impl fmt::Display for BiasReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.outcome)?;
        if !self.violations.is_empty() {
            let pairs: Vec<String> = self.violations.iter().map(|v| format!("({}, {})", v.x, v.y)).collect();
            write!(f, ": {}", pairs.join(", "))?;
        }
        Ok(())
    }
}

fn sentence(protected: &str, score: &str) -> Formula {
    let premise = Formula::and(
        Formula::cmp(Term::app(protected, "x"), CmpOp::Ne, Term::app(protected, "y")),
        Formula::same_except("x", "y", [protected, score]),
    );
    let conclusion = Formula::cmp(Term::app(score, "x"), CmpOp::Eq, Term::app(score, "y"));
    Formula::forall("x", Formula::forall("y", Formula::implies(premise, conclusion)))
}

fn validate(
    mut declared: impl FnMut(&str) -> bool,
    protected: &str,
    score: &str,
) -> Result<(), AuditError> {
    for name in [protected, score] {
        if !declared(name) {
            return Err(AuditError::UnknownFunction(name.to_string()));
        }
    }
    if protected == score {
        return Err(AuditError::ProtectedEqualsScore);
    }
    Ok(())
}

/// `forall x. forall y. (protected(x) != protected(y) & same(x, y) except
/// protected, score) -> score(x) = score(y)`
pub fn bias_formula(sig: &Signature, protected: &str, score: &str) -> Result<Formula, AuditError> {
    validate(|n| sig.function_range(n).is_some(), protected, score)?;
    Ok(sentence(protected, score))
}

/// Lists every ordered pair violating the bias sentence in `m`.
pub fn audit(m: &StructureModel, protected: &str, score: &str) -> Result<BiasReport, AuditError> {
    validate(|n| m.table(n).is_some(), protected, score)?;
    let prot = m.table(protected).expect("validated");
    let sc = m.table(score).expect("validated");
    let others: Vec<&[i64]> = m
        .functions()
        .filter(|(n, _)| *n != protected && *n != score)
        .map(|(_, t)| t)
        .collect();
    let agree = |x: usize, y: usize| {
        m.predicates().all(|(_, ext)| ext.contains(&x) == ext.contains(&y)) && others.iter().all(|t| t[x] == t[y])
    };
    let mut violations = Vec::new();
    for x in 0..m.len() {
        for y in 0..m.len() {
            if prot[x] != prot[y] && sc[x] != sc[y] && agree(x, y) {
                violations.push(Violation {
                    x: m.domain()[x].clone(),
                    y: m.domain()[y].clone(),
                    score_x: sc[x],
                    score_y: sc[y],
                });
            }
        }
    }
    Ok(BiasReport {
        outcome: if violations.is_empty() {
            BiasOutcome::Unbiased
        } else {
            BiasOutcome::Biased
        },
        violations,
        formula: sentence(protected, score).to_string(),
    })
}
