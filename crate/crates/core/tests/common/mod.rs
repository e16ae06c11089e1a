//! Shared test support: independent oracles and random generators.
#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use lexdialog_core::{Range, Signature};

pub fn temporal_sig() -> Signature {
    Signature::temporal(["p", "q"]).unwrap()
}

/// Two predicates and one function with two values.
pub fn relational_sig() -> Signature {
    Signature::relational(["P", "Q"], [("f", Range::new(0, 1))]).unwrap()
}

pub fn vocabulary(sig: &Signature) -> oracle::Vocabulary {
    oracle::Vocabulary {
        preds: sig.predicates().to_vec(),
        funcs: sig.functions().iter().map(|(n, r)| (n.clone(), r.lo, r.hi)).collect(),
    }
}

pub fn syri_sig() -> Signature {
    Signature::relational(
        ["Employed"],
        [("NrOfPassports", Range::new(0, 3)), ("Score", Range::new(0, 10))],
    )
    .unwrap()
}

pub const BIAS_SENTENCE: &str = "forall x. forall y. (NrOfPassports(x) != NrOfPassports(y) & same(x, y) except NrOfPassports, Score) -> Score(x) = Score(y)";

pub fn m1_json(score_b: i64) -> String {
    format!(
        r#"{{"individuals": ["a", "b"], "predicates": {{"Employed": ["a", "b"]}}, "functions": {{"NrOfPassports": {{"a": 1, "b": 2}}, "Score": {{"a": 0, "b": {score_b}}}}}}}"#
    )
}
