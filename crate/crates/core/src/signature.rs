//! Vocabularies of laws: unary predicates and range-bounded integer functions
//! for the relational layer, propositional atoms for the temporal layer.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which half of the language a signature (and everything checked against it) belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Relational,
    Temporal,
}

impl fmt::Display for Layer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Layer::Relational => write!(f, "relational"),
            Layer::Temporal => write!(f, "temporal"),
        }
    }
}

/// Closed integer interval `lo..hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Range {
    pub lo: i64,
    pub hi: i64,
}

impl Range {
    pub fn new(lo: i64, hi: i64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Number of values in the interval.
    pub fn size(&self) -> u64 {
        (self.hi as i128 - self.lo as i128 + 1) as u64
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Words that the formula grammar claims for itself.
pub const RESERVED: &[&str] = &[
    "forall", "exists", "true", "false", "same", "except", "X", "N", "F", "G", "U", "R",
];

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("line {line}: invalid name {name:?}")]
    InvalidName { line: usize, name: String },
    #[error("line {line}: {name:?} is a reserved word")]
    Reserved { line: usize, name: String },
    #[error("line {line}: {name:?} is declared twice")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: empty range {lo}..{hi} for {name}")]
    EmptyRange {
        line: usize,
        name: String,
        lo: i64,
        hi: i64,
    },
    #[error("line {line}: cannot mix atoms with predicates or functions")]
    MixedLayers { line: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Declared vocabulary of a law. Declaration order is kept: it fixes the
/// order of macro expansion, table columns and model enumeration.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    kind: Layer,
    predicates: Vec<String>,
    functions: Vec<(String, Range)>,
    atoms: Vec<String>,
}

enum Decl {
    Pred(String),
    Func(String, Range),
    Atom(String),
}

impl Signature {
    pub fn relational<P, S, F, T>(predicates: P, functions: F) -> Result<Self, SignatureError>
    where
        P: IntoIterator<Item = S>,
        S: Into<String>,
        F: IntoIterator<Item = (T, Range)>,
        T: Into<String>,
    {
        let decls = predicates
            .into_iter()
            .map(|p| Decl::Pred(p.into()))
            .chain(functions.into_iter().map(|(n, r)| Decl::Func(n.into(), r)));
        Self::build(decls.map(|d| (0, d)), Layer::Relational)
    }

    pub fn temporal<S: Into<String>>(atoms: impl IntoIterator<Item = S>) -> Result<Self, SignatureError> {
        Self::build(atoms.into_iter().map(|a| (0, Decl::Atom(a.into()))), Layer::Temporal)
    }

    fn build(decls: impl Iterator<Item = (usize, Decl)>, default_kind: Layer) -> Result<Self, SignatureError> {
        let mut sig = Signature {
            kind: default_kind,
            predicates: Vec::new(),
            functions: Vec::new(),
            atoms: Vec::new(),
        };
        let mut seen = BTreeSet::new();
        let mut kind: Option<Layer> = None;
        for (line, decl) in decls {
            let (name, this_kind) = match &decl {
                Decl::Pred(n) | Decl::Func(n, _) => (n.clone(), Layer::Relational),
                Decl::Atom(n) => (n.clone(), Layer::Temporal),
            };
            if !is_identifier(&name) {
                return Err(SignatureError::InvalidName { line, name });
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(SignatureError::Reserved { line, name });
            }
            if !seen.insert(name.clone()) {
                return Err(SignatureError::Duplicate { line, name });
            }
            match kind {
                Some(k) if k != this_kind => return Err(SignatureError::MixedLayers { line }),
                _ => kind = Some(this_kind),
            }
            match decl {
                Decl::Pred(n) => sig.predicates.push(n),
                Decl::Func(n, r) => {
                    if r.lo > r.hi {
                        return Err(SignatureError::EmptyRange {
                            line,
                            name: n,
                            lo: r.lo,
                            hi: r.hi,
                        });
                    }
                    sig.functions.push((n, r))
                }
                Decl::Atom(n) => sig.atoms.push(n),
            }
        }
        if let Some(k) = kind {
            sig.kind = k;
        }
        Ok(sig)
    }

    /// Parses the line-oriented `.sig` format: `pred NAME`, `func NAME lo..hi`,
    /// `atom NAME`, blank lines and `#` comments. The kind is inferred; a file
    /// with no declarations is relational.
    pub fn parse(source: &str) -> Result<Self, SignatureError> {
        Self::parse_items(source.lines().enumerate().map(|(i, l)| (i + 1, l)))
    }

    /// Same grammar as [`Signature::parse`] with `;` separating declarations
    /// instead of newlines; items are numbered from 1.
    pub fn parse_inline(source: &str) -> Result<Self, SignatureError> {
        Self::parse_items(source.split(';').enumerate().map(|(i, l)| (i + 1, l)))
    }

    fn parse_items<'a>(items: impl Iterator<Item = (usize, &'a str)>) -> Result<Self, SignatureError> {
        let mut decls = Vec::new();
        for (line, raw) in items {
            let text = raw.split('#').next().unwrap_or("").trim();
            if text.is_empty() {
                continue;
            }
            let words: Vec<&str> = text.split_whitespace().collect();
            let decl = match words.as_slice() {
                ["pred", name] => Decl::Pred(name.to_string()),
                ["atom", name] => Decl::Atom(name.to_string()),
                ["func", name, range] => Decl::Func(name.to_string(), parse_range(line, range)?),
                ["pred" | "atom", ..] => {
                    return Err(SignatureError::Syntax {
                        line,
                        message: format!("expected `{} NAME`", words[0]),
                    })
                }
                ["func", ..] => {
                    return Err(SignatureError::Syntax {
                        line,
                        message: "expected `func NAME lo..hi`".into(),
                    })
                }
                [other, ..] => {
                    return Err(SignatureError::Syntax {
                        line,
                        message: format!("unknown declaration {other:?}"),
                    })
                }
                [] => unreachable!(),
            };
            decls.push((line, decl));
        }
        Self::build(decls.into_iter(), Layer::Relational)
    }

    pub fn kind(&self) -> Layer {
        self.kind
    }

    pub fn predicates(&self) -> &[String] {
        &self.predicates
    }

    pub fn functions(&self) -> &[(String, Range)] {
        &self.functions
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn has_predicate(&self, name: &str) -> bool {
        self.predicates.iter().any(|p| p == name)
    }

    pub fn function_range(&self, name: &str) -> Option<Range> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, r)| *r)
    }

    pub fn has_atom(&self, name: &str) -> bool {
        self.atoms.iter().any(|a| a == name)
    }

    /// Whether an integer literal is admissible in a comparison: it must fall
    /// within some declared range widened by one on each side.
    pub fn literal_admissible(&self, v: i64) -> bool {
        self.functions
            .iter()
            .any(|(_, r)| r.lo.saturating_sub(1) <= v && v <= r.hi.saturating_add(1))
    }

    /// Renders back to the `.sig` file format.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for p in &self.predicates {
            out.push_str(&format!("pred {p}\n"));
        }
        for (f, r) in &self.functions {
            out.push_str(&format!("func {f} {r}\n"));
        }
        for a in &self.atoms {
            out.push_str(&format!("atom {a}\n"));
        }
        out
    }
}

fn parse_range(line: usize, text: &str) -> Result<Range, SignatureError> {
    let bad = || SignatureError::Syntax {
        line,
        message: format!("malformed range {text:?}, expected lo..hi"),
    };
    let (lo, hi) = text.split_once("..").ok_or_else(bad)?;
    let lo = lo.parse::<i64>().map_err(|_| bad())?;
    let hi = hi.parse::<i64>().map_err(|_| bad())?;
    Ok(Range::new(lo, hi))
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .predicates
            .iter()
            .map(|p| format!("pred {p}"))
            .chain(self.functions.iter().map(|(n, r)| format!("func {n} {r}")))
            .chain(self.atoms.iter().map(|a| format!("atom {a}")))
            .collect();
        write!(f, "{}", items.join("; "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_syri_signature() {
        let sig = Signature::parse(
            "# social scoring\npred Employed\nfunc NrOfPassports 0..3\nfunc Score 0..10\n",
        )
        .unwrap();
        assert_eq!(sig.kind(), Layer::Relational);
        assert_eq!(sig.predicates(), ["Employed"]);
        assert_eq!(sig.function_range("Score"), Some(Range::new(0, 10)));
        assert_eq!(Signature::parse(&sig.to_source()).unwrap(), sig);
    }

    #[test]
    fn infers_temporal_kind() {
        let sig = Signature::parse_inline("atom drive; atom rest").unwrap();
        assert_eq!(sig.kind(), Layer::Temporal);
        assert_eq!(sig.atoms(), ["drive", "rest"]);
    }

    #[test]
    fn rejects_bad_declarations() {
        assert!(matches!(
            Signature::parse("pred A\natom p"),
            Err(SignatureError::MixedLayers { line: 2 })
        ));
        assert!(matches!(
            Signature::parse("pred A\nfunc A 0..1"),
            Err(SignatureError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(
            Signature::parse("func f 3..1"),
            Err(SignatureError::EmptyRange { .. })
        ));
        assert!(matches!(Signature::parse("pred 9x"), Err(SignatureError::InvalidName { .. })));
        assert!(matches!(Signature::parse("atom G"), Err(SignatureError::Reserved { .. })));
        assert!(matches!(Signature::parse("func f 0-3"), Err(SignatureError::Syntax { .. })));
        assert!(matches!(Signature::parse("relation R"), Err(SignatureError::Syntax { .. })));
    }

    #[test]
    fn literal_window_extends_ranges_by_one() {
        let sig = Signature::relational(Vec::<String>::new(), [("f", Range::new(0, 2))]).unwrap();
        assert!(sig.literal_admissible(-1));
        assert!(sig.literal_admissible(3));
        assert!(!sig.literal_admissible(4));
        let empty = Signature::relational(["P"], Vec::<(String, Range)>::new()).unwrap();
        assert!(!empty.literal_admissible(0));
    }
}
