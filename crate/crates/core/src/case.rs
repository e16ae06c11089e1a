//! Case files as models: finite structures for relational laws, finite
//! traces for temporal ones.
//!
//! Case file (`.case`):
//! `{"individuals": [..], "predicates": {P: [ids]}, "functions": {f: {id: int}}}`
//!
//! Trace file (`.trace`): `{"trace": [[atom, ..], ..]}`
//!
//! Unknown keys are rejected. Loading validates every structural invariant
//! against the signature and reports the first violation with a
//! JSON-pointer path.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::signature::{Layer, Signature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataErrorKind {
    Malformed,
    WrongLayer,
    EmptyDomain,
    DuplicateIndividual,
    UnknownIndividual,
    UndeclaredName,
    MissingEntry,
    PartialFunction,
    OutOfRange,
    EmptyTrace,
    UndeclaredAtom,
    MalformedState,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{path}: {message}")]
pub struct DataError {
    pub kind: DataErrorKind,
    /// JSON pointer to the offending value (`""` for the whole document).
    pub path: String,
    pub message: String,
}

impl DataError {
    fn new(kind: DataErrorKind, path: impl Into<String>, message: impl Into<String>) -> Self {
        DataError {
            kind,
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Escapes a key for use inside a JSON pointer.
fn pointer_token(s: &str) -> String {
    s.replace('~', "~0").replace('/', "~1")
}

/// One case viewed as a finite structure. Individuals are addressed by
/// their position in the domain list; predicate and function tables keep
/// signature declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StructureModel {
    pub(crate) domain: Vec<String>,
    pub(crate) predicates: Vec<(String, BTreeSet<usize>)>,
    pub(crate) functions: Vec<(String, Vec<i64>)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseFile {
    individuals: Vec<String>,
    #[serde(default)]
    predicates: IndexMap<String, Vec<String>>,
    #[serde(default)]
    functions: IndexMap<String, IndexMap<String, i64>>,
}

impl StructureModel {
    /// Builds a model from index-based tables. Panics if a table does not
    /// match the domain size; meant for engines that generate models.
    pub fn from_tables(
        domain: Vec<String>,
        predicates: Vec<(String, BTreeSet<usize>)>,
        functions: Vec<(String, Vec<i64>)>,
    ) -> Self {
        assert!(!domain.is_empty(), "empty domain");
        for (_, ext) in &predicates {
            assert!(ext.iter().all(|&i| i < domain.len()));
        }
        for (_, table) in &functions {
            assert_eq!(table.len(), domain.len());
        }
        StructureModel {
            domain,
            predicates,
            functions,
        }
    }

    pub fn domain(&self) -> &[String] {
        &self.domain
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn index_of(&self, individual: &str) -> Option<usize> {
        self.domain.iter().position(|d| d == individual)
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, &BTreeSet<usize>)> {
        self.predicates.iter().map(|(n, e)| (n.as_str(), e))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, &[i64])> {
        self.functions.iter().map(|(n, t)| (n.as_str(), t.as_slice()))
    }

    pub fn extension(&self, predicate: &str) -> Option<&BTreeSet<usize>> {
        self.predicates.iter().find(|(n, _)| n == predicate).map(|(_, e)| e)
    }

    pub fn table(&self, function: &str) -> Option<&[i64]> {
        self.functions
            .iter()
            .find(|(n, _)| n == function)
            .map(|(_, t)| t.as_slice())
    }

    pub fn holds(&self, predicate: &str, individual: usize) -> Option<bool> {
        self.extension(predicate).map(|e| e.contains(&individual))
    }

    pub fn value(&self, function: &str, individual: usize) -> Option<i64> {
        self.table(function).map(|t| t[individual])
    }

    /// Returns a copy with one function value replaced.
    pub fn with_value(&self, function: &str, individual: usize, value: i64) -> Self {
        let mut m = self.clone();
        if let Some((_, t)) = m.functions.iter_mut().find(|(n, _)| n == function) {
            t[individual] = value;
        }
        m
    }

    /// Checks the model against a signature: same vocabulary, total
    /// functions, values in range.
    pub fn validate(&self, sig: &Signature) -> Result<(), DataError> {
        load_structure(self.to_json().as_bytes(), sig).map(|_| ())
    }

    fn to_case_file(&self) -> CaseFile {
        CaseFile {
            individuals: self.domain.clone(),
            predicates: self
                .predicates
                .iter()
                .map(|(n, ext)| (n.clone(), ext.iter().map(|&i| self.domain[i].clone()).collect()))
                .collect(),
            functions: self
                .functions
                .iter()
                .map(|(n, t)| {
                    (
                        n.clone(),
                        self.domain.iter().cloned().zip(t.iter().copied()).collect(),
                    )
                })
                .collect(),
        }
    }

    /// Serializes to the case file format.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_case_file()).expect("case files always serialize")
    }

    /// Structure-only reading of a case file (no signature): used when a
    /// model travels inside a reply.
    fn from_case_file(file: CaseFile) -> Result<Self, DataError> {
        let index = index_domain(&file.individuals)?;
        let mut predicates = Vec::new();
        for (name, members) in file.predicates {
            let path = format!("/predicates/{}", pointer_token(&name));
            predicates.push((name, extension(&path, &members, &index)?));
        }
        let mut functions = Vec::new();
        for (name, table) in file.functions {
            let path = format!("/functions/{}", pointer_token(&name));
            functions.push((name, function_table(&path, &table, &file.individuals, &index, None)?));
        }
        Ok(StructureModel {
            domain: file.individuals,
            predicates,
            functions,
        })
    }
}

fn index_domain(individuals: &[String]) -> Result<HashMap<&str, usize>, DataError> {
    if individuals.is_empty() {
        return Err(DataError::new(
            DataErrorKind::EmptyDomain,
            "/individuals",
            "the domain must contain at least one individual",
        ));
    }
    let mut index = HashMap::new();
    for (i, ind) in individuals.iter().enumerate() {
        if ind.is_empty() {
            return Err(DataError::new(
                DataErrorKind::Malformed,
                format!("/individuals/{i}"),
                "individual identifiers must be nonempty",
            ));
        }
        if index.insert(ind.as_str(), i).is_some() {
            return Err(DataError::new(
                DataErrorKind::DuplicateIndividual,
                format!("/individuals/{i}"),
                format!("individual {ind:?} is listed twice"),
            ));
        }
    }
    Ok(index)
}

fn extension(path: &str, members: &[String], index: &HashMap<&str, usize>) -> Result<BTreeSet<usize>, DataError> {
    let mut ext = BTreeSet::new();
    for (k, m) in members.iter().enumerate() {
        let Some(&i) = index.get(m.as_str()) else {
            return Err(DataError::new(
                DataErrorKind::UnknownIndividual,
                format!("{path}/{k}"),
                format!("{m:?} is not an individual of this case"),
            ));
        };
        if !ext.insert(i) {
            return Err(DataError::new(
                DataErrorKind::DuplicateIndividual,
                format!("{path}/{k}"),
                format!("{m:?} is listed twice"),
            ));
        }
    }
    Ok(ext)
}

fn function_table(
    path: &str,
    table: &IndexMap<String, i64>,
    individuals: &[String],
    index: &HashMap<&str, usize>,
    range: Option<crate::signature::Range>,
) -> Result<Vec<i64>, DataError> {
    let mut values: Vec<Option<i64>> = vec![None; individuals.len()];
    for (ind, &v) in table {
        let entry = format!("{path}/{}", pointer_token(ind));
        let Some(&i) = index.get(ind.as_str()) else {
            return Err(DataError::new(
                DataErrorKind::UnknownIndividual,
                entry,
                format!("{ind:?} is not an individual of this case"),
            ));
        };
        if let Some(r) = range {
            if !r.contains(v) {
                return Err(DataError::new(
                    DataErrorKind::OutOfRange,
                    entry,
                    format!("value {v} lies outside the declared range {r}"),
                ));
            }
        }
        values[i] = Some(v);
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                DataError::new(
                    DataErrorKind::PartialFunction,
                    path.to_string(),
                    format!("no value for individual {:?}", individuals[i]),
                )
            })
        })
        .collect()
}

fn malformed(e: serde_json::Error) -> DataError {
    DataError::new(
        DataErrorKind::Malformed,
        "",
        format!("line {} column {}: {e}", e.line(), e.column()),
    )
}

/// Reads and validates a case file against a relational signature.
pub fn load_structure(bytes: &[u8], sig: &Signature) -> Result<StructureModel, DataError> {
    if sig.kind() != Layer::Relational {
        return Err(DataError::new(
            DataErrorKind::WrongLayer,
            "",
            "case files need a relational signature",
        ));
    }
    let file: CaseFile = serde_json::from_slice(bytes).map_err(malformed)?;
    let index = index_domain(&file.individuals)?;

    for name in file.predicates.keys() {
        if !sig.has_predicate(name) {
            return Err(DataError::new(
                DataErrorKind::UndeclaredName,
                format!("/predicates/{}", pointer_token(name)),
                format!("{name} is not a declared predicate"),
            ));
        }
    }
    for name in file.functions.keys() {
        if sig.function_range(name).is_none() {
            return Err(DataError::new(
                DataErrorKind::UndeclaredName,
                format!("/functions/{}", pointer_token(name)),
                format!("{name} is not a declared function"),
            ));
        }
    }

    let mut predicates = Vec::new();
    for p in sig.predicates() {
        let path = format!("/predicates/{}", pointer_token(p));
        let members = file.predicates.get(p).ok_or_else(|| {
            DataError::new(
                DataErrorKind::MissingEntry,
                path.clone(),
                format!("no extension given for predicate {p}"),
            )
        })?;
        predicates.push((p.clone(), extension(&path, members, &index)?));
    }
    let mut functions = Vec::new();
    for (f, range) in sig.functions() {
        let path = format!("/functions/{}", pointer_token(f));
        let table = file.functions.get(f).ok_or_else(|| {
            DataError::new(
                DataErrorKind::MissingEntry,
                path.clone(),
                format!("no table given for function {f}"),
            )
        })?;
        functions.push((
            f.clone(),
            function_table(&path, table, &file.individuals, &index, Some(*range))?,
        ));
    }
    Ok(StructureModel {
        domain: file.individuals,
        predicates,
        functions,
    })
}

impl Serialize for StructureModel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_case_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for StructureModel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let file = CaseFile::deserialize(d)?;
        StructureModel::from_case_file(file).map_err(serde::de::Error::custom)
    }
}

/// A finite, nonempty sequence of states; each state is the set of atoms
/// true at that position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trace {
    states: Vec<BTreeSet<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceFile {
    trace: Vec<Vec<String>>,
}

impl Trace {
    /// Panics on an empty sequence.
    pub fn new(states: Vec<BTreeSet<String>>) -> Self {
        assert!(!states.is_empty(), "traces are nonempty");
        Trace { states }
    }

    pub fn from_letters<I, S>(letters: I) -> Self
    where
        I: IntoIterator,
        I::Item: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Trace::new(
            letters
                .into_iter()
                .map(|l| l.into_iter().map(Into::into).collect())
                .collect(),
        )
    }

    pub fn states(&self) -> &[BTreeSet<String>] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn holds(&self, position: usize, atom: &str) -> bool {
        self.states[position].contains(atom)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("traces always serialize")
    }

    fn to_file(&self) -> TraceFile {
        TraceFile {
            trace: self.states.iter().map(|s| s.iter().cloned().collect()).collect(),
        }
    }

    fn from_file(file: TraceFile, sig: Option<&Signature>) -> Result<Self, DataError> {
        if file.trace.is_empty() {
            return Err(DataError::new(DataErrorKind::EmptyTrace, "/trace", "the trace has no states"));
        }
        let mut states = Vec::with_capacity(file.trace.len());
        for (i, state) in file.trace.into_iter().enumerate() {
            let mut set = BTreeSet::new();
            for (k, atom) in state.into_iter().enumerate() {
                let path = format!("/trace/{i}/{k}");
                if let Some(sig) = sig {
                    if !sig.has_atom(&atom) {
                        return Err(DataError::new(
                            DataErrorKind::UndeclaredAtom,
                            path,
                            format!("{atom:?} is not a declared atom"),
                        ));
                    }
                }
                if !set.insert(atom.clone()) {
                    return Err(DataError::new(
                        DataErrorKind::MalformedState,
                        path,
                        format!("atom {atom:?} is repeated within one state"),
                    ));
                }
            }
            states.push(set);
        }
        Ok(Trace { states })
    }
}

/// Reads and validates a trace file against a temporal signature.
pub fn load_trace(bytes: &[u8], sig: &Signature) -> Result<Trace, DataError> {
    if sig.kind() != Layer::Temporal {
        return Err(DataError::new(
            DataErrorKind::WrongLayer,
            "",
            "trace files need a temporal signature",
        ));
    }
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(malformed)?;
    // Distinguish a malformed state from a malformed document for better paths.
    if let Some(states) = value.get("trace").and_then(|t| t.as_array()) {
        for (i, s) in states.iter().enumerate() {
            let ok = s.as_array().is_some_and(|a| a.iter().all(|x| x.is_string()));
            if !ok {
                return Err(DataError::new(
                    DataErrorKind::MalformedState,
                    format!("/trace/{i}"),
                    "a state must be a list of atom names",
                ));
            }
        }
    }
    let file: TraceFile = serde_json::from_value(value).map_err(malformed)?;
    Trace::from_file(file, Some(sig))
}

impl Serialize for Trace {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Trace {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let file = TraceFile::deserialize(d)?;
        Trace::from_file(file, None).map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let states: Vec<String> = self
            .states
            .iter()
            .map(|s| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", ")))
            .collect();
        write!(f, "[{}]", states.join(", "))
    }
}

/// Either kind of case. Serializes as the plain case or trace file, which
/// the two formats' distinct top-level keys keep unambiguous.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CaseModel {
    Structure(StructureModel),
    Trace(Trace),
}

impl CaseModel {
    pub fn layer(&self) -> Layer {
        match self {
            CaseModel::Structure(_) => Layer::Relational,
            CaseModel::Trace(_) => Layer::Temporal,
        }
    }

    /// Loads a case of whichever kind the signature calls for.
    pub fn load(bytes: &[u8], sig: &Signature) -> Result<Self, DataError> {
        match sig.kind() {
            Layer::Relational => load_structure(bytes, sig).map(CaseModel::Structure),
            Layer::Temporal => load_trace(bytes, sig).map(CaseModel::Trace),
        }
    }

    pub fn to_json(&self) -> String {
        match self {
            CaseModel::Structure(m) => m.to_json(),
            CaseModel::Trace(t) => t.to_json(),
        }
    }
}

impl From<StructureModel> for CaseModel {
    fn from(m: StructureModel) -> Self {
        CaseModel::Structure(m)
    }
}

impl From<Trace> for CaseModel {
    fn from(t: Trace) -> Self {
        CaseModel::Trace(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Range;

    fn syri() -> Signature {
        Signature::relational(
            ["Employed"],
            [("NrOfPassports", Range::new(0, 3)), ("Score", Range::new(0, 10))],
        )
        .unwrap()
    }

    const M1: &str = r#"{
        "individuals": ["a", "b"],
        "predicates": {"Employed": ["a", "b"]},
        "functions": {"NrOfPassports": {"a": 1, "b": 2}, "Score": {"a": 0, "b": 7}}
    }"#;

    fn kind_and_path(json: &str) -> (DataErrorKind, String) {
        let e = load_structure(json.as_bytes(), &syri()).unwrap_err();
        (e.kind, e.path)
    }

    #[test]
    fn loads_m1() {
        let m = load_structure(M1.as_bytes(), &syri()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.domain(), ["a", "b"]);
        assert_eq!(m.value("Score", 1), Some(7));
        assert_eq!(m.holds("Employed", 0), Some(true));
        let again = load_structure(m.to_json().as_bytes(), &syri()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn loads_singleton() {
        let json = r#"{"individuals": ["a"], "predicates": {"Employed": []},
            "functions": {"NrOfPassports": {"a": 0}, "Score": {"a": 10}}}"#;
        assert_eq!(load_structure(json.as_bytes(), &syri()).unwrap().len(), 1);
    }

    #[test]
    fn reports_paths() {
        let out_of_range = M1.replace(r#""b": 7"#, r#""b": 99"#).replace(r#""a": 0"#, r#""a": 99"#);
        assert_eq!(
            kind_and_path(&out_of_range),
            (DataErrorKind::OutOfRange, "/functions/Score/a".into())
        );
        let partial = M1.replace(r#", "b": 7"#, "");
        assert_eq!(
            kind_and_path(&partial),
            (DataErrorKind::PartialFunction, "/functions/Score".into())
        );
        let unknown = M1.replace(r#"["a", "b"]}"#, r#"["a", "c"]}"#);
        assert_eq!(
            kind_and_path(&unknown),
            (DataErrorKind::UnknownIndividual, "/predicates/Employed/1".into())
        );
        let dup = M1.replace(r#""individuals": ["a", "b"]"#, r#""individuals": ["a", "a"]"#);
        assert_eq!(
            kind_and_path(&dup),
            (DataErrorKind::DuplicateIndividual, "/individuals/1".into())
        );
        let undeclared = M1.replace("\"Employed\"", "\"Retired\"");
        assert_eq!(
            kind_and_path(&undeclared),
            (DataErrorKind::UndeclaredName, "/predicates/Retired".into())
        );
        let empty = r#"{"individuals": [], "predicates": {}, "functions": {}}"#;
        assert_eq!(kind_and_path(empty).0, DataErrorKind::EmptyDomain);
        let extra = M1.replacen('{', r#"{"note": 1, "#, 1);
        assert_eq!(kind_and_path(&extra).0, DataErrorKind::Malformed);
        let missing = r#"{"individuals": ["a"], "functions": {"NrOfPassports": {"a": 0}, "Score": {"a": 1}}}"#;
        assert_eq!(
            kind_and_path(missing),
            (DataErrorKind::MissingEntry, "/predicates/Employed".into())
        );
    }

    #[test]
    fn traces() {
        let sig = Signature::temporal(["drive", "rest"]).unwrap();
        let t = load_trace(br#"{"trace": [["drive"], ["rest"]]}"#, &sig).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t, Trace::from_letters([vec!["drive"], vec!["rest"]]));
        assert_eq!(load_trace(t.to_json().as_bytes(), &sig).unwrap(), t);

        let e = load_trace(br#"{"trace": []}"#, &sig).unwrap_err();
        assert_eq!(e.kind, DataErrorKind::EmptyTrace);
        let e = load_trace(br#"{"trace": [["drive", "unknown"]]}"#, &sig).unwrap_err();
        assert_eq!(e.kind, DataErrorKind::UndeclaredAtom);
        assert!(e.message.contains("\"unknown\""));
        assert_eq!(e.path, "/trace/0/1");
        let e = load_trace(br#"{"trace": [["drive"], "rest"]}"#, &sig).unwrap_err();
        assert_eq!((e.kind, e.path.as_str()), (DataErrorKind::MalformedState, "/trace/1"));
        let e = load_trace(br#"{"trace": [], "extra": 0}"#, &sig).unwrap_err();
        assert_eq!(e.kind, DataErrorKind::Malformed);
    }

    #[test]
    fn layer_is_checked() {
        let sig = Signature::temporal(["p"]).unwrap();
        assert_eq!(load_structure(M1.as_bytes(), &sig).unwrap_err().kind, DataErrorKind::WrongLayer);
        assert_eq!(
            load_trace(br#"{"trace": [[]]}"#, &syri()).unwrap_err().kind,
            DataErrorKind::WrongLayer
        );
    }

    #[test]
    fn reply_embedding_round_trips() {
        let m = CaseModel::Structure(load_structure(M1.as_bytes(), &syri()).unwrap());
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<CaseModel>(&json).unwrap(), m);
        let t = CaseModel::Trace(Trace::from_letters([Vec::<&str>::new(), vec!["p"]]));
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"trace":[[],["p"]]}"#);
        assert_eq!(serde_json::from_str::<CaseModel>(&json).unwrap(), t);
    }
}
