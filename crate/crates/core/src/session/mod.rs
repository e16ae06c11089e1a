//! Dialogue sessions: a value holding the laws, cases and hypotheses under
//! discussion plus the full command history. Every command yields a new
//! session and a [`Reply`]; a failing command changes nothing except the
//! history.

// Error replies are built once per command; boxing them buys nothing.
#![allow(clippy::result_large_err)]

mod command;
mod reply;
pub mod table;

use std::fs;

use indexmap::IndexMap;
use serde_json::json;

use crate::audit::{audit, AuditError};
use crate::case::{CaseModel, DataError};
use crate::decide::{self, DecideError, DecisionConfig, DecisionResult, Status};
use crate::eval::{check, EvalError, VerdictWitness};
use crate::formula::{Formula, SourceSpan};
use crate::parser::{parse, ParseError, ParseErrorKind};
use crate::signature::{Layer, Signature};

pub use command::{parse_command, Command, CommandError, Namespace, HELP};
pub use reply::{DecisionPayload, ErrorCode, ErrorPayload, Reply, ReplyBody, VerdictPayload};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LawEntry {
    /// Name of the signature the law was written against.
    pub signature: String,
    pub sig: Signature,
    pub formula: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseEntry {
    pub signature: String,
    pub sig: Signature,
    pub model: CaseModel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypothesis {
    pub id: u64,
    pub sig: Signature,
    pub formula: Formula,
}

impl Hypothesis {
    pub fn label(&self) -> String {
        format!("h{}", self.id)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Session {
    signatures: IndexMap<String, Signature>,
    current: Option<String>,
    laws: IndexMap<String, LawEntry>,
    cases: IndexMap<String, CaseEntry>,
    hypotheses: Vec<Hypothesis>,
    last_id: u64,
    last_witness: Option<Reply>,
    history: Vec<(String, Reply)>,
    config: DecisionConfig,
    /// When set, `load` is refused (sessions driven by remote clients).
    no_file_access: bool,
}

type Outcome = Result<Reply, Reply>;

fn parse_error(e: &ParseError, offset: usize, line: &str, path: Option<String>) -> Reply {
    let code = match e.kind {
        ParseErrorKind::LayerMismatch => ErrorCode::LayerMismatch,
        _ => ErrorCode::ParseError,
    };
    // Spans of inline formulas are reported relative to the command line.
    let span = if path.is_none() {
        SourceSpan {
            begin: e.span.begin + offset,
            end: e.span.end + offset,
            line: 1,
            column: e.span.column + line[..offset].chars().count(),
        }
    } else {
        e.span
    };
    let place = match &path {
        Some(p) => format!("{p}:{}:{}", span.line, span.column),
        None => format!("column {}", span.column),
    };
    Reply::error(code, format!("{place}: {}", e.message)).at(Some(span), path)
}

fn data_error(e: &DataError, file: Option<&str>) -> Reply {
    let at = if e.path.is_empty() { "document" } else { e.path.as_str() };
    let message = match file {
        Some(f) => format!("{f}: {at}: {}", e.message),
        None => format!("{at}: {}", e.message),
    };
    Reply::error(ErrorCode::DataError, message).at(None, Some(e.path.clone()))
}

fn decide_error(e: DecideError) -> Reply {
    let code = match &e {
        DecideError::ResourceLimit(_) => ErrorCode::ResourceLimit,
        DecideError::Cancelled => ErrorCode::Cancelled,
        DecideError::LayerMismatch { .. } => ErrorCode::LayerMismatch,
        DecideError::NotASentence(_) | DecideError::Macro(_) => ErrorCode::ParseError,
        DecideError::Vocabulary(EvalError::LayerMismatch { .. }) => ErrorCode::LayerMismatch,
        DecideError::Vocabulary(_) => ErrorCode::SignatureMismatch,
    };
    Reply::error(code, e.to_string())
}

fn layer_word(l: Layer) -> &'static str {
    match l {
        Layer::Relational => "relational",
        Layer::Temporal => "temporal",
    }
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    /// A fresh session whose queries run under `config` (budgets, bound
    /// defaults, cancellation).
    pub fn with_config(config: DecisionConfig) -> Self {
        Session {
            config,
            ..Self::default()
        }
    }

    /// The same session with `load` disabled, for clients that must not
    /// read the host's files; definitions then have to be sent inline.
    pub fn without_file_access(mut self) -> Self {
        self.no_file_access = true;
        self
    }

    pub fn config(&self) -> &DecisionConfig {
        &self.config
    }

    pub fn laws(&self) -> &IndexMap<String, LawEntry> {
        &self.laws
    }

    pub fn cases(&self) -> &IndexMap<String, CaseEntry> {
        &self.cases
    }

    pub fn signatures(&self) -> &IndexMap<String, Signature> {
        &self.signatures
    }

    pub fn current_signature(&self) -> Option<&str> {
        self.current.as_deref()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn history(&self) -> &[(String, Reply)] {
        &self.history
    }

    /// Pure transition: the session after `command`, and the reply.
    pub fn execute(&self, command: &str) -> (Session, Reply) {
        let mut next = self.clone();
        let reply = next.execute_mut(command);
        (next, reply)
    }

    /// In-place variant of [`Session::execute`].
    pub fn execute_mut(&mut self, command: &str) -> Reply {
        let reply = match self.dispatch(command) {
            Ok(r) | Err(r) => r,
        };
        if reply.has_witness() {
            self.last_witness = Some(reply.clone());
        }
        self.history.push((command.to_string(), reply.clone()));
        reply
    }

    /// Replayable record: each command prefixed by `> `, followed by its
    /// reply block.
    pub fn transcript(&self) -> String {
        self.history
            .iter()
            .map(|(cmd, reply)| format!("> {cmd}\n{}", reply.render()))
            .collect()
    }

    /// The command lines of a transcript, in order.
    pub fn transcript_commands(transcript: &str) -> Vec<&str> {
        transcript.lines().filter_map(|l| l.strip_prefix("> ")).collect()
    }

    /// Feeds the command lines of `transcript` into a fresh session.
    pub fn replay(transcript: &str, config: DecisionConfig) -> Session {
        let mut s = Session::with_config(config);
        for cmd in Self::transcript_commands(transcript) {
            s.execute_mut(cmd);
        }
        s
    }

    fn dispatch(&mut self, line: &str) -> Outcome {
        let cmd = parse_command(line).map_err(|e| match e {
            CommandError::Unknown(w) => Reply::error(ErrorCode::UnknownCommand, format!("unknown command {w:?}; try `help`")),
            CommandError::Usage(m) => Reply::error(ErrorCode::Usage, m),
        })?;
        match cmd {
            Command::Sig { name, body } => {
                let sig = Signature::parse_inline(&body)
                    .map_err(|e| Reply::error(ErrorCode::ParseError, format!("declaration {e}")))?;
                self.define_sig(name, sig)
            }
            Command::Use { name } => {
                let sig = self.sig(&name)?;
                let kind = sig.kind();
                self.current = Some(name.clone());
                Ok(Reply::ok(
                    json!({"current_signature": name}),
                    format!("using {} signature {name}", layer_word(kind)),
                ))
            }
            Command::Law { name, source, offset } => {
                let (sig_name, sig) = self.current_sig()?;
                let formula = parse(&source, &sig).map_err(|e| parse_error(&e, offset, line, None))?;
                self.define_law(name, sig_name, sig, formula)
            }
            Command::Case { name, json } => {
                let (sig_name, sig) = self.current_sig()?;
                let model = CaseModel::load(json.as_bytes(), &sig).map_err(|e| data_error(&e, None))?;
                self.define_case(name, sig_name, sig, model)
            }
            Command::Load { ns, name, path } => self.load(ns, name, &path),
            Command::List => Ok(self.list()),
            Command::Show { ns, name } => self.show(ns, &name),
            Command::Check { case, law } => self.check(&case, &law),
            Command::Consistent { law, bound } => self.decide("consistent", &law, None, bound),
            Command::Valid { law, bound } => self.decide("valid", &law, None, bound),
            Command::Implies { law, prop, bound } => self.decide("implies", &law, Some(&prop), bound),
            Command::Audit { case, protected, score } => self.audit(&case, &protected, &score),
            Command::Assume { source, offset } => {
                let (_, sig) = self.current_sig()?;
                let formula = parse(&source, &sig).map_err(|e| parse_error(&e, offset, line, None))?;
                if let Some(h) = self.hypotheses.first() {
                    self.compatible(&h.sig, &sig, "the existing hypotheses")?;
                }
                self.last_id += 1;
                let h = Hypothesis {
                    id: self.last_id,
                    sig,
                    formula,
                };
                let reply = Reply::ok(
                    json!({"id": h.label(), "formula": h.formula.to_string()}),
                    format!("assumed {}: {}", h.label(), h.formula),
                );
                self.hypotheses.push(h);
                Ok(reply)
            }
            Command::Retract { id } => {
                let pos = self
                    .hypotheses
                    .iter()
                    .position(|h| h.id == id)
                    .ok_or_else(|| Reply::error(ErrorCode::UnknownName, format!("no hypothesis h{id}")))?;
                let h = self.hypotheses.remove(pos);
                Ok(Reply::ok(
                    json!({"retracted": h.label()}),
                    format!("retracted {}: {}", h.label(), h.formula),
                ))
            }
            Command::Why => self
                .last_witness
                .clone()
                .ok_or_else(|| Reply::error(ErrorCode::NoWitness, "no witness or counterexample has been produced yet")),
            Command::Transcript => {
                let text = self.transcript();
                let lines: Vec<String> = text.lines().map(str::to_string).collect();
                Ok(Reply::ok(
                    json!({"commands": self.history.len(), "transcript": text}),
                    format!("transcript of {} commands", self.history.len()),
                )
                .with_detail(lines))
            }
            Command::Help => Ok(Reply::ok(json!({"commands": HELP}), "commands:")
                .with_detail(HELP.iter().map(|s| s.to_string()).collect())),
        }
    }

    fn sig(&self, name: &str) -> Result<&Signature, Reply> {
        self.signatures
            .get(name)
            .ok_or_else(|| Reply::error(ErrorCode::UnknownName, format!("no signature named {name}")))
    }

    fn current_sig(&self) -> Result<(String, Signature), Reply> {
        let name = self.current.clone().ok_or_else(|| {
            Reply::error(
                ErrorCode::NoSignature,
                "no signature selected; define one with `sig` or `load sig` first",
            )
        })?;
        let sig = self.sig(&name)?.clone();
        Ok((name, sig))
    }

    fn law(&self, name: &str) -> Result<&LawEntry, Reply> {
        self.laws
            .get(name)
            .ok_or_else(|| Reply::error(ErrorCode::UnknownName, format!("no law named {name}")))
    }

    fn case(&self, name: &str) -> Result<&CaseEntry, Reply> {
        self.cases
            .get(name)
            .ok_or_else(|| Reply::error(ErrorCode::UnknownName, format!("no case named {name}")))
    }

    fn compatible(&self, a: &Signature, b: &Signature, what: &str) -> Result<(), Reply> {
        if a.kind() != b.kind() {
            return Err(Reply::error(
                ErrorCode::LayerMismatch,
                format!(
                    "{what} are {} but this is {}",
                    layer_word(a.kind()),
                    layer_word(b.kind())
                ),
            ));
        }
        if a != b {
            return Err(Reply::error(
                ErrorCode::SignatureMismatch,
                format!("{what} use a different signature"),
            ));
        }
        Ok(())
    }

    fn unique(&self, ns: Namespace, name: &str) -> Result<(), Reply> {
        let taken = match ns {
            Namespace::Sig => self.signatures.contains_key(name),
            Namespace::Law => self.laws.contains_key(name),
            Namespace::Case => self.cases.contains_key(name),
        };
        if taken {
            return Err(Reply::error(ErrorCode::DuplicateName, format!("a {ns} named {name} already exists")));
        }
        if !crate::signature::is_identifier(name) {
            return Err(Reply::error(ErrorCode::Usage, format!("{name:?} is not a valid name")));
        }
        Ok(())
    }

    fn define_sig(&mut self, name: String, sig: Signature) -> Outcome {
        self.unique(Namespace::Sig, &name)?;
        let reply = Reply::ok(
            json!({"defined": "signature", "name": name, "kind": sig.kind(), "source": sig.to_string()}),
            format!("{} signature {name} defined and selected: {sig}", layer_word(sig.kind())),
        );
        self.signatures.insert(name.clone(), sig);
        self.current = Some(name);
        Ok(reply)
    }

    fn define_law(&mut self, name: String, sig_name: String, sig: Signature, formula: Formula) -> Outcome {
        self.unique(Namespace::Law, &name)?;
        let reply = Reply::ok(
            json!({"defined": "law", "name": name, "signature": sig_name, "formula": formula.to_string()}),
            format!("law {name} defined: {formula}"),
        );
        self.laws.insert(
            name,
            LawEntry {
                signature: sig_name,
                sig,
                formula,
            },
        );
        Ok(reply)
    }

    fn define_case(&mut self, name: String, sig_name: String, sig: Signature, model: CaseModel) -> Outcome {
        self.unique(Namespace::Case, &name)?;
        let size = match &model {
            CaseModel::Structure(m) => format!("{} individuals", m.len()),
            CaseModel::Trace(t) => format!("{} states", t.len()),
        };
        let reply = Reply::ok(
            json!({"defined": "case", "name": name, "signature": sig_name, "case": model}),
            format!("case {name} defined: {size}"),
        )
        .with_detail(table::case_lines(&model));
        self.cases.insert(
            name,
            CaseEntry {
                signature: sig_name,
                sig,
                model,
            },
        );
        Ok(reply)
    }

    fn load(&mut self, ns: Namespace, name: String, path: &str) -> Outcome {
        // Check the name before touching the file system.
        self.unique(ns, &name)?;
        if self.no_file_access {
            return Err(Reply::error(
                ErrorCode::Usage,
                format!("loading files is disabled here; define the {ns} inline instead"),
            ));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| Reply::error(ErrorCode::Io, format!("cannot read {path}: {e}")).at(None, Some(path.to_string())))?;
        match ns {
            Namespace::Sig => {
                let sig = Signature::parse(&text)
                    .map_err(|e| Reply::error(ErrorCode::ParseError, format!("{path}: {e}")).at(None, Some(path.to_string())))?;
                self.define_sig(name, sig)
            }
            Namespace::Law => {
                let (sig_name, sig) = self.current_sig()?;
                let formula = parse(&text, &sig).map_err(|e| parse_error(&e, 0, "", Some(path.to_string())))?;
                self.define_law(name, sig_name, sig, formula)
            }
            Namespace::Case => {
                let (sig_name, sig) = self.current_sig()?;
                let model = CaseModel::load(text.as_bytes(), &sig).map_err(|e| data_error(&e, Some(path)))?;
                self.define_case(name, sig_name, sig, model)
            }
        }
    }

    fn list(&self) -> Reply {
        let mut detail = Vec::new();
        for (name, sig) in &self.signatures {
            let mark = if self.current.as_deref() == Some(name) { " (current)" } else { "" };
            detail.push(format!("sig {name}{mark}: {sig}"));
        }
        for (name, law) in &self.laws {
            detail.push(format!("law {name}: {}", law.formula));
        }
        for (name, case) in &self.cases {
            let what = match &case.model {
                CaseModel::Structure(m) => format!("structure with {} individuals", m.len()),
                CaseModel::Trace(t) => format!("trace of {} states", t.len()),
            };
            detail.push(format!("case {name}: {what}"));
        }
        for h in &self.hypotheses {
            detail.push(format!("{}: {}", h.label(), h.formula));
        }
        let count = |n: usize, word: &str| format!("{n} {word}{}", if n == 1 { "" } else { "s" });
        Reply::ok(
            json!({
                "signatures": self.signatures.keys().collect::<Vec<_>>(),
                "current_signature": self.current,
                "laws": self.laws.keys().collect::<Vec<_>>(),
                "cases": self.cases.keys().collect::<Vec<_>>(),
                "hypotheses": self.hypotheses.iter().map(|h| json!({"id": h.label(), "formula": h.formula.to_string()})).collect::<Vec<_>>(),
            }),
            format!(
                "{}, {}, {}, {}",
                count(self.signatures.len(), "signature"),
                count(self.laws.len(), "law"),
                count(self.cases.len(), "case"),
                count(self.hypotheses.len(), "hypothesis").replace("hypothesiss", "hypotheses")
            ),
        )
        .with_detail(detail)
    }

    fn show(&self, ns: Option<Namespace>, name: &str) -> Outcome {
        let wants = |n: Namespace| ns.is_none() || ns == Some(n);
        if wants(Namespace::Law) {
            if let Some(law) = self.laws.get(name) {
                return Ok(Reply::ok(
                    json!({"law": name, "signature": law.signature, "formula": law.formula.to_string()}),
                    format!("law {name} over {}: {}", law.signature, law.formula),
                ));
            }
        }
        if wants(Namespace::Case) {
            if let Some(case) = self.cases.get(name) {
                return Ok(Reply::ok(
                    json!({"case": name, "signature": case.signature, "model": case.model}),
                    format!("case {name} over {}", case.signature),
                )
                .with_detail(table::case_lines(&case.model)));
            }
        }
        if wants(Namespace::Sig) {
            if let Some(sig) = self.signatures.get(name) {
                return Ok(Reply::ok(
                    json!({"signature": name, "kind": sig.kind(), "source": sig.to_string()}),
                    format!("{} signature {name}: {sig}", layer_word(sig.kind())),
                ));
            }
        }
        let what = ns.map_or("law, case or signature".to_string(), |n| n.to_string());
        Err(Reply::error(ErrorCode::UnknownName, format!("no {what} named {name}")))
    }

    fn check(&self, case_name: &str, law_name: &str) -> Outcome {
        let case = self.case(case_name)?;
        let law = self.law(law_name)?;
        if case.model.layer() != law.sig.kind() {
            return Err(Reply::error(
                ErrorCode::LayerMismatch,
                format!(
                    "case {case_name} is {} but law {law_name} is {}",
                    layer_word(case.model.layer()),
                    layer_word(law.sig.kind())
                ),
            ));
        }
        if case.sig != law.sig {
            let fits = match &case.model {
                CaseModel::Structure(m) => m.validate(&law.sig).is_ok(),
                CaseModel::Trace(t) => t.states().iter().flatten().all(|a| law.sig.has_atom(a)),
            };
            if !fits {
                return Err(Reply::error(
                    ErrorCode::SignatureMismatch,
                    format!("case {case_name} does not fit the signature of law {law_name}"),
                ));
            }
        }
        let verdict = check(&case.model, &law.formula).map_err(|e| match e {
            EvalError::LayerMismatch { .. } => Reply::error(ErrorCode::LayerMismatch, e.to_string()),
            _ => Reply::error(ErrorCode::SignatureMismatch, e.to_string()),
        })?;
        let mut detail = Vec::new();
        match (&verdict.witness, &case.model) {
            (Some(VerdictWitness::Assignment(env)), CaseModel::Structure(m)) => {
                let mut rows: Vec<usize> = env.0.values().filter_map(|i| m.index_of(i)).collect();
                rows.sort_unstable();
                rows.dedup();
                detail.extend(env.0.iter().map(|(v, i)| format!("{v} = {i}")));
                detail.extend(table::structure_table(m, Some(&rows)));
            }
            (Some(VerdictWitness::Position(i)), CaseModel::Trace(t)) => {
                detail.push(format!("violated at position {i}"));
                detail.extend(table::trace_lines(t));
            }
            _ => {}
        }
        let text = format!("check {case_name} {law_name}: {verdict}");
        Ok(Reply {
            body: ReplyBody::Verdict(VerdictPayload {
                case: case_name.to_string(),
                law: law_name.to_string(),
                verdict,
            }),
            text,
            detail,
        })
    }

    fn decide(&self, question: &str, law_name: &str, prop: Option<&str>, bound: Option<u64>) -> Outcome {
        let law = self.law(law_name)?;
        let prop = prop.map(|p| self.law(p).map(|e| (p, e))).transpose()?;
        if let Some((p, entry)) = &prop {
            self.compatible(&law.sig, &entry.sig, &format!("law {law_name} and property {p}"))?;
        }
        if let Some(h) = self.hypotheses.first() {
            self.compatible(&h.sig, &law.sig, "the hypotheses")?;
        }
        let hyps: Vec<Formula> = self.hypotheses.iter().map(|h| h.formula.clone()).collect();
        let labels: Vec<String> = self.hypotheses.iter().map(Hypothesis::label).collect();
        let cfg = DecisionConfig {
            bound: bound.or(self.config.bound),
            ..self.config.clone()
        };
        let sig = &law.sig;
        let (decided, result) = match (question, &prop) {
            ("implies", Some((_, psi))) => {
                let antecedent = Formula::conjunction(hyps.into_iter().chain([law.formula.clone()]));
                let r = decide::implies(&antecedent, &psi.formula, sig, &cfg);
                (Formula::implies(antecedent, psi.formula.clone()), r)
            }
            ("valid", _) if !hyps.is_empty() => {
                let antecedent = Formula::conjunction(hyps);
                let r = decide::implies(&antecedent, &law.formula, sig, &cfg);
                (Formula::implies(antecedent, law.formula.clone()), r)
            }
            ("valid", _) => (law.formula.clone(), decide::valid(&law.formula, sig, &cfg)),
            _ => {
                let f = Formula::conjunction(hyps.into_iter().chain([law.formula.clone()]));
                let r = decide::consistent(&f, sig, &cfg);
                (f, r)
            }
        };
        let result: DecisionResult = result.map_err(decide_error)?;
        let mut detail = Vec::new();
        if let Some(w) = &result.witness {
            detail.push(
                if result.status == Status::Sat {
                    "model:"
                } else {
                    "counterexample:"
                }
                .to_string(),
            );
            detail.extend(table::case_lines(w));
        }
        let subject = match &prop {
            Some((p, _)) => format!("{question} {law_name} {p}"),
            None => format!("{question} {law_name}"),
        };
        let assuming = if labels.is_empty() {
            String::new()
        } else {
            format!(" assuming {}", labels.join(", "))
        };
        Ok(Reply {
            text: format!("{subject}{assuming}: {result}"),
            body: ReplyBody::Decision(DecisionPayload {
                question: question.to_string(),
                formula: decided.to_string(),
                hypotheses: labels,
                result,
            }),
            detail,
        })
    }

    fn audit(&self, case_name: &str, protected: &str, score: &str) -> Outcome {
        let case = self.case(case_name)?;
        let CaseModel::Structure(m) = &case.model else {
            return Err(Reply::error(
                ErrorCode::LayerMismatch,
                format!("case {case_name} is a trace; audits need a relational case"),
            ));
        };
        let report = audit(m, protected, score).map_err(|e| match e {
            AuditError::UnknownFunction(_) => Reply::error(ErrorCode::UnknownName, e.to_string()),
            AuditError::ProtectedEqualsScore => Reply::error(ErrorCode::Usage, e.to_string()),
        })?;
        let detail = if report.violations.is_empty() {
            Vec::new()
        } else {
            table::violation_table(&report, score)
        };
        Ok(Reply {
            text: format!("audit {case_name}: {report}"),
            body: ReplyBody::BiasReport(report),
            detail,
        })
    }
}
