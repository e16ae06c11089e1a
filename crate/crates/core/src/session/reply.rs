use std::fmt;

use serde::{Deserialize, Serialize};

use crate::audit::BiasReport;
use crate::decide::DecisionResult;
use crate::eval::Verdict;
use crate::formula::SourceSpan;

/// Machine-readable failure classes of a dialogue command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ErrorCode {
    UnknownCommand,
    Usage,
    UnknownName,
    DuplicateName,
    NoSignature,
    LayerMismatch,
    SignatureMismatch,
    ParseError,
    DataError,
    Io,
    NoWitness,
    ResourceLimit,
    Cancelled,
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
    /// For formula errors: location within the command line, or within the
    /// file named by `path`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<SourceSpan>,
    /// File path, or JSON pointer for case data errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictPayload {
    pub case: String,
    pub law: String,
    #[serde(flatten)]
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionPayload {
    /// `consistent`, `valid` or `implies`.
    pub question: String,
    /// The sentence actually decided, hypotheses included.
    pub formula: String,
    /// Identifiers of the hypotheses that took part.
    pub hypotheses: Vec<String>,
    #[serde(flatten)]
    pub result: DecisionResult,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum ReplyBody {
    Ok(serde_json::Value),
    Verdict(VerdictPayload),
    Decision(DecisionPayload),
    BiasReport(BiasReport),
    Error(ErrorPayload),
}

/// Answer to one dialogue command: a structured body, a one-line summary and
/// an optional multi-line explanation (tables of witnesses and the like).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reply {
    #[serde(flatten)]
    pub body: ReplyBody,
    pub text: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<String>,
}

impl Reply {
    pub fn ok(value: serde_json::Value, text: impl Into<String>) -> Self {
        Reply {
            body: ReplyBody::Ok(value),
            text: text.into(),
            detail: Vec::new(),
        }
    }

    pub fn error(code: ErrorCode, message: impl Into<String>) -> Self {
        let message = message.into();
        Reply {
            text: format!("error {code}: {message}"),
            body: ReplyBody::Error(ErrorPayload {
                code,
                message,
                span: None,
                path: None,
            }),
            detail: Vec::new(),
        }
    }

    pub(crate) fn with_detail(mut self, detail: Vec<String>) -> Self {
        self.detail = detail;
        self
    }

    pub(crate) fn at(mut self, span: Option<SourceSpan>, path: Option<String>) -> Self {
        if let ReplyBody::Error(e) = &mut self.body {
            e.span = span;
            e.path = path;
        }
        self
    }

    pub fn kind(&self) -> &'static str {
        match self.body {
            ReplyBody::Ok(_) => "ok",
            ReplyBody::Verdict(_) => "verdict",
            ReplyBody::Decision(_) => "decision",
            ReplyBody::BiasReport(_) => "bias_report",
            ReplyBody::Error(_) => "error",
        }
    }

    pub fn error_code(&self) -> Option<ErrorCode> {
        match &self.body {
            ReplyBody::Error(e) => Some(e.code),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        self.error_code().is_some()
    }

    /// Whether the reply answers its question in the negative: a failed
    /// check, an unsatisfiable or invalid law, a biased case.
    pub fn is_negative(&self) -> bool {
        match &self.body {
            ReplyBody::Verdict(v) => !v.verdict.holds(),
            ReplyBody::Decision(d) => !d.result.status.is_positive(),
            ReplyBody::BiasReport(b) => !b.violations.is_empty(),
            _ => false,
        }
    }

    /// Whether `why` has something to show for this reply.
    pub(crate) fn has_witness(&self) -> bool {
        match &self.body {
            ReplyBody::Verdict(v) => v.verdict.witness.is_some(),
            ReplyBody::Decision(d) => d.result.witness.is_some(),
            ReplyBody::BiasReport(b) => !b.violations.is_empty(),
            _ => false,
        }
    }

    /// Text block as it appears in a transcript: the summary line followed
    /// by the detail lines indented by two spaces.
    pub fn render(&self) -> String {
        let mut out = self.text.clone();
        out.push('\n');
        for line in &self.detail {
            out.push_str("  ");
            out.push_str(line);
            out.push('\n');
        }
        out
    }
}
