//! Interrogable legal model checking: laws are formulas, cases are finite
//! models, and every answer comes with something the evaluator can re-check.

pub mod audit;
pub mod case;
pub mod decide;
pub mod eval;
pub mod formula;
pub mod parser;
pub mod render;
pub mod session;
pub mod signature;
pub mod transform;

pub use audit::{audit, bias_formula, AuditError, BiasOutcome, BiasReport, Violation};
pub use case::{load_structure, load_trace, CaseModel, DataError, DataErrorKind, StructureModel, Trace};
pub use decide::{
    completeness_bound, consistent, implies, sat_fo_bounded, sat_ltlf, valid, valid_ltlf, DecideError, DecisionConfig,
    DecisionResult, Status,
};
pub use eval::{check, eval_fo, eval_ltlf, Environment, EvalError, Outcome, Verdict, VerdictWitness};
pub use formula::{CmpOp, Formula, FormulaKind, SourceSpan, Term};
pub use parser::{parse, ParseError, ParseErrorKind};
pub use render::render;
pub use session::{ErrorCode, Reply, ReplyBody, Session};
pub use signature::{is_identifier, Layer, Range, Signature, SignatureError};
pub use transform::{expand_macros, nnf, MacroError};
