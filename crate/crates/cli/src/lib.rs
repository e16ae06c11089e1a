//! The `lexdialog` command line: one-shot verbs that mirror the dialogue
//! commands, and `repl` for an interactive session.
//!
//! Every verb runs through a [`Session`], so the text and JSON printed here
//! are exactly the replies a dialogue (or the HTTP service) would give.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use lexdialog_core::{is_identifier, DecisionConfig, ErrorCode, Reply, Session};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "lexdialog", version, about = "Check cases against laws and interrogate the laws themselves")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Signature file the laws and cases are written against.
    #[arg(long, global = true, value_name = "PATH")]
    pub sig: Option<PathBuf>,
    /// Largest domain size for relational consistency/validity questions.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub bound: Option<u64>,
    /// Search budget: automaton states (temporal) and candidate structures
    /// (relational) a single question may explore.
    #[arg(long, global = true, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub budget: Option<u64>,
    /// Print replies as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Exit with status 2 when the verdict is negative.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Write the session transcript to PATH when done.
    #[arg(long, global = true, value_name = "PATH")]
    pub transcript: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Does the case satisfy the law?
    Check { case: PathBuf, law: PathBuf },
    /// Does the law have a model?
    Consistent { law: PathBuf },
    /// Does the law hold in every model?
    Valid { law: PathBuf },
    /// Does the law entail the property?
    Implies { law: PathBuf, prop: PathBuf },
    /// Counterfactual bias audit of a case.
    Audit {
        case: PathBuf,
        #[arg(long, value_name = "FUNC")]
        protected: String,
        #[arg(long, value_name = "FUNC")]
        score: String,
    },
    /// Interactive dialogue read from standard input.
    Repl,
}

/// Exit status for a reply: errors map to 1 or 3, negative answers to 2
/// under `--strict`.
pub fn exit_code(reply: &Reply, strict: bool) -> i32 {
    match reply.error_code() {
        Some(ErrorCode::ResourceLimit | ErrorCode::Cancelled) => EXIT_RESOURCE,
        Some(_) => EXIT_ERROR,
        None if strict && reply.is_negative() => EXIT_NEGATIVE,
        None => EXIT_OK,
    }
}

/// Runs the command line non-interactively (no prompts).
pub fn run<I, S>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(args, input, out, err, false)
}

/// Like [`run`]; `interactive` turns on the repl prompt.
pub fn run_with<I, S>(args: I, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write, interactive: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    let mut driver = Driver::new(&cli);
    let code = match &cli.verb {
        Verb::Repl => driver.repl(input, out, err, interactive),
        verb => driver.one_shot(verb, out, err),
    };
    if let Some(path) = &cli.transcript {
        if let Err(e) = fs::write(path, driver.session.transcript()) {
            let _ = writeln!(err, "cannot write transcript {}: {e}", path.display());
            return EXIT_ERROR;
        }
    }
    code
}

struct Driver<'a> {
    cli: &'a Cli,
    session: Session,
    /// Names given to loaded files, per namespace, so a file named twice is
    /// loaded once.
    names: HashMap<(&'static str, PathBuf), String>,
}

impl<'a> Driver<'a> {
    fn new(cli: &'a Cli) -> Self {
        let mut config = DecisionConfig::default();
        if let Some(b) = cli.budget {
            config.state_budget = usize::try_from(b).unwrap_or(usize::MAX);
            config.candidate_budget = b;
        }
        Driver {
            cli,
            session: Session::with_config(config),
            names: HashMap::new(),
        }
    }

    /// Prints a reply: JSON or text on stdout, errors also on stderr.
    fn emit(&self, reply: &Reply, out: &mut dyn Write, err: &mut dyn Write) {
        if self.cli.json {
            let _ = writeln!(out, "{}", serde_json::to_string(reply).expect("replies serialize"));
            if reply.is_error() {
                let _ = writeln!(err, "error: {}", reply.text);
            }
        } else if reply.is_error() {
            let _ = write!(err, "error: {}", reply.render());
        } else {
            let _ = write!(out, "{}", reply.render());
        }
    }

    /// Runs one dialogue command, printing the reply only if it failed.
    fn quietly(&mut self, command: &str, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), i32> {
        let reply = self.session.execute_mut(command);
        if reply.is_error() {
            self.emit(&reply, out, err);
            return Err(exit_code(&reply, false));
        }
        Ok(())
    }

    /// Loads `path` into namespace `ns` under a name derived from the file
    /// name, returning that name.
    fn load(&mut self, ns: &'static str, path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<String, i32> {
        if let Some(name) = self.names.get(&(ns, path.to_path_buf())) {
            return Ok(name.clone());
        }
        let text = path.to_string_lossy();
        if text.contains(char::is_whitespace) {
            let _ = writeln!(err, "error: paths containing whitespace are not supported: {text:?}");
            return Err(EXIT_ERROR);
        }
        let name = self.fresh_name(ns, path);
        self.quietly(&format!("load {ns} {name} {text}"), out, err)?;
        self.names.insert((ns, path.to_path_buf()), name.clone());
        Ok(name)
    }

    fn fresh_name(&self, ns: &str, path: &Path) -> String {
        let stem: String = path
            .file_stem()
            .map(|s| s.to_string_lossy().chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect())
            .unwrap_or_default();
        let base = if is_identifier(&stem) { stem } else { format!("{ns}_{stem}") };
        let base = if is_identifier(&base) { base } else { ns.to_string() };
        let taken = |n: &String| self.names.iter().any(|((k, _), v)| *k == ns && v == n);
        std::iter::once(base.clone())
            .chain((2..).map(|i| format!("{base}_{i}")))
            .find(|n| !taken(n))
            .expect("unbounded names")
    }

    fn one_shot(&mut self, verb: &Verb, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
        // Missing inputs are reported by name before anything else.
        let inputs: Vec<&Path> = match verb {
            Verb::Check { case, law } => vec![case, law],
            Verb::Consistent { law } | Verb::Valid { law } => vec![law],
            Verb::Implies { law, prop } => vec![law, prop],
            Verb::Audit { case, .. } => vec![case],
            Verb::Repl => vec![],
        }
        .into_iter()
        .map(PathBuf::as_path)
        .chain(self.cli.sig.as_deref())
        .collect();
        for path in inputs {
            if let Err(e) = fs::File::open(path) {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_ERROR;
            }
        }
        let Some(sig) = self.cli.sig.clone() else {
            let _ = writeln!(err, "error: --sig PATH is required to read laws and cases");
            return EXIT_ERROR;
        };
        match self.query(verb, &sig, out, err) {
            Ok(command) => {
                let reply = self.session.execute_mut(&command);
                self.emit(&reply, out, err);
                exit_code(&reply, self.cli.strict)
            }
            Err(code) => code,
        }
    }

    /// Loads the verb's files and returns the dialogue command to ask.
    fn query(&mut self, verb: &Verb, sig: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<String, i32> {
        self.load("sig", sig, out, err)?;
        let bound = self.cli.bound.map(|b| format!(" bound {b}")).unwrap_or_default();
        Ok(match verb {
            Verb::Check { case, law } => {
                let case = self.load("case", case, out, err)?;
                let law = self.load("law", law, out, err)?;
                format!("check {case} {law}")
            }
            Verb::Consistent { law } => format!("consistent {}{bound}", self.load("law", law, out, err)?),
            Verb::Valid { law } => format!("valid {}{bound}", self.load("law", law, out, err)?),
            Verb::Implies { law, prop } => {
                let law = self.load("law", law, out, err)?;
                let prop = self.load("law", prop, out, err)?;
                format!("implies {law} {prop}{bound}")
            }
            Verb::Audit { case, protected, score } => {
                let case = self.load("case", case, out, err)?;
                format!("audit {case} protected={protected} score={score}")
            }
            Verb::Repl => unreachable!("repl is not a one-shot verb"),
        })
    }

    fn repl(&mut self, input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write, interactive: bool) -> i32 {
        if let Some(sig) = self.cli.sig.clone() {
            if let Err(code) = self.load("sig", &sig, out, err) {
                return code;
            }
        }
        let mut line = String::new();
        loop {
            if interactive {
                let _ = write!(out, "lexdialog> ");
                let _ = out.flush();
            }
            line.clear();
            match input.read_line(&mut line) {
                Ok(0) => break,
                Ok(_) => {}
                Err(e) => {
                    let _ = writeln!(err, "error: cannot read input: {e}");
                    return EXIT_ERROR;
                }
            }
            let command = line.trim();
            if command.is_empty() || command.starts_with('#') {
                continue;
            }
            if matches!(command, "quit" | "exit") {
                break;
            }
            let reply = self.session.execute_mut(command);
            if self.cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string(&reply).expect("replies serialize"));
            } else {
                let _ = write!(out, "{}", reply.render());
            }
            let _ = out.flush();
        }
        EXIT_OK
    }
}
