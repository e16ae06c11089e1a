//! The dialogue command grammar.
//!
//! ```text
//! sig NAME = DECL; DECL; ...          define a signature and make it current
//! use NAME                            make a signature current
//! law NAME = FORMULA                  define a law over the current signature
//! case NAME = JSON                    define a case (case or trace file contents)
//! load sig|law|case NAME PATH         same, reading the definition from a file
//! list | show [sig|law|case] NAME
//! check CASE LAW
//! consistent LAW [bound N]
//! valid LAW [bound N]
//! implies LAW PROP [bound N]
//! audit CASE protected=F score=G
//! assume FORMULA | retract K
//! why | transcript | help
//! ```

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Namespace {
    Sig,
    Law,
    Case,
}

impl Namespace {
    fn parse(word: &str) -> Option<Self> {
        match word {
            "sig" => Some(Namespace::Sig),
            "law" => Some(Namespace::Law),
            "case" => Some(Namespace::Case),
            _ => None,
        }
    }
}

impl fmt::Display for Namespace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Namespace::Sig => "signature",
            Namespace::Law => "law",
            Namespace::Case => "case",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Command {
    Sig { name: String, body: String },
    Use { name: String },
    /// `offset` is the byte position of the formula within the command line.
    Law { name: String, source: String, offset: usize },
    Case { name: String, json: String },
    Load { ns: Namespace, name: String, path: String },
    List,
    Show { ns: Option<Namespace>, name: String },
    Check { case: String, law: String },
    Consistent { law: String, bound: Option<u64> },
    Valid { law: String, bound: Option<u64> },
    Implies { law: String, prop: String, bound: Option<u64> },
    Audit { case: String, protected: String, score: String },
    Assume { source: String, offset: usize },
    Retract { id: u64 },
    Why,
    Transcript,
    Help,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandError {
    Unknown(String),
    Usage(String),
}

pub const HELP: &[&str] = &[
    "sig NAME = DECL; ...            define a signature (pred P | func f lo..hi | atom a)",
    "use NAME                        select the current signature",
    "law NAME = FORMULA              define a law over the current signature",
    "case NAME = JSON                define a case from case-file or trace-file JSON",
    "load sig|law|case NAME PATH     define from a file",
    "list                            list everything defined",
    "show [sig|law|case] NAME        print a definition",
    "check CASE LAW                  does the case satisfy the law?",
    "consistent LAW [bound N]        does the law have a model?",
    "valid LAW [bound N]             does the law hold in every model?",
    "implies LAW PROP [bound N]      does the law entail the property?",
    "audit CASE protected=F score=G  counterfactual bias audit",
    "assume FORMULA                  add a hypothesis to every consistent/valid/implies query",
    "retract K                       drop hypothesis hK",
    "why                             show the latest witness or counterexample again",
    "transcript                      print the session so far",
];

fn usage(text: &str) -> CommandError {
    CommandError::Usage(format!("usage: {text}"))
}

/// Splits `NAME = REST`, returning the name and the rest with its offset.
fn definition<'a>(line: &'a str, after_keyword: usize, form: &str) -> Result<(String, &'a str, usize), CommandError> {
    let rest = &line[after_keyword..];
    let eq = rest.find('=').ok_or_else(|| usage(form))?;
    let name = rest[..eq].trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(usage(form));
    }
    let body_start = after_keyword + eq + 1;
    let body = &line[body_start..];
    let trimmed = body.trim_start();
    let offset = body_start + (body.len() - trimmed.len());
    let trimmed = trimmed.trim_end();
    if trimmed.is_empty() {
        return Err(usage(form));
    }
    Ok((name.to_string(), trimmed, offset))
}

fn bound(words: &[&str], form: &str) -> Result<Option<u64>, CommandError> {
    match words {
        [] => Ok(None),
        ["bound", n] => match n.parse::<u64>() {
            Ok(b) if b > 0 => Ok(Some(b)),
            _ => Err(CommandError::Usage(format!("bound must be a positive integer, not {n:?}"))),
        },
        _ => Err(usage(form)),
    }
}

fn key_value<'a>(word: &'a str, key: &str) -> Option<&'a str> {
    word.strip_prefix(key)?.strip_prefix('=').filter(|v| !v.is_empty())
}

pub fn parse_command(line: &str) -> Result<Command, CommandError> {
    if line.contains('\n') || line.contains('\r') {
        return Err(CommandError::Usage("commands are single lines".into()));
    }
    let lead = line.len() - line.trim_start().len();
    let words: Vec<&str> = line.split_whitespace().collect();
    let Some(&head) = words.first() else {
        return Err(CommandError::Usage("empty command; try `help`".into()));
    };
    let after = lead + head.len();
    let args = &words[1..];
    Ok(match head {
        "sig" => {
            let (name, body, _) = definition(line, after, "sig NAME = DECL; DECL; ...")?;
            Command::Sig {
                name,
                body: body.to_string(),
            }
        }
        "law" => {
            let (name, source, offset) = definition(line, after, "law NAME = FORMULA")?;
            Command::Law {
                name,
                source: source.to_string(),
                offset,
            }
        }
        "case" => {
            let (name, json, _) = definition(line, after, "case NAME = JSON")?;
            Command::Case {
                name,
                json: json.to_string(),
            }
        }
        "assume" => {
            let rest = &line[after..];
            let trimmed = rest.trim_start();
            if trimmed.trim().is_empty() {
                return Err(usage("assume FORMULA"));
            }
            Command::Assume {
                source: trimmed.trim_end().to_string(),
                offset: after + rest.len() - trimmed.len(),
            }
        }
        "use" => match args {
            [name] => Command::Use { name: name.to_string() },
            _ => return Err(usage("use NAME")),
        },
        "load" => match args {
            [ns, name, path] => Command::Load {
                ns: Namespace::parse(ns).ok_or_else(|| usage("load sig|law|case NAME PATH"))?,
                name: name.to_string(),
                path: path.to_string(),
            },
            _ => return Err(usage("load sig|law|case NAME PATH")),
        },
        "list" if args.is_empty() => Command::List,
        "show" => match args {
            [name] => Command::Show {
                ns: None,
                name: name.to_string(),
            },
            [ns, name] => Command::Show {
                ns: Some(Namespace::parse(ns).ok_or_else(|| usage("show [sig|law|case] NAME"))?),
                name: name.to_string(),
            },
            _ => return Err(usage("show [sig|law|case] NAME")),
        },
        "check" => match args {
            [case, law] => Command::Check {
                case: case.to_string(),
                law: law.to_string(),
            },
            _ => return Err(usage("check CASE LAW")),
        },
        "consistent" | "valid" => {
            let form = format!("{head} LAW [bound N]");
            let Some((law, rest)) = args.split_first() else {
                return Err(usage(&form));
            };
            let bound = bound(rest, &form)?;
            let law = law.to_string();
            if head == "valid" {
                Command::Valid { law, bound }
            } else {
                Command::Consistent { law, bound }
            }
        }
        "implies" => {
            let form = "implies LAW PROP [bound N]";
            match args {
                [law, prop, rest @ ..] => Command::Implies {
                    law: law.to_string(),
                    prop: prop.to_string(),
                    bound: bound(rest, form)?,
                },
                _ => return Err(usage(form)),
            }
        }
        "audit" => {
            let form = "audit CASE protected=F score=G";
            match args {
                [case, a, b] => {
                    let (p, s) = match (key_value(a, "protected"), key_value(b, "score")) {
                        (Some(p), Some(s)) => (p, s),
                        _ => match (key_value(b, "protected"), key_value(a, "score")) {
                            (Some(p), Some(s)) => (p, s),
                            _ => return Err(usage(form)),
                        },
                    };
                    Command::Audit {
                        case: case.to_string(),
                        protected: p.to_string(),
                        score: s.to_string(),
                    }
                }
                _ => return Err(usage(form)),
            }
        }
        "retract" => match args {
            [k] => {
                let digits = k.strip_prefix('h').unwrap_or(k);
                match digits.parse::<u64>() {
                    Ok(id) => Command::Retract { id },
                    Err(_) => return Err(usage("retract K (a hypothesis number such as h1)")),
                }
            }
            _ => return Err(usage("retract K")),
        },
        "why" if args.is_empty() => Command::Why,
        "transcript" if args.is_empty() => Command::Transcript,
        "help" if args.is_empty() => Command::Help,
        "list" | "why" | "transcript" | "help" => {
            return Err(CommandError::Usage(format!("{head} takes no arguments")))
        }
        other => return Err(CommandError::Unknown(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn definitions_keep_offsets() {
        let line = "law toll =  forall x. Score(x) <= 5 ";
        let Command::Law { name, source, offset } = parse_command(line).unwrap() else {
            panic!()
        };
        assert_eq!(name, "toll");
        assert_eq!(source, "forall x. Score(x) <= 5");
        assert_eq!(&line[offset..offset + 6], "forall");
        let Command::Assume { source, offset } = parse_command("assume  G p").unwrap() else {
            panic!()
        };
        assert_eq!((source.as_str(), offset), ("G p", 8));
    }

    #[test]
    fn queries() {
        assert_eq!(
            parse_command("implies toll fair bound 3").unwrap(),
            Command::Implies {
                law: "toll".into(),
                prop: "fair".into(),
                bound: Some(3)
            }
        );
        assert_eq!(
            parse_command("audit m1 score=Score protected=NrOfPassports").unwrap(),
            Command::Audit {
                case: "m1".into(),
                protected: "NrOfPassports".into(),
                score: "Score".into()
            }
        );
        assert_eq!(parse_command("retract h2").unwrap(), Command::Retract { id: 2 });
        assert!(matches!(parse_command("consistent x bound 0"), Err(CommandError::Usage(_))));
        assert!(matches!(parse_command("frobnicate"), Err(CommandError::Unknown(_))));
        assert!(matches!(parse_command("law = p"), Err(CommandError::Usage(_))));
        assert!(matches!(parse_command("why\nwhy"), Err(CommandError::Usage(_))));
        assert!(matches!(parse_command("   "), Err(CommandError::Usage(_))));
    }
}
