use std::fs;
use std::path::PathBuf;

use lexdialog_cli::run;
use lexdialog_core::{Reply, ReplyBody, Session, Status};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn lexdialog(args: &[&str]) -> Run {
    lexdialog_with_input(args, "")
}

fn lexdialog_with_input(args: &[&str], input: &str) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lexdialog").chain(args.iter().copied());
    let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

#[test]
fn audit_finds_the_biased_pair() {
    let (case, sig) = (data("m1.case"), data("syri.sig"));
    let r = lexdialog(&["audit", &case, "--sig", &sig, "--protected", "NrOfPassports", "--score", "Score"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("Biased"), "{}", r.out);
    assert!(r.out.contains("(a, b)"), "{}", r.out);

    let r = lexdialog(&["audit", &case, "--sig", &sig, "--protected", "NrOfPassports", "--score", "Score", "--strict"]);
    assert_eq!(r.code, 2);
}

#[test]
fn reflexive_implication_is_valid() {
    let (law, sig) = (data("toll.law"), data("syri.sig"));
    let r = lexdialog(&["implies", &law, &law, "--sig", &sig]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("implies toll toll: Valid"), "{}", r.out);
}

#[test]
fn missing_files_are_named() {
    let r = lexdialog(&["check", "missing.case", "l.law"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("missing.case"), "{}", r.err);
    let law = data("toll.law");
    let r = lexdialog(&["check", &data("m1.case"), &law, "--sig", "nowhere.sig"]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("nowhere.sig"), "{}", r.err);
}

#[test]
fn check_reports_witness_and_strict_exit() {
    let args = ["check", &data("m1.case"), &data("nondiscrimination.law"), "--sig", &data("syri.sig")];
    let r = lexdialog(&args);
    assert_eq!(r.code, 0);
    assert!(r.out.starts_with("check m1 nondiscrimination: Fails, witness {x = a, y = b}"), "{}", r.out);
    let mut strict = args.to_vec();
    strict.push("--strict");
    assert_eq!(lexdialog(&strict).code, 2);
    let r = lexdialog(&["check", &data("shift.trace"), &data("rested.law"), "--sig", &data("driving.sig"), "--strict"]);
    assert_eq!(r.code, 2, "{}", r.out);
    assert!(r.out.contains("violated at position 2"), "{}", r.out);
}

#[test]
fn parse_errors_carry_file_and_position() {
    let dir = tempfile::tempdir().unwrap();
    let law = dir.path().join("bad.law");
    fs::write(&law, "forall x.\n  Score(x) <= Nope(x)\n").unwrap();
    let r = lexdialog(&["consistent", law.to_str().unwrap(), "--sig", &data("syri.sig")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("bad.law:2:"), "{}", r.err);
    assert!(r.err.contains("Nope"), "{}", r.err);
}

#[test]
fn data_errors_carry_the_json_path() {
    let dir = tempfile::tempdir().unwrap();
    let case = dir.path().join("over.case");
    fs::write(
        &case,
        r#"{"individuals": ["a"], "predicates": {"Employed": []}, "functions": {"NrOfPassports": {"a": 9}, "Score": {"a": 0}}}"#,
    )
    .unwrap();
    let r = lexdialog(&["check", case.to_str().unwrap(), &data("toll.law"), "--sig", &data("syri.sig")]);
    assert_eq!(r.code, 1);
    assert!(r.err.contains("/functions/NrOfPassports/a"), "{}", r.err);
}

#[test]
fn json_output_round_trips() {
    let args = ["implies", &data("toll.law"), &data("nondiscrimination.law"), "--sig", &data("syri.sig"), "--json"];
    let r = lexdialog(&args);
    assert_eq!(r.code, 0, "{}", r.err);
    let reply: Reply = serde_json::from_str(r.out.trim()).unwrap();
    let ReplyBody::Decision(d) = &reply.body else { panic!("{reply:?}") };
    assert_eq!(d.result.status, Status::InvalidWithCounterexample);

    // Same reply as a dialogue session in the same state.
    let mut s = Session::new();
    for c in [
        format!("load sig syri {}", data("syri.sig")),
        format!("load law toll {}", data("toll.law")),
        format!("load law nondiscrimination {}", data("nondiscrimination.law")),
    ] {
        assert!(!s.execute_mut(&c).is_error());
    }
    assert_eq!(s.execute_mut("implies toll nondiscrimination"), reply);
}

#[test]
fn bound_and_budget_flags() {
    let (law, sig) = (data("nondiscrimination.law"), data("syri.sig"));
    let r = lexdialog(&["valid", &law, "--sig", &sig, "--bound", "1"]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("valid nondiscrimination: ValidUpToBound (domains up to 1)"), "{}", r.out);

    let r = lexdialog(&["valid", &law, "--sig", &sig, "--budget", "5"]);
    assert_eq!(r.code, 3, "{} {}", r.out, r.err);
    assert!(r.err.contains("resource limit"), "{}", r.err);

    assert_eq!(lexdialog(&["valid", &law, "--sig", &sig, "--bound", "0"]).code, 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lexdialog(&[]).code, 1);
    assert_eq!(lexdialog(&["frobnicate"]).code, 1);
    assert_eq!(lexdialog(&["consistent", &data("toll.law")]).code, 1);
    let r = lexdialog(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("repl"));
}

#[test]
fn repl_runs_a_dialogue_and_writes_the_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let transcript = dir.path().join("session.txt");
    let input = format!(
        "load law toll {}\nlaw cap = forall x. Score(x) <= 7\nimplies toll cap\nimplies cap toll\nwhy\nbogus\n\nquit\nlist\n",
        data("toll.law")
    );
    let r = lexdialog_with_input(
        &["repl", "--sig", &data("syri.sig"), "--transcript", transcript.to_str().unwrap()],
        &input,
    );
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("implies toll cap: Valid"), "{}", r.out);
    assert!(r.out.contains("implies cap toll: InvalidWithCounterexample"), "{}", r.out);
    assert!(r.out.contains("unknown command"), "{}", r.out);
    let text = fs::read_to_string(&transcript).unwrap();
    // Everything before `quit`, including the signature the flag loaded.
    assert_eq!(Session::transcript_commands(&text).len(), 7);
    let replayed = Session::replay(&text, Default::default()).transcript();
    assert_eq!(replayed, text);
}

#[test]
fn temporal_verbs() {
    let sig = data("driving.sig");
    let r = lexdialog(&["implies", &data("rested.law"), &data("strict.law"), "--sig", &sig]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("InvalidWithCounterexample"), "{}", r.out);
    assert!(r.out.contains("0: {drive, rest}"), "{}", r.out);
    let r = lexdialog(&["consistent", &data("strict.law"), "--sig", &sig, "--strict"]);
    assert_eq!(r.code, 0, "{}", r.out);
    // Relational law under a temporal signature.
    let r = lexdialog(&["consistent", &data("toll.law"), "--sig", &sig]);
    assert_eq!(r.code, 1);
}
