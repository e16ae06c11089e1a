//! Canonical concrete syntax with the fewest parentheses the grammar allows.

use crate::formula::{Formula, FormulaKind, Term};

const IFF: u8 = 1;
const IMPLIES: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const UNTIL: u8 = 5;
const UNARY: u8 = 6;
const ATOM: u8 = 7;

fn precedence(f: &Formula) -> u8 {
    use FormulaKind::*;
    match &f.kind {
        Iff(..) => IFF,
        Implies(..) => IMPLIES,
        Or(..) => OR,
        And(..) => AND,
        Until(..) | Release(..) => UNTIL,
        Not(_) | Next(_) | WeakNext(_) | Eventually(_) | Globally(_) => UNARY,
        // Quantifiers are handled separately: their body runs to the right edge.
        Forall { .. } | Exists { .. } => 0,
        True | False | Pred { .. } | Cmp { .. } | SameExcept { .. } | Atom(_) => ATOM,
    }
}

/// Renders `f` so that parsing the result yields a structurally equal formula.
pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0, true);
    out
}

pub(crate) fn render_term(t: &Term) -> String {
    match t {
        Term::Var(v) => v.clone(),
        Term::Int(i) => i.to_string(),
        Term::App { func, var } => format!("{func}({var})"),
    }
}

/// `context` is the minimum precedence the position accepts without
/// parentheses; `rightmost` says nothing follows this subformula, which is
/// what lets a quantifier go unparenthesized.
fn write_formula(out: &mut String, f: &Formula, context: u8, rightmost: bool) {
    let quantifier = matches!(f.kind, FormulaKind::Forall { .. } | FormulaKind::Exists { .. });
    let needs_parens = if quantifier {
        !rightmost
    } else {
        precedence(f) < context
    };
    if needs_parens {
        out.push('(');
        write_bare(out, f, true);
        out.push(')');
    } else {
        write_bare(out, f, rightmost);
    }
}

fn write_bare(out: &mut String, f: &Formula, rightmost: bool) {
    use FormulaKind::*;
    let binary = |out: &mut String, a: &Formula, op: &str, b: &Formula, prec: u8, right_assoc: bool| {
        let (lc, rc) = if right_assoc { (prec + 1, prec) } else { (prec, prec + 1) };
        write_formula(out, a, lc, false);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        write_formula(out, b, rc, rightmost);
    };
    match &f.kind {
        True => out.push_str("true"),
        False => out.push_str("false"),
        Atom(a) => out.push_str(a),
        Pred { name, var } => {
            out.push_str(name);
            out.push('(');
            out.push_str(var);
            out.push(')');
        }
        Cmp { lhs, op, rhs } => {
            out.push_str(&render_term(lhs));
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            out.push_str(&render_term(rhs));
        }
        SameExcept { left, right, excluded } => {
            out.push_str(&format!("same({left}, {right})"));
            if !excluded.is_empty() {
                out.push_str(" except ");
                out.push_str(&excluded.join(", "));
            }
        }
        Not(a) => {
            out.push('!');
            write_formula(out, a, UNARY, rightmost);
        }
        Next(a) | WeakNext(a) | Eventually(a) | Globally(a) => {
            out.push_str(match &f.kind {
                Next(_) => "X ",
                WeakNext(_) => "N ",
                Eventually(_) => "F ",
                _ => "G ",
            });
            write_formula(out, a, UNARY, rightmost);
        }
        Forall { var, body } | Exists { var, body } => {
            out.push_str(if matches!(f.kind, Forall { .. }) { "forall " } else { "exists " });
            out.push_str(var);
            out.push_str(". ");
            write_formula(out, body, 0, rightmost);
        }
        And(a, b) => binary(out, a, "&", b, AND, false),
        Or(a, b) => binary(out, a, "|", b, OR, false),
        Iff(a, b) => binary(out, a, "<->", b, IFF, false),
        Implies(a, b) => binary(out, a, "->", b, IMPLIES, true),
        Until(a, b) => binary(out, a, "U", b, UNTIL, true),
        Release(a, b) => binary(out, a, "R", b, UNTIL, true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::CmpOp;
    use crate::parser::parse;
    use crate::signature::{Range, Signature};

    fn p() -> Formula {
        Formula::atom("p")
    }

    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(render(&Formula::implies(p(), p())), "p -> p");
        let sig = Signature::temporal(["p", "q"]).unwrap();
        assert_eq!(render(&parse("((p))", &sig).unwrap()), "p");
        assert_eq!(render(&Formula::not(Formula::and(p(), q()))), "!(p & q)");
        assert_eq!(render(&Formula::and(p(), Formula::and(q(), p()))), "p & (q & p)");
        assert_eq!(render(&Formula::and(Formula::and(p(), q()), p())), "p & q & p");
        assert_eq!(
            render(&Formula::implies(Formula::implies(p(), q()), p())),
            "(p -> q) -> p"
        );
        assert_eq!(render(&Formula::eventually(Formula::until(p(), q()))), "F (p U q)");
        assert_eq!(render(&Formula::weak_next(Formula::not(p()))), "N !p");
    }

    #[test]
    fn quantifiers_are_parenthesized_unless_rightmost() {
        let sig = Signature::relational(["P", "Q"], [("f", Range::new(0, 1))]).unwrap();
        let all_p = Formula::forall("x", Formula::pred("P", "x"));
        let f = Formula::and(all_p.clone(), Formula::exists("y", Formula::pred("Q", "y")));
        assert_eq!(render(&f), "(forall x. P(x)) & exists y. Q(y)");
        let g = Formula::and(Formula::and(Formula::truth(), all_p.clone()), Formula::falsity());
        assert_eq!(render(&g), "true & (forall x. P(x)) & false");
        let h = Formula::not(all_p);
        assert_eq!(render(&h), "!forall x. P(x)");
        for f in [f, g, h] {
            assert_eq!(parse(&render(&f), &sig).unwrap(), f);
        }
        let c = Formula::exists("x", Formula::cmp(Term::app("f", "x"), CmpOp::Ge, Term::Int(-1)));
        assert_eq!(render(&c), "exists x. f(x) >= -1");
    }

    #[test]
    fn same_except_prints_as_written() {
        let f = Formula::forall(
            "x",
            Formula::forall("y", Formula::same_except("x", "y", ["b", "a"])),
        );
        assert_eq!(render(&f), "forall x. forall y. same(x, y) except b, a");
        let g = Formula::forall("x", Formula::same_except("x", "x", Vec::<String>::new()));
        assert_eq!(render(&g), "forall x. same(x, x)");
    }
}
