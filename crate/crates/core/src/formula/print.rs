use std::fmt;

use super::Formula;

// Precedence levels: <-> 1, -> 2, | 3, & 4, prefix operators 5, atoms 6.
enum View<'a> {
    Iff(&'a Formula, &'a Formula),
    Imp(&'a Formula, &'a Formula),
    Or(&'a Formula, &'a Formula),
    And(&'a Formula, &'a Formula),
    Prefix(&'static str, &'a Formula),
    Atom,
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Formula::Not(inner) => match inner.as_ref() {
            Formula::Bot => View::Atom,
            Formula::Imp(l, r) => match (l.as_ref(), r.as_ref()) {
                (Formula::Imp(a, b), Formula::Not(back)) if matches!(back.as_ref(), Formula::Imp(b2, a2) if b2 == b && a2 == a) => {
                    View::Iff(a, b)
                }
                (a, Formula::Not(b)) => View::And(a, b),
                _ => View::Prefix("~", inner),
            },
            Formula::Nec(x) => match x.as_ref() {
                Formula::Not(y) => View::Prefix("<>", y),
                _ => View::Prefix("~", inner),
            },
            Formula::Actual(x) => match x.as_ref() {
                Formula::Not(y) => View::Prefix("<A>", y),
                _ => View::Prefix("~", inner),
            },
            Formula::Prev(x) => match x.as_ref() {
                Formula::Not(y) => View::Prefix("<P>", y),
                _ => View::Prefix("~", inner),
            },
            Formula::Hist(x) => match x.as_ref() {
                Formula::Not(y) => View::Prefix("P ", y),
                _ => View::Prefix("~", inner),
            },
            _ => View::Prefix("~", inner),
        },
        Formula::Imp(l, r) => match l.as_ref() {
            Formula::Not(a) => View::Or(a, r),
            _ => View::Imp(l, r),
        },
        Formula::Nec(x) => View::Prefix("[]", x),
        Formula::Actual(x) => View::Prefix("[A]", x),
        Formula::Prev(x) => View::Prefix("[P]", x),
        Formula::Hist(x) => View::Prefix("H ", x),
        _ => View::Atom,
    }
}

fn write_prec(f: &Formula, out: &mut fmt::Formatter<'_>, ctx: u8) -> fmt::Result {
    let v = view(f);
    let own = match v {
        View::Iff(..) => 1,
        View::Imp(..) => 2,
        View::Or(..) => 3,
        View::And(..) => 4,
        View::Prefix(..) => 5,
        View::Atom => 6,
    };
    let wrap = own < ctx;
    if wrap {
        write!(out, "(")?;
    }
    match v {
        View::Iff(a, b) => {
            write_prec(a, out, 2)?;
            write!(out, " <-> ")?;
            write_prec(b, out, 2)?;
        }
        View::Imp(a, b) => {
            write_prec(a, out, 3)?;
            write!(out, " -> ")?;
            write_prec(b, out, 2)?;
        }
        View::Or(a, b) => {
            write_prec(a, out, 3)?;
            write!(out, " | ")?;
            write_prec(b, out, 4)?;
        }
        View::And(a, b) => {
            write_prec(a, out, 4)?;
            write!(out, " & ")?;
            write_prec(b, out, 5)?;
        }
        View::Prefix(op, x) => {
            write!(out, "{op}")?;
            write_prec(x, out, 5)?;
        }
        View::Atom => match f {
            Formula::Var(k) => write!(out, "p{k}")?,
            Formula::Act { action, agent } => write!(out, "dw{}@a{}", action + 1, agent + 1)?,
            Formula::Exp(agent) => write!(out, "e@a{}", agent + 1)?,
            Formula::Bot => write!(out, "false")?,
            Formula::Not(_) => write!(out, "true")?,
            Formula::Macro(m) => write!(out, "{m}")?,
            _ => unreachable!(),
        },
    }
    if wrap {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, f, 0)
    }
}
