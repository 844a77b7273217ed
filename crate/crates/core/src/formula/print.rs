use super::{Atom, Formula, SymConst, Term, Var};
use crate::rational::format_rational;
use std::fmt;

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.block.prefix(), self.index)
    }
}

impl fmt::Display for SymConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymConst::Sqrt(q) => write!(f, "(sqrt {})", format_rational(q)),
        }
    }
}

fn list<T: fmt::Display>(f: &mut fmt::Formatter<'_>, head: &str, items: &[T]) -> fmt::Result {
    write!(f, "({head}")?;
    for it in items {
        write!(f, " {it}")?;
    }
    write!(f, ")")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(q) => write!(f, "{}", format_rational(q)),
            Term::Sym(s) => write!(f, "{s}"),
            Term::Sum(ts) => list(f, "+", ts),
            Term::Product(ts) => list(f, "*", ts),
            Term::Exp(t) => write!(f, "(exp {t})"),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Compare { lhs, rel, rhs } => write!(f, "({} {lhs} {rhs})", rel.symbol()),
            Atom::ExpGraph { lhs, rhs } => write!(f, "(= {lhs} (exp {rhs}))"),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(not {g})"),
            Formula::And(gs) => list(f, "and", gs),
            Formula::Or(gs) => list(f, "or", gs),
            Formula::Exists(vs, g) | Formula::ForAll(vs, g) => {
                let head = if matches!(self, Formula::Exists(..)) { "exists" } else { "forall" };
                write!(f, "({head} (")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "w{v}")?;
                }
                write!(f, ") {g})")
            }
        }
    }
}
