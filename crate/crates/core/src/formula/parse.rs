//! S-expression reader for formulas.
//!
//! ```text
//! term    := x<i> | y<i> | a<i> | w<i> | <rational> | (+ term*) | (* term*)
//!          | (- term term*) | (exp term) | (sqrt <rational>)
//! formula := (< t t) | (<= t t) | (= t t) | (>= t t) | (> t t)
//!          | (and f*) | (or f*) | (not f)
//!          | (exists (w<i>*) f) | (forall (w<i>*) f)
//! ```

use super::{Atom, Block, Formula, Rel, SymConst, Term, Var};
use crate::rational::{self, Q};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnboundVariable(String),
    BlockMisuse(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (what, detail) = match &self.kind {
            ParseErrorKind::Syntax(s) => ("syntax error", s),
            ParseErrorKind::UnboundVariable(s) => ("unbound variable", s),
            ParseErrorKind::BlockMisuse(s) => ("block misuse", s),
        };
        write!(f, "{what} at {}:{}: {detail}", self.line, self.column)
    }
}

#[derive(Debug, Clone)]
enum Sexp {
    Symbol(String, Pos),
    List(Vec<Sexp>, Pos),
}

#[derive(Debug, Clone, Copy)]
struct Pos {
    line: usize,
    column: usize,
}

impl Sexp {
    fn pos(&self) -> Pos {
        match self {
            Sexp::Symbol(_, p) | Sexp::List(_, p) => *p,
        }
    }
}

fn err(kind: ParseErrorKind, p: Pos) -> ParseError {
    ParseError { kind, line: p.line, column: p.column }
}

fn syntax(msg: impl Into<String>, p: Pos) -> ParseError {
    err(ParseErrorKind::Syntax(msg.into()), p)
}

fn read(text: &str) -> Result<Sexp, ParseError> {
    let mut stack: Vec<(Vec<Sexp>, Pos)> = Vec::new();
    let mut top: Option<Sexp> = None;
    let (mut line, mut column) = (1usize, 0usize);
    let mut chars = text.chars().peekable();
    let push = |item: Sexp, stack: &mut Vec<(Vec<Sexp>, Pos)>, top: &mut Option<Sexp>| -> Result<(), ParseError> {
        match stack.last_mut() {
            Some((items, _)) => items.push(item),
            None if top.is_none() => *top = Some(item),
            None => return Err(syntax("trailing input after formula", item.pos())),
        }
        Ok(())
    };
    while let Some(c) = chars.next() {
        column += 1;
        let here = Pos { line, column };
        match c {
            '\n' => {
                line += 1;
                column = 0;
            }
            ';' => {
                // comment to end of line
                while let Some(&n) = chars.peek() {
                    if n == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            c if c.is_whitespace() => {}
            '(' => stack.push((Vec::new(), here)),
            ')' => {
                let (items, p) = stack.pop().ok_or_else(|| syntax("unbalanced `)`", here))?;
                push(Sexp::List(items, p), &mut stack, &mut top)?;
            }
            _ => {
                let mut sym = String::from(c);
                while let Some(&n) = chars.peek() {
                    if n.is_whitespace() || n == '(' || n == ')' || n == ';' {
                        break;
                    }
                    sym.push(n);
                    chars.next();
                    column += 1;
                }
                push(Sexp::Symbol(sym, here), &mut stack, &mut top)?;
            }
        }
    }
    if let Some((_, p)) = stack.pop() {
        return Err(syntax("unbalanced `(`", p));
    }
    top.ok_or_else(|| syntax("empty input", Pos { line, column }))
}

fn parse_var(sym: &str) -> Option<Var> {
    let mut cs = sym.chars();
    let block = match cs.next()? {
        'x' => Block::X,
        'y' => Block::Y,
        'a' => Block::A,
        'w' => Block::W,
        _ => return None,
    };
    let rest = cs.as_str();
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(Var::new(block, rest.parse().ok()?))
}

struct Parser {
    bound: Vec<usize>,
}

impl Parser {
    fn var(&self, sym: &str, p: Pos) -> Result<Option<Var>, ParseError> {
        match parse_var(sym) {
            Some(v) if v.block == Block::W && !self.bound.contains(&v.index) => {
                Err(err(ParseErrorKind::UnboundVariable(sym.to_string()), p))
            }
            other => Ok(other),
        }
    }

    fn rational(&self, s: &Sexp) -> Result<Q, ParseError> {
        match s {
            Sexp::Symbol(sym, p) => rational::parse_rational(sym).map_err(|e| syntax(e.to_string(), *p)),
            Sexp::List(_, p) => syntax_err("expected a rational literal", *p),
        }
    }

    fn term(&self, s: &Sexp) -> Result<Term, ParseError> {
        match s {
            Sexp::Symbol(sym, p) => {
                if let Some(v) = self.var(sym, *p)? {
                    return Ok(Term::Var(v));
                }
                rational::parse_rational(sym)
                    .map(Term::Const)
                    .map_err(|_| syntax(format!("unknown symbol `{sym}`"), *p))
            }
            Sexp::List(items, p) => {
                let (head, args) = split_head(items, *p)?;
                match head {
                    "+" => Ok(Term::Sum(args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)),
                    "*" => Ok(Term::Product(args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?)),
                    "-" => {
                        let ts: Vec<Term> = args.iter().map(|a| self.term(a)).collect::<Result<_, _>>()?;
                        match ts.len() {
                            0 => syntax_err("`-` needs at least one argument", *p),
                            1 => Ok(Term::neg(ts.into_iter().next().unwrap())),
                            _ => {
                                let mut it = ts.into_iter();
                                let mut parts = vec![it.next().unwrap()];
                                parts.extend(it.map(Term::neg));
                                Ok(Term::Sum(parts))
                            }
                        }
                    }
                    "exp" => {
                        let [arg] = args else { return syntax_err("`exp` takes one argument", *p) };
                        Ok(Term::exp(self.term(arg)?))
                    }
                    "sqrt" => {
                        let [arg] = args else { return syntax_err("`sqrt` takes one argument", *p) };
                        let q = self.rational(arg)?;
                        if q < Q::from_integer(0.into()) {
                            return syntax_err("`sqrt` of a negative constant", *p);
                        }
                        Ok(Term::Sym(SymConst::Sqrt(q)))
                    }
                    other => syntax_err(format!("unknown term operator `{other}`"), *p),
                }
            }
        }
    }

    fn formula(&mut self, s: &Sexp) -> Result<Formula, ParseError> {
        let Sexp::List(items, p) = s else {
            return syntax_err("expected a parenthesized formula", s.pos());
        };
        let p = *p;
        let (head, args) = split_head(items, p)?;
        let rel = match head {
            "<" => Some(Rel::Lt),
            "<=" => Some(Rel::Le),
            "=" => Some(Rel::Eq),
            ">=" => Some(Rel::Ge),
            ">" => Some(Rel::Gt),
            _ => None,
        };
        if let Some(rel) = rel {
            let [l, r] = args else {
                return syntax_err(format!("`{head}` takes exactly two terms"), p);
            };
            let (lhs, rhs) = (self.term(l)?, self.term(r)?);
            if rel == Rel::Eq {
                if let Some(a) = exp_graph(&lhs, &rhs).or_else(|| exp_graph(&rhs, &lhs)) {
                    return Ok(Formula::Atom(a));
                }
            }
            return Ok(Formula::cmp(lhs, rel, rhs));
        }
        match head {
            "and" => Ok(Formula::And(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
            "or" => Ok(Formula::Or(args.iter().map(|a| self.formula(a)).collect::<Result<_, _>>()?)),
            "not" => {
                let [f] = args else { return syntax_err("`not` takes one formula", p) };
                Ok(Formula::not(self.formula(f)?))
            }
            "exists" | "forall" => {
                let [vars, body] = args else {
                    return syntax_err(format!("`{head}` takes a variable list and a body"), p);
                };
                let Sexp::List(vs, vp) = vars else {
                    return syntax_err("expected a parenthesized variable list", vars.pos());
                };
                let mut idx = Vec::with_capacity(vs.len());
                for v in vs {
                    let Sexp::Symbol(sym, sp) = v else { return syntax_err("expected a variable", *vp) };
                    match parse_var(sym) {
                        Some(Var { block: Block::W, index }) => idx.push(index),
                        Some(_) => {
                            return Err(err(
                                ParseErrorKind::BlockMisuse(format!("cannot quantify `{sym}`; only w-variables bind")),
                                *sp,
                            ))
                        }
                        None => return syntax_err(format!("`{sym}` is not a variable"), *sp),
                    }
                }
                let n = self.bound.len();
                self.bound.extend(idx.iter().copied());
                let body = self.formula(body);
                self.bound.truncate(n);
                let body = Box::new(body?);
                Ok(if head == "exists" { Formula::Exists(idx, body) } else { Formula::ForAll(idx, body) })
            }
            other => syntax_err(format!("unknown connective `{other}`"), p),
        }
    }
}

fn exp_graph(lhs: &Term, rhs: &Term) -> Option<Atom> {
    match (lhs, rhs) {
        (Term::Var(l), Term::Exp(arg)) => match arg.as_ref() {
            Term::Var(r) => Some(Atom::ExpGraph { lhs: *l, rhs: *r }),
            _ => None,
        },
        _ => None,
    }
}

fn split_head(items: &[Sexp], p: Pos) -> Result<(&str, &[Sexp]), ParseError> {
    match items.split_first() {
        Some((Sexp::Symbol(h, _), rest)) => Ok((h.as_str(), rest)),
        Some((other, _)) => syntax_err("expected an operator", other.pos()),
        None => syntax_err("empty list", p),
    }
}

fn syntax_err<T>(msg: impl Into<String>, p: Pos) -> Result<T, ParseError> {
    Err(syntax(msg, p))
}

pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let sexp = read(text)?;
    Parser { bound: Vec::new() }.formula(&sexp)
}

/// Parses a standalone term (no bound witnesses in scope).
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let sexp = read(text)?;
    Parser { bound: Vec::new() }.term(&sexp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn halfspace_atom() {
        let f = parse("(>= (+ (* a0 x0) (* a1 x1)) a2)").unwrap();
        assert_eq!(
            f,
            Formula::ge(
                Term::Sum(vec![Term::mul(Term::a(0), Term::x(0)), Term::mul(Term::a(1), Term::x(1))]),
                Term::a(2)
            )
        );
        assert_eq!(f.block_dim(Block::X), 2);
        assert_eq!(f.block_dim(Block::A), 3);
    }

    #[test]
    fn exp_graph_atom() {
        let f = parse("(exists (w0 w1) (= w0 (exp w1)))").unwrap();
        let (_, body) = f.existential_prefix();
        assert_eq!(
            body,
            &Formula::exp_graph(Var::new(Block::W, 0), Var::new(Block::W, 1))
        );
        // Reversed sides normalize the same way.
        let g = parse("(exists (w0 w1) (= (exp w1) w0))").unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn empty_conjunction_under_exists() {
        let f = parse("(exists (w0) (and))").unwrap();
        assert_eq!(f, Formula::exists(vec![0], Formula::truth()));
    }

    #[test]
    fn literals_are_exact() {
        let f = parse("(<= x0 0.1)").unwrap();
        assert_eq!(f, Formula::le(Term::x(0), Term::Const(ratio(1, 10))));
        let g = parse("(<= x0 -3/4)").unwrap();
        assert_eq!(g, Formula::le(Term::x(0), Term::Const(ratio(-3, 4))));
        let s = parse("(<= x0 (sqrt 2))").unwrap();
        assert_eq!(s, Formula::le(Term::x(0), Term::Sym(SymConst::Sqrt(ratio(2, 1)))));
    }

    #[test]
    fn minus_sugar() {
        let f = parse("(<= (- x0 x1) 1)").unwrap();
        assert_eq!(f, Formula::le(Term::sub(Term::x(0), Term::x(1)), Term::one()));
    }

    #[test]
    fn error_positions() {
        let e = parse("(and\n  (<= x0 1)\n  (<= w3 1))").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnboundVariable("w3".into()));
        assert_eq!((e.line, e.column), (3, 7));

        let e = parse("(exists (x0) (<= x0 1))").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::BlockMisuse(_)));
        assert_eq!((e.line, e.column), (1, 10));

        let e = parse("(<= x0 1").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse("(<= x0 1 2)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        let e = parse("(foo x0)").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));

        assert!(parse("(<= x0 1) (<= x1 1)").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn comments_are_skipped() {
        let f = parse("; halfspace\n(>= x0 0) ; trailing").unwrap();
        assert_eq!(f, Formula::ge(Term::x(0), Term::zero()));
    }
}
