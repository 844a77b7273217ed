//! First-order formulas over the reals with exponentiation.
//!
//! Variables live in four fixed blocks: `X` (inputs), `Y` (neighborhood
//! targets), `A` (parameters) and `W` (witnesses, the only quantifiable
//! block). Constants are exact rationals or named irrational constants.

mod complexity;
mod graph;
mod parse;
mod print;

pub use complexity::{complexity, ComplexityProfile};
pub use graph::{is_graph_form, to_graph_form};
pub use parse::{parse, parse_term, ParseError, ParseErrorKind};

use crate::interval::{self, Interval};
use crate::rational::{self, Q};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("formula is not existential: {0}")]
    NotExistential(&'static str),
    #[error("formula is not in graph form")]
    NotGraphForm,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    X,
    Y,
    A,
    W,
}

impl Block {
    pub fn prefix(self) -> char {
        match self {
            Block::X => 'x',
            Block::Y => 'y',
            Block::A => 'a',
            Block::W => 'w',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Var {
    pub block: Block,
    pub index: usize,
}

impl Var {
    pub fn new(block: Block, index: usize) -> Self {
        Var { block, index }
    }
}

/// Irrational constants with certified enclosures.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymConst {
    Sqrt(#[serde(with = "rational::serde_q")] Q),
}

impl SymConst {
    pub fn enclosure(&self, bits: u32) -> Interval {
        match self {
            SymConst::Sqrt(q) => interval::sqrt(q, bits),
        }
    }

    pub fn exact(&self) -> Option<Q> {
        match self {
            SymConst::Sqrt(q) => interval::exact_sqrt(q),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            SymConst::Sqrt(q) => rational::to_f64(q).sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Term {
    Var(Var),
    Const(#[serde(with = "rational::serde_q")] Q),
    Sym(SymConst),
    Sum(Vec<Term>),
    Product(Vec<Term>),
    Exp(Box<Term>),
}

impl Term {
    pub fn var(block: Block, index: usize) -> Term {
        Term::Var(Var::new(block, index))
    }
    pub fn x(i: usize) -> Term {
        Term::var(Block::X, i)
    }
    pub fn y(i: usize) -> Term {
        Term::var(Block::Y, i)
    }
    pub fn a(i: usize) -> Term {
        Term::var(Block::A, i)
    }
    pub fn w(i: usize) -> Term {
        Term::var(Block::W, i)
    }
    pub fn int(v: i64) -> Term {
        Term::Const(rational::int(v))
    }
    pub fn constant(q: Q) -> Term {
        Term::Const(q)
    }
    pub fn zero() -> Term {
        Term::Const(Q::zero())
    }
    pub fn one() -> Term {
        Term::Const(Q::one())
    }
    pub fn neg(t: Term) -> Term {
        Term::Product(vec![Term::int(-1), t])
    }
    pub fn sub(a: Term, b: Term) -> Term {
        Term::Sum(vec![a, Term::neg(b)])
    }
    pub fn mul(a: Term, b: Term) -> Term {
        Term::Product(vec![a, b])
    }
    pub fn square(t: Term) -> Term {
        Term::Product(vec![t.clone(), t])
    }
    pub fn exp(t: Term) -> Term {
        Term::Exp(Box::new(t))
    }

    /// Syntactic total degree; exponentials count as degree zero.
    pub fn degree(&self) -> u32 {
        match self {
            Term::Var(_) => 1,
            Term::Const(_) | Term::Sym(_) | Term::Exp(_) => 0,
            Term::Sum(ts) => ts.iter().map(Term::degree).max().unwrap_or(0),
            Term::Product(ts) => ts.iter().map(Term::degree).sum(),
        }
    }

    /// Degree in a single variable.
    pub fn degree_in(&self, v: Var) -> u32 {
        match self {
            Term::Var(u) => u32::from(*u == v),
            Term::Const(_) | Term::Sym(_) => 0,
            Term::Exp(t) => {
                if t.mentions(v) {
                    u32::MAX / 4
                } else {
                    0
                }
            }
            Term::Sum(ts) => ts.iter().map(|t| t.degree_in(v)).max().unwrap_or(0),
            Term::Product(ts) => ts.iter().map(|t| t.degree_in(v)).sum(),
        }
    }

    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Term::Var(u) => *u == v,
            Term::Const(_) | Term::Sym(_) => false,
            Term::Exp(t) => t.mentions(v),
            Term::Sum(ts) | Term::Product(ts) => ts.iter().any(|t| t.mentions(v)),
        }
    }

    pub fn contains_exp(&self) -> bool {
        match self {
            Term::Exp(_) => true,
            Term::Var(_) | Term::Const(_) | Term::Sym(_) => false,
            Term::Sum(ts) | Term::Product(ts) => ts.iter().any(Term::contains_exp),
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(*v);
            }
            Term::Const(_) | Term::Sym(_) => {}
            Term::Exp(t) => t.vars(out),
            Term::Sum(ts) | Term::Product(ts) => ts.iter().for_each(|t| t.vars(out)),
        }
    }

    pub fn map_vars(&self, f: &impl Fn(Var) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::Const(_) | Term::Sym(_) => self.clone(),
            Term::Exp(t) => Term::Exp(Box::new(t.map_vars(f))),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| t.map_vars(f)).collect()),
            Term::Product(ts) => Term::Product(ts.iter().map(|t| t.map_vars(f)).collect()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    pub fn holds(self, ord: std::cmp::Ordering) -> bool {
        use std::cmp::Ordering::*;
        match self {
            Rel::Lt => ord == Less,
            Rel::Le => ord != Greater,
            Rel::Eq => ord == Equal,
            Rel::Ge => ord != Less,
            Rel::Gt => ord == Greater,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Atom {
    Compare { lhs: Term, rel: Rel, rhs: Term },
    /// `lhs = exp(rhs)`.
    ExpGraph { lhs: Var, rhs: Var },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formula {
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    /// Binds the listed `W` indices.
    Exists(Vec<usize>, Box<Formula>),
    ForAll(Vec<usize>, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fragment {
    QuantifierFree,
    Existential,
    General,
}

impl Formula {
    pub fn cmp(lhs: Term, rel: Rel, rhs: Term) -> Formula {
        Formula::Atom(Atom::Compare { lhs, rel, rhs })
    }
    pub fn le(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, Rel::Le, rhs)
    }
    pub fn lt(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, Rel::Lt, rhs)
    }
    pub fn ge(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, Rel::Ge, rhs)
    }
    pub fn gt(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, Rel::Gt, rhs)
    }
    pub fn eq(lhs: Term, rhs: Term) -> Formula {
        Formula::cmp(lhs, Rel::Eq, rhs)
    }
    pub fn exp_graph(lhs: Var, rhs: Var) -> Formula {
        Formula::Atom(Atom::ExpGraph { lhs, rhs })
    }
    pub fn and(parts: Vec<Formula>) -> Formula {
        Formula::And(parts)
    }
    pub fn or(parts: Vec<Formula>) -> Formula {
        Formula::Or(parts)
    }
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }
    pub fn exists(vars: Vec<usize>, body: Formula) -> Formula {
        Formula::Exists(vars, Box::new(body))
    }
    pub fn truth() -> Formula {
        Formula::And(Vec::new())
    }
    pub fn falsity() -> Formula {
        Formula::Or(Vec::new())
    }

    pub fn has_quantifier(&self) -> bool {
        match self {
            Formula::Atom(_) => false,
            Formula::Not(f) => f.has_quantifier(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(Formula::has_quantifier),
            Formula::Exists(..) | Formula::ForAll(..) => true,
        }
    }

    pub fn fragment(&self) -> Fragment {
        classify_fragment(self)
    }

    /// Splits off the outermost chain of existential quantifiers.
    pub fn existential_prefix(&self) -> (Vec<usize>, &Formula) {
        let mut vars = Vec::new();
        let mut cur = self;
        while let Formula::Exists(vs, body) = cur {
            vars.extend(vs.iter().copied());
            cur = body;
        }
        (vars, cur)
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) | Formula::Exists(_, f) | Formula::ForAll(_, f) => f.collect_atoms(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_atoms(out)),
        }
    }

    /// Variables occurring free.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<usize>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(a) => {
                let mut vs = BTreeSet::new();
                atom_vars(a, &mut vs);
                for v in vs {
                    if !(v.block == Block::W && bound.contains(&v.index)) {
                        out.insert(v);
                    }
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_free(bound, out)),
            Formula::Exists(vs, f) | Formula::ForAll(vs, f) => {
                let n = bound.len();
                bound.extend(vs.iter().copied());
                f.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    /// All variables, bound or free.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        for a in self.atoms() {
            atom_vars(a, &mut out);
        }
        self.collect_binders(&mut out);
        out
    }

    fn collect_binders(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(_) => {}
            Formula::Not(f) => f.collect_binders(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_binders(out)),
            Formula::Exists(vs, f) | Formula::ForAll(vs, f) => {
                out.extend(vs.iter().map(|&i| Var::new(Block::W, i)));
                f.collect_binders(out);
            }
        }
    }

    /// Dimension of a block: one past the largest index used.
    pub fn block_dim(&self, block: Block) -> usize {
        self.all_vars().iter().filter(|v| v.block == block).map(|v| v.index + 1).max().unwrap_or(0)
    }

    pub fn contains_exp(&self) -> bool {
        self.atoms().iter().any(|a| match a {
            Atom::Compare { lhs, rhs, .. } => lhs.contains_exp() || rhs.contains_exp(),
            Atom::ExpGraph { .. } => true,
        })
    }

    /// Renames variables. `f` must map `W` variables to `W` variables so
    /// binders can be renamed consistently.
    pub fn rename(&self, f: &impl Fn(Var) -> Var) -> Formula {
        let tf = |v: Var| Term::Var(f(v));
        match self {
            Formula::Atom(Atom::Compare { lhs, rel, rhs }) => {
                Formula::cmp(lhs.map_vars(&tf), *rel, rhs.map_vars(&tf))
            }
            Formula::Atom(Atom::ExpGraph { lhs, rhs }) => Formula::exp_graph(f(*lhs), f(*rhs)),
            Formula::Not(g) => Formula::not(g.rename(f)),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.rename(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.rename(f)).collect()),
            Formula::Exists(vs, g) => Formula::Exists(rename_binders(vs, f), Box::new(g.rename(f))),
            Formula::ForAll(vs, g) => Formula::ForAll(rename_binders(vs, f), Box::new(g.rename(f))),
        }
    }

    /// Substitutes free occurrences of non-`W` variables by terms.
    /// Substituting into an `ExpGraph` side requires a variable image.
    pub fn substitute(&self, map: &BTreeMap<Var, Term>) -> Formula {
        let tf = |v: Var| map.get(&v).cloned().unwrap_or(Term::Var(v));
        match self {
            Formula::Atom(Atom::Compare { lhs, rel, rhs }) => {
                Formula::cmp(lhs.map_vars(&tf), *rel, rhs.map_vars(&tf))
            }
            Formula::Atom(Atom::ExpGraph { lhs, rhs }) => match (tf(*lhs), tf(*rhs)) {
                (Term::Var(l), Term::Var(r)) => Formula::exp_graph(l, r),
                (l, r) => Formula::eq(l, Term::exp(r)),
            },
            Formula::Not(g) => Formula::not(g.substitute(map)),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.substitute(map)).collect()),
            Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(g.substitute(map))),
            Formula::ForAll(vs, g) => Formula::ForAll(vs.clone(), Box::new(g.substitute(map))),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("formula serializes")
    }
}

fn rename_binders(vs: &[usize], f: &impl Fn(Var) -> Var) -> Vec<usize> {
    vs.iter()
        .map(|&i| {
            let v = f(Var::new(Block::W, i));
            assert_eq!(v.block, Block::W, "binder renamed out of the witness block");
            v.index
        })
        .collect()
}

pub fn atom_vars(a: &Atom, out: &mut BTreeSet<Var>) {
    match a {
        Atom::Compare { lhs, rhs, .. } => {
            lhs.vars(out);
            rhs.vars(out);
        }
        Atom::ExpGraph { lhs, rhs } => {
            out.insert(*lhs);
            out.insert(*rhs);
        }
    }
}

/// Quantifier-free, existential (only an outermost `exists` prefix), or
/// general.
pub fn classify_fragment(f: &Formula) -> Fragment {
    if !f.has_quantifier() {
        return Fragment::QuantifierFree;
    }
    let (_, body) = f.existential_prefix();
    if body.has_quantifier() {
        Fragment::General
    } else {
        Fragment::Existential
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fragments() {
        let half = parse("(>= (+ (* a0 x0) (* a1 x1)) a2)").unwrap();
        assert_eq!(classify_fragment(&half), Fragment::QuantifierFree);
        let ex = parse("(exists (w0) (and (>= w0 x0) (<= w0 1)))").unwrap();
        assert_eq!(classify_fragment(&ex), Fragment::Existential);
        let all = parse("(forall (w0) (>= (* w0 w0) 0))").unwrap();
        assert_eq!(classify_fragment(&all), Fragment::General);
        let nested = parse("(exists (w0) (exists (w1) (<= w0 w1)))").unwrap();
        assert_eq!(classify_fragment(&nested), Fragment::Existential);
        let inner = parse("(and (<= x0 1) (exists (w0) (<= w0 x0)))").unwrap();
        assert_eq!(classify_fragment(&inner), Fragment::General);
        let neg = parse("(not (exists (w0) (<= w0 x0)))").unwrap();
        assert_eq!(classify_fragment(&neg), Fragment::General);
    }

    #[test]
    fn free_vars_skip_bound_witnesses() {
        let f = parse("(exists (w0) (and (>= w0 x0) (<= w0 a1)))").unwrap();
        let fv: Vec<Var> = f.free_vars().into_iter().collect();
        assert_eq!(fv, vec![Var::new(Block::X, 0), Var::new(Block::A, 1)]);
        assert_eq!(f.block_dim(Block::A), 2);
        assert_eq!(f.block_dim(Block::W), 1);
    }

    #[test]
    fn degrees() {
        let t = Term::Sum(vec![Term::square(Term::x(0)), Term::mul(Term::x(1), Term::Sum(vec![Term::x(0), Term::one()]))]);
        assert_eq!(t.degree(), 2);
        assert_eq!(t.degree_in(Var::new(Block::X, 1)), 1);
        assert_eq!(Term::exp(Term::x(0)).degree(), 0);
    }
}
