//! Existential normal form where exponentials only occur as `u = exp(v)`
//! atoms between variables.

use super::{Atom, Block, Formula, FormulaError, Fragment, Term, Var};
use std::collections::{BTreeMap, HashMap};

/// True when `f` is quantifier-free or an `exists` prefix over a
/// quantifier-free body, and no comparison atom contains `exp`.
pub fn is_graph_form(f: &Formula) -> bool {
    if f.fragment() == Fragment::General {
        return false;
    }
    f.atoms().iter().all(|a| match a {
        Atom::Compare { lhs, rhs, .. } => !lhs.contains_exp() && !rhs.contains_exp(),
        Atom::ExpGraph { .. } => true,
    })
}

/// Rewrites an existential formula into graph form. Existentials in
/// positive positions are pulled into one prefix; every distinct `exp(t)`
/// becomes a witness `u` with `u = exp(v)`, plus `v = t` when `t` is not
/// already a variable.
pub fn to_graph_form(f: &Formula) -> Result<Formula, FormulaError> {
    if is_graph_form(f) {
        return Ok(f.clone());
    }
    let mut next = f.block_dim(Block::W);
    let mut prefix = Vec::new();
    let body = lift(f, &BTreeMap::new(), &mut prefix, &mut next)?;

    let mut rw = ExpRewriter { next, memo: HashMap::new(), defs: Vec::new(), fresh: Vec::new() };
    let body = rw.formula(&body);
    prefix.extend(rw.fresh.iter().copied());

    if prefix.is_empty() && rw.defs.is_empty() {
        return Ok(body);
    }
    let mut parts = rw.defs;
    match body {
        Formula::And(fs) => parts.extend(fs),
        other => parts.push(other),
    }
    Ok(Formula::exists(prefix, Formula::And(parts)))
}

fn lift(
    f: &Formula,
    env: &BTreeMap<usize, usize>,
    prefix: &mut Vec<usize>,
    next: &mut usize,
) -> Result<Formula, FormulaError> {
    let renamed = |g: &Formula| {
        g.rename(&|v: Var| match (v.block, env.get(&v.index)) {
            (Block::W, Some(&j)) => Var::new(Block::W, j),
            _ => v,
        })
    };
    Ok(match f {
        Formula::Atom(_) => renamed(f),
        Formula::Not(g) => {
            if g.has_quantifier() {
                return Err(FormulaError::NotExistential("quantifier under negation"));
            }
            renamed(f)
        }
        Formula::And(gs) => Formula::And(gs.iter().map(|g| lift(g, env, prefix, next)).collect::<Result<_, _>>()?),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| lift(g, env, prefix, next)).collect::<Result<_, _>>()?),
        Formula::Exists(vs, g) => {
            let mut inner = env.clone();
            for &v in vs {
                let target = if prefix.contains(&v) {
                    let j = *next;
                    *next += 1;
                    j
                } else {
                    v
                };
                inner.insert(v, target);
                prefix.push(target);
            }
            lift(g, &inner, prefix, next)?
        }
        Formula::ForAll(..) => return Err(FormulaError::NotExistential("universal quantifier")),
    })
}

struct ExpRewriter {
    next: usize,
    memo: HashMap<Term, usize>,
    defs: Vec<Formula>,
    fresh: Vec<usize>,
}

impl ExpRewriter {
    fn fresh(&mut self) -> usize {
        let i = self.next;
        self.next += 1;
        self.fresh.push(i);
        i
    }

    fn formula(&mut self, f: &Formula) -> Formula {
        match f {
            Formula::Atom(Atom::Compare { lhs, rel, rhs }) => {
                if *rel == super::Rel::Eq {
                    if let (Term::Var(l), Term::Exp(arg)) | (Term::Exp(arg), Term::Var(l)) = (lhs, rhs) {
                        if let Term::Var(r) = arg.as_ref() {
                            return Formula::exp_graph(*l, *r);
                        }
                    }
                }
                Formula::cmp(self.term(lhs), *rel, self.term(rhs))
            }
            Formula::Atom(Atom::ExpGraph { .. }) => f.clone(),
            Formula::Not(g) => Formula::not(self.formula(g)),
            Formula::And(gs) => Formula::And(gs.iter().map(|g| self.formula(g)).collect()),
            Formula::Or(gs) => Formula::Or(gs.iter().map(|g| self.formula(g)).collect()),
            Formula::Exists(..) | Formula::ForAll(..) => unreachable!("quantifiers were lifted"),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        match t {
            Term::Var(_) | Term::Const(_) | Term::Sym(_) => t.clone(),
            Term::Sum(ts) => Term::Sum(ts.iter().map(|t| self.term(t)).collect()),
            Term::Product(ts) => Term::Product(ts.iter().map(|t| self.term(t)).collect()),
            Term::Exp(arg) => {
                let arg = self.term(arg);
                if let Some(&u) = self.memo.get(&arg) {
                    return Term::w(u);
                }
                let u = self.fresh();
                let v = match &arg {
                    Term::Var(v) => *v,
                    other => {
                        let v = self.fresh();
                        self.defs.push(Formula::eq(Term::w(v), other.clone()));
                        Var::new(Block::W, v)
                    }
                };
                self.defs.push(Formula::exp_graph(Var::new(Block::W, u), v));
                self.memo.insert(arg, u);
                Term::w(u)
            }
        }
    }
}
