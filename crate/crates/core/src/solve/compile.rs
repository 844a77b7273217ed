use super::linear::Poly;
use super::SolveError;
use crate::formula::{Block, Term, Var};
use crate::rational::to_f64;
use std::collections::BTreeMap;
use std::fmt;

/// Assignment of variables to slots of a flat `f64` vector.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Layout {
    slots: BTreeMap<Var, usize>,
}

impl Layout {
    /// Consecutive slots for blocks in the given order.
    pub fn blocks(dims: &[(Block, usize)]) -> Layout {
        let mut l = Layout::default();
        for &(b, n) in dims {
            for i in 0..n {
                l.push(Var::new(b, i));
            }
        }
        l
    }

    pub fn push(&mut self, v: Var) -> usize {
        let next = self.slots.len();
        *self.slots.entry(v).or_insert(next)
    }

    pub fn slot(&self, v: Var) -> Option<usize> {
        self.slots.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

type Fun = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A term compiled to a float closure over a [`Layout`].
pub struct CompiledTerm(Fun);

impl CompiledTerm {
    #[inline]
    pub fn eval(&self, v: &[f64]) -> f64 {
        (self.0)(v)
    }
}

impl fmt::Debug for CompiledTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CompiledTerm")
    }
}

fn slot_of(layout: &Layout, v: Var) -> Result<usize, SolveError> {
    layout.slot(v).ok_or_else(|| SolveError::UnknownVariable(v.to_string()))
}

fn compile_poly(p: &Poly, layout: &Layout) -> Result<Fun, SolveError> {
    let mut constant = 0.0;
    let mut linear = Vec::new();
    let mut higher = Vec::new();
    for (mono, c) in &p.0 {
        let c = to_f64(c);
        match mono.as_slice() {
            [] => constant = c,
            [(v, 1)] => linear.push((slot_of(layout, *v)?, c)),
            _ => {
                let factors =
                    mono.iter().map(|&(v, e)| Ok((slot_of(layout, v)?, e as i32))).collect::<Result<Vec<_>, SolveError>>()?;
                higher.push((c, factors));
            }
        }
    }
    Ok(if higher.is_empty() {
        Box::new(move |x: &[f64]| linear.iter().fold(constant, |acc, &(i, c)| acc + c * x[i]))
    } else {
        Box::new(move |x: &[f64]| {
            let mut acc = linear.iter().fold(constant, |acc, &(i, c)| acc + c * x[i]);
            for (c, fs) in &higher {
                acc += fs.iter().fold(*c, |p, &(i, e)| p * x[i].powi(e));
            }
            acc
        })
    })
}

fn compile_tree(t: &Term, layout: &Layout) -> Result<Fun, SolveError> {
    if !t.contains_exp() {
        if let Some(p) = Poly::from_term(t) {
            return compile_poly(&p, layout);
        }
    }
    Ok(match t {
        Term::Var(v) => {
            let i = slot_of(layout, *v)?;
            Box::new(move |x: &[f64]| x[i])
        }
        Term::Const(q) => {
            let c = to_f64(q);
            Box::new(move |_: &[f64]| c)
        }
        Term::Sym(s) => {
            let c = s.to_f64();
            Box::new(move |_: &[f64]| c)
        }
        Term::Exp(a) => {
            let a = compile_tree(a, layout)?;
            Box::new(move |x: &[f64]| a(x).exp())
        }
        Term::Sum(ts) => {
            let fs = ts.iter().map(|t| compile_tree(t, layout)).collect::<Result<Vec<_>, _>>()?;
            Box::new(move |x: &[f64]| fs.iter().map(|f| f(x)).sum())
        }
        Term::Product(ts) => {
            let fs = ts.iter().map(|t| compile_tree(t, layout)).collect::<Result<Vec<_>, _>>()?;
            Box::new(move |x: &[f64]| fs.iter().map(|f| f(x)).product())
        }
    })
}

pub fn compile_term(t: &Term, layout: &Layout) -> Result<CompiledTerm, SolveError> {
    compile_tree(t, layout).map(CompiledTerm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_term;

    #[test]
    fn matches_direct_evaluation() {
        let layout = Layout::blocks(&[(Block::X, 2), (Block::A, 1)]);
        let t = parse_term("(+ (* a0 x0 x0) (exp (- x1 1)) (sqrt 2))").unwrap();
        let c = compile_term(&t, &layout).unwrap();
        let v = [1.5, 0.25, -2.0];
        let expect = -2.0 * 2.25 + (0.25f64 - 1.0).exp() + 2f64.sqrt();
        assert!((c.eval(&v) - expect).abs() < 1e-12);
    }

    #[test]
    fn unknown_variable() {
        let layout = Layout::blocks(&[(Block::X, 1)]);
        assert!(compile_term(&parse_term("x3").unwrap(), &layout).is_err());
    }
}
