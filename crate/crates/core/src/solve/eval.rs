use super::linear::Poly;
use super::{Assignment, SolveError};
use crate::formula::{Atom, Formula, Rel, Term};
use crate::interval::{self, Interval};
use crate::rational::Q;
use num_traits::{One, Zero};
use std::cmp::Ordering;

/// Precision schedule for certified comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { start_bits: 64, max_bits: 4096 }
    }
}

/// A term value: exact when no irrational quantity was involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Exact(Q),
    Approx(Interval),
}

impl Value {
    pub fn enclosure(&self) -> Interval {
        match self {
            Value::Exact(q) => Interval::point(q.clone()),
            Value::Approx(i) => i.clone(),
        }
    }

    fn add(self, o: Value, bits: u32) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (a, b) => Value::Approx(a.enclosure().add(&b.enclosure()).round_out(bits)),
        }
    }

    fn mul(self, o: Value, bits: u32) -> Value {
        match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            (Value::Exact(a), Value::Approx(i)) | (Value::Approx(i), Value::Exact(a)) => {
                if a.is_zero() {
                    Value::Exact(a)
                } else {
                    Value::Approx(i.scale(&a).round_out(bits))
                }
            }
            (Value::Approx(i), Value::Approx(j)) => Value::Approx(i.mul(&j).round_out(bits)),
        }
    }

    /// Sign of the value, if the enclosure decides it.
    fn cmp_zero(&self) -> Option<Ordering> {
        match self {
            Value::Exact(q) => Some(q.cmp(&Q::zero())),
            Value::Approx(i) => match i.cmp_q(&Q::zero()) {
                Some(Ordering::Equal) => None,
                other => other,
            },
        }
    }
}

/// Evaluates a term at the given working precision.
pub fn eval_term(t: &Term, sigma: &Assignment, bits: u32) -> Result<Value, SolveError> {
    Ok(match t {
        Term::Var(v) => Value::Exact(sigma.get(*v).cloned().ok_or_else(|| SolveError::Unassigned(v.to_string()))?),
        Term::Const(q) => Value::Exact(q.clone()),
        Term::Sym(s) => match s.exact() {
            Some(q) => Value::Exact(q),
            None => Value::Approx(s.enclosure(bits)),
        },
        Term::Sum(ts) => {
            let mut acc = Value::Exact(Q::zero());
            for t in ts {
                acc = acc.add(eval_term(t, sigma, bits)?, bits);
            }
            acc
        }
        Term::Product(ts) => {
            let mut acc = Value::Exact(Q::one());
            for t in ts {
                acc = acc.mul(eval_term(t, sigma, bits)?, bits);
            }
            acc
        }
        Term::Exp(arg) => match eval_term(arg, sigma, bits)? {
            // exp of a nonzero rational is irrational, so only exp(0) is exact.
            Value::Exact(q) if q.is_zero() => Value::Exact(Q::one()),
            Value::Exact(q) => Value::Approx(interval::exp(&q, bits)),
            Value::Approx(i) => Value::Approx(interval::exp_interval(&i, bits)),
        },
    })
}

fn decide_atom(a: &Atom, sigma: &Assignment, cfg: EvalConfig) -> Result<bool, SolveError> {
    match a {
        Atom::ExpGraph { lhs, rhs } => {
            let u = sigma.get(*lhs).ok_or_else(|| SolveError::Unassigned(lhs.to_string()))?;
            let v = sigma.get(*rhs).ok_or_else(|| SolveError::Unassigned(rhs.to_string()))?;
            // With rational values, u = exp(v) forces v = 0 and u = 1.
            Ok(v.is_zero() && u.is_one())
        }
        Atom::Compare { lhs, rel, rhs } => {
            // Identical sides are equal even when neither is computable exactly.
            if lhs == rhs {
                return Ok(matches!(rel, Rel::Le | Rel::Eq | Rel::Ge));
            }
            let diff = Term::Sum(vec![lhs.clone(), Term::neg(rhs.clone())]);
            if !diff.contains_exp() {
                if let Some(p) = Poly::from_term(&diff) {
                    let ord = p.sign_at(&|v| sigma.get(v).cloned()).ok_or_else(|| {
                        let missing = p.0.keys().flatten().find(|(v, _)| sigma.get(*v).is_none());
                        SolveError::Unassigned(missing.map(|(v, _)| v.to_string()).unwrap_or_default())
                    })?;
                    return Ok(rel.holds(ord));
                }
            }
            let mut bits = cfg.start_bits;
            loop {
                let v = eval_term(&diff, sigma, bits)?;
                if let Some(ord) = v.cmp_zero() {
                    return Ok(rel.holds(ord));
                }
                // An enclosure straddling zero still decides non-strict
                // inequalities in one direction only when it is one-sided.
                if let Value::Approx(i) = &v {
                    let z = Q::zero();
                    if *rel == Rel::Le && i.hi <= z || *rel == Rel::Ge && i.lo >= z {
                        return Ok(true);
                    }
                }
                if bits >= cfg.max_bits {
                    return Err(SolveError::Undecided { atom: a.to_string(), bits });
                }
                bits = (bits * 2).min(cfg.max_bits);
            }
        }
    }
}

/// Exact truth value of a quantifier-free formula.
pub fn eval_qf(f: &Formula, sigma: &Assignment) -> Result<bool, SolveError> {
    eval_qf_with(f, sigma, EvalConfig::default())
}

pub fn eval_qf_with(f: &Formula, sigma: &Assignment, cfg: EvalConfig) -> Result<bool, SolveError> {
    match f {
        Formula::Atom(a) => decide_atom(a, sigma, cfg),
        Formula::Not(g) => Ok(!eval_qf_with(g, sigma, cfg)?),
        Formula::And(gs) => {
            for g in gs {
                if !eval_qf_with(g, sigma, cfg)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_qf_with(g, sigma, cfg)? {
                    return Ok(true);
                }
            }
            Ok(false)
        }
        Formula::Exists(..) | Formula::ForAll(..) => Err(SolveError::NotQuantifierFree),
    }
}

/// Float evaluation of a term; `None` if a variable is missing.
pub fn eval_term_f64(t: &Term, value: &dyn Fn(crate::formula::Var) -> Option<f64>) -> Option<f64> {
    Some(match t {
        Term::Var(v) => value(*v)?,
        Term::Const(q) => crate::rational::to_f64(q),
        Term::Sym(s) => s.to_f64(),
        Term::Sum(ts) => ts.iter().map(|t| eval_term_f64(t, value)).sum::<Option<f64>>()?,
        Term::Product(ts) => ts.iter().map(|t| eval_term_f64(t, value)).product::<Option<f64>>()?,
        Term::Exp(a) => eval_term_f64(a, value)?.exp(),
    })
}

/// Float truth value with tolerance `tol`: equalities hold when
/// `|lhs - rhs| <= tol`, non-strict inequalities are relaxed by `tol`, strict ones are not. Meant for
/// checking formulas against numerically completed witnesses.
pub fn eval_qf_f64(f: &Formula, value: &dyn Fn(crate::formula::Var) -> Option<f64>, tol: f64) -> Option<bool> {
    Some(match f {
        Formula::Atom(Atom::ExpGraph { lhs, rhs }) => (value(*lhs)? - value(*rhs)?.exp()).abs() <= tol,
        Formula::Atom(Atom::Compare { lhs, rel, rhs }) => {
            let d = eval_term_f64(lhs, value)? - eval_term_f64(rhs, value)?;
            match rel {
                Rel::Lt => d < 0.0,
                Rel::Le => d <= tol,
                Rel::Eq => d.abs() <= tol,
                Rel::Ge => d >= -tol,
                Rel::Gt => d > 0.0,
            }
        }
        Formula::Not(g) => !eval_qf_f64(g, value, tol)?,
        Formula::And(gs) => {
            for g in gs {
                if !eval_qf_f64(g, value, tol)? {
                    return Some(false);
                }
            }
            true
        }
        Formula::Or(gs) => {
            for g in gs {
                if eval_qf_f64(g, value, tol)? {
                    return Some(true);
                }
            }
            false
        }
        Formula::Exists(..) | Formula::ForAll(..) => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, Block, Var};
    use crate::rational::{int, ratio};

    #[test]
    fn halfspace_example() {
        let f = parse("(>= (+ (* a0 x0) (* a1 x1)) a2)").unwrap();
        let s = Assignment::new().with_x(vec![int(1), int(0)]).with_a(vec![int(1), int(1), int(1)]);
        assert!(eval_qf(&f, &s).unwrap());
    }

    #[test]
    fn ball_example() {
        let f = parse("(<= (+ (* (- x0 y0) (- x0 y0)) (* (- x1 y1) (- x1 y1))) 1)").unwrap();
        let s = Assignment::new().with_x(vec![int(0), int(0)]).with_y(vec![int(1), int(1)]);
        assert!(!eval_qf(&f, &s).unwrap());
    }

    #[test]
    fn exp_graph_atoms() {
        let f = Formula::exp_graph(Var::new(Block::W, 0), Var::new(Block::W, 1));
        assert!(eval_qf(&f, &Assignment::new().with_w(vec![int(1), int(0)])).unwrap());
        assert!(!eval_qf(&f, &Assignment::new().with_w(vec![int(3), int(1)])).unwrap());
    }

    #[test]
    fn certified_irrational_comparisons() {
        let sigma = Assignment::new().with_x(vec![ratio(141421, 100000)]);
        assert!(eval_qf(&parse("(< x0 (sqrt 2))").unwrap(), &sigma).unwrap());
        let e = Assignment::new().with_x(vec![int(1)]);
        assert!(eval_qf(&parse("(< (exp x0) 2.7182818284590453)").unwrap(), &e).unwrap());
        assert!(eval_qf(&parse("(> (exp x0) 2.7182818284590452)").unwrap(), &e).unwrap());
        assert!(eval_qf(&parse("(= (* (sqrt 2) (sqrt 2)) 2)").unwrap(), &e).is_err());
        assert!(eval_qf(&parse("(= (exp (+ x0 -1)) 1)").unwrap(), &e).unwrap());
    }

    #[test]
    fn quantifiers_rejected() {
        let f = parse("(exists (w0) (<= w0 x0))").unwrap();
        assert_eq!(eval_qf(&f, &Assignment::new()), Err(SolveError::NotQuantifierFree));
    }
}
