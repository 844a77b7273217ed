use crate::formula::{Term, Var};
use crate::rational::Q;
use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;

trait SignExt {
    fn cmp_zero(self) -> Ordering;
}

impl SignExt for Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// Monomial as a sorted list of (variable, exponent).
pub type Monomial = Vec<(Var, u32)>;

/// Sparse polynomial with exact coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(pub BTreeMap<Monomial, Q>);

impl Poly {
    pub fn constant(q: Q) -> Poly {
        let mut m = BTreeMap::new();
        if !q.is_zero() {
            m.insert(Vec::new(), q);
        }
        Poly(m)
    }

    pub fn var(v: Var) -> Poly {
        Poly(BTreeMap::from([(vec![(v, 1)], Q::one())]))
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut m = self.0.clone();
        for (k, c) in &o.0 {
            let e = m.entry(k.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                m.remove(k);
            }
        }
        Poly(m)
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ka, ca) in &self.0 {
            for (kb, cb) in &o.0 {
                let mut mono: BTreeMap<Var, u32> = ka.iter().copied().collect();
                for &(v, e) in kb {
                    *mono.entry(v).or_insert(0) += e;
                }
                let term = Poly(BTreeMap::from([(mono.into_iter().collect(), ca * cb)]));
                out = out.add(&term);
            }
        }
        out
    }

    pub fn scale(&self, q: &Q) -> Poly {
        if q.is_zero() {
            return Poly::default();
        }
        Poly(self.0.iter().map(|(k, c)| (k.clone(), c * q)).collect())
    }

    /// Exact sign at a point, computed over a common integer denominator.
    /// `None` if some variable has no value.
    pub fn sign_at(&self, value: &dyn Fn(Var) -> Option<Q>) -> Option<Ordering> {
        let mut vals: BTreeMap<Var, (Q, u32)> = BTreeMap::new();
        for mono in self.0.keys() {
            for &(v, e) in mono {
                match vals.get_mut(&v) {
                    Some(slot) => slot.1 = slot.1.max(e),
                    None => {
                        vals.insert(v, (value(v)?, e));
                    }
                }
            }
        }
        let lcm = self.0.values().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
        let mut total = BigInt::zero();
        for (mono, c) in &self.0 {
            let mut t = c.numer() * (&lcm / c.denom());
            let mut k = 0;
            for (v, (q, emax)) in &vals {
                let e = loop {
                    match mono.get(k) {
                        Some(&(u, e)) if u == *v => {
                            k += 1;
                            break e;
                        }
                        _ => break 0,
                    }
                };
                if e > 0 {
                    t *= num_traits::pow(q.numer().clone(), e as usize);
                }
                if *emax > e {
                    t *= num_traits::pow(q.denom().clone(), (emax - e) as usize);
                }
            }
            total += t;
        }
        Some(total.sign().cmp_zero())
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(|m| m.iter().map(|&(_, e)| e).sum()).max().unwrap_or(0)
    }

    /// Expands a term without exponentials or irrational constants.
    pub fn from_term(t: &Term) -> Option<Poly> {
        Some(match t {
            Term::Var(v) => Poly::var(*v),
            Term::Const(q) => Poly::constant(q.clone()),
            Term::Sym(s) => Poly::constant(s.exact()?),
            Term::Exp(_) => return None,
            Term::Sum(ts) => {
                let mut acc = Poly::default();
                for t in ts {
                    acc = acc.add(&Poly::from_term(t)?);
                }
                acc
            }
            Term::Product(ts) => {
                let mut acc = Poly::constant(Q::one());
                for t in ts {
                    acc = acc.mul(&Poly::from_term(t)?);
                }
                acc
            }
        })
    }
}

/// `sum coeffs[v] * v + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinearForm {
    pub coeffs: BTreeMap<Var, Q>,
    pub constant: Q,
}

/// Linear normal form of a term, or `None` when it is not affine.
pub fn linear_form(t: &Term) -> Option<LinearForm> {
    let p = Poly::from_term(t)?;
    let mut out = LinearForm::default();
    for (mono, c) in p.0 {
        match mono.as_slice() {
            [] => out.constant = c,
            [(v, 1)] => {
                out.coeffs.insert(*v, c);
            }
            _ => return None,
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_term, Block};
    use crate::rational::int;

    #[test]
    fn affine_terms() {
        let f = linear_form(&parse_term("(+ (* 2 (- x0 y1)) 3 (* -1 x0))").unwrap()).unwrap();
        assert_eq!(f.constant, int(3));
        assert_eq!(f.coeffs[&Var::new(Block::X, 0)], int(1));
        assert_eq!(f.coeffs[&Var::new(Block::Y, 1)], int(-2));
        assert!(linear_form(&parse_term("(* x0 x1)").unwrap()).is_none());
        assert!(linear_form(&parse_term("(exp x0)").unwrap()).is_none());
    }

    #[test]
    fn integer_sign_matches_rational_value() {
        let t = parse_term("(+ (* 1/3 x0 x0 y0) (* -7/2 y0) 5/6)").unwrap();
        let p = Poly::from_term(&t).unwrap();
        for (a, b) in [((1, 2), (3, 7)), ((-5, 3), (2, 9)), ((0, 1), (5, 21)), ((3, 1), (1, 1))] {
            let x = crate::rational::ratio(a.0, a.1);
            let y = crate::rational::ratio(b.0, b.1);
            let direct = &x * &x * &y / int(3) - crate::rational::ratio(7, 2) * &y + crate::rational::ratio(5, 6);
            let got = p.sign_at(&|v| Some(if v.block == Block::X { x.clone() } else { y.clone() })).unwrap();
            assert_eq!(got, direct.cmp(&Q::zero()));
        }
    }

    #[test]
    fn cancellation_keeps_linear() {
        let t = parse_term("(+ (* x0 x0) (* -1 x0 x0) x1)").unwrap();
        assert!(linear_form(&t).is_some());
        assert_eq!(Poly::from_term(&t).unwrap().degree(), 1);
    }
}
