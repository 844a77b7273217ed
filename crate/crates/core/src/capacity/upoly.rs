//! Dense univariate polynomials over Q with Sturm-sequence root isolation.

use crate::rational::Q;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Coefficients in ascending order, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly(Vec<Q>);

impl UPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, x: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * x + c)
    }

    pub fn sign_at(&self, x: &Q) -> Ordering {
        self.eval(x).cmp(&Q::zero())
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * Q::from_integer((i as i64).into())).collect())
    }

    pub fn mul(&self, o: &UPoly) -> UPoly {
        if self.is_zero() || o.is_zero() {
            return UPoly(Vec::new());
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly::new(out)
    }

    fn neg(&self) -> UPoly {
        UPoly(self.0.iter().map(|c| -c).collect())
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.0.clone();
        let dl = d.lead();
        let dd = d.degree();
        let mut q = vec![Q::zero(); self.0.len().saturating_sub(dd).max(1)];
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let c = r.last().unwrap() / &dl;
            for (i, dc) in d.0.iter().enumerate() {
                r[shift + i] -= &c * dc;
            }
            q[shift] = c;
            r.pop();
            while r.last().is_some_and(|c| c.is_zero()) {
                r.pop();
            }
        }
        (UPoly::new(q), UPoly::new(r))
    }

    fn monic(&self) -> UPoly {
        let l = self.lead();
        UPoly(self.0.iter().map(|c| c / &l).collect())
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(&self, o: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }

    /// `p / gcd(p, p')`: same roots, all simple.
    pub fn squarefree(&self) -> UPoly {
        if self.degree() == 0 {
            return self.clone();
        }
        self.div_rem(&self.gcd(&self.derivative())).0.monic()
    }

    fn sturm(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        while !seq.last().unwrap().is_zero() {
            let n = seq.len();
            let r = seq[n - 2].div_rem(&seq[n - 1]).1.neg();
            seq.push(r);
        }
        seq.pop();
        seq
    }

    fn variations(seq: &[UPoly], x: &Q) -> usize {
        let signs: Vec<Ordering> = seq.iter().map(|p| p.sign_at(x)).filter(|s| *s != Ordering::Equal).collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Distinct real roots in the open interval `(lo, hi)`; neither endpoint
    /// may be a root.
    pub fn count_roots(&self, lo: &Q, hi: &Q) -> usize {
        if self.degree() == 0 {
            return 0;
        }
        let seq = self.sturm();
        Self::variations(&seq, lo) - Self::variations(&seq, hi)
    }

    /// Every real root lies strictly inside `(-B, B)`.
    pub fn root_bound(&self) -> Q {
        let l = self.lead().abs();
        Q::one() + self.0.iter().map(|c| c.abs() / &l).fold(Q::zero(), |a, b| if b > a { b } else { a })
    }
}

/// Open isolating intervals with non-root rational endpoints, in increasing
/// order, one per distinct real root. Adjacent intervals may share an
/// endpoint.
pub fn isolate_roots(p: &UPoly) -> Vec<(Q, Q)> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let s = p.squarefree();
    let b = s.root_bound();
    let mut out = Vec::new();
    split(&s, -b.clone(), b, &mut out);
    out
}

/// A point strictly inside `(lo, hi)` where `avoid` does not vanish.
pub fn nonroot_between(avoid: &[&UPoly], lo: &Q, hi: &Q) -> Q {
    let mut k = 2i64;
    loop {
        // Tries 1/2, 1/3, 2/3, 1/4, ... of the way across.
        for j in 1..k {
            let t = Q::new(j.into(), k.into());
            let m = lo + (hi - lo) * t;
            if avoid.iter().all(|p| p.is_zero() || !p.eval(&m).is_zero()) {
                return m;
            }
        }
        k += 1;
    }
}

fn split(s: &UPoly, lo: Q, hi: Q, out: &mut Vec<(Q, Q)>) {
    match s.count_roots(&lo, &hi) {
        0 => {}
        1 => out.push((lo, hi)),
        _ => {
            let m = nonroot_between(&[s], &lo, &hi);
            split(s, lo, m.clone(), out);
            split(s, m, hi, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn p(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn division_and_gcd() {
        let a = p(&[-1, 0, 1]); // x^2 - 1
        let (q, r) = a.div_rem(&p(&[-1, 1]));
        assert_eq!(q, p(&[1, 1]));
        assert!(r.is_zero());
        assert_eq!(a.gcd(&p(&[1, 1])), p(&[1, 1]));
        assert_eq!(p(&[1, 2, 1]).squarefree(), p(&[1, 1]));
    }

    #[test]
    fn isolates_distinct_roots() {
        // (x - 1)^2 (x + 2) x
        let f = p(&[-1, 1]).mul(&p(&[-1, 1])).mul(&p(&[2, 1])).mul(&p(&[0, 1]));
        let iv = isolate_roots(&f);
        assert_eq!(iv.len(), 3);
        assert!(iv.windows(2).all(|w| w[0].1 <= w[1].0));
        assert!(isolate_roots(&p(&[1, 0, 1])).is_empty());
    }
}
