//! Closed intervals with exact rational endpoints, used as certified
//! enclosures of irrational quantities (square roots, exponentials).
//!
//! Endpoints are rounded outward to dyadic rationals so denominators stay
//! bounded by the working precision.

use crate::rational::{self, Q};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "rational::serde_q")]
    pub lo: Q,
    #[serde(with = "rational::serde_q")]
    pub hi: Q,
}

impl Interval {
    pub fn new(lo: Q, hi: Q) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(q: Q) -> Self {
        Interval { lo: q.clone(), hi: q }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> Q {
        &self.hi - &self.lo
    }

    pub fn round_out(&self, bits: u32) -> Self {
        if self.is_point() && self.lo.denom().bits() <= bits as u64 + 1 {
            return self.clone();
        }
        Interval { lo: rational::round_down(&self.lo, bits), hi: rational::round_up(&self.hi, bits) }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }

    pub fn neg(&self) -> Interval {
        Interval { lo: -&self.hi, hi: -&self.lo }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, q: &Q) -> Interval {
        if q.is_negative() {
            Interval { lo: &self.hi * q, hi: &self.lo * q }
        } else {
            Interval { lo: &self.lo * q, hi: &self.hi * q }
        }
    }

    /// Certain ordering of every point of `self` against `q`, if any.
    pub fn cmp_q(&self, q: &Q) -> Option<Ordering> {
        if &self.hi < q {
            Some(Ordering::Less)
        } else if &self.lo > q {
            Some(Ordering::Greater)
        } else if self.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn cmp_interval(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if self.lo > o.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && o.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// The integer part, when every point of the interval shares it.
    pub fn floor(&self) -> Option<BigInt> {
        let a = rational::floor(&self.lo);
        let b = rational::floor(&self.hi);
        (a == b).then_some(a)
    }

    /// Enclosure of the fractional part, when the integer part is decided.
    pub fn frac(&self) -> Option<Interval> {
        let f = Q::from_integer(self.floor()?);
        Some(Interval { lo: &self.lo - &f, hi: &self.hi - &f })
    }

    /// Decides membership in the open interval `(lo, hi)`.
    pub fn inside_open(&self, lo: &Q, hi: &Q) -> Option<bool> {
        if &self.lo > lo && &self.hi < hi {
            Some(true)
        } else if &self.hi <= lo || &self.lo >= hi {
            Some(false)
        } else {
            None
        }
    }
}

/// Enclosure of `sqrt(q)` of width `2^-bits`, `q >= 0`.
pub fn sqrt(q: &Q, bits: u32) -> Interval {
    assert!(!q.is_negative(), "sqrt of a negative rational");
    let scale = Q::from_integer(BigInt::one() << (2 * bits));
    let s = rational::floor(&(q * scale)).sqrt();
    let den = BigInt::one() << bits;
    let lo = Q::new(s.clone(), den.clone());
    // Perfect squares give a point enclosure.
    if &(&lo * &lo) == q {
        return Interval::point(lo);
    }
    Interval { lo, hi: Q::new(s + 1, den) }
}

/// Exact square root when `q` is the square of a rational.
pub fn exact_sqrt(q: &Q) -> Option<Q> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Q::new(n, d))
}

/// Enclosure of `exp(q)` with relative width about `2^-bits`.
pub fn exp(q: &Q, bits: u32) -> Interval {
    if q.is_zero() {
        return Interval::point(Q::one());
    }
    // Argument reduction to |t| <= 1/2, then repeated squaring.
    let mut s = 0u32;
    let half = rational::ratio(1, 2);
    let mut t = q.clone();
    while t.abs() > half {
        t /= Q::from_integer(BigInt::from(2));
        s += 1;
    }
    let wp = bits + s + 24;
    let tt = Interval::point(t.clone()).round_out(wp);
    let mut sum = Interval::point(Q::one());
    let mut term = Interval::point(Q::one());
    let mut n = 1u32;
    // |t|^n / n! < 2^-wp bounds the tail together with e^{|t|} < 2.
    let tail_target = Q::new(BigInt::one(), BigInt::one() << wp);
    let mut tail = Q::one();
    loop {
        term = term.mul(&tt).scale(&Q::new(BigInt::one(), BigInt::from(n))).round_out(wp);
        sum = sum.add(&term);
        tail = tail * &half / Q::from_integer(BigInt::from(n + 1));
        n += 1;
        if tail < tail_target {
            break;
        }
    }
    let r = &tail * Q::from_integer(BigInt::from(2));
    let mut acc = Interval { lo: &sum.lo - &r, hi: &sum.hi + &r }.round_out(wp);
    for _ in 0..s {
        acc = acc.mul(&acc).round_out(wp);
    }
    acc.round_out(bits + 8)
}

/// Enclosure of `exp` over an interval (monotone).
pub fn exp_interval(x: &Interval, bits: u32) -> Interval {
    if x.is_point() {
        return exp(&x.lo, bits);
    }
    Interval { lo: exp(&x.lo, bits).lo, hi: exp(&x.hi, bits).hi }
}
