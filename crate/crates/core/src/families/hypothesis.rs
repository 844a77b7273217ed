use super::{check_dim, FamilyError, HypothesisFamily, NeighborhoodShape, NeighborhoodSystem, PNorm, Reach, TAU};
use crate::formula::{Formula, Term};
use crate::interval::{self, Interval};
use crate::rational::{self, to_f64, Q};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn dot_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Exponent vectors of total degree at most `d` in `l` variables, graded
/// by degree and lexicographic within a degree (`x0` first).
pub fn graded_monomials(l: usize, d: u32) -> Vec<Vec<u32>> {
    fn fill(l: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() + 1 == l {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            fill(l, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    for deg in 0..=d {
        if l == 0 {
            if deg == 0 {
                out.push(Vec::new());
            }
            continue;
        }
        fill(l, deg, &mut Vec::new(), &mut out);
    }
    out
}

/// Product of `var(i)^e_i` as a term.
pub fn monomial_term(exps: &[u32], var: impl Fn(usize) -> Term) -> Term {
    let mut factors = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        for _ in 0..e {
            factors.push(var(i));
        }
    }
    match factors.len() {
        0 => Term::one(),
        1 => factors.pop().unwrap(),
        _ => Term::Product(factors),
    }
}

fn monomial_q(exps: &[u32], x: &[Q]) -> Q {
    exps.iter().zip(x).fold(Q::one(), |acc, (&e, v)| acc * num_traits::pow(v.clone(), e as usize))
}

fn monomial_f64(exps: &[u32], x: &[f64]) -> f64 {
    exps.iter().zip(x).fold(1.0, |acc, (&e, v)| acc * v.powi(e as i32))
}

/// Dual norm of `w` for a ball in the given norm, in floats.
fn dual_norm_f64(norm: &PNorm, w: &[f64]) -> f64 {
    let inf = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    match norm {
        PNorm::One => inf,
        PNorm::Two => w.iter().map(|v| v * v).sum::<f64>().sqrt(),
        PNorm::Inf => w.iter().map(|v| v.abs()).sum(),
        PNorm::P(p) => {
            let p = to_f64(p);
            if p <= 1.0 {
                // Non-convex balls still peak at the axis points.
                inf
            } else {
                let q = p / (p - 1.0);
                w.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
            }
        }
    }
}

/// Decides `rho * ||w||_dual >= s` exactly where possible.
fn reach_halfspace(norm: &PNorm, rho: &Q, w: &[Q], s: &Q) -> Reach {
    let wf: Vec<f64> = w.iter().map(to_f64).collect();
    let margin = to_f64(rho) * dual_norm_f64(norm, &wf) - to_f64(s);
    if margin.abs() <= TAU {
        return Reach::Boundary(margin);
    }
    if !s.is_positive() {
        return Reach::Reachable;
    }
    let ok = match norm {
        PNorm::One => rho * w.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero) >= *s,
        PNorm::Inf => rho * w.iter().map(|v| v.abs()).sum::<Q>() >= *s,
        PNorm::Two => rho * rho * w.iter().map(|v| v * v).sum::<Q>() >= s * s,
        PNorm::P(p) if *p <= Q::one() => rho * w.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero) >= *s,
        PNorm::P(_) => margin > 0.0,
    };
    if ok {
        Reach::Reachable
    } else {
        Reach::Unreachable
    }
}

/// `a_0 x_0 + ... + a_{l-1} x_{l-1} >= a_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Halfspace {
    pub l: usize,
}

impl Halfspace {
    pub fn new(l: usize) -> Self {
        Halfspace { l }
    }
}

impl HypothesisFamily for Halfspace {
    fn name(&self) -> String {
        format!("halfspace:l={}", self.l)
    }
    fn input_dim(&self) -> usize {
        self.l
    }
    fn param_dim(&self) -> usize {
        self.l + 1
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.l + 1, a.len())?;
        check_dim(self.l, x.len())?;
        Ok(dot(&a[..self.l], x) >= a[self.l])
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        dot_f64(&a[..self.l], x) - a[self.l]
    }
    fn emit_formula(&self) -> Formula {
        let lhs = Term::Sum((0..self.l).map(|i| Term::mul(Term::a(i), Term::y(i))).collect());
        Formula::ge(lhs, Term::a(self.l))
    }
    fn reach(&self, nbhd: &dyn NeighborhoodSystem, a: &[Q], x: &[Q]) -> Option<Result<Reach, FamilyError>> {
        let go = || -> Result<Option<Reach>, FamilyError> {
            check_dim(self.l + 1, a.len())?;
            check_dim(self.l, x.len())?;
            let s = &a[self.l] - dot(&a[..self.l], x);
            Ok(match nbhd.shape() {
                NeighborhoodShape::Identity => Some(reach_halfspace(&PNorm::Two, &Q::zero(), &a[..self.l], &s)),
                NeighborhoodShape::Ball { norm, radius } => {
                    Some(reach_halfspace(&norm, &radius.at(x), &a[..self.l], &s))
                }
                NeighborhoodShape::Other => None,
            })
        };
        go().transpose()
    }
    fn strategic_score(&self, nbhd: &dyn NeighborhoodSystem, a: &[f64], x: &[f64]) -> Option<f64> {
        let base = self.score(a, x);
        match nbhd.shape() {
            NeighborhoodShape::Identity => Some(base),
            NeighborhoodShape::Ball { norm, radius } => Some(base + radius.at_f64(x) * dual_norm_f64(&norm, &a[..self.l])),
            NeighborhoodShape::Other => None,
        }
    }
}

/// One-dimensional thresholds `x_0 >= a_0`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Threshold;

impl HypothesisFamily for Threshold {
    fn name(&self) -> String {
        "threshold".into()
    }
    fn input_dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(1, a.len())?;
        check_dim(1, x.len())?;
        Ok(x[0] >= a[0])
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        x[0] - a[0]
    }
    fn emit_formula(&self) -> Formula {
        Formula::ge(Term::y(0), Term::a(0))
    }
    fn reach(&self, nbhd: &dyn NeighborhoodSystem, a: &[Q], x: &[Q]) -> Option<Result<Reach, FamilyError>> {
        let w = [Q::one(), -a[0].clone()];
        Halfspace::new(1).reach(nbhd, &w, x)
    }
    fn strategic_score(&self, nbhd: &dyn NeighborhoodSystem, a: &[f64], x: &[f64]) -> Option<f64> {
        Halfspace::new(1).strategic_score(nbhd, &[1.0, a[0]], x)
    }
}

/// `P_a(x) > 0` with a dense polynomial of degree at most `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolynomialThreshold {
    pub l: usize,
    pub d: u32,
    monomials: Vec<Vec<u32>>,
}

impl PolynomialThreshold {
    pub fn new(l: usize, d: u32) -> Self {
        PolynomialThreshold { l, d, monomials: graded_monomials(l, d) }
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    fn value_q(&self, a: &[Q], x: &[Q]) -> Q {
        self.monomials.iter().zip(a).map(|(m, c)| c * monomial_q(m, x)).sum()
    }
}

impl HypothesisFamily for PolynomialThreshold {
    fn name(&self) -> String {
        format!("ptf:l={},D={}", self.l, self.d)
    }
    fn input_dim(&self) -> usize {
        self.l
    }
    fn param_dim(&self) -> usize {
        self.monomials.len()
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.param_dim(), a.len())?;
        check_dim(self.l, x.len())?;
        Ok(self.value_q(a, x).is_positive())
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        self.monomials.iter().zip(a).map(|(m, c)| c * monomial_f64(m, x)).sum()
    }
    fn evaluate_f64(&self, a: &[f64], x: &[f64]) -> bool {
        self.score(a, x) > 0.0
    }
    fn emit_formula(&self) -> Formula {
        let terms = self
            .monomials
            .iter()
            .enumerate()
            .map(|(j, m)| match monomial_term(m, Term::y) {
                Term::Const(_) => Term::a(j),
                Term::Product(mut fs) => {
                    fs.insert(0, Term::a(j));
                    Term::Product(fs)
                }
                t => Term::mul(Term::a(j), t),
            })
            .collect();
        Formula::gt(Term::Sum(terms), Term::zero())
    }
}

/// Complete binary tree of polynomial tests `P_v(x) >= 0` (true goes right)
/// with fixed leaf labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTreePoly {
    pub l: usize,
    pub depth: usize,
    pub q: u32,
    pub leaves: Vec<bool>,
    monomials: Vec<Vec<u32>>,
}

impl DecisionTreePoly {
    pub fn new(l: usize, depth: usize, q: u32, leaves: Vec<bool>) -> Result<Self, FamilyError> {
        if depth == 0 {
            return Err(FamilyError::InvalidSpec("tree depth must be at least 1".into()));
        }
        if leaves.len() != 1 << depth {
            return Err(FamilyError::InvalidSpec(format!(
                "depth {depth} needs {} leaf labels, got {}",
                1usize << depth,
                leaves.len()
            )));
        }
        Ok(DecisionTreePoly { l, depth, q, leaves, monomials: graded_monomials(l, q) })
    }

    fn per_node(&self) -> usize {
        self.monomials.len()
    }

    fn internal(&self) -> usize {
        (1 << self.depth) - 1
    }

    /// Leaf index reached, with the smallest |P_v| seen on the way.
    fn route(&self, sign: impl Fn(usize) -> (bool, f64)) -> (usize, f64) {
        let mut node = 0;
        let mut slack = f64::INFINITY;
        for _ in 0..self.depth {
            let (right, mag) = sign(node);
            slack = slack.min(mag);
            node = 2 * node + if right { 2 } else { 1 };
        }
        (node - self.internal(), slack)
    }

    fn node_poly(&self, v: usize) -> Term {
        let k = self.per_node();
        Term::Sum(
            self.monomials
                .iter()
                .enumerate()
                .map(|(j, m)| Term::mul(Term::a(v * k + j), monomial_term(m, Term::y)))
                .collect(),
        )
    }
}

impl HypothesisFamily for DecisionTreePoly {
    fn name(&self) -> String {
        let bits: String = self.leaves.iter().map(|&b| if b { '1' } else { '0' }).collect();
        format!("tree:l={},depth={},q={},leaves={bits}", self.l, self.depth, self.q)
    }
    fn input_dim(&self) -> usize {
        self.l
    }
    fn param_dim(&self) -> usize {
        self.internal() * self.per_node()
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.param_dim(), a.len())?;
        check_dim(self.l, x.len())?;
        let k = self.per_node();
        let (leaf, _) = self.route(|v| {
            let p: Q = self.monomials.iter().zip(&a[v * k..]).map(|(m, c)| c * monomial_q(m, x)).sum();
            (!p.is_negative(), 0.0)
        });
        Ok(self.leaves[leaf])
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        let k = self.per_node();
        let (leaf, slack) = self.route(|v| {
            let p: f64 = self.monomials.iter().zip(&a[v * k..]).map(|(m, c)| c * monomial_f64(m, x)).sum();
            (p >= 0.0, p.abs())
        });
        let s = slack.max(f64::MIN_POSITIVE);
        if self.leaves[leaf] {
            s
        } else {
            -s
        }
    }
    fn emit_formula(&self) -> Formula {
        let mut disjuncts = Vec::new();
        for (leaf, &label) in self.leaves.iter().enumerate() {
            if !label {
                continue;
            }
            // Walk from the root following the bits of the leaf index.
            let mut node = 0;
            let mut conj = Vec::new();
            for level in (0..self.depth).rev() {
                let right = (leaf >> level) & 1 == 1;
                let p = self.node_poly(node);
                conj.push(if right { Formula::ge(p, Term::zero()) } else { Formula::lt(p, Term::zero()) });
                node = 2 * node + if right { 2 } else { 1 };
            }
            disjuncts.push(Formula::And(conj));
        }
        Formula::Or(disjuncts)
    }
}

/// Thresholded sigmoid network `1[r^(L)_1 >= 0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmoidNetwork {
    pub widths: Vec<usize>,
}

impl SigmoidNetwork {
    pub fn new(widths: Vec<usize>) -> Result<Self, FamilyError> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(FamilyError::InvalidSpec("need at least input and output widths, all positive".into()));
        }
        if *widths.last().unwrap() != 1 {
            return Err(FamilyError::InvalidSpec("output width must be 1".into()));
        }
        Ok(SigmoidNetwork { widths })
    }

    /// Offset of layer `j` (1-based) parameters: weights then biases.
    fn layer_offset(&self, j: usize) -> usize {
        (1..j).map(|t| self.widths[t] * (self.widths[t - 1] + 1)).sum()
    }

    fn weight(&self, j: usize, i: usize, s: usize) -> usize {
        self.layer_offset(j) + i * self.widths[j - 1] + s
    }

    fn bias(&self, j: usize, i: usize) -> usize {
        self.layer_offset(j) + self.widths[j] * self.widths[j - 1] + i
    }

    /// Pre-activations of every layer for float inputs.
    pub fn forward(&self, a: &[f64], x: &[f64]) -> Vec<Vec<f64>> {
        let mut z = x.to_vec();
        let mut pre = Vec::new();
        for j in 1..self.widths.len() {
            let r: Vec<f64> = (0..self.widths[j])
                .map(|i| (0..self.widths[j - 1]).map(|s| a[self.weight(j, i, s)] * z[s]).sum::<f64>() + a[self.bias(j, i)])
                .collect();
            z = r.iter().map(|t| 1.0 / (1.0 + (-t).exp())).collect();
            pre.push(r);
        }
        pre
    }

    /// Witness layout of the emitted formula: `(r, q, z)` indices of neuron
    /// `i` in layer `j`.
    pub fn witness_index(&self, j: usize, i: usize) -> (usize, usize, usize) {
        let before: usize = self.widths[1..j].iter().sum();
        let base = 3 * (before + i);
        (base, base + 1, base + 2)
    }

    fn final_pre_interval(&self, a: &[Q], x: &[Q], bits: u32) -> Interval {
        let mut z: Vec<Interval> = x.iter().cloned().map(Interval::point).collect();
        let mut last = Interval::point(Q::zero());
        for j in 1..self.widths.len() {
            let mut next = Vec::new();
            for i in 0..self.widths[j] {
                let mut r = Interval::point(a[self.bias(j, i)].clone());
                for (s, zs) in z.iter().enumerate() {
                    r = r.add(&zs.scale(&a[self.weight(j, i, s)])).round_out(bits);
                }
                last = r.clone();
                next.push(sigmoid_interval(&r, bits));
            }
            z = next;
        }
        last
    }
}

fn sigmoid_interval(r: &Interval, bits: u32) -> Interval {
    // sigma is increasing: sigma([lo, hi]) = [sigma(lo), sigma(hi)].
    let e_lo = interval::exp(&-&r.hi, bits);
    let e_hi = interval::exp(&-&r.lo, bits);
    let one = Q::one();
    Interval::new(&one / (&one + &e_lo.hi), &one / (&one + &e_hi.lo)).round_out(bits)
}

impl HypothesisFamily for SigmoidNetwork {
    fn name(&self) -> String {
        let w: Vec<String> = self.widths.iter().map(usize::to_string).collect();
        format!("sigmoid:widths={}", w.join("-"))
    }
    fn input_dim(&self) -> usize {
        self.widths[0]
    }
    fn param_dim(&self) -> usize {
        self.layer_offset(self.widths.len())
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.param_dim(), a.len())?;
        check_dim(self.input_dim(), x.len())?;
        let mut bits = 64;
        loop {
            let r = self.final_pre_interval(a, x, bits);
            match r.cmp_q(&Q::zero()) {
                Some(Ordering::Less) => return Ok(false),
                Some(_) => return Ok(true),
                None if r.lo >= Q::zero() => return Ok(true),
                None if bits >= 4096 => return Err(FamilyError::Undecided(format!("network output near 0 at {bits} bits"))),
                None => bits *= 2,
            }
        }
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        self.forward(a, x).last().map(|r| r[0]).unwrap_or(0.0)
    }
    fn emit_formula(&self) -> Formula {
        let mut witnesses = Vec::new();
        let mut conj = Vec::new();
        let layers = self.widths.len() - 1;
        for j in 1..=layers {
            for i in 0..self.widths[j] {
                let (r, q, z) = self.witness_index(j, i);
                witnesses.extend([r, q, z]);
                let mut affine: Vec<Term> = (0..self.widths[j - 1])
                    .map(|s| {
                        let input = if j == 1 { Term::y(s) } else { Term::w(self.witness_index(j - 1, s).2) };
                        Term::mul(Term::a(self.weight(j, i, s)), input)
                    })
                    .collect();
                affine.push(Term::a(self.bias(j, i)));
                conj.push(Formula::eq(Term::w(r), Term::Sum(affine)));
                conj.push(Formula::eq(Term::w(q), Term::exp(Term::neg(Term::w(r)))));
                conj.push(Formula::eq(Term::mul(Term::w(z), Term::Sum(vec![Term::one(), Term::w(q)])), Term::one()));
            }
        }
        conj.push(Formula::ge(Term::w(self.witness_index(layers, 0).0), Term::zero()));
        Formula::exists(witnesses, Formula::And(conj))
    }
}

/// Indicators of finitely many pairwise disjoint finite sets; the single
/// parameter is the index of the set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteSupportClass {
    pub dim: usize,
    pub sets: Vec<Vec<Vec<Q>>>,
}

impl FiniteSupportClass {
    /// Builds the class, rejecting intersecting sets.
    pub fn new(dim: usize, sets: Vec<Vec<Vec<Q>>>) -> Result<Self, FamilyError> {
        for s in &sets {
            for p in s {
                check_dim(dim, p.len())?;
            }
        }
        let c = FiniteSupportClass { dim, sets };
        if let Some((i, j)) = c.first_intersection() {
            return Err(FamilyError::NotDisjoint(i, j));
        }
        Ok(c)
    }

    /// Exact disjointness check by sorting all support points.
    pub fn first_intersection(&self) -> Option<(usize, usize)> {
        let mut all: Vec<(&Vec<Q>, usize)> =
            self.sets.iter().enumerate().flat_map(|(i, s)| s.iter().map(move |p| (p, i))).collect();
        all.sort();
        all.windows(2).find(|w| w[0].0 == w[1].0 && w[0].1 != w[1].1).map(|w| (w[0].1, w[1].1))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn contains(&self, index: usize, x: &[Q]) -> bool {
        self.sets[index].iter().any(|p| p.as_slice() == x)
    }

    fn index_of(&self, a: &[Q]) -> Result<usize, FamilyError> {
        check_dim(1, a.len())?;
        let i = &a[0];
        if !i.is_integer() || i.is_negative() || rational::floor(i) >= self.sets.len().into() {
            return Err(FamilyError::InvalidSpec(format!("no hypothesis with index {}", rational::format_rational(i))));
        }
        Ok(rational::to_f64(i) as usize)
    }
}

impl HypothesisFamily for FiniteSupportClass {
    fn name(&self) -> String {
        format!("finite:sets={}", self.sets.len())
    }
    fn input_dim(&self) -> usize {
        self.dim
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn evaluate(&self, a: &[Q], x: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.dim, x.len())?;
        Ok(self.contains(self.index_of(a)?, x))
    }
    fn score(&self, a: &[f64], x: &[f64]) -> f64 {
        let i = a[0].round();
        if i < 0.0 || i as usize >= self.sets.len() {
            return -1.0;
        }
        let hit = self.sets[i as usize].iter().any(|p| p.iter().zip(x).all(|(u, v)| to_f64(u) == *v));
        if hit {
            1.0
        } else {
            -1.0
        }
    }
    fn emit_formula(&self) -> Formula {
        Formula::Or(
            self.sets
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let members = s
                        .iter()
                        .map(|p| Formula::And(p.iter().enumerate().map(|(c, v)| Formula::eq(Term::y(c), Term::Const(v.clone()))).collect()))
                        .collect();
                    Formula::And(vec![Formula::eq(Term::a(0), Term::Const(rational::int(i as i64))), Formula::Or(members)])
                })
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::solve::{eval_qf, Assignment};

    fn qv(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn halfspace_examples() {
        let h = Halfspace::new(2);
        assert!(h.evaluate(&qv(&[1, 0, 0]), &qv(&[0, 5])).unwrap());
        assert!(!h.evaluate(&qv(&[1, 0, 0]), &[ratio(-1, 10), int(5)]).unwrap());
        assert!(h.evaluate(&qv(&[0, 0, 0]), &qv(&[-7, 3])).unwrap());
        assert_eq!(h.emit_formula().to_string(), "(>= (+ (* a0 y0) (* a1 y1)) a2)");
    }

    #[test]
    fn graded_lex_order() {
        let m = graded_monomials(2, 2);
        assert_eq!(m, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(PolynomialThreshold::new(2, 2).param_dim(), 6);
        assert_eq!(PolynomialThreshold::new(3, 4).param_dim(), 35);
    }

    #[test]
    fn ptf_examples() {
        let p = PolynomialThreshold::new(2, 2);
        // 1 - x0^2 - x1^2 > 0
        let a = qv(&[1, 0, 0, -1, 0, -1]);
        assert!(p.evaluate(&a, &qv(&[0, 0])).unwrap());
        assert!(!p.evaluate(&a, &qv(&[1, 0])).unwrap());
        let c = PolynomialThreshold::new(1, 3);
        // x^3 - x
        assert!(!c.evaluate(&qv(&[0, -1, 0, 1]), &[ratio(1, 2)]).unwrap());
    }

    #[test]
    fn tree_paper_leaf() {
        // Only leaf "right then left" is positive.
        let t = DecisionTreePoly::new(1, 2, 1, vec![false, false, true, false]).unwrap();
        assert_eq!(t.param_dim(), 3 * 2);
        // P1 = x, P2 (right child, node 2) = 1 - x, node 1 unused.
        let a = qv(&[0, 1, 0, 0, 1, -1]);
        assert!(t.evaluate(&a, &qv(&[2])).unwrap());
        assert!(!t.evaluate(&a, &[ratio(1, 2)]).unwrap());
        assert!(!t.evaluate(&a, &qv(&[-1])).unwrap());
        let f = t.emit_formula();
        assert_eq!(
            f.to_string(),
            "(or (and (>= (+ (* a0 1) (* a1 y0)) 0) (< (+ (* a4 1) (* a5 y0)) 0)))"
        );
        let all = DecisionTreePoly::new(2, 1, 1, vec![true, true]).unwrap();
        assert!(all.evaluate(&qv(&[1, -3, 2, 0, 0, 0][..3]), &qv(&[4, 4])).unwrap());
    }

    #[test]
    fn sigmoid_zero_network_is_true() {
        let n = SigmoidNetwork::new(vec![2, 2, 1]).unwrap();
        assert_eq!(n.param_dim(), 2 * 3 + 3);
        let zeros = vec![Q::zero(); n.param_dim()];
        assert!(n.evaluate(&zeros, &qv(&[3, -1])).unwrap());
        let f = n.emit_formula();
        let (prefix, _) = f.existential_prefix();
        assert_eq!(prefix.len(), 9);
    }

    #[test]
    fn sigmoid_single_neuron_sign() {
        let n = SigmoidNetwork::new(vec![1, 1]).unwrap();
        let a = qv(&[1, 0]);
        assert!(n.evaluate(&a, &[ratio(1, 3)]).unwrap());
        assert!(!n.evaluate(&a, &[ratio(-1, 3)]).unwrap());
        assert!(n.evaluate(&a, &[int(0)]).unwrap());
    }

    #[test]
    fn finite_support() {
        let c = FiniteSupportClass::new(1, vec![vec![vec![int(1)]], vec![vec![int(2)]]]).unwrap();
        assert!(c.evaluate(&[int(0)], &[int(1)]).unwrap());
        assert!(!c.evaluate(&[int(1)], &[int(1)]).unwrap());
        assert!(c.evaluate(&[ratio(1, 2)], &[int(1)]).is_err());
        assert!(FiniteSupportClass::new(1, vec![vec![vec![int(1)]], vec![vec![int(1)]]]).is_err());
        let f = c.emit_formula();
        let s = Assignment::new().with_y(vec![int(2)]).with_a(vec![int(1)]);
        assert!(eval_qf(&f, &s).unwrap());
    }
}
