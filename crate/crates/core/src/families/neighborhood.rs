use super::{check_dim, FamilyError, NeighborhoodShape, NeighborhoodSystem, TAU};
use crate::formula::{Formula, Term};
use crate::rational::{self, from_f64, to_f64, Q};
use crate::solve::{lp_solve, LPInstance, LpRel, LpResult};
use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};
use std::fmt;

/// Norm of an `l_p` ball.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PNorm {
    One,
    Two,
    Inf,
    /// Any other rational `p > 0`.
    P(Q),
}

impl PNorm {
    pub fn new(p: Q) -> Result<Self, FamilyError> {
        if !p.is_positive() {
            return Err(FamilyError::InvalidSpec(format!("p must be positive, got {}", rational::format_rational(&p))));
        }
        Ok(if p == Q::one() {
            PNorm::One
        } else if p == rational::int(2) {
            PNorm::Two
        } else {
            PNorm::P(p)
        })
    }

    pub fn norm_f64(&self, d: &[f64]) -> f64 {
        match self {
            PNorm::One => d.iter().map(|v| v.abs()).sum(),
            PNorm::Two => d.iter().map(|v| v * v).sum::<f64>().sqrt(),
            PNorm::Inf => d.iter().fold(0.0, |m, v| m.max(v.abs())),
            PNorm::P(p) => {
                let p = to_f64(p);
                d.iter().map(|v| v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
            }
        }
    }
}

impl fmt::Display for PNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PNorm::One => write!(f, "1"),
            PNorm::Two => write!(f, "2"),
            PNorm::Inf => write!(f, "inf"),
            PNorm::P(p) => write!(f, "{}", rational::format_rational(p)),
        }
    }
}

/// Ball radius: a constant or `max(x_c, 0)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Radius {
    Const(Q),
    PosCoord(usize),
}

impl Radius {
    pub fn at(&self, x: &[Q]) -> Q {
        match self {
            Radius::Const(r) => r.clone(),
            Radius::PosCoord(c) => x[*c].clone().max(Q::zero()),
        }
    }

    pub fn at_f64(&self, x: &[f64]) -> f64 {
        match self {
            Radius::Const(r) => to_f64(r),
            Radius::PosCoord(c) => x[*c].max(0.0),
        }
    }

    fn term(&self) -> Term {
        match self {
            Radius::Const(r) => Term::Const(r.clone()),
            Radius::PosCoord(c) => Term::x(*c),
        }
    }
}

impl fmt::Display for Radius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Radius::Const(r) => write!(f, "{}", rational::format_rational(r)),
            Radius::PosCoord(c) => write!(f, "pos(x{c})"),
        }
    }
}

fn diff(x: &Term, y: &Term) -> Term {
    Term::sub(x.clone(), y.clone())
}

fn stay_put(l: usize) -> Formula {
    Formula::And((0..l).map(|i| Formula::eq(Term::y(i), Term::x(i))).collect())
}

/// `N_x = {x}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub l: usize,
}

impl Identity {
    pub fn new(l: usize) -> Self {
        Identity { l }
    }
}

impl NeighborhoodSystem for Identity {
    fn name(&self) -> String {
        format!("identity:l={}", self.l)
    }
    fn dim(&self) -> usize {
        self.l
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.l, x.len())?;
        check_dim(self.l, y.len())?;
        Ok(x == y)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        x == y
    }
    fn emit_formula(&self) -> Option<Formula> {
        Some(stay_put(self.l))
    }
    fn sample(&self, x: &[f64], _budget: usize, _rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        vec![x.to_vec()]
    }
    fn shape(&self) -> NeighborhoodShape {
        NeighborhoodShape::Identity
    }
}

/// `l_p` balls with a constant or point-dependent radius.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpBall {
    pub l: usize,
    pub norm: PNorm,
    pub radius: Radius,
}

impl LpBall {
    pub fn new(l: usize, norm: PNorm, radius: Radius) -> Result<Self, FamilyError> {
        match &radius {
            Radius::Const(r) if r.is_negative() => {
                return Err(FamilyError::InvalidSpec("radius must be nonnegative".into()))
            }
            Radius::PosCoord(c) if *c >= l => {
                return Err(FamilyError::InvalidSpec(format!("radius coordinate x{c} out of range for l={l}")))
            }
            _ => {}
        }
        Ok(LpBall { l, norm, radius })
    }

    /// `(d_i / rho)` with the ball written as `sum |u_i|^p <= 1`.
    fn ball_body(&self) -> Formula {
        let l = self.l;
        let rho = self.radius.term();
        let d: Vec<Term> = (0..l).map(|i| diff(&Term::x(i), &Term::y(i))).collect();
        match &self.norm {
            PNorm::Two => Formula::le(Term::Sum(d.into_iter().map(Term::square).collect()), Term::square(rho)),
            PNorm::Inf => Formula::And(
                d.iter()
                    .flat_map(|t| [Formula::le(t.clone(), rho.clone()), Formula::ge(t.clone(), Term::neg(rho.clone()))])
                    .collect(),
            ),
            PNorm::One => {
                // One linear atom per sign pattern.
                let mut atoms = Vec::new();
                for mask in 0..1usize << l {
                    let terms = d
                        .iter()
                        .enumerate()
                        .map(|(i, t)| if mask >> i & 1 == 1 { Term::neg(t.clone()) } else { t.clone() })
                        .collect();
                    atoms.push(Formula::le(Term::Sum(terms), rho.clone()));
                }
                Formula::And(atoms)
            }
            PNorm::P(p) => {
                // u_i = |d_i / rho|^p via z_i = log |d_i / rho|.
                let u = |i: usize| Term::w(i);
                let z = |i: usize| Term::w(l + i);
                let mut conj = vec![Formula::le(Term::Sum((0..l).map(u).collect()), Term::one())];
                for i in 0..l {
                    let scaled = Term::mul(rho.clone(), Term::exp(z(i)));
                    let moved = Formula::And(vec![
                        Formula::Or(vec![
                            Formula::eq(scaled.clone(), diff(&Term::x(i), &Term::y(i))),
                            Formula::eq(scaled, diff(&Term::y(i), &Term::x(i))),
                        ]),
                        Formula::eq(u(i), Term::exp(Term::mul(Term::Const(p.clone()), z(i)))),
                    ]);
                    let fixed = Formula::And(vec![Formula::eq(Term::x(i), Term::y(i)), Formula::eq(u(i), Term::zero())]);
                    conj.push(Formula::Or(vec![fixed, moved]));
                }
                Formula::exists((0..2 * l).collect(), Formula::And(conj))
            }
        }
    }

    fn within(&self, rho: &Q, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        let d: Vec<Q> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        if d.iter().all(Zero::is_zero) {
            return Ok(true);
        }
        Ok(match &self.norm {
            PNorm::One => d.iter().map(|v| v.abs()).sum::<Q>() <= *rho,
            PNorm::Two => d.iter().map(|v| v * v).sum::<Q>() <= rho * rho,
            PNorm::Inf => d.iter().all(|v| v.abs() <= *rho),
            PNorm::P(p) => {
                if rho.is_zero() {
                    return Ok(false);
                }
                let pf = to_f64(p);
                let rf = to_f64(rho);
                // Compare in units of the radius so the tolerance is relative.
                let s: f64 = d.iter().map(|v| (to_f64(v).abs() / rf).powf(pf)).sum();
                if (s - 1.0).abs() <= TAU {
                    return Err(FamilyError::Undecided(format!("l_{p} distance within {TAU} of the radius", p = self.norm)));
                }
                s < 1.0
            }
        })
    }
}

impl NeighborhoodSystem for LpBall {
    fn name(&self) -> String {
        format!("lp:l={},p={},r={}", self.l, self.norm, self.radius)
    }
    fn dim(&self) -> usize {
        self.l
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_dim(self.l, x.len())?;
        check_dim(self.l, y.len())?;
        if let Radius::PosCoord(c) = self.radius {
            if x[c].is_negative() {
                return Ok(x == y);
            }
        }
        self.within(&self.radius.at(x), x, y)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        if let Radius::PosCoord(c) = self.radius {
            if x[c] < 0.0 {
                return x == y;
            }
        }
        let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.norm.norm_f64(&d) <= self.radius.at_f64(x)
    }
    fn emit_formula(&self) -> Option<Formula> {
        let body = self.ball_body();
        Some(match self.radius {
            Radius::Const(_) => body,
            Radius::PosCoord(c) => {
                // Keep the witnesses outermost so the result stays existential.
                let (ws, inner) = body.existential_prefix();
                let split = Formula::Or(vec![
                    Formula::And(vec![Formula::ge(Term::x(c), Term::zero()), inner.clone()]),
                    Formula::And(vec![Formula::lt(Term::x(c), Term::zero()), stay_put(self.l)]),
                ]);
                if ws.is_empty() {
                    split
                } else {
                    Formula::exists(ws, split)
                }
            }
        })
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let rho = self.radius.at_f64(x);
        let mut out = vec![x.to_vec()];
        if rho <= 0.0 {
            return out;
        }
        while out.len() < budget.max(1) {
            let dir: Vec<f64> = (0..self.l).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = self.norm.norm_f64(&dir);
            if n == 0.0 {
                continue;
            }
            let t = rho * rng.gen::<f64>().powf(1.0 / self.l as f64) * 0.999 / n;
            out.push(x.iter().zip(&dir).map(|(a, d)| a + t * d).collect());
        }
        out
    }
    fn shape(&self) -> NeighborhoodShape {
        NeighborhoodShape::Ball { norm: self.norm.clone(), radius: self.radius.clone() }
    }
}

/// `|x - y| <= r` on the line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalRadius {
    pub r: Q,
}

impl IntervalRadius {
    pub fn new(r: Q) -> Result<Self, FamilyError> {
        if !r.is_positive() {
            return Err(FamilyError::InvalidSpec("interval radius must be positive".into()));
        }
        Ok(IntervalRadius { r })
    }
}

impl NeighborhoodSystem for IntervalRadius {
    fn name(&self) -> String {
        format!("interval:r={}", rational::format_rational(&self.r))
    }
    fn dim(&self) -> usize {
        1
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_dim(1, x.len())?;
        check_dim(1, y.len())?;
        Ok((&x[0] - &y[0]).abs() <= self.r)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        (x[0] - y[0]).abs() <= to_f64(&self.r)
    }
    fn emit_formula(&self) -> Option<Formula> {
        let d = diff(&Term::x(0), &Term::y(0));
        let r = Term::Const(self.r.clone());
        Some(Formula::And(vec![Formula::le(d.clone(), r.clone()), Formula::ge(d, Term::neg(r))]))
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let r = to_f64(&self.r);
        let mut out = vec![x.to_vec()];
        out.extend((1..budget.max(1)).map(|_| vec![x[0] + rng.gen_range(-r..=r)]));
        out
    }
    fn shape(&self) -> NeighborhoodShape {
        NeighborhoodShape::Ball { norm: PNorm::Two, radius: Radius::Const(self.r.clone()) }
    }
}

/// `N_x = [floor x, floor x + 1)`. Not definable in the tame setting, so
/// there is no emitter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FloorPartition;

impl NeighborhoodSystem for FloorPartition {
    fn name(&self) -> String {
        "floor".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_dim(1, x.len())?;
        check_dim(1, y.len())?;
        Ok(rational::floor(&x[0]) == rational::floor(&y[0]))
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        x[0].floor() == y[0].floor()
    }
    fn emit_formula(&self) -> Option<Formula> {
        None
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let base = x[0].floor();
        let mut out = vec![x.to_vec()];
        out.extend((1..budget.max(1)).map(|_| vec![base + rng.gen::<f64>()]));
        out
    }
}

fn check_simplex(l: usize, x: &[Q]) -> Result<(), FamilyError> {
    check_dim(l, x.len())?;
    if x.iter().any(Signed::is_negative) || x.iter().sum::<Q>() != Q::one() {
        return Err(FamilyError::OffSimplex);
    }
    Ok(())
}

fn check_simplex_f64(x: &[f64]) -> bool {
    x.iter().all(|v| *v >= 0.0) && (x.iter().sum::<f64>() - 1.0).abs() <= 1e-9
}

fn simplex_atoms(l: usize) -> Vec<Formula> {
    let mut conj: Vec<Formula> = (0..l)
        .flat_map(|i| [Formula::ge(Term::x(i), Term::zero()), Formula::ge(Term::y(i), Term::zero())])
        .collect();
    conj.push(Formula::eq(Term::Sum((0..l).map(Term::x).collect()), Term::one()));
    conj.push(Formula::eq(Term::Sum((0..l).map(Term::y).collect()), Term::one()));
    conj
}

/// Multiplicative jitter that stays in the open simplex.
fn simplex_jitter(x: &[f64], scale: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    let raw: Vec<f64> = x.iter().map(|v| v.max(1e-12) * (scale * rng.gen_range(-1.0..1.0)).exp()).collect();
    let s: f64 = raw.iter().sum();
    raw.iter().map(|v| v / s).collect()
}

/// `KL(x || y) <= r` on the simplex, natural logarithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KlBall {
    pub l: usize,
    pub r: Q,
}

impl KlBall {
    pub fn new(l: usize, r: Q) -> Result<Self, FamilyError> {
        if l < 2 {
            return Err(FamilyError::InvalidSpec("KL balls need l >= 2".into()));
        }
        if r.is_negative() {
            return Err(FamilyError::InvalidSpec("radius must be nonnegative".into()));
        }
        Ok(KlBall { l, r })
    }

    /// `KL(x || y)` in floats; infinite when `y` misses mass of `x`.
    pub fn divergence(x: &[f64], y: &[f64]) -> f64 {
        x.iter()
            .zip(y)
            .filter(|(a, _)| **a > 0.0)
            .map(|(a, b)| if *b > 0.0 { a * (a / b).ln() } else { f64::INFINITY })
            .sum()
    }
}

impl NeighborhoodSystem for KlBall {
    fn name(&self) -> String {
        format!("kl:l={},r={}", self.l, rational::format_rational(&self.r))
    }
    fn dim(&self) -> usize {
        self.l
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_simplex(self.l, x)?;
        check_simplex(self.l, y)?;
        if x == y {
            return Ok(true);
        }
        let xf: Vec<f64> = x.iter().map(to_f64).collect();
        let yf: Vec<f64> = y.iter().map(to_f64).collect();
        if x.iter().zip(y).any(|(a, b)| a.is_positive() && b.is_zero()) {
            return Ok(false);
        }
        let kl = Self::divergence(&xf, &yf);
        let r = to_f64(&self.r);
        if (kl - r).abs() <= TAU * r.max(1.0) {
            return Err(FamilyError::Undecided(format!("KL = {kl} is within tolerance of the radius")));
        }
        Ok(kl < r)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        check_simplex_f64(x) && check_simplex_f64(y) && Self::divergence(x, y) <= to_f64(&self.r)
    }
    fn emit_formula(&self) -> Option<Formula> {
        let l = self.l;
        let mut conj = simplex_atoms(l);
        conj.push(Formula::le(
            Term::Sum((0..l).map(|i| Term::mul(Term::x(i), Term::w(i))).collect()),
            Term::Const(self.r.clone()),
        ));
        for i in 0..l {
            conj.push(Formula::Or(vec![
                Formula::And(vec![
                    Formula::gt(Term::x(i), Term::zero()),
                    Formula::gt(Term::y(i), Term::zero()),
                    Formula::eq(Term::mul(Term::y(i), Term::exp(Term::w(i))), Term::x(i)),
                ]),
                Formula::And(vec![Formula::eq(Term::x(i), Term::zero()), Formula::eq(Term::w(i), Term::zero())]),
            ]));
        }
        Some(Formula::exists((0..l).collect(), Formula::And(conj)))
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let r = to_f64(&self.r);
        let mut out = vec![x.to_vec()];
        let mut scale = (2.0 * r).sqrt().max(1e-6);
        let mut tries = 0;
        while out.len() < budget.max(1) && tries < 100 * budget.max(1) {
            tries += 1;
            let y = simplex_jitter(x, scale, rng);
            if Self::divergence(x, &y) <= r {
                out.push(y);
            } else {
                scale *= 0.9;
            }
        }
        out
    }
}

/// Gaussian location family: `(mu - mu')^2 / 2 <= r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianKl {
    pub r: Q,
}

impl GaussianKl {
    pub fn new(r: Q) -> Result<Self, FamilyError> {
        if r.is_negative() {
            return Err(FamilyError::InvalidSpec("radius must be nonnegative".into()));
        }
        Ok(GaussianKl { r })
    }
}

impl NeighborhoodSystem for GaussianKl {
    fn name(&self) -> String {
        format!("gauss-kl:r={}", rational::format_rational(&self.r))
    }
    fn dim(&self) -> usize {
        1
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        check_dim(1, x.len())?;
        check_dim(1, y.len())?;
        let d = &x[0] - &y[0];
        Ok(&d * &d <= rational::int(2) * &self.r)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        (x[0] - y[0]).powi(2) / 2.0 <= to_f64(&self.r)
    }
    fn emit_formula(&self) -> Option<Formula> {
        Some(Formula::le(
            Term::mul(Term::Const(rational::ratio(1, 2)), Term::square(diff(&Term::x(0), &Term::y(0)))),
            Term::Const(self.r.clone()),
        ))
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let w = (2.0 * to_f64(&self.r)).sqrt() * 0.999;
        let mut out = vec![x.to_vec()];
        out.extend((1..budget.max(1)).map(|_| vec![x[0] + w * rng.gen_range(-1.0..=1.0)]));
        out
    }
    fn shape(&self) -> NeighborhoodShape {
        // The reach radius is sqrt(2r); only usable when that is rational.
        match crate::interval::exact_sqrt(&(rational::int(2) * &self.r)) {
            Some(rho) => NeighborhoodShape::Ball { norm: PNorm::Two, radius: Radius::Const(rho) },
            None => NeighborhoodShape::Other,
        }
    }
}

/// Earth mover balls on the simplex over a finite metric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmdBall {
    pub l: usize,
    pub metric: Vec<Vec<Q>>,
    pub r: Q,
}

impl EmdBall {
    pub fn new(metric: Vec<Vec<Q>>, r: Q) -> Result<Self, FamilyError> {
        let l = metric.len();
        if l == 0 || metric.iter().any(|row| row.len() != l) {
            return Err(FamilyError::InvalidSpec("metric table must be square and nonempty".into()));
        }
        for i in 0..l {
            if !metric[i][i].is_zero() {
                return Err(FamilyError::InvalidSpec(format!("metric diagonal entry {i} is nonzero")));
            }
            for j in 0..l {
                if metric[i][j].is_negative() || metric[i][j] != metric[j][i] {
                    return Err(FamilyError::InvalidSpec(format!("metric entry ({i},{j}) is negative or asymmetric")));
                }
            }
        }
        if r.is_negative() {
            return Err(FamilyError::InvalidSpec("radius must be nonnegative".into()));
        }
        Ok(EmdBall { l, metric, r })
    }

    /// `rho(i, j) = |i - j|` on `l` points.
    pub fn line_metric(l: usize) -> Vec<Vec<Q>> {
        (0..l).map(|i| (0..l).map(|j| rational::int((i as i64 - j as i64).abs())).collect()).collect()
    }

    /// The transport LP over `gamma_{ij}` (row-major).
    pub fn transport_lp(&self, x: &[Q], y: &[Q]) -> LPInstance {
        let l = self.l;
        let objective = self.metric.iter().flatten().cloned().collect();
        let mut matrix = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..l {
            matrix.push((0..l * l).map(|k| if k / l == i { Q::one() } else { Q::zero() }).collect());
            rhs.push(x[i].clone());
        }
        for j in 0..l {
            matrix.push((0..l * l).map(|k| if k % l == j { Q::one() } else { Q::zero() }).collect());
            rhs.push(y[j].clone());
        }
        LPInstance::nonnegative(objective, matrix, vec![LpRel::Eq; 2 * l], rhs)
    }

    /// Exact earth mover distance.
    pub fn emd(&self, x: &[Q], y: &[Q]) -> Result<Q, FamilyError> {
        check_simplex(self.l, x)?;
        check_simplex(self.l, y)?;
        match lp_solve(&self.transport_lp(x, y))? {
            LpResult::Optimal { value, .. } => Ok(value),
            other => Err(FamilyError::InvalidSpec(format!("transport LP not optimal: {other:?}"))),
        }
    }
}

impl NeighborhoodSystem for EmdBall {
    fn name(&self) -> String {
        format!("emd:l={},r={}", self.l, rational::format_rational(&self.r))
    }
    fn dim(&self) -> usize {
        self.l
    }
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError> {
        Ok(self.emd(x, y)? <= self.r)
    }
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool {
        let conv = |v: &[f64]| -> Option<Vec<Q>> {
            let mut q: Vec<Q> = v.iter().map(|t| from_f64(*t)).collect::<Option<_>>()?;
            // Renormalize the float rounding away.
            let s: Q = q.iter().sum();
            if !s.is_positive() {
                return None;
            }
            q.iter_mut().for_each(|t| *t /= &s);
            Some(q)
        };
        match (conv(x), conv(y)) {
            (Some(a), Some(b)) => self.contains(&a, &b).unwrap_or(false),
            _ => false,
        }
    }
    fn emit_formula(&self) -> Option<Formula> {
        let l = self.l;
        let g = |i: usize, j: usize| Term::w(i * l + j);
        let mut conj = simplex_atoms(l);
        for i in 0..l {
            for j in 0..l {
                conj.push(Formula::ge(g(i, j), Term::zero()));
            }
        }
        for i in 0..l {
            conj.push(Formula::eq(Term::Sum((0..l).map(|j| g(i, j)).collect()), Term::x(i)));
        }
        for j in 0..l {
            conj.push(Formula::eq(Term::Sum((0..l).map(|i| g(i, j)).collect()), Term::y(j)));
        }
        let cost = (0..l * l)
            .filter(|k| !self.metric[k / l][k % l].is_zero())
            .map(|k| Term::mul(Term::Const(self.metric[k / l][k % l].clone()), g(k / l, k % l)))
            .collect();
        conj.push(Formula::le(Term::Sum(cost), Term::Const(self.r.clone())));
        Some(Formula::exists((0..l * l).collect(), Formula::And(conj)))
    }
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>> {
        let r = to_f64(&self.r);
        let mut out = vec![x.to_vec()];
        if self.l < 2 {
            return out;
        }
        let mut tries = 0;
        while out.len() < budget.max(1) && tries < 100 * budget.max(1) {
            tries += 1;
            // Move mass t from i to j; the cost t * rho(i, j) bounds the EMD.
            let i = rng.gen_range(0..self.l);
            let j = rng.gen_range(0..self.l);
            let cost = to_f64(&self.metric[i][j]);
            if i == j || x[i] <= 0.0 {
                continue;
            }
            let cap = if cost > 0.0 { (r / cost).min(x[i]) } else { x[i] };
            let t = cap * 0.999 * rng.gen::<f64>();
            let mut y = x.to_vec();
            y[i] -= t;
            y[j] += t;
            out.push(y);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use rand::SeedableRng;

    fn qv(v: &[(i64, i64)]) -> Vec<Q> {
        v.iter().map(|&(n, d)| ratio(n, d)).collect()
    }

    #[test]
    fn linf_emits_two_atoms_per_coordinate() {
        let b = LpBall::new(3, PNorm::Inf, Radius::Const(int(1))).unwrap();
        assert_eq!(b.emit_formula().unwrap().atoms().len(), 6);
    }

    #[test]
    fn variable_radius_pins_negative_points() {
        let b = LpBall::new(2, PNorm::Two, Radius::PosCoord(1)).unwrap();
        let x = qv(&[(0, 1), (-1, 2)]);
        assert!(b.contains(&x, &x).unwrap());
        assert!(!b.contains(&x, &qv(&[(1, 100), (-1, 2)])).unwrap());
        let x = qv(&[(0, 1), (1, 1)]);
        assert!(b.contains(&x, &qv(&[(1, 2), (1, 2)])).unwrap());
    }

    #[test]
    fn general_p_membership() {
        let b = LpBall::new(2, PNorm::new(ratio(1, 2)).unwrap(), Radius::Const(int(1))).unwrap();
        let o = qv(&[(0, 1), (0, 1)]);
        assert!(b.contains(&o, &o).unwrap());
        // (sqrt(1/4) + sqrt(1/4))^2 = 1 sits on the boundary.
        assert!(b.contains(&o, &qv(&[(1, 4), (1, 4)])).is_err());
        assert!(b.contains(&o, &qv(&[(1, 5), (1, 5)])).unwrap());
        assert!(!b.contains(&o, &qv(&[(1, 3), (1, 3)])).unwrap());
        assert!(PNorm::new(int(0)).is_err());
    }

    #[test]
    fn kl_examples() {
        let k = KlBall::new(2, int(1)).unwrap();
        let x = qv(&[(1, 2), (1, 2)]);
        assert!(k.contains(&x, &x).unwrap());
        assert!(k.contains(&x, &qv(&[(1, 4), (3, 4)])).unwrap());
        assert!(!k.contains(&x, &qv(&[(1, 100), (99, 100)])).unwrap());
        assert_eq!(k.contains(&x, &qv(&[(1, 2), (1, 3)])), Err(FamilyError::OffSimplex));
    }

    #[test]
    fn emd_examples() {
        let e = EmdBall::new(EmdBall::line_metric(3), int(1)).unwrap();
        let d1 = qv(&[(1, 1), (0, 1), (0, 1)]);
        let d3 = qv(&[(0, 1), (0, 1), (1, 1)]);
        assert_eq!(e.emd(&d1, &d3).unwrap(), int(2));
        assert!(!e.contains(&d1, &d3).unwrap());
        assert_eq!(e.emd(&d1, &d1).unwrap(), int(0));
        let two = EmdBall::new(EmdBall::line_metric(2), int(1)).unwrap();
        assert_eq!(two.emd(&qv(&[(1, 1), (0, 1)]), &qv(&[(1, 2), (1, 2)])).unwrap(), ratio(1, 2));
        assert!(EmdBall::new(vec![vec![int(0), int(1)], vec![int(2), int(0)]], int(1)).is_err());
    }

    #[test]
    fn interval_and_floor() {
        let i = IntervalRadius::new(ratio(1, 3)).unwrap();
        assert!(i.contains(&[int(0)], &[ratio(1, 4)]).unwrap());
        let f = FloorPartition;
        assert!(f.contains(&[ratio(3, 2)], &[ratio(1999, 1000)]).unwrap());
        assert!(!f.contains(&[ratio(3, 2)], &[int(2)]).unwrap());
        assert!(f.contains(&[ratio(3, 2)], &[int(1)]).unwrap());
        assert!(!f.definable());
    }

    #[test]
    fn samplers_stay_inside() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let x = vec![0.2, 0.3, 0.5];
        let systems: Vec<Box<dyn NeighborhoodSystem>> = vec![
            Box::new(KlBall::new(3, ratio(1, 10)).unwrap()),
            Box::new(EmdBall::new(EmdBall::line_metric(3), ratio(1, 5)).unwrap()),
            Box::new(LpBall::new(3, PNorm::One, Radius::Const(ratio(1, 2))).unwrap()),
            Box::new(LpBall::new(3, PNorm::new(int(3)).unwrap(), Radius::Const(ratio(1, 2))).unwrap()),
        ];
        for s in &systems {
            let pts = s.sample(&x, 50, &mut rng);
            assert_eq!(pts[0], x);
            assert!(pts.len() > 10, "{}", s.name());
            for p in &pts {
                assert!(s.contains_f64(&x, p), "{} {p:?}", s.name());
            }
        }
    }
}
