//! Traces, shattering, growth estimates and the explicit counting lemmas.

mod upoly;

pub use upoly::{isolate_roots, nonroot_between, UPoly};

use crate::constructions::finite_strategic_label;
use crate::families::{FamilyError, FiniteSupportClass, HypothesisFamily, NeighborhoodShape, NeighborhoodSystem, Reach};
use crate::formula::Var;
use crate::interval;
use crate::rational::{self, Q};
use crate::solve::{lp_solve, Assignment, LPInstance, LpRel, LpResult, Poly, SearchConfig, SolveError, WitnessSearcher};
use crate::transform::{strategic_transform, TransformError};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CapacityError {
    #[error("domain violation: {0}")]
    Domain(String),
    #[error("comparison undecided at {0} bits")]
    Undecided(u32),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Transform(#[from] TransformError),
}

/// Where a row of a label matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Sampled { seed: u64 },
}

/// Rows are hypotheses, columns points. `None` marks an undecided label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelMatrix {
    pub cols: usize,
    pub rows: Vec<Vec<Option<bool>>>,
    pub provenance: Vec<Provenance>,
}

impl LabelMatrix {
    pub fn from_rows(rows: Vec<Vec<bool>>, provenance: Provenance) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let provenance = vec![provenance; rows.len()];
        LabelMatrix { cols, rows: rows.into_iter().map(|r| r.into_iter().map(Some).collect()).collect(), provenance }
    }

    /// Fills the matrix in parallel. `Undecided` errors become `None`;
    /// other errors abort.
    pub fn build<F>(n_rows: usize, cols: usize, provenance: Provenance, label: F) -> Result<Self, CapacityError>
    where
        F: Fn(usize, usize) -> Result<bool, CapacityError> + Sync,
    {
        let rows = (0..n_rows)
            .into_par_iter()
            .map(|r| {
                (0..cols)
                    .map(|c| match label(r, c) {
                        Ok(b) => Ok(Some(b)),
                        Err(CapacityError::Family(FamilyError::Undecided(_)))
                        | Err(CapacityError::Undecided(_))
                        | Err(CapacityError::Solve(SolveError::Undecided { .. })) => Ok(None),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(LabelMatrix { cols, rows, provenance: vec![provenance; n_rows] })
    }

    /// Exact matrix of a finite-support class under a neighborhood system.
    pub fn from_finite(
        class: &FiniteSupportClass,
        nbhd: &dyn NeighborhoodSystem,
        points: &[Vec<Q>],
    ) -> Result<Self, CapacityError> {
        Self::build(class.len(), points.len(), Provenance::Exact, |h, c| {
            Ok(finite_strategic_label(class, h, nbhd, &points[c])?)
        })
    }

    /// Exact matrix of a parameterized family on explicit parameters.
    /// With a neighborhood, labels come from the reach oracle when one
    /// exists, otherwise from witness search on the transformed formula
    /// (a failed search leaves the label undecided).
    pub fn from_family(
        h: &dyn HypothesisFamily,
        nbhd: Option<&dyn NeighborhoodSystem>,
        params: &[Vec<Q>],
        points: &[Vec<Q>],
    ) -> Result<Self, CapacityError> {
        let labeler = ExactLabeler::new(h, nbhd)?;
        Self::build(params.len(), points.len(), Provenance::Exact, |r, c| labeler.label(&params[r], &points[c]))
    }

    /// Pairs `(row, col)` whose label is undecided.
    pub fn undecided(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                if v.is_none() {
                    out.push((r, c));
                }
            }
        }
        out
    }

    fn project(&self, cols: &[usize]) -> Option<BTreeSet<Vec<bool>>> {
        self.rows.iter().map(|row| cols.iter().map(|&c| row[c]).collect::<Option<Vec<_>>>()).collect()
    }
}

/// Strategic labels with exact arithmetic.
pub struct ExactLabeler<'a> {
    h: &'a dyn HypothesisFamily,
    nbhd: Option<&'a dyn NeighborhoodSystem>,
    searcher: Option<WitnessSearcher>,
}

impl<'a> ExactLabeler<'a> {
    pub fn new(h: &'a dyn HypothesisFamily, nbhd: Option<&'a dyn NeighborhoodSystem>) -> Result<Self, CapacityError> {
        let searcher = match nbhd.and_then(|n| n.emit_formula()) {
            Some(fnb) => {
                let spec = strategic_transform(&h.emit_formula(), &fnb)?;
                let mut cfg = SearchConfig { restarts: 8, ..SearchConfig::default() };
                for i in 0..spec.input_dim {
                    cfg.hint.insert(i, Var::new(crate::formula::Block::X, i));
                }
                WitnessSearcher::new(&spec.result, cfg).ok()
            }
            None => None,
        };
        Ok(ExactLabeler { h, nbhd, searcher })
    }

    pub fn label(&self, a: &[Q], x: &[Q]) -> Result<bool, CapacityError> {
        let Some(n) = self.nbhd else {
            return Ok(self.h.evaluate(a, x)?);
        };
        if n.shape() == NeighborhoodShape::Identity {
            return Ok(self.h.evaluate(a, x)?);
        }
        if let Some(r) = self.h.reach(n, a, x) {
            return match r? {
                Reach::Reachable => Ok(true),
                Reach::Unreachable => Ok(false),
                Reach::Boundary(m) => Err(FamilyError::Undecided(format!("reach margin {m:e}")).into()),
            };
        }
        if self.h.evaluate(a, x)? && n.contains(x, x)? {
            return Ok(true);
        }
        match &self.searcher {
            Some(s) => {
                let sigma = Assignment::new().with_x(x.to_vec()).with_a(a.to_vec());
                if s.search(&sigma)?.is_found() {
                    Ok(true)
                } else {
                    Err(FamilyError::Undecided("witness search found no neighbor; incomplete".into()).into())
                }
            }
            None => Err(FamilyError::Undecided("no exact strategic oracle".into()).into()),
        }
    }
}

/// Float strategic label: closed-form shifted score when available,
/// otherwise a sampled search over `N_x` (a lower approximation).
pub fn strategic_label_f64(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    a: &[f64],
    x: &[f64],
    budget: usize,
    rng: &mut ChaCha8Rng,
) -> bool {
    match nbhd {
        None => h.evaluate_f64(a, x),
        Some(n) => match h.strategic_score(n, a, x) {
            Some(s) => s >= 0.0,
            None => n.sample(x, budget, rng).iter().any(|y| h.evaluate_f64(a, y)),
        },
    }
}

/// Deduplicated traces on the decided columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSet {
    /// Columns kept; points with any undecided label are excluded.
    pub columns: Vec<usize>,
    pub traces: Vec<Vec<bool>>,
    /// Undecided `(row, col)` labels.
    pub flagged: Vec<(usize, usize)>,
}

impl TraceSet {
    pub fn count(&self) -> usize {
        self.traces.len()
    }
}

pub fn trace_set(m: &LabelMatrix) -> TraceSet {
    let flagged = m.undecided();
    let bad: BTreeSet<usize> = flagged.iter().map(|&(_, c)| c).collect();
    let columns: Vec<usize> = (0..m.cols).filter(|c| !bad.contains(c)).collect();
    let traces = m.project(&columns).unwrap_or_default().into_iter().collect();
    TraceSet { columns, traces, flagged }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShatterReport {
    pub shattered: bool,
    pub traces: usize,
    pub required: u128,
    /// Labelings of the decided columns that no row realizes (listed only
    /// for at most 16 columns).
    pub missing: Vec<Vec<bool>>,
    /// Points excluded because some label was undecided; any exclusion
    /// prevents certifying shattering.
    pub excluded: Vec<usize>,
}

pub fn is_shattered(m: &LabelMatrix) -> ShatterReport {
    let t = trace_set(m);
    let excluded: Vec<usize> = (0..m.cols).filter(|c| !t.columns.contains(c)).collect();
    let k = t.columns.len();
    let required = 1u128 << m.cols.min(127);
    let mut missing = Vec::new();
    if k <= 16 {
        let have: BTreeSet<&Vec<bool>> = t.traces.iter().collect();
        for mask in 0..1usize << k {
            let lab: Vec<bool> = (0..k).map(|i| mask >> i & 1 == 1).collect();
            if !have.contains(&lab) {
                missing.push(lab);
            }
        }
    }
    ShatterReport {
        shattered: excluded.is_empty() && t.count() as u128 == required,
        traces: t.count(),
        required,
        missing,
        excluded,
    }
}

/// Decides which labelings of pool subsets a class realizes.
pub trait ShatterOracle: Sync {
    fn pool_size(&self) -> usize;
    fn realizes(&self, cols: &[usize], labels: &[bool]) -> Result<bool, CapacityError>;
    fn shatters(&self, cols: &[usize]) -> Result<bool, CapacityError> {
        for mask in 0..1usize << cols.len() {
            let lab: Vec<bool> = (0..cols.len()).map(|i| mask >> i & 1 == 1).collect();
            if !self.realizes(cols, &lab)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl ShatterOracle for LabelMatrix {
    fn pool_size(&self) -> usize {
        self.cols
    }
    fn realizes(&self, cols: &[usize], labels: &[bool]) -> Result<bool, CapacityError> {
        Ok(self.rows.iter().any(|row| cols.iter().zip(labels).all(|(&c, &l)| row[c] == Some(l))))
    }
    fn shatters(&self, cols: &[usize]) -> Result<bool, CapacityError> {
        Ok(self.project(cols).is_some_and(|s| s.len() == 1usize << cols.len()))
    }
}

/// Closed halfspaces `w.x >= c` on a point pool, decided by exact LP.
pub struct HalfspaceOracle {
    pub points: Vec<Vec<Q>>,
}

impl ShatterOracle for HalfspaceOracle {
    fn pool_size(&self) -> usize {
        self.points.len()
    }

    /// Positives need `w.x - c >= 0`, negatives `w.x - c <= -1` (any strict
    /// separation of finitely many points rescales to a unit gap).
    fn realizes(&self, cols: &[usize], labels: &[bool]) -> Result<bool, CapacityError> {
        let l = self.points.first().map_or(0, Vec::len);
        let n = l + 1;
        let mut matrix = Vec::new();
        let mut rels = Vec::new();
        let mut rhs = Vec::new();
        for (&c, &lab) in cols.iter().zip(labels) {
            let mut row: Vec<Q> = self.points[c].clone();
            row.push(-Q::one());
            matrix.push(row);
            if lab {
                rels.push(LpRel::Ge);
                rhs.push(Q::zero());
            } else {
                rels.push(LpRel::Le);
                rhs.push(-Q::one());
            }
        }
        let lp = LPInstance { objective: vec![Q::zero(); n], matrix, rels, rhs, lower: vec![None; n] };
        Ok(!matches!(lp_solve(&lp)?, LpResult::Infeasible))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VcSearch {
    /// Size of the largest shattered subset found (a lower bound).
    pub size: usize,
    pub witness: Vec<usize>,
    pub subsets_examined: usize,
    /// True when the budget ran out before the exhaustive search ended.
    pub budget_exhausted: bool,
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Greedy growth followed by exhaustive search by increasing size. Sizes
/// stop at the first size with no shattered subset (shattering is closed
/// under subsets), or when `budget` subsets have been examined.
pub fn vc_lower_bound(oracle: &dyn ShatterOracle, budget: usize) -> Result<VcSearch, CapacityError> {
    let n = oracle.pool_size();
    let mut examined = 0usize;
    let mut greedy = Vec::new();
    for c in 0..n {
        greedy.push(c);
        examined += 1;
        if !oracle.shatters(&greedy)? {
            greedy.pop();
        }
    }
    let mut best = greedy;
    let mut exhausted = false;
    'sizes: for s in 1..=n {
        let mut comb: Vec<usize> = (0..s).collect();
        loop {
            if examined >= budget {
                exhausted = true;
                break 'sizes;
            }
            examined += 1;
            if oracle.shatters(&comb)? {
                if s > best.len() {
                    best = comb.clone();
                }
                continue 'sizes;
            }
            if !next_combination(&mut comb, n) {
                break 'sizes;
            }
        }
    }
    Ok(VcSearch { size: best.len(), witness: best, subsets_examined: examined, budget_exhausted: exhausted })
}

/// Distribution of sampled inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointDist {
    Box { lo: f64, hi: f64 },
    Gaussian { sd: f64 },
    /// Uniform on the open probability simplex.
    Simplex,
}

impl PointDist {
    pub fn sample(&self, dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match *self {
            PointDist::Box { lo, hi } => (0..dim).map(|_| rng.gen_range(lo..hi)).collect(),
            PointDist::Gaussian { sd } => (0..dim).map(|_| sd * gaussian(rng)).collect(),
            PointDist::Simplex => {
                let e: Vec<f64> = (0..dim).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
                let s: f64 = e.iter().sum();
                e.into_iter().map(|v| v / s).collect()
            }
        }
    }
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Distribution of sampled parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamDist {
    Gaussian { sd: f64 },
    /// Gaussian, except that halfspace and threshold offsets are placed at
    /// a fresh draw from the point distribution so boundaries pass through
    /// the data region.
    Anchored { sd: f64 },
}

impl ParamDist {
    pub fn sample(&self, h: &dyn HypothesisFamily, points: &PointDist, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let k = h.param_dim();
        let l = h.input_dim();
        let sd = match *self {
            ParamDist::Gaussian { sd } | ParamDist::Anchored { sd } => sd,
        };
        let mut a: Vec<f64> = (0..k).map(|_| sd * gaussian(rng)).collect();
        if matches!(self, ParamDist::Anchored { .. }) {
            let name = h.name();
            if name.starts_with("halfspace") && k == l + 1 {
                let x = points.sample(l, rng);
                a[l] = a[..l].iter().zip(&x).map(|(w, v)| w * v).sum();
            } else if name == "threshold" {
                a[0] = points.sample(1, rng)[0];
            }
        }
        a
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthConfig {
    pub ms: Vec<usize>,
    pub trials: usize,
    pub param_samples: usize,
    /// Neighbor samples per point when no closed-form strategic score exists.
    pub neighbor_budget: usize,
    pub seed: u64,
    pub points: PointDist,
    pub params: ParamDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub m: usize,
    /// Largest distinct-trace count over the trials (a lower bound on Pi(m)).
    pub traces: usize,
    pub per_trial: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub family: String,
    pub neighborhood: Option<String>,
    pub k: usize,
    pub points: Vec<GrowthPoint>,
    /// Least-squares slope of ln(traces) against ln(m).
    pub slope: Option<f64>,
    pub lower_bound_only: bool,
}

fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r.set_word_pos(u128::from(index) * 16);
    r.gen()
}

/// Sampled lower estimate of the growth function. Trial `t` draws its
/// points and parameters from streams derived from `(seed, t)` only, and the
/// first `m` points are shared across all `m`, so the estimate is monotone in
/// both `m` and the number of trials.
pub fn growth_estimate(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    cfg: &GrowthConfig,
) -> Result<GrowthReport, CapacityError> {
    if cfg.ms.is_empty() || cfg.trials == 0 {
        return Err(CapacityError::Domain("need at least one m and one trial".into()));
    }
    let l = h.input_dim();
    let mmax = *cfg.ms.iter().max().unwrap();
    let per_trial: Vec<Vec<usize>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut prng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 1, t as u64));
            let pts: Vec<Vec<f64>> = (0..mmax).map(|_| cfg.points.sample(l, &mut prng)).collect();
            let mut arng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 2, t as u64));
            let params: Vec<Vec<f64>> =
                (0..cfg.param_samples).map(|_| cfg.params.sample(h, &cfg.points, &mut arng)).collect();
            let mut nrng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 3, t as u64));
            let rows: Vec<Vec<bool>> = params
                .iter()
                .map(|a| pts.iter().map(|x| strategic_label_f64(h, nbhd, a, x, cfg.neighbor_budget, &mut nrng)).collect())
                .collect();
            cfg.ms
                .iter()
                .map(|&m| rows.iter().map(|r| &r[..m]).collect::<BTreeSet<_>>().len())
                .collect()
        })
        .collect();
    let points: Vec<GrowthPoint> = cfg
        .ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let pt: Vec<usize> = per_trial.iter().map(|t| t[i]).collect();
            GrowthPoint { m, traces: pt.iter().copied().max().unwrap_or(0), per_trial: pt }
        })
        .collect();
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.m > 0 && p.traces > 0)
        .map(|p| ((p.m as f64).ln(), (p.traces as f64).ln()))
        .collect();
    Ok(GrowthReport {
        family: h.name(),
        neighborhood: nbhd.map(|n| n.name()),
        k: h.param_dim(),
        slope: loglog_slope(&xy),
        points,
        lower_bound_only: true,
    })
}

/// Least-squares slope; `None` with fewer than two distinct abscissae.
pub fn loglog_slope(xy: &[(f64, f64)]) -> Option<f64> {
    let n = xy.len() as f64;
    if xy.len() < 2 {
        return None;
    }
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Exact threshold traces on distinct points: one threshold per gap,
/// which realizes every trace of `x >= a`.
pub fn threshold_trace_count(points: &[Q]) -> usize {
    let mut cands: Vec<Q> = points.to_vec();
    cands.push(points.iter().max().cloned().unwrap_or_else(Q::zero) + Q::one());
    let rows: Vec<Vec<bool>> = cands.iter().map(|a| points.iter().map(|x| x >= a).collect()).collect();
    rows.into_iter().collect::<BTreeSet<_>>().len()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SauerBound {
    #[serde(with = "bigint_string")]
    pub exact: BigInt,
    /// `(e m / d)^d`, with the `d = 0` case read as 1.
    pub upper: f64,
}

mod bigint_string {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(D::Error::custom)
    }
}

/// `sum_{i <= d} C(m, i)` and the `(em/d)^d` form.
pub fn sauer_bound(m: u64, d: u64) -> Result<SauerBound, CapacityError> {
    if m < d {
        return Err(CapacityError::Domain(format!("sauer bound needs m >= d, got m={m}, d={d}")));
    }
    let exact = (0..=d).map(|i| rational::binomial(m, i)).sum();
    let upper = if d == 0 { 1.0 } else { (std::f64::consts::E * m as f64 / d as f64).powf(d as f64) };
    Ok(SauerBound { exact, upper })
}

const MAX_BITS: u32 = 4096;

/// Exact test of `C (2m)^k exp(-eps m / 2) <= delta`, i.e.
/// `C (2m)^k / delta <= exp(eps m / 2)`. The right side is irrational for
/// `m >= 1`, so precision doubling terminates before the cap in practice.
pub fn erm_condition(c: &Q, k: u32, eps: &Q, delta: &Q, m: u64) -> Result<bool, CapacityError> {
    let lhs = c * num_traits::pow(Q::from_integer(BigInt::from(2 * m)), k as usize) / delta;
    let arg = eps * Q::from_integer(BigInt::from(m)) / Q::from_integer(BigInt::from(2));
    let mut bits = 64;
    loop {
        let e = interval::exp(&arg, bits);
        match e.cmp_q(&lhs) {
            Some(Ordering::Less) => return Ok(false),
            Some(_) if e.lo >= lhs => return Ok(true),
            _ => {}
        }
        if bits >= MAX_BITS {
            return Err(CapacityError::Undecided(bits));
        }
        bits *= 2;
    }
}

/// Smallest `m >= 1` with `C (2m)^k exp(-eps m/2) <= delta`.
///
/// The left side increases up to `m = 2k/eps` and decreases after, so
/// either `m = 1` already works or the answer lies past the hump, where a
/// doubling bracket plus binary search finds it.
pub fn erm_threshold(c: &Q, k: u32, eps: &Q, delta: &Q) -> Result<u64, CapacityError> {
    let unit = |q: &Q| q.is_positive() && *q < Q::one();
    if *c < Q::one() || k == 0 || !unit(eps) || !unit(delta) {
        return Err(CapacityError::Domain("need C >= 1, k >= 1 and eps, delta in (0, 1)".into()));
    }
    if erm_condition(c, k, eps, delta, 1)? {
        return Ok(1);
    }
    let hump = rational::floor(&(Q::from_integer(BigInt::from(2 * k)) / eps))
        .to_u64()
        .ok_or_else(|| CapacityError::Domain("threshold out of range".into()))?
        .max(1);
    let mut lo = hump; // violated: f(hump) >= f(1) > delta
    let mut hi = lo.saturating_mul(2);
    while !erm_condition(c, k, eps, delta, hi)? {
        lo = hi;
        hi = hi.checked_mul(2).ok_or_else(|| CapacityError::Domain("threshold out of range".into()))?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if erm_condition(c, k, eps, delta, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Upper bound on how far the threshold moves when `C` doubles, given the
/// threshold `m0` for `C`: `ceil(2 ln 2 / (eps - 2k/m0))`. Valid when
/// `m0 > 2k/eps`.
pub fn erm_doubling_slack(k: u32, eps: f64, m0: u64) -> Option<u64> {
    let gap = eps - 2.0 * k as f64 / m0 as f64;
    (gap > 0.0).then(|| (2.0 * std::f64::consts::LN_2 / gap).ceil() as u64)
}

/// `2a + 4b log2(4b)`, which bounds every `x >= 1` with `x <= a + b log2 x`.
pub fn log_self_bound(a: f64, b: f64) -> Result<f64, CapacityError> {
    if !(a >= 0.0 && b >= 1.0) {
        return Err(CapacityError::Domain("need a >= 0 and b >= 1".into()));
    }
    Ok(2.0 * a + 4.0 * b * (4.0 * b).log2())
}

/// Largest `x >= 1` with `x <= a + b log2 x`, by bisection on the larger
/// crossing of the concave gap function.
pub fn log_self_extremal(a: f64, b: f64) -> Result<f64, CapacityError> {
    log_self_bound(a, b)?;
    let g = |x: f64| a + b * x.log2() - x;
    let mut lo = (b / std::f64::consts::LN_2).max(1.0);
    if g(lo) < 0.0 {
        // The peak is already negative only when x = 1 is the sole solution.
        return Ok(1.0);
    }
    let mut hi = 2.0 * lo;
    while g(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `2 log2 C + 4k log2(4k)`: VC bound from `Pi(m) <= C m^k`.
pub fn vc_from_growth_bound(c: f64, k: u32) -> Result<f64, CapacityError> {
    if !(c >= 1.0) || k == 0 {
        return Err(CapacityError::Domain("need C >= 1 and k >= 1".into()));
    }
    let k = f64::from(k);
    Ok(2.0 * c.log2() + 4.0 * k * (4.0 * k).log2())
}

/// Largest `d` with `2^d <= C d^k` (exact integers).
pub fn vc_from_growth_extremal(c: u64, k: u32) -> Result<u64, CapacityError> {
    let bound = vc_from_growth_bound(c as f64, k)?;
    let ok = |d: u64| BigInt::one() << d <= BigInt::from(c) * num_traits::pow(BigInt::from(d), k as usize);
    Ok((1..=bound.ceil() as u64 + 2).rev().find(|&d| ok(d)).unwrap_or(0))
}

/// `4k log2 A`, which bounds every `d >= 1` with `d <= k log2(A d / k)`.
pub fn vc_consistency_bound(a: f64, k: u32) -> Result<f64, CapacityError> {
    if !(a >= 2.0) || k == 0 {
        return Err(CapacityError::Domain("need A >= 2 and k >= 1".into()));
    }
    Ok(4.0 * f64::from(k) * a.log2())
}

/// Largest integer `d >= 1` with `d <= k log2(A d / k)`, tested exactly as
/// `2^d k^k <= (A d)^k`.
pub fn vc_consistency_extremal(a: u64, k: u32) -> Result<u64, CapacityError> {
    let bound = vc_consistency_bound(a as f64, k)?;
    let kk = num_traits::pow(BigInt::from(k), k as usize);
    let ok = |d: u64| (BigInt::one() << d) * &kk <= num_traits::pow(BigInt::from(a) * d, k as usize);
    Ok((1..=bound.ceil() as u64 + 2).rev().find(|&d| ok(d)).unwrap_or(0))
}

/// Exact number of sign vectors `(sign p_1(x), ..., sign p_M(x))` over
/// `x` in R. Repeated roots are merged (only distinct roots matter).
pub fn sign_patterns_univariate(polys: &[UPoly]) -> BTreeSet<Vec<i8>> {
    let nonzero: Vec<&UPoly> = polys.iter().filter(|p| !p.is_zero()).collect();
    let prod = nonzero.iter().fold(UPoly::new(vec![Q::one()]), |acc, p| acc.mul(p));
    let s = prod.squarefree();
    let roots = isolate_roots(&prod);
    let sign = |o: Ordering| match o {
        Ordering::Less => -1i8,
        Ordering::Equal => 0,
        Ordering::Greater => 1,
    };
    let at_point = |x: &Q| -> Vec<i8> { polys.iter().map(|p| sign(p.sign_at(x))).collect() };
    let mut out = BTreeSet::new();
    match (roots.first(), roots.last()) {
        (Some(first), Some(last)) => {
            out.insert(at_point(&first.0));
            out.insert(at_point(&last.1));
        }
        _ => {
            out.insert(at_point(&Q::zero()));
        }
    }
    for (lo, hi) in &roots {
        // Between consecutive roots (shared or separated endpoints).
        out.insert(at_point(hi));
        let v = polys
            .iter()
            .map(|p| {
                if p.is_zero() {
                    return 0;
                }
                let g = p.gcd(&s);
                if g.degree() > 0 && g.count_roots(lo, hi) == 1 {
                    return 0;
                }
                let (mut a, mut b) = (lo.clone(), hi.clone());
                while p.count_roots(&a, &b) > 0 {
                    let m = nonroot_between(&[&s, p], &a, &b);
                    if s.count_roots(&a, &m) == 1 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                sign(p.sign_at(&a))
            })
            .collect();
        out.insert(v);
    }
    out
}

/// Distinct sign vectors of multivariate polynomials at `samples` random
/// parameter points in `[-radius, radius]^vars` (a lower bound). Points are
/// exact dyadic rationals, so each sign is exact.
pub fn sign_patterns_sampled(polys: &[Poly], vars: &[Var], samples: usize, radius: f64, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    for _ in 0..samples {
        let vals: Vec<(Var, Q)> = vars
            .iter()
            .map(|&v| (v, rational::from_f64(rng.gen_range(-radius..=radius)).unwrap_or_else(Q::zero)))
            .collect();
        let lookup = |v: Var| vals.iter().find(|(u, _)| *u == v).map(|(_, q)| q.clone());
        let sv: Vec<Option<Ordering>> = polys.iter().map(|p| p.sign_at(&lookup)).collect();
        seen.insert(sv);
    }
    seen.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_fixed_blowup, build_partition_pathology};
    use crate::families::{Halfspace, IntervalRadius, LpBall, PNorm, Radius, Threshold};
    use crate::rational::{int, ratio};

    fn up(c: &[i64]) -> UPoly {
        UPoly::new(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn threshold_traces_on_four_points() {
        let pts: Vec<Vec<Q>> = [1, 2, 3, 4].iter().map(|&v| vec![int(v)]).collect();
        // Gap representatives: below all, between each pair, above all.
        let params: Vec<Vec<Q>> = [0, 1, 2, 3, 4].iter().map(|&v| vec![int(v) + ratio(1, 2)]).collect();
        let m = LabelMatrix::from_family(&Threshold, None, &params, &pts).unwrap();
        assert_eq!(trace_set(&m).count(), 5);
        let one = LabelMatrix::from_family(&Threshold, None, &params[..1], &pts).unwrap();
        assert_eq!(trace_set(&one).count(), 1);
        assert_eq!(threshold_trace_count(&[int(1), int(2), int(3), int(4)]), 5);
    }

    #[test]
    fn blowup_and_pathology_shattering() {
        let inst = build_fixed_blowup(3, &int(1), &ratio(1, 2)).unwrap();
        let class = inst.class.clone().unwrap();
        let nb = LpBall::new(1, PNorm::Two, Radius::Const(int(1))).unwrap();
        let pts: Vec<Vec<Q>> = inst.anchors.iter().map(|a| vec![a.clone()]).collect();
        let m = LabelMatrix::from_finite(&class, &nb, &pts).unwrap();
        assert_eq!(trace_set(&m).count(), 8);
        assert!(is_shattered(&m).shattered);

        let identity = IntervalRadius::new(ratio(1, 1000)).unwrap();
        let two = LabelMatrix::from_finite(&class, &identity, &pts[..2]).unwrap();
        let rep = is_shattered(&two);
        assert!(!rep.shattered);
        assert!(rep.missing.contains(&vec![true, true]));

        let empty = LabelMatrix::from_finite(&class, &nb, &[]).unwrap();
        assert!(is_shattered(&empty).shattered);

        let p = build_partition_pathology(4).unwrap();
        let pts: Vec<Vec<Q>> = p.candidates.iter().map(|a| vec![a.clone()]).collect();
        let m = LabelMatrix::from_finite(p.class.as_ref().unwrap(), &crate::families::FloorPartition, &pts).unwrap();
        assert!(is_shattered(&m).shattered);
    }

    #[test]
    fn vc_search_halfspaces_and_blowup() {
        let pool: Vec<Vec<Q>> = (0..10i64).map(|i| vec![int(i), int(i * i % 7 + i * 3 % 5)]).collect();
        let r = vc_lower_bound(&HalfspaceOracle { points: pool }, 100_000).unwrap();
        assert_eq!(r.size, 3);
        assert!(!r.budget_exhausted);

        let inst = build_fixed_blowup(5, &int(1), &ratio(1, 2)).unwrap();
        let nb = LpBall::new(1, PNorm::Two, Radius::Const(int(1))).unwrap();
        let pts: Vec<Vec<Q>> = inst.anchors.iter().map(|a| vec![a.clone()]).collect();
        let m = LabelMatrix::from_finite(inst.class.as_ref().unwrap(), &nb, &pts).unwrap();
        assert_eq!(vc_lower_bound(&m, 10_000).unwrap().size, 5);
    }

    #[test]
    fn sauer_and_erm() {
        assert_eq!(sauer_bound(5, 1).unwrap().exact, BigInt::from(6));
        assert_eq!(sauer_bound(4, 2).unwrap().exact, BigInt::from(11));
        assert_eq!(sauer_bound(6, 6).unwrap().exact, BigInt::from(64));
        assert!(sauer_bound(2, 3).is_err());
        let m = erm_threshold(&int(1), 1, &ratio(1, 2), &ratio(1, 2)).unwrap();
        assert_eq!(m, 17);
        let m2 = erm_threshold(&int(2), 1, &ratio(1, 2), &ratio(1, 2)).unwrap();
        assert!(m2 <= m + erm_doubling_slack(1, 0.5, m).unwrap());
    }

    #[test]
    fn lemma_helpers() {
        assert!((log_self_extremal(0.0, 2.0).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(log_self_bound(0.0, 2.0).unwrap(), 24.0);
        assert_eq!(vc_from_growth_bound(2.0, 1).unwrap(), 10.0);
        assert_eq!(vc_consistency_extremal(2, 1).unwrap(), 2);
        assert_eq!(vc_consistency_bound(2.0, 1).unwrap(), 4.0);
        assert!(log_self_bound(-1.0, 2.0).is_err());
    }

    #[test]
    fn sign_patterns() {
        let s = sign_patterns_univariate(&[up(&[0, 1]), up(&[-1, 1])]);
        let want: BTreeSet<Vec<i8>> =
            [vec![-1, -1], vec![0, -1], vec![1, -1], vec![1, 0], vec![1, 1]].into_iter().collect();
        assert_eq!(s, want);
        assert_eq!(sign_patterns_univariate(&[up(&[1, 0, 1])]).len(), 1);
        let x = Var::new(crate::formula::Block::A, 0);
        let p = Poly::var(x);
        assert_eq!(sign_patterns_sampled(&[p], &[x], 200, 1.0, 7), 2);
    }

    #[test]
    fn growth_thresholds_and_halfspaces() {
        let cfg = GrowthConfig {
            ms: vec![10],
            trials: 2,
            param_samples: 4000,
            neighbor_budget: 0,
            seed: 3,
            points: PointDist::Box { lo: -1.0, hi: 1.0 },
            params: ParamDist::Anchored { sd: 1.0 },
        };
        let r = growth_estimate(&Threshold, None, &cfg).unwrap();
        assert_eq!(r.points[0].traces, 11);
        let cfg = GrowthConfig { ms: vec![8, 16, 32, 64], trials: 2, param_samples: 3000, ..cfg };
        let r = growth_estimate(&Halfspace::new(2), None, &cfg).unwrap();
        assert!(r.slope.unwrap() <= 3.3, "{r:?}");
        assert!(r.points.windows(2).all(|w| w[0].traces <= w[1].traces));
    }
}
