//! Realizable data generation, approximate strategic ERM and
//! sample-complexity sweeps.

use crate::capacity::{gaussian, strategic_label_f64, CapacityError, ExactLabeler, PointDist};
use crate::families::{HypothesisFamily, NeighborhoodSystem};
use crate::rational::{self, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LearnError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("label undecidable after {0} resamples")]
    Undecidable(usize),
    #[error(transparent)]
    Capacity(#[from] CapacityError),
}

const RESAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataMeta {
    pub distribution: PointDist,
    pub target: Vec<f64>,
    pub family: String,
    pub neighborhood: Option<String>,
    pub seed: u64,
}

/// Labeled sample; every float is exactly representable, so labels are
/// exact strategic labels of the stored points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSet {
    pub xs: Vec<Vec<f64>>,
    pub ys: Vec<bool>,
    pub meta: DataMeta,
}

impl DataSet {
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn truncate(&self, m: usize) -> DataSet {
        DataSet { xs: self.xs[..m].to_vec(), ys: self.ys[..m].to_vec(), meta: self.meta.clone() }
    }
}

fn to_q(v: &[f64]) -> Result<Vec<Q>, LearnError> {
    v.iter()
        .map(|&f| rational::from_f64(f).ok_or_else(|| LearnError::Config(format!("non-finite value {f}"))))
        .collect()
}

/// Draws `m` points and labels them with `h_{a*}^N` exactly. Points whose
/// label cannot be decided (boundary or failed witness search) are
/// redrawn.
pub fn generate_realizable(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    target: &[f64],
    distribution: PointDist,
    m: usize,
    seed: u64,
) -> Result<DataSet, LearnError> {
    if target.len() != h.param_dim() {
        return Err(LearnError::Config(format!("target has {} parameters, family needs {}", target.len(), h.param_dim())));
    }
    let labeler = ExactLabeler::new(h, nbhd)?;
    let a = to_q(target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut xs = Vec::with_capacity(m);
    let mut ys = Vec::with_capacity(m);
    while xs.len() < m {
        let mut tries = 0;
        loop {
            let x = distribution.sample(h.input_dim(), &mut rng);
            match labeler.label(&a, &to_q(&x)?) {
                Ok(y) => {
                    xs.push(x);
                    ys.push(y);
                    break;
                }
                Err(CapacityError::Family(crate::families::FamilyError::Undecided(_))) => {
                    tries += 1;
                    if tries >= RESAMPLES {
                        return Err(LearnError::Undecidable(tries));
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(DataSet {
        xs,
        ys,
        meta: DataMeta {
            distribution,
            target: target.to_vec(),
            family: h.name(),
            neighborhood: nbhd.map(|n| n.name()),
            seed,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmConfig {
    /// Candidate evaluations.
    pub budget: usize,
    pub seed: u64,
    /// Scale of random parameter draws.
    pub param_sd: f64,
    /// Neighbor samples per point for families without a closed-form
    /// strategic score.
    pub neighbor_budget: usize,
}

impl Default for ErmConfig {
    fn default() -> Self {
        ErmConfig { budget: 1000, seed: 0, param_sd: 1.0, neighbor_budget: 32 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErmResult {
    pub params: Vec<f64>,
    pub mistakes: usize,
    pub empirical_error: f64,
    /// Best error reached by the search itself, before the injected
    /// candidate is compared.
    pub search_error: f64,
    pub used_injected: bool,
    pub evaluations: usize,
    /// Budget spent without reaching zero loss.
    pub budget_exhausted: bool,
    pub method: String,
}

/// Hypotheses whose last parameter is an offset entering the (strategic)
/// score with slope -1, so the best offset for fixed weights is found by
/// sorting.
fn offset_affine(h: &dyn HypothesisFamily) -> bool {
    let name = h.name();
    name.starts_with("halfspace") || name == "threshold"
}

struct Loss<'a> {
    h: &'a dyn HypothesisFamily,
    nbhd: Option<&'a dyn NeighborhoodSystem>,
    data: &'a DataSet,
    neighbor_budget: usize,
    seed: u64,
}

impl Loss<'_> {
    fn mistakes(&self, a: &[f64]) -> usize {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.data
            .xs
            .iter()
            .zip(&self.data.ys)
            .filter(|(x, &y)| strategic_label_f64(self.h, self.nbhd, a, x, self.neighbor_budget, &mut rng) != y)
            .count()
    }

    /// Sets the offset of `a` to the best value for its weights; returns
    /// the mistakes, or `None` when no closed-form score is available.
    fn best_offset(&self, a: &mut [f64]) -> Option<usize> {
        let k = a.len();
        a[k - 1] = 0.0;
        let mut s: Vec<(f64, bool)> = Vec::with_capacity(self.data.len());
        for (x, &y) in self.data.xs.iter().zip(&self.data.ys) {
            let v = match self.nbhd {
                Some(n) => self.h.strategic_score(n, a, x)?,
                None => self.h.score(a, x),
            };
            s.push((v, y));
        }
        s.sort_by(|p, q| p.0.total_cmp(&q.0));
        // Offset below everything: all positive.
        let negatives = s.iter().filter(|p| !p.1).count();
        let (mut best, mut best_c) = (negatives, s.first().map_or(0.0, |p| p.0 - 1.0));
        let mut errs = negatives;
        for j in 0..s.len() {
            // Offset just above s[j]: s[..=j] become negative.
            errs = if s[j].1 { errs + 1 } else { errs - 1 };
            let tie = j + 1 < s.len() && s[j + 1].0 == s[j].0;
            if !tie && errs < best {
                best = errs;
                best_c = match s.get(j + 1) {
                    Some(next) => 0.5 * (s[j].0 + next.0),
                    None => s[j].0 + 1.0,
                };
            }
        }
        a[k - 1] = best_c;
        Some(best)
    }
}

/// Approximate ERM: anytime multistart over random parameters followed by
/// Gaussian local steps around the incumbent. For halfspace-type families
/// the offset is optimized exactly for each weight vector. `inject`, when
/// given, is compared last and kept only if strictly better, so the result
/// never has more mistakes than it.
pub fn erm_fit(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    data: &DataSet,
    cfg: &ErmConfig,
    inject: Option<&[f64]>,
) -> Result<ErmResult, LearnError> {
    if cfg.budget == 0 {
        return Err(LearnError::Config("ERM budget must be positive".into()));
    }
    let k = h.param_dim();
    let loss = Loss { h, nbhd, data, neighbor_budget: cfg.neighbor_budget, seed: cfg.seed ^ 0x5eed };
    let affine = offset_affine(h);
    let eval = |a: &mut Vec<f64>| -> usize {
        if affine {
            if let Some(e) = loss.best_offset(a) {
                return e;
            }
        }
        loss.mistakes(a)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Vec<f64> = vec![0.0; k];
    let mut best_err = usize::MAX;
    let mut evaluations = 0;
    let starts = cfg.budget.div_ceil(2);
    while evaluations < cfg.budget && best_err > 0 {
        let mut a: Vec<f64> = if evaluations < starts || best_err == usize::MAX {
            (0..k).map(|_| cfg.param_sd * gaussian(&mut rng)).collect()
        } else {
            let frac = (evaluations - starts) as f64 / (cfg.budget - starts).max(1) as f64;
            let step = cfg.param_sd * 0.5 * (1.0 - frac).max(0.02);
            best.iter().map(|v| v + step * gaussian(&mut rng)).collect()
        };
        evaluations += 1;
        let e = eval(&mut a);
        if e < best_err {
            best_err = e;
            best = a;
        }
    }
    let m = data.len();
    let search_error = if m == 0 { 0.0 } else { best_err as f64 / m as f64 };
    let mut used_injected = false;
    if let Some(star) = inject {
        let e = loss.mistakes(star);
        if e < best_err {
            best_err = e;
            best = star.to_vec();
            used_injected = true;
        }
    }
    Ok(ErmResult {
        empirical_error: if m == 0 { 0.0 } else { best_err as f64 / m as f64 },
        mistakes: best_err,
        params: best,
        search_error,
        used_injected,
        evaluations,
        budget_exhausted: evaluations >= cfg.budget && search_error > 0.0,
        method: "approximate-ERM".into(),
    })
}

/// Error of `params` on a labeled sample, with the Hoeffding half-width at
/// confidence `1 - conf`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub error: f64,
    pub n: usize,
    pub half_width: f64,
}

pub fn holdout_error(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    params: &[f64],
    holdout: &DataSet,
    neighbor_budget: usize,
    conf: f64,
) -> ErrorEstimate {
    let loss = Loss { h, nbhd, data: holdout, neighbor_budget, seed: 0x401d };
    let n = holdout.len();
    let error = if n == 0 { 0.0 } else { loss.mistakes(params) as f64 / n as f64 };
    let half_width = if n == 0 { 1.0 } else { ((2.0 / conf).ln() / (2.0 * n as f64)).sqrt() };
    ErrorEstimate { error, n, half_width }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
    pub target: Vec<f64>,
    pub distribution: PointDist,
    pub erm: ErmConfig,
    pub m_min: usize,
    pub m_max: usize,
    /// Ratio between consecutive sample sizes on the search grid.
    pub grid_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub delta: f64,
    /// Smallest grid size meeting the target, or `None` if `m_max` does not.
    pub m_hat: Option<usize>,
    pub success_rate: f64,
    pub trials: usize,
    pub holdout_n: usize,
    pub holdout_half_width: f64,
    /// Fraction of fits at `m_hat` whose search reached zero empirical error.
    pub zero_error_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub family: String,
    pub neighborhood: Option<String>,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `m_hat * eps` against `ln(1/eps)`.
    pub slope: Option<f64>,
    pub method: String,
    pub trial_seeds: Vec<u64>,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,delta,m_hat,m_hat_eps,success_rate,zero_error_rate,trials,holdout_n,holdout_half_width\n");
        for r in &self.rows {
            let (mh, mhe) = match r.m_hat {
                Some(m) => (m.to_string(), (m as f64 * r.eps).to_string()),
                None => (String::new(), String::new()),
            };
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.eps, r.delta, mh, mhe, r.success_rate, r.zero_error_rate, r.trials, r.holdout_n, r.holdout_half_width
            ));
        }
        out
    }
}

/// Geometric grid from `m_min` to `m_max` inclusive.
pub fn sample_grid(m_min: usize, m_max: usize, ratio: f64) -> Vec<usize> {
    let mut g = vec![m_min.max(1)];
    while *g.last().unwrap() < m_max {
        let last = *g.last().unwrap();
        g.push(((last as f64 * ratio).ceil() as usize).max(last + 1).min(m_max));
    }
    g
}

fn trial_seed(seed: u64, t: usize) -> u64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(t as u64 + 1);
    r.gen()
}

/// For each eps, the smallest grid size at which at least a `1 - delta`
/// fraction of trials fit a hypothesis with held-out error `<= eps`.
///
/// Trial `t` trains on prefixes of one sample and is scored on one held-out
/// set of `ceil(20 / min eps)` points, so results are cached across eps and
/// the scan from small to large sizes makes `m_hat` monotone in eps and
/// delta by construction.
pub fn sample_complexity_sweep(
    h: &dyn HypothesisFamily,
    nbhd: Option<&dyn NeighborhoodSystem>,
    cfg: &SweepConfig,
) -> Result<SweepReport, LearnError> {
    if cfg.trials < 20 {
        return Err(LearnError::Config("sweeps need at least 20 trials".into()));
    }
    if cfg.eps.is_empty() || cfg.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) || !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return Err(LearnError::Config("eps and delta must lie in (0, 1)".into()));
    }
    let eps_min = cfg.eps.iter().copied().fold(f64::INFINITY, f64::min);
    let n_hold = (20.0 / eps_min).ceil() as usize;
    let grid = sample_grid(cfg.m_min, cfg.m_max, cfg.grid_ratio);
    let seeds: Vec<u64> = (0..cfg.trials).map(|t| trial_seed(cfg.seed, t)).collect();
    let samples: Vec<(DataSet, DataSet)> = seeds
        .par_iter()
        .map(|&s| {
            let train = generate_realizable(h, nbhd, &cfg.target, cfg.distribution, cfg.m_max, s)?;
            let hold = generate_realizable(h, nbhd, &cfg.target, cfg.distribution, n_hold, s ^ 0x9e37_79b9_7f4a_7c15)?;
            Ok((train, hold))
        })
        .collect::<Result<_, LearnError>>()?;

    // (holdout error, search reached zero) per trial, cached per grid index.
    let mut cache: BTreeMap<usize, Vec<(f64, bool)>> = BTreeMap::new();
    let mut fit_at = |gi: usize| -> Result<Vec<(f64, bool)>, LearnError> {
        if let Some(v) = cache.get(&gi) {
            return Ok(v.clone());
        }
        let m = grid[gi];
        let v = samples
            .par_iter()
            .zip(&seeds)
            .map(|((train, hold), &s)| {
                let data = train.truncate(m);
                let erm = ErmConfig { seed: s ^ m as u64, ..cfg.erm.clone() };
                let fit = erm_fit(h, nbhd, &data, &erm, Some(&cfg.target))?;
                let est = holdout_error(h, nbhd, &fit.params, hold, cfg.erm.neighbor_budget, 0.05);
                Ok((est.error, fit.search_error == 0.0))
            })
            .collect::<Result<Vec<_>, LearnError>>()?;
        cache.insert(gi, v.clone());
        Ok(v)
    };

    let need = ((1.0 - cfg.delta) * cfg.trials as f64 - 1e-9).ceil() as usize;
    let half_width = ((2.0f64 / 0.05).ln() / (2.0 * n_hold as f64)).sqrt();
    let mut rows = Vec::new();
    for &eps in &cfg.eps {
        let mut row = SweepRow {
            eps,
            delta: cfg.delta,
            m_hat: None,
            success_rate: 0.0,
            trials: cfg.trials,
            holdout_n: n_hold,
            holdout_half_width: half_width,
            zero_error_rate: 0.0,
        };
        for gi in 0..grid.len() {
            let v = fit_at(gi)?;
            let ok = v.iter().filter(|(e, _)| *e <= eps).count();
            row.success_rate = ok as f64 / cfg.trials as f64;
            row.zero_error_rate = v.iter().filter(|p| p.1).count() as f64 / cfg.trials as f64;
            if ok >= need {
                row.m_hat = Some(grid[gi]);
                break;
            }
        }
        rows.push(row);
    }
    let xy: Vec<(f64, f64)> =
        rows.iter().filter_map(|r| r.m_hat.map(|m| ((1.0 / r.eps).ln(), m as f64 * r.eps))).collect();
    Ok(SweepReport {
        family: h.name(),
        neighborhood: nbhd.map(|n| n.name()),
        slope: crate::capacity::loglog_slope(&xy),
        rows,
        method: "approximate-ERM".into(),
        trial_seeds: seeds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{Halfspace, Identity, LpBall, PNorm, Radius, Threshold};
    use crate::rational::ratio;

    const BOX: PointDist = PointDist::Box { lo: -1.0, hi: 1.0 };

    #[test]
    fn labels_match_closed_form_and_identity() {
        let h = Halfspace::new(2);
        let n = LpBall::new(2, PNorm::Two, Radius::Const(ratio(1, 4))).unwrap();
        let a = [1.0, -0.5, 0.3];
        let d = generate_realizable(&h, Some(&n), &a, BOX, 500, 1).unwrap();
        for (x, &y) in d.xs.iter().zip(&d.ys) {
            let s = a[0] * x[0] + a[1] * x[1] - a[2] + 0.25 * (a[0] * a[0] + a[1] * a[1]).sqrt();
            assert_eq!(y, s >= 0.0);
        }
        let id = generate_realizable(&h, Some(&Identity::new(2)), &a, BOX, 300, 2).unwrap();
        let zero = LpBall::new(2, PNorm::Two, Radius::Const(ratio(0, 1))).unwrap();
        let z = generate_realizable(&h, Some(&zero), &a, BOX, 300, 2).unwrap();
        for (x, &y) in id.xs.iter().zip(&id.ys) {
            assert_eq!(y, h.evaluate_f64(&a, x));
        }
        assert_eq!(id.ys, z.ys);
        assert_eq!(generate_realizable(&h, Some(&n), &a, BOX, 50, 9).unwrap(), generate_realizable(&h, Some(&n), &a, BOX, 50, 9).unwrap());
    }

    #[test]
    fn erm_basics() {
        let d = generate_realizable(&Threshold, None, &[0.2], BOX, 50, 3).unwrap();
        let cfg = ErmConfig { budget: 1000, ..ErmConfig::default() };
        let r = erm_fit(&Threshold, None, &d, &cfg, None).unwrap();
        assert_eq!(r.mistakes, 0);
        let empty = d.truncate(0);
        assert_eq!(erm_fit(&Threshold, None, &empty, &cfg, None).unwrap().empirical_error, 0.0);
        assert!(erm_fit(&Threshold, None, &d, &ErmConfig { budget: 0, ..cfg }, None).is_err());
    }

    #[test]
    fn strategic_halfspace_erm_reaches_zero() {
        let h = Halfspace::new(2);
        let n = LpBall::new(2, PNorm::Two, Radius::Const(ratio(1, 4))).unwrap();
        let a = [1.0, -0.5, 0.3];
        let mut zero = 0;
        for t in 0..20 {
            let d = generate_realizable(&h, Some(&n), &a, BOX, 100, 100 + t).unwrap();
            let cfg = ErmConfig { budget: 10_000, seed: t, ..ErmConfig::default() };
            let r = erm_fit(&h, Some(&n), &d, &cfg, Some(&a)).unwrap();
            assert_eq!(r.mistakes, 0);
            if r.search_error == 0.0 {
                zero += 1;
            }
        }
        assert!(zero >= 19, "{zero}/20");
    }
}

#[cfg(test)]
mod sweep_tests {
    use super::*;
    use crate::families::{Halfspace, LpBall, PNorm, Radius, Threshold};
    use crate::rational::ratio;

    fn cfg(target: Vec<f64>) -> SweepConfig {
        SweepConfig {
            eps: vec![0.2, 0.1, 0.05],
            delta: 0.1,
            trials: 20,
            seed: 11,
            target,
            distribution: PointDist::Box { lo: -1.0, hi: 1.0 },
            erm: ErmConfig { budget: 400, ..ErmConfig::default() },
            m_min: 2,
            m_max: 2000,
            grid_ratio: 1.2,
        }
    }

    #[test]
    fn threshold_sweep_is_monotone_and_in_envelope() {
        let r = sample_complexity_sweep(&Threshold, None, &cfg(vec![0.1])).unwrap();
        let m: Vec<usize> = r.rows.iter().map(|r| r.m_hat.unwrap()).collect();
        assert!(m.windows(2).all(|w| w[0] <= w[1]), "{m:?}");
        for row in &r.rows {
            let mh = row.m_hat.unwrap() as f64;
            assert!(mh >= 0.5 / row.eps && mh <= 10.0 * (1.0 / row.eps).ln() / row.eps, "{row:?}");
        }
    }

    #[test]
    fn strategic_and_base_halfspace_curves_agree() {
        let h = Halfspace::new(2);
        let n = LpBall::new(2, PNorm::Two, Radius::Const(ratio(1, 4))).unwrap();
        let c = cfg(vec![1.0, -0.5, 0.3]);
        let s = sample_complexity_sweep(&h, Some(&n), &c).unwrap();
        let b = sample_complexity_sweep(&h, None, &c).unwrap();
        eprintln!("{}\n{}", s.to_csv(), b.to_csv());
        for (x, y) in s.rows.iter().zip(&b.rows) {
            let (x, y) = (x.m_hat.unwrap() as f64, y.m_hat.unwrap() as f64);
            assert!(x <= 2.0 * y && y <= 2.0 * x, "{x} vs {y}");
        }
    }
}
