//! Exact generators for the VC-blowup constructions: each builds a finite
//! (or integer-indexed) class with disjoint supports together with a
//! certificate that the strategic class shatters `n` points.

use crate::families::{FamilyError, FiniteSupportClass, FloorPartition, IntervalRadius, NeighborhoodSystem};
use crate::interval::{self, Interval};
use crate::rational::{self, format_rational, int, ratio, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("radius {s} is outside the covered range; needs at least {required_t} blocks")]
    OutOfRange { s: String, required_t: usize },
    #[error("could not certify {what}: enclosure [{lo}, {hi}] undecided at the precision cap")]
    PrecisionCap { what: String, lo: String, hi: String },
    #[error("no m <= {cap} with frac(sqrt(2) m) in I_A for A = {subset:?}")]
    ScanCap { subset: Vec<usize>, cap: u64 },
    #[error(transparent)]
    Family(#[from] FamilyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    Fixed,
    AllRadii,
    Partition,
    Frac,
}

/// A point given exactly or by a certified enclosure of an irrational value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CertPoint {
    Exact(#[serde(with = "rational::serde_q")] Q),
    Enclosed { expr: String, enclosure: Interval },
}

/// One row of the witness table: the hypothesis realizing subset `S` and,
/// per candidate point, the support point that does (or does not) reach it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetRow {
    /// 1-based indices of the labeled-positive candidates.
    pub subset: Vec<usize>,
    /// Index into the class, or the integer parameter for `frac`.
    pub hypothesis: i64,
    /// Per candidate: the nearest support point.
    pub witnesses: Vec<CertPoint>,
    /// Strategic labels computed exactly.
    pub labels: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionInstance {
    pub kind: ConstructionKind,
    pub n: usize,
    #[serde(with = "rational::serde_q_opt")]
    pub r: Option<Q>,
    #[serde(with = "rational::serde_q_opt")]
    pub r_prime: Option<Q>,
    pub neighborhood: String,
    #[serde(with = "rational::serde_q_vec")]
    pub candidates: Vec<Q>,
    /// Anchor points (fixed blowup) or integer cells (`b_i`).
    #[serde(with = "rational::serde_q_vec")]
    pub anchors: Vec<Q>,
    pub rows: Vec<SubsetRow>,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub class: Option<FiniteSupportClass>,
}

impl ConstructionInstance {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn subset_of(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect()
}

/// Strategic label of a finite-support hypothesis: some support point lies
/// in `N_p`.
pub fn finite_strategic_label(
    class: &FiniteSupportClass,
    index: usize,
    nbhd: &dyn NeighborhoodSystem,
    p: &[Q],
) -> Result<bool, FamilyError> {
    for q in &class.sets[index] {
        if nbhd.contains(p, q)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Exact label matrix (rows = hypotheses) of `H^N` on one-dimensional points.
pub fn finite_label_matrix(
    class: &FiniteSupportClass,
    nbhd: &dyn NeighborhoodSystem,
    points: &[Q],
) -> Result<Vec<Vec<bool>>, FamilyError> {
    (0..class.len())
        .into_par_iter()
        .map(|h| points.iter().map(|p| finite_strategic_label(class, h, nbhd, std::slice::from_ref(p))).collect())
        .collect()
}

fn distinct_traces(m: &[Vec<bool>]) -> usize {
    m.iter().collect::<BTreeSet<_>>().len()
}

/// Common certificate checks for a finite class whose row `mask` should
/// realize subset `mask` on the candidates.
fn finite_checks(
    class: &FiniteSupportClass,
    nbhd: &dyn NeighborhoodSystem,
    candidates: &[Q],
    label: &str,
) -> Result<(Check, Check), FamilyError> {
    let n = candidates.len();
    let m = finite_label_matrix(class, nbhd, candidates)?;
    let traces = distinct_traces(&m);
    let rows_ok = m.iter().enumerate().all(|(mask, row)| row.iter().enumerate().all(|(i, &b)| b == (mask >> i & 1 == 1)));
    Ok((
        Check::new(
            &format!("strategic-shattering{label}"),
            traces == 1 << n && rows_ok,
            format!("{traces} distinct traces of {} required under {}", 1usize << n, nbhd.name()),
        ),
        Check::new("row-realizes-subset", rows_ok, "hypothesis S labels exactly the candidates in S"),
    ))
}

fn class_vc_check(class: &FiniteSupportClass) -> Check {
    let disjoint = class.first_intersection().is_none();
    let nonempty = class.sets.iter().all(|s| !s.is_empty());
    Check::new(
        "class-vc-1",
        disjoint && nonempty && class.len() >= 2,
        format!("{} nonempty pairwise disjoint supports (shatters a singleton, no pair)", class.len()),
    )
}

/// Lemma construction: `2^n` finite sets around anchors `p_i = 10 r i`.
pub fn build_fixed_blowup(n: usize, r: &Q, r_prime: &Q) -> Result<ConstructionInstance, ConstructionError> {
    if n == 0 || n > 20 {
        return Err(ConstructionError::InvalidParams("need 1 <= n <= 20".into()));
    }
    if !r_prime.is_positive() || r_prime > r {
        return Err(ConstructionError::InvalidParams("need r >= r' > 0".into()));
    }
    let anchors: Vec<Q> = (1..=n).map(|i| r * int(10 * i as i64)).collect();
    let in_off = r_prime / int(2);
    let out_off = r * ratio(3, 2);
    let scale = Q::from_integer(num_bigint::BigInt::one() << n);
    let mut sets = Vec::new();
    let mut rows = Vec::new();
    for mask in 0..1usize << n {
        // Distinct jitter per subset, below r'/4.
        let jitter = r_prime / int(4) * int(mask as i64) / &scale;
        let pts: Vec<Q> = anchors
            .iter()
            .enumerate()
            .map(|(i, p)| p + if mask >> i & 1 == 1 { &in_off } else { &out_off } + &jitter)
            .collect();
        rows.push((mask, pts.clone()));
        sets.push(pts.into_iter().map(|q| vec![q]).collect());
    }
    let class = FiniteSupportClass::new(1, sets)?;

    let mut checks = vec![class_vc_check(&class)];
    let separated = anchors.windows(2).all(|w| &w[1] - &w[0] > r * int(4));
    checks.push(Check::new("anchor-separation", separated, "consecutive anchors more than 4r apart"));
    let mut dist_ok = true;
    let mut cell_ok = true;
    for (mask, pts) in &rows {
        for (i, q) in pts.iter().enumerate() {
            let d = (q - &anchors[i]).abs();
            dist_ok &= if mask >> i & 1 == 1 { &d < r_prime } else { &d > r };
            cell_ok &= d < r * int(2);
        }
    }
    checks.push(Check::new("distance-invariant", dist_ok, "|q - p| < r' inside S, > r outside"));
    checks.push(Check::new("cells", cell_ok, "every q_i^S lies in U_i = (p_i - 2r, p_i + 2r)"));
    let mid = (r + r_prime) / int(2);
    let mut radii = vec![r_prime.clone(), mid, r.clone()];
    radii.dedup();
    for s in &radii {
        let nb = IntervalRadius::new(s.clone())?;
        let (shatter, realize) = finite_checks(&class, &nb, &anchors, &format!("@s={}", format_rational(s)))?;
        checks.push(shatter);
        if s == r {
            checks.push(realize);
        }
    }
    let table = rows
        .iter()
        .map(|(mask, pts)| SubsetRow {
            subset: subset_of(*mask, n),
            hypothesis: *mask as i64,
            witnesses: pts.iter().cloned().map(CertPoint::Exact).collect(),
            labels: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        })
        .collect();
    Ok(ConstructionInstance {
        kind: ConstructionKind::Fixed,
        n,
        r: Some(r.clone()),
        r_prime: Some(r_prime.clone()),
        neighborhood: IntervalRadius::new(r.clone())?.name(),
        candidates: anchors.clone(),
        anchors,
        rows: table,
        checks,
        notes: vec!["q_i^S = p_i + r'/2 (in S) or p_i + 3r/2 (not in S), plus jitter (r'/4) * mask / 2^n".into()],
        class: Some(class),
    })
}

/// Symmetric `m` window for `t` blocks, in zigzag order `0, 1, -1, 2, -2, ...`.
pub fn radius_window(t: usize) -> Vec<i32> {
    let w = (t.max(1) as f64).log2().ceil() as i32;
    let mut out = vec![0];
    for k in 1..=w {
        out.push(k);
        out.push(-k);
    }
    out
}

/// The first `t` pairs `(n, m)` of the Cantor diagonal over `n >= 1` and
/// the window of `m` values.
pub fn block_pairs(t: usize) -> Vec<(usize, i32)> {
    let window = radius_window(t);
    let mut out = Vec::with_capacity(t);
    let mut d = 0;
    while out.len() < t {
        for (j, &m) in window.iter().enumerate().take(d + 1) {
            if out.len() == t {
                break;
            }
            out.push((d - j + 1, m));
        }
        d += 1;
    }
    out
}

fn pow2(m: i32) -> Q {
    let one = num_bigint::BigInt::one();
    if m >= 0 {
        Q::from_integer(one << m as usize)
    } else {
        Q::new(one.clone(), one << (-m) as usize)
    }
}

/// One shifted block of the all-radii class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadiusBlock {
    pub n: usize,
    pub m: i32,
    #[serde(with = "rational::serde_q")]
    pub shift: Q,
    #[serde(with = "rational::serde_q")]
    pub length: Q,
    /// Index of the block's first hypothesis in the merged class.
    pub first_hypothesis: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AllRadiiInstance {
    pub t: usize,
    pub blocks: Vec<RadiusBlock>,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub class: Option<FiniteSupportClass>,
}

impl AllRadiiInstance {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// The block whose dyadic radius range `[2^{-m-1}, 2^{-m}]` contains
    /// `s`, preferring the largest `n`.
    pub fn locate(&self, s: &Q) -> Result<&RadiusBlock, ConstructionError> {
        if !s.is_positive() {
            return Err(ConstructionError::InvalidParams("radius must be positive".into()));
        }
        let fits = |m: i32| pow2(-m - 1) <= *s && *s <= pow2(-m);
        let best = self.blocks.iter().filter(|b| fits(b.m)).max_by_key(|b| b.n);
        best.ok_or_else(|| {
            let required_t = (1..=1 << 16).find(|&t| block_pairs(t).iter().any(|&(_, m)| fits(m))).unwrap_or(usize::MAX);
            ConstructionError::OutOfRange { s: format_rational(s), required_t }
        })
    }

    /// Shattering certificate for radius `s`: the located block's anchors
    /// (shifted) are shattered by the merged class under `N_s`.
    pub fn certify(&self, s: &Q) -> Result<ConstructionInstance, ConstructionError> {
        let b = self.locate(s)?;
        let class = self.class.as_ref().expect("class is built with the instance");
        let r = pow2(-b.m);
        let anchors: Vec<Q> = (1..=b.n).map(|i| &b.shift + &r * int(10 * i as i64)).collect();
        let nb = IntervalRadius::new(s.clone())?;
        // Only this block's hypotheses can reach its anchors; check all rows
        // of the merged class anyway.
        let m = finite_label_matrix(class, &nb, &anchors)?;
        let traces = distinct_traces(&m);
        let mut checks = vec![Check::new(
            "strategic-shattering",
            traces >= 1 << b.n,
            format!("{traces} distinct traces on block (n={}, m={}) under radius {}", b.n, b.m, format_rational(s)),
        )];
        checks.extend(self.checks.iter().cloned());
        Ok(ConstructionInstance {
            kind: ConstructionKind::AllRadii,
            n: b.n,
            r: Some(r.clone()),
            r_prime: Some(pow2(-b.m - 1)),
            neighborhood: nb.name(),
            candidates: anchors.clone(),
            anchors,
            rows: Vec::new(),
            checks,
            notes: vec![format!("truncated to the first {} (n, m) pairs; m window {:?}", self.t, radius_window(self.t))],
            class: None,
        })
    }
}

/// Corollary construction truncated to `t` blocks.
pub fn build_all_radii(t: usize) -> Result<AllRadiiInstance, ConstructionError> {
    if t == 0 {
        return Err(ConstructionError::InvalidParams("need t >= 1".into()));
    }
    let mut shift = Q::zero();
    let mut blocks = Vec::new();
    let mut sets = Vec::new();
    let mut gap_ok = true;
    let mut prev_max: Option<Q> = None;
    for (n, m) in block_pairs(t) {
        let r = pow2(-m);
        let inner = build_fixed_blowup(n, &r, &pow2(-m - 1))?;
        let length = &r * int(10 * (n as i64 + 1));
        let class = inner.class.expect("fixed blowup returns its class");
        let first = sets.len();
        let mut lo: Option<Q> = None;
        let mut hi: Option<Q> = None;
        for s in class.sets {
            let shifted: Vec<Vec<Q>> = s.into_iter().map(|p| vec![&p[0] + &shift]).collect();
            for p in &shifted {
                lo = Some(lo.map_or(p[0].clone(), |v: Q| v.min(p[0].clone())));
                hi = Some(hi.map_or(p[0].clone(), |v: Q| v.max(p[0].clone())));
            }
            sets.push(shifted);
        }
        let (lo, hi) = (lo.unwrap(), hi.unwrap());
        gap_ok &= lo >= shift && hi <= &shift + &length;
        if let Some(pm) = &prev_max {
            gap_ok &= &lo - pm >= Q::one();
        }
        prev_max = Some(hi);
        blocks.push(RadiusBlock { n, m, shift: shift.clone(), length: length.clone(), first_hypothesis: first });
        shift = shift + length + Q::one();
    }
    let class = FiniteSupportClass::new(1, sets)?;
    let checks = vec![
        class_vc_check(&class),
        Check::new("block-gap", gap_ok, "consecutive block supports separated by at least 1"),
    ];
    Ok(AllRadiiInstance { t, blocks, checks, class: Some(class) })
}

/// `alpha(S) = 1/100 + sum_j s_j 10^{-(2+j)}`.
pub fn alpha(mask: usize, n: usize) -> Q {
    let mut a = ratio(1, 100);
    for j in 1..=n {
        if mask >> (j - 1) & 1 == 1 {
            a += Q::new(1.into(), num_bigint::BigInt::from(10).pow(2 + j as u32));
        }
    }
    a
}

/// Partition pathology truncated to `n` candidates.
pub fn build_partition_pathology(n: usize) -> Result<ConstructionInstance, ConstructionError> {
    if n == 0 || n > 20 {
        return Err(ConstructionError::InvalidParams("need 1 <= n <= 20".into()));
    }
    let half = ratio(1, 2);
    let candidates: Vec<Q> = (1..=n).map(|i| int(i as i64) + &half).collect();
    let mut sets = Vec::new();
    let mut rows = Vec::new();
    for mask in 0..1usize << n {
        let a = alpha(mask, n);
        let pts: Vec<Q> = (1..=n)
            .map(|i| if mask >> (i - 1) & 1 == 1 { int(i as i64) + &half + &a } else { -int(i as i64) - &a })
            .collect();
        rows.push(SubsetRow {
            subset: subset_of(mask, n),
            hypothesis: mask as i64,
            witnesses: pts.iter().cloned().map(CertPoint::Exact).collect(),
            labels: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        });
        sets.push(pts.into_iter().map(|q| vec![q]).collect());
    }
    let class = FiniteSupportClass::new(1, sets)?;
    let nb = FloorPartition;
    let mut checks = vec![class_vc_check(&class)];
    let alphas_ok = (0..1usize << n).all(|m| {
        let a = alpha(m, n);
        a.is_positive() && a < ratio(1, 10)
    });
    checks.push(Check::new("alpha-range", alphas_ok, "alpha(S) in (0, 1/10) and injective"));
    // Neighborhood family {[j, j+1)}: cells of distinct candidates are
    // disjoint and each candidate lies in its own cell.
    let cells: Vec<_> = candidates.iter().map(rational::floor).collect();
    let distinct = cells.iter().collect::<BTreeSet<_>>().len() == cells.len();
    let reflexive = candidates.iter().all(|c| nb.contains(&[c.clone()], &[c.clone()]).unwrap_or(false));
    checks.push(Check::new(
        "neighborhood-vc-1",
        distinct && reflexive,
        "N_x = [floor x, floor x + 1) are pairwise equal or disjoint: shatters a singleton, no pair",
    ));
    let (shatter, realize) = finite_checks(&class, &nb, &candidates, "")?;
    checks.push(shatter);
    checks.push(realize);
    Ok(ConstructionInstance {
        kind: ConstructionKind::Partition,
        n,
        r: None,
        r_prime: None,
        neighborhood: nb.name(),
        candidates: candidates.clone(),
        anchors: cells.into_iter().map(Q::from_integer).collect(),
        rows,
        checks,
        notes: vec!["finite truncation: S ranges over subsets of [n]".into()],
        class: Some(class),
    })
}

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpenInterval {
    #[serde(with = "rational::serde_q")]
    pub lo: Q,
    #[serde(with = "rational::serde_q")]
    pub hi: Q,
}

impl OpenInterval {
    fn len(&self) -> Q {
        &self.hi - &self.lo
    }
}

/// The interval induction: integers `b_1 < ... < b_n` and, for each
/// `A` (bitmask), an interval `I_A` with `frac(b_i t)` in `P` for `i` in
/// `A` and in `Q` otherwise, for all `t` in `I_A`.
pub fn frac_induction(n: usize, r: &Q) -> (Vec<i64>, Vec<OpenInterval>) {
    let half = ratio(1, 2);
    let p = OpenInterval { lo: &half - r, hi: &half + r };
    let q = OpenInterval { lo: Q::zero(), hi: &half - r };
    let mut bs = Vec::new();
    let mut intervals = vec![OpenInterval { lo: Q::zero(), hi: Q::one() }];
    for k in 0..n {
        let v = intervals.iter().map(OpenInterval::len).min().unwrap();
        // Smallest integer b with b > 2 / v.
        let b: num_bigint::BigInt = rational::floor(&(int(2) / &v)) + 1;
        let bq = Q::from_integer(b.clone());
        let mut next = vec![OpenInterval { lo: Q::zero(), hi: Q::zero() }; intervals.len() * 2];
        for (mask, ia) in intervals.iter().enumerate() {
            // A full period [j/b, (j+1)/b) inside I_A.
            let j = Q::from_integer(rational::floor(&(&ia.lo * &bq)) + 1);
            let sub = |target: &OpenInterval| OpenInterval { lo: (&j + &target.lo) / &bq, hi: (&j + &target.hi) / &bq };
            next[mask | 1 << k] = sub(&p);
            next[mask] = sub(&q);
        }
        bs.push(i64::try_from(b).expect("b fits in i64"));
        intervals = next;
    }
    (bs, intervals)
}

/// Certified enclosure of `frac(sqrt(2) * k)`, refining precision.
fn frac_sqrt2(k: &Q, max_bits: u32) -> Result<Interval, Interval> {
    let mut bits = 64;
    loop {
        let e = interval::sqrt(&int(2), bits).scale(k);
        if let Some(f) = e.frac() {
            return Ok(f);
        }
        if bits >= max_bits {
            return Err(e);
        }
        bits *= 2;
    }
}

/// Decides `frac(sqrt(2) k)` in `(lo, hi)`; returns the enclosure used.
fn frac_in(k: &Q, iv: &OpenInterval, max_bits: u32) -> Result<(bool, Interval), Interval> {
    let mut bits = 64;
    loop {
        let e = interval::sqrt(&int(2), bits).scale(k);
        if let Some(f) = e.frac() {
            if let Some(inside) = f.inside_open(&iv.lo, &iv.hi) {
                return Ok((inside, f));
            }
        }
        if bits >= max_bits {
            return Err(e);
        }
        bits *= 2;
    }
}

const MAX_BITS: u32 = 4096;

/// Fractional-part construction with integer parameters `m_A` found by a
/// certified scan `m = 1, 2, ...` up to `scan_cap`.
pub fn build_frac_construction(n: usize, r: &Q, scan_cap: u64) -> Result<ConstructionInstance, ConstructionError> {
    build_frac_construction_capped(n, r, scan_cap, MAX_BITS)
}

/// As [`build_frac_construction`] with an explicit precision cap in bits.
pub fn build_frac_construction_capped(
    n: usize,
    r: &Q,
    scan_cap: u64,
    max_bits: u32,
) -> Result<ConstructionInstance, ConstructionError> {
    if n == 0 || n > 12 {
        return Err(ConstructionError::InvalidParams("need 1 <= n <= 12".into()));
    }
    if !r.is_positive() || *r >= ratio(1, 2) {
        return Err(ConstructionError::InvalidParams("need 0 < r < 1/2".into()));
    }
    let (bs, intervals) = frac_induction(n, r);
    let half = ratio(1, 2);
    let candidates: Vec<Q> = bs.iter().map(|&b| int(b) + &half).collect();

    let found: Vec<Result<i64, ConstructionError>> = intervals
        .par_iter()
        .enumerate()
        .map(|(mask, iv)| {
            for m in 1..=scan_cap as i64 {
                match frac_in(&int(m), iv, max_bits) {
                    Ok((true, _)) => return Ok(m),
                    Ok((false, _)) => {}
                    Err(e) => {
                        return Err(ConstructionError::PrecisionCap {
                            what: format!("frac(sqrt(2) * {m}) in I_A"),
                            lo: format_rational(&e.lo),
                            hi: format_rational(&e.hi),
                        })
                    }
                }
            }
            Err(ConstructionError::ScanCap { subset: subset_of(mask, n), cap: scan_cap })
        })
        .collect();
    let ms = found.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut b_growth = true;
    for k in 1..n {
        let v = intervals_min_len(&frac_induction(k, r).1);
        b_growth &= int(bs[k]) > int(2) / v;
    }
    let mut rows = Vec::new();
    let mut labels_ok = true;
    let mut traces = BTreeSet::new();
    for (mask, &m) in ms.iter().enumerate() {
        let mut witnesses = Vec::new();
        let mut labels = Vec::new();
        for (i, &b) in bs.iter().enumerate() {
            let k = int(m) * int(b);
            let f = frac_sqrt2(&k, max_bits).map_err(|e| ConstructionError::PrecisionCap {
                what: format!("frac(sqrt(2) * {m} * {b})"),
                lo: format_rational(&e.lo),
                hi: format_rational(&e.hi),
            })?;
            // x_i reaches z_i = b_i + f iff |1/2 - f| <= r; points of other
            // cells are more than 1/2 > r away.
            let dist = f.sub(&Interval::point(half.clone()));
            let within = match (dist.cmp_q(&-r), dist.cmp_q(r)) {
                (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Less)) => true,
                (Some(std::cmp::Ordering::Less), _) | (_, Some(std::cmp::Ordering::Greater)) => false,
                _ => {
                    return Err(ConstructionError::PrecisionCap {
                        what: format!("|x_{} - z_{}| vs r", i + 1, i + 1),
                        lo: format_rational(&dist.lo),
                        hi: format_rational(&dist.hi),
                    })
                }
            };
            labels_ok &= within == (mask >> i & 1 == 1);
            labels.push(within);
            witnesses.push(CertPoint::Enclosed {
                expr: format!("{b} + frac(sqrt(2) * {m} * {b})"),
                enclosure: Interval::new(&f.lo + int(b), &f.hi + int(b)),
            });
        }
        traces.insert(labels.clone());
        rows.push(SubsetRow { subset: subset_of(mask, n), hypothesis: m, witnesses, labels });
    }
    let distinct_params = ms.iter().collect::<BTreeSet<_>>().len() == ms.len();
    let checks = vec![
        Check::new("b-growth", b_growth, "b_{k+1} > 2 / v at every induction step"),
        Check::new("m-found", true, format!("certified m_A for all {} subsets", ms.len())),
        Check::new(
            "class-vc-1",
            distinct_params,
            "distinct integer parameters give disjoint H_a (sqrt(2) irrational); each H_a is nonempty",
        ),
        Check::new(
            "strategic-shattering",
            labels_ok && traces.len() == 1 << n,
            format!("{} distinct traces of {} required", traces.len(), 1usize << n),
        ),
        Check::new("cross-cell-gap", half > *r, "points of other integer cells are more than 1/2 > r away"),
    ];
    Ok(ConstructionInstance {
        kind: ConstructionKind::Frac,
        n,
        r: Some(r.clone()),
        r_prime: None,
        neighborhood: IntervalRadius::new(r.clone())?.name(),
        candidates,
        anchors: bs.iter().map(|&b| int(b)).collect(),
        rows,
        checks,
        notes: vec![format!(
            "I_A intervals: {}",
            intervals
                .iter()
                .map(|iv| format!("({}, {})", format_rational(&iv.lo), format_rational(&iv.hi)))
                .collect::<Vec<_>>()
                .join(" ")
        )],
        class: None,
    })
}

fn intervals_min_len(iv: &[OpenInterval]) -> Q {
    iv.iter().map(OpenInterval::len).min().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_n3() {
        let c = build_fixed_blowup(3, &int(1), &ratio(1, 2)).unwrap();
        assert_eq!(c.anchors, vec![int(10), int(20), int(30)]);
        assert_eq!(c.class.as_ref().unwrap().len(), 8);
        assert!(c.passed(), "{:?}", c.checks);
        assert!(build_fixed_blowup(2, &ratio(1, 2), &int(1)).is_err());
    }

    #[test]
    fn fixed_n1() {
        let c = build_fixed_blowup(1, &int(1), &int(1)).unwrap();
        assert_eq!(c.class.as_ref().unwrap().len(), 2);
        assert!(c.passed());
    }

    #[test]
    fn block_enumeration() {
        assert_eq!(radius_window(4), vec![0, 1, -1, 2, -2]);
        let pairs = block_pairs(6);
        assert_eq!(pairs, vec![(1, 0), (2, 0), (1, 1), (3, 0), (2, 1), (1, -1)]);
    }

    #[test]
    fn all_radii_locates() {
        let inst = build_all_radii(6).unwrap();
        assert!(inst.passed());
        let b = inst.locate(&ratio(3, 5)).unwrap();
        assert_eq!(b.m, 0);
        assert!(inst.blocks.windows(2).all(|w| w[1].shift >= &w[0].shift + &w[0].length + Q::one()));
        let cert = inst.certify(&ratio(3, 5)).unwrap();
        assert!(cert.passed(), "{:?}", cert.checks);
        assert!(matches!(inst.locate(&ratio(1, 100)), Err(ConstructionError::OutOfRange { .. })));
    }

    #[test]
    fn partition_small() {
        assert_eq!(alpha(0b01, 2), ratio(11, 1000));
        let c = build_partition_pathology(2).unwrap();
        assert_eq!(c.rows[1].witnesses, vec![CertPoint::Exact(ratio(1511, 1000)), CertPoint::Exact(ratio(-2011, 1000))]);
        assert!(c.rows[0].witnesses.iter().all(|w| matches!(w, CertPoint::Exact(q) if q.is_negative())));
        assert!(c.passed());
    }

    #[test]
    fn frac_induction_values() {
        let (bs, iv) = frac_induction(3, &ratio(1, 4));
        assert_eq!(bs, vec![3, 25, 201]);
        assert_eq!(iv.len(), 8);
        let one = build_frac_construction(1, &ratio(1, 4), 1000).unwrap();
        assert!(one.passed());
    }
}
