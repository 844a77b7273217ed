use super::SolveError;
use crate::rational::{self, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpRel {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

/// Minimize `objective . x` subject to `matrix x rels rhs` and
/// `x_i >= lower_i` where a lower bound is given (`None` means free).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LPInstance {
    #[serde(with = "rational::serde_q_vec")]
    pub objective: Vec<Q>,
    #[serde(with = "rational::serde_q_mat")]
    pub matrix: Vec<Vec<Q>>,
    pub rels: Vec<LpRel>,
    #[serde(with = "rational::serde_q_vec")]
    pub rhs: Vec<Q>,
    #[serde(with = "serde_lower")]
    pub lower: Vec<Option<Q>>,
}

mod serde_lower {
    use crate::rational::{format_rational, parse_rational, Q};
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Option<Q>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|q| q.as_ref().map(format_rational)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<Q>>, D::Error> {
        Vec::<Option<String>>::deserialize(d)?
            .into_iter()
            .map(|o| o.map(|t| parse_rational(&t).map_err(D::Error::custom)).transpose())
            .collect()
    }
}

impl LPInstance {
    /// All variables nonnegative.
    pub fn nonnegative(objective: Vec<Q>, matrix: Vec<Vec<Q>>, rels: Vec<LpRel>, rhs: Vec<Q>) -> Self {
        let n = objective.len();
        LPInstance { objective, matrix, rels, rhs, lower: vec![Some(Q::zero()); n] }
    }

    fn check(&self) -> Result<(), SolveError> {
        let n = self.objective.len();
        let m = self.matrix.len();
        if self.rels.len() != m || self.rhs.len() != m {
            return Err(SolveError::DimensionMismatch(format!(
                "{m} rows but {} relations and {} right-hand sides",
                self.rels.len(),
                self.rhs.len()
            )));
        }
        if self.lower.len() != n {
            return Err(SolveError::DimensionMismatch(format!("{n} variables but {} bounds", self.lower.len())));
        }
        if let Some(r) = self.matrix.iter().find(|r| r.len() != n) {
            return Err(SolveError::DimensionMismatch(format!("row of length {} for {n} variables", r.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum LpResult {
    Optimal {
        #[serde(with = "rational::serde_q")]
        value: Q,
        #[serde(with = "rational::serde_q_vec")]
        point: Vec<Q>,
        pivots: usize,
    },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    rhs: Vec<Q>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize, obj: &mut [Q], obj_val: &mut Q) {
        let p = self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for (v, pv) in obj.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            *obj_val -= &f * &prhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Reduced-cost row and current objective value for cost vector `c`.
    fn reduced(&self, c: &[Q]) -> (Vec<Q>, Q) {
        let mut obj = c.to_vec();
        // obj_val tracks -(c_B . x_B) so pivots can update it uniformly.
        let mut val = Q::zero();
        for (i, &b) in self.basis.iter().enumerate() {
            if c[b].is_zero() {
                continue;
            }
            for (o, t) in obj.iter_mut().zip(&self.rows[i]) {
                *o -= &c[b] * t;
            }
            val -= &c[b] * &self.rhs[i];
        }
        (obj, val)
    }

    /// Bland's rule; `allowed` masks columns that may enter.
    fn run(&mut self, c: &[Q], allowed: &[bool]) -> Result<Q, ()> {
        let (mut obj, mut val) = self.reduced(c);
        loop {
            let Some(e) = (0..obj.len()).find(|&j| allowed[j] && obj[j].is_negative()) else {
                return Ok(-val);
            };
            let mut best: Option<(Q, usize, usize)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][e];
                if a.is_positive() {
                    let ratio = &self.rhs[i] / a;
                    let better = match &best {
                        None => true,
                        Some((br, _, bb)) => ratio < *br || (ratio == *br && self.basis[i] < *bb),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, r, _)) = best else { return Err(()) };
            self.pivot(r, e, &mut obj, &mut val);
        }
    }
}

/// Exact two-phase simplex with Bland's anti-cycling rule.
pub fn lp_solve(lp: &LPInstance) -> Result<LpResult, SolveError> {
    lp.check()?;
    let n = lp.objective.len();
    // Column map: x_i = offset_i + pos_i - neg_i.
    let mut cols = Vec::with_capacity(n);
    let mut ncols = 0;
    for lb in &lp.lower {
        match lb {
            Some(_) => {
                cols.push((ncols, None));
                ncols += 1;
            }
            None => {
                cols.push((ncols, Some(ncols + 1)));
                ncols += 2;
            }
        }
    }
    let offset: Vec<Q> = lp.lower.iter().map(|l| l.clone().unwrap_or_else(Q::zero)).collect();
    let nstruct = ncols;

    let m = lp.matrix.len();
    let mut rows: Vec<Vec<Q>> = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut rels = Vec::with_capacity(m);
    for (i, row) in lp.matrix.iter().enumerate() {
        let mut r = vec![Q::zero(); nstruct];
        let mut b = lp.rhs[i].clone();
        for (j, a) in row.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            b -= a * &offset[j];
            r[cols[j].0] = a.clone();
            if let Some(k) = cols[j].1 {
                r[k] = -a.clone();
            }
        }
        let mut rel = lp.rels[i];
        if b.is_negative() {
            r.iter_mut().for_each(|v| *v = -v.clone());
            b = -b;
            rel = match rel {
                LpRel::Le => LpRel::Ge,
                LpRel::Ge => LpRel::Le,
                LpRel::Eq => LpRel::Eq,
            };
        }
        rows.push(r);
        rhs.push(b);
        rels.push(rel);
    }

    // Slack / surplus columns, then artificial columns.
    let nslack = rels.iter().filter(|r| **r != LpRel::Eq).count();
    let nart = rels.iter().filter(|r| **r != LpRel::Le).count();
    let total = nstruct + nslack + nart;
    let mut basis = vec![0; m];
    let (mut s, mut a) = (nstruct, nstruct + nslack);
    for i in 0..m {
        rows[i].resize(total, Q::zero());
        match rels[i] {
            LpRel::Le => {
                rows[i][s] = Q::from_integer(1.into());
                basis[i] = s;
                s += 1;
            }
            LpRel::Ge => {
                rows[i][s] = Q::from_integer((-1).into());
                s += 1;
                rows[i][a] = Q::from_integer(1.into());
                basis[i] = a;
                a += 1;
            }
            LpRel::Eq => {
                rows[i][a] = Q::from_integer(1.into());
                basis[i] = a;
                a += 1;
            }
        }
    }
    let mut tab = Tableau { rows, rhs, basis, pivots: 0 };
    let art_start = nstruct + nslack;

    if nart > 0 {
        let mut c1 = vec![Q::zero(); total];
        for c in c1.iter_mut().skip(art_start) {
            *c = Q::from_integer(1.into());
        }
        let allowed = vec![true; total];
        let v = tab.run(&c1, &allowed).expect("phase one is bounded below by zero");
        if v.is_positive() {
            return Ok(LpResult::Infeasible);
        }
        // Drive artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < tab.rows.len() {
            if tab.basis[i] >= art_start {
                match (0..art_start).find(|&j| !tab.rows[i][j].is_zero()) {
                    Some(j) => {
                        let mut dummy = vec![Q::zero(); total];
                        let mut dv = Q::zero();
                        tab.pivot(i, j, &mut dummy, &mut dv);
                    }
                    None => {
                        tab.rows.remove(i);
                        tab.rhs.remove(i);
                        tab.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    let mut c2 = vec![Q::zero(); total];
    for (j, (p, neg)) in cols.iter().enumerate() {
        c2[*p] = lp.objective[j].clone();
        if let Some(k) = neg {
            c2[*k] = -lp.objective[j].clone();
        }
    }
    let allowed: Vec<bool> = (0..total).map(|j| j < art_start).collect();
    if tab.run(&c2, &allowed).is_err() {
        return Ok(LpResult::Unbounded);
    }

    let mut colval = vec![Q::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        colval[b] = tab.rhs[i].clone();
    }
    let point: Vec<Q> = cols
        .iter()
        .enumerate()
        .map(|(j, (p, neg))| {
            let mut v = &offset[j] + &colval[*p];
            if let Some(k) = neg {
                v -= &colval[*k];
            }
            v
        })
        .collect();
    let value = point.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpResult::Optimal { value, point, pivots: tab.pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn q(v: &[i64]) -> Vec<Q> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_maximization() {
        // max x + y s.t. x + 2y <= 4, 3x + y <= 6  -> (8/5, 6/5), value 14/5
        let lp = LPInstance::nonnegative(q(&[-1, -1]), vec![q(&[1, 2]), q(&[3, 1])], vec![LpRel::Le; 2], q(&[4, 6]));
        match lp_solve(&lp).unwrap() {
            LpResult::Optimal { value, point, .. } => {
                assert_eq!(value, ratio(-14, 5));
                assert_eq!(point, vec![ratio(8, 5), ratio(6, 5)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let lp = LPInstance::nonnegative(q(&[1]), vec![q(&[1]), q(&[1])], vec![LpRel::Ge, LpRel::Le], q(&[2, 1]));
        assert_eq!(lp_solve(&lp).unwrap(), LpResult::Infeasible);
        let lp = LPInstance::nonnegative(q(&[-1]), vec![q(&[1])], vec![LpRel::Ge], q(&[1]));
        assert_eq!(lp_solve(&lp).unwrap(), LpResult::Unbounded);
    }

    #[test]
    fn free_and_shifted_variables() {
        // min x s.t. x >= -3 as a row, x free -> -3
        let mut lp = LPInstance::nonnegative(q(&[1]), vec![q(&[1])], vec![LpRel::Ge], q(&[-3]));
        lp.lower = vec![None];
        assert!(matches!(lp_solve(&lp).unwrap(), LpResult::Optimal { value, .. } if value == int(-3)));
        // min x with x >= 5/2 bound only
        let lp = LPInstance { objective: q(&[1]), matrix: vec![], rels: vec![], rhs: vec![], lower: vec![Some(ratio(5, 2))] };
        assert!(matches!(lp_solve(&lp).unwrap(), LpResult::Optimal { value, .. } if value == ratio(5, 2)));
    }

    #[test]
    fn redundant_equalities() {
        let lp = LPInstance::nonnegative(
            q(&[1, 2]),
            vec![q(&[1, 1]), q(&[2, 2])],
            vec![LpRel::Eq, LpRel::Eq],
            q(&[1, 2]),
        );
        assert!(matches!(lp_solve(&lp).unwrap(), LpResult::Optimal { value, .. } if value == int(1)));
    }

    #[test]
    fn dimension_mismatch() {
        let lp = LPInstance::nonnegative(q(&[1, 1]), vec![q(&[1])], vec![LpRel::Le], q(&[1]));
        assert!(lp_solve(&lp).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut lp = LPInstance::nonnegative(q(&[1, 1]), vec![q(&[1, 2])], vec![LpRel::Le], vec![ratio(1, 3)]);
        lp.lower[1] = None;
        let s = serde_json::to_string(&lp).unwrap();
        assert_eq!(serde_json::from_str::<LPInstance>(&s).unwrap(), lp);
    }
}
