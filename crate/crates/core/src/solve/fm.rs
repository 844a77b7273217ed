use super::linear::linear_form;
use super::SolveError;
use crate::formula::{Atom, Block, Formula, Rel, Term, Var};
use crate::rational::{self, Q};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinRel {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

impl LinRel {
    fn holds(self, ord: Ordering) -> bool {
        match self {
            LinRel::Lt => ord == Ordering::Less,
            LinRel::Le => ord != Ordering::Greater,
            LinRel::Eq => ord == Ordering::Equal,
        }
    }
}

/// `coeffs . v  rel  rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearRow {
    #[serde(with = "rational::serde_q_vec")]
    pub coeffs: Vec<Q>,
    pub rel: LinRel,
    #[serde(with = "rational::serde_q")]
    pub rhs: Q,
}

impl LinearRow {
    pub fn new(coeffs: Vec<Q>, rel: LinRel, rhs: Q) -> Self {
        LinearRow { coeffs, rel, rhs }
    }

    pub fn satisfied(&self, point: &[Q]) -> bool {
        let lhs: Q = self.coeffs.iter().zip(point).map(|(c, v)| c * v).sum();
        self.rel.holds(lhs.cmp(&self.rhs))
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    // Positive rescaling so the first nonzero coefficient has magnitude 1
    // (sign fixed to +1 for equalities).
    fn normalize(&mut self) {
        let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).cloned() else { return };
        let s = if self.rel == LinRel::Eq { lead } else { lead.abs() };
        for c in &mut self.coeffs {
            *c /= &s;
        }
        self.rhs /= &s;
    }
}

/// Conjunction of linear constraints over named variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub vars: Vec<String>,
    pub rows: Vec<LinearRow>,
    #[serde(default)]
    pub infeasible: bool,
}

impl LinearSystem {
    pub fn new(vars: Vec<String>, rows: Vec<LinearRow>) -> Result<Self, SolveError> {
        if let Some(r) = rows.iter().find(|r| r.coeffs.len() != vars.len()) {
            return Err(SolveError::DimensionMismatch(format!(
                "row has {} coefficients, system has {} variables",
                r.coeffs.len(),
                vars.len()
            )));
        }
        Ok(LinearSystem { vars, rows, infeasible: false })
    }

    /// Reads a conjunction of linear atoms, optionally under an `exists`
    /// prefix (the prefix is ignored; eliminate the witnesses explicitly).
    /// `>=` and `>` are negated into `<=` and `<`.
    pub fn from_formula(f: &Formula) -> Result<Self, SolveError> {
        let (_, body) = f.existential_prefix();
        let mut atoms = Vec::new();
        collect_conjuncts(body, &mut atoms)?;
        let mut vars: Vec<Var> = f.all_vars().into_iter().collect();
        vars.sort();
        let mut rows = Vec::new();
        for a in atoms {
            let Atom::Compare { lhs, rel, rhs } = a else {
                return Err(SolveError::Nonlinear(a.to_string()));
            };
            let diff = Term::Sum(vec![lhs.clone(), Term::neg(rhs.clone())]);
            let lf = linear_form(&diff).ok_or_else(|| SolveError::Nonlinear(a.to_string()))?;
            let mut coeffs: Vec<Q> = vars.iter().map(|v| lf.coeffs.get(v).cloned().unwrap_or_else(Q::zero)).collect();
            let mut rhs = -lf.constant;
            let rel = match rel {
                Rel::Lt => LinRel::Lt,
                Rel::Le => LinRel::Le,
                Rel::Eq => LinRel::Eq,
                Rel::Ge | Rel::Gt => {
                    coeffs.iter_mut().for_each(|c| *c = -c.clone());
                    rhs = -rhs;
                    if *rel == Rel::Ge {
                        LinRel::Le
                    } else {
                        LinRel::Lt
                    }
                }
            };
            rows.push(LinearRow { coeffs, rel, rhs });
        }
        Ok(LinearSystem { vars: vars.iter().map(Var::to_string).collect(), rows, infeasible: false })
    }

    /// Converts back to a conjunction; variable names must be `x3`-style.
    pub fn to_formula(&self) -> Result<Formula, SolveError> {
        if self.infeasible {
            return Ok(Formula::falsity());
        }
        let vars = self.vars.iter().map(|n| parse_var_name(n)).collect::<Result<Vec<_>, _>>()?;
        let atoms = self
            .rows
            .iter()
            .map(|r| {
                let terms: Vec<Term> = r
                    .coeffs
                    .iter()
                    .zip(&vars)
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, v)| {
                        if c.is_one() {
                            Term::Var(*v)
                        } else {
                            Term::mul(Term::Const(c.clone()), Term::Var(*v))
                        }
                    })
                    .collect();
                let lhs = match terms.len() {
                    0 => Term::zero(),
                    1 => terms.into_iter().next().unwrap(),
                    _ => Term::Sum(terms),
                };
                let rel = match r.rel {
                    LinRel::Lt => Rel::Lt,
                    LinRel::Le => Rel::Le,
                    LinRel::Eq => Rel::Eq,
                };
                Formula::cmp(lhs, rel, Term::Const(r.rhs.clone()))
            })
            .collect();
        Ok(Formula::And(atoms))
    }

    pub fn satisfied(&self, point: &[Q]) -> bool {
        !self.infeasible && self.rows.iter().all(|r| r.satisfied(point))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }
}

fn parse_var_name(n: &str) -> Result<Var, SolveError> {
    let err = || SolveError::UnknownVariable(n.to_string());
    let mut chars = n.chars();
    let block = match chars.next() {
        Some('x') => Block::X,
        Some('y') => Block::Y,
        Some('a') => Block::A,
        Some('w') => Block::W,
        _ => return Err(err()),
    };
    let index = chars.as_str().parse().map_err(|_| err())?;
    Ok(Var::new(block, index))
}

fn collect_conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Atom>) -> Result<(), SolveError> {
    match f {
        Formula::Atom(a) => out.push(a),
        Formula::And(fs) => {
            for g in fs {
                collect_conjuncts(g, out)?;
            }
        }
        other => return Err(SolveError::Nonlinear(format!("not a conjunction of atoms: {other}"))),
    }
    Ok(())
}

/// Projects the solution set onto the variables not listed in `eliminate`.
pub fn fm_eliminate(sys: &LinearSystem, eliminate: &[String]) -> Result<LinearSystem, SolveError> {
    let mut out = sys.clone();
    for name in eliminate {
        let j = out.index_of(name).ok_or_else(|| SolveError::UnknownVariable(name.clone()))?;
        if !out.infeasible {
            out.rows = eliminate_column(std::mem::take(&mut out.rows), j);
        }
        for r in &mut out.rows {
            r.coeffs.remove(j);
        }
        out.vars.remove(j);
        tidy(&mut out);
    }
    if eliminate.is_empty() {
        tidy(&mut out);
    }
    Ok(out)
}

fn eliminate_column(rows: Vec<LinearRow>, j: usize) -> Vec<LinearRow> {
    // Equalities first: substitute and drop the pivot row.
    if let Some(p) = rows.iter().position(|r| r.rel == LinRel::Eq && !r.coeffs[j].is_zero()) {
        let pivot = rows[p].clone();
        return rows
            .into_iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, r)| {
                if r.coeffs[j].is_zero() {
                    return r;
                }
                let f = &r.coeffs[j] / &pivot.coeffs[j];
                let coeffs = r.coeffs.iter().zip(&pivot.coeffs).map(|(a, b)| a - &f * b).collect();
                LinearRow { coeffs, rel: r.rel, rhs: &r.rhs - &f * &pivot.rhs }
            })
            .collect();
    }
    let (mut pos, mut neg, mut keep) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        match rational::sign(&r.coeffs[j]) {
            1 => pos.push(r),
            -1 => neg.push(r),
            _ => keep.push(r),
        }
    }
    for p in &pos {
        for n in &neg {
            let sp = &p.coeffs[j];
            let sn = -&n.coeffs[j];
            let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(a, b)| a / sp + b / &sn).collect();
            let rel = if p.rel == LinRel::Lt || n.rel == LinRel::Lt { LinRel::Lt } else { LinRel::Le };
            keep.push(LinearRow { coeffs, rel, rhs: &p.rhs / sp + &n.rhs / &sn });
        }
    }
    keep
}

// Drops tautologies, detects contradictions and prunes rows dominated by a
// row with the same left-hand side.
fn tidy(sys: &mut LinearSystem) {
    if sys.infeasible {
        sys.rows.clear();
        return;
    }
    let mut kept: Vec<LinearRow> = Vec::new();
    for mut r in std::mem::take(&mut sys.rows) {
        if r.is_trivial() {
            if !r.rel.holds(Q::zero().cmp(&r.rhs)) {
                sys.infeasible = true;
                sys.rows.clear();
                return;
            }
            continue;
        }
        r.normalize();
        if let Some(k) = kept.iter_mut().find(|k| k.coeffs == r.coeffs && k.rel != LinRel::Eq && r.rel != LinRel::Eq) {
            // Same direction: keep the tighter bound.
            let tighter = r.rhs < k.rhs || (r.rhs == k.rhs && r.rel == LinRel::Lt);
            if tighter {
                *k = r;
            }
            continue;
        }
        if !kept.contains(&r) {
            kept.push(r);
        }
    }
    sys.rows = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::{int, ratio};

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn projects_interval() {
        let f = parse("(exists (w0) (and (>= w0 x0) (<= w0 1)))").unwrap();
        let sys = LinearSystem::from_formula(&f).unwrap();
        let out = fm_eliminate(&sys, &names(&["w0"])).unwrap();
        assert_eq!(out.vars, names(&["x0"]));
        assert_eq!(out.rows, vec![LinearRow::new(vec![int(1)], LinRel::Le, int(1))]);
        assert_eq!(out.to_formula().unwrap().to_string(), "(and (<= x0 1))");
    }

    #[test]
    fn strict_contradiction() {
        let f = parse("(exists (w0) (and (> w0 x0) (< w0 x0)))").unwrap();
        let out = fm_eliminate(&LinearSystem::from_formula(&f).unwrap(), &names(&["w0"])).unwrap();
        assert!(out.infeasible);
        assert!(out.rows.is_empty());
    }

    #[test]
    fn max_of_two_below_bound() {
        let f = parse("(exists (w0) (and (>= w0 x0) (>= w0 x1) (<= w0 x2)))").unwrap();
        let out = fm_eliminate(&LinearSystem::from_formula(&f).unwrap(), &names(&["w0"])).unwrap();
        assert_eq!(out.rows.len(), 2);
        for x0 in -2..=2 {
            for x1 in -2..=2 {
                for x2 in -2..=2 {
                    let expect = x0.max(x1) <= x2;
                    assert_eq!(out.satisfied(&[int(x0), int(x1), int(x2)]), expect);
                }
            }
        }
    }

    #[test]
    fn equalities_substitute() {
        let f = parse("(exists (w0) (and (= (* 2 w0) x0) (<= w0 1) (>= w0 (* -1 x1))))").unwrap();
        let out = fm_eliminate(&LinearSystem::from_formula(&f).unwrap(), &names(&["w0"])).unwrap();
        assert!(out.satisfied(&[int(2), int(0)]));
        assert!(!out.satisfied(&[ratio(5, 2), int(0)]));
        assert!(!out.satisfied(&[int(-2), int(0)]));
    }

    #[test]
    fn nonlinear_rejected() {
        let f = parse("(<= (* x0 x1) 1)").unwrap();
        assert!(matches!(LinearSystem::from_formula(&f), Err(SolveError::Nonlinear(_))));
    }

    #[test]
    fn dominated_rows_pruned() {
        let sys = LinearSystem::new(
            names(&["x0"]),
            vec![
                LinearRow::new(vec![int(2)], LinRel::Le, int(4)),
                LinearRow::new(vec![int(1)], LinRel::Le, int(1)),
                LinearRow::new(vec![int(1)], LinRel::Lt, int(1)),
            ],
        )
        .unwrap();
        let out = fm_eliminate(&sys, &[]).unwrap();
        assert_eq!(out.rows, vec![LinearRow::new(vec![int(1)], LinRel::Lt, int(1))]);
    }
}
