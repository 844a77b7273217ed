//! Numerical instantiation of existential witnesses.
//!
//! The body is split into DNF branches. In each branch, witnesses fixed by
//! an equality (linear with a rational coefficient, or `u = exp(v)`) are
//! solved symbolically; the rest are found by Nelder–Mead on the smallest
//! atom slack. Candidates are re-checked with exact evaluation, so a
//! reported witness is always genuine. Failure is inconclusive.

use super::compile::{compile_term, CompiledTerm, Layout};
use super::eval::eval_qf;
use super::linear::Poly;
use super::{Assignment, SolveError};
use crate::formula::{to_graph_form, Atom, Block, Formula, Rel, Term, Var};
use crate::rational::{self, Q};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Witness coordinates are confined to `[-box_radius, box_radius]`.
    pub box_radius: f64,
    /// Grid points per axis used as extra starts (0 disables the grid).
    pub grid: usize,
    /// Random starts around the hint.
    pub restarts: usize,
    /// Nelder–Mead iterations per start.
    pub steps: usize,
    pub initial_step: f64,
    /// Half-width of the random-start cloud around the hint.
    pub spread: f64,
    pub seed: u64,
    pub max_branches: usize,
    /// Start witness `w_i` at the value of a free variable.
    pub hint: BTreeMap<usize, Var>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            box_radius: 1e6,
            grid: 0,
            restarts: 4,
            steps: 400,
            initial_step: 0.5,
            spread: 1.0,
            seed: 0,
            max_branches: 4096,
            hint: BTreeMap::new(),
        }
    }
}

/// Witness values as closed terms (exact) plus float approximations.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub terms: BTreeMap<usize, Term>,
    pub approx: BTreeMap<usize, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SearchOutcome {
    Found(Witness),
    NotFound,
}

impl SearchOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found(_))
    }
}

const SNAP: f64 = (1u64 << 24) as f64;

#[derive(Clone, Copy)]
enum Kind {
    Upper,  // d <= 0 (strict or not)
    Lower,  // d >= 0
    Equal,
}

struct Branch {
    /// Solved witnesses, in terms of free variables and free witnesses.
    defs: Vec<(usize, Term)>,
    free_w: Vec<usize>,
    atoms: Vec<Atom>,
    /// Polynomial form of each atom, when it has one.
    exact: Option<Vec<(Poly, Rel)>>,
    checks: Vec<(Kind, bool, CompiledTerm)>,
    def_eval: Vec<(usize, CompiledTerm)>,
}

/// A prepared existential formula, reusable across assignments.
pub struct WitnessSearcher {
    prefix: Vec<usize>,
    free: Vec<Var>,
    branches: Vec<Branch>,
    cfg: SearchConfig,
}

fn negate(a: &Atom) -> Vec<Atom> {
    match a {
        Atom::Compare { lhs, rel, rhs } => {
            let mk = |rel| Atom::Compare { lhs: lhs.clone(), rel, rhs: rhs.clone() };
            match rel {
                Rel::Lt => vec![mk(Rel::Ge)],
                Rel::Le => vec![mk(Rel::Gt)],
                Rel::Ge => vec![mk(Rel::Lt)],
                Rel::Gt => vec![mk(Rel::Le)],
                Rel::Eq => vec![mk(Rel::Lt), mk(Rel::Gt)],
            }
        }
        Atom::ExpGraph { lhs, rhs } => {
            let e = Term::exp(Term::Var(*rhs));
            vec![
                Atom::Compare { lhs: Term::Var(*lhs), rel: Rel::Lt, rhs: e.clone() },
                Atom::Compare { lhs: Term::Var(*lhs), rel: Rel::Gt, rhs: e },
            ]
        }
    }
}

fn dnf(f: &Formula, neg: bool, cap: usize) -> Result<Vec<Vec<Atom>>, SolveError> {
    let product = |parts: Vec<Vec<Vec<Atom>>>| -> Result<Vec<Vec<Atom>>, SolveError> {
        let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
        for p in parts {
            let mut next = Vec::with_capacity(acc.len() * p.len());
            for a in &acc {
                for b in &p {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    next.push(c);
                }
            }
            if next.len() > cap {
                return Err(SolveError::BranchLimit(cap));
            }
            acc = next;
        }
        Ok(acc)
    };
    let union = |parts: Vec<Vec<Vec<Atom>>>| -> Result<Vec<Vec<Atom>>, SolveError> {
        let out: Vec<Vec<Atom>> = parts.into_iter().flatten().collect();
        if out.len() > cap {
            return Err(SolveError::BranchLimit(cap));
        }
        Ok(out)
    };
    match f {
        Formula::Atom(a) if !neg => Ok(vec![vec![a.clone()]]),
        Formula::Atom(a) => Ok(negate(a).into_iter().map(|a| vec![a]).collect()),
        Formula::Not(g) => dnf(g, !neg, cap),
        Formula::And(gs) | Formula::Or(gs) => {
            let parts = gs.iter().map(|g| dnf(g, neg, cap)).collect::<Result<Vec<_>, _>>()?;
            if matches!(f, Formula::And(_)) != neg {
                product(parts)
            } else {
                union(parts)
            }
        }
        Formula::Exists(..) | Formula::ForAll(..) => Err(SolveError::NotQuantifierFree),
    }
}

/// Coefficient of `w` in a term affine in `w`, when it is rational.
fn coeff(t: &Term, w: Var) -> Option<Q> {
    match t {
        Term::Var(v) => Some(if *v == w { Q::one() } else { Q::zero() }),
        Term::Const(_) | Term::Sym(_) => Some(Q::zero()),
        Term::Exp(a) => (!a.mentions(w)).then(Q::zero),
        Term::Sum(ts) => ts.iter().map(|t| coeff(t, w)).sum(),
        Term::Product(ts) => {
            let Some(i) = ts.iter().position(|t| t.mentions(w)) else { return Some(Q::zero()) };
            let mut scale = coeff(&ts[i], w)?;
            for (j, t) in ts.iter().enumerate() {
                match t {
                    _ if j == i => {}
                    Term::Const(q) => scale *= q,
                    Term::Sym(s) => scale *= s.exact()?,
                    _ => return None,
                }
            }
            Some(scale)
        }
    }
}

fn subst_term(t: &Term, w: Var, by: &Term) -> Term {
    t.map_vars(&|v| if v == w { by.clone() } else { Term::Var(v) })
}

fn subst_atom(a: &Atom, w: Var, by: &Term) -> Atom {
    match a {
        Atom::Compare { lhs, rel, rhs } => Atom::Compare { lhs: subst_term(lhs, w, by), rel: *rel, rhs: subst_term(rhs, w, by) },
        Atom::ExpGraph { lhs, rhs } => {
            if *lhs != w && *rhs != w {
                return a.clone();
            }
            let l = subst_term(&Term::Var(*lhs), w, by);
            let r = subst_term(&Term::Var(*rhs), w, by);
            match (l, r) {
                (Term::Var(l), Term::Var(r)) => Atom::ExpGraph { lhs: l, rhs: r },
                (l, r) => Atom::Compare { lhs: l, rel: Rel::Eq, rhs: Term::exp(r) },
            }
        }
    }
}

fn atom_mentions(a: &Atom, v: Var) -> bool {
    match a {
        Atom::Compare { lhs, rhs, .. } => lhs.mentions(v) || rhs.mentions(v),
        Atom::ExpGraph { lhs, rhs } => *lhs == v || *rhs == v,
    }
}

fn propagate(mut atoms: Vec<Atom>, prefix: &[usize]) -> (Vec<(usize, Term)>, Vec<Atom>) {
    let mut defs: Vec<(usize, Term)> = Vec::new();
    let solved = |defs: &Vec<(usize, Term)>, i: usize| defs.iter().any(|(j, _)| *j == i);
    loop {
        let mut pick: Option<(usize, usize, Term)> = None;
        'scan: for (ai, a) in atoms.iter().enumerate() {
            match a {
                Atom::ExpGraph { lhs, rhs } => {
                    if lhs.block == Block::W && lhs != rhs && prefix.contains(&lhs.index) && !solved(&defs, lhs.index) {
                        pick = Some((ai, lhs.index, Term::exp(Term::Var(*rhs))));
                        break 'scan;
                    }
                }
                Atom::Compare { lhs, rel: Rel::Eq, rhs } => {
                    let d = Term::Sum(vec![lhs.clone(), Term::neg(rhs.clone())]);
                    for &i in prefix {
                        let w = Var::new(Block::W, i);
                        if solved(&defs, i) || !d.mentions(w) {
                            continue;
                        }
                        let Some(c) = coeff(&d, w) else { continue };
                        if c.is_zero() {
                            continue;
                        }
                        let d0 = subst_term(&d, w, &Term::zero());
                        let by = Term::Product(vec![Term::Const(-c.recip()), d0]);
                        pick = Some((ai, i, by));
                        break 'scan;
                    }
                }
                Atom::Compare { .. } => {}
            }
        }
        let Some((ai, i, by)) = pick else { break };
        atoms.remove(ai);
        let w = Var::new(Block::W, i);
        atoms = atoms.iter().map(|a| subst_atom(a, w, &by)).collect();
        for (_, t) in defs.iter_mut() {
            *t = subst_term(t, w, &by);
        }
        defs.push((i, by));
    }
    // Tautologies left by substitution are dropped.
    atoms.retain(|a| !matches!(a, Atom::Compare { lhs, rel: Rel::Eq | Rel::Le | Rel::Ge, rhs } if lhs == rhs));
    (defs, atoms)
}

impl WitnessSearcher {
    /// Prepares `f` (existential or quantifier-free) for repeated search.
    pub fn new(f: &Formula, cfg: SearchConfig) -> Result<Self, SolveError> {
        if !cfg.box_radius.is_finite() || cfg.box_radius <= 0.0 {
            return Err(SolveError::UnboundedBox);
        }
        let g = to_graph_form(f)?;
        let (prefix, body) = g.existential_prefix();
        let free: Vec<Var> = g.free_vars().into_iter().collect();
        let mut branches = Vec::new();
        for lits in dnf(body, false, cfg.max_branches)? {
            let (defs, atoms) = propagate(lits, &prefix);
            let free_w: Vec<usize> = prefix
                .iter()
                .copied()
                .filter(|&i| {
                    let w = Var::new(Block::W, i);
                    !defs.iter().any(|(j, _)| *j == i)
                        && (atoms.iter().any(|a| atom_mentions(a, w)) || defs.iter().any(|(_, t)| t.mentions(w)))
                })
                .collect();
            let mut layout = Layout::default();
            for v in &free {
                layout.push(*v);
            }
            for &i in &free_w {
                layout.push(Var::new(Block::W, i));
            }
            let mut checks = Vec::new();
            for a in &atoms {
                let (lhs, rel, rhs) = match a {
                    Atom::Compare { lhs, rel, rhs } => (lhs.clone(), *rel, rhs.clone()),
                    Atom::ExpGraph { lhs, rhs } => (Term::Var(*lhs), Rel::Eq, Term::exp(Term::Var(*rhs))),
                };
                let d = compile_term(&Term::Sum(vec![lhs, Term::neg(rhs)]), &layout)?;
                let (kind, strict) = match rel {
                    Rel::Lt => (Kind::Upper, true),
                    Rel::Le => (Kind::Upper, false),
                    Rel::Ge => (Kind::Lower, false),
                    Rel::Gt => (Kind::Lower, true),
                    Rel::Eq => (Kind::Equal, false),
                };
                checks.push((kind, strict, d));
            }
            let def_eval = defs.iter().map(|(i, t)| Ok((*i, compile_term(t, &layout)?))).collect::<Result<_, SolveError>>()?;
            let exact = atoms
                .iter()
                .map(|a| match a {
                    Atom::Compare { lhs, rel, rhs } if !lhs.contains_exp() && !rhs.contains_exp() => {
                        Some((Poly::from_term(&Term::Sum(vec![lhs.clone(), Term::neg(rhs.clone())]))?, *rel))
                    }
                    _ => None,
                })
                .collect();
            branches.push(Branch { defs, free_w, atoms, exact, checks, def_eval });
        }
        Ok(WitnessSearcher { prefix, free, branches, cfg })
    }

    pub fn free_vars(&self) -> &[Var] {
        &self.free
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    /// Searches for a witness under the given values of the free variables.
    pub fn search(&self, sigma: &Assignment) -> Result<SearchOutcome, SolveError> {
        let mut base = Vec::with_capacity(self.free.len());
        for v in &self.free {
            let q = sigma.get(*v).ok_or_else(|| SolveError::Unassigned(v.to_string()))?;
            base.push(rational::to_f64(q));
        }
        let hint_of = |i: usize| -> f64 {
            self.cfg.hint.get(&i).and_then(|v| sigma.get(*v)).map(rational::to_f64).unwrap_or(0.0)
        };
        for br in &self.branches {
            if let Some(w) = self.search_branch(br, sigma, &base, &hint_of)? {
                return Ok(SearchOutcome::Found(w));
            }
        }
        Ok(SearchOutcome::NotFound)
    }

    fn search_branch(
        &self,
        br: &Branch,
        sigma: &Assignment,
        base: &[f64],
        hint_of: &dyn Fn(usize) -> f64,
    ) -> Result<Option<Witness>, SolveError> {
        let n0 = base.len();
        let d = br.free_w.len();
        let mut buf = base.to_vec();
        buf.resize(n0 + d, 0.0);
        let r = self.cfg.box_radius;

        let slack = |buf: &[f64]| -> (f64, bool) {
            let mut m = f64::INFINITY;
            let mut ok = true;
            for (kind, strict, c) in &br.checks {
                let v = c.eval(buf);
                let s = match kind {
                    Kind::Upper => -v,
                    Kind::Lower => v,
                    Kind::Equal => -v.abs(),
                };
                ok &= if *strict { s > 0.0 } else { s >= 0.0 };
                m = m.min(s);
            }
            if m.is_nan() {
                return (f64::NEG_INFINITY, false);
            }
            (m, ok)
        };

        if d == 0 {
            if slack(&buf).1 {
                return self.verify(br, sigma, &[], &buf);
            }
            return Ok(None);
        }

        let hint: Vec<f64> = br.free_w.iter().map(|&i| hint_of(i).clamp(-r, r)).collect();
        let mut starts = vec![hint.clone()];
        if self.cfg.grid > 1 && (self.cfg.grid as f64).powi(d as i32) <= 4096.0 {
            let g = self.cfg.grid;
            let total = g.pow(d as u32);
            for k in 0..total {
                let mut p = Vec::with_capacity(d);
                let mut rest = k;
                for j in 0..d {
                    let t = (rest % g) as f64 / (g - 1) as f64;
                    rest /= g;
                    p.push(hint[j] + self.cfg.spread * (2.0 * t - 1.0));
                }
                starts.push(p);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        for _ in 0..self.cfg.restarts {
            starts.push(hint.iter().map(|h| (h + rng.gen_range(-self.cfg.spread..=self.cfg.spread)).clamp(-r, r)).collect());
        }

        let objective = |p: &[f64], buf: &mut Vec<f64>| -> (f64, bool) {
            let excess: f64 = p.iter().map(|x| (x.abs() - r).max(0.0)).sum();
            buf[n0..].copy_from_slice(p);
            let (s, ok) = slack(buf);
            if excess > 0.0 {
                (s.min(0.0) - 1e6 * excess, false)
            } else {
                (s, ok)
            }
        };

        for start in starts {
            let mut attempts = 0;
            let mut found = None;
            nelder_mead(&start, self.cfg.initial_step, self.cfg.steps, &mut |p| objective(p, &mut buf), &mut |p| {
                if attempts >= 3 {
                    return true;
                }
                attempts += 1;
                let mut full = base.to_vec();
                full.extend_from_slice(p);
                // Short dyadics keep exact verification cheap.
                let snapped: Vec<f64> = p.iter().map(|x| (x * SNAP).round() / SNAP).collect();
                full[n0..].copy_from_slice(&snapped);
                let p = if slack(&full).1 {
                    &snapped[..]
                } else {
                    full[n0..].copy_from_slice(p);
                    p
                };
                match self.verify(br, sigma, p, &full) {
                    Ok(Some(w)) => {
                        found = Some(w);
                        true
                    }
                    _ => false,
                }
            });
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }

    /// Exact re-check of a candidate; builds the witness on success.
    fn verify(&self, br: &Branch, sigma: &Assignment, point: &[f64], full: &[f64]) -> Result<Option<Witness>, SolveError> {
        let mut qs = Vec::with_capacity(point.len());
        for &p in point {
            match rational::from_f64(p) {
                Some(q) => qs.push(q),
                None => return Ok(None),
            }
        }
        if let Some(polys) = &br.exact {
            let value = |v: Var| match v.block {
                Block::W => br.free_w.iter().position(|&i| i == v.index).map(|k| qs[k].clone()),
                _ => sigma.get(v).cloned(),
            };
            for (p, rel) in polys {
                match p.sign_at(&value) {
                    Some(ord) if rel.holds(ord) => {}
                    _ => return Ok(None),
                }
            }
        } else {
            let mut ext = sigma.clone();
            let wdim = self.prefix.iter().copied().max().map_or(0, |m| m + 1).max(ext.w.len());
            ext.w.resize(wdim, Q::zero());
            for (&i, q) in br.free_w.iter().zip(&qs) {
                ext.w[i] = q.clone();
            }
            match eval_qf(&Formula::And(br.atoms.iter().cloned().map(Formula::Atom).collect()), &ext) {
                Ok(true) => {}
                _ => return Ok(None),
            }
        }
        let mut closed = BTreeMap::new();
        for v in &self.free {
            if let Some(q) = sigma.get(*v) {
                closed.insert(*v, Term::Const(q.clone()));
            }
        }
        for (&i, q) in br.free_w.iter().zip(&qs) {
            closed.insert(Var::new(Block::W, i), Term::Const(q.clone()));
        }
        let mut terms = BTreeMap::new();
        let mut approx = BTreeMap::new();
        for (&i, q) in br.free_w.iter().zip(&qs) {
            terms.insert(i, Term::Const(q.clone()));
        }
        for (&i, p) in br.free_w.iter().zip(point) {
            approx.insert(i, *p);
        }
        for ((i, t), (_, c)) in br.defs.iter().zip(&br.def_eval) {
            terms.insert(*i, t.map_vars(&|v| closed.get(&v).cloned().unwrap_or(Term::Var(v))));
            approx.insert(*i, c.eval(full));
        }
        // Witnesses that occur nowhere in this branch are unconstrained.
        for &i in &self.prefix {
            terms.entry(i).or_insert_with(Term::zero);
            approx.entry(i).or_insert(0.0);
        }
        Ok(Some(Witness { terms, approx }))
    }
}

/// Maximizes `f` from `start`; `accept` is consulted whenever the best
/// vertex satisfies every atom in float arithmetic and may stop the run.
fn nelder_mead(
    start: &[f64],
    step: f64,
    iters: usize,
    f: &mut dyn FnMut(&[f64]) -> (f64, bool),
    accept: &mut dyn FnMut(&[f64]) -> bool,
) {
    let d = start.len();
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for j in 0..d {
        let mut p = start.to_vec();
        p[j] += step;
        pts.push(p);
    }
    let mut vals: Vec<(f64, bool)> = pts.iter().map(|p| f(p)).collect();
    let mut order: Vec<usize> = (0..=d).collect();
    let mut centroid = vec![0.0; d];
    let mut trial = vec![0.0; d];
    for it in 0..=iters {
        order.sort_by(|&a, &b| vals[b].0.total_cmp(&vals[a].0));
        let best = order[0];
        if vals[best].1 && accept(&pts[best]) {
            return;
        }
        if it == iters {
            return;
        }
        let worst = order[d];
        let spread = vals[best].0 - vals[worst].0;
        let size = pts.iter().map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if spread.abs() < 1e-16 && size < 1e-13 {
            return;
        }
        centroid.iter_mut().for_each(|c| *c = 0.0);
        for &i in &order[..d] {
            for (c, x) in centroid.iter_mut().zip(&pts[i]) {
                *c += x / d as f64;
            }
        }
        let along = |t: f64, out: &mut Vec<f64>, pts: &Vec<Vec<f64>>| {
            for ((o, c), w) in out.iter_mut().zip(&centroid).zip(&pts[worst]) {
                *o = c + t * (c - w);
            }
        };
        along(1.0, &mut trial, &pts);
        let fr = f(&trial);
        let second_worst = vals[order[d - 1]].0;
        if fr.0 > vals[best].0 {
            let reflected = trial.clone();
            along(2.0, &mut trial, &pts);
            let fe = f(&trial);
            if fe.0 > fr.0 {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fe;
            } else {
                pts[worst] = reflected;
                vals[worst] = fr;
            }
        } else if fr.0 > second_worst {
            pts[worst].copy_from_slice(&trial);
            vals[worst] = fr;
        } else {
            let t = if fr.0 > vals[worst].0 { 0.5 } else { -0.5 };
            along(t, &mut trial, &pts);
            let fc = f(&trial);
            if fc.0 > vals[worst].0.max(if t > 0.0 { fr.0 } else { f64::NEG_INFINITY }) {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fc;
            } else {
                let b = pts[best].clone();
                for &i in &order[1..] {
                    for (x, bx) in pts[i].iter_mut().zip(&b) {
                        *x = bx + 0.5 * (*x - bx);
                    }
                    vals[i] = f(&pts[i]);
                }
            }
        }
    }
}

/// One-shot search: prepares `f` and searches once.
pub fn witness_search(f: &Formula, sigma: &Assignment, cfg: SearchConfig) -> Result<SearchOutcome, SolveError> {
    WitnessSearcher::new(f, cfg)?.search(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;
    use crate::rational::{int, ratio};

    fn strategic_halfspace() -> Formula {
        parse(
            "(exists (w0 w1) (and (<= (+ (* (- x0 w0) (- x0 w0)) (* (- x1 w1) (- x1 w1))) 1) \
             (>= (+ (* a0 w0) (* a1 w1)) a2)))",
        )
        .unwrap()
    }

    fn check_sound(f: &Formula, sigma: &Assignment, w: &Witness) {
        let (_, body) = f.existential_prefix();
        let map: BTreeMap<Var, Term> = w.terms.iter().map(|(i, t)| (Var::new(Block::W, *i), t.clone())).collect();
        assert!(eval_qf(&body.substitute(&map), sigma).unwrap());
    }

    #[test]
    fn reachable_halfspace() {
        let f = strategic_halfspace();
        let sigma = Assignment::new().with_x(vec![ratio(-1, 2), int(0)]).with_a(vec![int(1), int(0), int(0)]);
        match witness_search(&f, &sigma, SearchConfig::default()).unwrap() {
            SearchOutcome::Found(w) => {
                assert!(w.approx[&0] >= 0.0 && w.approx[&0] <= 0.5 + 1e-9);
                check_sound(&f, &sigma, &w);
            }
            SearchOutcome::NotFound => panic!("expected a witness"),
        }
    }

    #[test]
    fn unreachable_halfspace() {
        let f = strategic_halfspace();
        let sigma = Assignment::new().with_x(vec![int(-2), int(0)]).with_a(vec![int(1), int(0), int(0)]);
        assert_eq!(witness_search(&f, &sigma, SearchConfig::default()).unwrap(), SearchOutcome::NotFound);
    }

    #[test]
    fn identity_neighborhood_propagates_equalities() {
        let f = parse("(exists (w0 w1) (and (= w0 x0) (= w1 x1) (>= (+ (* a0 w0) (* a1 w1)) a2)))").unwrap();
        let s = SearchConfig::default();
        let searcher = WitnessSearcher::new(&f, s).unwrap();
        for (x0, expect) in [(1, true), (-1, false)] {
            let sigma = Assignment::new().with_x(vec![int(x0), int(5)]).with_a(vec![int(1), int(0), int(0)]);
            assert_eq!(searcher.search(&sigma).unwrap().is_found(), expect);
        }
    }

    #[test]
    fn exponential_witnesses_are_symbolic() {
        let f = parse("(exists (w0) (and (<= (exp (- x0 w0)) 2) (>= w0 0)))").unwrap();
        let sigma = Assignment::new().with_x(vec![int(3)]);
        match witness_search(&f, &sigma, SearchConfig::default()).unwrap() {
            SearchOutcome::Found(w) => {
                let g = to_graph_form(&f).unwrap();
                check_sound(&g, &sigma, &w);
            }
            SearchOutcome::NotFound => panic!("expected a witness"),
        }
    }

    #[test]
    fn disjunction_and_negation() {
        let f = parse("(exists (w0) (or (and (> w0 x0) (< w0 x0)) (not (>= (* w0 w0) 4))))").unwrap();
        let sigma = Assignment::new().with_x(vec![int(0)]);
        assert!(witness_search(&f, &sigma, SearchConfig::default()).unwrap().is_found());
    }

    #[test]
    fn unbounded_box_rejected() {
        let cfg = SearchConfig { box_radius: f64::INFINITY, ..SearchConfig::default() };
        assert!(matches!(WitnessSearcher::new(&strategic_halfspace(), cfg), Err(SolveError::UnboundedBox)));
    }
}
