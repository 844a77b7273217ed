use proptest::prelude::*;
use std::collections::BTreeMap;
use stratdef::capacity::*;
use stratdef::families::*;
use stratdef::formula::{complexity, is_graph_form, parse, to_graph_form, Block, Formula, Rel, Term, Var};
use stratdef::rational::{int, ratio, to_f64, Q};
use stratdef::solve::*;
use stratdef::transform::strategic_transform;
use num_traits::{One, Signed, Zero};
use rand::SeedableRng;

fn q() -> impl Strategy<Value = Q> {
    (-8i64..=8, 1i64..=4).prop_map(|(n, d)| ratio(n, d))
}

fn leaf() -> impl Strategy<Value = Term> {
    prop_oneof![
        (0usize..2).prop_map(Term::x),
        (0usize..2).prop_map(Term::a),
        q().prop_map(Term::constant),
    ]
}

fn term() -> impl Strategy<Value = Term> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..3).prop_map(Term::Sum),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Term::Product),
            inner.prop_map(Term::exp),
        ]
    })
}

fn rel() -> impl Strategy<Value = Rel> {
    prop_oneof![Just(Rel::Lt), Just(Rel::Le), Just(Rel::Eq), Just(Rel::Ge), Just(Rel::Gt)]
}

fn formula() -> impl Strategy<Value = Formula> {
    let atom = (term(), rel(), term()).prop_map(|(l, r, t)| Formula::cmp(l, r, t));
    atom.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 1..3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 1..3).prop_map(Formula::Or),
            inner.prop_map(Formula::not),
        ]
    })
}

// Linear rows over `n` variables with small integer coefficients.
fn linear_rows(n: usize) -> impl Strategy<Value = Vec<LinearRow>> {
    let row = (
        prop::collection::vec(-2i64..=2, n),
        prop_oneof![Just(LinRel::Lt), Just(LinRel::Le), Just(LinRel::Le), Just(LinRel::Eq)],
        -4i64..=4,
    )
        .prop_map(|(c, r, b)| LinearRow::new(c.into_iter().map(int).collect(), r, ratio(b, 2)));
    prop::collection::vec(row, 1..6)
}

/// Exact feasibility of a system with strict rows: maximize a common slack
/// `t <= 1` on the strict rows; feasible iff the optimum is positive (or no
/// strict rows and the LP is feasible).
fn lp_feasible(rows: &[LinearRow], n: usize) -> bool {
    let mut matrix = Vec::new();
    let mut rels = Vec::new();
    let mut rhs = Vec::new();
    for r in rows {
        let mut c = r.coeffs.clone();
        c.push(if r.rel == LinRel::Lt { Q::one() } else { Q::zero() });
        matrix.push(c);
        rels.push(if r.rel == LinRel::Eq { LpRel::Eq } else { LpRel::Le });
        rhs.push(r.rhs.clone());
    }
    let mut cap = vec![Q::zero(); n];
    cap.push(Q::one());
    matrix.push(cap);
    rels.push(LpRel::Le);
    rhs.push(Q::one());
    let mut objective = vec![Q::zero(); n];
    objective.push(-Q::one());
    let lp = LPInstance { objective, matrix, rels, rhs, lower: vec![None; n + 1] };
    let strict = rows.iter().any(|r| r.rel == LinRel::Lt);
    match lp_solve(&lp).unwrap() {
        LpResult::Optimal { value, .. } => !strict || value.is_negative(),
        LpResult::Infeasible => false,
        LpResult::Unbounded => unreachable!("slack is capped"),
    }
}

/// Solves a square system exactly; `None` if singular.
fn solve_square(mut a: Vec<Vec<Q>>, mut b: Vec<Q>) -> Option<Vec<Q>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        b.swap(col, p);
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..n {
                    let v = &f * &a[col][c];
                    a[r][c] -= v;
                }
                let v = &f * &b[col];
                b[r] -= v;
            }
        }
    }
    Some((0..n).map(|i| &b[i] / &a[i][i]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn print_parse_round_trip(f in formula()) {
        let text = f.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn graph_form_is_graph_form_and_dedups(f in formula()) {
        let positive = Formula::and(vec![f]);
        if let Ok(g) = to_graph_form(&positive) {
            prop_assert!(is_graph_form(&g));
            let p = complexity(&g).unwrap();
            let mut exps = std::collections::HashSet::new();
            fn collect(t: &Term, out: &mut std::collections::HashSet<Term>) {
                match t {
                    Term::Exp(inner) => { out.insert(t.clone()); collect(inner, out); }
                    Term::Sum(ts) | Term::Product(ts) => ts.iter().for_each(|t| collect(t, out)),
                    _ => {}
                }
            }
            for atom in positive.atoms() {
                if let stratdef::formula::Atom::Compare { lhs, rhs, .. } = atom {
                    collect(lhs, &mut exps);
                    collect(rhs, &mut exps);
                }
            }
            prop_assert!(p.exp_atoms <= exps.len());
            prop_assert_eq!(p.format, p.free_vars + p.witness_dim + p.exp_atoms);
        }
    }

    #[test]
    fn fm_projection_matches_lp_on_grid(rows in linear_rows(3)) {
        let sys = LinearSystem::new(vec!["x0".into(), "x1".into(), "w0".into()], rows.clone()).unwrap();
        let proj = fm_eliminate(&sys, &["w0".to_string()]).unwrap();
        for i in -4..=4 {
            for j in -4..=4 {
                let p = [ratio(i, 2), ratio(j, 2)];
                let fixed: Vec<LinearRow> = rows
                    .iter()
                    .map(|r| LinearRow::new(vec![r.coeffs[2].clone()], r.rel, &r.rhs - &r.coeffs[0] * &p[0] - &r.coeffs[1] * &p[1]))
                    .collect();
                let want = lp_feasible(&fixed, 1);
                let got = !proj.infeasible && proj.satisfied(&p);
                prop_assert_eq!(got, want, "point {:?}", p);
            }
        }
    }

    #[test]
    fn lp_optimum_matches_vertex_enumeration(
        c in prop::collection::vec(-3i64..=3, 3),
        a in prop::collection::vec(prop::collection::vec(-2i64..=3, 3), 2),
        b in prop::collection::vec(0i64..=6, 2),
    ) {
        // min c.x with A x <= b, sum x <= 5, x >= 0: bounded and feasible.
        let mut matrix: Vec<Vec<Q>> = a.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect();
        matrix.push(vec![Q::one(); 3]);
        let mut rhs: Vec<Q> = b.iter().map(|&v| int(v)).collect();
        rhs.push(int(5));
        let lp = LPInstance::nonnegative(c.iter().map(|&v| int(v)).collect(), matrix.clone(), vec![LpRel::Le; 3], rhs.clone());
        let LpResult::Optimal { value, point, .. } = lp_solve(&lp).unwrap() else { panic!("expected optimum") };
        // All constraints as rows `g . x <= h`, including -x_i <= 0.
        let mut all: Vec<(Vec<Q>, Q)> = matrix.into_iter().zip(rhs).collect();
        for i in 0..3 {
            let mut g = vec![Q::zero(); 3];
            g[i] = -Q::one();
            all.push((g, Q::zero()));
        }
        let mut best: Option<Q> = None;
        for s in subsets(all.len(), 3) {
            let Some(v) = solve_square(s.iter().map(|&i| all[i].0.clone()).collect(), s.iter().map(|&i| all[i].1.clone()).collect()) else { continue };
            if all.iter().all(|(g, h)| g.iter().zip(&v).map(|(x, y)| x * y).sum::<Q>() <= *h) {
                let obj: Q = c.iter().zip(&v).map(|(&ci, vi)| int(ci) * vi).sum();
                if best.as_ref().is_none_or(|b| obj < *b) {
                    best = Some(obj);
                }
            }
        }
        prop_assert_eq!(Some(value), best);
        prop_assert!(point.iter().all(|v| !v.is_negative()));
    }

    #[test]
    fn witness_search_is_sound(rows in linear_rows(3), x0 in q(), x1 in q()) {
        let sys = LinearSystem::new(vec!["x0".into(), "x1".into(), "w0".into()], rows).unwrap();
        let body = sys.to_formula().unwrap();
        let f = Formula::exists(vec![0], body.clone());
        let sigma = Assignment::new().with_x(vec![x0, x1]);
        if let SearchOutcome::Found(w) = witness_search(&f, &sigma, SearchConfig::default()).unwrap() {
            let val = eval_term(&w.terms[&0], &sigma, 64).unwrap();
            let Value::Exact(v) = val else { panic!("linear witness should be exact") };
            let full = sigma.clone().with_w(vec![v]);
            prop_assert!(eval_qf(&body, &full).unwrap());
        }
    }

    #[test]
    fn neighborhoods_are_reflexive(x0 in q(), x1 in q(), p in 0usize..4, t in 1i64..6) {
        let x = vec![x0.clone(), x1.clone()];
        let norm = [PNorm::One, PNorm::Two, PNorm::Inf, PNorm::new(ratio(3, 2)).unwrap()][p].clone();
        let ball = LpBall::new(2, norm, Radius::Const(ratio(1, t))).unwrap();
        prop_assert!(ball.contains(&x, &x).unwrap());
        prop_assert!(Identity::new(2).contains(&x, &x).unwrap());
        // Interior simplex point.
        let s = vec![ratio(1, t + 1), Q::one() - ratio(1, t + 1)];
        prop_assert!(KlBall::new(2, ratio(1, 4)).unwrap().contains(&s, &s).unwrap());
        let emd = EmdBall::new(EmdBall::line_metric(2), ratio(1, 4)).unwrap();
        prop_assert!(emd.contains(&s, &s).unwrap());
        prop_assert!(emd.emd(&s, &s).unwrap().is_zero());
    }

    #[test]
    fn simplex_samplers_stay_in_the_ball(seed in 0u64..1000, t in 1usize..6) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = PointDist::Simplex.sample(3, &mut rng);
        let kl = KlBall::new(3, ratio(1, 8)).unwrap();
        for y in kl.sample(&x, 4 * t, &mut rng) {
            prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(y.iter().all(|&v| v >= 0.0));
            prop_assert!(kl.contains_f64(&x, &y));
        }
        let emd = EmdBall::new(EmdBall::line_metric(3), ratio(1, 4)).unwrap();
        for y in emd.sample(&x, 4 * t, &mut rng) {
            prop_assert!((y.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(emd.contains_f64(&x, &y));
        }
    }

    #[test]
    fn log_self_bound_dominates_grid_extremal(a in 0.0f64..20.0, b in 1.0f64..16.0) {
        // Independent oracle: fine grid scan for the last feasible x.
        let bound = log_self_bound(a, b).unwrap();
        let mut last = 1.0;
        let mut x = 1.0;
        while x <= bound + 10.0 {
            if x <= a + b * x.log2() {
                last = x;
            }
            x += 1e-3 * (1.0 + x / 100.0);
        }
        prop_assert!(last <= bound);
        let ext = log_self_extremal(a, b).unwrap();
        prop_assert!((ext - last).abs() < 0.05 * (1.0 + last / 100.0), "{} vs {}", ext, last);
    }

    #[test]
    fn vc_consistency_integer_scan(a in 2u64..64, k in 1u32..5) {
        let bound = vc_consistency_bound(a as f64, k).unwrap();
        let k_f = f64::from(k);
        let scan = (1..=(bound.ceil() as u64 + 50))
            .filter(|&d| (d as f64) <= k_f * ((a as f64) * d as f64 / k_f).log2() + 1e-9)
            .max()
            .unwrap_or(0);
        prop_assert!((scan as f64) <= bound);
        prop_assert_eq!(vc_consistency_extremal(a, k).unwrap(), scan);
    }

    #[test]
    fn erm_threshold_is_tight(c in 1i64..8, k in 1u32..4, e in 1i64..10, d in 1i64..10) {
        let (cq, eps, delta) = (int(c), ratio(e, 10), ratio(d, 10));
        let m = erm_threshold(&cq, k, &eps, &delta).unwrap();
        let logf = |m: u64| (c as f64).ln() + k as f64 * (2.0 * m as f64).ln() - to_f64(&eps) * m as f64 / 2.0 - to_f64(&delta).ln();
        let here = logf(m);
        prop_assume!(here.abs() > 1e-9);
        prop_assert!(here < 0.0);
        if m > 1 {
            let before = logf(m - 1);
            prop_assume!(before.abs() > 1e-9);
            prop_assert!(before > 0.0);
        }
        prop_assert!(erm_condition(&cq, k, &eps, &delta, m).unwrap());
    }

    #[test]
    fn families_agree_with_emitted_formulas(
        params in prop::collection::vec(q(), 6),
        x in prop::collection::vec(q(), 2),
    ) {
        let fams: Vec<Box<dyn HypothesisFamily>> = vec![
            Box::new(Halfspace::new(2)),
            Box::new(PolynomialThreshold::new(2, 2)),
            Box::new(DecisionTreePoly::new(1, 2, 1, vec![false, true, true, false]).unwrap()),
        ];
        for h in &fams {
            let a = params[..h.param_dim()].to_vec();
            let xi = x[..h.input_dim()].to_vec();
            let f = h.emit_formula();
            let sigma = Assignment::new().with_y(xi.clone()).with_a(a.clone());
            prop_assert_eq!(eval_qf(&f, &sigma).unwrap(), h.evaluate(&a, &xi).unwrap(), "{}", h.name());
        }
    }

    #[test]
    fn sigmoid_formula_agrees_with_forward_pass(
        params in prop::collection::vec(-2.0f64..2.0, 9),
        x in prop::collection::vec(-2.0f64..2.0, 2),
    ) {
        let net = SigmoidNetwork::new(vec![2, 2, 1]).unwrap();
        let score = net.score(&params, &x);
        prop_assume!(score.abs() > 1e-6);
        // Complete the witnesses numerically from the forward pass.
        let mut w = BTreeMap::new();
        for (layer, pre) in net.forward(&params, &x).iter().enumerate() {
            for (i, &r) in pre.iter().enumerate() {
                let (ri, qi, zi) = net.witness_index(layer + 1, i);
                w.insert(ri, r);
                w.insert(qi, (-r).exp());
                w.insert(zi, 1.0 / (1.0 + (-r).exp()));
            }
        }
        let f = net.emit_formula();
        let (_, body) = f.existential_prefix();
        let value = |v: Var| match v.block {
            Block::Y => x.get(v.index).copied(),
            Block::A => params.get(v.index).copied(),
            Block::W => w.get(&v.index).copied(),
            Block::X => None,
        };
        prop_assert_eq!(eval_qf_f64(body, &value, 1e-9), Some(score >= 0.0));
    }

    #[test]
    fn transform_matches_reach_oracle(
        w0 in q(), w1 in q(), c in q(), x0 in q(), x1 in q(), p in 0usize..2, t in 1i64..4,
    ) {
        // For polyhedral balls the transformed formula with a and x fixed is
        // linear in the witnesses, so Fourier-Motzkin decides it exactly.
        let h = Halfspace::new(2);
        let norm = [PNorm::One, PNorm::Inf][p].clone();
        let ball = LpBall::new(2, norm, Radius::Const(ratio(1, t))).unwrap();
        let spec = strategic_transform(&h.emit_formula(), &ball.emit_formula().unwrap()).unwrap();
        let a = vec![w0, w1, c];
        let x = vec![x0, x1];
        let reach = h.reach(&ball, &a, &x).unwrap().unwrap();
        let mut map = BTreeMap::new();
        for (i, v) in a.iter().enumerate() {
            map.insert(Var::new(Block::A, i), Term::constant(v.clone()));
        }
        for (i, v) in x.iter().enumerate() {
            map.insert(Var::new(Block::X, i), Term::constant(v.clone()));
        }
        let ground = spec.result.substitute(&map);
        let sys = LinearSystem::from_formula(&ground).unwrap();
        let names = sys.vars.clone();
        let proj = fm_eliminate(&sys, &names).unwrap();
        let feasible = !proj.infeasible && proj.satisfied(&[]);
        match reach {
            Reach::Reachable => prop_assert!(feasible),
            Reach::Unreachable => prop_assert!(!feasible),
            Reach::Boundary(_) => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn traces_respect_sauer(seed in 0u64..500, m in 1usize..9) {
        // Halfspaces in the plane have VC dimension 3, thresholds 1.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vec<Q>> = (0..m)
            .map(|_| PointDist::Box { lo: -1.0, hi: 1.0 }.sample(2, &mut rng).into_iter().map(|v| stratdef::rational::from_f64(v).unwrap()).collect())
            .collect();
        let params: Vec<Vec<Q>> = (0..300)
            .map(|_| ParamDist::Anchored { sd: 1.0 }.sample(&Halfspace::new(2), &PointDist::Box { lo: -1.0, hi: 1.0 }, &mut rng).into_iter().map(|v| stratdef::rational::from_f64(v).unwrap()).collect())
            .collect();
        let lm = LabelMatrix::from_family(&Halfspace::new(2), None, &params, &pts).unwrap();
        let t = trace_set(&lm).count();
        prop_assert!(num_bigint::BigInt::from(t) <= sauer_bound(m as u64, 3.min(m as u64)).unwrap().exact);
        let xs: Vec<Q> = pts.iter().map(|p| p[0].clone()).collect();
        prop_assert!(num_bigint::BigInt::from(threshold_trace_count(&xs)) <= sauer_bound(m as u64, 1).unwrap().exact);
    }

    #[test]
    fn growth_is_monotone_in_m_and_trials(seed in 0u64..100, trials in 1usize..4) {
        let cfg = GrowthConfig {
            ms: vec![4, 8, 16],
            trials,
            param_samples: 200,
            neighbor_budget: 0,
            seed,
            points: PointDist::Box { lo: -1.0, hi: 1.0 },
            params: ParamDist::Anchored { sd: 1.0 },
        };
        let small = growth_estimate(&Halfspace::new(2), None, &cfg).unwrap();
        let big = growth_estimate(&Halfspace::new(2), None, &GrowthConfig { trials: trials + 2, ..cfg }).unwrap();
        prop_assert!(small.points.windows(2).all(|w| w[0].traces <= w[1].traces));
        for (a, b) in small.points.iter().zip(&big.points) {
            prop_assert!(a.traces <= b.traces);
        }
    }

    #[test]
    fn erm_dominates_target_and_replays(seed in 0u64..1000, m in 0usize..40) {
        use stratdef::learn::*;
        let h = Halfspace::new(2);
        let n = LpBall::new(2, PNorm::Inf, Radius::Const(ratio(1, 8))).unwrap();
        let target = [0.5, 1.0, -0.25];
        let dist = PointDist::Box { lo: -1.0, hi: 1.0 };
        let d = generate_realizable(&h, Some(&n), &target, dist, m, seed).unwrap();
        prop_assert_eq!(&d, &generate_realizable(&h, Some(&n), &target, dist, m, seed).unwrap());
        let cfg = ErmConfig { budget: 50, seed, ..ErmConfig::default() };
        // A deliberately wrong injected candidate must not make things worse.
        let bad = [-0.5, 0.2, 0.9];
        let r = erm_fit(&h, Some(&n), &d, &cfg, Some(&bad)).unwrap();
        // l-inf ball of radius 1/8: shift by the l1 norm of the weights.
        let bad_mistakes = d.xs.iter().zip(&d.ys)
            .filter(|(x, &y)| (bad[0] * x[0] + bad[1] * x[1] - bad[2] + 0.125 * (bad[0].abs() + bad[1].abs()) >= 0.0) != y)
            .count();
        prop_assert!(r.mistakes <= bad_mistakes);
        let with_target = erm_fit(&h, Some(&n), &d, &cfg, Some(&target)).unwrap();
        prop_assert_eq!(with_target.mistakes, 0);
        prop_assert_eq!(erm_fit(&h, Some(&n), &d, &cfg, None).unwrap(), erm_fit(&h, Some(&n), &d, &cfg, None).unwrap());
    }
}

#[test]
fn bound_helper_examples() {
    assert_eq!(vc_from_growth_bound(2.0, 1).unwrap(), 10.0);
    assert!(vc_from_growth_extremal(2, 1).unwrap() as f64 <= 10.0);
    assert!(log_self_bound(0.0, 0.5).is_err());
    assert!(vc_consistency_bound(1.0, 1).is_err());
}
