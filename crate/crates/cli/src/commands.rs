use crate::output::{csv_with_header, emit, json_string, Envelope, TOOLKIT};
use crate::{
    BlowupArgs, Cli, Command, ConstructionArg, DistArg, FmArgs, GrowthArgs, LearnArgs, ShatterArgs, Status,
    TransformArgs,
};
use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;
use stratdef::capacity::{
    growth_estimate, is_shattered, vc_lower_bound, GrowthConfig, LabelMatrix, ParamDist, PointDist, Provenance,
    ShatterReport, VcSearch,
};
use stratdef::constructions::{
    block_pairs, build_all_radii, build_fixed_blowup, build_frac_construction_capped, build_partition_pathology,
    AllRadiiInstance, ConstructionError, ConstructionInstance, ConstructionKind,
};
use stratdef::families::{parse_hypothesis, parse_neighborhood, HypothesisFamily, NeighborhoodSystem};
use stratdef::formula::{parse, Block, Formula};
use stratdef::learn::{sample_complexity_sweep, ErmConfig, SweepConfig};
use stratdef::rational::{format_rational, parse_rational, Q};
use stratdef::solve::{fm_eliminate, LinearSystem};
use stratdef::transform::{complexity_report, strategic_transform, ComplexityReport, StrategicClassSpec};

pub fn dispatch(cli: &Cli) -> Result<Status> {
    match &cli.command {
        Command::Transform(a) => transform(cli, a),
        Command::FmElim(a) => fm_elim(cli, a),
        Command::VerifyBlowup(a) => verify_blowup(cli, a),
        Command::Shatter(a) => shatter(cli, a),
        Command::Growth(a) => growth(cli, a),
        Command::Learn(a) => learn(cli, a),
    }
}

fn write_json<R: Serialize>(cli: &Cli, command: &str, result: &R, out: Option<&Path>) -> Result<()> {
    let env = Envelope { toolkit: TOOLKIT, command, config: cli, result };
    emit(out, &json_string(&env)?)
}

fn rational(text: &str, what: &str) -> Result<Q> {
    parse_rational(text).map_err(|e| anyhow!("{what}: not a rational number: `{}`", e.0))
}

fn read_formula(path: &Path) -> Result<Formula> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text).map_err(|e| anyhow!("malformed formula in {}: {e}", path.display()))
}

#[derive(Serialize)]
struct TransformResult {
    #[serde(rename = "F_out")]
    f_out: Option<usize>,
    #[serde(rename = "D_out")]
    d_out: Option<usize>,
    formula: String,
    report: ComplexityReport,
    spec: StrategicClassSpec,
}

fn transform(cli: &Cli, a: &TransformArgs) -> Result<Status> {
    let h = match (&a.hypothesis, &a.hypothesis_file) {
        (Some(s), _) => parse_hypothesis(s)?.emit_formula(),
        (None, Some(p)) => read_formula(p)?,
        (None, None) => bail!("need --hypothesis or --hypothesis-file"),
    };
    let n = match (&a.neighborhood, &a.neighborhood_file) {
        (Some(s), _) => {
            let nb = parse_neighborhood(s)?;
            nb.emit_formula().ok_or_else(|| anyhow!("neighborhood `{s}` has no definable formula"))?
        }
        (None, Some(p)) => read_formula(p)?,
        (None, None) => bail!("need --neighborhood or --neighborhood-file"),
    };
    let spec = strategic_transform(&h, &n)?;
    let report = complexity_report(&spec);
    let result =
        TransformResult { f_out: report.format_out, d_out: report.degree_out, formula: spec.result.to_string(), report, spec };
    write_json(cli, "transform", &result, a.out.as_deref())?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct FmResult {
    eliminated: Vec<String>,
    infeasible: bool,
    formula: String,
    system: LinearSystem,
}

fn fm_elim(cli: &Cli, a: &FmArgs) -> Result<Status> {
    let f = read_formula(&a.input)?;
    let sys = LinearSystem::from_formula(&f)?;
    let eliminate: Vec<String> = if a.eliminate.is_empty() {
        f.all_vars().into_iter().filter(|v| v.block == Block::W).map(|v| v.to_string()).collect()
    } else {
        a.eliminate.clone()
    };
    let out = fm_eliminate(&sys, &eliminate)?;
    let result = FmResult { eliminated: eliminate, infeasible: out.infeasible, formula: out.to_formula()?.to_string(), system: out };
    write_json(cli, "fm-elim", &result, a.out.as_deref())?;
    Ok(Status::Ok)
}

/// Certificate of the all-radii construction: the truncated class plus one
/// shattering certificate per requested radius.
#[derive(Serialize, Deserialize)]
struct AllRadiiCert {
    instance: AllRadiiInstance,
    certificates: Vec<ConstructionInstance>,
}

fn pow2(e: i32) -> Q {
    let two = Q::from_integer(2.into());
    if e >= 0 {
        num_traits::pow(two, e as usize)
    } else {
        num_traits::pow(two, (-e) as usize).recip()
    }
}

/// Smallest truncation giving each radius a block of size at least `n`.
fn default_t(n: usize, radii: &[Q]) -> Option<usize> {
    (1..=4096).find(|&t| {
        let pairs = block_pairs(t);
        radii.iter().all(|s| pairs.iter().any(|&(k, m)| k >= n && pow2(-m - 1) <= *s && *s <= pow2(-m)))
    })
}

fn verify_blowup(cli: &Cli, a: &BlowupArgs) -> Result<Status> {
    let passed = match a.construction {
        ConstructionArg::Fixed => {
            let r = rational(a.r.as_deref().unwrap_or("1"), "--r")?;
            let rp = rational(a.rp.as_deref().unwrap_or("1/2"), "--rp")?;
            let inst = build_fixed_blowup(a.n, &r, &rp)?;
            write_json(cli, "verify-blowup", &inst, a.out.as_deref())?;
            inst.passed()
        }
        ConstructionArg::Partition => {
            let inst = build_partition_pathology(a.n)?;
            write_json(cli, "verify-blowup", &inst, a.out.as_deref())?;
            inst.passed()
        }
        ConstructionArg::Frac => {
            let r = rational(a.r.as_deref().unwrap_or("1/4"), "--r")?;
            // Running out of scan range or precision means the certificate
            // could not be established, not that the invocation was wrong.
            match build_frac_construction_capped(a.n, &r, a.scan_cap, cli.global.precision_bits) {
                Ok(inst) => {
                    write_json(cli, "verify-blowup", &inst, a.out.as_deref())?;
                    inst.passed()
                }
                Err(e @ (ConstructionError::ScanCap { .. } | ConstructionError::PrecisionCap { .. })) => {
                    eprintln!("verification failed: {e}");
                    false
                }
                Err(e) => return Err(e.into()),
            }
        }
        ConstructionArg::AllRadii => {
            let radii: Vec<Q> = a.s.iter().map(|s| rational(s, "--s")).collect::<Result<_>>()?;
            let t = match a.t {
                Some(t) => t,
                None => default_t(a.n, &radii).ok_or_else(|| anyhow!("no truncation up to 4096 blocks covers the radii"))?,
            };
            let instance = build_all_radii(t)?;
            let certificates = radii.iter().map(|s| instance.certify(s)).collect::<Result<Vec<_>, _>>()?;
            let ok = instance.passed() && certificates.iter().all(|c| c.passed());
            write_json(cli, "verify-blowup", &AllRadiiCert { instance, certificates }, a.out.as_deref())?;
            ok
        }
    };
    Ok(if passed { Status::Ok } else { Status::VerificationFailed })
}

#[derive(Deserialize)]
struct FileEnvelope<R> {
    result: R,
}

#[derive(Serialize)]
struct ShatterEntry {
    kind: ConstructionKind,
    n: usize,
    neighborhood: String,
    candidates: Vec<String>,
    /// The rebuilt construction reproduces the file's candidates and rows.
    matches_file: bool,
    report: ShatterReport,
    vc_lower_bound: VcSearch,
}

fn shatter_entry(file: &ConstructionInstance, rebuilt: &ConstructionInstance, m: LabelMatrix, budget: usize) -> Result<ShatterEntry> {
    let report = is_shattered(&m);
    let vc = vc_lower_bound(&m, budget)?;
    Ok(ShatterEntry {
        kind: file.kind,
        n: file.n,
        neighborhood: file.neighborhood.clone(),
        candidates: file.candidates.iter().map(format_rational).collect(),
        matches_file: file.candidates == rebuilt.candidates && file.rows == rebuilt.rows && file.neighborhood == rebuilt.neighborhood,
        report,
        vc_lower_bound: vc,
    })
}

fn finite_matrix(inst: &ConstructionInstance, class: &stratdef::families::FiniteSupportClass) -> Result<LabelMatrix> {
    let nb = parse_neighborhood(&inst.neighborhood)?;
    let pts: Vec<Vec<Q>> = inst.candidates.iter().map(|c| vec![c.clone()]).collect();
    Ok(LabelMatrix::from_finite(class, nb.as_ref(), &pts)?)
}

fn shatter(cli: &Cli, a: &ShatterArgs) -> Result<Status> {
    let text = std::fs::read_to_string(&a.instance).with_context(|| format!("reading {}", a.instance.display()))?;
    let mut entries = Vec::new();
    if let Ok(env) = serde_json::from_str::<FileEnvelope<AllRadiiCert>>(&text) {
        let rebuilt = build_all_radii(env.result.instance.t)?;
        let class = rebuilt.class.as_ref().ok_or_else(|| anyhow!("all-radii class missing"))?;
        for cert in &env.result.certificates {
            let s = cert.neighborhood.strip_prefix("interval:r=").ok_or_else(|| anyhow!("unexpected neighborhood"))?;
            let again = rebuilt.certify(&rational(s, "radius")?)?;
            entries.push(shatter_entry(cert, &again, finite_matrix(cert, class)?, a.budget)?);
        }
    } else {
        let env: FileEnvelope<ConstructionInstance> =
            serde_json::from_str(&text).map_err(|e| anyhow!("{} is not a verify-blowup certificate: {e}", a.instance.display()))?;
        let inst = env.result;
        let r = inst.r.clone();
        let (rebuilt, matrix) = match inst.kind {
            ConstructionKind::Fixed => {
                let (r, rp) = r.zip(inst.r_prime.clone()).ok_or_else(|| anyhow!("certificate lacks r, r'"))?;
                let b = build_fixed_blowup(inst.n, &r, &rp)?;
                let m = finite_matrix(&inst, b.class.as_ref().ok_or_else(|| anyhow!("class missing"))?)?;
                (b, m)
            }
            ConstructionKind::Partition => {
                let b = build_partition_pathology(inst.n)?;
                let m = finite_matrix(&inst, b.class.as_ref().ok_or_else(|| anyhow!("class missing"))?)?;
                (b, m)
            }
            ConstructionKind::Frac => {
                let r = r.ok_or_else(|| anyhow!("certificate lacks r"))?;
                let b = build_frac_construction_capped(inst.n, &r, 1_000_000, cli.global.precision_bits)?;
                // Rows hold the certified strategic labels of each integer
                // parameter on the candidates.
                let m = LabelMatrix::from_rows(b.rows.iter().map(|row| row.labels.clone()).collect(), Provenance::Exact);
                (b, m)
            }
            ConstructionKind::AllRadii => bail!("all-radii certificates carry the full instance; rerun verify-blowup"),
        };
        entries.push(shatter_entry(&inst, &rebuilt, matrix, a.budget)?);
    }
    let ok = entries.iter().all(|e| e.matches_file && e.report.shattered);
    write_json(cli, "shatter", &entries, a.out.as_deref())?;
    Ok(if ok { Status::Ok } else { Status::VerificationFailed })
}

fn point_dist(d: DistArg) -> PointDist {
    match d {
        DistArg::Box => PointDist::Box { lo: -1.0, hi: 1.0 },
        DistArg::Gaussian => PointDist::Gaussian { sd: 1.0 },
        DistArg::Simplex => PointDist::Simplex,
    }
}

fn family_pair(family: &str, nbhd: Option<&str>) -> Result<(Box<dyn HypothesisFamily>, Option<Box<dyn NeighborhoodSystem>>)> {
    let h = parse_hypothesis(family)?;
    let n = nbhd.map(parse_neighborhood).transpose()?;
    if let Some(n) = &n {
        if n.dim() != h.input_dim() {
            bail!("family `{}` has input dimension {} but `{}` has {}", h.name(), h.input_dim(), n.name(), n.dim());
        }
    }
    Ok((h, n))
}

fn growth(cli: &Cli, a: &GrowthArgs) -> Result<Status> {
    let (h, n) = family_pair(&a.family, a.neighborhood.as_deref())?;
    if a.m.is_empty() || a.trials == 0 {
        bail!("need at least one --m value and --trials >= 1");
    }
    let cfg = GrowthConfig {
        ms: a.m.clone(),
        trials: a.trials,
        param_samples: a.param_samples,
        neighbor_budget: a.neighbor_budget,
        seed: cli.global.seed,
        points: point_dist(a.dist),
        params: ParamDist::Anchored { sd: 1.0 },
    };
    let report = growth_estimate(h.as_ref(), n.as_deref(), &cfg)?;
    let mut body = String::from("m,traces,min_trial,ln_m,ln_traces\n");
    for p in &report.points {
        let min = p.per_trial.iter().min().copied().unwrap_or(0);
        body.push_str(&format!("{},{},{},{},{}\n", p.m, p.traces, min, (p.m as f64).ln(), (p.traces as f64).ln()));
    }
    if let Some(path) = &a.json {
        write_json(cli, "growth", &report, Some(path))?;
    }
    if a.csv.is_some() || a.json.is_none() {
        emit(a.csv.as_deref(), &csv_with_header("growth", cli, &body)?)?;
    }
    Ok(Status::Ok)
}

fn learn(cli: &Cli, a: &LearnArgs) -> Result<Status> {
    let (h, n) = family_pair(&a.family, a.neighborhood.as_deref())?;
    let cfg = SweepConfig {
        eps: a.eps.clone(),
        delta: a.delta,
        trials: a.trials,
        seed: cli.global.seed,
        target: a.target.clone(),
        distribution: point_dist(a.dist),
        erm: ErmConfig { budget: a.budget, seed: cli.global.seed, ..ErmConfig::default() },
        m_min: a.m_min,
        m_max: a.m_max,
        grid_ratio: a.grid_ratio,
    };
    let report = sample_complexity_sweep(h.as_ref(), n.as_deref(), &cfg)?;
    if let Some(path) = &a.json {
        write_json(cli, "learn", &report, Some(path))?;
    }
    if a.csv.is_some() || a.json.is_none() {
        emit(a.csv.as_deref(), &csv_with_header("learn", cli, &report.to_csv())?)?;
    }
    Ok(Status::Ok)
}
