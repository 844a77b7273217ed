//! Textual specs such as `halfspace:l=2` or `lp:l=2,p=inf,r=1/2`.

use super::*;
use crate::rational::{parse_rational, Q};
use num_traits::One;
use std::collections::BTreeMap;

struct Spec<'a> {
    kind: &'a str,
    args: BTreeMap<&'a str, &'a str>,
}

impl<'a> Spec<'a> {
    fn parse(text: &'a str) -> Result<Self, FamilyError> {
        let (kind, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut args = BTreeMap::new();
        for part in rest.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| FamilyError::InvalidSpec(format!("expected key=value, got `{part}`")))?;
            if args.insert(k.trim(), v.trim()).is_some() {
                return Err(FamilyError::InvalidSpec(format!("duplicate key `{k}`")));
            }
        }
        Ok(Spec { kind: kind.trim(), args })
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.args.remove(key)
    }

    fn usize(&mut self, key: &str, default: Option<usize>) -> Result<usize, FamilyError> {
        match self.take(key) {
            Some(v) => v.parse().map_err(|_| FamilyError::InvalidSpec(format!("`{key}` must be a nonnegative integer"))),
            None => default.ok_or_else(|| FamilyError::InvalidSpec(format!("`{}` needs `{key}`", self.kind))),
        }
    }

    fn rational(&mut self, key: &str, default: Option<Q>) -> Result<Q, FamilyError> {
        match self.take(key) {
            Some(v) => parse_rational(v).map_err(|e| FamilyError::InvalidSpec(format!("`{key}`: {}", e.0))),
            None => default.ok_or_else(|| FamilyError::InvalidSpec(format!("`{}` needs `{key}`", self.kind))),
        }
    }

    fn finish(self) -> Result<(), FamilyError> {
        match self.args.keys().next() {
            Some(k) => Err(FamilyError::InvalidSpec(format!("unknown key `{k}` for `{}`", self.kind))),
            None => Ok(()),
        }
    }
}

/// Parses a hypothesis family spec.
pub fn parse_hypothesis(text: &str) -> Result<Box<dyn HypothesisFamily>, FamilyError> {
    let mut s = Spec::parse(text)?;
    let h: Box<dyn HypothesisFamily> = match s.kind {
        "halfspace" => Box::new(Halfspace::new(s.usize("l", Some(2))?)),
        "threshold" => Box::new(Threshold),
        "ptf" => {
            let l = s.usize("l", Some(2))?;
            let d = s.usize("D", None).or_else(|_| s.usize("d", None))?;
            Box::new(PolynomialThreshold::new(l, d as u32))
        }
        "tree" => {
            let l = s.usize("l", Some(1))?;
            let depth = s.usize("depth", None)?;
            let q = s.usize("q", Some(1))?;
            let leaves = match s.take("leaves") {
                Some(bits) => bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(FamilyError::InvalidSpec("leaves must be a 0/1 string".into())),
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                // Alternate labels by default.
                None => (0..1usize << depth.min(20)).map(|i| i % 2 == 1).collect(),
            };
            Box::new(DecisionTreePoly::new(l, depth, q as u32, leaves)?)
        }
        "sigmoid" => {
            let widths = s
                .take("widths")
                .ok_or_else(|| FamilyError::InvalidSpec("sigmoid needs widths, e.g. widths=2-2-1".into()))?
                .split('-')
                .map(|w| w.parse::<usize>().map_err(|_| FamilyError::InvalidSpec(format!("bad width `{w}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            Box::new(SigmoidNetwork::new(widths)?)
        }
        other => return Err(FamilyError::InvalidSpec(format!("unknown hypothesis family `{other}`"))),
    };
    s.finish()?;
    Ok(h)
}

fn parse_radius(text: &str, l: usize) -> Result<Radius, FamilyError> {
    if let Some(inner) = text.strip_prefix("pos(").and_then(|t| t.strip_suffix(')')) {
        let c = inner
            .strip_prefix('x')
            .and_then(|i| i.parse::<usize>().ok())
            .ok_or_else(|| FamilyError::InvalidSpec(format!("bad radius coordinate `{inner}`")))?;
        if c >= l {
            return Err(FamilyError::InvalidSpec(format!("radius coordinate x{c} out of range")));
        }
        return Ok(Radius::PosCoord(c));
    }
    parse_rational(text).map(Radius::Const).map_err(|e| FamilyError::InvalidSpec(e.0))
}

/// Parses a neighborhood system spec.
pub fn parse_neighborhood(text: &str) -> Result<Box<dyn NeighborhoodSystem>, FamilyError> {
    let mut s = Spec::parse(text)?;
    let n: Box<dyn NeighborhoodSystem> = match s.kind {
        "identity" => Box::new(Identity::new(s.usize("l", Some(1))?)),
        "lp" => {
            let l = s.usize("l", Some(2))?;
            let norm = match s.take("p").unwrap_or("2") {
                "inf" => PNorm::Inf,
                p => PNorm::new(parse_rational(p).map_err(|e| FamilyError::InvalidSpec(e.0))?)?,
            };
            let radius = parse_radius(s.take("r").unwrap_or("1"), l)?;
            Box::new(LpBall::new(l, norm, radius)?)
        }
        "kl" => {
            let l = s.usize("l", Some(2))?;
            Box::new(KlBall::new(l, s.rational("r", Some(Q::one()))?)?)
        }
        "gauss-kl" => Box::new(GaussianKl::new(s.rational("r", Some(Q::one()))?)?),
        "emd" => {
            let l = s.usize("l", Some(3))?;
            let metric = match s.take("rho").unwrap_or("line") {
                "line" | "paper" => EmdBall::line_metric(l),
                "discrete" => (0..l).map(|i| (0..l).map(|j| Q::from_integer((i != j).into())).collect()).collect(),
                other => return Err(FamilyError::InvalidSpec(format!("unknown metric `{other}`"))),
            };
            Box::new(EmdBall::new(metric, s.rational("r", Some(Q::one()))?)?)
        }
        "interval" => Box::new(IntervalRadius::new(s.rational("r", Some(Q::one()))?)?),
        "floor" => Box::new(FloorPartition),
        other => return Err(FamilyError::InvalidSpec(format!("unknown neighborhood system `{other}`"))),
    };
    s.finish()?;
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_names() {
        for spec in ["halfspace:l=3", "threshold", "ptf:l=2,D=3", "sigmoid:widths=2-2-1", "tree:l=1,depth=2,q=1,leaves=0010"] {
            assert_eq!(parse_hypothesis(spec).unwrap().name(), spec);
        }
        for spec in ["lp:l=2,p=2,r=1/2", "lp:l=2,p=inf,r=1", "lp:l=2,p=2,r=pos(x1)", "kl:l=3,r=1", "interval:r=1/3", "floor", "identity:l=2"] {
            assert_eq!(parse_neighborhood(spec).unwrap().name(), spec);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(parse_hypothesis("ptf:l=2").is_err());
        assert!(parse_hypothesis("halfspace:l=2,bogus=1").is_err());
        assert!(parse_neighborhood("lp:p=0").is_err());
        assert!(parse_neighborhood("lp:l=2,r=pos(x5)").is_err());
        assert!(parse_neighborhood("nope").is_err());
    }
}
