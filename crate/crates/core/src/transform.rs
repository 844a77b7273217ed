//! The strategic transform `exists y (Phi_N(x, y) and Phi_H(y, a))` and its
//! complexity bookkeeping.

use crate::formula::{complexity, to_graph_form, Block, ComplexityProfile, Formula, FormulaError, Fragment, Var};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("hypothesis uses {hypothesis} input coordinates but the neighborhood uses {neighborhood}")]
    YDimension { hypothesis: usize, neighborhood: usize },
    #[error("hypothesis formula mentions input variable {0}; inputs must be in the y block")]
    StrayInput(String),
    #[error("neighborhood formula mentions parameter {0}")]
    StrayParameter(String),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Result of the transform together with the complexity profiles of the
/// inputs and the output (graph form). Profiles are absent for inputs
/// outside the existential fragment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategicClassSpec {
    pub hypothesis: Formula,
    pub neighborhood: Formula,
    pub result: Formula,
    pub profile_hypothesis: Option<ComplexityProfile>,
    pub profile_neighborhood: Option<ComplexityProfile>,
    pub profile_out: Option<ComplexityProfile>,
    pub fragment: Fragment,
    /// False when an input is in the general fragment; such specs are
    /// usable for evaluation only.
    pub quantitative: bool,
    pub warnings: Vec<String>,
    pub input_dim: usize,
}

fn profile(f: &Formula) -> Result<Option<ComplexityProfile>, FormulaError> {
    if f.fragment() == Fragment::General {
        return Ok(None);
    }
    Ok(Some(complexity(&to_graph_form(f)?)?))
}

/// Builds `exists y (Phi_N(x, y) and Phi_H(y, a))`.
///
/// The `y` block becomes witnesses `w0..w{l-1}`; the neighborhood's own
/// witnesses follow, then the hypothesis' witnesses.
pub fn strategic_transform(h: &Formula, n: &Formula) -> Result<StrategicClassSpec, TransformError> {
    if let Some(v) = h.free_vars().into_iter().find(|v| v.block == Block::X) {
        return Err(TransformError::StrayInput(v.to_string()));
    }
    if let Some(v) = n.free_vars().into_iter().find(|v| v.block == Block::A) {
        return Err(TransformError::StrayParameter(v.to_string()));
    }
    let (lh, ln) = (h.block_dim(Block::Y), n.block_dim(Block::Y));
    if lh != ln {
        return Err(TransformError::YDimension { hypothesis: lh, neighborhood: ln });
    }
    let l = lh;
    let wn = n.block_dim(Block::W);
    let wh = h.block_dim(Block::W);

    let shift = |offset: usize| {
        move |v: Var| match v.block {
            Block::Y => Var::new(Block::W, v.index),
            Block::W => Var::new(Block::W, v.index + offset),
            _ => v,
        }
    };
    let n2 = n.rename(&shift(l));
    let h2 = h.rename(&shift(l + wn));

    let general = h.fragment() == Fragment::General || n.fragment() == Fragment::General;
    let mut warnings = Vec::new();
    let result = if general {
        warnings.push("general-fragment input: no quantitative bounds; evaluation only".to_string());
        Formula::exists((0..l).collect(), Formula::And(vec![n2, h2]))
    } else {
        let (pn, bn) = n2.existential_prefix();
        let (ph, bh) = h2.existential_prefix();
        let mut ws: Vec<usize> = (0..l).collect();
        ws.extend(pn);
        ws.extend(ph);
        let body = Formula::And(vec![bn.clone(), bh.clone()]);
        if ws.is_empty() {
            body
        } else {
            Formula::exists(ws, body)
        }
    };
    debug_assert!(wh == 0 || result.block_dim(Block::W) >= l + wn + wh);

    Ok(StrategicClassSpec {
        profile_hypothesis: profile(h)?,
        profile_neighborhood: profile(n)?,
        profile_out: profile(&result)?,
        fragment: result.fragment(),
        quantitative: !general,
        warnings,
        input_dim: l,
        hypothesis: h.clone(),
        neighborhood: n.clone(),
        result,
    })
}

/// A sample-complexity bound as a string, with its unknown constants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundString {
    pub setting: String,
    pub sample_complexity: String,
    pub vc_dimension: String,
    pub constants: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub format_hypothesis: Option<usize>,
    pub degree_hypothesis: Option<usize>,
    pub format_neighborhood: Option<usize>,
    pub degree_neighborhood: Option<usize>,
    pub format_out: Option<usize>,
    pub degree_out: Option<usize>,
    /// Parameter count of the hypothesis class.
    pub k: usize,
    /// Input dimension.
    pub l: usize,
    /// Polynomial atoms across both inputs.
    pub polynomial_atoms: Option<usize>,
    /// Largest atom degree across both inputs.
    pub max_atom_degree: Option<usize>,
    pub format_additive: Option<bool>,
    pub degree_additive: Option<bool>,
    pub bounds: Vec<BoundString>,
}

/// Recounts the profiles and attaches the applicable bound strings.
pub fn complexity_report(spec: &StrategicClassSpec) -> ComplexityReport {
    let ph = spec.profile_hypothesis.as_ref();
    let pn = spec.profile_neighborhood.as_ref();
    let po = spec.profile_out.as_ref();
    let k = spec.hypothesis.block_dim(Block::A);
    let l = spec.result.block_dim(Block::X).max(spec.input_dim);
    let both = ph.zip(pn);
    let s = both.map(|(a, b)| a.polynomial_atoms + b.polynomial_atoms);
    let dmax = both.map(|(a, b)| a.max_atom_degree.max(b.max_atom_degree).max(1));

    let mut bounds = Vec::new();
    let no_exp = !spec.hypothesis.contains_exp() && !spec.neighborhood.contains_exp();
    let qf = spec.hypothesis.fragment() == Fragment::QuantifierFree
        && spec.neighborhood.fragment() == Fragment::QuantifierFree;
    if spec.quantitative && qf && no_exp {
        let d = s.unwrap_or(0) * dmax.unwrap_or(1);
        bounds.push(BoundString {
            setting: "quantifier-free semialgebraic".into(),
            sample_complexity: format!(
                "O((k log(1/eps) + k^2 l log D + log(1/delta)) / eps) with k={k}, l={l}, D=s*D'={d}"
            ),
            vc_dimension: format!("O(k^2 l log D) with k={k}, l={l}, D={d}"),
            constants: "unspecified".into(),
        });
    }
    if spec.quantitative {
        let f = po.map(|p| p.format).unwrap_or(0);
        let d = po.map(|p| p.degree).unwrap_or(0);
        bounds.push(BoundString {
            setting: "existential with exponentiation".into(),
            sample_complexity: format!(
                "O((k log(1/eps) + gamma(F) log D + log(1/delta)) / eps) with k={k}, F={f}, D={d}"
            ),
            vc_dimension: format!("O_F(log D) with F={f}, D={d}"),
            constants: "unspecified (gamma computable but not evaluated)".into(),
        });
    }
    bounds.push(BoundString {
        setting: "definable with exponentiation".into(),
        sample_complexity: format!("O((k log(1/eps) + log(1/delta) + K_HN) / eps) with k={k}"),
        vc_dimension: "finite".into(),
        constants: "unspecified (K_HN non-constructive)".into(),
    });

    ComplexityReport {
        format_hypothesis: ph.map(|p| p.format),
        degree_hypothesis: ph.map(|p| p.degree),
        format_neighborhood: pn.map(|p| p.format),
        degree_neighborhood: pn.map(|p| p.degree),
        format_out: po.map(|p| p.format),
        degree_out: po.map(|p| p.degree),
        k,
        l,
        polynomial_atoms: s,
        max_atom_degree: dmax,
        format_additive: both.zip(po).map(|((a, b), o)| o.format <= a.format + b.format),
        degree_additive: both.zip(po).map(|((a, b), o)| o.degree <= a.degree + b.degree),
        bounds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    #[test]
    fn halfspace_l2_shape() {
        let h = parse("(>= (+ (* a0 y0) (* a1 y1)) a2)").unwrap();
        let n = parse("(<= (+ (* (- x0 y0) (- x0 y0)) (* (- x1 y1) (- x1 y1))) 1)").unwrap();
        let spec = strategic_transform(&h, &n).unwrap();
        assert_eq!(
            spec.result.to_string(),
            "(exists (w0 w1) (and (<= (+ (* (+ x0 (* -1 w0)) (+ x0 (* -1 w0))) (* (+ x1 (* -1 w1)) (+ x1 (* -1 w1)))) 1) (>= (+ (* a0 w0) (* a1 w1)) a2)))"
        );
        assert_eq!(spec.fragment, Fragment::Existential);
        let r = complexity_report(&spec);
        assert_eq!(r.k, 3);
        assert_eq!(r.format_additive, Some(true));
        assert_eq!(r.degree_additive, Some(true));
        assert!(r.bounds.iter().all(|b| b.constants.starts_with("unspecified")));
    }

    #[test]
    fn witnesses_are_disjoint() {
        let h = parse("(exists (w0) (and (= w0 y0) (>= w0 a0)))").unwrap();
        let n = parse("(exists (w0) (and (= w0 (+ x0 1)) (<= y0 w0)))").unwrap();
        let spec = strategic_transform(&h, &n).unwrap();
        assert_eq!(spec.result.existential_prefix().0, vec![0, 1, 2]);
        assert_eq!(
            spec.result.to_string(),
            "(exists (w0 w1 w2) (and (and (= w1 (+ x0 1)) (<= w0 w1)) (and (= w2 w0) (>= w2 a0))))"
        );
    }

    #[test]
    fn rejects_mismatch_and_flags_general() {
        let h = parse("(>= y0 a0)").unwrap();
        let n = parse("(and (= y0 x0) (= y1 x1))").unwrap();
        assert!(matches!(strategic_transform(&h, &n), Err(TransformError::YDimension { .. })));
        let g = parse("(forall (w0) (<= y0 (+ w0 (* w0 w0) 1)))").unwrap();
        let spec = strategic_transform(&parse("(>= y0 a0)").unwrap(), &g).unwrap();
        assert!(!spec.quantitative);
        assert_eq!(spec.profile_out, None);
    }
}
