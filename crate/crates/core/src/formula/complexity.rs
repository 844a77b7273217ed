use super::{is_graph_form, Atom, Block, Formula, FormulaError, Term};
use serde::{Deserialize, Serialize};

/// Syntactic complexity of a graph-form formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityProfile {
    pub format: usize,
    pub degree: usize,
    pub input_dim: usize,
    pub param_dim: usize,
    pub witness_dim: usize,
    pub exp_atoms: usize,
    pub free_vars: usize,
    pub polynomial_atoms: usize,
    /// Largest degree of a single polynomial atom.
    #[serde(default)]
    pub max_atom_degree: usize,
}

// Parameters act as coefficients: `a0 * x0` is linear.
fn degree_without_params(t: &Term) -> usize {
    match t {
        Term::Var(v) => usize::from(v.block != Block::A),
        Term::Const(_) | Term::Sym(_) | Term::Exp(_) => 0,
        Term::Sum(ts) => ts.iter().map(degree_without_params).max().unwrap_or(0),
        Term::Product(ts) => ts.iter().map(degree_without_params).sum(),
    }
}

/// Format `F = n + f + r` and degree `D = sum deg + r`.
pub fn complexity(f: &Formula) -> Result<ComplexityProfile, FormulaError> {
    if !is_graph_form(f) {
        return Err(FormulaError::NotGraphForm);
    }
    let free = f.free_vars();
    let (prefix, _) = f.existential_prefix();
    let mut witnesses = prefix.clone();
    witnesses.sort_unstable();
    witnesses.dedup();

    let mut r = 0;
    let mut poly_deg = 0;
    let mut poly_atoms = 0;
    let mut max_atom = 0;
    for a in f.atoms() {
        match a {
            Atom::ExpGraph { .. } => r += 1,
            Atom::Compare { lhs, rhs, .. } => {
                poly_atoms += 1;
                let d = degree_without_params(lhs).max(degree_without_params(rhs));
                poly_deg += d;
                max_atom = max_atom.max(d);
            }
        }
    }
    let input_dim = f.block_dim(Block::X);
    let param_dim = f.block_dim(Block::A);
    Ok(ComplexityProfile {
        format: free.len() + witnesses.len() + r,
        degree: poly_deg + r,
        input_dim,
        param_dim,
        witness_dim: witnesses.len(),
        exp_atoms: r,
        free_vars: free.len(),
        polynomial_atoms: poly_atoms,
        max_atom_degree: max_atom,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse, to_graph_form};

    #[test]
    fn halfspace_counts() {
        let p = complexity(&parse("(>= (+ (* a0 x0) (* a1 x1)) a2)").unwrap()).unwrap();
        assert_eq!((p.format, p.degree, p.input_dim, p.param_dim, p.witness_dim, p.exp_atoms), (5, 1, 2, 3, 0, 0));
    }

    #[test]
    fn box_neighborhood_is_linear() {
        let f = parse(
            "(and (<= (+ x0 (* -1 y0)) 1) (>= (+ x0 (* -1 y0)) -1) (<= (+ x1 (* -1 y1)) 1) (>= (+ x1 (* -1 y1)) -1))",
        )
        .unwrap();
        let p = complexity(&f).unwrap();
        assert_eq!((p.degree, p.exp_atoms, p.format), (4, 0, 4));
    }

    #[test]
    fn exp_atoms_count_in_format_and_degree() {
        let g = to_graph_form(&parse("(<= (exp (- x0 x1)) 1)").unwrap()).unwrap();
        let p = complexity(&g).unwrap();
        // free x0 x1, witnesses w0 w1, one exp atom
        assert_eq!(p.format, 2 + 2 + 1);
        // v = x0 - x1 (1) and u <= 1 (1), plus r
        assert_eq!(p.degree, 1 + 1 + 1);
    }

    #[test]
    fn rejects_non_graph_form() {
        assert_eq!(complexity(&parse("(<= (exp x0) 1)").unwrap()), Err(FormulaError::NotGraphForm));
    }
}
