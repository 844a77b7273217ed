//! Hypothesis families and neighborhood systems, each with an exact
//! evaluator, a formula emitter and, where one exists, a closed-form
//! strategic reach oracle.

mod hypothesis;
mod neighborhood;
mod registry;

pub use hypothesis::{
    graded_monomials, monomial_term, DecisionTreePoly, FiniteSupportClass, Halfspace, PolynomialThreshold,
    SigmoidNetwork, Threshold,
};
pub use neighborhood::{
    EmdBall, FloorPartition, GaussianKl, Identity, IntervalRadius, KlBall, LpBall, PNorm, Radius,
};
pub use registry::{parse_hypothesis, parse_neighborhood};

use crate::formula::Formula;
use crate::rational::Q;
use crate::solve::SolveError;
use rand::RngCore;
use thiserror::Error;

/// Boundary tolerance for float-path decisions.
pub const TAU: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FamilyError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("input is not in the interior of the probability simplex")]
    OffSimplex,
    #[error("membership undecided within tolerance: {0}")]
    Undecided(String),
    #[error("support sets {0} and {1} intersect")]
    NotDisjoint(usize, usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<(), FamilyError> {
    if expected == got {
        Ok(())
    } else {
        Err(FamilyError::Dimension { expected, got })
    }
}

/// Outcome of a closed-form strategic reachability test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reach {
    Reachable,
    Unreachable,
    /// Within tolerance of the decision boundary; carries the margin.
    Boundary(f64),
}

/// Shape of a neighborhood, used by reach oracles.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborhoodShape {
    Identity,
    Ball { norm: PNorm, radius: Radius },
    Other,
}

/// A parameterized class `{ h_a : a in R^k }` over `R^l`.
pub trait HypothesisFamily: Send + Sync {
    fn name(&self) -> String;
    fn input_dim(&self) -> usize;
    fn param_dim(&self) -> usize;
    /// Exact label.
    fn evaluate(&self, params: &[Q], x: &[Q]) -> Result<bool, FamilyError>;
    /// Signed score; label 1 iff the score is nonnegative (up to ties on
    /// strict families).
    fn score(&self, params: &[f64], x: &[f64]) -> f64;
    fn evaluate_f64(&self, params: &[f64], x: &[f64]) -> bool {
        self.score(params, x) >= 0.0
    }
    /// `Phi_H(Y, A)`: inputs in the `Y` block, parameters in `A`.
    fn emit_formula(&self) -> Formula;
    /// Exact strategic reachability, if a closed form is known.
    fn reach(&self, _nbhd: &dyn NeighborhoodSystem, _params: &[Q], _x: &[Q]) -> Option<Result<Reach, FamilyError>> {
        None
    }
    /// Float strategic score: nonnegative iff some point of `N_x` is labeled 1.
    fn strategic_score(&self, _nbhd: &dyn NeighborhoodSystem, _params: &[f64], _x: &[f64]) -> Option<f64> {
        None
    }
}

/// A family `{ N_x }` of reachable sets.
pub trait NeighborhoodSystem: Send + Sync {
    fn name(&self) -> String;
    fn dim(&self) -> usize;
    fn contains(&self, x: &[Q], y: &[Q]) -> Result<bool, FamilyError>;
    fn contains_f64(&self, x: &[f64], y: &[f64]) -> bool;
    /// `Phi_N(X, Y)`, or `None` for systems outside the definable setting.
    fn emit_formula(&self) -> Option<Formula>;
    /// Points of `N_x`; the first is always `x` itself.
    fn sample(&self, x: &[f64], budget: usize, rng: &mut dyn RngCore) -> Vec<Vec<f64>>;
    fn shape(&self) -> NeighborhoodShape {
        NeighborhoodShape::Other
    }
    fn definable(&self) -> bool {
        self.emit_formula().is_some()
    }
}
