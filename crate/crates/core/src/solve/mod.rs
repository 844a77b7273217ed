//! Formula semantics: exact quantifier-free evaluation, float compilation,
//! Fourier–Motzkin projection, exact simplex and numerical witness search.

mod compile;
mod eval;
mod fm;
mod linear;
mod lp;
mod witness;

pub use compile::{compile_term, CompiledTerm, Layout};
pub use eval::{eval_qf, eval_qf_f64, eval_qf_with, eval_term, eval_term_f64, EvalConfig, Value};
pub use fm::{fm_eliminate, LinRel, LinearRow, LinearSystem};
pub use linear::{linear_form, LinearForm, Monomial, Poly};
pub use lp::{lp_solve, LPInstance, LpRel, LpResult};
pub use witness::{witness_search, SearchConfig, SearchOutcome, Witness, WitnessSearcher};

use crate::formula::{Block, FormulaError, Var};
use crate::rational::{self, Q};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("formula has quantifiers; expected a quantifier-free formula")]
    NotQuantifierFree,
    #[error("variable {0} has no value in the assignment")]
    Unassigned(String),
    #[error("comparison `{atom}` undecided at {bits} bits")]
    Undecided { atom: String, bits: u32 },
    #[error("nonlinear atom: {0}")]
    Nonlinear(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("search box must be finite")]
    UnboundedBox,
    #[error("disjunctive normal form exceeds {0} branches")]
    BranchLimit(usize),
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// Values for each variable block.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    #[serde(with = "rational::serde_q_vec", default)]
    pub x: Vec<Q>,
    #[serde(with = "rational::serde_q_vec", default)]
    pub y: Vec<Q>,
    #[serde(with = "rational::serde_q_vec", default)]
    pub a: Vec<Q>,
    #[serde(with = "rational::serde_q_vec", default)]
    pub w: Vec<Q>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_x(mut self, x: Vec<Q>) -> Self {
        self.x = x;
        self
    }
    pub fn with_y(mut self, y: Vec<Q>) -> Self {
        self.y = y;
        self
    }
    pub fn with_a(mut self, a: Vec<Q>) -> Self {
        self.a = a;
        self
    }
    pub fn with_w(mut self, w: Vec<Q>) -> Self {
        self.w = w;
        self
    }

    pub fn block(&self, b: Block) -> &[Q] {
        match b {
            Block::X => &self.x,
            Block::Y => &self.y,
            Block::A => &self.a,
            Block::W => &self.w,
        }
    }

    pub fn get(&self, v: Var) -> Option<&Q> {
        self.block(v.block).get(v.index)
    }
}
