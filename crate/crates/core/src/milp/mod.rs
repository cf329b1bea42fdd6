//! Mixed-integer linear programs: representation, an embedded branch-and-bound
//! solver, the STL robustness encoding and LP-format export.

mod bnb;
mod encode;
mod lp;
pub mod gadget;
mod problem;
mod simplex;

pub use bnb::solve;
pub use lp::{export_lp, parse_lp};
pub use encode::{
    encode_resolution, encode_robustness, encode_weak_robustness, lexicographic_weights, EncodingContext,
    ObjectiveForm, ResolutionEncoding, SignalVars, ThetaVars, TIE_BREAK_WEIGHT,
};
pub use problem::{Constraint, LinExpr, MilpProblem, Relation, Sense, VarId, VarKind, Variable};
pub use simplex::{solve_lp, LpData, LpResult, LpStatus};

use std::time::Duration;

use thiserror::Error;

use crate::stl::StlError;
use crate::weakstl::WeakError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MilpError {
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("unknown variable {0}")]
    UnknownVariable(String),
    #[error("encoding: {0}")]
    Encoding(String),
    #[error("search limit reached after {nodes} nodes without a feasible solution")]
    LimitWithoutIncumbent { nodes: usize },
    #[error("big-M {big_m} does not dominate robustness range {range}")]
    BigMTooSmall { big_m: f64, range: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("LP format line {line}: {message}")]
    LpFormat { line: usize, message: String },
    #[error(transparent)]
    Stl(#[from] StlError),
    #[error(transparent)]
    Weak(#[from] WeakError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
    Unbounded,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Sat => "SAT",
            Status::Unsat => "UNSAT",
            Status::Unbounded => "UNBOUNDED",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    pub nodes: Option<usize>,
    pub max_simplex_iterations: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { time: Some(Duration::from_secs(10)), nodes: Some(200_000), max_simplex_iterations: 100_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub nodes: usize,
    pub simplex_iterations: usize,
    pub wall_time: Duration,
    pub hit_limit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: Status,
    pub values: Option<Vec<f64>>,
    pub objective: Option<f64>,
    pub stats: SolveStats,
}

impl MilpSolution {
    pub fn value(&self, v: VarId) -> Option<f64> {
        self.values.as_ref().map(|x| x[v.0])
    }
}
