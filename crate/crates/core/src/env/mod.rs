//! Affine discrete-time environment models and predictive signals.

pub mod drone;
mod lower;
mod model;
mod parse;

pub(crate) use lower::linearize;
pub use lower::{lower_into, lower_to_constraints, Lowered};
pub use model::{
    ActionConstraint, ActionKind, ActionSequence, ActionVar, Actions, Init, ModelBuilder, Output, OutputExpr,
    State, StateVar, StepOutcome, TransitionSystem, UpdateRule,
};
pub use parse::parse_model;

use thiserror::Error;

use crate::syntax::ParseError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("undeclared variable `{0}`")]
    Undeclared(String),
    #[error("`{0}` declared twice")]
    Duplicate(String),
    #[error("state `{0}` has no update rule")]
    MissingUpdate(String),
    #[error("state `{0}` has more than one update rule")]
    DuplicateUpdate(String),
    #[error("`{0}` needs finite bounds with lo <= hi")]
    InvalidBounds(String),
    #[error("initial value of `{0}` lies outside its bounds")]
    InitOutOfBounds(String),
    #[error("state `{0}` has no initial value")]
    MissingInit(String),
    #[error("no value given for `{0}`")]
    MissingValue(String),
    #[error("guard `{0}` is not a binary action")]
    GuardNotBinary(String),
    #[error("output `{0}` selects over an empty list")]
    EmptySelection(String),
    #[error("constraint `{0}` mentions no action")]
    StateOnlyConstraint(String),
    #[error("`{name}` = {value} outside [{lo}, {hi}]")]
    OutOfBounds { name: String, value: f64, lo: f64, hi: f64 },
    #[error("binary action `{name}` = {value}")]
    NotBinary { name: String, value: f64 },
    #[error("action constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("expected {expected} values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("prediction needs at least one action step")]
    EmptyActions,
    #[error("signal: {0}")]
    Signal(String),
}
