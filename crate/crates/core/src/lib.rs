//! Runtime resolution of feature interactions by minimal requirement weakening.
//!
//! Requirements are STL formulas annotated with how far they may be weakened
//! ([`weakstl`]). When two features issue conflicting actions, the
//! [`resolver`] encodes "weaken both requirements as little as possible so that
//! some predicted future satisfies both" as a mixed-integer linear program over
//! an affine environment model ([`env`]), and solves it with the embedded
//! branch-and-bound solver in [`milp`]. The [`sim`] module provides a
//! deterministic drone world with the delivery, landing, boundary and runaway
//! features, and an experiment harness comparing weakening against fixed
//! priorities.

pub mod env;
pub mod milp;
pub mod resolver;
pub mod sim;
pub mod stl;
pub mod syntax;
pub mod weakstl;

pub use stl::{parse_stl, robustness, satisfied, AffineExpr, Formula, Interval, Signal};
pub use weakstl::{parse_weakstl, Polarity, Theta, WeakFormula};
