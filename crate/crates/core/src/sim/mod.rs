//! Deterministic drone simulation and the experiment harness.

mod experiment;
mod features;
mod run;
mod scenario;
mod world;

pub use experiment::{run_experiment, ExperimentOptions, ExperimentReport, ModeSummary, ResultRow};
pub use features::{
    builtin_features, idle_action, native_action, normalization, scenario_features, BOUNDARY, DELIVER, LAND, MOTION,
    RUNAWAY,
};
pub use run::{interaction_window, run_scenario, Decision, FeatureMetrics, RunMetrics, SolverMetrics, Trace};
pub use scenario::{
    generate_scenarios, CaseStudy, DeliverySetup, Mode, ScenarioConfig, Setup, SurveillanceSetup, DEFAULT_HORIZON,
    DEFAULT_STEP_CAP,
};
pub use world::{Ending, World};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario: {0}")]
    Config(String),
    #[error("the run has already ended")]
    Finished,
    #[error(transparent)]
    Env(#[from] crate::env::EnvError),
    #[error(transparent)]
    Resolve(#[from] crate::resolver::ResolveError),
    #[error(transparent)]
    Stl(#[from] crate::stl::StlError),
    #[error(transparent)]
    Weak(#[from] crate::weakstl::WeakError),
    #[error("i/o: {0}")]
    Io(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}
