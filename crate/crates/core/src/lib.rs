//! Four-compartment HPA axis model with distributed delays.
//!
//! The crate covers the whole analysis pipeline for the model:
//!
//! * [`model`]: parameters, calibration from target means, feedbacks and the
//!   right-hand side of the delayed system;
//! * [`equilibria`]: all steady states via a scalar reduction scanned for sign
//!   changes;
//! * [`spectral`]: stability inequalities, Routh–Hurwitz, the transfer
//!   function `Q(iω)` and the Hopf critical delays for Dirac and Gamma kernels;
//! * [`sim`]: time integration (method of steps for discrete delays, linear
//!   chain trick for Gamma kernels) with invariant monitoring;
//! * [`cycle`]: classification of trajectories into stable points and limit
//!   cycles, and [`sweep`] for one-parameter bifurcation diagrams.

pub mod cycle;
pub mod equilibria;
pub mod feedback;
pub mod kernel;
pub mod model;
mod roots;
pub mod scenario;
pub mod sim;
pub mod spectral;
pub mod sweep;
pub mod tolerances;

pub use cycle::{detect_cycle, CycleClass, CycleReport};
pub use equilibria::{find_equilibria, Equilibrium, EquilibriumSet};
pub use feedback::{Feedback, Hill, Monotonicity};
pub use kernel::{KernelFamily, KernelSpec, PathwayKernels};
pub use model::{
    calibrate, CalibrationTargets, DelayedInputs, DerivedConstants, Model, ModelParams, State,
};
pub use scenario::{InitialHistory, ScenarioConfig};
pub use sim::{integrate, integrate_dirac, integrate_gamma, Trajectory};
pub use spectral::{HopfResult, StabilityReport};
pub use tolerances::Tolerances;

use thiserror::Error;

/// Errors raised by parameter handling and feedback evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{what}: {value} is outside the domain ({bound})")]
    Domain {
        what: &'static str,
        value: f64,
        bound: String,
    },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("calibration failed: {0}")]
    Calibration(String),
}
