//! Constrained derivative-free optimization and sampling with reflected
//! interacting particle systems.
//!
//! The crate implements consensus-based optimization (standard and with a
//! Gaussian repelling force) and mean-field Langevin sampling, both confined
//! to a feasible region through penalty or projection discretizations of the
//! reflected dynamics, plus the replicated experiment harnesses that measure
//! success rates on benchmark problems and a jump-diffusion inverse problem.
//!
//! Modules:
//! - [`domain`]: feasible-region geometry (membership, projection, penalty
//!   vectors, normals, uniform sampling).
//! - [`objective`]: benchmark objectives and the objective wrapper.
//! - [`merton`]: closed-form jump-diffusion forward map, synthetic
//!   observations, and the inverse-problem loss.
//! - [`schedule`]: time-dependent coefficient schedules.
//! - [`dynamics`]: the particle-system integrators.
//! - [`experiment`]: replicated harnesses and validators.
//! - [`cli`]: the `rcbo` command-line front end.

pub mod cli;
pub mod config;
pub mod domain;
pub mod dynamics;
pub mod experiment;
pub mod merton;
pub mod objective;
pub mod report;
pub mod rng;
pub mod schedule;
pub(crate) mod vecmath;

pub use domain::{DomainError, FeasibleDomain, ProjectionSettings};
pub use dynamics::{
    consensus, repelling_force, run_cbo, run_cbo_with_trace, CboRun, DynamicsError, Ensemble,
    Interaction, LangevinConfig, Scheme, SolverConfig,
};
pub use experiment::{success_rate, ExperimentError, SuccessReport, TableId};
pub use merton::{merton_loss, merton_price, MertonError, MertonParams, ObservationSet};
pub use objective::Objective;
pub use schedule::Schedule;
