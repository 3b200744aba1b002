//! Simulation, analysis and channel models for partner-antenna with-movements.
//!
//! A mobile antenna A moves along a straight trajectory T while it talks to a
//! partner antenna B. If B follows the same trajectory at the same time, the
//! A–B geometry never changes and the channel coefficient stays constant,
//! `H(n) = H(n0)`. This crate provides the pieces needed to reproduce that
//! experiment in software:
//!
//! * [`scenario`]: geometry, carrier and environment description plus validation
//! * [`propagation`]: line-of-sight and single-bounce channel coefficients
//! * [`motion`]: per-step antenna placement for each movement strategy
//! * [`campaign`]: the move / dwell / measure loop producing [`Trace`]s
//! * [`analysis`]: phase wrapping, dB conversion and summary statistics
//! * [`model`]: static and interval-stationary channel models and their fitting
//! * [`config`]: the key-value scenario file format
//!
//! Phase convention: a path of length `d` contributes `exp(-i 2π d / λ)`, so
//! phase decreases as paths get longer. Wrapped phases live in `(-π, π]`.

pub mod analysis;
pub mod campaign;
pub mod config;
pub mod error;
pub mod geometry;
pub mod model;
pub mod motion;
pub mod propagation;
pub mod scenario;
pub mod trace;

pub use num_complex::Complex64;

pub use analysis::{ChannelStats, PhaseConvention, SummaryTable};
pub use campaign::CampaignResult;
pub use error::{Error, Result};
pub use geometry::Vec3;
pub use model::{ResidualModel, StaticChannelModel};
pub use motion::{StepPlan, Strategy};
pub use scenario::{
    validate_scenario, wavelength_of, Antenna, Carrier, EnvironmentObject, MotionAssignment,
    NoiseConfig, ObjectKind, Scenario, Trajectory, Violation,
};
pub use trace::{ChannelSample, Trace};
