//! Certification and optimization of achievable active/reactive power
//! setpoints for a grid-connected voltage-source inverter whose output
//! voltage magnitude is bounded by a band that moves with the grid voltage.
//!
//! The crate is organized bottom-up:
//!
//! * [`model`] holds the α–β frame plant, the synthetic control coordinates,
//!   grid-voltage profiles and a fixed-step RK4 integrator.
//! * [`controller`] is the static state-feedback law with feedforward
//!   disturbance cancellation.
//! * [`certificate`] decides achievability through the S-lemma, as two
//!   one-parameter LMI feasibility searches.
//! * [`oracle`] provides brute-force checkers (steady-state sweep and
//!   trajectory simulation) used to validate certificates.
//! * [`montecarlo`] estimates achievability rates, tunes the gain and maps
//!   achievable regions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod controller;
mod error;
pub mod model;
pub mod montecarlo;
pub mod oracle;
pub mod rng;

pub use error::{Error, Result};

pub use certificate::{
    build_qa, build_qb, check_setpoint, lmi_matrix, min_eigenvalue, s_lemma_feasible,
    CertificateVerdict, QuadraticForm, SearchOptions, SearchOutcome,
};
pub use controller::{
    error_response, feedback_control, feedforward, is_stabilizing, Gain, Setpoint, Stability,
};
pub use model::{
    dynamics, from_alpha_beta, plant_matrices, step_rk4, to_alpha_beta, ControlAB, ControlPQ,
    Disturbance, GridProfile, PlantMatrices, PlantParams, PowerState,
};
pub use montecarlo::{
    achievability_rate, map_region, optimize_gain, sample_setpoints, Checker, GridSpec,
    OptimizeOutcome, RateReport, RegionMap, SamplingConfig, SweepEntry,
};
pub use oracle::{
    implication_counterexample, steady_state_achievable, trajectory_achievable, ConstraintTrace,
    SteadyStateVerdict, TrajectoryOptions, TrajectoryVerdict,
};
