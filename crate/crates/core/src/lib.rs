//! Simulation and estimation toolkit for credit scoring on dynamic homophily
//! networks.
//!
//! True creditworthiness evolves by a scalar linear model ([`model`]), clients
//! form directed links biased toward similar scores ([`network`]), and two
//! closed-form Gaussian estimators consume those links: a risk-prediction
//! filter driven by noisy individual observations ([`filter`]) and a
//! publish/correct interaction loop ([`interaction`]). [`metrics`] and
//! [`experiments`] turn replicated runs into bias/variance/MSE tables and
//! Cramér-Rao comparisons.
//!
//! Replications run on rayon when the `parallel` feature is enabled (the
//! default); [`exec::ExecMode::Sequential`] is always available and produces
//! identical numbers.

pub mod error;
pub mod exec;
pub mod experiments;
pub mod filter;
pub mod interaction;
pub mod metrics;
pub mod model;
pub mod network;
pub mod params;
pub mod rng;
pub mod trajectory;

pub use error::{Error, Result};
pub use model::{ClientTruth, GaussianBelief};
pub use params::{AttributeInputs, ModelParams, Schedule};
pub use trajectory::{ClientStep, Scenario, Trajectory};
