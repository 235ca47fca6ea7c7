//! Contextuality checks for measurement scenarios and a stochastic-mechanics
//! simulator for an entangled Gaussian pair.
//!
//! * [`scenario`]: observables, contexts and per-context probability tables.
//! * [`global_assignment`]: does a single joint distribution over all
//!   observables reproduce every context table? Exact simplex, contextual
//!   fraction and CHSH values.
//! * [`models`]: PR boxes, noise and random no-signalling models.
//! * [`quantum`]: two-qubit Born-rule models used as a test oracle.
//! * [`nelson`]: velocity fields, forward diffusion and conditioning for the
//!   Gaussian two-particle state.
//! * [`stats`]: moment estimators, histograms and a two-sample KS test.
//! * [`format`]: the JSON model file format.

pub mod error;
pub mod format;
pub mod global_assignment;
pub mod models;
pub mod nelson;
pub mod numeric;
pub mod quantum;
pub mod scenario;
pub mod stats;

pub use error::{FormatError, LpError, NelsonError, QuantumError, ScenarioError, StatsError};
pub use numeric::{Number, Rational};
