//! Stochastic mechanics of a two-particle system.
//!
//! A wavefunction in polar form `R exp(iS/hbar)` defines a current velocity
//! `v = grad S / m` and an osmotic velocity `u = nu grad ln rho` with
//! `rho = R^2`. Configurations diffuse forward with drift `b = v + u` and
//! noise `sqrt(2 nu) dW`. A position measurement on particle 1 is modelled as
//! conditioning the joint density on `x1 = y`, a Bayesian update with no
//! dynamical counterpart; the unconditioned marginal of particle 2 never
//! changes.

mod ensemble;
mod field;
mod gaussian;

pub use ensemble::{
    condition_ensemble, em_step, pool_conditioned_x2, sample_initial, simulate, Ensemble, MomentRow, Noise, SimulationParams,
};
pub use field::{Config, FieldSample, PolarWavefunction, VelocityField};
pub use gaussian::{ConditionalLaw, GaussianField, GaussianTwoParticleState};
