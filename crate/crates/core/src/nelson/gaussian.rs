//! The entangled two-particle Gaussian
//! `psi(x1, x2) = N exp(-(x1 - x2)^2 / 4 sigma^2 - (x1 + x2)^2 / 4 Sigma^2)`
//! with vanishing phase.
//!
//! In the relative and center-of-mass coordinates `u = x1 - x2`,
//! `s = x1 + x2` the density factorizes into independent normals with
//! variances `sigma^2` and `Sigma^2`; the Jacobian of `(x1, x2) -> (u, s)` is 2.

use std::f64::consts::PI;

use super::field::{positive, Config, VelocityField};
use crate::error::NelsonError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianTwoParticleState {
    sigma: f64,
    big_sigma: f64,
    nu: f64,
    norm: f64,
}

/// Conditional law of `x2` given `x1 = y`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct ConditionalLaw {
    pub y: f64,
    pub mean: f64,
    pub variance: f64,
}

impl ConditionalLaw {
    pub fn density(&self, x2: f64) -> f64 {
        let d = x2 - self.mean;
        (-d * d / (2.0 * self.variance)).exp() / (2.0 * PI * self.variance).sqrt()
    }

    /// Osmotic velocity `nu d/dx2 ln rho^(y)` of this one-dimensional law.
    pub fn osmotic_velocity(&self, nu: f64, x2: f64) -> f64 {
        nu * (self.mean - x2) / self.variance
    }
}

impl GaussianTwoParticleState {
    pub fn new(sigma: f64, big_sigma: f64, nu: f64) -> Result<Self, NelsonError> {
        positive("sigma", sigma)?;
        positive("Sigma", big_sigma)?;
        positive("nu", nu)?;
        Ok(GaussianTwoParticleState {
            sigma,
            big_sigma,
            nu,
            norm: (PI * sigma * big_sigma).powf(-0.5),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn big_sigma(&self) -> f64 {
        self.big_sigma
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Normalization constant `N` of the wavefunction.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn is_entangled(&self) -> bool {
        self.sigma != self.big_sigma
    }

    pub fn wavefunction(&self, x1: f64, x2: f64) -> f64 {
        let (u, s) = (x1 - x2, x1 + x2);
        self.norm * (-u * u / (4.0 * self.sigma.powi(2)) - s * s / (4.0 * self.big_sigma.powi(2))).exp()
    }

    pub fn ln_density(&self, x1: f64, x2: f64) -> f64 {
        let (u, s) = (x1 - x2, x1 + x2);
        2.0 * self.norm.ln() - u * u / (2.0 * self.sigma.powi(2)) - s * s / (2.0 * self.big_sigma.powi(2))
    }

    /// `rho = |psi|^2`, normalized on the plane.
    pub fn joint_density(&self, x1: f64, x2: f64) -> f64 {
        self.ln_density(x1, x2).exp()
    }

    /// `[u1, u2]` from the closed form.
    pub fn osmotic(&self, x1: f64, x2: f64) -> [f64; 2] {
        let rel = (x1 - x2) / self.sigma.powi(2);
        let com = (x1 + x2) / self.big_sigma.powi(2);
        [self.nu * (-rel - com), self.nu * (rel - com)]
    }

    pub fn velocity_field(&self) -> GaussianField {
        GaussianField { state: *self }
    }

    /// Var(x1) = Var(x2) = (sigma^2 + Sigma^2) / 4.
    pub fn marginal_variance(&self) -> f64 {
        (self.sigma.powi(2) + self.big_sigma.powi(2)) / 4.0
    }

    /// Cov(x1, x2) = (Sigma^2 - sigma^2) / 4.
    pub fn covariance(&self) -> f64 {
        (self.big_sigma.powi(2) - self.sigma.powi(2)) / 4.0
    }

    /// Law of `x2` after conditioning on `x1 = y`.
    pub fn condition_analytic(&self, y: f64) -> ConditionalLaw {
        let (s2, b2) = (self.sigma.powi(2), self.big_sigma.powi(2));
        ConditionalLaw {
            y,
            mean: y * (b2 - s2) / (s2 + b2),
            variance: s2 * b2 / (s2 + b2),
        }
    }

    /// Updated osmotic velocity of particle 2 once `x1 = y` is known.
    pub fn conditional_velocity(&self, y: f64, x2: f64) -> f64 {
        self.nu * ((y - x2) / self.sigma.powi(2) - (y + x2) / self.big_sigma.powi(2))
    }

    /// Mean and variance of the unconditioned `x2` marginal.
    pub fn marginal_x2(&self) -> (f64, f64) {
        (0.0, self.marginal_variance())
    }
}

/// The state's velocity field: zero current velocity, closed-form osmotic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianField {
    state: GaussianTwoParticleState,
}

impl VelocityField for GaussianField {
    fn nu(&self) -> f64 {
        self.state.nu
    }

    fn current(&self, _q: Config) -> [f64; 2] {
        [0.0, 0.0]
    }

    fn osmotic(&self, q: Config) -> [f64; 2] {
        self.state.osmotic(q[0], q[1])
    }
}
