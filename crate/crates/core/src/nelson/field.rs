//! Velocity fields on two-particle configuration space.

use crate::error::NelsonError;

/// A configuration `q = (x1, x2)`.
pub type Config = [f64; 2];

/// Current, osmotic and the derived forward/backward drifts at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub v: [f64; 2],
    pub u: [f64; 2],
    pub b: [f64; 2],
    pub b_star: [f64; 2],
}

/// A velocity field `v(q)`, `u(q)` with diffusion coefficient `nu`.
///
/// The forward drift is `b = v + u` and the backward drift is `b* = v - u`.
pub trait VelocityField {
    fn nu(&self) -> f64;
    fn current(&self, q: Config) -> [f64; 2];
    fn osmotic(&self, q: Config) -> [f64; 2];

    fn forward_drift(&self, q: Config) -> [f64; 2] {
        let (v, u) = (self.current(q), self.osmotic(q));
        [v[0] + u[0], v[1] + u[1]]
    }

    fn backward_drift(&self, q: Config) -> [f64; 2] {
        let (v, u) = (self.current(q), self.osmotic(q));
        [v[0] - u[0], v[1] - u[1]]
    }

    fn sample(&self, q: Config) -> FieldSample {
        let (v, u) = (self.current(q), self.osmotic(q));
        FieldSample {
            v,
            u,
            b: [v[0] + u[0], v[1] + u[1]],
            b_star: [v[0] - u[0], v[1] - u[1]],
        }
    }
}

type Scalar2 = Box<dyn Fn(Config) -> f64 + Send + Sync>;

/// `psi = R exp(i S / hbar)` given by user-supplied amplitude and phase.
///
/// Gradients are taken by central differences with step `h`. The phase is
/// in units where `hbar = 2 m nu`, so `v = grad S / m`.
pub struct PolarWavefunction {
    amplitude: Scalar2,
    phase: Scalar2,
    nu: f64,
    mass: f64,
    h: f64,
}

impl PolarWavefunction {
    pub fn new(
        amplitude: impl Fn(Config) -> f64 + Send + Sync + 'static,
        phase: impl Fn(Config) -> f64 + Send + Sync + 'static,
        nu: f64,
        mass: f64,
    ) -> Result<Self, NelsonError> {
        positive("nu", nu)?;
        positive("mass", mass)?;
        Ok(PolarWavefunction {
            amplitude: Box::new(amplitude),
            phase: Box::new(phase),
            nu,
            mass,
            h: 1e-5,
        })
    }

    pub fn with_step(mut self, h: f64) -> Result<Self, NelsonError> {
        positive("h", h)?;
        self.h = h;
        Ok(self)
    }

    pub fn amplitude(&self, q: Config) -> f64 {
        (self.amplitude)(q)
    }

    pub fn phase(&self, q: Config) -> f64 {
        (self.phase)(q)
    }

    pub fn density(&self, q: Config) -> f64 {
        let r = self.amplitude(q);
        r * r
    }

    pub fn hbar(&self) -> f64 {
        2.0 * self.mass * self.nu
    }

    fn gradient(&self, f: impl Fn(Config) -> f64, q: Config) -> [f64; 2] {
        let h = self.h;
        [
            (f([q[0] + h, q[1]]) - f([q[0] - h, q[1]])) / (2.0 * h),
            (f([q[0], q[1] + h]) - f([q[0], q[1] - h])) / (2.0 * h),
        ]
    }

    /// Midpoint-rule integral of `R^2` over `[-half_width, half_width]^2`.
    pub fn norm_squared(&self, half_width: f64, cells: usize) -> f64 {
        let step = 2.0 * half_width / cells as f64;
        let mut total = 0.0;
        for i in 0..cells {
            let x1 = -half_width + (i as f64 + 0.5) * step;
            for j in 0..cells {
                let x2 = -half_width + (j as f64 + 0.5) * step;
                total += self.density([x1, x2]);
            }
        }
        total * step * step
    }
}

impl VelocityField for PolarWavefunction {
    fn nu(&self) -> f64 {
        self.nu
    }

    fn current(&self, q: Config) -> [f64; 2] {
        let g = self.gradient(|p| self.phase(p), q);
        [g[0] / self.mass, g[1] / self.mass]
    }

    fn osmotic(&self, q: Config) -> [f64; 2] {
        let g = self.gradient(|p| self.density(p).ln(), q);
        [self.nu * g[0], self.nu * g[1]]
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<(), NelsonError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(NelsonError::InvalidParameter { name, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn drift_identities_hold() {
        // A plane wave times a Gaussian: nonzero current and osmotic parts.
        let psi = PolarWavefunction::new(
            |q| (-(q[0] * q[0] + q[1] * q[1]) / 4.0).exp() / (2.0 * std::f64::consts::PI).sqrt(),
            |q| 0.3 * q[0] - 0.7 * q[1],
            0.5,
            1.0,
        )
        .unwrap();
        for q in [[0.0, 0.0], [1.0, -2.0], [0.3, 0.9]] {
            let s = psi.sample(q);
            for k in 0..2 {
                assert!((s.b[k] - s.b_star[k] - 2.0 * s.u[k]).abs() < 1e-12);
                assert!((s.b[k] + s.b_star[k] - 2.0 * s.v[k]).abs() < 1e-12);
            }
            assert!((s.v[0] - 0.3).abs() < 1e-6 && (s.v[1] + 0.7).abs() < 1e-6);
            // u = nu * grad ln rho = -nu * q for this density.
            assert!((s.u[0] + 0.5 * q[0]).abs() < 1e-6 && (s.u[1] + 0.5 * q[1]).abs() < 1e-6);
        }
        assert!((psi.norm_squared(10.0, 400) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PolarWavefunction::new(|_| 1.0, |_| 0.0, 0.0, 1.0).is_err());
        assert!(PolarWavefunction::new(|_| 1.0, |_| 0.0, 1.0, -1.0).is_err());
    }
}
