//! Two-qubit statevectors and Born-rule CHSH models.
//!
//! Measurements are spin observables in the x–z plane of the Bloch sphere,
//! `cos(θ) Z + sin(θ) X`, so a setting is a single angle.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::QuantumError;
use crate::scenario::{EmpiricalModel, MeasurementScenario};

pub const NORM_TOL: f64 = 1e-12;

/// Amplitudes in basis order `|00>, |01>, |10>, |11>`; the first qubit
/// belongs to party 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TwoQubitState {
    amplitudes: [Complex64; 4],
}

impl TwoQubitState {
    pub fn new(amplitudes: [Complex64; 4]) -> Result<Self, QuantumError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(QuantumError::Unnormalized(norm));
        }
        Ok(TwoQubitState { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: [Complex64; 4]) -> Result<Self, QuantumError> {
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(QuantumError::Unnormalized(norm * norm));
        }
        TwoQubitState::new(amplitudes.map(|a| a / norm))
    }

    /// `(|01> - |10>) / sqrt(2)`.
    pub fn singlet() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TwoQubitState {
            amplitudes: [Complex64::ZERO, Complex64::new(h, 0.0), Complex64::new(-h, 0.0), Complex64::ZERO],
        }
    }

    /// `(|00> + |11>) / sqrt(2)`.
    pub fn phi_plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        TwoQubitState {
            amplitudes: [Complex64::new(h, 0.0), Complex64::ZERO, Complex64::ZERO, Complex64::new(h, 0.0)],
        }
    }

    /// `|00>`.
    pub fn product_zero() -> Self {
        TwoQubitState {
            amplitudes: [Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::ZERO],
        }
    }

    /// A Haar-random pure state (normalized complex Gaussian vector).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let amps = std::array::from_fn(|_| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            if let Ok(s) = TwoQubitState::normalized(amps) {
                return s;
            }
        }
    }

    pub fn amplitudes(&self) -> &[Complex64; 4] {
        &self.amplitudes
    }
}

/// A spin measurement along `cos(angle) Z + sin(angle) X` on qubit `party`
/// (1 or 2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinSetting {
    pub angle: f64,
    pub party: u8,
}

impl SpinSetting {
    pub fn new(angle: f64, party: u8) -> Result<Self, QuantumError> {
        check_angle(angle)?;
        if !(party == 1 || party == 2) {
            return Err(QuantumError::BadParty(party));
        }
        Ok(SpinSetting { angle, party })
    }
}

/// Eigenvector of `cos(θ) Z + sin(θ) X` for eigenvalue `+1` (index 0) or `-1`.
fn eigenvector(angle: f64, outcome: usize) -> [f64; 2] {
    let (s, c) = (angle / 2.0).sin_cos();
    if outcome == 0 {
        [c, s]
    } else {
        [-s, c]
    }
}

fn check_angle(angle: f64) -> Result<(), QuantumError> {
    if angle.is_finite() {
        Ok(())
    } else {
        Err(QuantumError::NonFiniteAngle(angle))
    }
}

/// Joint outcome probabilities `p[a][b]`, index 0 = `+1`, 1 = `-1`.
pub fn joint_probabilities(state: &TwoQubitState, a: f64, b: f64) -> Result<[[f64; 2]; 2], QuantumError> {
    check_angle(a)?;
    check_angle(b)?;
    let mut p = [[0.0; 2]; 2];
    for (oa, row) in p.iter_mut().enumerate() {
        let ea = eigenvector(a, oa);
        for (ob, cell) in row.iter_mut().enumerate() {
            let eb = eigenvector(b, ob);
            // <ea ⊗ eb | psi> with real eigenvectors.
            let amp: Complex64 = (0..4)
                .map(|k| state.amplitudes[k] * (ea[k >> 1] * eb[k & 1]))
                .sum();
            *cell = amp.norm_sqr();
        }
    }
    Ok(p)
}

/// Joint probabilities for one setting per party, indexed `[party 1][party 2]`
/// whichever order the settings come in.
pub fn setting_probabilities(
    state: &TwoQubitState,
    first: SpinSetting,
    second: SpinSetting,
) -> Result<[[f64; 2]; 2], QuantumError> {
    match (first.party, second.party) {
        (1, 2) => joint_probabilities(state, first.angle, second.angle),
        (2, 1) => joint_probabilities(state, second.angle, first.angle),
        (p, _) if p != 1 && p != 2 => Err(QuantumError::BadParty(p)),
        (_, p) if p != 1 && p != 2 => Err(QuantumError::BadParty(p)),
        _ => Err(QuantumError::SameParty(first.party)),
    }
}

/// `E(a, b) = sum over outcomes of a·b·p(a, b)`.
pub fn correlator(state: &TwoQubitState, a: f64, b: f64) -> Result<f64, QuantumError> {
    let p = joint_probabilities(state, a, b)?;
    Ok(p[0][0] + p[1][1] - p[0][1] - p[1][0])
}

/// CHSH model from settings `(a, a', b, b')` on the standard CHSH scenario.
pub fn born_model(state: &TwoQubitState, settings: [f64; 4]) -> Result<EmpiricalModel, QuantumError> {
    let [a, a2, b, b2] = settings;
    let pairs = [(a, b), (a, b2), (a2, b), (a2, b2)];
    let mut tables = Vec::with_capacity(4);
    for (x, y) in pairs {
        let p = joint_probabilities(state, x, y)?;
        tables.push(vec![p[0][0], p[0][1], p[1][0], p[1][1]]);
    }
    Ok(EmpiricalModel::new(MeasurementScenario::chsh(), tables).expect("CHSH tables are 2x2"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn settings_name_their_party() {
        let s = TwoQubitState::product_zero();
        let a = SpinSetting::new(0.0, 1).unwrap();
        let b = SpinSetting::new(FRAC_PI_2, 2).unwrap();
        assert_eq!(setting_probabilities(&s, a, b).unwrap(), setting_probabilities(&s, b, a).unwrap());
        assert_eq!(setting_probabilities(&s, a, a), Err(QuantumError::SameParty(1)));
        assert_eq!(SpinSetting::new(0.0, 3), Err(QuantumError::BadParty(3)));
        assert!(SpinSetting::new(f64::NAN, 1).is_err());
    }

    #[test]
    fn singlet_equal_angles_anticorrelated() {
        let p = joint_probabilities(&TwoQubitState::singlet(), 0.3, 0.3).unwrap();
        assert!(p[0][0].abs() < 1e-15 && p[1][1].abs() < 1e-15);
        assert!((p[0][1] - 0.5).abs() < 1e-15 && (p[1][0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn singlet_correlator_examples() {
        let s = TwoQubitState::singlet();
        assert!((correlator(&s, 1.0, 1.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(correlator(&s, 0.2, 0.2 + FRAC_PI_2).unwrap().abs() < 1e-12);
        assert!((correlator(&s, 0.0, FRAC_PI_4).unwrap() + 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let amps = [Complex64::ONE, Complex64::ONE, Complex64::ZERO, Complex64::ZERO];
        assert!(matches!(TwoQubitState::new(amps), Err(QuantumError::Unnormalized(n)) if (n - 2.0).abs() < 1e-12));
        assert!(TwoQubitState::normalized([Complex64::ZERO; 4]).is_err());
    }

    #[test]
    fn non_finite_angle_rejected() {
        assert!(matches!(
            correlator(&TwoQubitState::singlet(), f64::NAN, 0.0),
            Err(QuantumError::NonFiniteAngle(_))
        ));
    }

    #[test]
    fn product_state_factorizes() {
        let s = TwoQubitState::product_zero();
        for (a, b) in [(0.0, 0.0), (0.4, 1.3), (2.0, -0.7)] {
            let e = correlator(&s, a, b).unwrap();
            assert!((e - f64::cos(a) * f64::cos(b)).abs() < 1e-12);
        }
    }
}
