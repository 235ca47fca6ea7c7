//! Standard CHSH models: PR boxes, white noise, their mixtures, and a seeded
//! generator of random no-signalling models.

use num_traits::Zero;
use rand::Rng;

use crate::global_assignment::{assignment_model, enumerate_assignments, CHSH_VARIANTS};
use crate::numeric::{Number, Rational, Scalar};
use crate::scenario::{EmpiricalModel, MeasurementScenario};

/// The PR box aligned with a CHSH sign pattern: context `i` is perfectly
/// correlated when `signs[i] = +1` and perfectly anti-correlated otherwise.
/// `[1, 1, 1, -1]` is the standard box.
pub fn pr_box_with(signs: [i8; 4]) -> EmpiricalModel {
    let half = Rational::from_ratio(1, 2);
    EmpiricalModel::from_fn(MeasurementScenario::chsh(), |ci, o| {
        if (o[0] == o[1]) == (signs[ci] > 0) {
            half.clone()
        } else {
            Rational::zero()
        }
    })
}

pub fn pr_box() -> EmpiricalModel {
    pr_box_with([1, 1, 1, -1])
}

/// Every table uniform.
pub fn uniform(scenario: &MeasurementScenario) -> EmpiricalModel {
    let scenario = scenario.clone();
    let lens: Vec<i64> = (0..scenario.contexts().len()).map(|ci| scenario.table_len(ci) as i64).collect();
    EmpiricalModel::from_fn(scenario, |ci, _| Rational::from_ratio(1, lens[ci]))
}

/// `weight * PR + (1 - weight) * uniform`.
pub fn noisy_pr_box(weight: Rational) -> EmpiricalModel {
    pr_box()
        .mix(&uniform(&MeasurementScenario::chsh()), &Number::Exact(weight))
        .expect("same scenario and backing")
}

/// Convex combination of assignment models with the given weights, which
/// must sum to one. Weights follow [`enumerate_assignments`] order.
pub fn deterministic_mixture(scenario: &MeasurementScenario, weights: &[Rational]) -> EmpiricalModel {
    let mut tables: Vec<Vec<Rational>> = (0..scenario.contexts().len())
        .map(|ci| vec![Rational::zero(); scenario.table_len(ci)])
        .collect();
    let assignments = enumerate_assignments(scenario).expect("caller respects the cap");
    for (g, w) in assignments.zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (ci, row) in tables.iter_mut().enumerate() {
            let flat = g.restrict(scenario, ci);
            row[flat] = row[flat].clone() + w.clone();
        }
    }
    EmpiricalModel::new(scenario.clone(), tables).expect("tables sized from the scenario")
}

/// A random exact no-signalling CHSH model: a random point of the
/// deterministic polytope mixed with a random PR-type vertex.
///
/// Weights have small denominators so both sides of the CHSH bound, and the
/// bound itself, are hit regularly.
pub fn random_no_signalling<R: Rng + ?Sized>(rng: &mut R) -> EmpiricalModel {
    let scenario = MeasurementScenario::chsh();
    let counts: Vec<i64> = loop {
        let c: Vec<i64> = (0..16)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(0..=6) } else { 0 })
            .collect();
        if c.iter().any(|&k| k > 0) {
            break c;
        }
    };
    let total: i64 = counts.iter().sum();
    let weights: Vec<Rational> = counts.iter().map(|&k| Rational::from_ratio(k, total)).collect();
    let local = deterministic_mixture(&scenario, &weights);
    let vertex = pr_box_with(CHSH_VARIANTS[rng.random_range(0..8)]);
    let denom = [2, 3, 4, 6, 8, 12][rng.random_range(0..6)];
    let lambda = Rational::from_ratio(rng.random_range(0..=denom), denom);
    vertex
        .mix(&local, &Number::Exact(lambda))
        .expect("same scenario and backing")
}

/// All assignment models of a scenario, in enumeration order.
pub fn all_deterministic(scenario: &MeasurementScenario) -> Vec<EmpiricalModel> {
    enumerate_assignments(scenario)
        .expect("caller respects the cap")
        .map(|g| assignment_model(&g, scenario))
        .collect()
}
