//! CHSH functionals on the bipartite two-setting scenario.

use serde::Serialize;

use crate::error::LpError;
use crate::numeric::{Number, Rational, Scalar};
use crate::scenario::{EmpiricalModel, MeasurementScenario, Tables};

/// The eight sign patterns with an odd number of minus signs, applied to
/// the correlators of `(A,B), (A,B'), (A',B), (A',B')`.
pub const CHSH_VARIANTS: [[i8; 4]; 8] = [
    [1, 1, 1, -1],
    [1, 1, -1, 1],
    [1, -1, 1, 1],
    [-1, 1, 1, 1],
    [-1, -1, -1, 1],
    [-1, -1, 1, -1],
    [-1, 1, -1, -1],
    [1, -1, -1, -1],
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChshValue {
    pub signs: [i8; 4],
    pub value: Number,
}

/// Where the four CHSH contexts live in a scenario.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChshLayout {
    /// Observable ids `[A, A', B, B']`.
    pub observables: [String; 4],
    /// Context indices of `(A,B), (A,B'), (A',B), (A',B')`.
    pub contexts: [usize; 4],
}

fn is_pm_one(scenario: &MeasurementScenario, oi: usize) -> bool {
    let obs = &scenario.observables()[oi];
    let one = Rational::from_ratio(1, 1);
    match &obs.values {
        Some(v) if v.len() == 2 => (v[0] == one && v[1] == -one.clone()) || (v[0] == -one.clone() && v[1] == one),
        _ => false,
    }
}

/// Recognizes the CHSH shape: four ±1-valued observables and four
/// two-member contexts forming the cycle `A-B-A'-B'`.
///
/// `A` and `B` are the members of the first context, in order.
pub fn chsh_layout(scenario: &MeasurementScenario) -> Result<ChshLayout, LpError> {
    let bad = |why: &str| Err(LpError::NotChsh(why.to_string()));
    if scenario.observables().len() != 4 || scenario.contexts().len() != 4 {
        return bad("need exactly 4 observables and 4 contexts");
    }
    if (0..4).any(|oi| !is_pm_one(scenario, oi)) {
        return bad("every observable must have outcome values +1 and -1");
    }
    if (0..4).any(|ci| scenario.context_members(ci).len() != 2) {
        return bad("every context must have two members");
    }
    let adjacent = |x: usize, y: usize| {
        (0..4).any(|ci| {
            let m = scenario.context_members(ci);
            (m[0] == x && m[1] == y) || (m[0] == y && m[1] == x)
        })
    };
    let a = scenario.context_members(0)[0];
    let b = scenario.context_members(0)[1];
    let others: Vec<usize> = (0..4).filter(|&o| o != a && o != b).collect();
    let (a2, b2) = match (adjacent(a, others[0]), adjacent(a, others[1])) {
        (false, true) => (others[0], others[1]),
        (true, false) => (others[1], others[0]),
        _ => return bad("contexts do not form a two-party cycle"),
    };
    if !adjacent(a2, b) || !adjacent(a2, b2) || adjacent(a, a2) || adjacent(b, b2) {
        return bad("contexts do not form a two-party cycle");
    }
    let find = |x: usize, y: usize| {
        (0..4)
            .find(|&ci| {
                let m = scenario.context_members(ci);
                (m[0] == x && m[1] == y) || (m[0] == y && m[1] == x)
            })
            .expect("adjacency checked")
    };
    let id = |oi: usize| scenario.observables()[oi].id.clone();
    Ok(ChshLayout {
        observables: [id(a), id(a2), id(b), id(b2)],
        contexts: [find(a, b), find(a, b2), find(a2, b), find(a2, b2)],
    })
}

fn correlator_of<T: Scalar>(scenario: &MeasurementScenario, ci: usize, table: &[T]) -> T {
    let members = scenario.context_members(ci);
    let value = |slot: usize, o: usize| -> T {
        let v = &scenario.observables()[members[slot]].values.as_ref().expect("checked by layout")[o];
        if *v > Rational::from_ratio(0, 1) {
            T::one()
        } else {
            -T::one()
        }
    };
    table.iter().enumerate().fold(T::zero(), |acc, (flat, p)| {
        let o = scenario.decode(ci, flat);
        acc + value(0, o[0]) * value(1, o[1]) * p.clone()
    })
}

/// Correlators `E_AB, E_AB', E_A'B, E_A'B'`.
pub fn correlators(model: &EmpiricalModel) -> Result<[Number; 4], LpError> {
    let layout = chsh_layout(model.scenario())?;
    let scenario = model.scenario();
    Ok(layout.contexts.map(|ci| match model.tables() {
        Tables::Exact(t) => Number::Exact(correlator_of(scenario, ci, &t[ci])),
        Tables::Float(t) => Number::Float(correlator_of(scenario, ci, &t[ci])),
    }))
}

fn signed_sum(e: &[Number; 4], signs: [i8; 4]) -> Number {
    if let [Number::Exact(_), ..] = e {
        let total = e.iter().zip(signs).fold(Rational::from_ratio(0, 1), |acc, (x, s)| {
            let x = x.as_exact().expect("uniform backing").clone();
            if s > 0 {
                acc + x
            } else {
                acc - x
            }
        });
        Number::Exact(total)
    } else {
        Number::Float(e.iter().zip(signs).map(|(x, s)| f64::from(s) * x.to_f64()).sum())
    }
}

/// `sum_i signs[i] * E_i` for the given sign pattern.
pub fn chsh_value(model: &EmpiricalModel, signs: [i8; 4]) -> Result<Number, LpError> {
    if signs.iter().any(|s| s.abs() != 1) {
        return Err(LpError::NotChsh(format!("signs must be ±1, got {signs:?}")));
    }
    Ok(signed_sum(&correlators(model)?, signs))
}

/// All eight odd-sign CHSH values in [`CHSH_VARIANTS`] order.
pub fn chsh_values(model: &EmpiricalModel) -> Result<Vec<ChshValue>, LpError> {
    let e = correlators(model)?;
    Ok(CHSH_VARIANTS
        .iter()
        .map(|&signs| ChshValue {
            signs,
            value: signed_sum(&e, signs),
        })
        .collect())
}

pub fn chsh_max(model: &EmpiricalModel) -> Result<ChshValue, LpError> {
    let values = chsh_values(model)?;
    Ok(max_variant(&values).clone())
}

pub(crate) fn max_variant(values: &[ChshValue]) -> &ChshValue {
    let mut best = &values[0];
    for v in &values[1..] {
        let larger = match (&v.value, &best.value) {
            (Number::Exact(x), Number::Exact(y)) => x > y,
            (x, y) => x.to_f64() > y.to_f64(),
        };
        if larger {
            best = v;
        }
    }
    best
}
