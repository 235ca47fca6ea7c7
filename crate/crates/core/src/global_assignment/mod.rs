//! Global value assignments and the joint-distribution feasibility question.
//!
//! A global assignment fixes one outcome for every observable. An empirical
//! model admits a global joint distribution exactly when it is a convex
//! combination of the point-mass models of global assignments. The
//! noncontextual fraction is the largest total weight of such a combination
//! that still fits under the model; the rest is the contextual fraction.

mod chsh;
pub mod simplex;

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

pub use chsh::{chsh_layout, chsh_max, chsh_value, chsh_values, correlators, ChshLayout, ChshValue, CHSH_VARIANTS};

use crate::error::{LpError, ScenarioError};
use crate::numeric::{Number, Rational, Scalar, FLOAT_VERDICT_TOL};
use crate::scenario::{validate_model, EmpiricalModel, MeasurementScenario, Tables, DEFAULT_NORM_TOL};

/// One outcome index per observable, in scenario order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GlobalAssignment {
    outcomes: Vec<usize>,
}

impl GlobalAssignment {
    pub fn new(scenario: &MeasurementScenario, outcomes: Vec<usize>) -> Result<Self, ScenarioError> {
        let obs = scenario.observables();
        if outcomes.len() != obs.len() {
            return Err(ScenarioError::TableShape {
                context: "global assignment".into(),
                expected: obs.len(),
                got: outcomes.len(),
            });
        }
        for (o, k) in obs.iter().zip(&outcomes) {
            if *k >= o.outcomes.len() {
                return Err(ScenarioError::UnknownOutcome {
                    id: o.id.clone(),
                    outcome: format!("#{k}"),
                });
            }
        }
        Ok(GlobalAssignment { outcomes })
    }

    /// Builds an assignment from `id -> outcome label` pairs; must be total.
    pub fn from_labels(scenario: &MeasurementScenario, labels: &[(&str, &str)]) -> Result<Self, ScenarioError> {
        let mut outcomes = vec![None; scenario.observables().len()];
        for (id, label) in labels {
            let oi = scenario
                .observable_index(id)
                .ok_or_else(|| ScenarioError::UnknownObservable(id.to_string()))?;
            let obs = &scenario.observables()[oi];
            outcomes[oi] = Some(obs.outcome_index(label).ok_or_else(|| ScenarioError::UnknownOutcome {
                id: id.to_string(),
                outcome: label.to_string(),
            })?);
        }
        let outcomes = outcomes
            .into_iter()
            .enumerate()
            .map(|(oi, o)| o.ok_or_else(|| ScenarioError::UnknownObservable(scenario.observables()[oi].id.clone())))
            .collect::<Result<_, _>>()?;
        Ok(GlobalAssignment { outcomes })
    }

    pub fn outcomes(&self) -> &[usize] {
        &self.outcomes
    }

    pub fn label_of<'s>(&self, scenario: &'s MeasurementScenario, id: &str) -> Option<&'s str> {
        let oi = scenario.observable_index(id)?;
        Some(scenario.observables()[oi].outcomes[self.outcomes[oi]].as_str())
    }

    pub fn to_map(&self, scenario: &MeasurementScenario) -> BTreeMap<String, String> {
        scenario
            .observables()
            .iter()
            .zip(&self.outcomes)
            .map(|(o, &k)| (o.id.clone(), o.outcomes[k].clone()))
            .collect()
    }

    /// Flat table position this assignment selects in context `ci`.
    pub fn restrict(&self, scenario: &MeasurementScenario, ci: usize) -> usize {
        let local: Vec<usize> = scenario
            .context_members(ci)
            .iter()
            .map(|&oi| self.outcomes[oi])
            .collect();
        scenario.encode(ci, &local)
    }
}

/// Iterator over all global assignments in lexicographic order.
pub struct Assignments {
    sizes: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl Iterator for Assignments {
    type Item = GlobalAssignment;

    fn next(&mut self) -> Option<GlobalAssignment> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut carried = true;
        for (slot, size) in succ.iter_mut().zip(&self.sizes).rev() {
            *slot += 1;
            if *slot < *size {
                carried = false;
                break;
            }
            *slot = 0;
        }
        if !carried {
            self.next = Some(succ);
        }
        Some(GlobalAssignment { outcomes: current })
    }
}

/// Every total assignment exactly once; the first observable varies slowest.
pub fn enumerate_assignments(scenario: &MeasurementScenario) -> Result<Assignments, ScenarioError> {
    scenario.check_cap()?;
    let sizes: Vec<usize> = scenario.observables().iter().map(|o| o.outcomes.len()).collect();
    Ok(Assignments {
        next: Some(vec![0; sizes.len()]),
        sizes,
    })
}

/// The deterministic model in which every context sees `g` restricted to it.
pub fn assignment_model(g: &GlobalAssignment, scenario: &MeasurementScenario) -> EmpiricalModel {
    let picks: Vec<usize> = (0..scenario.contexts().len()).map(|ci| g.restrict(scenario, ci)).collect();
    let tables = (0..scenario.contexts().len())
        .map(|ci| {
            (0..scenario.table_len(ci))
                .map(|flat| if flat == picks[ci] { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect();
    EmpiricalModel::new(scenario.clone(), tables).expect("tables sized from the scenario")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedAssignment {
    pub assignment: BTreeMap<String, String>,
    pub weight: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualEntry {
    pub context: String,
    pub outcome: String,
    pub weight: Number,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    /// Weights over global assignments whose mixture reproduces the model.
    GlobalJoint { weights: Vec<WeightedAssignment> },
    /// Evidence that no global joint distribution exists.
    ///
    /// `dual_witness` is a nonnegative weighting of table entries that gives
    /// every global assignment total weight at least 1 while the model's
    /// weighted sum is the noncontextual fraction, which is below 1.
    Contextual {
        violated_chsh: Option<ChshValue>,
        dual_witness: Vec<DualEntry>,
        noncontextual_part: Vec<WeightedAssignment>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContextualityReport {
    pub feasible: bool,
    pub noncontextual_fraction: Number,
    pub contextual_fraction: Number,
    pub chsh_values: Option<Vec<ChshValue>>,
    pub certificate: Certificate,
}

impl ContextualityReport {
    pub fn chsh_max(&self) -> Option<&ChshValue> {
        self.chsh_values.as_deref().map(chsh::max_variant)
    }
}

/// Constraint rows: one per (context, joint outcome), in context order.
struct Incidence {
    assignments: Vec<GlobalAssignment>,
    /// For every assignment, the row index it hits in each context.
    hits: Vec<Vec<usize>>,
    row_offsets: Vec<usize>,
    rows: usize,
}

impl Incidence {
    fn build(scenario: &MeasurementScenario) -> Result<Self, ScenarioError> {
        let assignments: Vec<GlobalAssignment> = enumerate_assignments(scenario)?.collect();
        let mut row_offsets = Vec::with_capacity(scenario.contexts().len());
        let mut rows = 0;
        for ci in 0..scenario.contexts().len() {
            row_offsets.push(rows);
            rows += scenario.table_len(ci);
        }
        let hits = assignments
            .iter()
            .map(|g| {
                (0..scenario.contexts().len())
                    .map(|ci| row_offsets[ci] + g.restrict(scenario, ci))
                    .collect()
            })
            .collect();
        Ok(Incidence {
            assignments,
            hits,
            row_offsets,
            rows,
        })
    }

    fn matrix<T: Scalar>(&self) -> Vec<Vec<T>> {
        let mut a = vec![vec![T::zero(); self.assignments.len()]; self.rows];
        for (g, rows) in self.hits.iter().enumerate() {
            for &r in rows {
                a[r][g] = T::one();
            }
        }
        a
    }

    fn row_label(&self, scenario: &MeasurementScenario, row: usize) -> (String, String) {
        let ci = self.row_offsets.partition_point(|&off| off <= row) - 1;
        let flat = row - self.row_offsets[ci];
        (scenario.context_label(ci), scenario.tuple_labels(ci, flat).join("|"))
    }

    fn weighted<T: Scalar>(&self, scenario: &MeasurementScenario, x: &[T]) -> Vec<WeightedAssignment> {
        x.iter()
            .zip(&self.assignments)
            .filter(|(w, _)| w.is_positive_tol())
            .map(|(w, g)| WeightedAssignment {
                assignment: g.to_map(scenario),
                weight: w.clone().into_number(),
            })
            .collect()
    }
}

fn ensure_valid(model: &EmpiricalModel) -> Result<(), LpError> {
    let violations = validate_model(model, DEFAULT_NORM_TOL);
    if let Some(v) = violations.first() {
        return Err(LpError::InvalidModel(v.to_string()));
    }
    Ok(())
}

fn flat_rhs<T: Scalar>(tables: &[Vec<T>]) -> Vec<T> {
    tables.iter().flatten().cloned().collect()
}

fn solve_fraction<T: Scalar>(
    inc: &Incidence,
    tables: &[Vec<T>],
) -> Result<(bool, T, Vec<T>, Vec<T>), LpError> {
    let a = inc.matrix::<T>();
    let b: Vec<T> = flat_rhs(tables).into_iter().map(|p| if p.is_negative_tol() { T::zero() } else { p }).collect();
    let c = vec![T::one(); inc.assignments.len()];
    let sol = simplex::maximize_le(&a, &b, &c)?;
    let gap = T::one() - sol.value.clone();
    let feasible = if T::EXACT {
        gap.is_zero()
    } else {
        gap.to_f64().abs() <= FLOAT_VERDICT_TOL
    };
    Ok((feasible, sol.value, sol.x, sol.dual))
}

fn report_from<T: Scalar>(
    model: &EmpiricalModel,
    inc: &Incidence,
    tables: &[Vec<T>],
) -> Result<ContextualityReport, LpError> {
    let scenario = model.scenario();
    let (feasible, value, x, dual) = solve_fraction(inc, tables)?;
    let chsh_values = chsh_values(model).ok();
    let (ncf, cf) = match value.clone().into_number() {
        Number::Exact(v) => (Number::Exact(v.clone()), Number::Exact(Rational::one() - v)),
        Number::Float(v) => {
            // Float optima within the verdict tolerance of 1 are reported as 1.
            let v = if feasible { 1.0 } else { v.clamp(0.0, 1.0) };
            (Number::Float(v), Number::Float(1.0 - v))
        }
    };
    let certificate = if feasible {
        Certificate::GlobalJoint {
            weights: inc.weighted(scenario, &x),
        }
    } else {
        let violated_chsh = chsh_values.as_deref().map(chsh::max_variant).and_then(|v| {
            let over = match &v.value {
                Number::Exact(q) => *q > Rational::from_ratio(2, 1),
                Number::Float(f) => *f > 2.0 + FLOAT_VERDICT_TOL,
            };
            over.then(|| v.clone())
        });
        let dual_witness = dual
            .iter()
            .enumerate()
            .filter(|(_, y)| y.is_positive_tol())
            .map(|(row, y)| {
                let (context, outcome) = inc.row_label(scenario, row);
                DualEntry {
                    context,
                    outcome,
                    weight: y.clone().into_number(),
                }
            })
            .collect();
        Certificate::Contextual {
            violated_chsh,
            dual_witness,
            noncontextual_part: inc.weighted(scenario, &x),
        }
    };
    Ok(ContextualityReport {
        feasible,
        noncontextual_fraction: ncf,
        contextual_fraction: cf,
        chsh_values,
        certificate,
    })
}

/// Solves the noncontextual-fraction LP and assembles the full report.
///
/// Exact tables use the exact simplex; float tables use the float simplex
/// and a verdict tolerance of `1e-9`.
pub fn noncontextual_fraction(model: &EmpiricalModel) -> Result<ContextualityReport, LpError> {
    ensure_valid(model)?;
    let inc = Incidence::build(model.scenario())?;
    match model.tables() {
        Tables::Exact(t) => report_from(model, &inc, t),
        Tables::Float(t) => report_from(model, &inc, t),
    }
}

/// Weights over global assignments reproducing the model exactly, if any.
///
/// Solves the equality-constrained feasibility LP, independently of the
/// fraction LP.
pub fn global_joint(model: &EmpiricalModel) -> Result<Option<Vec<(GlobalAssignment, Number)>>, LpError> {
    ensure_valid(model)?;
    let inc = Incidence::build(model.scenario())?;
    fn solve<T: Scalar>(inc: &Incidence, tables: &[Vec<T>]) -> Result<Option<Vec<(GlobalAssignment, Number)>>, LpError> {
        let x = simplex::feasible_eq(&inc.matrix::<T>(), &flat_rhs(tables))?;
        Ok(x.map(|x| {
            inc.assignments
                .iter()
                .cloned()
                .zip(x)
                .filter(|(_, w)| w.is_positive_tol())
                .map(|(g, w)| (g, w.into_number()))
                .collect()
        }))
    }
    match model.tables() {
        Tables::Exact(t) => solve(&inc, t),
        Tables::Float(t) => solve(&inc, t),
    }
}

/// Whether some probability distribution over global assignments has the
/// model's tables as its context marginals.
pub fn has_global_joint(model: &EmpiricalModel) -> Result<bool, LpError> {
    Ok(global_joint(model)?.is_some())
}
