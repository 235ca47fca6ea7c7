//! Measurement scenarios and empirical (context-indexed) probability tables.
//!
//! A scenario lists observables with finite outcome alphabets and the
//! contexts, i.e. the subsets of observables measured together in one run.
//! An empirical model attaches one probability table to each context. Table
//! entries are stored densely in mixed-radix order over the context's member
//! list: the first member is the most significant digit and outcomes follow
//! their listed order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::error::ScenarioError;
use crate::numeric::{Number, Rational, Scalar};

/// Largest assignment space (product of all alphabet sizes) accepted by the
/// enumeration-based operations.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Default normalization tolerance for float tables.
pub const DEFAULT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub id: String,
    pub outcomes: Vec<String>,
    /// Numeric value of each outcome, in outcome order, when present.
    pub values: Option<Vec<Rational>>,
}

impl Observable {
    pub fn new(id: impl Into<String>, outcomes: &[&str]) -> Self {
        Observable {
            id: id.into(),
            outcomes: outcomes.iter().map(|s| s.to_string()).collect(),
            values: None,
        }
    }

    /// A ±1-valued observable with outcomes labelled `"+1"` and `"-1"`.
    pub fn dichotomic(id: impl Into<String>) -> Self {
        Observable {
            id: id.into(),
            outcomes: vec!["+1".into(), "-1".into()],
            values: Some(vec![Rational::from_ratio(1, 1), Rational::from_ratio(-1, 1)]),
        }
    }

    pub fn with_values(mut self, values: Vec<Rational>) -> Self {
        self.values = Some(values);
        self
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        if self.outcomes.len() < 2 {
            return Err(ScenarioError::TooFewOutcomes(self.id.clone()));
        }
        let mut seen = BTreeSet::new();
        for o in &self.outcomes {
            if !seen.insert(o.as_str()) {
                return Err(ScenarioError::DuplicateOutcome {
                    id: self.id.clone(),
                    outcome: o.clone(),
                });
            }
        }
        if let Some(values) = &self.values {
            if values.len() != self.outcomes.len() {
                return Err(ScenarioError::PartialValues(self.id.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Context {
    pub members: Vec<String>,
}

impl Context {
    pub fn new<S: AsRef<str>>(members: &[S]) -> Self {
        Context {
            members: members.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    fn as_set(&self) -> BTreeSet<&str> {
        self.members.iter().map(String::as_str).collect()
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.members.join(","))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementScenario {
    observables: Vec<Observable>,
    contexts: Vec<Context>,
    members: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl MeasurementScenario {
    pub fn new(observables: Vec<Observable>, contexts: Vec<Context>) -> Result<Self, ScenarioError> {
        if observables.is_empty() {
            return Err(ScenarioError::Empty);
        }
        let mut index = HashMap::new();
        for (i, obs) in observables.iter().enumerate() {
            obs.validate()?;
            if index.insert(obs.id.clone(), i).is_some() {
                return Err(ScenarioError::DuplicateObservable(obs.id.clone()));
            }
        }
        let mut members = Vec::with_capacity(contexts.len());
        for (ci, ctx) in contexts.iter().enumerate() {
            if ctx.members.is_empty() {
                return Err(ScenarioError::EmptyContext(ci));
            }
            let mut resolved = Vec::with_capacity(ctx.members.len());
            for id in &ctx.members {
                let oi = *index
                    .get(id)
                    .ok_or_else(|| ScenarioError::UnknownObservable(id.clone()))?;
                if resolved.contains(&oi) {
                    return Err(ScenarioError::DuplicateMember {
                        index: ci,
                        id: id.clone(),
                    });
                }
                resolved.push(oi);
            }
            members.push(resolved);
        }
        for i in 0..contexts.len() {
            for j in (i + 1)..contexts.len() {
                if contexts[i].as_set() == contexts[j].as_set() {
                    return Err(ScenarioError::DuplicateContext(i, j));
                }
            }
        }
        for (oi, obs) in observables.iter().enumerate() {
            if !members.iter().any(|m| m.contains(&oi)) {
                return Err(ScenarioError::UncoveredObservable(obs.id.clone()));
            }
        }
        Ok(MeasurementScenario {
            observables,
            contexts,
            members,
            index,
        })
    }

    /// The bipartite CHSH scenario: `A, A'` on one side, `B, B'` on the
    /// other, all ±1-valued, with contexts `(A,B), (A,B'), (A',B), (A',B')`.
    pub fn chsh() -> Self {
        let obs = ["A", "A'", "B", "B'"].map(Observable::dichotomic).to_vec();
        let contexts = vec![
            Context::new(&["A", "B"]),
            Context::new(&["A", "B'"]),
            Context::new(&["A'", "B"]),
            Context::new(&["A'", "B'"]),
        ];
        MeasurementScenario::new(obs, contexts).expect("CHSH scenario is well formed")
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn observable_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Observable indices of a context's members, in member order.
    pub fn context_members(&self, ci: usize) -> &[usize] {
        &self.members[ci]
    }

    /// Finds a context by set equality of its members.
    pub fn find_context(&self, ctx: &Context) -> Option<usize> {
        let wanted = ctx.as_set();
        self.contexts.iter().position(|c| c.as_set() == wanted)
    }

    /// Number of joint outcomes of a context.
    pub fn table_len(&self, ci: usize) -> usize {
        self.members[ci]
            .iter()
            .map(|&oi| self.observables[oi].outcomes.len())
            .product()
    }

    /// Outcome indices (one per member) of the flat table position `flat`.
    pub fn decode(&self, ci: usize, mut flat: usize) -> Vec<usize> {
        let members = &self.members[ci];
        let mut out = vec![0; members.len()];
        for (slot, &oi) in members.iter().enumerate().rev() {
            let k = self.observables[oi].outcomes.len();
            out[slot] = flat % k;
            flat /= k;
        }
        out
    }

    pub fn encode(&self, ci: usize, outcomes: &[usize]) -> usize {
        self.members[ci]
            .iter()
            .zip(outcomes)
            .fold(0, |acc, (&oi, &o)| acc * self.observables[oi].outcomes.len() + o)
    }

    /// Outcome labels of a flat table position.
    pub fn tuple_labels(&self, ci: usize, flat: usize) -> Vec<String> {
        self.decode(ci, flat)
            .into_iter()
            .zip(&self.members[ci])
            .map(|(o, &oi)| self.observables[oi].outcomes[o].clone())
            .collect()
    }

    pub fn context_label(&self, ci: usize) -> String {
        self.contexts[ci].to_string()
    }

    /// Product of all alphabet sizes, the number of global assignments.
    pub fn assignment_count(&self) -> u128 {
        self.observables
            .iter()
            .map(|o| o.outcomes.len() as u128)
            .fold(1u128, |acc, k| acc.saturating_mul(k))
    }

    pub fn check_cap(&self) -> Result<usize, ScenarioError> {
        let size = self.assignment_count();
        if size > ENUMERATION_CAP {
            Err(ScenarioError::CapExceeded {
                size,
                cap: ENUMERATION_CAP,
            })
        } else {
            Ok(size as usize)
        }
    }
}

/// Probability tables, one per context, with a single numeric backing.
#[derive(Clone, Debug, PartialEq)]
pub enum Tables {
    Exact(Vec<Vec<Rational>>),
    Float(Vec<Vec<f64>>),
}

/// Converts a table vector into the matching [`Tables`] variant.
pub trait IntoTables: Scalar {
    fn into_tables(tables: Vec<Vec<Self>>) -> Tables;
    fn into_probs(probs: Vec<Self>) -> Probs;
}

impl IntoTables for Rational {
    fn into_tables(tables: Vec<Vec<Self>>) -> Tables {
        Tables::Exact(tables)
    }
    fn into_probs(probs: Vec<Self>) -> Probs {
        Probs::Exact(probs)
    }
}

impl IntoTables for f64 {
    fn into_tables(tables: Vec<Vec<Self>>) -> Tables {
        Tables::Float(tables)
    }
    fn into_probs(probs: Vec<Self>) -> Probs {
        Probs::Float(probs)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalModel {
    scenario: MeasurementScenario,
    tables: Tables,
}

impl EmpiricalModel {
    /// Builds a model; checks shape only. Use [`validate_model`] for values.
    pub fn new<T: IntoTables>(scenario: MeasurementScenario, tables: Vec<Vec<T>>) -> Result<Self, ScenarioError> {
        if tables.len() != scenario.contexts.len() {
            return Err(ScenarioError::TableCount {
                expected: scenario.contexts.len(),
                got: tables.len(),
            });
        }
        for (ci, t) in tables.iter().enumerate() {
            let expected = scenario.table_len(ci);
            if t.len() != expected {
                return Err(ScenarioError::TableShape {
                    context: scenario.context_label(ci),
                    expected,
                    got: t.len(),
                });
            }
        }
        Ok(EmpiricalModel {
            scenario,
            tables: T::into_tables(tables),
        })
    }

    /// Builds a model by evaluating `f(context index, outcome indices)`.
    pub fn from_fn<T, F>(scenario: MeasurementScenario, mut f: F) -> Self
    where
        T: IntoTables,
        F: FnMut(usize, &[usize]) -> T,
    {
        let tables = (0..scenario.contexts.len())
            .map(|ci| {
                (0..scenario.table_len(ci))
                    .map(|flat| f(ci, &scenario.decode(ci, flat)))
                    .collect()
            })
            .collect();
        EmpiricalModel::new(scenario, tables).expect("from_fn produces correctly shaped tables")
    }

    pub fn scenario(&self) -> &MeasurementScenario {
        &self.scenario
    }

    pub fn tables(&self) -> &Tables {
        &self.tables
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.tables, Tables::Exact(_))
    }

    pub fn prob(&self, ci: usize, flat: usize) -> Number {
        match &self.tables {
            Tables::Exact(t) => Number::Exact(t[ci][flat].clone()),
            Tables::Float(t) => Number::Float(t[ci][flat]),
        }
    }

    /// Float copy of the model; exact entries are rounded.
    pub fn to_float(&self) -> EmpiricalModel {
        let tables = match &self.tables {
            Tables::Exact(t) => t.iter().map(|row| row.iter().map(Scalar::to_f64).collect()).collect(),
            Tables::Float(t) => t.clone(),
        };
        EmpiricalModel {
            scenario: self.scenario.clone(),
            tables: Tables::Float(tables),
        }
    }

    /// Convex combination `weight * self + (1 - weight) * other`.
    ///
    /// Both models must share the scenario and backing; an exact mixture
    /// needs an exact weight.
    pub fn mix(&self, other: &EmpiricalModel, weight: &Number) -> Option<EmpiricalModel> {
        if self.scenario != other.scenario {
            return None;
        }
        fn blend<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>], w: &T) -> Vec<Vec<T>> {
            let rest = T::one() - w.clone();
            a.iter()
                .zip(b)
                .map(|(ra, rb)| {
                    ra.iter()
                        .zip(rb)
                        .map(|(x, y)| w.clone() * x.clone() + rest.clone() * y.clone())
                        .collect()
                })
                .collect()
        }
        let tables = match (&self.tables, &other.tables, weight) {
            (Tables::Exact(a), Tables::Exact(b), Number::Exact(w)) => Tables::Exact(blend(a, b, w)),
            (Tables::Float(a), Tables::Float(b), w) => Tables::Float(blend(a, b, &w.to_f64())),
            _ => return None,
        };
        Some(EmpiricalModel {
            scenario: self.scenario.clone(),
            tables,
        })
    }
}

impl<T: Scalar> From<T> for Number {
    fn from(value: T) -> Self {
        value.into_number()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Probs {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl Probs {
    pub fn len(&self) -> usize {
        match self {
            Probs::Exact(p) => p.len(),
            Probs::Float(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize) -> Number {
        match self {
            Probs::Exact(p) => Number::Exact(p[i].clone()),
            Probs::Float(p) => Number::Float(p[i]),
        }
    }

    pub fn total(&self) -> Number {
        match self {
            Probs::Exact(p) => Number::Exact(p.iter().cloned().fold(Rational::zero(), |a, b| a + b)),
            Probs::Float(p) => Number::Float(p.iter().sum()),
        }
    }
}

/// A distribution over joint outcomes of an ordered list of observables.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub ids: Vec<String>,
    pub support: Vec<Vec<String>>,
    pub probs: Probs,
}

impl Distribution {
    pub fn prob_of(&self, labels: &[&str]) -> Option<Number> {
        self.support
            .iter()
            .position(|s| s.iter().map(String::as_str).eq(labels.iter().copied()))
            .map(|i| self.probs.get(i))
    }

    pub fn is_normalized(&self, norm_tol: f64) -> bool {
        match self.probs.total() {
            Number::Exact(q) => q == Rational::from_ratio(1, 1),
            Number::Float(x) => (x - 1.0).abs() <= norm_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    MissingEntry { context: String, tuple: String },
    Negative { context: String, tuple: String, value: Number },
    NonFinite { context: String, tuple: String },
    Normalization { context: String, sum: Number },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingEntry { context, tuple } => {
                write!(f, "context {context}: missing entry for outcome `{tuple}`")
            }
            Violation::Negative { context, tuple, value } => {
                write!(f, "context {context}: negative probability {value} for outcome `{tuple}`")
            }
            Violation::NonFinite { context, tuple } => {
                write!(f, "context {context}: non-finite probability for outcome `{tuple}`")
            }
            Violation::Normalization { context, sum } => {
                write!(f, "context {context}: probabilities sum to {sum}, not 1")
            }
        }
    }
}

/// Lists value-level problems of a model. Exact tables are checked exactly
/// and `norm_tol` only applies to float tables.
pub fn validate_model(model: &EmpiricalModel, norm_tol: f64) -> Vec<Violation> {
    let scenario = &model.scenario;
    let mut out = Vec::new();
    let tuple = |ci: usize, flat: usize| scenario.tuple_labels(ci, flat).join("|");
    match &model.tables {
        Tables::Exact(tables) => {
            for (ci, t) in tables.iter().enumerate() {
                for (flat, p) in t.iter().enumerate() {
                    if p < &Rational::zero() {
                        out.push(Violation::Negative {
                            context: scenario.context_label(ci),
                            tuple: tuple(ci, flat),
                            value: Number::Exact(p.clone()),
                        });
                    }
                }
                let sum = t.iter().cloned().fold(Rational::zero(), |a, b| a + b);
                if sum != Rational::from_ratio(1, 1) {
                    out.push(Violation::Normalization {
                        context: scenario.context_label(ci),
                        sum: Number::Exact(sum),
                    });
                }
            }
        }
        Tables::Float(tables) => {
            for (ci, t) in tables.iter().enumerate() {
                let mut finite = true;
                for (flat, &p) in t.iter().enumerate() {
                    if !p.is_finite() {
                        finite = false;
                        out.push(Violation::NonFinite {
                            context: scenario.context_label(ci),
                            tuple: tuple(ci, flat),
                        });
                    } else if p < 0.0 {
                        out.push(Violation::Negative {
                            context: scenario.context_label(ci),
                            tuple: tuple(ci, flat),
                            value: Number::Float(p),
                        });
                    }
                }
                let sum: f64 = t.iter().sum();
                if finite && (sum - 1.0).abs() > norm_tol {
                    out.push(Violation::Normalization {
                        context: scenario.context_label(ci),
                        sum: Number::Float(sum),
                    });
                }
            }
        }
    }
    out
}

fn marginal_table<T: Scalar>(scenario: &MeasurementScenario, ci: usize, table: &[T], slots: &[usize]) -> Vec<T> {
    let members = scenario.context_members(ci);
    let sizes: Vec<usize> = slots
        .iter()
        .map(|&s| scenario.observables[members[s]].outcomes.len())
        .collect();
    let mut out = vec![T::zero(); sizes.iter().product()];
    for (flat, p) in table.iter().enumerate() {
        let outcome = scenario.decode(ci, flat);
        let idx = slots
            .iter()
            .zip(&sizes)
            .fold(0, |acc, (&s, &k)| acc * k + outcome[s]);
        out[idx] = out[idx].clone() + p.clone();
    }
    out
}

fn subset_slots(model: &EmpiricalModel, ci: usize, subset: &[&str]) -> Result<Vec<usize>, ScenarioError> {
    let ctx = &model.scenario.contexts[ci];
    let mut slots = Vec::with_capacity(subset.len());
    for id in subset {
        let slot = ctx
            .members
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| ScenarioError::NotInContext {
                context: ctx.to_string(),
                id: id.to_string(),
            })?;
        if slots.contains(&slot) {
            return Err(ScenarioError::DuplicateMember {
                index: ci,
                id: id.to_string(),
            });
        }
        slots.push(slot);
    }
    Ok(slots)
}

/// Marginal distribution of `subset` (in the given order) within `context`.
pub fn marginalize(model: &EmpiricalModel, context: &Context, subset: &[&str]) -> Result<Distribution, ScenarioError> {
    let scenario = &model.scenario;
    let ci = scenario
        .find_context(context)
        .ok_or_else(|| ScenarioError::UnknownContext(context.to_string()))?;
    let slots = subset_slots(model, ci, subset)?;
    let probs = match &model.tables {
        Tables::Exact(t) => Probs::Exact(marginal_table(scenario, ci, &t[ci], &slots)),
        Tables::Float(t) => Probs::Float(marginal_table(scenario, ci, &t[ci], &slots)),
    };
    let alphabets: Vec<&Vec<String>> = slots
        .iter()
        .map(|&s| &scenario.observables[scenario.context_members(ci)[s]].outcomes)
        .collect();
    let mut support: Vec<Vec<String>> = vec![Vec::new()];
    for alphabet in alphabets {
        support = support
            .into_iter()
            .flat_map(|prefix| {
                alphabet.iter().map(move |o| {
                    let mut t = prefix.clone();
                    t.push(o.clone());
                    t
                })
            })
            .collect();
    }
    Ok(Distribution {
        ids: subset.iter().map(|s| s.to_string()).collect(),
        support,
        probs,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignallingViolation {
    pub contexts: (String, String),
    pub shared: Vec<String>,
    pub distance: Number,
}

impl fmt::Display for SignallingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "marginal of {{{}}} differs between {} and {} (total variation {})",
            self.shared.join(","),
            self.contexts.0,
            self.contexts.1,
            self.distance
        )
    }
}

fn total_variation<T: Scalar>(p: &[T], q: &[T]) -> T {
    let sum = p
        .iter()
        .zip(q)
        .fold(T::zero(), |acc, (a, b)| acc + (a.clone() - b.clone()).abs_val());
    sum / T::from_ratio(2, 1)
}

/// Compares marginals of every shared observable set between context pairs.
/// Float models flag distances above `tol`; exact models flag any nonzero
/// distance.
pub fn check_no_signalling(model: &EmpiricalModel, tol: f64) -> Vec<SignallingViolation> {
    let scenario = &model.scenario;
    let n = scenario.contexts.len();
    let mut out = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let shared: Vec<usize> = scenario.members[i]
                .iter()
                .copied()
                .filter(|oi| scenario.members[j].contains(oi))
                .collect();
            if shared.is_empty() {
                continue;
            }
            let slot_in = |ci: usize| -> Vec<usize> {
                shared
                    .iter()
                    .map(|oi| scenario.members[ci].iter().position(|m| m == oi).unwrap())
                    .collect()
            };
            let (si, sj) = (slot_in(i), slot_in(j));
            let distance = match &model.tables {
                Tables::Exact(t) => {
                    let d = total_variation(
                        &marginal_table(scenario, i, &t[i], &si),
                        &marginal_table(scenario, j, &t[j], &sj),
                    );
                    (!d.is_zero()).then_some(Number::Exact(d))
                }
                Tables::Float(t) => {
                    let d = total_variation(
                        &marginal_table(scenario, i, &t[i], &si),
                        &marginal_table(scenario, j, &t[j], &sj),
                    );
                    (d > tol || d.is_nan()).then_some(Number::Float(d))
                }
            };
            if let Some(distance) = distance {
                out.push(SignallingViolation {
                    contexts: (scenario.context_label(i), scenario.context_label(j)),
                    shared: shared.iter().map(|&oi| scenario.observables[oi].id.clone()).collect(),
                    distance,
                });
            }
        }
    }
    out
}
