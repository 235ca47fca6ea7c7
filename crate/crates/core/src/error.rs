use thiserror::Error;

use crate::scenario::Violation;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("cannot parse `{0}` as a rational number")]
pub struct ParseNumberError(pub String);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScenarioError {
    #[error("scenario has no observables")]
    Empty,
    #[error("duplicate observable id `{0}`")]
    DuplicateObservable(String),
    #[error("observable `{0}` needs at least 2 outcomes")]
    TooFewOutcomes(String),
    #[error("observable `{id}` lists outcome `{outcome}` twice")]
    DuplicateOutcome { id: String, outcome: String },
    #[error("observable `{0}` has numeric values for some outcomes but not all")]
    PartialValues(String),
    #[error("context #{0} is empty")]
    EmptyContext(usize),
    #[error("context #{index} lists `{id}` twice")]
    DuplicateMember { index: usize, id: String },
    #[error("unknown observable `{0}`")]
    UnknownObservable(String),
    #[error("observable `{0}` does not appear in any context")]
    UncoveredObservable(String),
    #[error("contexts #{0} and #{1} contain the same observables")]
    DuplicateContext(usize, usize),
    #[error("unknown context {0}")]
    UnknownContext(String),
    #[error("`{id}` is not a member of context {context}")]
    NotInContext { context: String, id: String },
    #[error("unknown outcome `{outcome}` for observable `{id}`")]
    UnknownOutcome { id: String, outcome: String },
    #[error("table for context {context} has {got} entries, expected {expected}")]
    TableShape {
        context: String,
        expected: usize,
        got: usize,
    },
    #[error("expected {expected} tables (one per context), got {got}")]
    TableCount { expected: usize, got: usize },
    #[error("scenario size {size} exceeds the enumeration cap {cap}")]
    CapExceeded { size: u128, cap: u128 },
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum LpError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("scenario is not the 4-context CHSH scenario over ±1-valued observables: {0}")]
    NotChsh(String),
    #[error("model is not well formed: {0}")]
    InvalidModel(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum QuantumError {
    #[error("state is not normalized (squared norm {0})")]
    Unnormalized(f64),
    #[error("measurement angle {0} is not finite")]
    NonFiniteAngle(f64),
    #[error("party must be 1 or 2, got {0}")]
    BadParty(u8),
    #[error("both settings belong to party {0}")]
    SameParty(u8),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum NelsonError {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("ensemble must contain at least one point")]
    EmptyEnsemble,
    #[error("non-finite drift {drift:?} at point ({x1}, {x2})")]
    NonFiniteDrift { x1: f64, x2: f64, drift: [f64; 2] },
    #[error("no points with |x1 - {y}| <= {delta} among {n}; widen delta or increase n")]
    EmptySubEnsemble { y: f64, delta: f64, n: usize },
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum StatsError {
    #[error("need at least {min} samples, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("histogram edges must be strictly increasing and at least two")]
    BadEdges,
    #[error("significance level must lie in (0, 1), got {0}")]
    BadAlpha(f64),
}

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version `{0}` (this build reads major version 1)")]
    Version(String),
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Incomplete(Vec<Violation>),
}
