use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown potential tag `{0}`")]
    UnknownTag(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("potential does not decay: {0}")]
    NotDecaying(String),

    #[error("integration stalled at x = {position} (step {step:e})")]
    StepUnderflow { position: f64, step: f64 },

    #[error("Weyl solution vanishes at a = {a} for lambda = {lambda}")]
    WeylNode { a: f64, lambda: String },

    #[error("truncation sequence for m_- did not converge (last iterates {previous} and {last})")]
    TruncationDiverged { previous: String, last: String },

    #[error("bound states not resolved inside [{lo}, {hi}] ({count} eigenvalues in a bracket narrower than {width:e})")]
    Unresolved { lo: f64, hi: f64, count: usize, width: f64 },

    #[error("psi(a, is) vanishes near s = {s}; choose a larger split point (a = {a})")]
    InvalidSplitPoint { a: f64, s: f64 },

    #[error("boundary-value extrapolation is not monotone at s = {s}; epsilon trace {trace:?}")]
    Extrapolation { s: f64, trace: Vec<(f64, f64)> },

    #[error("argument {v} outside the Fourier table range [{lo}, {hi}]")]
    TableRange { v: f64, lo: f64, hi: f64 },

    #[error("oscillatory phase under-resolved: dk = {dk:e} but at most {required:e} is allowed")]
    PhaseResolution { dk: f64, required: f64 },

    #[error("kernel decay certificate failed: |h| = {value:e} at u = {u}; increase the truncation length")]
    DecayCertificate { u: f64, value: f64 },

    #[error("positivity violated at this discretization: lambda_min(I + M) = {value:e}; refine n")]
    Positivity { value: f64 },

    #[error("determinant routes disagree at x = {x}, t = {t}: {detail}")]
    RouteDisagreement { x: f64, t: f64, detail: String },

    #[error("wrap-around monitor tripped at t = {time}: |q| = {value:e} near the boundary")]
    WrapAround { time: f64, value: f64 },

    #[error("not enough singular values above the noise floor ({count}, need {needed})")]
    TooFewSingularValues { count: usize, needed: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name: name.to_string(), reason: reason.into() }
    }
}
