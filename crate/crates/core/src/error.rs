use thiserror::Error;

/// Errors raised by the constructions in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("space `{space}` has no points")]
    EmptySpace { space: String },

    #[error("space `{space}` repeats the label `{label}`")]
    DuplicateLabel { space: String, label: String },

    #[error("`{label}` is not a point of `{space}`")]
    UnknownLabel { space: String, label: String },

    #[error("map is not total: {0}")]
    Partial(String),

    #[error("shape mismatch: {0}")]
    Mismatch(String),

    #[error("map {map} misses the codomain point `{point}`")]
    NotSurjective { map: String, point: String },

    #[error("diagram does not commute at `{point}`: {detail}")]
    NotCommuting { point: String, detail: String },

    #[error("level {level} is out of range (depth {depth})")]
    InvalidLevel { level: usize, depth: usize },

    #[error("malformed ball tree: {0}")]
    MalformedTree(String),

    #[error("incoherent inverse sequence: {0}")]
    Incoherent(String),

    #[error("invalid padding schedule: {0}")]
    InvalidSchedule(String),

    #[error("pad size {pad} cannot cover {needed} balls")]
    PadTooSmall { pad: usize, needed: usize },

    #[error("padding schedule too small: {0}")]
    ScheduleTooSmall(String),

    #[error("task `{tag}` can never be serviced: {reason}")]
    Unserviceable { tag: String, reason: String },

    #[error("depth {available} is too small, need at least {needed}")]
    DepthTooSmall { needed: usize, available: usize },

    #[error("enumeration needs {needed} candidates, bound is {bound}")]
    BoundExceeded { needed: u128, bound: u128 },

    #[error("set is not uniformly nowhere dense: no witness at level {level}")]
    NotNowhereDense { level: usize },

    #[error("witness ball {ball} at level {level} is invalid: {reason}")]
    BadWitness {
        level: usize,
        ball: String,
        reason: String,
    },

    #[error("`{a}` and `{b}` violate the ball structure: {detail}")]
    NotHomeomorphism {
        a: String,
        b: String,
        detail: String,
    },

    #[error("round {round}: {detail}")]
    ExtensionFailed { round: usize, detail: String },

    #[error("engine bug: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
