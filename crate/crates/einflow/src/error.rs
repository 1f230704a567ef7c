use thiserror::Error;

/// Errors raised by the flow laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("invalid shooting spec: {0}")]
    InvalidSpec(String),

    #[error("unknown critical point name `{0}`")]
    UnknownPoint(String),

    #[error("unknown invariant set `{0}`")]
    UnknownSet(String),

    #[error("set `{set}` is not defined for m = {m} in {mode} mode")]
    SetModeRestriction { set: String, m: u32, mode: String },

    #[error("sampler for `{set}` found no feasible state after {attempts} attempts (constraint: {constraint})")]
    SamplerExhausted {
        set: String,
        attempts: usize,
        constraint: String,
    },

    #[error("step size underflow at eta = {eta:.6} (h = {h:.3e})")]
    StepUnderflow { eta: f64, h: f64 },

    #[error("seed lies outside the trapping region: {0}")]
    SeedOutsideRegion(String),

    #[error("projection onto the constraint surface did not converge (residual {residual:.3e})")]
    ProjectionFailed { residual: f64 },

    #[error("W^2 = {wsq:.3e} is negative beyond tolerance; state left the conservation surface")]
    NegativeWsq { wsq: f64 },

    #[error("metric reconstruction failed: {0}")]
    Reconstruction(String),

    #[error("classification unresolved: {0}")]
    Unresolved(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
