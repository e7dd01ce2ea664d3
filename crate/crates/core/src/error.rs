use alloc::boxed::Box;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("readout segment at index {index} cannot be propagated; read-out is handled by photostats")]
    ReadoutInSequence { index: usize },

    #[error("readout bins must be strictly increasing (bin {bin} after bin {previous})")]
    ReadoutOrder { previous: u8, bin: u8 },

    #[error("readout bin {0} is outside 1..=3")]
    ReadoutBin(u8),

    #[error("scan grid is invalid: {0}")]
    InvalidGrid(&'static str),

    #[error("step size underflow at t = {time:e} s (h = {step:e} s)")]
    StepUnderflow { time: f64, step: f64 },

    #[error("density matrix lost positivity at t = {time:e} s (min eigenvalue {min_eigenvalue:e})")]
    PositivityViolation { time: f64, min_eigenvalue: f64 },

    #[error("density matrix trace drifted to {trace} at t = {time:e} s")]
    TraceDrift { time: f64, trace: f64 },

    #[error("density matrix lost hermiticity at t = {time:e} s (deviation {deviation:e})")]
    HermiticityViolation { time: f64, deviation: f64 },

    #[error("backend failed at delta = {delta:e} rad/s: {source}")]
    Backend { delta: f64, source: Box<Error> },

    #[error("not enough data: {0}")]
    InsufficientData(&'static str),

    #[error("estimate undefined: {0}")]
    UndefinedEstimate(&'static str),

    #[error("linear system is singular")]
    Singular,
}
