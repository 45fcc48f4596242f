use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("hamiltonian is not Hermitian (max deviation {deviation:e})")]
    NonHermitian { deviation: f64 },

    #[error("invalid collapse operator: {0}")]
    InvalidCollapse(String),

    #[error("steady state is not unique or the model is broken: residual {residual:e}, condition estimate {condition:e}")]
    NullSpaceDeficient { residual: f64, condition: f64 },

    #[error("light shift singular: probe detuning {detuning_mhz} MHz in the atom frame is within 1 MHz of resonance")]
    LightShiftSingular { detuning_mhz: f64 },

    #[error("red-detuned branch: shell detuning {delta_mhz} MHz is not positive")]
    NegativeDetuningBranch { delta_mhz: f64 },

    #[error("no peak above the noise floor")]
    NoPeakFound,
}
