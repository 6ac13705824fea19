use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("spectrum is not conjugate-symmetric (imaginary residue {residue:e})")]
    SymmetryViolation { residue: f64 },

    #[error(
        "dimension mismatch: expected {expected_length} steps x {expected_channels} channels, \
         got {length} x {channels}"
    )]
    DimensionMismatch {
        expected_length: usize,
        expected_channels: usize,
        length: usize,
        channels: usize,
    },

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("inconsistent model shape: {0}")]
    ShapeInconsistency(String),

    #[error("non-finite parameter in {0}")]
    NonFinite(String),

    #[error("invalid occlusion config: {0}")]
    InvalidConfig(String),

    #[error("invalid mask policy: {0}")]
    InvalidPolicy(String),

    #[error("attribution map contract violated: {0}")]
    ContractViolation(String),

    #[error("domain mismatch: expected {expected} map, got {found}")]
    DomainMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("incomplete grid: {0}")]
    IncompleteGrid(String),

    #[error("requested {requested} samples but dataset has only {available}")]
    SubsampleTooLarge { requested: usize, available: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
}
