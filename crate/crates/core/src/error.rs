use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} lies outside [0, 1]")]
    OutOfUnitRange { name: &'static str, value: f64 },

    #[error("mode {mode} lies outside [1, {modes}]")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("two-mode element on ({upper}, {lower}) must act on adjacent modes (i, i+1)")]
    NonAdjacent { upper: usize, lower: usize },

    #[error("layer touches mode {0} more than once")]
    OverlappingModes(usize),

    #[error("circuit must have at least one mode")]
    NoModes,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cannot invert lossy phase shifter on mode {mode} (loss {loss})")]
    LossyInverse { mode: usize, loss: f64 },

    #[error("invalid mode count: {0}")]
    InvalidModeCount(String),

    #[error("solution mode {solution} lies outside [1, {modes}]")]
    InvalidSolution { solution: usize, modes: usize },

    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("invalid experiment: {0}")]
    InvalidExperiment(String),

    #[error("empty input")]
    EmptyInput,

    #[error("netlist: {0}")]
    Netlist(String),

    #[error("results file: {0}")]
    Results(String),
}
