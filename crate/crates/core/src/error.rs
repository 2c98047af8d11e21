use thiserror::Error;

/// Errors raised by validation and computation across the crate.
///
/// Dimension and person indices carried by variants are 1-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: {rows} rows, row {row} has {cols} entries")]
    NotSquare {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("dependence structure needs at least 2 dimensions, got {0}")]
    TooFewDimensions(usize),

    #[error("entry M[{row},{col}] = {value} is outside [0, 1]")]
    EntryOutOfRange { row: usize, col: usize, value: f64 },

    #[error("diagonal entry M[{index},{index}] = {value} must equal 1")]
    DiagonalNotOne { index: usize, value: f64 },

    #[error("dimension index {index} out of range 1..={d}")]
    IndexOutOfRange { index: usize, d: usize },

    #[error("person index {index} out of range 1..={n}")]
    PersonOutOfRange { index: usize, n: usize },

    #[error("weight w[{index}] = {value} must be positive")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("weight w[{index}] = {value} must be below d = {d}")]
    WeightTooLarge { index: usize, value: f64, d: usize },

    #[error("weights sum to {sum}, expected d = {d}")]
    SumNotD { sum: f64, d: usize },

    #[error("cutoff z[{index}] = {value} must be positive")]
    NonPositiveCutoff { index: usize, value: f64 },

    #[error("achievement at person {row}, dimension {col} is negative ({value})")]
    NegativeAchievement { row: usize, col: usize, value: f64 },

    #[error("achievement at person {row}, dimension {col} is not finite")]
    NonFiniteAchievement { row: usize, col: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("alpha = {0} must be a finite value >= 0")]
    InvalidAlpha(f64),

    #[error("poverty cutoff k = {k} outside (0, {max}]")]
    CutoffOutOfRange { k: f64, max: f64 },

    #[error("enumeration needs d <= {max}, got {d}")]
    DimensionTooLargeForEnumeration { d: usize, max: usize },

    #[error("dependence structure is not symmetric: M[{row},{col}] = {upper} but M[{col},{row}] = {lower}")]
    NotSymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("increment amount {0} must be positive")]
    NonPositiveAmount(f64),

    #[error("matrix is not bistochastic: {0}")]
    NotBistochastic(String),

    #[error("row {0} belongs to a non-poor person but is not an identity row")]
    NonPoorRowNotIdentity(usize),

    #[error("person {0} is not poor")]
    PersonNotPoor(usize),

    #[error("rearrangement needs two distinct persons, got {0} twice")]
    SamePerson(usize),

    #[error("invalid generator settings: {0}")]
    InvalidGeneratorSettings(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("parse error at row {row}, column {column}: {message}")]
    ParseError {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("row {row} has {found} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        found: usize,
        expected: usize,
    },

    #[error("missing field `{0}`")]
    MissingField(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// Whether this error came from the filesystem rather than from validating input.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
