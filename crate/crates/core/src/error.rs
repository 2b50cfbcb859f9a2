use core::fmt;

/// Errors produced by the factorization routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A vector whose norm had to be positive was zero.
    ZeroVector,
    /// Operand shapes do not conform.
    DimensionMismatch { expected: (usize, usize), found: (usize, usize) },
    /// A matrix with zero rows or zero columns.
    EmptyMatrix,
    /// An entry is NaN or infinite.
    NonFinite { row: usize, col: usize },
    /// A data entry is negative.
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// Data has an all-zero row or column.
    DirtyData { axis: Axis, index: usize },
    /// An iterative routine hit its iteration cap. `column` is set for
    /// multi right-hand-side NNLS solves.
    MaxIterationsExceeded { iterations: usize, column: Option<usize> },
    /// Normal equations on the free set could not be solved, even by the
    /// least-squares fallback.
    SingularSubproblem { column: Option<usize> },
    /// Exhaustive oracle requested on too many variables.
    ProblemTooLarge { variables: usize, limit: usize },
    /// A factor column collapsed to zero during renormalization.
    ZeroColumn { index: usize },
    /// Requested rank exceeds the number of recovered rays.
    RankExceedsCone { rank: usize, rays: usize },
    /// Label vectors of different lengths.
    LengthMismatch { predicted: usize, truth: usize },
    /// Empty label input.
    EmptyInput,
    /// A configuration value is outside its valid range.
    InvalidConfig(&'static str),
}

/// Matrix axis used in data validation errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ZeroVector => f.write_str("vector has zero norm"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {}x{}, found {}x{}", expected.0, expected.1, found.0, found.1)
            }
            Error::EmptyMatrix => f.write_str("matrix must have at least one row and one column"),
            Error::NonFinite { row, col } => write!(f, "non-finite entry at ({row}, {col})"),
            Error::NegativeEntry { row, col, value } => {
                write!(f, "negative entry {value} at ({row}, {col})")
            }
            Error::DirtyData { axis, index } => write!(f, "all-zero {axis} at index {index}"),
            Error::MaxIterationsExceeded { iterations, column } => match column {
                Some(c) => write!(f, "no convergence after {iterations} iterations (column {c})"),
                None => write!(f, "no convergence after {iterations} iterations"),
            },
            Error::SingularSubproblem { column } => match column {
                Some(c) => write!(f, "singular least-squares subproblem (column {c})"),
                None => f.write_str("singular least-squares subproblem"),
            },
            Error::ProblemTooLarge { variables, limit } => {
                write!(f, "{variables} variables exceeds exhaustive limit {limit}")
            }
            Error::ZeroColumn { index } => write!(f, "factor column {index} collapsed to zero"),
            Error::RankExceedsCone { rank, rays } => {
                write!(f, "rank {rank} exceeds the {rays} recovered rays")
            }
            Error::LengthMismatch { predicted, truth } => {
                write!(f, "label length mismatch: {predicted} predicted vs {truth} truth")
            }
            Error::EmptyInput => f.write_str("empty label input"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
