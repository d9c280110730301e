use thiserror::Error;

/// Error type shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("instance needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),

    #[error("weight range must satisfy 1 <= lo <= hi, got {lo}..{hi}")]
    BadWeightRange { lo: u32, hi: u32 },

    #[error("weight matrix is not square: {rows} rows, row {row} has {cols} columns")]
    NonSquareMatrix {
        rows: usize,
        row: usize,
        cols: usize,
    },

    #[error("weight[{from}][{to}] = {value} is not a finite nonnegative number")]
    BadWeight { from: usize, to: usize, value: f64 },

    #[error("diagonal entry weight[{0}][{0}] must be 0")]
    NonzeroDiagonal(usize),

    #[error("cannot normalize: all off-diagonal weights are zero")]
    AllZeroWeights,

    #[error("vertex sequence {0:?} is not a permutation of 0..{1}")]
    NotAPermutation(Vec<usize>, usize),

    #[error("basis state {index} is infeasible under the {kind} encoding")]
    InfeasibleState { index: usize, kind: &'static str },

    #[error("{qubits} qubits exceed the dense-simulation limit of {max}")]
    TooManyQubits { qubits: usize, max: usize },

    #[error("{n} vertices exceed the limit of {max} for {solver}")]
    TooManyVertices {
        n: usize,
        max: usize,
        solver: &'static str,
    },

    #[error("feasible set is empty")]
    EmptyFeasibleSet,

    #[error("state has {actual} qubits, expected {expected}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("angle vector has length {actual}, expected {expected}")]
    BadAngleCount { expected: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    BadConfig(String),

    #[error("optimizer failed: {0}")]
    OptimizerFailed(String),

    #[error("malformed file: {0}")]
    Format(String),

    #[error("no records to summarize")]
    EmptyRecords,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
