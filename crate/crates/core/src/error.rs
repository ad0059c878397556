use thiserror::Error;

pub type Result<T, E = BcrError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum BcrError {
    #[error("invalid projection spec: {0}")]
    InvalidSpec(String),

    #[error("projection row {row} stayed rank deficient after {attempts} redraws")]
    RankDeficient { row: usize, attempts: usize },

    #[error("dimension mismatch for {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("degenerate posterior: b1 = {b1:e} with y'y = {yty:e}")]
    NonPositiveB1 { b1: f64, yty: f64 },

    #[error("matrix is not positive definite (pivot {pivot})")]
    CholeskyFailure { pivot: usize },

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("empty dimension window: m_min = {m_min} > m_max = {m_max}")]
    WindowEmpty { m_min: usize, m_max: usize },

    #[error("every ensemble member was degenerate")]
    NoSurvivingMembers,

    #[error("ensemble member {index}: {source}")]
    Member {
        index: usize,
        #[source]
        source: Box<BcrError>,
    },

    #[error("could not bracket the mixture quantile {target}")]
    BracketFailure { target: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("non-numeric cell {value:?} at row {row}, column {column}")]
    NonNumericCell {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("response column {0} not found")]
    MissingResponse(String),

    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),

    #[error("replicate {index}: {source}")]
    Replicate {
        index: usize,
        #[source]
        source: Box<BcrError>,
    },

    #[error("model artifact: {0}")]
    Artifact(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl BcrError {
    /// Strips `Member` and `Replicate` wrappers.
    pub fn root(&self) -> &BcrError {
        match self {
            BcrError::Member { source, .. } | BcrError::Replicate { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by unreadable or malformed input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self.root(),
            BcrError::Parse { .. }
                | BcrError::NonNumericCell { .. }
                | BcrError::MissingResponse(_)
                | BcrError::InvalidData(_)
                | BcrError::Artifact(_)
                | BcrError::Io(_)
        )
    }
}
