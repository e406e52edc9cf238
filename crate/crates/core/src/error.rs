use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),

    #[error("variable `{variable}` lists state `{state}` more than once")]
    DuplicateState { variable: String, state: String },

    #[error("`{state}` is not a state of variable `{variable}`{}", row_suffix(*.row))]
    UnknownState {
        variable: String,
        state: String,
        row: Option<usize>,
    },

    #[error("row {row}: expected {expected} values, found {found}")]
    ArityMismatch {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("variable `{0}` is used in more than one role")]
    RoleOverlap(String),

    #[error("recovery rate undefined: the {arm} arm has no subjects")]
    UndefinedRate { arm: &'static str },

    #[error("count overflow while summing cells")]
    CountOverflow,

    #[error("field `{field}` must be a probability in [0, 1], got {value}")]
    InvalidProbability { field: String, value: f64 },

    #[error("conditioning event {0} has zero probability")]
    ZeroProbabilityEvidence(String),

    #[error("n = {n} exceeds the enumeration cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("total {total} is not divisible by {groups} groups (remainder {remainder})")]
    Indivisible {
        total: u64,
        groups: u64,
        remainder: u64,
    },

    #[error("{groups} groups exceeds the materialization cap of {cap}")]
    MaterializationCap { groups: String, cap: u64 },

    #[error("csv{}: {message}", line_suffix(*.line))]
    Csv { line: Option<u64>, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn line_suffix(line: Option<u64>) -> String {
    match line {
        Some(l) => format!(" line {l}"),
        None => String::new(),
    }
}

fn row_suffix(row: Option<usize>) -> String {
    match row {
        Some(r) => format!(" (row {r})"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures caused by the content of input data rather than by
    /// the parameters a caller supplied.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::UnknownState { .. }
                | Error::ArityMismatch { .. }
                | Error::UndefinedRate { .. }
                | Error::CountOverflow
                | Error::EmptyDataset
                | Error::Csv { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv {
            line: e.position().map(|p| p.line()),
            message: e.to_string(),
        }
    }
}
