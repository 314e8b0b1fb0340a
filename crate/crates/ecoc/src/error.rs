use thiserror::Error;

/// Unified error type for the crate.
///
/// Variants are grouped by failure class rather than by module so callers can
/// map them onto process exit codes without inspecting message text.
#[derive(Debug, Error)]
pub enum Error {
    /// A size guard refused the request before any work was done.
    #[error("{what} supports {min} <= {param} <= {max}, got {value}")]
    SizeLimit {
        what: &'static str,
        param: &'static str,
        min: usize,
        max: usize,
        value: usize,
    },

    /// Generic argument or state validation failure.
    #[error("invalid {what}: {detail}")]
    Invalid { what: &'static str, detail: String },

    /// An operation produced an empty codebook where columns are required.
    #[error("no columns remain: {context}")]
    EmptyCodebook { context: String },

    /// Random search exhausted its trial budget without a valid draw.
    #[error("no valid codebook found in {trials} random trials")]
    GenerationExhausted { trials: usize },

    /// A column's induced binary problem has all examples on one side.
    #[error("column {column} is degenerate: every example lands on one side of the split")]
    DegenerateColumn { column: usize },

    /// A trained hypothesis cannot supply an input gradient.
    #[error("hypothesis {column} ({kind}) provides no input gradient")]
    NoGradient { column: usize, kind: &'static str },

    /// Exhaustive enumeration would visit more subsets than the budget allows.
    #[error("enumeration of ~{subsets:.3e} subsets exceeds the budget of {limit}")]
    EnumerationBudget { subsets: f64, limit: u64 },

    /// Integer arithmetic overflowed while computing a count.
    #[error("arithmetic overflow computing {0}")]
    Overflow(&'static str),

    /// A clique cover failed validation where a valid one is required.
    #[error("invalid clique cover: {0}")]
    InvalidCover(String),

    /// A model was handed to a solver that does not understand its structure.
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    /// Text input (CSV, LP, edge list, config) failed to parse.
    #[error("{source_name}:{line}: {detail}")]
    Format {
        source_name: String,
        line: usize,
        detail: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn format(source_name: impl Into<String>, line: usize, detail: impl Into<String>) -> Self {
        Error::Format {
            source_name: source_name.into(),
            line,
            detail: detail.into(),
        }
    }

    pub fn invalid(what: &'static str, detail: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            detail: detail.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
