use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{file}: line {line}, field `{field}`: {message}")]
    MalformedRow {
        file: String,
        line: u64,
        field: String,
        message: String,
    },

    #[error("{file}: missing or unexpected header: {message}")]
    BadHeader { file: String, message: String },

    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("edge `{edge}` references unknown node `{node}`")]
    DanglingEndpoint { edge: String, node: String },

    #[error("element `{id}` is decommissioned in {decommissioned}, before it was commissioned in {commissioned}")]
    InvalidInterval {
        id: String,
        commissioned: i32,
        decommissioned: i32,
    },

    #[error("edge `{edge}` is a self-loop on node `{node}`")]
    SelfLoop { edge: String, node: String },

    #[error("no element is active in year {year}")]
    EmptySnapshot { year: i32 },

    #[error("node index {index} out of range for a graph with {n} nodes")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("invalid removal target {target}: {message}")]
    InvalidTarget { target: usize, message: String },

    #[error("{metric} is undefined: {reason}")]
    UndefinedMetric {
        metric: &'static str,
        reason: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("partition labels {labels} nodes but the graph has {n}")]
    PartitionMismatch { labels: usize, n: usize },

    #[error("fit impossible: {0}")]
    FitImpossible(String),

    #[error("scenario infeasible: {0}")]
    Infeasible(String),

    #[error("exhaustive search over {combinations} subsets exceeds the budget of {budget}; use the greedy strategy")]
    BudgetExceeded { combinations: u128, budget: u128 },

    #[error("normalization undefined: {0}")]
    NormalizationUndefined(String),

    #[error("correlation undefined: {0}")]
    CorrelationUndefined(String),

    #[error("year {year}: {source}")]
    InYear {
        year: i32,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Open {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Annotates the error with the year it occurred in.
    pub fn in_year(self, year: i32) -> Self {
        Error::InYear {
            year,
            source: Box::new(self),
        }
    }

    /// The innermost error, looking through year annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::InYear { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn undefined(metric: &'static str, reason: impl Into<String>) -> Self {
        Error::UndefinedMetric {
            metric,
            reason: reason.into(),
        }
    }
}
