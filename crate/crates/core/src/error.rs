use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid run configuration (precision, c0, truncation, grids, plans).
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside an operation's domain (indices, lengths, units).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("initial guess has no overlap with basis state {state}")]
    DegenerateGuess { state: usize },

    #[error("(H - E) annihilates basis state {state}; the diagonal coefficient is undefined")]
    DegenerateOperator { state: usize },

    #[error("basis energies of states {first} and {second} coincide")]
    Degeneracy { first: usize, second: usize },

    #[error("sequencing error: {0}")]
    Sequencing(String),

    #[error("series coefficient of order {0} is not tabulated (maximum is 6)")]
    NotTabulated(usize),

    #[error("need at least {needed} series terms, got {got}")]
    InsufficientTerms { needed: usize, got: usize },

    #[error("overlap with basis state {state} vanished during iteration pass {pass}")]
    LostState { state: usize, pass: usize },

    #[error("residual of state {state} became non-finite on iteration pass {pass}")]
    Diverged { state: usize, pass: usize },

    #[error("continuation stage {stage} (beta = {beta}) did not reach residual {target}; best was {achieved}")]
    StageFailure {
        stage: usize,
        beta: String,
        target: String,
        achieved: String,
        /// Rows completed before the failing stage.
        completed: Vec<crate::driver::ContinuationRow>,
    },

    #[error("at order {order}: {source}")]
    AtOrder {
        order: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at_order(self, order: usize) -> Error {
        match self {
            e @ Error::AtOrder { .. } => e,
            other => Error::AtOrder { order, source: Box::new(other) },
        }
    }

    /// True for errors caused by user-supplied configuration rather than by
    /// the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Domain(_) | Error::Json(_) => true,
            Error::AtOrder { source, .. } => source.is_config(),
            _ => false,
        }
    }

    /// Process exit code for the CLI: 2 for configuration and I/O problems,
    /// 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io(_) | Error::Csv(_) => 2,
            e if e.is_config() => 2,
            _ => 3,
        }
    }
}
