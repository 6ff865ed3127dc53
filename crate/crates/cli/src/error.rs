use thiserror::Error;

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
pub const EXIT_FIT: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] binsplit::Error),

    #[error("goodness of fit failed: {0}")]
    Fit(String),

    #[error("invariant failed: {name}: {detail}")]
    Invariant {
        name: String,
        detail: String,
        code: i32,
    },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// The reader closed stdout, as `head` does; not worth reporting.
    pub fn is_broken_pipe(&self) -> bool {
        let io = match self {
            Self::Io(e) => Some(e.kind()),
            Self::Csv(e) => match e.kind() {
                csv::ErrorKind::Io(e) => Some(e.kind()),
                _ => None,
            },
            Self::Json(e) => e.io_error_kind(),
            _ => None,
        };
        io == Some(std::io::ErrorKind::BrokenPipe)
    }

    pub fn exit_code(&self) -> i32 {
        use binsplit::Error as E;
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Core(E::InvalidParameter(_)) => EXIT_USAGE,
            Self::Core(E::ResourceCeiling { .. } | E::InsufficientMoments { .. }) => EXIT_RESOURCE,
            Self::Core(_) => EXIT_NUMERIC,
            Self::Fit(_) => EXIT_FIT,
            Self::Invariant { code, .. } => *code,
            Self::Io(_) | Self::Csv(_) | Self::Json(_) => EXIT_RESOURCE,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
