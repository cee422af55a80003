use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A probability or distribution parameter outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed or insufficient input data.
    #[error("input error: {0}")]
    Input(String),

    /// A run configuration that fails validation. `field` names the offending setting.
    #[error("invalid {field}: {message}")]
    Config { field: &'static str, message: String },

    /// The continuous solver has no interior root: the optimal allocation is zero.
    #[error("no interior solution: r/s = {ratio} >= E[1/D] = {reciprocal_mean}")]
    NoInteriorSolution { ratio: f64, reciprocal_mean: f64 },

    /// Quadrature or root finding failed to converge.
    #[error("numeric failure in {routine}: {detail}")]
    Numeric { routine: &'static str, detail: String },

    /// The requested target week lacks the history window or the realized sales.
    #[error(
        "target week {target_week} is outside the usable range: earliest usable target week is \
         {earliest_usable}, latest is {latest_usable}"
    )]
    TargetWeekOutOfRange {
        target_week: u32,
        earliest_usable: u32,
        latest_usable: u32,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn config(field: &'static str, message: impl Into<String>) -> Self {
        Error::Config {
            field,
            message: message.into(),
        }
    }

    pub(crate) fn numeric(routine: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            routine,
            detail: detail.into(),
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 2 config, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Domain(_)
            | Error::Input(_)
            | Error::TargetWeekOutOfRange { .. }
            | Error::Io { .. } => 3,
            Error::NoInteriorSolution { .. } | Error::Numeric { .. } => 4,
        }
    }
}
