use thiserror::Error;

/// Error type shared by every module in the crate.
///
/// Variants are grouped by the stage that raises them so the CLI can map each
/// failure onto a stable machine-readable class string.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input file (dispersion table, signature, model, config).
    #[error("parse error in {path} line {line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    /// Semantically invalid data or configuration (bad ranges, bad geometry,
    /// inconsistent grids, out-of-domain arguments).
    #[error("validation error: {0}")]
    Validation(String),

    /// Requested wavelength falls outside a dispersion table.
    #[error(
        "wavelength {lambda_nm} nm outside tabulated range [{min_nm}, {max_nm}] nm for '{material}'"
    )]
    WavelengthOutOfRange {
        material: String,
        lambda_nm: f64,
        min_nm: f64,
        max_nm: f64,
    },

    /// Numerical failure inside the forward model or a solver.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Iterative training failed to reach its stopping criterion.
    #[error("SVM training did not converge: {0}")]
    SvmNoConvergence(String),

    /// Artifact produced by an incompatible pipeline stage.
    #[error("incompatible artifact: {0}")]
    Incompatible(String),

    /// Underlying I/O failure.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable one-word class used by the command-line frontend for exit
    /// reporting (`error[<class>]: ...`).
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::WavelengthOutOfRange { .. } => "validation",
            Error::Numerical(_) => "numerical",
            Error::SvmNoConvergence(_) => "training",
            Error::Incompatible(_) => "incompatible",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
