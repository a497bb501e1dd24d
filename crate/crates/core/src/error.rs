use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown material '{name}' (available: {})", available.join(", "))]
    UnknownMaterial {
        name: String,
        available: Vec<String>,
    },

    #[error("materials file, line {line}, field '{field}': {message}")]
    MaterialFile {
        line: usize,
        field: String,
        message: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("duplicate element name '{0}'")]
    DuplicateElement(String),

    #[error("node '{0}' has no DC path to ground")]
    FloatingNode(String),

    #[error("singular circuit matrix: {0}")]
    Singular(String),

    #[error("element '{0}' is nonlinear; AC analysis needs a linear circuit")]
    NonlinearInAc(String),

    #[error(
        "Newton iteration did not converge{} after {iterations} iterations (worst residual {residual:.3e})",
        step.map(|k| format!(" at step {k}")).unwrap_or_default()
    )]
    NonConvergence {
        step: Option<usize>,
        iterations: usize,
        residual: f64,
    },

    #[error("non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for numerical failures of a solver, as opposed to bad inputs.
    pub fn is_solver_failure(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. } | Error::NonFinite { .. } | Error::Singular(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
