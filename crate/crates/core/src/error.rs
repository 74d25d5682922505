use std::path::PathBuf;

use crate::omd::SolveReport;

/// Errors produced by the solvers, learners, streams and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver did not converge: {message} after {} iterations (residual {:.3e})", report.iterations, report.kkt_residual)]
    Solver { message: String, report: SolveReport },

    #[error("infeasible projection: {0}")]
    Infeasible(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("multiplicative stability violated for arm {arm}: ratio {ratio:.6} > 2")]
    Stability { arm: usize, ratio: f64 },

    #[error("round {round}: {source}")]
    Round {
        round: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Solver { .. } => "solver",
            Error::Infeasible(_) => "infeasible",
            Error::Numeric(_) => "numeric",
            Error::Stability { .. } => "stability",
            Error::Round { source, .. } => source.kind(),
            Error::Io { .. } => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn at_round(self, round: usize) -> Error {
        match self {
            e @ Error::Round { .. } => e,
            e => Error::Round {
                round,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
