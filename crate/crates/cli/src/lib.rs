//! Experiment tooling for the network coloring game: edge-list files,
//! Monte Carlo campaigns, scaling sweeps and the verification suite behind
//! the `colorgame` binary.

pub mod campaign;
pub mod config;
pub mod edgelist;
pub mod stats;
pub mod sweep;
pub mod verify;

use std::path::PathBuf;

use thiserror::Error;

pub use campaign::{
    run_campaign, Campaign, CampaignSummary, ExperimentSpec, GraphSource, KRule, TrialRow,
};
pub use sweep::{scaling_sweep, SweepRow, SweepSpec};
pub use verify::{verify, VerifyLevel, VerifyReport};

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] edgelist::FormatError),
    #[error(transparent)]
    Graph(#[from] colorgame_core::GraphError),
    #[error(transparent)]
    Engine(#[from] colorgame_core::EngineError),
    #[error(transparent)]
    Oracle(#[from] colorgame_core::OracleError),
    #[error(transparent)]
    Bound(#[from] colorgame_core::BoundError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("trial {trial} reported convergence but its final coloring is not proper")]
    ImproperFinalColoring { trial: u64 },
}

impl Error {
    /// Whether the error stems from bad user input rather than a failed run.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Format(_)
                | Error::Graph(_)
                | Error::Engine(_)
                | Error::Bound(_)
                | Error::Config(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner()
        .map_err(|e| Error::Csv(csv::Error::from(e.into_error())))
}
