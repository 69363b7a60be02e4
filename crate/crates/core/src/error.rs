use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("population seeding gave up after {attempts} probe evaluations ({admitted} admitted)")]
    Seeding { attempts: usize, admitted: usize },

    #[error("{runs} run(s) hit max_generations without converging")]
    NotConverged { runs: usize },

    #[error("time {0} s is outside the waypoint schedule")]
    ScheduleRange(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv { path: path.into(), source }
    }
}
