use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{name}: argument {value} outside domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("series did not converge after {terms} terms (last term magnitude {last_term:e})")]
    NonConvergence { terms: usize, last_term: f64 },

    #[error("tolerance {requested:e} not reached; best achieved {achieved:e}")]
    ToleranceUnachievable { requested: f64, achieved: f64 },

    #[error("at grid point x = {x}: {source}")]
    AtGridPoint {
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("resource cap exceeded: {requested} work units requested, cap is {cap}")]
    ResourceCap { requested: u128, cap: u128 },

    #[error("trajectory {run} ends at round {runtime}, before requested round {round}")]
    TrajectoryTooShort { run: usize, runtime: u32, round: u32 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
