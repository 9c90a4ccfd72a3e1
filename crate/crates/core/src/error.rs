use thiserror::Error;

/// Errors surfaced by the library.
///
/// Budget exhaustion is kept separate from every other variant: a solver that
/// runs out of nodes or time has not produced a verdict.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("rank {rank} out of range for {total} sets")]
    Range { rank: u64, total: String },

    #[error("invalid r-set: {0}")]
    InvalidSet(String),

    #[error("materialized backend holds at most {cap} vertices, got {requested}")]
    Capacity { cap: u64, requested: u64 },

    #[error("instance too large for exhaustive search: {0}")]
    Size(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("solver budget exhausted after {nodes} nodes ({reason})")]
    Budget { nodes: u64, reason: BudgetKind },

    #[error("curve does not cross target {target} on [{lo}, {hi}]")]
    NoCrossing { target: f64, lo: f64, hi: f64 },

    #[error("unknown {kind} '{name}' (available: {available})")]
    Unknown {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BudgetKind {
    Nodes,
    Time,
}

impl std::fmt::Display for BudgetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BudgetKind::Nodes => f.write_str("node limit"),
            BudgetKind::Time => f.write_str("time limit"),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
