//! Brute-force explorers and property checkers used to validate the DPOR
//! engine. Nothing here shares code with the engine beyond the program
//! interpreter.

mod exhaustive;
mod persistent;
mod traces;

use thiserror::Error;

use crate::program::ExecError;

pub use exhaustive::{exhaustive_explore, Exhaustive, OracleEdge};
pub use persistent::check_persistent;
pub use traces::{
    dependence_order, enumerate_traces, find_linearizing_path, is_prefix_of_linearization,
    DependenceOrder, OracleTrace, Step, TraceIter,
};

/// Default bound on the number of states the oracle will store.
pub const DEFAULT_NODE_CAP: usize = 100_000;

/// Node cap from `SDPOR_NODE_CAP`, falling back to [`DEFAULT_NODE_CAP`].
pub fn node_cap_from_env() -> usize {
    std::env::var("SDPOR_NODE_CAP")
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|n| *n > 0)
        .unwrap_or(DEFAULT_NODE_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("state space exceeds the oracle node cap of {0}")]
    NodeCap(usize),
    #[error(transparent)]
    Exec(#[from] ExecError),
}
