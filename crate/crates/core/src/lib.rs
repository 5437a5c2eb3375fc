//! Stateful dynamic partial order reduction for event-driven programs.
//!
//! Programs are sets of atomic event handlers over shared integer variables
//! (see [`program`]). The [`engine`] explores their possibly cyclic state
//! spaces, combining state matching with backtracking points set by a
//! backwards search over the explored transition graph. The [`oracle`]
//! module holds brute-force explorers used to check the engine.

pub mod graph;
pub mod program;
pub mod corpus;
pub mod engine;
pub mod oracle;
pub mod report;
pub mod batch;
pub mod fuzz;
pub mod cli;
