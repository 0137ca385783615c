//! Embedded CDCL solver, model enumeration and DRUP logging.

mod config;
mod enumerate;
mod sink;
mod solver;

pub use config::SolverConfig;
pub use enumerate::{enumerate, enumerate_projected, Control, EnumerateError, EnumerationHook, EnumerationSummary, SelfBlocking};
pub use sink::{DrupWriter, FailingSink, MemoryProof, ProofSink};
pub use solver::{SolveError, SolveOutcome, Solver, SolverStats};

use crate::encoder::Cnf;
use crate::lit::Lit;

/// One-shot convenience wrapper around [`Solver`].
pub fn solve(cnf: &Cnf, assumptions: &[Lit], config: SolverConfig) -> Result<SolveOutcome, SolveError> {
    Solver::from_cnf(cnf, config).solve(assumptions)
}
