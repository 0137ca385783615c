//! Symmetries of the known block, the column-1 stabilizer and orbits of
//! light-row completions under it.

mod completion;
mod group;

use thiserror::Error;

pub use completion::{Completion, CompletionSpace, OrbitRecord, COMPLETION_ROWS, COMPLETION_SIZE};
pub use group::{automorphisms, automorphisms_of_block, Symmetry, SymmetryGroup};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymmetryError {
    #[error("heavy-row order {heavy_rows:?} extends to more than one symmetry")]
    AmbiguousExtension { heavy_rows: Vec<usize> },
    #[error("cell ({row},{col}) of the block is unknown")]
    UnknownInBlock { row: usize, col: usize },
    #[error("not a group: {0}")]
    NotAGroup(String),
    #[error("image of row {row} cannot be renormalized onto the identity block")]
    NoRenormalization { row: usize },
    #[error("invalid completion: {0}")]
    InvalidCompletion(String),
}
