//! CNF generation for the incidence axioms.

mod cnf;
mod dimacs;
mod encode;

pub use cnf::{Clause, Cnf, Provenance};
pub use dimacs::{dimacs_string, read_dimacs, write_dimacs, DimacsError, DimacsFile};
pub use encode::{
    assemble, at_most_one_over, encode_at_least_one_cols, encode_at_least_one_rows,
    encode_at_most_one, encode_fixture, encode_units, EncodeError, EncodeOptions, Encoding,
    EncodingStats, EncodingVariant,
};
