//! Certified refutation of weight-15 codewords in a projective plane of order ten.
//!
//! The crate encodes the incidence axioms of a partially known 51x75 incidence
//! matrix as CNF, breaks the symmetry of the known part with orbit-blocking
//! clauses, solves the instances with an embedded CDCL solver and checks the
//! resulting DRUP certificates with an independent checker.

pub mod encoder;
pub mod lit;
pub mod matrix;
pub mod pipeline;
pub mod proof;
pub mod sat;
pub mod symmetry;
