//! Variables and literals shared by the encoder, the solver and the proof checker.
//!
//! Variables are stored 0-based internally. DIMACS numbering is 1-based, and the
//! incidence variable for cell `(row, col)` (both 1-based) is `(row - 1) * 75 + col`.

use std::fmt;
use std::ops::Not;

use serde::{Deserialize, Serialize};

/// Number of columns in the modelled window; fixes the variable numbering.
pub const COLS: usize = 75;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var(pub u32);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_dimacs(n: u32) -> Var {
        debug_assert!(n > 0);
        Var(n - 1)
    }

    pub fn to_dimacs(self) -> u32 {
        self.0 + 1
    }

    /// Variable of the incidence cell at 1-based `(row, col)`.
    pub fn cell(row: usize, col: usize) -> Var {
        debug_assert!(row >= 1 && (1..=COLS).contains(&col));
        Var(((row - 1) * COLS + col - 1) as u32)
    }

    /// Inverse of [`Var::cell`].
    pub fn to_cell(self) -> (usize, usize) {
        let i = self.index();
        (i / COLS + 1, i % COLS + 1)
    }

    #[inline]
    pub fn lit(self, positive: bool) -> Lit {
        Lit::new(self, positive)
    }
}

/// A literal: `2 * var + (negated as u32)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    #[inline]
    pub fn new(var: Var, positive: bool) -> Lit {
        Lit(var.0 << 1 | (!positive) as u32)
    }

    #[inline]
    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Dense index usable for per-literal tables.
    #[inline]
    pub fn code(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn from_code(code: usize) -> Lit {
        Lit(code as u32)
    }

    pub fn from_dimacs(n: i32) -> Lit {
        debug_assert!(n != 0);
        Lit::new(Var::from_dimacs(n.unsigned_abs()), n > 0)
    }

    pub fn to_dimacs(self) -> i32 {
        let v = self.var().to_dimacs() as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl Not for Lit {
    type Output = Lit;

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl Serialize for Lit {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i32(self.to_dimacs())
    }
}

impl<'de> Deserialize<'de> for Lit {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Lit, D::Error> {
        let n = i32::deserialize(d)?;
        if n == 0 {
            return Err(serde::de::Error::custom("literal 0 is not a valid literal"));
        }
        Ok(Lit::from_dimacs(n))
    }
}
