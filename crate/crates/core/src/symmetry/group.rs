//! Automorphisms of the known top-left block of the matrix.
//!
//! Within the known 21x75 block heavy rows have weight 5 and medium rows 11,
//! A columns weight 5 and C columns weight 2, so every automorphism maps each
//! class to itself. The search therefore only needs to try the 720 orders of
//! the heavy rows: their images fix the A columns (distinct heavy-row
//! patterns), which fix the medium rows (distinct A patterns), which fix the
//! C columns (distinct medium-row patterns).

use std::collections::{HashMap, HashSet};
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::SymmetryError;
use crate::matrix::{PartialMatrix, A_COLS, HEAVY_ROWS, KNOWN_ROWS};

/// A paired row/column permutation. `row_perm[i]` is the image of row `i + 1`
/// and `col_perm[j]` that of column `j + 1`; images are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symmetry {
    pub row_perm: Vec<usize>,
    pub col_perm: Vec<usize>,
}

impl Symmetry {
    pub fn identity(rows: usize, cols: usize) -> Symmetry {
        Symmetry { row_perm: (1..=rows).collect(), col_perm: (1..=cols).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.row_perm.iter().enumerate().all(|(i, &r)| r == i + 1) && self.col_perm.iter().enumerate().all(|(j, &c)| c == j + 1)
    }

    #[inline]
    pub fn row(&self, r: usize) -> usize {
        self.row_perm[r - 1]
    }

    #[inline]
    pub fn col(&self, c: usize) -> usize {
        self.col_perm[c - 1]
    }

    /// `self` after `other`.
    pub fn compose(&self, other: &Symmetry) -> Symmetry {
        Symmetry {
            row_perm: other.row_perm.iter().map(|&r| self.row(r)).collect(),
            col_perm: other.col_perm.iter().map(|&c| self.col(c)).collect(),
        }
    }

    pub fn inverse(&self) -> Symmetry {
        let mut row_perm = vec![0; self.row_perm.len()];
        for (i, &r) in self.row_perm.iter().enumerate() {
            row_perm[r - 1] = i + 1;
        }
        let mut col_perm = vec![0; self.col_perm.len()];
        for (j, &c) in self.col_perm.iter().enumerate() {
            col_perm[c - 1] = j + 1;
        }
        Symmetry { row_perm, col_perm }
    }

    /// True when moving entry (i, j) to (row(i), col(j)) reproduces the top-left
    /// block of `m` covered by this symmetry.
    pub fn fixes(&self, m: &PartialMatrix) -> bool {
        (1..=self.row_perm.len())
            .all(|i| (1..=self.col_perm.len()).all(|j| m.get(i, j) == m.get(self.row(i), self.col(j))))
    }
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rows {:?} cols {:?}", self.row_perm, self.col_perm)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    elements: Vec<Symmetry>,
}

impl SymmetryGroup {
    /// Builds a group, verifying identity, closure and inverses.
    pub fn new(mut elements: Vec<Symmetry>) -> Result<SymmetryGroup, SymmetryError> {
        elements.sort();
        elements.dedup();
        let Some(first) = elements.first() else {
            return Err(SymmetryError::NotAGroup("no elements".into()));
        };
        let set: HashSet<&Symmetry> = elements.iter().collect();
        let id = Symmetry::identity(first.row_perm.len(), first.col_perm.len());
        if !set.contains(&id) {
            return Err(SymmetryError::NotAGroup("identity missing".into()));
        }
        for a in &elements {
            if !set.contains(&a.inverse()) {
                return Err(SymmetryError::NotAGroup(format!("inverse of {a} missing")));
            }
            for b in &elements {
                if !set.contains(&a.compose(b)) {
                    return Err(SymmetryError::NotAGroup(format!("{a} after {b} missing")));
                }
            }
        }
        Ok(SymmetryGroup { elements })
    }

    /// Sorted, so the identity comes first.
    pub fn elements(&self) -> &[Symmetry] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Subgroup of elements fixing `column`.
    pub fn stabilizer(&self, column: usize) -> SymmetryGroup {
        SymmetryGroup { elements: self.elements.iter().filter(|s| s.col(column) == column).cloned().collect() }
    }
}

/// Image of each class member under a pattern-preserving map: member `x` with
/// pattern `p` goes to the unique member whose pattern is `image(p)`.
fn extend<F>(members: &[usize], pattern: impl Fn(usize) -> u64, image: F) -> Result<Option<HashMap<usize, usize>>, ()>
where
    F: Fn(u64) -> u64,
{
    let mut by_pattern: HashMap<u64, Vec<usize>> = HashMap::new();
    for &x in members {
        by_pattern.entry(pattern(x)).or_default().push(x);
    }
    let mut map = HashMap::new();
    for &x in members {
        match by_pattern.get(&image(pattern(x))).map(Vec::as_slice) {
            None | Some([]) => return Ok(None),
            Some([y]) => {
                map.insert(x, *y);
            }
            Some(_) => return Err(()),
        }
    }
    Ok(Some(map))
}

fn mask(items: impl Iterator<Item = usize>) -> u64 {
    items.fold(0, |m, i| m | 1 << i)
}

fn permute_mask(m: u64, f: impl Fn(usize) -> usize) -> u64 {
    (0..64).filter(|&i| m >> i & 1 == 1).fold(0, |acc, i| acc | 1 << f(i))
}

/// Automorphisms of the top-left `rows` x `cols` block of `m`, where `rows`
/// is 6 (heavy rows only) or 21, and `cols` is 15 (A columns only) or 75.
pub fn automorphisms_of_block(m: &PartialMatrix, rows: usize, cols: usize) -> Result<SymmetryGroup, SymmetryError> {
    let heavy: Vec<usize> = HEAVY_ROWS.collect();
    let h = heavy.len();
    assert!(rows == h || rows == KNOWN_ROWS, "unsupported block height {rows}");
    assert!(cols == A_COLS || cols == crate::lit::COLS, "unsupported block width {cols}");
    if let Some((r, c)) = (1..=rows).cartesian_product(1..=cols).find(|&(r, c)| !m.get(r, c).is_known()) {
        return Err(SymmetryError::UnknownInBlock { row: r, col: c });
    }
    let a_cols: Vec<usize> = (1..=A_COLS).collect();
    let medium: Vec<usize> = (h + 1..=rows).collect();
    let c_cols: Vec<usize> = (A_COLS + 1..=cols).collect();

    let mut found = Vec::new();
    for order in heavy.iter().copied().permutations(h) {
        let sigma = |r: usize| order[r - 1];
        let ambiguous = || SymmetryError::AmbiguousExtension { heavy_rows: order.clone() };
        // Bit index = row or column number.
        let col_pattern_heavy = |c: usize| mask(heavy.iter().copied().filter(|&r| m.is_one(r, c)));
        let Some(a_map) = extend(&a_cols, col_pattern_heavy, |p| permute_mask(p, sigma)).map_err(|_| ambiguous())? else {
            continue;
        };
        let row_pattern_a = |r: usize| mask(a_cols.iter().copied().filter(|&c| m.is_one(r, c)));
        let Some(med_map) = extend(&medium, row_pattern_a, |p| permute_mask(p, |c| a_map[&c])).map_err(|_| ambiguous())? else {
            continue;
        };
        let row_img = |r: usize| if r <= h { sigma(r) } else { med_map[&r] };
        let col_pattern_rows = |c: usize| mask((1..=rows).filter(|&r| m.is_one(r, c)));
        let Some(c_map) = extend(&c_cols, col_pattern_rows, |p| permute_mask(p, row_img)).map_err(|_| ambiguous())? else {
            continue;
        };
        let sym = Symmetry {
            row_perm: (1..=rows).map(row_img).collect(),
            col_perm: (1..=cols).map(|c| if c <= A_COLS { a_map[&c] } else { c_map[&c] }).collect(),
        };
        if sym.fixes(m) {
            found.push(sym);
        }
    }
    SymmetryGroup::new(found)
}

/// Automorphisms of the known 21x75 block.
pub fn automorphisms(m: &PartialMatrix) -> Result<SymmetryGroup, SymmetryError> {
    automorphisms_of_block(m, KNOWN_ROWS, crate::lit::COLS)
}
