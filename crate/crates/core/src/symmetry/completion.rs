//! Completions of the six light rows through column 1 and their orbits under
//! the column-1 stabilizer.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Symmetry, SymmetryError, SymmetryGroup};
use crate::encoder::Clause;
use crate::lit::{Lit, Var, COLS};
use crate::matrix::{Cell, PartialMatrix, DIAGONAL_START_COLS, HEAVY_ROWS, KNOWN_ROWS};

/// The light rows completed in the first phase.
pub const COMPLETION_ROWS: std::ops::RangeInclusive<usize> = 22..=27;
pub const COMPLETION_SIZE: usize = 30;

/// Cells newly set to One in rows 22-27, sorted by (row, column).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Completion {
    cells: Vec<(usize, usize)>,
}

impl Completion {
    pub fn new(mut cells: Vec<(usize, usize)>) -> Completion {
        cells.sort_unstable();
        cells.dedup();
        Completion { cells }
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.cells.iter().map(|&(r, c)| Var::cell(r, c))
    }

    /// The positive literals of this completion; as assumptions they force it.
    pub fn literals(&self) -> Vec<Lit> {
        self.vars().map(|v| v.lit(true)).collect()
    }

    /// The clause excluding exactly this completion.
    pub fn blocking_clause(&self) -> Clause {
        Clause::new(self.vars().map(|v| v.lit(false)).collect()).expect("distinct cells")
    }
}

/// The fixed part of rows 22-27 plus the unknown cells a completion may use.
#[derive(Debug, Clone)]
pub struct CompletionSpace {
    matrix: PartialMatrix,
    base_ones: Vec<Vec<usize>>,
    block: std::ops::Range<usize>,
}

fn light_index(row: usize) -> usize {
    row - *COMPLETION_ROWS.start()
}

impl CompletionSpace {
    /// `m` must contain rows 1-27 with rows 1-21 fully known.
    pub fn new(m: &PartialMatrix) -> CompletionSpace {
        assert!(m.rows() >= *COMPLETION_ROWS.end());
        let start = DIAGONAL_START_COLS[0];
        CompletionSpace {
            matrix: m.restrict_rows(*COMPLETION_ROWS.end()),
            base_ones: COMPLETION_ROWS.map(|r| m.row_ones(r)).collect(),
            block: start..start + COMPLETION_ROWS.count(),
        }
    }

    pub fn matrix(&self) -> &PartialMatrix {
        &self.matrix
    }

    /// Variables a completion is drawn from.
    pub fn unknown_vars(&self) -> Vec<Var> {
        COMPLETION_ROWS
            .flat_map(|r| (1..=COLS).map(move |c| (r, c)))
            .filter(|&(r, c)| self.matrix.get(r, c) == Cell::Unknown)
            .map(|(r, c)| Var::cell(r, c))
            .collect()
    }

    /// Completion read off a model (indexed by variable).
    pub fn from_model(&self, model: &[bool]) -> Completion {
        self.from_true_vars(self.unknown_vars().into_iter().filter(|v| model[v.index()]))
    }

    pub fn from_true_vars(&self, vars: impl IntoIterator<Item = Var>) -> Completion {
        Completion::new(vars.into_iter().map(Var::to_cell).collect())
    }

    fn full_row(&self, c: &Completion, row: usize) -> Vec<usize> {
        let mut cols = self.base_ones[light_index(row)].clone();
        cols.extend(c.cells.iter().filter(|&&(r, _)| r == row).map(|&(_, col)| col));
        cols
    }

    /// Checks size, position and intersection properties of `c`.
    pub fn validate(&self, c: &Completion) -> Result<(), SymmetryError> {
        let bad = |msg: String| Err(SymmetryError::InvalidCompletion(msg));
        if c.len() != COMPLETION_SIZE {
            return bad(format!("{} cells, expected {COMPLETION_SIZE}", c.len()));
        }
        for &(r, col) in &c.cells {
            if !COMPLETION_ROWS.contains(&r) || self.matrix.get(r, col) != Cell::Unknown {
                return bad(format!("cell ({r},{col}) is not an open cell of rows 22-27"));
            }
        }
        let mut used = BTreeSet::new();
        for &(_, col) in &c.cells {
            if !used.insert(col) {
                return bad(format!("column {col} used twice"));
            }
        }
        let rows: Vec<Vec<usize>> = COMPLETION_ROWS.map(|r| self.full_row(c, r)).collect();
        let per_row = COMPLETION_SIZE / rows.len();
        for (k, r) in COMPLETION_ROWS.enumerate() {
            let n = c.cells.iter().filter(|&&(row, _)| row == r).count();
            if n != per_row {
                return bad(format!("row {r} has {n} new ones, expected {per_row}"));
            }
            // Heavy rows may meet light rows outside the modelled columns.
            for other in 1..=KNOWN_ROWS {
                let meet = rows[k].iter().filter(|&&col| self.matrix.is_one(other, col)).count();
                let ok = if HEAVY_ROWS.contains(&other) { meet <= 1 } else { meet == 1 };
                if !ok {
                    return bad(format!("rows {r} and {other} meet {meet} times"));
                }
            }
            for (k2, r2) in COMPLETION_ROWS.enumerate().skip(k + 1) {
                let meet = rows[k].iter().filter(|col| rows[k2].contains(col)).count();
                if meet != 1 {
                    return bad(format!("rows {r} and {r2} meet {meet} times"));
                }
            }
        }
        Ok(())
    }

    /// Image of `c` under `sym`: columns are permuted, then rows 22-27 are
    /// relabelled so that the identity block in columns 16-21 is restored.
    pub fn apply(&self, sym: &Symmetry, c: &Completion) -> Result<Completion, SymmetryError> {
        let mut slots: Vec<Option<Vec<usize>>> = vec![None; COMPLETION_ROWS.count()];
        for row in COMPLETION_ROWS {
            let image: Vec<usize> = self.full_row(c, row).into_iter().map(|col| sym.col(col)).collect();
            let in_block: Vec<usize> = image.iter().copied().filter(|col| self.block.contains(col)).collect();
            let [b] = in_block[..] else {
                return Err(SymmetryError::NoRenormalization { row });
            };
            let slot = &mut slots[b - self.block.start];
            if slot.is_some() {
                return Err(SymmetryError::NoRenormalization { row });
            }
            *slot = Some(image);
        }
        let mut cells = Vec::with_capacity(c.len());
        for (k, image) in slots.into_iter().enumerate() {
            let row = *COMPLETION_ROWS.start() + k;
            let image = image.expect("six rows fill six slots");
            let base = &self.base_ones[k];
            if !base.iter().all(|b| image.contains(b)) {
                return Err(SymmetryError::NoRenormalization { row });
            }
            cells.extend(image.into_iter().filter(|col| !base.contains(col)).map(|col| (row, col)));
        }
        Ok(Completion::new(cells))
    }

    /// Distinct images of `c` under `group`, with the canonical form.
    pub fn orbit(&self, group: &SymmetryGroup, c: &Completion, materialize: bool) -> Result<OrbitRecord, SymmetryError> {
        let mut members = BTreeSet::new();
        let mut fixing = 0;
        for sym in group.elements() {
            let img = self.apply(sym, c)?;
            if &img == c {
                fixing += 1;
            }
            members.insert(img);
        }
        let orbit_size = members.len();
        debug_assert_eq!(orbit_size * fixing, group.order());
        let representative = members.first().cloned().expect("identity image");
        Ok(OrbitRecord {
            representative,
            orbit_size,
            stabilizer_order: fixing,
            members: materialize.then(|| members.into_iter().collect()),
        })
    }

    pub fn canonical(&self, group: &SymmetryGroup, c: &Completion) -> Result<Completion, SymmetryError> {
        Ok(self.orbit(group, c, false)?.representative)
    }

    /// One blocking clause per distinct orbit member.
    pub fn blocking_clauses(&self, group: &SymmetryGroup, c: &Completion) -> Result<Vec<Clause>, SymmetryError> {
        let rec = self.orbit(group, c, true)?;
        Ok(rec.members.expect("materialized").iter().map(Completion::blocking_clause).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub representative: Completion,
    pub orbit_size: usize,
    /// Number of group elements mapping the representative to itself.
    pub stabilizer_order: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub members: Option<Vec<Completion>>,
}
