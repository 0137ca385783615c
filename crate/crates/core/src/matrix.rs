//! The partial incidence matrix: rows 1-51 (lines) by columns 1-75 (points).
//!
//! All coordinates in the public API are 1-based, matching the row and
//! column numbering of the fixture text.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::lit::{Var, COLS};

pub const ROWS: usize = 51;
pub const HEAVY_ROWS: std::ops::RangeInclusive<usize> = 1..=6;
pub const MEDIUM_ROWS: std::ops::RangeInclusive<usize> = 7..=21;
pub const A_COLS: usize = 15;
/// Last row whose entries are fully known.
pub const KNOWN_ROWS: usize = 21;

/// The A-point column each group of six light rows passes through, in row order.
pub const LIGHT_GROUP_COLS: [usize; 5] = [1, 10, 15, 11, 14];
/// First column of the identity block of each light-row group.
pub const DIAGONAL_START_COLS: [usize; 5] = [16, 22, 28, 34, 39];
/// Columns whose light supports are used by the column at-least-one clauses.
pub const SUPPORT_COLS: [usize; 5] = [1, 10, 11, 14, 15];

/// The shipped fixture, transcribed from the published initial instantiation.
pub const FIXTURE: &str = include_str!("../data/initial_matrix.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cell {
    One,
    Zero,
    Unknown,
}

impl Cell {
    fn from_char(c: char) -> Option<Cell> {
        match c {
            '1' => Some(Cell::One),
            '0' => Some(Cell::Zero),
            '.' => Some(Cell::Unknown),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            Cell::One => '1',
            Cell::Zero => '0',
            Cell::Unknown => '.',
        }
    }

    pub fn is_known(self) -> bool {
        self != Cell::Unknown
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowClass {
    Heavy,
    Medium,
    Light,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColClass {
    A,
    C,
}

pub fn row_class(row: usize) -> RowClass {
    match row {
        1..=6 => RowClass::Heavy,
        7..=21 => RowClass::Medium,
        _ => RowClass::Light,
    }
}

pub fn col_class(col: usize) -> ColClass {
    if col <= A_COLS {
        ColClass::A
    } else {
        ColClass::C
    }
}

/// The light-row group (0..5) a row belongs to, if any.
pub fn light_group(row: usize) -> Option<usize> {
    (22..=ROWS).contains(&row).then(|| (row - 22) / 6)
}

/// Diagonal column of a light row's identity block.
pub fn diagonal_col(row: usize) -> Option<usize> {
    light_group(row).map(|g| DIAGONAL_START_COLS[g] + (row - 22) % 6)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("bad dimensions: {0}")]
    BadDimensions(String),
    #[error("bad character {ch:?} at row {row}, column {col}")]
    BadCharacter { row: usize, col: usize, ch: char },
    #[error("invariant violated: {0}")]
    InvariantViolation(Finding),
    #[error("forced-zero propagation hit a contradiction at row {row}, column {col}")]
    Contradiction { row: usize, col: usize },
    #[error("assignment does not cover unknown cell ({row}, {col})")]
    IncompleteAssignment { row: usize, col: usize },
}

/// One violated structural property.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Finding {
    UnknownInKnownRegion { row: usize, col: usize },
    RowsIntersectTwice { rows: (usize, usize), cols: Vec<usize> },
    ColsIntersectTwice { cols: (usize, usize), rows: Vec<usize> },
    LightRowGroup { row: usize, expected_col: usize },
    DiagonalBlock { row: usize, col: usize },
    RowWeight { row: usize, region: ColClass, expected: usize, found: usize },
    Unassigned { row: usize, col: usize },
    MediumRowMissed { medium: usize, light: usize },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::UnknownInKnownRegion { row, col } => {
                write!(f, "unknown-in-known-region row={row} col={col}")
            }
            Finding::RowsIntersectTwice { rows, cols } => {
                write!(f, "rows-intersect-twice rows={},{} cols={cols:?}", rows.0, rows.1)
            }
            Finding::ColsIntersectTwice { cols, rows } => {
                write!(f, "cols-intersect-twice cols={},{} rows={rows:?}", cols.0, cols.1)
            }
            Finding::LightRowGroup { row, expected_col } => {
                write!(f, "light-row-group row={row} expected_col={expected_col}")
            }
            Finding::DiagonalBlock { row, col } => write!(f, "diagonal-block row={row} col={col}"),
            Finding::RowWeight { row, region, expected, found } => {
                write!(f, "row-weight row={row} region={region:?} expected={expected} found={found}")
            }
            Finding::Unassigned { row, col } => write!(f, "unassigned row={row} col={col}"),
            Finding::MediumRowMissed { medium, light } => {
                write!(f, "medium-row-missed medium={medium} light={light}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.findings.is_empty()
    }

    /// Line-oriented rendering, one finding per line.
    pub fn to_text(&self) -> String {
        if self.findings.is_empty() {
            return "ok\n".to_string();
        }
        self.findings.iter().map(|f| format!("{f}\n")).collect()
    }
}

/// A partial incidence matrix with `rows` rows (at most 51) and 75 columns.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialMatrix {
    rows: usize,
    cells: Vec<Cell>,
}

impl fmt::Debug for PartialMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartialMatrix({}x{COLS})\n{}", self.rows, self.to_fixture_string())
    }
}

impl PartialMatrix {
    /// All-unknown matrix.
    pub fn unknown(rows: usize) -> PartialMatrix {
        assert!(rows <= ROWS);
        PartialMatrix { rows, cells: vec![Cell::Unknown; rows * COLS] }
    }

    /// The shipped fixture, validated.
    pub fn fixture() -> PartialMatrix {
        load_fixture(FIXTURE).expect("shipped fixture is valid")
    }

    /// Parses the fixture grammar without checking structural invariants.
    pub fn parse_grid(text: &str) -> Result<PartialMatrix, MatrixError> {
        let lines: Vec<&str> = text.lines().collect();
        if lines.is_empty() || lines.len() > ROWS {
            return Err(MatrixError::BadDimensions(format!(
                "expected {ROWS} lines, found {}",
                lines.len()
            )));
        }
        let mut cells = Vec::with_capacity(lines.len() * COLS);
        for (r, line) in lines.iter().enumerate() {
            let n = line.chars().count();
            if n != COLS {
                return Err(MatrixError::BadDimensions(format!(
                    "line {} has {n} characters, expected {COLS}",
                    r + 1
                )));
            }
            for (c, ch) in line.chars().enumerate() {
                let cell = Cell::from_char(ch)
                    .ok_or(MatrixError::BadCharacter { row: r + 1, col: c + 1, ch })?;
                cells.push(cell);
            }
        }
        Ok(PartialMatrix { rows: lines.len(), cells })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Cell {
        debug_assert!((1..=self.rows).contains(&row) && (1..=COLS).contains(&col));
        self.cells[(row - 1) * COLS + col - 1]
    }

    #[inline]
    pub fn is_one(&self, row: usize, col: usize) -> bool {
        self.get(row, col) == Cell::One
    }

    /// Copy with one cell replaced.
    pub fn with_cell(&self, row: usize, col: usize, cell: Cell) -> PartialMatrix {
        let mut m = self.clone();
        m.cells[(row - 1) * COLS + col - 1] = cell;
        m
    }

    /// The first `rows` rows of this matrix.
    pub fn restrict_rows(&self, rows: usize) -> PartialMatrix {
        assert!(rows <= self.rows, "cannot restrict {} rows to {rows}", self.rows);
        PartialMatrix { rows, cells: self.cells[..rows * COLS].to_vec() }
    }

    pub fn to_fixture_string(&self) -> String {
        let mut s = String::with_capacity(self.rows * (COLS + 1));
        for r in 1..=self.rows {
            for c in 1..=COLS {
                s.push(self.get(r, c).to_char());
            }
            s.push('\n');
        }
        s
    }

    /// Hex SHA-256 of the fixture-format serialization.
    pub fn content_hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_fixture_string().as_bytes()))
    }

    pub fn unknown_count(&self) -> usize {
        self.cells.iter().filter(|c| **c == Cell::Unknown).count()
    }

    pub fn known_count(&self) -> usize {
        self.cells.len() - self.unknown_count()
    }

    /// Columns of the Ones in a row, ascending.
    pub fn row_ones(&self, row: usize) -> Vec<usize> {
        (1..=COLS).filter(|&c| self.is_one(row, c)).collect()
    }

    /// Rows of the Ones in a column, ascending.
    pub fn col_ones(&self, col: usize) -> Vec<usize> {
        (1..=self.rows).filter(|&r| self.is_one(r, col)).collect()
    }

    pub fn validate_structure(&self) -> ValidationReport {
        validate_structure(self)
    }

    /// Fills every Unknown cell from `value`; known cells are kept.
    pub fn apply_model<F>(&self, value: F) -> Result<PartialMatrix, MatrixError>
    where
        F: Fn(Var) -> Option<bool>,
    {
        let mut m = self.clone();
        for r in 1..=self.rows {
            for c in 1..=COLS {
                if self.get(r, c) == Cell::Unknown {
                    let v = value(Var::cell(r, c))
                        .ok_or(MatrixError::IncompleteAssignment { row: r, col: c })?;
                    m.cells[(r - 1) * COLS + c - 1] = if v { Cell::One } else { Cell::Zero };
                }
            }
        }
        Ok(m)
    }
}

/// Parses and validates a fixture.
pub fn load_fixture(text: &str) -> Result<PartialMatrix, MatrixError> {
    let m = PartialMatrix::parse_grid(text)?;
    if m.rows != ROWS {
        return Err(MatrixError::BadDimensions(format!(
            "expected {ROWS} lines, found {}",
            m.rows
        )));
    }
    match validate_structure(&m).findings.into_iter().next() {
        Some(f) => Err(MatrixError::InvariantViolation(f)),
        None => Ok(m),
    }
}

fn expected_weights(row: usize) -> Option<(usize, usize)> {
    match row_class(row) {
        RowClass::Heavy => Some((5, 0)),
        RowClass::Medium => Some((3, 8)),
        RowClass::Light => None,
    }
}

pub fn validate_structure(m: &PartialMatrix) -> ValidationReport {
    let mut findings = Vec::new();
    let rows = m.rows;

    for r in 1..=rows {
        for c in 1..=COLS {
            if m.get(r, c) == Cell::Unknown && (r <= KNOWN_ROWS || c <= A_COLS) {
                findings.push(Finding::UnknownInKnownRegion { row: r, col: c });
            }
        }
    }

    for r in 1..=rows.min(KNOWN_ROWS) {
        if let Some((a, cw)) = expected_weights(r) {
            let ones = m.row_ones(r);
            let in_a = ones.iter().filter(|&&c| c <= A_COLS).count();
            let in_c = ones.len() - in_a;
            if in_a != a {
                findings.push(Finding::RowWeight { row: r, region: ColClass::A, expected: a, found: in_a });
            }
            if in_c != cw {
                findings.push(Finding::RowWeight { row: r, region: ColClass::C, expected: cw, found: in_c });
            }
        }
    }

    let row_sets: Vec<Vec<usize>> = (1..=rows).map(|r| m.row_ones(r)).collect();
    for a in 0..rows {
        for b in a + 1..rows {
            let common: Vec<usize> =
                row_sets[a].iter().filter(|c| row_sets[b].contains(c)).copied().collect();
            if common.len() > 1 {
                findings.push(Finding::RowsIntersectTwice { rows: (a + 1, b + 1), cols: common });
            }
        }
    }
    let col_sets: Vec<Vec<usize>> = (1..=COLS).map(|c| m.col_ones(c)).collect();
    for a in 0..COLS {
        for b in a + 1..COLS {
            let common: Vec<usize> =
                col_sets[a].iter().filter(|r| col_sets[b].contains(r)).copied().collect();
            if common.len() > 1 {
                findings.push(Finding::ColsIntersectTwice { cols: (a + 1, b + 1), rows: common });
            }
        }
    }

    for r in 22..=rows {
        let g = light_group(r).expect("light row");
        let expected_col = LIGHT_GROUP_COLS[g];
        let a_ones: Vec<usize> = (1..=A_COLS).filter(|&c| m.is_one(r, c)).collect();
        if a_ones != [expected_col] {
            findings.push(Finding::LightRowGroup { row: r, expected_col });
        }
        let start = DIAGONAL_START_COLS[g];
        let diag = diagonal_col(r).expect("light row");
        for c in start..start + 6 {
            let bad = if c == diag { !m.is_one(r, c) } else { m.is_one(r, c) };
            if bad {
                findings.push(Finding::DiagonalBlock { row: r, col: c });
            }
        }
    }

    ValidationReport { findings }
}

/// Structural validation of a fully assigned matrix: everything
/// [`validate_structure`] checks, no cell left open, and every medium row
/// meeting every light row inside the modelled columns.
pub fn validate_partial_plane(m: &PartialMatrix) -> ValidationReport {
    let mut report = validate_structure(m);
    for r in 1..=m.rows {
        for c in 1..=COLS {
            if m.get(r, c) == Cell::Unknown {
                report.findings.push(Finding::Unassigned { row: r, col: c });
            }
        }
    }
    for medium in MEDIUM_ROWS {
        let support = m.row_ones(medium);
        for light in 22..=m.rows {
            if !support.iter().any(|&c| m.is_one(light, c)) {
                report.findings.push(Finding::MediumRowMissed { medium, light });
            }
        }
    }
    report
}

/// Sets to Zero every Unknown cell that, if it were One, would make some pair
/// of rows or columns meet twice given the currently known Ones. Returns the
/// new matrix and the number of cells that were forced.
pub fn propagate_forced_zeros(m: &PartialMatrix) -> Result<(PartialMatrix, usize), MatrixError> {
    let rows = m.rows;
    let mut row_meet = vec![vec![0usize; rows + 1]; rows + 1];
    for a in 1..=rows {
        for b in a + 1..=rows {
            let n = (1..=COLS).filter(|&c| m.is_one(a, c) && m.is_one(b, c)).count();
            if n > 1 {
                return Err(MatrixError::Contradiction { row: b, col: 0 });
            }
            row_meet[a][b] = n;
            row_meet[b][a] = n;
        }
    }
    let mut col_meet = vec![vec![0usize; COLS + 1]; COLS + 1];
    for a in 1..=COLS {
        for b in a + 1..=COLS {
            let n = (1..=rows).filter(|&r| m.is_one(r, a) && m.is_one(r, b)).count();
            if n > 1 {
                return Err(MatrixError::Contradiction { row: 0, col: b });
            }
            col_meet[a][b] = n;
            col_meet[b][a] = n;
        }
    }

    // Only Ones create constraints, so a single sweep reaches the fixpoint.
    let mut out = m.clone();
    let mut forced = 0;
    for r in 1..=rows {
        for c in 1..=COLS {
            if m.get(r, c) != Cell::Unknown {
                continue;
            }
            let via_rows = (1..=rows).any(|r2| r2 != r && m.is_one(r2, c) && row_meet[r][r2] > 0);
            let via_cols =
                (1..=COLS).any(|c2| c2 != c && m.is_one(r, c2) && col_meet[c][c2] > 0);
            if via_rows || via_cols {
                out.cells[(r - 1) * COLS + c - 1] = Cell::Zero;
                forced += 1;
            }
        }
    }
    Ok((out, forced))
}

/// Row supports of the medium rows and light supports of the selected A columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupportSets {
    /// Medium row -> columns holding a One.
    pub rows: BTreeMap<usize, Vec<usize>>,
    /// Column in [`SUPPORT_COLS`] -> light rows holding a One.
    pub cols: BTreeMap<usize, Vec<usize>>,
}

pub fn support_sets(m: &PartialMatrix) -> SupportSets {
    let rows = MEDIUM_ROWS.filter(|&r| r <= m.rows).map(|r| (r, m.row_ones(r))).collect();
    let cols = SUPPORT_COLS
        .iter()
        .map(|&k| (k, (22..=m.rows).filter(|&r| m.is_one(r, k)).collect()))
        .collect();
    SupportSets { rows, cols }
}
